//! Answer tables for tabled predicates and functions.
//!
//! A call to a tabled predicate is looked up by its key. A new call becomes
//! a producer: its clauses are run to exhaustion and every answer is stored.
//! A call that reaches a producer still being evaluated consumes the answers
//! found so far and marks a loop; the leader of the strongly connected
//! group of calls then re-runs its clauses until no table gains an answer.
//! Mode-directed tables (`min`/`max`) keep only the best answer per key.

use std::collections::{HashMap, HashSet};
use std::rc::Rc;

use crate::engine::{EResult, Engine, EngineError};
use crate::engine::{AltStream, Cont, PredId, Step};
use crate::parser::{Mode, TableDecl};
use crate::term::{Term, View};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TableStats {
    /// Number of distinct table keys.
    pub entries: usize,
    pub answers: usize,
    /// Producer runs started for a new or incomplete key.
    pub producer_evaluations: u64,
    /// Passes over producer clauses, including fixpoint re-runs.
    pub producer_iterations: u64,
    /// Calls answered from a table without running clauses.
    pub consumer_calls: u64,
    pub loops_detected: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Status {
    New,
    Evaluating { dfn: u64, low: u64 },
    Incomplete,
    Complete,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Optimize {
    Min(usize),
    Max(usize),
}

struct Entry {
    pred: PredId,
    status: Status,
    /// Canonical answer tuples (arrays over `positions`) and whether they
    /// contain variable markers.
    answers: Vec<(Term, bool)>,
    seen: HashSet<Term>,
}

/// Which call arguments form the key and the answers.
struct Layout {
    key_pos: Vec<usize>,
    /// Argument positions stored in answers.
    positions: Rc<[usize]>,
    /// Argument positions replaced by fresh variables during evaluation.
    outputs: Vec<usize>,
    optimize: Option<Optimize>,
}

#[derive(Default)]
pub(crate) struct Tables {
    index: HashMap<(PredId, Term), usize>,
    entries: Vec<Entry>,
    call_stack: Vec<usize>,
    pending: Vec<(usize, u64)>,
    next_dfn: u64,
    answers_added: u64,
    loop_hits: u64,
    evaluations: u64,
    iterations: u64,
    consumer_calls: u64,
    per_pred: HashMap<PredId, TableStats>,
}

impl Tables {
    /// Statistics per tabled predicate, ordered by predicate id.
    pub fn by_pred(&self) -> Vec<(PredId, TableStats)> {
        let mut out: HashMap<PredId, TableStats> = self.per_pred.clone();
        for e in &self.entries {
            let st = out.entry(e.pred).or_default();
            st.entries += 1;
            st.answers += e.answers.len();
        }
        let mut v: Vec<(PredId, TableStats)> = out.into_iter().collect();
        v.sort_by_key(|x| x.0);
        v
    }

    pub fn clear(&mut self) {
        *self = Tables::default();
    }

    pub fn stats(&self, _eng: &Engine) -> TableStats {
        TableStats {
            entries: self.entries.len(),
            answers: self.entries.iter().map(|e| e.answers.len()).sum(),
            producer_evaluations: self.evaluations,
            producer_iterations: self.iterations,
            consumer_calls: self.consumer_calls,
            loops_detected: self.loop_hits,
        }
    }

    /// Drops every table that is not complete, after an error.
    fn abort(&mut self) {
        let keep: Vec<bool> = self
            .entries
            .iter()
            .map(|e| e.status == Status::Complete)
            .collect();
        self.index.retain(|_, &mut i| keep[i]);
        for (i, e) in self.entries.iter_mut().enumerate() {
            if !keep[i] {
                e.status = Status::New;
                e.answers.clear();
                e.seen.clear();
            }
        }
        self.call_stack.clear();
        self.pending.clear();
    }

    fn dfn(&self, e: usize) -> Option<u64> {
        match self.entries[e].status {
            Status::Evaluating { dfn, .. } => Some(dfn),
            _ => None,
        }
    }

    fn low(&self, e: usize) -> u64 {
        match self.entries[e].status {
            Status::Evaluating { low, .. } => low,
            _ => u64::MAX,
        }
    }

    fn lower(&mut self, e: usize, to: u64) {
        if let Status::Evaluating { low, .. } = &mut self.entries[e].status {
            *low = (*low).min(to);
        }
    }

    /// A consumer reached entry `e` while it is being evaluated.
    fn mark_loop(&mut self, e: usize) {
        self.loop_hits += 1;
        let d = self.dfn(e).expect("entry under evaluation");
        for i in (0..self.call_stack.len()).rev() {
            let x = self.call_stack[i];
            if x == e {
                break;
            }
            self.lower(x, d);
        }
    }
}

struct TableStream {
    entry: usize,
    pos: usize,
    args: Rc<[Term]>,
    positions: Rc<[usize]>,
}

impl AltStream for TableStream {
    fn next_alt(&mut self, eng: &mut Engine) -> EResult<Option<Vec<(Term, Term)>>> {
        let Some(&(ans, has_vars)) = eng.tables.entries[self.entry].answers.get(self.pos) else {
            return Ok(None);
        };
        self.pos += 1;
        let t = if has_vars { eng.instantiate(ans) } else { ans };
        let items = match eng.store.view(t) {
            View::Array(xs) => xs.to_vec(),
            _ => unreachable!("answers are arrays"),
        };
        Ok(Some(
            self.positions
                .iter()
                .zip(items)
                .map(|(&p, x)| (self.args[p], x))
                .collect(),
        ))
    }
}

impl Engine {
    fn table_layout(&self, pid: PredId) -> EResult<Layout> {
        let pred = &self.preds[pid];
        let n = pred.arity;
        let user_arity = n - usize::from(pred.function);
        let decl = pred.table.as_ref().expect("tabled predicate");
        let all: Vec<usize> = (0..n).collect();
        match decl {
            TableDecl::AllArgs => Ok(Layout {
                key_pos: (0..user_arity).collect(),
                positions: all.into(),
                outputs: if pred.function { vec![n - 1] } else { Vec::new() },
                optimize: None,
            }),
            TableDecl::Modes(mt) => {
                let mut modes = mt.0.clone();
                if modes.len() == user_arity && pred.function {
                    modes.push(Mode::Minus);
                }
                if modes.len() != n {
                    return Err(EngineError::Other(format!(
                        "table modes for {}/{} have the wrong arity",
                        pred.name, user_arity
                    )));
                }
                let mut key_pos = Vec::new();
                let mut positions = Vec::new();
                let mut outputs = Vec::new();
                let mut optimize = None;
                for (i, m) in modes.iter().enumerate() {
                    match m {
                        Mode::Plus => {
                            key_pos.push(i);
                            positions.push(i);
                        }
                        Mode::Minus => {
                            positions.push(i);
                            outputs.push(i);
                        }
                        Mode::Min | Mode::Max => {
                            let k = positions.len();
                            optimize = Some(if *m == Mode::Min {
                                Optimize::Min(k)
                            } else {
                                Optimize::Max(k)
                            });
                            positions.push(i);
                            outputs.push(i);
                        }
                        Mode::Nt => {}
                    }
                }
                Ok(Layout {
                    key_pos,
                    positions: positions.into(),
                    outputs,
                    optimize,
                })
            }
        }
    }

    pub(crate) fn tabled_call(&mut self, pid: PredId, args: Rc<[Term]>, rest: Cont) -> EResult<Step> {
        let layout = self.table_layout(pid)?;
        let is_modes = matches!(self.preds[pid].table, Some(TableDecl::Modes(_)));
        let key_items: Vec<Term> = layout.key_pos.iter().map(|&i| args[i]).collect();
        let raw_key = self.store.array(&key_items);
        let (key, key_vars) = self.canonical(raw_key);
        if is_modes && key_vars {
            return Err(EngineError::Instantiation(format!(
                "tabled call to {} with an unbound input argument",
                self.preds[pid].name
            )));
        }
        let eid = match self.tables.index.get(&(pid, key)) {
            Some(&e) => e,
            None => {
                let e = self.tables.entries.len();
                self.tables.entries.push(Entry {
                    pred: pid,
                    status: Status::New,
                    answers: Vec::new(),
                    seen: HashSet::new(),
                });
                self.tables.index.insert((pid, key), e);
                e
            }
        };
        match self.tables.entries[eid].status {
            Status::Complete => {
                self.tables.consumer_calls += 1;
                self.tables.per_pred.entry(pid).or_default().consumer_calls += 1;
            }
            Status::Evaluating { .. } => {
                self.tables.consumer_calls += 1;
                self.tables.per_pred.entry(pid).or_default().consumer_calls += 1;
                self.tables.mark_loop(eid);
            }
            Status::New | Status::Incomplete => {
                let mut eval_args: Vec<Term> = args.to_vec();
                for &o in &layout.outputs {
                    eval_args[o] = self.fresh_var();
                }
                if let Err(e) = self.evaluate(pid, eid, eval_args, &layout) {
                    self.tables.abort();
                    return Err(e);
                }
            }
        }
        let stream = Box::new(TableStream {
            entry: eid,
            pos: 0,
            args,
            positions: layout.positions.clone(),
        });
        self.stream_alts(stream, rest)
    }

    fn evaluate(&mut self, pid: PredId, eid: usize, eval_args: Vec<Term>, layout: &Layout) -> EResult<()> {
        let t = &mut self.tables;
        let dfn = t.next_dfn;
        t.next_dfn += 1;
        t.entries[eid].status = Status::Evaluating { dfn, low: dfn };
        t.call_stack.push(eid);
        t.evaluations += 1;
        t.per_pred.entry(pid).or_default().producer_evaluations += 1;
        loop {
            self.tables.iterations += 1;
            self.tables.per_pred.entry(pid).or_default().producer_iterations += 1;
            let added0 = self.tables.answers_added;
            let loops0 = self.tables.loop_hits;
            self.call_nested(pid, eval_args.clone(), |eng, sol| {
                eng.add_answer(eid, sol, layout);
                Ok(true)
            })?;
            let t = &self.tables;
            if t.loop_hits == loops0 || t.answers_added == added0 || t.low(eid) < dfn {
                break;
            }
        }
        let t = &mut self.tables;
        t.call_stack.pop();
        let low = t.low(eid);
        if low >= dfn {
            t.entries[eid].status = Status::Complete;
            while let Some(&(e, d)) = t.pending.last() {
                if d <= dfn {
                    break;
                }
                t.entries[e].status = Status::Complete;
                t.pending.pop();
            }
        } else {
            t.entries[eid].status = Status::Incomplete;
            t.pending.push((eid, dfn));
            if let Some(&parent) = t.call_stack.last() {
                t.lower(parent, low);
            }
        }
        Ok(())
    }

    fn add_answer(&mut self, eid: usize, sol: &[Term], layout: &Layout) {
        let items: Vec<Term> = layout.positions.iter().map(|&p| sol[p]).collect();
        let tuple = self.store.array(&items);
        let (ans, has_vars) = self.canonical(tuple);
        let entry = &self.tables.entries[eid];
        match layout.optimize {
            None => {
                if entry.seen.contains(&ans) {
                    return;
                }
                let e = &mut self.tables.entries[eid];
                e.seen.insert(ans);
                e.answers.push((ans, has_vars));
                self.tables.answers_added += 1;
            }
            Some(opt) => {
                let better = match entry.answers.first() {
                    None => true,
                    Some(&(old, _)) => {
                        let (k, want) = match opt {
                            Optimize::Min(k) => (k, std::cmp::Ordering::Less),
                            Optimize::Max(k) => (k, std::cmp::Ordering::Greater),
                        };
                        let a = self.tuple_item(ans, k);
                        let b = self.tuple_item(old, k);
                        self.compare_terms(a, b) == want
                    }
                };
                if better {
                    let e = &mut self.tables.entries[eid];
                    e.answers.clear();
                    e.answers.push((ans, has_vars));
                    self.tables.answers_added += 1;
                }
            }
        }
    }

    fn tuple_item(&self, t: Term, k: usize) -> Term {
        match self.store.view(t) {
            View::Array(xs) => xs[k],
            _ => unreachable!("answers are arrays"),
        }
    }
}

/// Outcome of offering an answer to a mode-directed table slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Update {
    Unchanged,
    Replaced,
}

/// Min/max answer update rule: a strictly better value replaces the
/// current one.
pub fn update_optimum(current: Option<i64>, offered: i64, minimize: bool) -> (i64, Update) {
    match current {
        None => (offered, Update::Replaced),
        Some(c) if (minimize && offered < c) || (!minimize && offered > c) => (offered, Update::Replaced),
        Some(c) => (c, Update::Unchanged),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_update_rule() {
        assert_eq!(update_optimum(Some(7), 9, true), (7, Update::Unchanged));
        assert_eq!(update_optimum(Some(7), 5, true), (5, Update::Replaced));
        assert_eq!(update_optimum(None, 5, true), (5, Update::Replaced));
        assert_eq!(update_optimum(Some(7), 7, false), (7, Update::Unchanged));
    }
}
