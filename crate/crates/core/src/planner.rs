//! Resource-bounded state-space search over user `final/1` and `action/4`.
//!
//! States are tabled by value; the remaining budget is stored with the
//! entry but is not part of its key. A state is expanded when it is new,
//! or when it failed before under a smaller budget.

use std::collections::HashMap;
use std::rc::Rc;

use crate::engine::{Cont, EResult, Engine, EngineError, PredId, Step};
use crate::term::Term;

/// Budget used by `plan/2` and `best_plan/2`.
pub const DEFAULT_LIMIT: i64 = 1_000_000;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PlanStats {
    pub states_interned: usize,
    pub states_expanded: u64,
    /// Expansions of a state that was already in the table.
    pub reexpansions: u64,
    /// Visits answered by a recorded failure.
    pub skips: u64,
    /// Visits answered by a recorded plan.
    pub reuses: u64,
    pub rounds: u64,
}

#[derive(Clone, Debug, Default)]
struct Entry {
    success: Option<(Rc<[Term]>, i64)>,
    /// Largest budget under which the search below this state failed.
    failed_at: Option<i64>,
    /// Path depth while the state is being expanded.
    in_progress: Option<usize>,
    /// Ancestor whose outcome the recorded failure depends on.
    cond: Option<Term>,
}

#[derive(Default)]
pub(crate) struct PlannerState {
    table: HashMap<Term, Entry>,
    path: Vec<Term>,
    /// Failures recorded in the current round that depend on a cycle.
    tainted: Vec<(Term, Option<i64>)>,
    pub(crate) budget_sensitive: bool,
    pub stats: PlanStats,
}

impl PlannerState {
    pub fn clear(&mut self) {
        *self = PlannerState::default();
    }
}

enum Outcome {
    Found(Vec<Term>, i64),
    /// Failure; the depth is the shallowest ancestor hit as a cycle.
    Failed(usize),
}

struct Hooks {
    final_: PredId,
    action: PredId,
}

impl Engine {
    fn user_pred(&self, name: &str, arity: usize) -> EResult<PredId> {
        self.pred_index
            .get(&(name.to_string(), arity, false))
            .copied()
            .ok_or_else(|| EngineError::UnknownPredicate(format!("{name}/{arity}")))
    }

    pub(crate) fn plan_builtin(&mut self, best: bool, args: &[Term], rest: Cont) -> EResult<Step> {
        let (s, limit, plan_out, cost_out) = match args {
            [s, p] => (*s, None, *p, None),
            [s, l, p] => (*s, Some(*l), *p, None),
            [s, l, p, c] => (*s, Some(*l), *p, Some(*c)),
            _ => unreachable!("plan arity checked at compile time"),
        };
        let limit = match limit {
            Some(l) => self.int_of(l, "plan limit")?,
            None => self.options.plan_limit,
        };
        if limit < 0 {
            return Err(EngineError::Type(format!("plan limit must be nonnegative, got {limit}")));
        }
        let step = self.options.plan_step;
        if step < 1 {
            return Err(EngineError::Other(format!("plan step must be at least 1, got {step}")));
        }
        let (s, non_ground) = self.canonical(s);
        if non_ground {
            return Err(EngineError::Instantiation("plan state must be ground".into()));
        }
        let hooks = Hooks {
            final_: self.user_pred("final", 1)?,
            action: self.user_pred("action", 4)?,
        };
        let found = if best {
            let mut bound = 0;
            loop {
                let r = self.plan_round(&hooks, s, bound)?;
                if r.is_some() || bound >= limit || !self.planner.budget_sensitive {
                    break r;
                }
                bound = (bound + step).min(limit);
            }
        } else {
            self.plan_round(&hooks, s, limit)?
        };
        let Some((plan, cost)) = found else {
            return Ok(Step::Fail);
        };
        let list = self.store.list(plan);
        if !self.unify(plan_out, list)? {
            return Ok(Step::Fail);
        }
        if let Some(c) = cost_out {
            if !self.unify(c, Term::Int(cost))? {
                return Ok(Step::Fail);
            }
        }
        Ok(Step::Cont(rest))
    }

    fn plan_round(&mut self, hooks: &Hooks, s: Term, limit: i64) -> EResult<Option<(Vec<Term>, i64)>> {
        self.planner.stats.rounds += 1;
        self.planner.budget_sensitive = false;
        self.planner.path.clear();
        let res = self.plan_search(hooks, s, limit);
        let p = &mut self.planner;
        match res {
            Err(e) => {
                p.table.clear();
                p.tainted.clear();
                p.stats.states_interned = 0;
                Err(e)
            }
            Ok(Outcome::Found(plan, cost)) => {
                // Failures conditioned on an ancestor that succeeded may be wrong.
                for (t, prev) in std::mem::take(&mut p.tainted) {
                    if let Some(e) = p.table.get_mut(&t) {
                        e.failed_at = prev;
                        e.cond = None;
                    }
                }
                Ok(Some((plan, cost)))
            }
            Ok(Outcome::Failed(_)) => {
                for (t, _) in std::mem::take(&mut p.tainted) {
                    if let Some(e) = p.table.get_mut(&t) {
                        e.cond = None;
                    }
                }
                Ok(None)
            }
        }
    }

    fn is_final(&mut self, hooks: &Hooks, s: Term) -> EResult<bool> {
        let mut found = false;
        self.call_nested(hooks.final_, vec![s], |_, _| {
            found = true;
            Ok(false)
        })?;
        Ok(found)
    }

    fn plan_search(&mut self, hooks: &Hooks, s: Term, r: i64) -> EResult<Outcome> {
        self.resources.push(r);
        let res = self.plan_search_inner(hooks, s, r);
        self.resources.pop();
        res
    }

    fn plan_search_inner(&mut self, hooks: &Hooks, s: Term, r: i64) -> EResult<Outcome> {
        if self.is_final(hooks, s)? {
            return Ok(Outcome::Found(Vec::new(), 0));
        }
        let depth = self.planner.path.len();
        let prev_failed = match self.planner.table.get(&s) {
            Some(e) => {
                if let Some(d) = e.in_progress {
                    return Ok(Outcome::Failed(d));
                }
                if let Some((plan, cost)) = &e.success {
                    if *cost <= r {
                        let (plan, cost) = (plan.clone(), *cost);
                        self.planner.stats.reuses += 1;
                        let plan = plan.iter().map(|&a| self.instantiate(a)).collect();
                        return Ok(Outcome::Found(plan, cost));
                    }
                    self.planner.budget_sensitive = true;
                }
                if let Some(f) = e.failed_at {
                    if r <= f {
                        self.planner.budget_sensitive = true;
                        self.planner.stats.skips += 1;
                        let d = e
                            .cond
                            .and_then(|c| self.planner.table.get(&c))
                            .and_then(|c| c.in_progress)
                            .unwrap_or(usize::MAX);
                        return Ok(Outcome::Failed(d));
                    }
                }
                self.planner.stats.reexpansions += 1;
                e.failed_at
            }
            None => {
                self.planner.stats.states_interned += 1;
                None
            }
        };
        self.planner.stats.states_expanded += 1;
        self.planner.table.entry(s).or_default().in_progress = Some(depth);
        self.planner.path.push(s);
        let res = self.expand(hooks, s, r, depth);
        self.planner.path.pop();
        let entry = self.planner.table.get_mut(&s).expect("entry inserted above");
        entry.in_progress = None;
        match res? {
            Outcome::Found(plan, cost) => {
                let mut stored = Vec::with_capacity(plan.len());
                for &a in &plan {
                    stored.push(self.canonical(a).0);
                }
                let entry = self.planner.table.get_mut(&s).expect("entry inserted above");
                if entry.success.as_ref().map_or(true, |(_, c)| cost < *c) {
                    entry.success = Some((stored.into(), cost));
                }
                Ok(Outcome::Found(plan, cost))
            }
            Outcome::Failed(cyc) => {
                let cond = (cyc < depth).then(|| self.planner.path[cyc]);
                let entry = self.planner.table.get_mut(&s).expect("entry inserted above");
                entry.failed_at = Some(r);
                entry.cond = cond;
                if cond.is_some() {
                    self.planner.tainted.push((s, prev_failed));
                }
                Ok(Outcome::Failed(if cyc < depth { cyc } else { usize::MAX }))
            }
        }
    }

    fn expand(&mut self, hooks: &Hooks, s: Term, r: i64, depth: usize) -> EResult<Outcome> {
        let mut moves: Vec<(Term, Term, Term)> = Vec::new();
        let vars = vec![s, self.fresh_var(), self.fresh_var(), self.fresh_var()];
        self.call_nested(hooks.action, vars, |eng, sol| {
            let next = eng.canonical(sol[1]);
            let act = eng.canonical(sol[2]).0;
            let cost = eng.resolve(sol[3]);
            if next.1 {
                return Err(EngineError::Instantiation("action/4 produced a non-ground state".into()));
            }
            moves.push((next.0, act, cost));
            Ok(true)
        })?;
        let mut cyc = usize::MAX;
        for (next, act, cost) in moves {
            let cost = match cost {
                Term::Int(c) if c >= 0 => c,
                _ => {
                    return Err(EngineError::Type(format!(
                        "action cost must be a nonnegative integer, got {}",
                        self.format_term(cost)
                    )))
                }
            };
            if cost > r {
                self.planner.budget_sensitive = true;
                continue;
            }
            match self.plan_search(hooks, next, r - cost)? {
                Outcome::Found(mut plan, c) => {
                    let act = self.instantiate(act);
                    plan.insert(0, act);
                    return Ok(Outcome::Found(plan, c + cost));
                }
                Outcome::Failed(d) => {
                    if d < depth {
                        cyc = cyc.min(d);
                    }
                }
            }
        }
        Ok(Outcome::Failed(cyc))
    }
}
