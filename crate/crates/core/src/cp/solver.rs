use std::cell::Cell;
use std::collections::VecDeque;
use std::rc::Rc;

use super::model::{Constraint, Func, Labeling, Linear, Model, Rel, Sense, VarIdx};
use super::Domain;

/// Above this many (x, y) pairs a functional constraint only checks fixed
/// operands and bounds.
const SCAN_LIMIT: u64 = 100_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes: u64,
    pub failures: u64,
    pub propagations: u64,
    pub solutions: u64,
}

type Fail = ();
type PResult = Result<(), Fail>;

/// Watch lists over a constraint list. Supports appending and removing
/// the most recent variable or constraint.
#[derive(Clone, Debug, Default)]
pub struct PropIndex {
    watch: Vec<Vec<usize>>,
    diff_watch: Vec<Vec<(usize, usize)>>,
    negated: Vec<Option<Linear>>,
}

impl PropIndex {
    pub fn build(model: &Model) -> Self {
        let mut ix = PropIndex::default();
        for _ in 0..model.num_vars() {
            ix.push_var();
        }
        for (ci, c) in model.cons.iter().enumerate() {
            ix.push_con(ci, c);
        }
        ix
    }

    pub fn push_var(&mut self) {
        self.watch.push(Vec::new());
        self.diff_watch.push(Vec::new());
    }

    pub fn pop_var(&mut self) {
        self.watch.pop();
        self.diff_watch.pop();
    }

    fn con_vars(c: &Constraint) -> Vec<VarIdx> {
        let mut vs = c.vars();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    /// Registers constraint number `ci`, which must be the next one.
    pub fn push_con(&mut self, ci: usize, c: &Constraint) {
        debug_assert_eq!(ci, self.negated.len());
        match c {
            Constraint::AllDiff(xs) => {
                for (pos, &(v, _)) in xs.iter().enumerate() {
                    self.diff_watch[v].push((ci, pos));
                }
            }
            _ => {
                for v in Self::con_vars(c) {
                    self.watch[v].push(ci);
                }
            }
        }
        self.negated.push(match c {
            Constraint::Reif { lin, .. } => Some(lin.negate()),
            _ => None,
        });
    }

    /// Unregisters the most recent constraint `c`.
    pub fn pop_con(&mut self, c: &Constraint) {
        self.negated.pop();
        match c {
            Constraint::AllDiff(xs) => {
                for &(v, _) in xs.iter().rev() {
                    self.diff_watch[v].pop();
                }
            }
            _ => {
                for v in Self::con_vars(c) {
                    self.watch[v].pop();
                }
            }
        }
    }
}

/// How to restore one domain change.
#[derive(Clone, Debug)]
pub enum Undo {
    /// Previous domain of a variable.
    Dom(VarIdx, Domain),
    /// A single value removed from a variable.
    Val(VarIdx, i64),
}

impl Undo {
    pub fn var(&self) -> VarIdx {
        match self {
            Undo::Dom(v, _) | Undo::Val(v, _) => *v,
        }
    }

    pub fn apply(self, doms: &mut [Domain]) {
        match self {
            Undo::Dom(v, d) => doms[v] = d,
            Undo::Val(v, x) => {
                doms[v].insert(x);
            }
        }
    }
}

/// Runs propagation to a fixpoint. `changed` lists variables whose domains
/// were narrowed; `initial` lists constraints to run regardless. With `log`,
/// the previous domain of every modified variable is recorded in order.
pub fn propagate(
    cons: &[Constraint],
    ix: &PropIndex,
    doms: &mut [Domain],
    changed: &[VarIdx],
    initial: &[usize],
    log: Option<&mut Vec<Undo>>,
    counter: &Cell<u64>,
) -> bool {
    let nc = cons.len();
    let mut in_q = vec![false; nc];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &c in initial {
        if !in_q[c] {
            in_q[c] = true;
            queue.push_back(c);
        }
    }
    let mut work = Work {
        doms,
        changed: changed.to_vec(),
        log,
    };
    let mut fixed: Vec<VarIdx> = Vec::new();
    loop {
        for v in std::mem::take(&mut work.changed) {
            if work.doms[v].fixed().is_some() {
                fixed.push(v);
            }
            for &c in &ix.watch[v] {
                if !in_q[c] {
                    in_q[c] = true;
                    queue.push_back(c);
                }
            }
        }
        if let Some(v) = fixed.pop() {
            let Some(val) = work.doms[v].fixed() else {
                continue;
            };
            for &(ci, pos) in &ix.diff_watch[v] {
                let Constraint::AllDiff(xs) = &cons[ci] else {
                    unreachable!("diff watch on a non-alldiff constraint")
                };
                let off = xs[pos].1;
                for (j, &(w, ow)) in xs.iter().enumerate() {
                    if j == pos {
                        continue;
                    }
                    if w == v {
                        if off == ow {
                            return false;
                        }
                    } else if work.remove(w, val + off - ow).is_err() {
                        return false;
                    }
                }
            }
            continue;
        }
        let Some(c) = queue.pop_front() else {
            return true;
        };
        in_q[c] = false;
        counter.set(counter.get() + 1);
        if prop(cons, ix, c, &mut work).is_err() {
            return false;
        }
    }
}

/// Propagation over an owned model.
pub struct Propagator {
    model: Model,
    ix: PropIndex,
    props: Cell<u64>,
}

struct Work<'a, 'l> {
    doms: &'a mut [Domain],
    changed: Vec<VarIdx>,
    log: Option<&'l mut Vec<Undo>>,
}

impl Work<'_, '_> {
    fn replace(&mut self, v: VarIdx, d: Domain) -> PResult {
        let empty = d.is_empty();
        let old = std::mem::replace(&mut self.doms[v], d);
        if let Some(log) = self.log.as_deref_mut() {
            log.push(Undo::Dom(v, old));
        }
        self.changed.push(v);
        if empty {
            Err(())
        } else {
            Ok(())
        }
    }

    fn set(&mut self, v: VarIdx, d: Domain) -> PResult {
        if d != self.doms[v] {
            return self.replace(v, d);
        }
        if d.is_empty() {
            return Err(());
        }
        Ok(())
    }

    fn restrict(&mut self, v: VarIdx, lo: i64, hi: i64) -> PResult {
        let d = &self.doms[v];
        if d.is_empty() {
            return Err(());
        }
        if lo <= d.min() && hi >= d.max() {
            return Ok(());
        }
        let nd = d.intersect(&Domain::range(lo, hi));
        self.replace(v, nd)
    }

    fn remove(&mut self, v: VarIdx, x: i64) -> PResult {
        if !self.doms[v].contains(x) {
            return Ok(());
        }
        self.doms[v].remove(x);
        if let Some(log) = self.log.as_deref_mut() {
            log.push(Undo::Val(v, x));
        }
        self.changed.push(v);
        if self.doms[v].is_empty() {
            Err(())
        } else {
            Ok(())
        }
    }

    fn fix(&mut self, v: VarIdx, x: i64) -> PResult {
        if !self.doms[v].contains(x) {
            return Err(());
        }
        if self.doms[v].fixed().is_none() {
            self.replace(v, Domain::singleton(x))?;
        }
        Ok(())
    }
}

fn floor_div(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

fn ceil_div(a: i128, b: i128) -> i128 {
    -floor_div(-a, b)
}

fn clamp(v: i128) -> i64 {
    v.clamp(i64::MIN as i128 / 4, i64::MAX as i128 / 4) as i64
}

/// Entailment status of a linear constraint under the current domains.
fn lin_status(l: &Linear, doms: &[Domain]) -> Option<bool> {
    let (mut lo, mut hi) = (0i128, 0i128);
    for &(a, v) in &l.terms {
        let (mn, mx) = (doms[v].min() as i128, doms[v].max() as i128);
        let a = a as i128;
        if a >= 0 {
            lo += a * mn;
            hi += a * mx;
        } else {
            lo += a * mx;
            hi += a * mn;
        }
    }
    let r = l.rhs as i128;
    let all_fixed = l.terms.iter().all(|&(_, v)| doms[v].fixed().is_some());
    match l.rel {
        Rel::Le => {
            if hi <= r {
                Some(true)
            } else if lo > r {
                Some(false)
            } else {
                None
            }
        }
        Rel::Eq | Rel::Ne => {
            let eq = if all_fixed {
                Some(lo == r)
            } else if r < lo || r > hi {
                Some(false)
            } else {
                None
            };
            if l.rel == Rel::Eq {
                eq
            } else {
                eq.map(|b| !b)
            }
        }
    }
}

impl Propagator {
    pub fn new(model: Model) -> Self {
        let ix = PropIndex::build(&model);
        Propagator {
            model,
            ix,
            props: Cell::new(0),
        }
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn propagations(&self) -> u64 {
        self.props.get()
    }

    /// Propagates every constraint to a fixpoint.
    pub fn propagate_all(&self, doms: &mut [Domain]) -> bool {
        if doms.iter().any(|d| d.is_empty()) {
            return false;
        }
        let all: Vec<VarIdx> = (0..doms.len()).collect();
        let cons: Vec<usize> = (0..self.model.cons.len()).collect();
        propagate(&self.model.cons, &self.ix, doms, &all, &cons, None, &self.props)
    }

    /// Propagates after the domains of `changed` were narrowed.
    pub fn propagate(&self, doms: &mut [Domain], changed: &[VarIdx]) -> bool {
        propagate(&self.model.cons, &self.ix, doms, changed, &[], None, &self.props)
    }

    /// As [`Propagator::propagate`], recording every change in `log`.
    pub fn propagate_logged(&self, doms: &mut [Domain], changed: &[VarIdx], log: &mut Vec<Undo>) -> bool {
        propagate(&self.model.cons, &self.ix, doms, changed, &[], Some(log), &self.props)
    }
}

fn prop(cons: &[Constraint], ix: &PropIndex, ci: usize, w: &mut Work) -> PResult {
        match &cons[ci] {
            Constraint::Lin(l) => prop_linear(l, w),
            Constraint::AllDiff(_) => Ok(()),
            Constraint::Func { f, x, y, z } => prop_func(*f, *x, *y, *z, w),
            Constraint::Reif { b, lin } => match w.doms[*b].fixed() {
                Some(1) => prop_linear(lin, w),
                Some(0) => prop_linear(ix.negated[ci].as_ref().expect("reif"), w),
                Some(_) => Err(()),
                None => {
                    w.restrict(*b, 0, 1)?;
                    match lin_status(lin, w.doms) {
                        Some(true) => w.fix(*b, 1),
                        Some(false) => w.fix(*b, 0),
                        None => Ok(()),
                    }
                }
            },
            Constraint::Clause(lits) => {
                let mut open = None;
                let mut n_open = 0;
                for &(v, pos) in lits {
                    match w.doms[v].fixed() {
                        Some(x) if (x == 1) == pos => return Ok(()),
                        Some(_) => {}
                        None => {
                            n_open += 1;
                            open = Some((v, pos));
                        }
                    }
                }
                match (n_open, open) {
                    (0, _) => Err(()),
                    (1, Some((v, pos))) => w.fix(v, i64::from(pos)),
                    _ => Ok(()),
                }
            }
            Constraint::Table {
                vars,
                tuples,
                negated: false,
            } => {
                let mut supp: Vec<Vec<i64>> = vec![Vec::new(); vars.len()];
                let mut any = false;
                for t in tuples {
                    if t.iter().zip(vars).all(|(&x, &v)| w.doms[v].contains(x)) {
                        any = true;
                        for (k, &x) in t.iter().enumerate() {
                            supp[k].push(x);
                        }
                    }
                }
                if !any {
                    return Err(());
                }
                for (k, &v) in vars.iter().enumerate() {
                    let d = w.doms[v].intersect(&Domain::from_values(supp[k].iter().copied()));
                    w.set(v, d)?;
                }
                Ok(())
            }
            Constraint::Table {
                vars,
                tuples,
                negated: true,
            } => {
                let open: Vec<usize> = (0..vars.len())
                    .filter(|&k| w.doms[vars[k]].fixed().is_none())
                    .collect();
                if open.len() > 1 {
                    return Ok(());
                }
                for t in tuples {
                    let matches_fixed = t.iter().enumerate().all(|(k, &x)| {
                        open.contains(&k) || w.doms[vars[k]].fixed() == Some(x)
                    });
                    if matches_fixed {
                        match open.first() {
                            None => return Err(()),
                            Some(&k) => w.remove(vars[k], t[k])?,
                        }
                    }
                }
                Ok(())
            }
            Constraint::Element { idx, list, val } => {
                w.restrict(*idx, 1, list.len() as i64)?;
                let mut idom = w.doms[*idx].clone();
                let mut vdom = Domain::empty();
                for i in w.doms[*idx].iter().collect::<Vec<_>>() {
                    let li = list[i as usize - 1];
                    let common = w.doms[li].intersect(&w.doms[*val]);
                    if common.is_empty() {
                        idom.remove(i);
                    } else {
                        vdom = vdom.union(&common);
                    }
                }
                w.set(*idx, idom)?;
                let nv = w.doms[*val].intersect(&vdom);
                w.set(*val, nv)?;
                if let Some(i) = w.doms[*idx].fixed() {
                    let li = list[i as usize - 1];
                    let common = w.doms[li].intersect(&w.doms[*val]);
                    w.set(li, common.clone())?;
                    w.set(*val, common)?;
                }
                Ok(())
            }
        }
    }

fn prop_le(terms: &[(i64, VarIdx)], rhs: i64, w: &mut Work) -> Result<bool, Fail> {
    let mut minsum: i128 = 0;
    for &(a, v) in terms {
        let a = a as i128;
        minsum += if a >= 0 {
            a * w.doms[v].min() as i128
        } else {
            a * w.doms[v].max() as i128
        };
    }
    let r = rhs as i128;
    if minsum > r {
        return Err(());
    }
    let mut changed = false;
    for &(a, v) in terms {
        if a == 0 {
            continue;
        }
        let a128 = a as i128;
        let own = if a > 0 {
            a128 * w.doms[v].min() as i128
        } else {
            a128 * w.doms[v].max() as i128
        };
        let slack = r - (minsum - own);
        let before = w.changed.len();
        if a > 0 {
            w.restrict(v, i64::MIN, clamp(floor_div(slack, a128)))?;
        } else {
            w.restrict(v, clamp(ceil_div(slack, a128)), i64::MAX)?;
        }
        if w.changed.len() > before {
            changed = true;
            let own2 = if a > 0 {
                a128 * w.doms[v].min() as i128
            } else {
                a128 * w.doms[v].max() as i128
            };
            minsum += own2 - own;
        }
    }
    Ok(changed)
}

fn prop_linear(l: &Linear, w: &mut Work) -> PResult {
    match l.rel {
        Rel::Le => prop_le(&l.terms, l.rhs, w).map(|_| ()),
        Rel::Eq => {
            let neg: Vec<(i64, VarIdx)> = l.terms.iter().map(|&(a, v)| (-a, v)).collect();
            loop {
                let c1 = prop_le(&l.terms, l.rhs, w)?;
                let c2 = prop_le(&neg, -l.rhs, w)?;
                if !c1 && !c2 {
                    break;
                }
            }
            if l.terms.len() == 2 {
                prop_eq2(l, w)?;
            }
            Ok(())
        }
        Rel::Ne => {
            let mut open = None;
            let mut sum: i128 = 0;
            for &(a, v) in &l.terms {
                match w.doms[v].fixed() {
                    Some(x) => sum += a as i128 * x as i128,
                    None => {
                        if open.is_some() {
                            return Ok(());
                        }
                        open = Some((a, v));
                    }
                }
            }
            let rest = l.rhs as i128 - sum;
            match open {
                None if rest == 0 => Err(()),
                None => Ok(()),
                Some((a, v)) => {
                    if a != 0 && rest % a as i128 == 0 {
                        w.remove(v, clamp(rest / a as i128))
                    } else if a == 0 && rest == 0 {
                        Err(())
                    } else {
                        Ok(())
                    }
                }
            }
        }
    }
}

/// Domain consistency for `a·x + b·y = c`.
fn prop_eq2(l: &Linear, w: &mut Work) -> PResult {
    let (a, x) = l.terms[0];
    let (b, y) = l.terms[1];
    if x == y || a == 0 || b == 0 {
        return Ok(());
    }
    if w.doms[x].size() + w.doms[y].size() > 2 * SCAN_LIMIT {
        return Ok(());
    }
    let c = l.rhs as i128;
    let support = |w: &Work, a: i64, x: VarIdx, b: i64, y: VarIdx| -> Domain {
        Domain::from_values(w.doms[x].iter().filter(|&v| {
            let rest = c - a as i128 * v as i128;
            rest % b as i128 == 0 && {
                let t = rest / b as i128;
                t >= i64::MIN as i128 && t <= i64::MAX as i128 && w.doms[y].contains(t as i64)
            }
        }))
    };
    let dx = support(w, a, x, b, y);
    w.set(x, dx)?;
    let dy = support(w, b, y, a, x);
    w.set(y, dy)
}

fn prop_func(f: Func, x: VarIdx, y: VarIdx, z: VarIdx, w: &mut Work) -> PResult {
    let ys: Vec<i64> = if f.unary() {
        vec![0]
    } else {
        w.doms[y].iter().take(SCAN_LIMIT as usize + 1).collect()
    };
    let pairs = w.doms[x].size().saturating_mul(ys.len() as u64);
    if pairs > SCAN_LIMIT {
        if let (Some(a), Some(b)) = (w.doms[x].fixed(), w.doms[y].fixed()) {
            return match f.apply(a, b) {
                Some(r) => w.fix(z, r),
                None => Err(()),
            };
        }
        if f == Func::Mul {
            let (xl, xh) = (w.doms[x].min() as i128, w.doms[x].max() as i128);
            let (yl, yh) = (w.doms[y].min() as i128, w.doms[y].max() as i128);
            let ps = [xl * yl, xl * yh, xh * yl, xh * yh];
            let lo = *ps.iter().min().expect("nonempty");
            let hi = *ps.iter().max().expect("nonempty");
            w.restrict(z, clamp(lo), clamp(hi))?;
        }
        return Ok(());
    }
    let mut sx = Vec::new();
    let mut sy = Vec::new();
    let mut sz = Vec::new();
    let xs: Vec<i64> = w.doms[x].iter().collect();
    for &a in &xs {
        let mut ok = false;
        for &b in &ys {
            if let Some(r) = f.apply(a, b) {
                if w.doms[z].contains(r) {
                    ok = true;
                    sy.push(b);
                    sz.push(r);
                }
            }
        }
        if ok {
            sx.push(a);
        }
    }
    w.set(x, Domain::from_values(sx))?;
    if !f.unary() {
        w.set(y, Domain::from_values(sy))?;
    }
    let dz = w.doms[z].intersect(&Domain::from_values(sz));
    w.set(z, dz)
}

struct Node {
    var: VarIdx,
    last: Option<i64>,
    /// Trail length when the node was opened.
    mark: usize,
}

/// Depth-first labeling over a model, yielding solutions lazily.
pub struct Search {
    prop: Rc<Propagator>,
    labeled: Vec<VarIdx>,
    labeling: Labeling,
    objective: Option<(Sense, VarIdx)>,
    doms: Vec<Domain>,
    trail: Vec<Undo>,
    stack: Vec<Node>,
    /// `doms` holds a propagated node that has not been visited yet.
    fresh: bool,
    bound: Option<i64>,
    best: Option<Vec<Domain>>,
    finished: bool,
    /// Labeled solutions must extend to all variables.
    complete: bool,
    pub stats: SearchStats,
}

impl Search {
    /// `doms` should already be at a propagation fixpoint, or `None` to start
    /// from the model's domains.
    pub fn new(
        prop: Rc<Propagator>,
        doms: Option<Vec<Domain>>,
        labeled: Vec<VarIdx>,
        labeling: Labeling,
    ) -> Self {
        let model = prop.model();
        let objective = model.objective;
        let mut labeled = labeled;
        if let Some((_, o)) = model.objective {
            if !labeled.contains(&o) {
                labeled.push(o);
            }
        }
        let root = match doms {
            Some(d) => Some(d),
            None => {
                let mut d = model.doms.clone();
                prop.propagate_all(&mut d).then_some(d)
            }
        };
        let mut s = Search::at(prop, root, labeled, labeling, objective, true);
        if !s.fresh {
            s.stats.failures += 1;
        }
        s
    }

    fn at(
        prop: Rc<Propagator>,
        root: Option<Vec<Domain>>,
        labeled: Vec<VarIdx>,
        labeling: Labeling,
        objective: Option<(Sense, VarIdx)>,
        complete: bool,
    ) -> Self {
        let fresh = root.is_some();
        Search {
            prop,
            labeled,
            labeling,
            objective,
            doms: root.unwrap_or_default(),
            trail: Vec::new(),
            stack: Vec::new(),
            fresh,
            bound: None,
            best: None,
            finished: false,
            complete,
            stats: SearchStats::default(),
        }
    }

    fn choose(&self) -> Option<VarIdx> {
        let doms = &self.doms;
        let open = self.labeled.iter().copied().filter(|&v| doms[v].fixed().is_none());
        match self.labeling {
            Labeling::InputOrder => open.into_iter().next(),
            Labeling::FirstFail => open.min_by_key(|&v| (doms[v].size(), v)),
        }
    }

    /// Whether some assignment of the remaining variables satisfies the model.
    fn extends(&self) -> bool {
        let open: Vec<VarIdx> = (0..self.doms.len()).filter(|&v| self.doms[v].fixed().is_none()).collect();
        if open.is_empty() {
            return true;
        }
        let mut sub = Search::at(
            self.prop.clone(),
            Some(self.doms.clone()),
            open,
            Labeling::FirstFail,
            None,
            false,
        );
        sub.next_raw().is_some()
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            self.trail.pop().expect("length checked").apply(&mut self.doms);
        }
    }

    fn next_raw(&mut self) -> Option<Vec<Domain>> {
        loop {
            if self.fresh {
                self.fresh = false;
                self.stats.nodes += 1;
                match self.choose() {
                    None => {
                        if !self.complete || self.extends() {
                            return Some(self.doms.clone());
                        }
                        self.stats.failures += 1;
                    }
                    Some(var) => self.stack.push(Node {
                        var,
                        last: None,
                        mark: self.trail.len(),
                    }),
                }
                continue;
            }
            let (var, mark, last) = {
                let top = self.stack.last()?;
                (top.var, top.mark, top.last)
            };
            self.undo_to(mark);
            let next = match last {
                None => Some(self.doms[var].min()),
                Some(l) => self.doms[var].next_after(l),
            };
            let Some(val) = next else {
                self.stack.pop();
                continue;
            };
            self.stack.last_mut().expect("non-empty").last = Some(val);
            let old = std::mem::replace(&mut self.doms[var], Domain::singleton(val));
            self.trail.push(Undo::Dom(var, old));
            let mut changed = vec![var];
            if let (Some((sense, o)), Some(b)) = (self.objective, self.bound) {
                let before = self.doms[o].clone();
                let ok = match sense {
                    Sense::Min => self.doms[o].restrict(i64::MIN, b),
                    Sense::Max => self.doms[o].restrict(b, i64::MAX),
                };
                if ok {
                    self.trail.push(Undo::Dom(o, before));
                    changed.push(o);
                }
                if self.doms[o].is_empty() {
                    self.stats.failures += 1;
                    continue;
                }
            }
            if self.prop.propagate_logged(&mut self.doms, &changed, &mut self.trail) {
                self.fresh = true;
            } else {
                self.stats.failures += 1;
            }
        }
    }

    /// Next solution as a domain vector in which all labeled variables are
    /// fixed. With an objective, yields only the optimum.
    pub fn next_solution(&mut self) -> Option<Vec<Domain>> {
        if self.finished {
            return None;
        }
        let Some((sense, o)) = self.objective else {
            let s = self.next_raw();
            match &s {
                Some(_) => self.stats.solutions += 1,
                None => self.finished = true,
            }
            return s;
        };
        while let Some(sol) = self.next_raw() {
            let v = sol[o].fixed().expect("objective is labeled");
            self.bound = Some(match sense {
                Sense::Min => v - 1,
                Sense::Max => v + 1,
            });
            self.stats.solutions += 1;
            self.best = Some(sol);
            // Nodes already on the stack are re-checked against the bound.
        }
        self.finished = true;
        self.best.take()
    }

    pub fn propagations(&self) -> u64 {
        self.prop.propagations()
    }
}

/// Convenience: all solutions projected onto `vars`.
pub fn all_solutions(model: &Model, vars: &[VarIdx], labeling: Labeling) -> Vec<Vec<i64>> {
    let prop = Rc::new(Propagator::new(model.clone()));
    let mut s = Search::new(prop, None, vars.to_vec(), labeling);
    let mut out = Vec::new();
    while let Some(d) = s.next_solution() {
        out.push(vars.iter().map(|&v| d[v].fixed().expect("labeled")).collect());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doms_after(m: &Model) -> Option<Vec<Domain>> {
        let p = Propagator::new(m.clone());
        let mut d = m.doms.clone();
        p.propagate_all(&mut d).then_some(d)
    }

    #[test]
    fn greater_than_chain() {
        let mut m = Model::new();
        let x = m.new_var(Domain::range(1, 3));
        let y = m.new_var(Domain::range(1, 3));
        // X > Y  ⇔  Y - X ≤ -1 ; Y > 1 ⇔ -Y ≤ -2
        m.post(Constraint::Lin(Linear::new(vec![(1, y), (-1, x)], Rel::Le, -1)));
        m.post(Constraint::Lin(Linear::new(vec![(-1, y)], Rel::Le, -2)));
        let d = doms_after(&m).unwrap();
        assert_eq!(d[x], Domain::singleton(3));
        assert_eq!(d[y], Domain::singleton(2));
    }

    #[test]
    fn all_different_removes_fixed_value() {
        let mut m = Model::new();
        let x = m.new_var(Domain::singleton(1));
        let y = m.new_var(Domain::range(1, 2));
        m.post(Constraint::AllDiff(vec![(x, 0), (y, 0)]));
        let d = doms_after(&m).unwrap();
        assert_eq!(d[y], Domain::singleton(2));
    }

    #[test]
    fn equality_with_offset() {
        let mut m = Model::new();
        let x = m.new_var(Domain::range(-100, 100));
        let y = m.new_var(Domain::singleton(5));
        m.post(Constraint::Lin(Linear::new(vec![(1, x), (-1, y)], Rel::Eq, 1)));
        let d = doms_after(&m).unwrap();
        assert_eq!(d[x], Domain::singleton(6));
    }

    #[test]
    fn minimize_single_var() {
        let mut m = Model::new();
        let x = m.new_var(Domain::from_values([3, 5, 7]));
        m.objective = Some((Sense::Min, x));
        let sols = all_solutions(&m, &[x], Labeling::InputOrder);
        assert_eq!(sols, vec![vec![3]]);
    }

    #[test]
    fn reif_entailment() {
        let mut m = Model::new();
        let x = m.new_var(Domain::range(0, 1));
        let y = m.new_var(Domain::range(5, 6));
        let b = m.new_var(Domain::range(0, 1));
        m.post(Constraint::Reif {
            b,
            lin: Linear::new(vec![(1, x), (-1, y)], Rel::Le, 0),
        });
        let d = doms_after(&m).unwrap();
        assert_eq!(d[b], Domain::singleton(1));
    }

    #[test]
    fn search_matches_enumeration_on_small_models() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..150 {
            let mut m = Model::new();
            let n = rng.gen_range(1..=4);
            let vars: Vec<VarIdx> = (0..n)
                .map(|_| {
                    let lo = rng.gen_range(-4..=4);
                    let hi = lo + rng.gen_range(0..=4);
                    m.new_var(Domain::range(lo, hi))
                })
                .collect();
            for _ in 0..rng.gen_range(0..=3) {
                let a = vars[rng.gen_range(0..n)];
                let b = vars[rng.gen_range(0..n)];
                let c = match rng.gen_range(0..6) {
                    0 => Constraint::Lin(Linear::new(
                        vec![(rng.gen_range(-2..=2), a), (rng.gen_range(-2..=2), b)],
                        [Rel::Eq, Rel::Ne, Rel::Le][rng.gen_range(0..3)],
                        rng.gen_range(-4..=4),
                    )),
                    1 => Constraint::AllDiff(vec![(a, 0), (b, rng.gen_range(-1..=1))]),
                    2 => {
                        let z = m.new_var(Domain::range(-20, 20));
                        Constraint::Func {
                            f: [Func::Mul, Func::Abs, Func::Min, Func::Max, Func::Mod][rng.gen_range(0..5)],
                            x: a,
                            y: b,
                            z,
                        }
                    }
                    3 => {
                        let bv = m.new_var(Domain::range(0, 1));
                        Constraint::Reif {
                            b: bv,
                            lin: Linear::new(vec![(1, a), (-1, b)], Rel::Le, 0),
                        }
                    }
                    4 => Constraint::Table {
                        vars: vec![a, b],
                        tuples: (0..3)
                            .map(|_| vec![rng.gen_range(-4..=6), rng.gen_range(-4..=6)])
                            .collect(),
                        negated: rng.gen_bool(0.5),
                    },
                    _ => {
                        let idx = m.new_var(Domain::range(0, 3));
                        Constraint::Element {
                            idx,
                            list: vec![a, b],
                            val: vars[rng.gen_range(0..n)],
                        }
                    }
                };
                m.post(c);
            }
            let expect: Vec<Vec<i64>> = m.enumerate(&vars).into_iter().collect();
            let mut got = all_solutions(&m, &vars, Labeling::FirstFail);
            got.sort();
            assert_eq!(got, expect);
        }
    }
}
