use std::cell::Cell;
use std::rc::Rc;

use crate::cp::solver::{propagate, PropIndex, Undo};
use crate::cp::{Constraint, Domain, Func, Labeling, Linear, Model, Propagator, Rel, Search, SearchStats, Sense, VarIdx};
use crate::term::{Sym, Term, VarId, View};

use super::compile::{Backend, Builtin};
use super::machine::{AltStream, Cont, Step};
use super::{EResult, Engine, EngineError, TrailEntry};

/// Constraint store attached to the engine. Domains and constraints are
/// undone through the engine trail.
#[derive(Default)]
pub(crate) struct CpStore {
    pub model: Model,
    /// Engine variable owning each model variable, if any.
    pub var_of: Vec<Option<VarId>>,
    ix: PropIndex,
    props: Cell<u64>,
}

impl CpStore {
    pub fn pop_var(&mut self) {
        self.model.doms.pop();
        self.var_of.pop();
        self.ix.pop_var();
    }

    pub fn pop_con(&mut self) {
        if let Some(c) = self.model.cons.pop() {
            self.ix.pop_con(&c);
        }
    }

    pub fn set_dom(&mut self, v: usize, d: Domain) {
        self.model.doms[v] = d;
    }

    pub fn restore_value(&mut self, v: usize, x: i64) {
        self.model.doms[v].insert(x);
    }
}

/// Sum of `coef·var` plus a constant.
type Lin = (Vec<(i64, VarIdx)>, i64);

const COMPARISONS: &[&str] = &["#=", "#!=", "#<", "#=<", "#<=", "#>", "#>="];

fn normalize(terms: Vec<(i64, VarIdx)>) -> Vec<(i64, VarIdx)> {
    let mut out: Vec<(i64, VarIdx)> = Vec::with_capacity(terms.len());
    for (a, v) in terms {
        match out.iter_mut().find(|t| t.1 == v) {
            Some(t) => t.0 += a,
            None => out.push((a, v)),
        }
    }
    out.retain(|t| t.0 != 0);
    out
}

impl Engine {
    fn unsupported(&self, what: &str) -> EngineError {
        EngineError::Unsupported {
            backend: self.backend().to_string(),
            constraint: what.to_string(),
        }
    }

    fn cp_new_var(&mut self, dom: Domain, owner: Option<VarId>) -> VarIdx {
        let st = &mut self.cpstore;
        let idx = st.model.new_var(dom);
        st.var_of.push(owner);
        st.ix.push_var();
        self.trail.push(TrailEntry::CpVar);
        if let Some(v) = owner {
            self.slots[v.0 as usize].cp = Some(idx as u32);
            self.trail.push(TrailEntry::Attr(v));
        }
        idx
    }

    fn cp_post(&mut self, c: Constraint) {
        let st = &mut self.cpstore;
        let ci = st.model.cons.len();
        st.ix.push_con(ci, &c);
        st.model.cons.push(c);
        self.trail.push(TrailEntry::Con);
    }

    /// Propagates in the store, trails domain changes and binds engine
    /// variables whose domains became singletons.
    fn cp_propagate(&mut self, changed: &[VarIdx], initial: &[usize]) -> EResult<bool> {
        let mut log = Vec::new();
        let st = &mut self.cpstore;
        let ok = propagate(
            &st.model.cons,
            &st.ix,
            &mut st.model.doms,
            changed,
            initial,
            Some(&mut log),
            &st.props,
        );
        let mut touched: Vec<VarIdx> = log.iter().map(|e| e.var()).collect();
        for u in log {
            self.trail.push(match u {
                Undo::Dom(v, old) => TrailEntry::Dom(v as u32, old),
                Undo::Val(v, x) => TrailEntry::DomVal(v as u32, x),
            });
        }
        if !ok {
            return Ok(false);
        }
        touched.extend_from_slice(changed);
        touched.sort_unstable();
        touched.dedup();
        for v in touched {
            if !self.bind_owner(v) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Binds the engine variable of model variable `v` if its domain is a
    /// singleton.
    fn bind_owner(&mut self, v: VarIdx) -> bool {
        let Some(val) = self.cpstore.model.doms[v].fixed() else {
            return true;
        };
        let Some(owner) = self.cpstore.var_of[v] else {
            return true;
        };
        match self.deref(Term::Var(owner)) {
            Term::Var(u) => {
                self.bind(u, Term::Int(val));
                true
            }
            Term::Int(x) => x == val,
            _ => false,
        }
    }

    /// Narrows model variable `v` to `d` and propagates.
    fn cp_narrow(&mut self, v: VarIdx, d: Domain) -> EResult<bool> {
        if d.is_empty() {
            return Ok(false);
        }
        if d == self.cpstore.model.doms[v] {
            return Ok(true);
        }
        let old = std::mem::replace(&mut self.cpstore.model.doms[v], d);
        self.trail.push(TrailEntry::Dom(v as u32, old));
        if !self.bind_owner(v) {
            return Ok(false);
        }
        self.cp_propagate(&[v], &[])
    }

    /// Unification of a domain variable with a non-variable term.
    pub(crate) fn bind_dvar_value(&mut self, v: VarId, t: Term) -> EResult<bool> {
        let idx = self.slots[v.0 as usize].cp.expect("domain variable") as VarIdx;
        let Term::Int(n) = t else {
            return Ok(false);
        };
        if !self.cpstore.model.doms[idx].contains(n) {
            return Ok(false);
        }
        self.bind(v, t);
        self.cp_narrow(idx, Domain::singleton(n))
    }

    /// Unification of two domain variables: the younger is bound to the
    /// older and their model variables are constrained equal.
    pub(crate) fn unify_dvars(&mut self, old: VarId, young: VarId) -> EResult<bool> {
        let a = self.slots[old.0 as usize].cp.expect("domain variable") as VarIdx;
        let b = self.slots[young.0 as usize].cp.expect("domain variable") as VarIdx;
        self.bind(young, Term::Var(old));
        let ci = self.cpstore.model.cons.len();
        self.cp_post(Constraint::Lin(Linear::new(vec![(1, a), (-1, b)], Rel::Eq, 0)));
        self.cp_propagate(&[], &[ci])
    }

    /// Model variable of a term that must denote a domain variable or an
    /// integer. Plain variables get `default` as domain when given.
    fn model_var(&mut self, t: Term, default: Option<Domain>) -> EResult<VarIdx> {
        match self.deref(t) {
            Term::Int(n) => Ok(self.cp_new_var(Domain::singleton(n), None)),
            Term::Var(v) => match self.slots[v.0 as usize].cp {
                Some(i) => {
                    let i = i as VarIdx;
                    if let Some(d) = default {
                        let nd = self.cpstore.model.doms[i].intersect(&d);
                        if !self.cp_narrow(i, nd)? {
                            return Err(EngineError::Other("$fail".into()));
                        }
                    }
                    Ok(i)
                }
                None => match default {
                    Some(d) => Ok(self.cp_new_var(d, Some(v))),
                    None => Err(EngineError::Instantiation(
                        "variable without a domain in a constraint".into(),
                    )),
                },
            },
            other => Err(EngineError::Type(format!(
                "constraint operand {} is not an integer expression",
                self.format_term(other)
            ))),
        }
    }

    fn lin_bounds(&self, l: &Lin) -> (i64, i64) {
        let (mut lo, mut hi) = (l.1 as i128, l.1 as i128);
        for &(a, v) in &l.0 {
            let d = &self.cpstore.model.doms[v];
            let (x, y) = (a as i128 * d.min() as i128, a as i128 * d.max() as i128);
            lo += x.min(y);
            hi += x.max(y);
        }
        let c = |v: i128| v.clamp(i64::MIN as i128 / 4, i64::MAX as i128 / 4) as i64;
        (c(lo), c(hi))
    }

    /// A model variable equal to `l`.
    fn aux_of(&mut self, l: Lin) -> VarIdx {
        if l.0.is_empty() {
            return self.cp_new_var(Domain::singleton(l.1), None);
        }
        if l.1 == 0 && l.0.len() == 1 && l.0[0].0 == 1 {
            return l.0[0].1;
        }
        let (lo, hi) = self.lin_bounds(&l);
        let z = self.cp_new_var(Domain::range(lo, hi), None);
        let mut terms = l.0;
        terms.push((-1, z));
        self.cp_post(Constraint::Lin(Linear::new(terms, Rel::Eq, -l.1)));
        z
    }

    fn func_aux(&mut self, f: Func, x: VarIdx, y: VarIdx) -> VarIdx {
        let dx = self.cpstore.model.doms[x].clone();
        let dy = self.cpstore.model.doms[y].clone();
        let (xl, xh, yl, yh) = (dx.min(), dx.max(), dy.min(), dy.max());
        let ax = xl.abs().max(xh.abs());
        let ay = yl.abs().max(yh.abs());
        let (lo, hi) = match f {
            Func::Mul => {
                let ps = [
                    xl as i128 * yl as i128,
                    xl as i128 * yh as i128,
                    xh as i128 * yl as i128,
                    xh as i128 * yh as i128,
                ];
                let c = |v: i128| v.clamp(i64::MIN as i128 / 4, i64::MAX as i128 / 4) as i64;
                (c(*ps.iter().min().unwrap()), c(*ps.iter().max().unwrap()))
            }
            Func::Abs => {
                if xl >= 0 {
                    (xl, xh)
                } else if xh <= 0 {
                    (-xh, -xl)
                } else {
                    (0, ax)
                }
            }
            Func::Min => (xl.min(yl), xh.min(yh)),
            Func::Max => (xl.max(yl), xh.max(yh)),
            Func::Div | Func::FloorDiv => (-ax, ax),
            Func::Mod | Func::Rem => (-(ay - 1).max(0), (ay - 1).max(0)),
        };
        let z = self.cp_new_var(Domain::range(lo, hi), None);
        self.cp_post(Constraint::Func { f, x, y, z });
        z
    }

    /// Linear form of an integer constraint expression.
    fn lin(&mut self, t: Term) -> EResult<Lin> {
        let t = self.deref(t);
        match self.store.view(t) {
            View::Int(n) => return Ok((Vec::new(), n)),
            View::Var(_) => return Ok((vec![(1, self.model_var(t, None)?)], 0)),
            View::Struct(f, args) => {
                let name = self.store.sym_name(f).to_string();
                let args = args.to_vec();
                match (name.as_str(), args.len()) {
                    ("+", 2) | ("-", 2) => {
                        let (mut xs, c1) = self.lin(args[0])?;
                        let (ys, c2) = self.lin(args[1])?;
                        let s: i64 = if name == "+" { 1 } else { -1 };
                        xs.extend(ys.into_iter().map(|(a, v)| (s * a, v)));
                        return Ok((normalize(xs), c1 + s * c2));
                    }
                    ("-", 1) => {
                        let (xs, c) = self.lin(args[0])?;
                        return Ok((xs.into_iter().map(|(a, v)| (-a, v)).collect(), -c));
                    }
                    ("+", 1) => return self.lin(args[0]),
                    ("*", 2) => {
                        let l = self.lin(args[0])?;
                        let r = self.lin(args[1])?;
                        let scale = |(xs, c): Lin, k: i64| -> Lin {
                            (normalize(xs.into_iter().map(|(a, v)| (a * k, v)).collect()), c * k)
                        };
                        if l.0.is_empty() {
                            return Ok(scale(r, l.1));
                        }
                        if r.0.is_empty() {
                            return Ok(scale(l, r.1));
                        }
                        let x = self.aux_of(l);
                        let y = self.aux_of(r);
                        return Ok((vec![(1, self.func_aux(Func::Mul, x, y))], 0));
                    }
                    ("sum", 1) => {
                        let items = self.collection(args[0])?;
                        let mut terms = Vec::new();
                        let mut c = 0;
                        for it in items {
                            let (xs, k) = self.lin(it)?;
                            terms.extend(xs);
                            c += k;
                        }
                        return Ok((normalize(terms), c));
                    }
                    ("abs", 1) => {
                        let x = self.lin(args[0])?;
                        let x = self.aux_of(x);
                        return Ok((vec![(1, self.func_aux(Func::Abs, x, x))], 0));
                    }
                    ("min", 2) | ("max", 2) | ("div", 2) | ("mod", 2) => {
                        let f = match name.as_str() {
                            "min" => Func::Min,
                            "max" => Func::Max,
                            "div" => Func::FloorDiv,
                            _ => Func::Mod,
                        };
                        let x = self.lin(args[0])?;
                        let x = self.aux_of(x);
                        let y = self.lin(args[1])?;
                        let y = self.aux_of(y);
                        return Ok((vec![(1, self.func_aux(f, x, y))], 0));
                    }
                    ("min", 1) | ("max", 1) => {
                        let f = if name == "min" { Func::Min } else { Func::Max };
                        let items = self.collection(args[0])?;
                        let mut acc: Option<VarIdx> = None;
                        for it in items {
                            let l = self.lin(it)?;
                            let x = self.aux_of(l);
                            acc = Some(match acc {
                                None => x,
                                Some(a) => self.func_aux(f, a, x),
                            });
                        }
                        let acc = acc.ok_or_else(|| {
                            EngineError::Eval(format!("{name} of an empty list"))
                        })?;
                        return Ok((vec![(1, acc)], 0));
                    }
                    (op, 2) if COMPARISONS.contains(&op) || op.starts_with('#') => {
                        let b = self.reify(t)?;
                        return Ok((vec![(1, b)], 0));
                    }
                    ("#~", 1) => {
                        let b = self.reify(t)?;
                        return Ok((vec![(1, b)], 0));
                    }
                    (op, n) => return Err(self.unsupported(&format!("{op}/{n}"))),
                }
            }
            _ => {}
        }
        Err(EngineError::Type(format!(
            "{} is not an integer expression",
            self.format_term(t)
        )))
    }

    /// For `V #= E` with `V` a plain variable, gives `V` the bounds of `E`.
    fn infer_domain(&mut self, v: Term, e: Term) -> EResult<()> {
        let Term::Var(x) = self.deref(v) else {
            return Ok(());
        };
        if self.slots[x.0 as usize].cp.is_some() {
            return Ok(());
        }
        let l = self.lin(e)?;
        let (lo, hi) = self.lin_bounds(&l);
        if let Term::Var(x) = self.deref(v) {
            if self.slots[x.0 as usize].cp.is_none() {
                self.cp_new_var(Domain::range(lo, hi), Some(x));
            }
        }
        Ok(())
    }

    fn comparison(&mut self, op: &str, l: Term, r: Term) -> EResult<Linear> {
        if op == "#=" {
            self.infer_domain(l, r)?;
            self.infer_domain(r, l)?;
        }
        let (lt, lc) = self.lin(l)?;
        let (rt, rc) = self.lin(r)?;
        let mut terms = lt;
        terms.extend(rt.into_iter().map(|(a, v)| (-a, v)));
        let terms = normalize(terms);
        let k = rc - lc;
        let neg = |ts: &[(i64, VarIdx)]| ts.iter().map(|&(a, v)| (-a, v)).collect::<Vec<_>>();
        Ok(match op {
            "#=" => Linear::new(terms, Rel::Eq, k),
            "#!=" => Linear::new(terms, Rel::Ne, k),
            "#=<" | "#<=" => Linear::new(terms, Rel::Le, k),
            "#<" => Linear::new(terms, Rel::Le, k - 1),
            "#>=" => Linear::new(neg(&terms), Rel::Le, -k),
            "#>" => Linear::new(neg(&terms), Rel::Le, -k - 1),
            _ => unreachable!("not a comparison: {op}"),
        })
    }

    fn bool_var(&mut self, t: Term) -> EResult<VarIdx> {
        let d = self.deref(t);
        if let Term::Int(n) = d {
            if n != 0 && n != 1 {
                let b = self.cp_new_var(Domain::range(0, 1), None);
                self.cp_post(Constraint::Lin(Linear::new(vec![(1, b)], Rel::Eq, n)));
                return Ok(b);
            }
        }
        self.model_var(d, Some(Domain::range(0, 1)))
    }

    /// A 0/1 model variable equivalent to constraint `t`.
    fn reify(&mut self, t: Term) -> EResult<VarIdx> {
        let t = self.deref(t);
        let View::Struct(f, args) = self.store.view(t) else {
            return self.bool_var(t);
        };
        let name = self.store.sym_name(f).to_string();
        let args = args.to_vec();
        if COMPARISONS.contains(&name.as_str()) && args.len() == 2 {
            let lin = self.comparison(&name, args[0], args[1])?;
            let b = self.cp_new_var(Domain::range(0, 1), None);
            self.cp_post(Constraint::Reif { b, lin });
            return Ok(b);
        }
        if name == "#~" && args.len() == 1 {
            let x = self.reify(args[0])?;
            let b = self.cp_new_var(Domain::range(0, 1), None);
            self.cp_post(Constraint::Lin(Linear::new(vec![(1, b), (1, x)], Rel::Eq, 1)));
            return Ok(b);
        }
        if args.len() == 2 && ["#/\\", "#\\/", "#=>", "#<=>", "#^"].contains(&name.as_str()) {
            let x = self.reify(args[0])?;
            let y = self.reify(args[1])?;
            let b = self.cp_new_var(Domain::range(0, 1), None);
            let clauses: Vec<Vec<(VarIdx, bool)>> = match name.as_str() {
                "#/\\" => vec![
                    vec![(b, false), (x, true)],
                    vec![(b, false), (y, true)],
                    vec![(b, true), (x, false), (y, false)],
                ],
                "#\\/" => vec![
                    vec![(b, false), (x, true), (y, true)],
                    vec![(b, true), (x, false)],
                    vec![(b, true), (y, false)],
                ],
                "#=>" => vec![
                    vec![(b, false), (x, false), (y, true)],
                    vec![(b, true), (x, true)],
                    vec![(b, true), (y, false)],
                ],
                "#<=>" => vec![
                    vec![(b, false), (x, false), (y, true)],
                    vec![(b, false), (x, true), (y, false)],
                    vec![(b, true), (x, true), (y, true)],
                    vec![(b, true), (x, false), (y, false)],
                ],
                _ => vec![
                    vec![(b, false), (x, true), (y, true)],
                    vec![(b, false), (x, false), (y, false)],
                    vec![(b, true), (x, false), (y, true)],
                    vec![(b, true), (x, true), (y, false)],
                ],
            };
            for c in clauses {
                self.cp_post(Constraint::Clause(c));
            }
            return Ok(b);
        }
        if name == "#" || name.starts_with('#') {
            return Err(self.unsupported(&format!("{name}/{}", args.len())));
        }
        // An arithmetic expression used as a truth value.
        let l = self.lin(t)?;
        let x = self.aux_of(l);
        let b = self.cp_new_var(Domain::range(0, 1), None);
        self.cp_post(Constraint::Reif {
            b,
            lin: Linear::new(vec![(1, x)], Rel::Ne, 0),
        });
        Ok(b)
    }

    /// Posts constraint term `t` as true.
    fn post_bool(&mut self, t: Term) -> EResult<()> {
        let t = self.deref(t);
        let View::Struct(f, args) = self.store.view(t) else {
            let b = self.bool_var(t)?;
            self.cp_post(Constraint::Lin(Linear::new(vec![(1, b)], Rel::Eq, 1)));
            return Ok(());
        };
        let name = self.store.sym_name(f).to_string();
        let args = args.to_vec();
        match (name.as_str(), args.len()) {
            (op, 2) if COMPARISONS.contains(&op) => {
                let lin = self.comparison(op, args[0], args[1])?;
                self.cp_post(Constraint::Lin(lin));
            }
            ("#/\\", 2) => {
                self.post_bool(args[0])?;
                self.post_bool(args[1])?;
            }
            ("#\\/", 2) | ("#=>", 2) => {
                let x = self.reify(args[0])?;
                let y = self.reify(args[1])?;
                let first = name == "#\\/";
                self.cp_post(Constraint::Clause(vec![(x, first), (y, true)]));
            }
            ("#<=>", 2) | ("#^", 2) => {
                let x = self.reify(args[0])?;
                let y = self.reify(args[1])?;
                let lin = if name == "#<=>" {
                    Linear::new(vec![(1, x), (-1, y)], Rel::Eq, 0)
                } else {
                    Linear::new(vec![(1, x), (1, y)], Rel::Eq, 1)
                };
                self.cp_post(Constraint::Lin(lin));
            }
            ("#~", 1) => {
                let x = self.reify(args[0])?;
                self.cp_post(Constraint::Lin(Linear::new(vec![(1, x)], Rel::Eq, 0)));
            }
            _ => {
                let b = self.reify(t)?;
                self.cp_post(Constraint::Lin(Linear::new(vec![(1, b)], Rel::Eq, 1)));
            }
        }
        Ok(())
    }

    /// Flattens nested lists and arrays of variables.
    fn var_list(&self, t: Term, out: &mut Vec<Term>) -> EResult<()> {
        let t = self.deref(t);
        match self.store.view(t) {
            View::Nil => Ok(()),
            View::Cons(..) | View::Array(_) => {
                for x in self.collection(t)? {
                    self.var_list(x, out)?;
                }
                Ok(())
            }
            _ => {
                out.push(t);
                Ok(())
            }
        }
    }

    fn domain_of(&mut self, d: Term) -> EResult<Domain> {
        let d = self.deref(d);
        match self.store.view(d) {
            View::Struct(f, _) if f == self.syms.dotdot => {
                let l = self.iterable(d)?;
                let xs = self.list_vec(l)?;
                let mut vals = Vec::with_capacity(xs.len());
                for x in xs {
                    vals.push(self.int_of(x, "domain value")?);
                }
                Ok(Domain::from_values(vals))
            }
            View::Int(n) => Ok(Domain::singleton(n)),
            _ => {
                let xs = self.collection(d)?;
                let mut vals = Vec::with_capacity(xs.len());
                for x in xs {
                    vals.push(self.int_of(x, "domain value")?);
                }
                Ok(Domain::from_values(vals))
            }
        }
    }

    /// `Vs :: D` and `Vs notin D`.
    pub(crate) fn post_domain(&mut self, vars: Term, dom: Term, negate: bool) -> EResult<bool> {
        let d = self.domain_of(dom)?;
        let mut vs = Vec::new();
        self.var_list(vars, &mut vs)?;
        let mut changed = Vec::new();
        for v in vs {
            match self.deref(v) {
                Term::Int(n) => {
                    if d.contains(n) == negate {
                        return Ok(false);
                    }
                }
                Term::Var(x) => match self.slots[x.0 as usize].cp {
                    Some(i) => {
                        let i = i as VarIdx;
                        let cur = &self.cpstore.model.doms[i];
                        let nd = if negate { cur.subtract(&d) } else { cur.intersect(&d) };
                        if nd.is_empty() {
                            return Ok(false);
                        }
                        if nd != *cur {
                            let old = std::mem::replace(&mut self.cpstore.model.doms[i], nd);
                            self.trail.push(TrailEntry::Dom(i as u32, old));
                            changed.push(i);
                        }
                    }
                    None => {
                        if negate {
                            return Err(EngineError::Instantiation(
                                "notin on a variable without a domain".into(),
                            ));
                        }
                        if d.is_empty() {
                            return Ok(false);
                        }
                        let i = self.cp_new_var(d.clone(), Some(x));
                        if d.fixed().is_some() {
                            changed.push(i);
                        }
                    }
                },
                other => {
                    return Err(EngineError::Type(format!(
                        "domain of non-variable {}",
                        self.format_term(other)
                    )))
                }
            }
        }
        if changed.is_empty() {
            return Ok(true);
        }
        self.cp_propagate(&changed, &[])
    }

    fn int_rows(&mut self, t: Term) -> EResult<Vec<Vec<i64>>> {
        let mut rows = Vec::new();
        for r in self.collection(t)? {
            let mut row = Vec::new();
            for x in self.collection(r)? {
                row.push(self.int_of(x, "table value")?);
            }
            rows.push(row);
        }
        Ok(rows)
    }

    fn post_table(&mut self, vars: Term, tuples: Term, negated: bool) -> EResult<()> {
        let rows = self.int_rows(tuples)?;
        let vt = self.deref(vars);
        let items = self.collection(vt)?;
        let nested = matches!(self.store.view(vt), View::Cons(..))
            && items
                .first()
                .map(|&x| matches!(self.store.view(self.deref(x)), View::Cons(..) | View::Array(_)))
                .unwrap_or(false);
        let groups = if nested { items } else { vec![vt] };
        for g in groups {
            let mut vs = Vec::new();
            for x in self.collection(g)? {
                let l = self.lin(x)?;
                vs.push(self.aux_of(l));
            }
            if rows.iter().any(|r| r.len() != vs.len()) {
                return Err(EngineError::Type("table tuple arity mismatch".into()));
            }
            self.cp_post(Constraint::Table {
                vars: vs,
                tuples: rows.clone(),
                negated,
            });
        }
        Ok(())
    }

    /// Posts a constraint builtin.
    pub(crate) fn post_constraint(&mut self, b: Builtin, name: Sym, args: &[Term]) -> EResult<bool> {
        let c0 = self.cpstore.model.cons.len();
        let r = self.post_constraint_inner(b, name, args);
        match r {
            Ok(()) => {}
            Err(EngineError::Other(m)) if m == "$fail" => return Ok(false),
            Err(e) => return Err(e),
        }
        let c1 = self.cpstore.model.cons.len();
        let initial: Vec<usize> = (c0..c1).collect();
        let mut changed = Vec::new();
        for ci in c0..c1 {
            if let Constraint::AllDiff(xs) = &self.cpstore.model.cons[ci] {
                changed.extend(
                    xs.iter()
                        .map(|x| x.0)
                        .filter(|&v| self.cpstore.model.doms[v].fixed().is_some()),
                );
            }
        }
        self.cp_propagate(&changed, &initial)
    }

    fn post_constraint_inner(&mut self, b: Builtin, name: Sym, args: &[Term]) -> EResult<()> {
        match b {
            Builtin::Constraint => {
                let t = self.store.structure(name, args);
                self.post_bool(t)
            }
            Builtin::AllDifferent => {
                let items = self.collection(args[0])?;
                let mut xs = Vec::with_capacity(items.len());
                for it in items {
                    let (terms, c) = self.lin(it)?;
                    if terms.len() == 1 && terms[0].0 == 1 {
                        xs.push((terms[0].1, c));
                    } else {
                        xs.push((self.aux_of((terms, c)), 0));
                    }
                }
                self.cp_post(Constraint::AllDiff(xs));
                Ok(())
            }
            Builtin::TableIn => self.post_table(args[0], args[1], false),
            Builtin::TableNotIn => self.post_table(args[0], args[1], true),
            Builtin::Element => {
                let i = self.lin(args[0])?;
                let idx = self.aux_of(i);
                let mut list = Vec::new();
                for it in self.collection(args[1])? {
                    let l = self.lin(it)?;
                    list.push(self.aux_of(l));
                }
                let v = self.lin(args[2])?;
                let val = self.aux_of(v);
                self.cp_post(Constraint::Element { idx, list, val });
                Ok(())
            }
            _ => unreachable!("not a constraint builtin"),
        }
    }

    /// `solve(Vars)` and `solve(Options, Vars)`.
    pub(crate) fn solve_builtin(&mut self, opts: Option<Term>, vars: Term, rest: Cont) -> EResult<Step> {
        let mut labeling = Labeling::InputOrder;
        let mut objective: Option<(Sense, Term)> = None;
        if let Some(o) = opts {
            for x in self.collection(o)? {
                let x = self.deref(x);
                match self.store.view(x) {
                    View::Atom(a) if a == self.syms.ff => labeling = Labeling::FirstFail,
                    View::Atom(_) => {}
                    View::Struct(f, xs) if xs.len() == 1 && (f == self.syms.min || f == self.syms.max) => {
                        let sense = if f == self.syms.min { Sense::Min } else { Sense::Max };
                        objective = Some((sense, xs[0]));
                    }
                    _ => {
                        return Err(EngineError::Type(format!(
                            "unknown solve option {}",
                            self.format_term(x)
                        )))
                    }
                }
            }
        }
        let mut vs = Vec::new();
        self.var_list(vars, &mut vs)?;
        let mut labeled = Vec::new();
        for v in vs {
            match self.deref(v) {
                Term::Int(_) => {}
                Term::Var(x) => match self.slots[x.0 as usize].cp {
                    Some(i) => labeled.push(i as VarIdx),
                    None => {
                        return Err(EngineError::Instantiation(
                            "solve: variable without a domain".into(),
                        ))
                    }
                },
                other => {
                    return Err(EngineError::Type(format!(
                        "solve: {} is not a variable",
                        self.format_term(other)
                    )))
                }
            }
        }
        let mut model = match objective {
            Some((sense, e)) => {
                let l = self.lin(e)?;
                let o = self.aux_of(l);
                let mut m = self.cpstore.model.clone();
                m.objective = Some((sense, o));
                m
            }
            None => self.cpstore.model.clone(),
        };
        let owners = self.cpstore.var_of.clone();
        let stream: Box<dyn AltStream> = match self.backend() {
            Backend::Cp => Box::new(CpStream {
                reported: SearchStats::default(),
                search: Search::new(Rc::new(Propagator::new(model)), None, labeled.clone(), labeling),
                owners,
                labeled,
                done: false,
            }),
            Backend::Sat => {
                let opts = crate::sat::SatOptions {
                    learning: self.options.sat_learning,
                    seed: self.options.seed,
                };
                let session = crate::sat::SatSession::new(&model, &labeled, opts)
                    .map_err(|u| self.unsupported(&u.0))?;
                if let Some(path) = self.options.emit_dimacs.clone() {
                    session
                        .write_dimacs(&path)
                        .map_err(|e| EngineError::Other(format!("cannot write {}: {e}", path.display())))?;
                }
                Box::new(SatStream {
                    session,
                    owners,
                    labeled,
                })
            }
            Backend::Mip => {
                let lm = crate::mip::linearize(&model).map_err(|u| self.unsupported(&u.0))?;
                if let Some(path) = self.options.emit_lp.clone() {
                    std::fs::write(&path, lm.to_lp())
                        .map_err(|e| EngineError::Other(format!("cannot write {}: {e}", path.display())))?;
                }
                let n = model.num_vars();
                model = lm.to_cp_model();
                let owners = owners.into_iter().chain(std::iter::repeat(None)).take(model.num_vars()).collect::<Vec<_>>();
                debug_assert!(model.num_vars() >= n);
                Box::new(CpStream {
                    reported: SearchStats::default(),
                    search: Search::new(Rc::new(Propagator::new(model)), None, labeled.clone(), labeling),
                    owners,
                    labeled,
                    done: false,
                })
            }
        };
        self.stream_alts(stream, rest)
    }
}

struct CpStream {
    search: Search,
    reported: SearchStats,
    owners: Vec<Option<VarId>>,
    labeled: Vec<VarIdx>,
    done: bool,
}

impl AltStream for CpStream {
    fn next_alt(&mut self, eng: &mut Engine) -> EResult<Option<Vec<(Term, Term)>>> {
        if self.done {
            return Ok(None);
        }
        let found = self.search.next_solution();
        let now = SearchStats {
            propagations: self.search.propagations(),
            ..self.search.stats
        };
        let acc = &mut eng.search_stats;
        acc.nodes += now.nodes - self.reported.nodes;
        acc.failures += now.failures - self.reported.failures;
        acc.solutions += now.solutions - self.reported.solutions;
        acc.propagations += now.propagations - self.reported.propagations;
        self.reported = now;
        let Some(doms) = found else {
            self.done = true;
            return Ok(None);
        };
        let mut pairs = Vec::new();
        for (i, d) in doms.iter().enumerate() {
            if let (Some(Some(v)), Some(x)) = (self.owners.get(i), d.fixed()) {
                pairs.push((Term::Var(*v), Term::Int(x)));
            }
        }
        debug_assert!(self.labeled.iter().all(|&v| doms[v].fixed().is_some()));
        Ok(Some(pairs))
    }
}

struct SatStream {
    session: crate::sat::SatSession,
    owners: Vec<Option<VarId>>,
    labeled: Vec<VarIdx>,
}

impl AltStream for SatStream {
    fn next_alt(&mut self, eng: &mut Engine) -> EResult<Option<Vec<(Term, Term)>>> {
        let before = self.session.stats();
        let found = self.session.next_solution();
        let after = self.session.stats();
        let acc = &mut eng.sat_stats;
        acc.decisions += after.decisions - before.decisions;
        acc.propagations += after.propagations - before.propagations;
        acc.conflicts += after.conflicts - before.conflicts;
        acc.learned += after.learned - before.learned;
        let Some(vals) = found else {
            return Ok(None);
        };
        let mut pairs = Vec::new();
        for &i in &self.labeled {
            if let Some(v) = self.owners[i] {
                pairs.push((Term::Var(v), Term::Int(vals[i])));
            }
        }
        Ok(Some(pairs))
    }
}
