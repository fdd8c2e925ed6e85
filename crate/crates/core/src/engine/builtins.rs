use std::cmp::Ordering;
use std::collections::HashMap;

use crate::term::{Sym, Term, View};

use super::compile::{Builtin, CmpOp, Expr, Native};
use super::machine::{AltStream, Cont, Env, Step};
use super::{EResult, Engine, EngineError};

/// Alternatives precomputed as lists of pairs to unify.
pub(crate) struct VecStream {
    items: std::vec::IntoIter<Vec<(Term, Term)>>,
}

impl VecStream {
    pub fn new(items: Vec<Vec<(Term, Term)>>) -> Box<Self> {
        Box::new(VecStream {
            items: items.into_iter(),
        })
    }
}

impl AltStream for VecStream {
    fn next_alt(&mut self, _eng: &mut Engine) -> EResult<Option<Vec<(Term, Term)>>> {
        Ok(self.items.next())
    }
}

struct MemberStream {
    x: Term,
    cur: Term,
}

impl AltStream for MemberStream {
    fn next_alt(&mut self, eng: &mut Engine) -> EResult<Option<Vec<(Term, Term)>>> {
        match eng.store.view(eng.deref(self.cur)) {
            View::Cons(h, t) => {
                self.cur = t;
                Ok(Some(vec![(self.x, h)]))
            }
            _ => Ok(None),
        }
    }
}

struct BetweenStream {
    x: Term,
    next: i64,
    hi: i64,
}

impl AltStream for BetweenStream {
    fn next_alt(&mut self, _eng: &mut Engine) -> EResult<Option<Vec<(Term, Term)>>> {
        if self.next > self.hi {
            return Ok(None);
        }
        let v = self.next;
        self.next += 1;
        Ok(Some(vec![(self.x, Term::Int(v))]))
    }
}

fn cmp_holds(op: CmpOp, ord: Ordering) -> bool {
    match op {
        CmpOp::Lt => ord == Ordering::Less,
        CmpOp::Le => ord != Ordering::Greater,
        CmpOp::Gt => ord == Ordering::Greater,
        CmpOp::Ge => ord != Ordering::Less,
    }
}

impl Engine {
    pub(crate) fn call_builtin(
        &mut self,
        b: Builtin,
        name: Sym,
        args: &[Expr],
        env: &Env,
        rest: Cont,
    ) -> EResult<Step> {
        let mut a = Vec::with_capacity(args.len());
        for e in args {
            a.push(self.eval(e, env)?);
        }
        let ok = match b {
            Builtin::NotUnify => {
                let (tl, vl) = (self.trail.len(), self.slots.len());
                let unifiable = self.unify(a[0], a[1])?;
                self.undo_to(tl);
                self.slots.truncate(vl);
                !unifiable
            }
            Builtin::Identical => self.identical(a[0], a[1]),
            Builtin::NotIdentical => !self.identical(a[0], a[1]),
            Builtin::ArithCmp(op) => {
                let x = self.deref(a[0]);
                let y = self.deref(a[1]);
                match (x, y) {
                    (Term::Int(x), Term::Int(y)) => cmp_holds(op, x.cmp(&y)),
                    (Term::Var(_), _) | (_, Term::Var(_)) => {
                        return Err(EngineError::Instantiation(
                            "comparison with an unbound operand".into(),
                        ))
                    }
                    _ => cmp_holds(op, self.compare_terms(x, y)),
                }
            }
            Builtin::ArithEq => self.int_of(a[0], "operand")? == self.int_of(a[1], "operand")?,
            Builtin::ArithNe => self.int_of(a[0], "operand")? != self.int_of(a[1], "operand")?,
            Builtin::OrderCmp(op) => cmp_holds(op, self.compare_terms(a[0], a[1])),
            Builtin::Write => {
                let s = self.display_text(a[0]);
                self.write_out(&s);
                true
            }
            Builtin::Writeln => {
                let mut s = self.display_text(a[0]);
                s.push('\n');
                self.write_out(&s);
                true
            }
            Builtin::Nl => {
                self.write_out("\n");
                true
            }
            Builtin::Member => {
                let s = Box::new(MemberStream { x: a[0], cur: a[1] });
                return self.stream_alts(s, rest);
            }
            Builtin::Select => {
                let items = self.list_vec(a[1])?;
                let mut alts = Vec::with_capacity(items.len());
                for i in 0..items.len() {
                    let others: Vec<Term> = items
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != i)
                        .map(|(_, &t)| t)
                        .collect();
                    let r = self.store.list(others);
                    alts.push(vec![(a[0], items[i]), (a[2], r)]);
                }
                return self.stream_alts(VecStream::new(alts), rest);
            }
            Builtin::Append3 => {
                if let Ok(xs) = self.list_vec(a[0]) {
                    let z = self.store.list_with_tail(xs, a[1]);
                    self.unify(z, a[2])?
                } else {
                    let zs = self.list_vec(a[2])?;
                    let mut alts = Vec::with_capacity(zs.len() + 1);
                    for i in 0..=zs.len() {
                        let x = self.store.list(zs[..i].iter().copied());
                        let y = self.store.list(zs[i..].iter().copied());
                        alts.push(vec![(a[0], x), (a[1], y)]);
                    }
                    return self.stream_alts(VecStream::new(alts), rest);
                }
            }
            Builtin::Between => {
                let lo = self.int_of(a[0], "lower bound")?;
                let hi = self.int_of(a[1], "upper bound")?;
                match self.deref(a[2]) {
                    Term::Int(n) => lo <= n && n <= hi,
                    Term::Var(_) => {
                        let s = Box::new(BetweenStream {
                            x: a[2],
                            next: lo,
                            hi,
                        });
                        return self.stream_alts(s, rest);
                    }
                    _ => return Err(EngineError::Type("between/3 expects an integer".into())),
                }
            }
            Builtin::Length2 => match self.list_vec(a[0]) {
                Ok(xs) => self.unify(a[1], Term::Int(xs.len() as i64))?,
                Err(_) => {
                    let n = self.int_of(a[1], "length")?;
                    if n < 0 {
                        false
                    } else {
                        let vs: Vec<Term> = (0..n).map(|_| self.fresh_var()).collect();
                        let l = self.store.list(vs);
                        self.unify(a[0], l)?
                    }
                }
            },
            Builtin::Ground => {
                let t = self.resolve(a[0]);
                self.store.is_ground(t)
            }
            Builtin::IsVar => matches!(self.deref(a[0]), Term::Var(_)),
            Builtin::NonVar => !matches!(self.deref(a[0]), Term::Var(_)),
            Builtin::IsInt => matches!(self.deref(a[0]), Term::Int(_)),
            Builtin::IsAtom => matches!(self.deref(a[0]), Term::Atom(_) | Term::Nil),
            Builtin::IsList => self.list_vec(a[0]).is_ok(),
            Builtin::Domain => self.post_domain(a[0], a[1], false)?,
            Builtin::NotInDomain => self.post_domain(a[0], a[1], true)?,
            Builtin::Constraint
            | Builtin::AllDifferent
            | Builtin::TableIn
            | Builtin::TableNotIn
            | Builtin::Element => self.post_constraint(b, name, &a)?,
            Builtin::UnsupportedGlobal => {
                return Err(EngineError::Unsupported {
                    backend: self.backend().to_string(),
                    constraint: format!("{}/{}", self.store.sym_name(name), a.len()),
                })
            }
            Builtin::Solve1 => return self.solve_builtin(None, a[0], rest),
            Builtin::Solve2 => return self.solve_builtin(Some(a[0]), a[1], rest),
            Builtin::Plan => return self.plan_builtin(false, &a, rest),
            Builtin::BestPlan => return self.plan_builtin(true, &a, rest),
        };
        Ok(if ok { Step::Cont(rest) } else { Step::Fail })
    }

    /// Standard order: variables, integers, atoms, compounds. Compounds
    /// compare by arity, then name, then arguments left to right.
    pub(crate) fn compare_terms(&self, a: Term, b: Term) -> Ordering {
        let a = self.deref(a);
        let b = self.deref(b);
        if a == b {
            return Ordering::Equal;
        }
        fn rank(v: &View) -> u8 {
            match v {
                View::Var(_) => 0,
                View::Int(_) => 1,
                View::Atom(_) | View::Nil => 2,
                _ => 3,
            }
        }
        let va = self.store.view(a);
        let vb = self.store.view(b);
        let (ra, rb) = (rank(&va), rank(&vb));
        if ra != rb {
            return ra.cmp(&rb);
        }
        match (va, vb) {
            (View::Var(x), View::Var(y)) => x.cmp(&y),
            (View::Int(x), View::Int(y)) => x.cmp(&y),
            (View::Nil, View::Nil) => Ordering::Equal,
            (View::Nil, View::Atom(s)) => "[]".cmp(self.store.sym_name(s)),
            (View::Atom(s), View::Nil) => self.store.sym_name(s).cmp("[]"),
            (View::Atom(x), View::Atom(y)) => self.store.sym_name(x).cmp(self.store.sym_name(y)),
            _ => {
                let (na, xs) = self.functor_args(a);
                let (nb, ys) = self.functor_args(b);
                xs.len()
                    .cmp(&ys.len())
                    .then_with(|| na.cmp(nb))
                    .then_with(|| {
                        for (&x, &y) in xs.iter().zip(ys.iter()) {
                            let o = self.compare_terms(x, y);
                            if o != Ordering::Equal {
                                return o;
                            }
                        }
                        Ordering::Equal
                    })
            }
        }
    }

    fn functor_args(&self, t: Term) -> (&str, Vec<Term>) {
        match self.store.view(t) {
            View::Cons(h, tl) => (".", vec![h, tl]),
            View::Struct(f, xs) => (self.store.sym_name(f), xs.to_vec()),
            View::Array(xs) => ("{}", xs.to_vec()),
            _ => ("", Vec::new()),
        }
    }

    /// Elements of a list, array or string-like collection.
    pub(crate) fn collection(&self, t: Term) -> EResult<Vec<Term>> {
        let t = self.deref(t);
        match self.store.view(t) {
            View::Array(xs) => Ok(xs.to_vec()),
            _ => self.list_vec(t),
        }
    }

    fn sorted(&self, mut xs: Vec<Term>, dedup: bool) -> Vec<Term> {
        xs.sort_by(|&x, &y| self.compare_terms(x, y));
        if dedup {
            xs.dedup_by(|x, y| self.compare_terms(*x, *y) == Ordering::Equal);
        }
        xs
    }

    fn new_array(&mut self, dims: &[i64]) -> Term {
        let n = dims[0].max(0) as usize;
        let elems: Vec<Term> = (0..n)
            .map(|_| {
                if dims.len() > 1 {
                    self.new_array(&dims[1..])
                } else {
                    self.fresh_var()
                }
            })
            .collect();
        self.store.array(&elems)
    }

    fn flatten_into(&self, t: Term, out: &mut Vec<Term>) {
        let t = self.deref(t);
        match self.store.view(t) {
            View::Nil => {}
            View::Cons(..) => match self.list_vec(t) {
                Ok(xs) => {
                    for x in xs {
                        self.flatten_into(x, out);
                    }
                }
                Err(_) => out.push(t),
            },
            _ => out.push(t),
        }
    }

    /// Expands `Lo..Hi` to a list; other iterables pass through as lists.
    pub(crate) fn iterable(&mut self, t: Term) -> EResult<Term> {
        let t = self.deref(t);
        match self.store.view(t) {
            View::Struct(f, xs) if f == self.syms.dotdot && xs.len() == 2 => {
                let (a, b) = (xs[0], xs[1]);
                let (lo, step) = match self.store.view(self.deref(a)) {
                    View::Struct(g, ys) if g == self.syms.dotdot && ys.len() == 2 => {
                        let (y0, y1) = (ys[0], ys[1]);
                        (self.int_of(y0, "range start")?, self.int_of(y1, "range step")?)
                    }
                    _ => (self.int_of(a, "range start")?, 1),
                };
                let hi = self.int_of(b, "range end")?;
                if step == 0 {
                    return Err(EngineError::Eval("range step is zero".into()));
                }
                let mut items = Vec::new();
                let mut i = lo;
                while (step > 0 && i <= hi) || (step < 0 && i >= hi) {
                    items.push(Term::Int(i));
                    i += step;
                }
                Ok(self.store.list(items))
            }
            View::Array(xs) => {
                let xs = xs.to_vec();
                Ok(self.store.list(xs))
            }
            View::Var(_) => Err(EngineError::Instantiation("iterating over an unbound variable".into())),
            _ => {
                self.list_vec(t)?;
                Ok(t)
            }
        }
    }

    pub(crate) fn native(&mut self, nf: Native, a: &[Term]) -> EResult<Term> {
        use Native::*;
        Ok(match nf {
            Length => {
                let t = self.deref(a[0]);
                match self.store.view(t) {
                    View::Struct(_, xs) => Term::Int(xs.len() as i64),
                    _ => Term::Int(self.collection(t)?.len() as i64),
                }
            }
            Reverse => {
                let mut xs = self.list_vec(a[0])?;
                xs.reverse();
                self.store.list(xs)
            }
            Sort => {
                let xs = self.collection(a[0])?;
                let xs = self.sorted(xs, false);
                self.store.list(xs)
            }
            SortDown => {
                let xs = self.collection(a[0])?;
                let mut xs = self.sorted(xs, false);
                xs.reverse();
                self.store.list(xs)
            }
            SortRemoveDups => {
                let xs = self.collection(a[0])?;
                let xs = self.sorted(xs, true);
                self.store.list(xs)
            }
            InsertOrdered => {
                let mut xs = self.list_vec(a[0])?;
                let pos = xs
                    .iter()
                    .position(|&x| self.compare_terms(x, a[1]) == Ordering::Greater)
                    .unwrap_or(xs.len());
                xs.insert(pos, a[1]);
                self.store.list(xs)
            }
            Delete => {
                let mut xs = self.list_vec(a[0])?;
                if let Some(i) = xs.iter().position(|&x| self.identical(x, a[1])) {
                    xs.remove(i);
                }
                self.store.list(xs)
            }
            DeleteAll => {
                let xs = self.list_vec(a[0])?;
                let ys: Vec<Term> = xs.into_iter().filter(|&x| !self.identical(x, a[1])).collect();
                self.store.list(ys)
            }
            Append => {
                let xs = self.list_vec(a[0])?;
                self.list_vec(a[1])?;
                self.store.list_with_tail(xs, a[1])
            }
            NewList => {
                let n = self.int_of(a[0], "length")?;
                let vs: Vec<Term> = (0..n.max(0)).map(|_| self.fresh_var()).collect();
                self.store.list(vs)
            }
            NewListFilled => {
                let n = self.int_of(a[0], "length")?;
                self.store.list((0..n.max(0)).map(|_| a[1]))
            }
            NewArray => {
                let mut dims = Vec::with_capacity(a.len());
                for &t in a {
                    dims.push(self.int_of(t, "dimension")?);
                }
                self.new_array(&dims)
            }
            Head => match self.store.view(self.deref(a[0])) {
                View::Cons(h, _) => h,
                _ => return Err(EngineError::Type("head of a non-list".into())),
            },
            Tail => match self.store.view(self.deref(a[0])) {
                View::Cons(_, t) => t,
                _ => return Err(EngineError::Type("tail of a non-list".into())),
            },
            Last => {
                let xs = self.collection(a[0])?;
                *xs
                    .last()
                    .ok_or_else(|| EngineError::Type("last of an empty list".into()))?
            }
            ToList => {
                let xs = self.collection(a[0])?;
                self.store.list(xs)
            }
            ToArray => {
                let xs = self.collection(a[0])?;
                self.store.array(&xs)
            }
            Iterable => self.iterable(a[0])?,
            CurrentResource => match self.resources.last() {
                Some(&r) => {
                    self.planner.budget_sensitive = true;
                    Term::Int(r)
                }
                None => {
                    return Err(EngineError::Context(
                        "current_resource() outside a planner call".into(),
                    ))
                }
            },
            Nth => {
                let i = self.int_of(a[0], "index")?;
                self.index(a[1], i)?
            }
            CopyTerm => {
                let mut map = HashMap::new();
                self.copy_term(a[0], &mut map, false)
            }
            Name => match self.store.view(self.deref(a[0])) {
                View::Struct(f, _) | View::Atom(f) => Term::Atom(f),
                View::Cons(..) => self.store.atom("."),
                View::Nil => Term::Nil,
                View::Array(_) => self.store.atom("{}"),
                _ => return Err(EngineError::Type("name/1 of a non-compound".into())),
            },
            Arity => match self.store.view(self.deref(a[0])) {
                View::Struct(_, xs) | View::Array(xs) => Term::Int(xs.len() as i64),
                View::Cons(..) => Term::Int(2),
                _ => Term::Int(0),
            },
            Arg => {
                let i = self.int_of(a[0], "argument index")?;
                let t = self.deref(a[1]);
                match self.store.view(t) {
                    View::Cons(h, tl) => match i {
                        1 => h,
                        2 => tl,
                        _ => return Err(EngineError::Index(format!("arg {i} of a list cell"))),
                    },
                    _ => self.index(t, i)?,
                }
            }
            RemoveDups => {
                let xs = self.collection(a[0])?;
                let mut out: Vec<Term> = Vec::with_capacity(xs.len());
                for x in xs {
                    if !out.iter().any(|&y| self.identical(x, y)) {
                        out.push(x);
                    }
                }
                self.store.list(out)
            }
            Flatten => {
                let mut out = Vec::new();
                self.flatten_into(a[0], &mut out);
                self.store.list(out)
            }
            Zip => {
                let xs = self.collection(a[0])?;
                let ys = self.collection(a[1])?;
                let pairs: Vec<Term> = xs
                    .into_iter()
                    .zip(ys)
                    .map(|(x, y)| self.store.array(&[x, y]))
                    .collect();
                self.store.list(pairs)
            }
            Range => {
                let t = self.store.structure(self.syms.dotdot, &[a[0], a[1]]);
                self.iterable(t)?
            }
        })
    }
}
