//! MIP backend: big-M linearization of a model into `≤` rows over integer
//! and binary variables, LP-format output and an exhaustive checker.

mod check;
mod lp;

pub use check::{check_exhaustive, feasible_points, TooLarge, MAX_POINTS};
pub use lp::parse_lp;

use crate::cp::{Constraint, Domain, Func, Linear, Model, Rel, Sense};
pub use crate::sat::Unsupported;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpVar {
    pub lo: i64,
    pub hi: i64,
    pub binary: bool,
}

/// `Σ coef·var ≤ rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Row {
    pub terms: Vec<(i64, usize)>,
    pub rhs: i64,
}

impl Row {
    pub fn holds(&self, a: &[i64]) -> bool {
        let s: i128 = self.terms.iter().map(|&(c, v)| c as i128 * a[v] as i128).sum();
        s <= self.rhs as i128
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinearModel {
    /// Model variables first, then binaries added by the linearization.
    pub vars: Vec<LpVar>,
    pub rows: Vec<Row>,
    pub objective: Option<(Sense, Vec<(i64, usize)>)>,
    /// Number of variables carried over from the source model.
    pub n_orig: usize,
}

/// Adjustments applied to the big-M constants, for mutation testing.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BigMAdjust {
    pub m1: i64,
    pub m2: i64,
}

/// Big-M constants for `B ⇔ (expr ≤ 0)` where `expr` ranges over
/// `[lo, hi]`: `M1 = hi + 1`, `M2 = 2 - lo`. For `expr = X - Y` these are
/// `ubd(X) - lbd(Y) + 1` and `ubd(Y) - lbd(X) + 2`.
pub fn big_m(lo: i64, hi: i64) -> (i64, i64) {
    (hi + 1, 2 - lo)
}

impl LinearModel {
    pub fn name(&self, v: usize) -> String {
        if v < self.n_orig {
            format!("x{v}")
        } else {
            format!("b{}", v - self.n_orig)
        }
    }

    pub fn num_binaries(&self) -> usize {
        self.vars.len() - self.n_orig
    }

    pub fn holds(&self, a: &[i64]) -> bool {
        self.vars.iter().zip(a).all(|(v, &x)| v.lo <= x && x <= v.hi) && self.rows.iter().all(|r| r.holds(a))
    }

    /// Range of `Σ terms + k` over the variable bounds.
    fn range(&self, terms: &[(i64, usize)], k: i64) -> (i64, i64) {
        let mut lo = k;
        let mut hi = k;
        for &(c, v) in terms {
            let (a, b) = (c * self.vars[v].lo, c * self.vars[v].hi);
            lo += a.min(b);
            hi += a.max(b);
        }
        (lo, hi)
    }

    fn new_binary(&mut self) -> usize {
        self.vars.push(LpVar {
            lo: 0,
            hi: 1,
            binary: true,
        });
        self.vars.len() - 1
    }

    fn row(&mut self, terms: Vec<(i64, usize)>, rhs: i64) {
        let mut merged: Vec<(i64, usize)> = Vec::with_capacity(terms.len());
        for (c, v) in terms {
            match merged.iter_mut().find(|t| t.1 == v) {
                Some(t) => t.0 += c,
                None => merged.push((c, v)),
            }
        }
        merged.retain(|t| t.0 != 0);
        self.rows.push(Row { terms: merged, rhs });
    }

    /// `b ⇔ (Σ terms ≤ rhs)` as two big-M rows.
    fn reify_le(&mut self, b: usize, terms: &[(i64, usize)], rhs: i64, adj: BigMAdjust) {
        let (lo, hi) = self.range(terms, -rhs);
        let (m1, m2) = big_m(lo, hi);
        let (m1, m2) = (m1 + adj.m1, m2 + adj.m2);
        // E - M1(1 - B) ≤ 0
        let mut t = terms.to_vec();
        t.push((m1, b));
        self.row(t, rhs + m1);
        // -E + 1 - M2·B ≤ 0
        let mut t: Vec<(i64, usize)> = terms.iter().map(|&(c, v)| (-c, v)).collect();
        t.push((-m2, b));
        self.row(t, -rhs - 1);
    }

    /// Binary equivalent to `Σ terms = rhs`.
    fn reify_eq(&mut self, terms: &[(i64, usize)], rhs: i64, adj: BigMAdjust) -> usize {
        let b1 = self.new_binary();
        self.reify_le(b1, terms, rhs, adj);
        let neg: Vec<(i64, usize)> = terms.iter().map(|&(c, v)| (-c, v)).collect();
        let b2 = self.new_binary();
        self.reify_le(b2, &neg, -rhs, adj);
        let b = self.new_binary();
        self.row(vec![(1, b), (-1, b1)], 0);
        self.row(vec![(1, b), (-1, b2)], 0);
        self.row(vec![(1, b1), (1, b2), (-1, b)], 1);
        b
    }

    fn post_ne(&mut self, terms: &[(i64, usize)], rhs: i64, adj: BigMAdjust) {
        // B1 ⇔ (E ≤ rhs - 1), B2 ⇔ (E ≥ rhs + 1), B1 + B2 ≥ 1
        let b1 = self.new_binary();
        self.reify_le(b1, terms, rhs - 1, adj);
        let neg: Vec<(i64, usize)> = terms.iter().map(|&(c, v)| (-c, v)).collect();
        let b2 = self.new_binary();
        self.reify_le(b2, &neg, -rhs - 1, adj);
        self.row(vec![(-1, b1), (-1, b2)], -1);
    }

    fn post_lin(&mut self, l: &Linear, adj: BigMAdjust) {
        let terms = l.terms.clone();
        match l.rel {
            Rel::Le => self.row(terms, l.rhs),
            Rel::Eq => {
                let neg = terms.iter().map(|&(c, v)| (-c, v)).collect();
                self.row(terms, l.rhs);
                self.row(neg, -l.rhs);
            }
            Rel::Ne => self.post_ne(&terms, l.rhs, adj),
        }
    }

    /// Binary equivalent to `lin`.
    fn reify(&mut self, lin: &Linear, adj: BigMAdjust) -> usize {
        match lin.rel {
            Rel::Le => {
                let b = self.new_binary();
                self.reify_le(b, &lin.terms, lin.rhs, adj);
                b
            }
            Rel::Eq => self.reify_eq(&lin.terms, lin.rhs, adj),
            Rel::Ne => {
                let e = self.reify_eq(&lin.terms, lin.rhs, adj);
                let b = self.new_binary();
                self.row(vec![(1, b), (1, e)], 1);
                self.row(vec![(-1, b), (-1, e)], -1);
                b
            }
        }
    }

    /// The model as a finite-domain model over the same variables, for
    /// solving by search.
    pub fn to_cp_model(&self) -> Model {
        let mut m = Model::new();
        for v in &self.vars {
            m.new_var(Domain::range(v.lo, v.hi));
        }
        for r in &self.rows {
            m.post(Constraint::Lin(Linear::new(r.terms.clone(), Rel::Le, r.rhs)));
        }
        if let Some((sense, terms)) = &self.objective {
            let (lo, hi) = self.range(terms, 0);
            let o = m.new_var(Domain::range(lo, hi));
            let mut t = terms.clone();
            t.push((-1, o));
            m.post(Constraint::Lin(Linear::new(t, Rel::Eq, 0)));
            m.objective = Some((*sense, o));
        }
        m
    }
}

/// Linearizes `model` with the standard big-M constants.
pub fn linearize(model: &Model) -> Result<LinearModel, Unsupported> {
    linearize_with(model, BigMAdjust::default())
}

pub fn linearize_with(model: &Model, adj: BigMAdjust) -> Result<LinearModel, Unsupported> {
    let mut lm = LinearModel {
        n_orig: model.num_vars(),
        ..Default::default()
    };
    for d in &model.doms {
        if d.is_empty() {
            lm.vars.push(LpVar {
                lo: 1,
                hi: 0,
                binary: false,
            });
        } else {
            lm.vars.push(LpVar {
                lo: d.min(),
                hi: d.max(),
                binary: false,
            });
        }
    }
    for (v, d) in model.doms.iter().enumerate() {
        if d.is_empty() {
            continue;
        }
        for h in Domain::range(d.min(), d.max()).subtract(d).iter() {
            lm.post_ne(&[(1, v)], h, adj);
        }
    }
    for c in &model.cons {
        match c {
            Constraint::Lin(l) => lm.post_lin(l, adj),
            Constraint::AllDiff(xs) => {
                for i in 0..xs.len() {
                    for j in i + 1..xs.len() {
                        let (a, oa) = xs[i];
                        let (b, ob) = xs[j];
                        lm.post_ne(&[(1, a), (-1, b)], ob - oa, adj);
                    }
                }
            }
            Constraint::Reif { b, lin } => {
                let r = lm.reify(lin, adj);
                lm.row(vec![(1, *b), (-1, r)], 0);
                lm.row(vec![(-1, *b), (1, r)], 0);
            }
            Constraint::Clause(ls) => {
                let mut terms = Vec::new();
                let mut rhs = -1;
                for &(v, pos) in ls {
                    if pos {
                        terms.push((-1, v));
                    } else {
                        terms.push((1, v));
                        rhs += 1;
                    }
                }
                lm.row(terms, rhs);
            }
            Constraint::Func { f: Func::Mul, x, y, z } => {
                let k = match (model.doms[*x].fixed(), model.doms[*y].fixed()) {
                    (Some(k), _) => (k, *y),
                    (_, Some(k)) => (k, *x),
                    _ => return Err(Unsupported("variable * variable".into())),
                };
                lm.post_lin(&Linear::new(vec![(k.0, k.1), (-1, *z)], Rel::Eq, 0), adj);
            }
            other => return Err(Unsupported(other.kind())),
        }
    }
    if let Some((sense, o)) = model.objective {
        lm.objective = Some((sense, vec![(1, o)]));
    }
    Ok(lm)
}
