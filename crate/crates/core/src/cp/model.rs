use std::collections::HashMap;

use super::Domain;

pub type VarIdx = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rel {
    Eq,
    Ne,
    Le,
}

/// `Σ coef·var  rel  rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Linear {
    pub terms: Vec<(i64, VarIdx)>,
    pub rel: Rel,
    pub rhs: i64,
}

impl Linear {
    pub fn new(terms: Vec<(i64, VarIdx)>, rel: Rel, rhs: i64) -> Self {
        Linear { terms, rel, rhs }
    }

    pub fn negate(&self) -> Linear {
        match self.rel {
            Rel::Eq => Linear::new(self.terms.clone(), Rel::Ne, self.rhs),
            Rel::Ne => Linear::new(self.terms.clone(), Rel::Eq, self.rhs),
            Rel::Le => Linear::new(
                self.terms.iter().map(|&(a, v)| (-a, v)).collect(),
                Rel::Le,
                -self.rhs - 1,
            ),
        }
    }

    pub fn holds(&self, assign: &[i64]) -> bool {
        let s: i128 = self
            .terms
            .iter()
            .map(|&(a, v)| a as i128 * assign[v] as i128)
            .sum();
        let r = self.rhs as i128;
        match self.rel {
            Rel::Eq => s == r,
            Rel::Ne => s != r,
            Rel::Le => s <= r,
        }
    }
}

/// Functional relation `z = f(x, y)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Mul,
    /// Truncating division.
    Div,
    /// Flooring division.
    FloorDiv,
    Mod,
    Rem,
    Abs,
    Min,
    Max,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Mul => "*",
            Func::Div => "//",
            Func::FloorDiv => "div",
            Func::Mod => "mod",
            Func::Rem => "rem",
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    /// `None` where the function is undefined (division by zero).
    pub fn apply(self, x: i64, y: i64) -> Option<i64> {
        use crate::engine::arith_apply as ap;
        use crate::engine::ArOp;
        let op = match self {
            Func::Mul => ArOp::Mul,
            Func::Div => ArOp::IntDiv,
            Func::FloorDiv => ArOp::FloorDiv,
            Func::Mod => ArOp::Mod,
            Func::Rem => ArOp::Rem,
            Func::Abs => return x.checked_abs(),
            Func::Min => ArOp::Min2,
            Func::Max => ArOp::Max2,
        };
        ap(op, &[x, y]).ok()
    }

    pub fn unary(self) -> bool {
        self == Func::Abs
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Constraint {
    Lin(Linear),
    /// Pairwise distinct `var + offset` values.
    AllDiff(Vec<(VarIdx, i64)>),
    /// `z = f(x, y)`; `y` is ignored for unary functions.
    Func {
        f: Func,
        x: VarIdx,
        y: VarIdx,
        z: VarIdx,
    },
    /// `b ⇔ lin`, `b` a 0/1 variable.
    Reif { b: VarIdx, lin: Linear },
    /// Disjunction of literals over 0/1 variables; `(v, true)` means `v = 1`.
    Clause(Vec<(VarIdx, bool)>),
    Table {
        vars: Vec<VarIdx>,
        tuples: Vec<Vec<i64>>,
        negated: bool,
    },
    /// `val = list[idx]`, 1-based.
    Element {
        idx: VarIdx,
        list: Vec<VarIdx>,
        val: VarIdx,
    },
}

impl Constraint {
    pub fn vars(&self) -> Vec<VarIdx> {
        match self {
            Constraint::Lin(l) => l.terms.iter().map(|t| t.1).collect(),
            Constraint::AllDiff(xs) => xs.iter().map(|t| t.0).collect(),
            Constraint::Func { f, x, y, z } => {
                if f.unary() {
                    vec![*x, *z]
                } else {
                    vec![*x, *y, *z]
                }
            }
            Constraint::Reif { b, lin } => {
                let mut v: Vec<VarIdx> = lin.terms.iter().map(|t| t.1).collect();
                v.push(*b);
                v
            }
            Constraint::Clause(ls) => ls.iter().map(|l| l.0).collect(),
            Constraint::Table { vars, .. } => vars.clone(),
            Constraint::Element { idx, list, val } => {
                let mut v = vec![*idx];
                v.extend(list);
                v.push(*val);
                v
            }
        }
    }

    pub fn holds(&self, a: &[i64]) -> bool {
        match self {
            Constraint::Lin(l) => l.holds(a),
            Constraint::AllDiff(xs) => {
                for i in 0..xs.len() {
                    for j in i + 1..xs.len() {
                        if a[xs[i].0] + xs[i].1 == a[xs[j].0] + xs[j].1 {
                            return false;
                        }
                    }
                }
                true
            }
            Constraint::Func { f, x, y, z } => f.apply(a[*x], a[*y]) == Some(a[*z]),
            Constraint::Reif { b, lin } => (a[*b] == 1) == lin.holds(a) && (a[*b] == 0 || a[*b] == 1),
            Constraint::Clause(ls) => ls.iter().any(|&(v, pos)| (a[v] == 1) == pos),
            Constraint::Table {
                vars,
                tuples,
                negated,
            } => {
                let found = tuples
                    .iter()
                    .any(|t| t.iter().zip(vars).all(|(&x, &v)| a[v] == x));
                found != *negated
            }
            Constraint::Element { idx, list, val } => {
                let i = a[*idx];
                i >= 1 && (i as usize) <= list.len() && a[list[i as usize - 1]] == a[*val]
            }
        }
    }

    /// Short name for error messages.
    pub fn kind(&self) -> String {
        match self {
            Constraint::Lin(l) => match l.rel {
                Rel::Eq => "#=".into(),
                Rel::Ne => "#!=".into(),
                Rel::Le => "#=<".into(),
            },
            Constraint::AllDiff(_) => "all_different".into(),
            Constraint::Func { f, .. } => f.name().into(),
            Constraint::Reif { .. } => "#<=>".into(),
            Constraint::Clause(_) => "#\\/".into(),
            Constraint::Table { negated: false, .. } => "table_in".into(),
            Constraint::Table { negated: true, .. } => "table_notin".into(),
            Constraint::Element { .. } => "element".into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Min,
    Max,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Labeling {
    #[default]
    InputOrder,
    FirstFail,
}

/// A finite-domain constraint model shared by the solver backends.
#[derive(Clone, Debug, Default)]
pub struct Model {
    pub doms: Vec<Domain>,
    pub cons: Vec<Constraint>,
    pub objective: Option<(Sense, VarIdx)>,
    consts: HashMap<i64, VarIdx>,
}

impl Model {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn new_var(&mut self, dom: Domain) -> VarIdx {
        self.doms.push(dom);
        self.doms.len() - 1
    }

    /// A variable fixed to `v`, shared per value.
    pub fn constant(&mut self, v: i64) -> VarIdx {
        if let Some(&x) = self.consts.get(&v) {
            return x;
        }
        let x = self.new_var(Domain::singleton(v));
        self.consts.insert(v, x);
        x
    }

    pub fn post(&mut self, c: Constraint) {
        self.cons.push(c);
    }

    pub fn num_vars(&self) -> usize {
        self.doms.len()
    }

    /// Whether a full assignment satisfies all domains and constraints.
    pub fn check(&self, a: &[i64]) -> bool {
        a.len() == self.doms.len()
            && self.doms.iter().zip(a).all(|(d, &v)| d.contains(v))
            && self.cons.iter().all(|c| c.holds(a))
    }

    /// All solutions projected onto `vars`, by brute-force enumeration.
    /// Intended for small models only.
    pub fn enumerate(&self, vars: &[VarIdx]) -> std::collections::BTreeSet<Vec<i64>> {
        let mut out = std::collections::BTreeSet::new();
        let n = self.doms.len();
        if self.doms.iter().any(|d| d.is_empty()) {
            return out;
        }
        let values: Vec<Vec<i64>> = self.doms.iter().map(|d| d.iter().collect()).collect();
        let mut idx = vec![0usize; n];
        let mut a: Vec<i64> = values.iter().map(|v| v[0]).collect();
        loop {
            if self.cons.iter().all(|c| c.holds(&a)) {
                out.insert(vars.iter().map(|&v| a[v]).collect());
            }
            let mut k = 0;
            loop {
                if k == n {
                    return out;
                }
                idx[k] += 1;
                if idx[k] < values[k].len() {
                    a[k] = values[k][idx[k]];
                    break;
                }
                idx[k] = 0;
                a[k] = values[k][0];
                k += 1;
            }
        }
    }
}
