//! Log encoding of finite-domain models into CNF.
//!
//! Each integer variable gets `bit_len(max |v|)` magnitude bits and, when
//! its domain has negative values, a sign bit. Arithmetic is reduced to two
//! primitives, `x > y` and `x + y = z`, built as comparator and ripple-adder
//! circuits over two's-complement views of the operands.

use super::cnf::{Cnf, Lit};
use super::Unsupported;
use crate::cp::{Constraint, Domain, Func, Linear, Model, Rel, VarIdx};

/// Number of magnitude bits for largest absolute value `n`.
pub fn bit_width(n: u64) -> usize {
    (64 - n.leading_zeros()) as usize
}

/// Sign-magnitude bits of one model variable.
#[derive(Clone, Debug)]
pub struct BitVec {
    /// Magnitude, least significant bit first.
    pub bits: Vec<Lit>,
    pub sign: Option<Lit>,
    pub dom: Domain,
}

impl BitVec {
    pub fn decode(&self, model: &[bool]) -> i64 {
        let val = |l: Lit| model[l.unsigned_abs() as usize - 1] == (l > 0);
        let mag: i64 = self
            .bits
            .iter()
            .enumerate()
            .map(|(i, &b)| if val(b) { 1i64 << i } else { 0 })
            .sum();
        match self.sign {
            Some(s) if val(s) => -mag,
            _ => mag,
        }
    }
}

/// Two's-complement bit vector with known value bounds.
#[derive(Clone, Debug)]
struct Tc {
    bits: Vec<Lit>,
    lo: i64,
    hi: i64,
}

fn tc_width(lo: i64, hi: i64) -> usize {
    let need = |v: i64| {
        if v >= 0 {
            bit_width(v as u64) + 1
        } else {
            bit_width(!v as u64) + 1
        }
    };
    need(lo).max(need(hi))
}

pub struct Encoder {
    pub cnf: Cnf,
    pub vars: Vec<BitVec>,
    tc_cache: Vec<Option<Tc>>,
}

impl Encoder {
    pub fn new(model: &Model) -> Result<Self, Unsupported> {
        let mut e = Encoder {
            cnf: Cnf::new(),
            vars: Vec::with_capacity(model.num_vars()),
            tc_cache: vec![None; model.num_vars()],
        };
        for d in &model.doms {
            let bv = e.encode_domain(d);
            e.vars.push(bv);
        }
        for c in &model.cons {
            e.constraint(c)?;
        }
        Ok(e)
    }

    /// Allocates bits for `d` and excludes every code outside it.
    pub fn encode_domain(&mut self, d: &Domain) -> BitVec {
        if d.is_empty() {
            self.cnf.add(&[]);
            return BitVec {
                bits: Vec::new(),
                sign: None,
                dom: d.clone(),
            };
        }
        let n = d.min().unsigned_abs().max(d.max().unsigned_abs());
        let k = bit_width(n);
        let bits: Vec<Lit> = (0..k).map(|_| self.cnf.new_var()).collect();
        let pos = d.intersect(&Domain::range(0, i64::MAX));
        let neg: Domain = Domain::from_values(d.iter().filter(|&v| v < 0).map(|v| -v));
        let sign = if d.min() < 0 { Some(self.cnf.new_var()) } else { None };
        match sign {
            None => self.restrict_magnitude(&bits, &pos, None),
            Some(s) => {
                if pos.is_empty() {
                    self.cnf.assert_lit(s);
                } else {
                    self.restrict_magnitude(&bits, &pos, Some(s));
                }
                self.restrict_magnitude(&bits, &neg, Some(-s));
            }
        }
        BitVec {
            bits,
            sign,
            dom: d.clone(),
        }
    }

    /// Clauses forcing the magnitude into `set`, guarded by `guard` being
    /// false (the clauses read `guard ∨ ...`).
    fn restrict_magnitude(&mut self, bits: &[Lit], set: &Domain, guard: Option<Lit>) {
        let k = bits.len();
        let g: Vec<Lit> = guard.into_iter().collect();
        let differs = |v: u64, j: usize| if v >> j & 1 == 1 { -bits[j] } else { bits[j] };
        let lo = set.min() as u64;
        let hi = set.max() as u64;
        // mag > hi
        for i in 0..k {
            if hi >> i & 1 == 0 {
                let mut c = g.clone();
                c.push(-bits[i]);
                c.extend((i + 1..k).map(|j| differs(hi, j)));
                self.cnf.add(&c);
            }
        }
        // mag < lo
        for i in 0..k {
            if lo >> i & 1 == 1 {
                let mut c = g.clone();
                c.push(bits[i]);
                c.extend((i + 1..k).map(|j| differs(lo, j)));
                self.cnf.add(&c);
            }
        }
        let hull = Domain::range(set.min(), set.max());
        for h in hull.subtract(set).iter() {
            let mut c = g.clone();
            c.extend((0..k).map(|j| differs(h as u64, j)));
            self.cnf.add(&c);
        }
    }

    fn tc_of_var(&mut self, v: VarIdx) -> Tc {
        if let Some(t) = &self.tc_cache[v] {
            return t.clone();
        }
        let bv = self.vars[v].clone();
        let f = self.cnf.fls();
        let mut bits = bv.bits.clone();
        bits.push(f);
        let bits = match bv.sign {
            None => bits,
            Some(s) => {
                let mut out = Vec::with_capacity(bits.len());
                let mut carry = s;
                for (i, &b) in bits.iter().enumerate() {
                    let y = if i + 1 == bits.len() { s } else { self.cnf.xor2(b, s) };
                    out.push(self.cnf.xor2(y, carry));
                    carry = self.cnf.and2(y, carry);
                }
                out
            }
        };
        let t = Tc {
            bits,
            lo: bv.dom.min(),
            hi: bv.dom.max(),
        };
        self.tc_cache[v] = Some(t.clone());
        t
    }

    fn tc_const(&self, c: i64) -> Tc {
        let w = tc_width(c, c);
        Tc {
            bits: (0..w).map(|i| self.cnf.constant(c >> i & 1 == 1)).collect(),
            lo: c,
            hi: c,
        }
    }

    fn extend(x: &Tc, w: usize) -> Vec<Lit> {
        let msb = *x.bits.last().expect("nonempty vector");
        let mut b = x.bits.clone();
        b.resize(w.max(b.len()), msb);
        b
    }

    fn add(&mut self, x: &Tc, y: &Tc) -> Tc {
        let lo = x.lo + y.lo;
        let hi = x.hi + y.hi;
        let w = tc_width(lo, hi).max(x.bits.len()).max(y.bits.len());
        let a = Self::extend(x, w);
        let b = Self::extend(y, w);
        let mut carry = self.cnf.fls();
        let mut bits = Vec::with_capacity(w);
        for i in 0..w {
            let (s, c) = self.cnf.full_add(a[i], b[i], carry);
            bits.push(s);
            carry = c;
        }
        Tc { bits, lo, hi }
    }

    fn shl(&self, x: &Tc, j: usize) -> Tc {
        let mut bits = vec![self.cnf.fls(); j];
        bits.extend(&x.bits);
        Tc {
            bits,
            lo: x.lo << j,
            hi: x.hi << j,
        }
    }

    /// `k * x` for `k > 0`, by shifts and additions.
    fn scale(&mut self, x: &Tc, k: u64) -> Tc {
        let mut acc: Option<Tc> = None;
        for j in 0..64 {
            if k >> j & 1 == 1 {
                let part = self.shl(x, j);
                acc = Some(match acc {
                    None => part,
                    Some(a) => self.add(&a, &part),
                });
            }
        }
        acc.expect("k > 0")
    }

    fn sum(&mut self, mut parts: Vec<Tc>) -> Tc {
        if parts.is_empty() {
            return self.tc_const(0);
        }
        while parts.len() > 1 {
            let mut next = Vec::with_capacity(parts.len() / 2 + 1);
            let mut it = parts.into_iter();
            while let Some(a) = it.next() {
                match it.next() {
                    Some(b) => next.push(self.add(&a, &b)),
                    None => next.push(a),
                }
            }
            parts = next;
        }
        parts.pop().expect("one part left")
    }

    /// Literal for `x > y`.
    fn gt(&mut self, x: &Tc, y: &Tc) -> Lit {
        if x.hi <= y.lo {
            return self.cnf.fls();
        }
        if x.lo > y.hi {
            return self.cnf.tru();
        }
        let w = x.bits.len().max(y.bits.len());
        let mut a = Self::extend(x, w);
        let mut b = Self::extend(y, w);
        a[w - 1] = -a[w - 1];
        b[w - 1] = -b[w - 1];
        self.cnf.ugt(&a, &b)
    }

    /// The two sides of a linear relation with nonnegative coefficients.
    fn sides(&mut self, l: &Linear) -> (Tc, Tc) {
        let mut left = Vec::new();
        let mut right = Vec::new();
        for &(a, v) in &l.terms {
            if a == 0 {
                continue;
            }
            let x = self.tc_of_var(v);
            let t = self.scale(&x, a.unsigned_abs());
            if a > 0 {
                left.push(t);
            } else {
                right.push(t);
            }
        }
        if l.rhs > 0 {
            right.push(self.tc_const(l.rhs));
        } else if l.rhs < 0 {
            left.push(self.tc_const(-l.rhs));
        }
        (self.sum(left), self.sum(right))
    }

    /// Literal equivalent to a linear relation.
    pub fn lin_lit(&mut self, l: &Linear) -> Lit {
        let (x, y) = self.sides(l);
        match l.rel {
            Rel::Le => -self.gt(&x, &y),
            Rel::Eq => {
                let a = self.gt(&x, &y);
                let b = self.gt(&y, &x);
                self.cnf.and2(-a, -b)
            }
            Rel::Ne => {
                let a = self.gt(&x, &y);
                let b = self.gt(&y, &x);
                self.cnf.or2(a, b)
            }
        }
    }

    fn post_lin(&mut self, l: &Linear) {
        let (x, y) = self.sides(l);
        match l.rel {
            Rel::Le => {
                let g = self.gt(&x, &y);
                self.cnf.assert_lit(-g);
            }
            Rel::Eq => {
                let a = self.gt(&x, &y);
                let b = self.gt(&y, &x);
                self.cnf.assert_lit(-a);
                self.cnf.assert_lit(-b);
            }
            Rel::Ne => {
                let a = self.gt(&x, &y);
                let b = self.gt(&y, &x);
                self.cnf.add(&[a, b]);
            }
        }
    }

    /// The literal of a 0/1 variable.
    fn bool_lit(&mut self, v: VarIdx) -> Result<Lit, Unsupported> {
        let bv = &self.vars[v];
        if bv.sign.is_some() || bv.bits.len() > 1 {
            return Err(Unsupported(format!("non-Boolean variable in a Boolean position (x{v})")));
        }
        Ok(bv.bits.first().copied().unwrap_or(self.cnf.fls()))
    }

    /// Literal for `x = c`.
    fn eq_const(&mut self, v: VarIdx, c: i64) -> Lit {
        let bv = self.vars[v].clone();
        let mag = c.unsigned_abs();
        if bit_width(mag) > bv.bits.len() || (c < 0 && bv.sign.is_none()) {
            return self.cnf.fls();
        }
        let mut lits: Vec<Lit> = bv
            .bits
            .iter()
            .enumerate()
            .map(|(j, &b)| if mag >> j & 1 == 1 { b } else { -b })
            .collect();
        if let Some(s) = bv.sign {
            lits.push(if c < 0 { s } else { -s });
        }
        self.cnf.and_all(&lits)
    }

    pub fn constraint(&mut self, c: &Constraint) -> Result<(), Unsupported> {
        match c {
            Constraint::Lin(l) => self.post_lin(l),
            Constraint::AllDiff(xs) => {
                for i in 0..xs.len() {
                    for j in i + 1..xs.len() {
                        let (a, oa) = xs[i];
                        let (b, ob) = xs[j];
                        self.post_lin(&Linear::new(vec![(1, a), (-1, b)], Rel::Ne, ob - oa));
                    }
                }
            }
            Constraint::Reif { b, lin } => {
                let bl = self.bool_lit(*b)?;
                let l = self.lin_lit(lin);
                self.cnf.add(&[-bl, l]);
                self.cnf.add(&[bl, -l]);
            }
            Constraint::Clause(ls) => {
                let mut c = Vec::with_capacity(ls.len());
                for &(v, pos) in ls {
                    let l = self.bool_lit(v)?;
                    c.push(if pos { l } else { -l });
                }
                self.cnf.add(&c);
            }
            Constraint::Table { vars, tuples, negated } => {
                let mut rows = Vec::with_capacity(tuples.len());
                for t in tuples {
                    let eqs: Vec<Lit> = vars.iter().zip(t).map(|(&v, &x)| self.eq_const(v, x)).collect();
                    rows.push(self.cnf.and_all(&eqs));
                }
                if *negated {
                    for r in rows {
                        self.cnf.assert_lit(-r);
                    }
                } else {
                    self.cnf.add(&rows);
                }
            }
            Constraint::Func { f: Func::Mul, x, y, z } => {
                let k = match (self.vars[*x].dom.fixed(), self.vars[*y].dom.fixed()) {
                    (Some(k), _) => Some((k, *y)),
                    (_, Some(k)) => Some((k, *x)),
                    _ => None,
                };
                let Some((k, v)) = k else {
                    return Err(Unsupported("variable * variable".into()));
                };
                self.post_lin(&Linear::new(vec![(k, v), (-1, *z)], Rel::Eq, 0));
            }
            Constraint::Func { f, .. } => return Err(Unsupported(f.name().into())),
            Constraint::Element { .. } => return Err(Unsupported("element".into())),
        }
        Ok(())
    }

    /// Literal for `v < bound` (or `v > bound` when `above`).
    pub fn strict_bound(&mut self, v: VarIdx, bound: i64, above: bool) -> Lit {
        let x = self.tc_of_var(v);
        let c = self.tc_const(bound);
        if above {
            self.gt(&x, &c)
        } else {
            self.gt(&c, &x)
        }
    }

    pub fn decode(&self, model: &[bool]) -> Vec<i64> {
        self.vars
            .iter()
            .enumerate()
            .map(|(i, bv)| {
                let v = bv.decode(model);
                assert!(bv.dom.contains(v), "decoded x{i} = {v} outside its domain");
                v
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sat::dpll::Solver;

    fn count_values(d: &Domain) -> (usize, Vec<i64>) {
        let mut e = Encoder {
            cnf: Cnf::new(),
            vars: Vec::new(),
            tc_cache: vec![None],
        };
        let bv = e.encode_domain(d);
        e.vars.push(bv.clone());
        let mut s = Solver::new(e.cnf.num_vars(), false, 0);
        for c in &e.cnf.clauses {
            s.add_clause(c);
        }
        let mut found = Vec::new();
        while let Some(m) = s.solve() {
            found.push(bv.decode(&m));
            let mut block: Vec<Lit> = bv.bits.iter().map(|&b| if m[b as usize - 1] { -b } else { b }).collect();
            if let Some(sg) = bv.sign {
                block.push(if m[sg as usize - 1] { -sg } else { sg });
            }
            s.add_clause(&block);
        }
        found.sort_unstable();
        (bv.bits.len(), found)
    }

    #[test]
    fn one_to_eight_uses_four_bits() {
        let (k, vals) = count_values(&Domain::range(1, 8));
        assert_eq!(k, 4);
        assert_eq!(vals, (1..=8).collect::<Vec<_>>());
    }

    #[test]
    fn zero_one_uses_one_bit_without_exclusions() {
        let mut e = Encoder {
            cnf: Cnf::new(),
            vars: Vec::new(),
            tc_cache: Vec::new(),
        };
        let before = e.cnf.clauses.len();
        let bv = e.encode_domain(&Domain::range(0, 1));
        assert_eq!(bv.bits.len(), 1);
        assert!(bv.sign.is_none());
        assert_eq!(e.cnf.clauses.len(), before);
    }

    #[test]
    fn signed_domain_round_trips() {
        let (k, vals) = count_values(&Domain::range(-2, 2));
        assert_eq!(k, 2);
        assert_eq!(vals, vec![-2, -1, 0, 1, 2]);
        let (_, vals) = count_values(&Domain::from_values([-7, -3, 0, 4, 6]));
        assert_eq!(vals, vec![-7, -3, 0, 4, 6]);
        let (_, vals) = count_values(&Domain::from_values([-5, -1]));
        assert_eq!(vals, vec![-5, -1]);
    }

    #[test]
    fn decode_examples() {
        let bv = BitVec {
            bits: vec![1, 2, 3],
            sign: None,
            dom: Domain::range(0, 7),
        };
        assert_eq!(bv.decode(&[true, false, true]), 5);
        let bv = BitVec {
            bits: vec![1, 2],
            sign: Some(3),
            dom: Domain::range(-3, 3),
        };
        assert_eq!(bv.decode(&[false, true, true]), -2);
    }

    #[test]
    fn widths() {
        assert_eq!(bit_width(0), 0);
        assert_eq!(bit_width(1), 1);
        assert_eq!(bit_width(8), 4);
        assert_eq!(tc_width(-1, 0), 1);
        assert_eq!(tc_width(-2, 1), 2);
        assert_eq!(tc_width(0, 2), 3);
    }
}
