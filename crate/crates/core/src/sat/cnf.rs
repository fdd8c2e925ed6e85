//! CNF formulas with Tseitin gate helpers and DIMACS output.

use std::io::{self, Write};

/// DIMACS-style literal: a nonzero integer, negative for negation.
pub type Lit = i32;

/// A CNF formula under construction. Literal `t` is constrained true so
/// gates can fold constants.
#[derive(Clone, Debug)]
pub struct Cnf {
    num_vars: u32,
    pub clauses: Vec<Vec<Lit>>,
    t: Lit,
}

impl Default for Cnf {
    fn default() -> Self {
        Self::new()
    }
}

impl Cnf {
    pub fn new() -> Self {
        let mut c = Cnf {
            num_vars: 0,
            clauses: Vec::new(),
            t: 0,
        };
        c.t = c.new_var();
        c.clauses.push(vec![c.t]);
        c
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn new_var(&mut self) -> Lit {
        self.num_vars += 1;
        self.num_vars as Lit
    }

    pub fn tru(&self) -> Lit {
        self.t
    }

    pub fn fls(&self) -> Lit {
        -self.t
    }

    pub fn constant(&self, b: bool) -> Lit {
        if b {
            self.t
        } else {
            -self.t
        }
    }

    /// Adds a clause, dropping false constants and skipping satisfied ones.
    pub fn add(&mut self, lits: &[Lit]) {
        if lits.iter().any(|&l| l == self.t) {
            return;
        }
        let mut c: Vec<Lit> = lits.iter().copied().filter(|&l| l != -self.t).collect();
        c.sort_unstable();
        c.dedup();
        if c.iter().any(|&l| c.binary_search(&-l).is_ok()) {
            return;
        }
        self.clauses.push(c);
    }

    pub fn assert_lit(&mut self, l: Lit) {
        self.add(&[l]);
    }

    pub fn and2(&mut self, a: Lit, b: Lit) -> Lit {
        let (t, f) = (self.t, -self.t);
        if a == f || b == f || a == -b {
            return f;
        }
        if a == t || a == b {
            return b;
        }
        if b == t {
            return a;
        }
        let o = self.new_var();
        self.clauses.push(vec![-o, a]);
        self.clauses.push(vec![-o, b]);
        self.clauses.push(vec![o, -a, -b]);
        o
    }

    pub fn or2(&mut self, a: Lit, b: Lit) -> Lit {
        -self.and2(-a, -b)
    }

    pub fn xor2(&mut self, a: Lit, b: Lit) -> Lit {
        let (t, f) = (self.t, -self.t);
        if a == f {
            return b;
        }
        if b == f {
            return a;
        }
        if a == t {
            return -b;
        }
        if b == t {
            return -a;
        }
        if a == b {
            return f;
        }
        if a == -b {
            return t;
        }
        let o = self.new_var();
        self.clauses.push(vec![-o, a, b]);
        self.clauses.push(vec![-o, -a, -b]);
        self.clauses.push(vec![o, -a, b]);
        self.clauses.push(vec![o, a, -b]);
        o
    }

    pub fn and_all(&mut self, lits: &[Lit]) -> Lit {
        lits.iter().fold(self.t, |acc, &l| self.and2(acc, l))
    }

    pub fn or_all(&mut self, lits: &[Lit]) -> Lit {
        lits.iter().fold(-self.t, |acc, &l| self.or2(acc, l))
    }

    /// Full adder: returns `(sum, carry)`.
    pub fn full_add(&mut self, a: Lit, b: Lit, c: Lit) -> (Lit, Lit) {
        let ab = self.xor2(a, b);
        let sum = self.xor2(ab, c);
        let g = self.and2(a, b);
        let p = self.and2(c, ab);
        (sum, self.or2(g, p))
    }

    /// Unsigned `a > b` over equal-width vectors, LSB first.
    pub fn ugt(&mut self, a: &[Lit], b: &[Lit]) -> Lit {
        debug_assert_eq!(a.len(), b.len());
        let mut g = self.fls();
        for (&x, &y) in a.iter().zip(b) {
            let here = self.and2(x, -y);
            let same = -self.xor2(x, y);
            let below = self.and2(same, g);
            g = self.or2(here, below);
        }
        g
    }

    /// Largest variable referenced by any clause.
    pub fn max_var(&self) -> u32 {
        self.clauses
            .iter()
            .flatten()
            .map(|l| l.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    /// Whether every literal refers to an allocated variable.
    pub fn is_well_formed(&self) -> bool {
        self.clauses
            .iter()
            .flatten()
            .all(|&l| l != 0 && l.unsigned_abs() <= self.num_vars)
    }

    pub fn write_dimacs(&self, w: &mut impl Write) -> io::Result<()> {
        writeln!(w, "p cnf {} {}", self.num_vars, self.clauses.len())?;
        for c in &self.clauses {
            for l in c {
                write!(w, "{l} ")?;
            }
            writeln!(w, "0")?;
        }
        Ok(())
    }
}

/// Parses DIMACS CNF text into `(num_vars, clauses)`.
pub fn parse_dimacs(text: &str) -> Result<(u32, Vec<Vec<Lit>>), String> {
    let mut nv = None;
    let mut clauses = Vec::new();
    let mut cur = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("p cnf") {
            let mut it = rest.split_whitespace();
            nv = Some(
                it.next()
                    .and_then(|s| s.parse().ok())
                    .ok_or("bad header")?,
            );
            continue;
        }
        for tok in line.split_whitespace() {
            let l: Lit = tok.parse().map_err(|_| format!("bad literal {tok}"))?;
            if l == 0 {
                clauses.push(std::mem::take(&mut cur));
            } else {
                cur.push(l);
            }
        }
    }
    if !cur.is_empty() {
        return Err("unterminated clause".into());
    }
    Ok((nv.ok_or("missing header")?, clauses))
}
