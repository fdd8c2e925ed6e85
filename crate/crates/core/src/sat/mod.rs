//! SAT backend: log-encodes a model to CNF and solves it with the bundled
//! DPLL solver.

pub mod cnf;
pub mod dpll;
pub mod encode;

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use crate::cp::{Model, Sense, VarIdx};
pub use cnf::{parse_dimacs, Cnf, Lit};
pub use dpll::{Solver, SolverStats};
pub use encode::{bit_width, BitVec, Encoder};

/// A constraint the backend cannot compile.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Unsupported(pub String);

#[derive(Clone, Copy, Debug, Default)]
pub struct SatOptions {
    /// Conflict-driven clause learning instead of plain backtracking.
    pub learning: bool,
    pub seed: u64,
}

/// An encoded model plus a solver, producing solutions one at a time.
pub struct SatSession {
    enc: Encoder,
    solver: Solver,
    flushed: usize,
    labeled: Vec<VarIdx>,
    objective: Option<(Sense, VarIdx)>,
    done: bool,
}

impl SatSession {
    pub fn new(model: &Model, labeled: &[VarIdx], opts: SatOptions) -> Result<Self, Unsupported> {
        let enc = Encoder::new(model)?;
        debug_assert!(enc.cnf.is_well_formed());
        let mut solver = Solver::new(enc.cnf.num_vars(), opts.learning, opts.seed);
        let primary: Vec<Lit> = enc.vars.iter().flat_map(|b| b.bits.iter().chain(b.sign.iter()).copied()).collect();
        solver.prioritize(&primary);
        let mut s = SatSession {
            enc,
            solver,
            flushed: 0,
            labeled: labeled.to_vec(),
            objective: model.objective,
            done: false,
        };
        s.flush();
        Ok(s)
    }

    pub fn cnf(&self) -> &Cnf {
        &self.enc.cnf
    }

    pub fn bitvecs(&self) -> &[BitVec] {
        &self.enc.vars
    }

    pub fn stats(&self) -> SolverStats {
        self.solver.stats
    }

    fn flush(&mut self) {
        self.solver.grow(self.enc.cnf.num_vars());
        for c in &self.enc.cnf.clauses[self.flushed..] {
            self.solver.add_clause(c);
        }
        self.flushed = self.enc.cnf.clauses.len();
    }

    /// Writes the CNF in DIMACS format and a `<path>.map` sidecar listing
    /// the literals of each model variable.
    pub fn write_dimacs(&self, path: &Path) -> io::Result<()> {
        assert!(self.enc.cnf.is_well_formed(), "CNF references unallocated variables");
        let mut f = io::BufWriter::new(std::fs::File::create(path)?);
        self.enc.cnf.write_dimacs(&mut f)?;
        f.flush()?;
        let mut map_path: PathBuf = path.to_path_buf().into_os_string().into();
        map_path.as_mut_os_string().push(".map");
        let mut m = io::BufWriter::new(std::fs::File::create(map_path)?);
        self.write_var_map(&mut m)?;
        m.flush()
    }

    /// One line per model variable: `x<i> <lo>..<hi> bits <lits> [sign <lit>]`.
    pub fn write_var_map(&self, w: &mut impl Write) -> io::Result<()> {
        for (i, bv) in self.enc.vars.iter().enumerate() {
            if bv.dom.is_empty() {
                writeln!(w, "x{i} empty")?;
                continue;
            }
            write!(w, "x{i} {}..{} bits", bv.dom.min(), bv.dom.max())?;
            for b in &bv.bits {
                write!(w, " {b}")?;
            }
            if let Some(s) = bv.sign {
                write!(w, " sign {s}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Next solution, valued for every model variable. Distinct calls differ
    /// on the labeled variables. With an objective only the optimum is
    /// returned.
    pub fn next_solution(&mut self) -> Option<Vec<i64>> {
        if self.done {
            return None;
        }
        match self.objective {
            None => {
                let Some(m) = self.solver.solve() else {
                    self.done = true;
                    return None;
                };
                let vals = self.enc.decode(&m);
                let mut block = Vec::new();
                for &v in &self.labeled {
                    let bv = &self.enc.vars[v];
                    for &b in bv.bits.iter().chain(bv.sign.iter()) {
                        block.push(if m[b as usize - 1] { -b } else { b });
                    }
                }
                if block.is_empty() {
                    self.done = true;
                } else {
                    self.solver.add_clause(&block);
                }
                Some(vals)
            }
            Some((sense, o)) => {
                self.done = true;
                let mut best = None;
                while let Some(m) = self.solver.solve() {
                    let vals = self.enc.decode(&m);
                    let bound = vals[o];
                    best = Some(vals);
                    let l = self.enc.strict_bound(o, bound, sense == Sense::Max);
                    self.enc.cnf.assert_lit(l);
                    self.flush();
                }
                best
            }
        }
    }
}

/// Solution set of `model` projected onto `vars` via the SAT backend.
pub fn all_solutions(model: &Model, vars: &[VarIdx], opts: SatOptions) -> Result<Vec<Vec<i64>>, Unsupported> {
    let mut s = SatSession::new(model, vars, opts)?;
    let mut out = Vec::new();
    while let Some(v) = s.next_solution() {
        out.push(vars.iter().map(|&i| v[i]).collect());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cp::{Constraint, Domain, Linear, Rel};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn queens(n: i64) -> (Model, Vec<VarIdx>) {
        let mut m = Model::new();
        let q: Vec<VarIdx> = (0..n).map(|_| m.new_var(Domain::range(1, n))).collect();
        m.post(Constraint::AllDiff(q.iter().map(|&v| (v, 0)).collect()));
        m.post(Constraint::AllDiff(q.iter().enumerate().map(|(i, &v)| (v, -(i as i64))).collect()));
        m.post(Constraint::AllDiff(q.iter().enumerate().map(|(i, &v)| (v, i as i64)).collect()));
        (m, q)
    }

    fn perm_queens(n: usize) -> usize {
        fn rec(n: usize, row: usize, cols: &mut Vec<usize>) -> usize {
            if row == n {
                return 1;
            }
            let mut c = 0;
            for x in 0..n {
                if cols.iter().enumerate().all(|(r, &y)| y != x && r.abs_diff(row) != y.abs_diff(x)) {
                    cols.push(x);
                    c += rec(n, row + 1, cols);
                    cols.pop();
                }
            }
            c
        }
        rec(n, 0, &mut Vec::new())
    }

    #[test]
    fn queens_six_has_four_models() {
        for learning in [false, true] {
            let (m, q) = queens(6);
            let sols = all_solutions(&m, &q, SatOptions { learning, seed: 3 }).unwrap();
            assert_eq!(sols.len(), perm_queens(6));
            assert_eq!(sols.len(), 4);
            assert!(sols.iter().all(|s| {
                let full: Vec<i64> = s.clone();
                m.check(&full)
            }));
        }
    }

    #[test]
    fn reified_eq_model_count() {
        let mut m = Model::new();
        let x = m.new_var(Domain::range(0, 3));
        let y = m.new_var(Domain::range(0, 3));
        let b = m.new_var(Domain::range(0, 1));
        m.post(Constraint::Reif {
            b,
            lin: Linear::new(vec![(1, x), (-1, y)], Rel::Eq, 0),
        });
        let sols = all_solutions(&m, &[x, y, b], SatOptions::default()).unwrap();
        assert_eq!(sols.len(), 16);
        for s in sols {
            assert_eq!(s[2] == 1, s[0] == s[1]);
        }
    }

    #[test]
    fn random_linear_models_match_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for round in 0..120 {
            let mut m = Model::new();
            let n = rng.gen_range(1..=3);
            let vars: Vec<VarIdx> = (0..n)
                .map(|_| {
                    let lo = rng.gen_range(-8..=8);
                    let hi = rng.gen_range(lo..=8);
                    m.new_var(Domain::range(lo, hi))
                })
                .collect();
            for _ in 0..rng.gen_range(0..=3) {
                let mut terms: Vec<(i64, VarIdx)> = Vec::new();
                for &v in &vars {
                    if rng.gen_bool(0.7) {
                        terms.push((rng.gen_range(-3..=3), v));
                    }
                }
                let rel = [Rel::Eq, Rel::Ne, Rel::Le][rng.gen_range(0..3)];
                m.post(Constraint::Lin(Linear::new(terms, rel, rng.gen_range(-6..=6))));
            }
            let oracle = m.enumerate(&vars);
            let got: BTreeSet<Vec<i64>> = all_solutions(&m, &vars, SatOptions { learning: round % 2 == 0, seed: round })
                .unwrap()
                .into_iter()
                .collect();
            assert_eq!(got, oracle, "round {round}");
        }
    }

    #[test]
    fn objective_reaches_optimum() {
        let mut m = Model::new();
        let x = m.new_var(Domain::range(-5, 9));
        let y = m.new_var(Domain::range(0, 4));
        m.post(Constraint::Lin(Linear::new(vec![(1, x), (1, y)], Rel::Eq, 3)));
        let s = m.new_var(Domain::range(-40, 40));
        m.post(Constraint::Lin(Linear::new(vec![(2, x), (-1, y), (-1, s)], Rel::Eq, 0)));
        m.objective = Some((Sense::Min, s));
        let mut sess = SatSession::new(&m, &[x, y], SatOptions::default()).unwrap();
        let best = sess.next_solution().unwrap();
        let oracle = m.enumerate(&[s]).into_iter().map(|v| v[0]).min().unwrap();
        assert_eq!(best[s], oracle);
        assert!(sess.next_solution().is_none());
    }

    #[test]
    fn var_times_var_is_rejected() {
        let mut m = Model::new();
        let x = m.new_var(Domain::range(0, 3));
        let y = m.new_var(Domain::range(0, 3));
        let z = m.new_var(Domain::range(0, 9));
        m.post(Constraint::Func {
            f: crate::cp::Func::Mul,
            x,
            y,
            z,
        });
        assert!(SatSession::new(&m, &[x], SatOptions::default()).is_err());
    }

    #[test]
    fn var_map_lists_each_variable() {
        let (m, q) = queens(4);
        let s = SatSession::new(&m, &q, SatOptions::default()).unwrap();
        let mut out = Vec::new();
        s.write_var_map(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("x0 1..4 bits"));
    }
}
