//! DPLL solver with two watched literals and optional clause learning.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::cnf::Lit;

/// Internal literal: `2 * var + negated`.
type L = u32;

const NONE: u32 = u32::MAX;

fn internal(l: Lit) -> L {
    (l.unsigned_abs() - 1) * 2 + u32::from(l < 0)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub decisions: u64,
    pub propagations: u64,
    pub conflicts: u64,
    pub learned: u64,
}

pub struct Solver {
    clauses: Vec<Vec<L>>,
    units: Vec<L>,
    unsat: bool,
    watches: Vec<Vec<u32>>,
    assign: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<u32>,
    trail: Vec<L>,
    lim: Vec<usize>,
    flipped: Vec<bool>,
    qhead: usize,
    learning: bool,
    activity: Vec<f64>,
    inc: f64,
    order: Vec<u32>,
    rank: Vec<u32>,
    pub stats: SolverStats,
}

impl Solver {
    /// A solver over variables `1..=num_vars`. The seed fixes the branching
    /// order.
    pub fn new(num_vars: u32, learning: bool, seed: u64) -> Self {
        let n = num_vars as usize;
        let mut order: Vec<u32> = (0..num_vars).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut rank = vec![0; n];
        for (i, &v) in order.iter().enumerate() {
            rank[v as usize] = i as u32;
        }
        Solver {
            clauses: Vec::new(),
            units: Vec::new(),
            unsat: false,
            watches: vec![Vec::new(); 2 * n],
            assign: vec![-1; n],
            level: vec![0; n],
            reason: vec![NONE; n],
            trail: Vec::new(),
            lim: Vec::new(),
            flipped: Vec::new(),
            qhead: 0,
            learning,
            activity: vec![0.0; n],
            inc: 1.0,
            order,
            rank,
            stats: SolverStats::default(),
        }
    }

    /// Adds variables up to `num_vars`, ordered after the existing ones.
    pub fn grow(&mut self, num_vars: u32) {
        let n = num_vars as usize;
        for v in self.num_vars()..n {
            self.watches.push(Vec::new());
            self.watches.push(Vec::new());
            self.assign.push(-1);
            self.level.push(0);
            self.reason.push(NONE);
            self.activity.push(0.0);
            self.rank.push(self.order.len() as u32);
            self.order.push(v as u32);
        }
    }

    /// Moves `vars` to the front of the branching order.
    pub fn prioritize(&mut self, vars: &[Lit]) {
        let mut first = vec![false; self.num_vars()];
        for &l in vars {
            first[l.unsigned_abs() as usize - 1] = true;
        }
        let (mut a, b): (Vec<u32>, Vec<u32>) = self.order.iter().partition(|&&v| first[v as usize]);
        a.extend(b);
        self.order = a;
        for (i, &v) in self.order.iter().enumerate() {
            self.rank[v as usize] = i as u32;
        }
    }

    pub fn num_vars(&self) -> usize {
        self.assign.len()
    }

    pub fn add_clause(&mut self, lits: &[Lit]) {
        let mut c: Vec<L> = lits.iter().map(|&l| internal(l)).collect();
        c.sort_unstable();
        c.dedup();
        if c.windows(2).any(|w| w[0] ^ 1 == w[1]) {
            return;
        }
        match c.len() {
            0 => self.unsat = true,
            1 => self.units.push(c[0]),
            _ => {
                self.attach(c);
            }
        }
    }

    fn attach(&mut self, c: Vec<L>) -> u32 {
        let ci = self.clauses.len() as u32;
        self.watches[c[0] as usize].push(ci);
        self.watches[c[1] as usize].push(ci);
        self.clauses.push(c);
        ci
    }

    fn val(&self, l: L) -> i8 {
        let a = self.assign[(l >> 1) as usize];
        if a < 0 {
            -1
        } else {
            a ^ (l & 1) as i8
        }
    }

    fn enqueue(&mut self, l: L, reason: u32) {
        let v = (l >> 1) as usize;
        self.assign[v] = 1 - (l & 1) as i8;
        self.level[v] = self.lim.len() as u32;
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn undo_to_level(&mut self, lvl: usize) {
        if self.lim.len() <= lvl {
            return;
        }
        let keep = self.lim[lvl];
        for &l in &self.trail[keep..] {
            let v = (l >> 1) as usize;
            self.assign[v] = -1;
            self.reason[v] = NONE;
        }
        self.trail.truncate(keep);
        self.lim.truncate(lvl);
        self.flipped.truncate(lvl);
        self.qhead = keep;
    }

    /// Returns the index of a conflicting clause, if any.
    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let fl = p ^ 1;
            let ws = std::mem::take(&mut self.watches[fl as usize]);
            let mut kept = Vec::with_capacity(ws.len());
            let mut conflict = None;
            let mut it = ws.into_iter();
            for ci in it.by_ref() {
                let c = &mut self.clauses[ci as usize];
                if c[0] == fl {
                    c.swap(0, 1);
                }
                let first = c[0];
                if self.assign[(first >> 1) as usize] >= 0
                    && (self.assign[(first >> 1) as usize] ^ (first & 1) as i8) == 1
                {
                    kept.push(ci);
                    continue;
                }
                let mut moved = false;
                for k in 2..c.len() {
                    let l = c[k];
                    let a = self.assign[(l >> 1) as usize];
                    if a < 0 || (a ^ (l & 1) as i8) == 1 {
                        c.swap(1, k);
                        self.watches[c[1] as usize].push(ci);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                kept.push(ci);
                if self.val(first) == 0 {
                    conflict = Some(ci);
                    break;
                }
                self.stats.propagations += 1;
                self.enqueue(first, ci);
            }
            kept.extend(it);
            self.watches[fl as usize] = kept;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    fn bump(&mut self, v: usize) {
        self.activity[v] += self.inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.inc *= 1e-100;
        }
    }

    /// First-UIP learned clause and the level to return to.
    fn analyze(&mut self, mut confl: u32) -> (Vec<L>, usize) {
        let n = self.num_vars();
        let mut seen = vec![false; n];
        let mut learnt: Vec<L> = vec![0];
        let mut counter = 0;
        let mut p: Option<L> = None;
        let mut idx = self.trail.len();
        let cur = self.lim.len() as u32;
        loop {
            let clause = self.clauses[confl as usize].clone();
            let start = usize::from(p.is_some());
            for &q in &clause[start..] {
                let v = (q >> 1) as usize;
                if !seen[v] && self.level[v] > 0 {
                    seen[v] = true;
                    self.bump(v);
                    if self.level[v] == cur {
                        counter += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if seen[(self.trail[idx] >> 1) as usize] {
                    break;
                }
            }
            let lit = self.trail[idx];
            let v = (lit >> 1) as usize;
            seen[v] = false;
            counter -= 1;
            p = Some(lit);
            if counter == 0 {
                break;
            }
            confl = self.reason[v];
        }
        learnt[0] = p.expect("conflict has a current-level literal") ^ 1;
        let mut bt = 0;
        if learnt.len() > 1 {
            let mut best = 1;
            for i in 1..learnt.len() {
                if self.level[(learnt[i] >> 1) as usize] > self.level[(learnt[best] >> 1) as usize] {
                    best = i;
                }
            }
            learnt.swap(1, best);
            bt = self.level[(learnt[1] >> 1) as usize] as usize;
        }
        self.inc *= 1.05;
        (learnt, bt)
    }

    fn pick(&self) -> Option<u32> {
        if self.learning {
            let mut best: Option<u32> = None;
            for v in 0..self.num_vars() {
                if self.assign[v] >= 0 {
                    continue;
                }
                best = match best {
                    None => Some(v as u32),
                    Some(b) => {
                        let (a1, a2) = (self.activity[v], self.activity[b as usize]);
                        if a1 > a2 || (a1 == a2 && self.rank[v] < self.rank[b as usize]) {
                            Some(v as u32)
                        } else {
                            Some(b)
                        }
                    }
                };
            }
            best
        } else {
            self.order.iter().copied().find(|&v| self.assign[v as usize] < 0)
        }
    }

    /// Resolves a conflict. Returns false when the formula is unsatisfiable.
    fn resolve_conflict(&mut self, confl: u32) -> bool {
        self.stats.conflicts += 1;
        if self.lim.is_empty() {
            return false;
        }
        if self.learning {
            let (learnt, bt) = self.analyze(confl);
            self.undo_to_level(bt);
            self.stats.learned += 1;
            if learnt.len() == 1 {
                self.units.push(learnt[0]);
                self.enqueue(learnt[0], NONE);
            } else {
                let l0 = learnt[0];
                let ci = self.attach(learnt);
                self.enqueue(l0, ci);
            }
            true
        } else {
            loop {
                let Some(&start) = self.lim.last() else {
                    return false;
                };
                let lvl = self.lim.len();
                let dec = self.trail[start];
                let was_flipped = self.flipped[lvl - 1];
                self.undo_to_level(lvl - 1);
                if !was_flipped {
                    self.lim.push(self.trail.len());
                    self.flipped.push(true);
                    self.enqueue(dec ^ 1, NONE);
                    return true;
                }
            }
        }
    }

    /// Searches for a model. Returns the value of every variable.
    pub fn solve(&mut self) -> Option<Vec<bool>> {
        if self.unsat {
            return None;
        }
        self.undo_to_level(0);
        for &v in &self.trail {
            let v = (v >> 1) as usize;
            self.assign[v] = -1;
        }
        self.trail.clear();
        self.qhead = 0;
        for i in 0..self.units.len() {
            let u = self.units[i];
            match self.val(u) {
                0 => {
                    self.unsat = true;
                    return None;
                }
                1 => {}
                _ => self.enqueue(u, NONE),
            }
        }
        loop {
            if let Some(confl) = self.propagate() {
                if !self.resolve_conflict(confl) {
                    self.unsat = self.lim.is_empty();
                    return None;
                }
                continue;
            }
            let Some(v) = self.pick() else {
                return Some(self.assign.iter().map(|&a| a == 1).collect());
            };
            self.stats.decisions += 1;
            self.lim.push(self.trail.len());
            self.flipped.push(false);
            self.enqueue(v * 2 + 1, NONE);
        }
    }
}

/// Convenience: solve a clause list once.
pub fn solve_clauses(num_vars: u32, clauses: &[Vec<Lit>], learning: bool, seed: u64) -> Option<Vec<bool>> {
    let mut s = Solver::new(num_vars, learning, seed);
    for c in clauses {
        s.add_clause(c);
    }
    s.solve()
}
