//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::path::PathBuf;

use rand::Rng;

pub fn programs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../programs")
}

pub fn read_program(name: &str) -> String {
    std::fs::read_to_string(programs_dir().join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Integers appearing in `s`, in order.
pub fn ints(s: &str) -> Vec<i64> {
    let mut out = Vec::new();
    let b = s.as_bytes();
    let mut i = 0;
    while i < b.len() {
        let neg = b[i] == b'-' && i + 1 < b.len() && b[i + 1].is_ascii_digit();
        if b[i].is_ascii_digit() || neg {
            let start = i;
            i += 1;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            out.push(s[start..i].parse().unwrap());
        } else {
            i += 1;
        }
    }
    out
}

/// Number of N-queens placements by permutation brute force.
pub fn queens_count(n: usize) -> usize {
    fn rec(n: usize, cols: &mut Vec<usize>) -> usize {
        if cols.len() == n {
            return 1;
        }
        let row = cols.len();
        let mut c = 0;
        for x in 0..n {
            if cols.iter().enumerate().all(|(r, &y)| y != x && row - r != y.abs_diff(x)) {
                cols.push(x);
                c += rec(n, cols);
                cols.pop();
            }
        }
        c
    }
    rec(n, &mut Vec::new())
}

pub fn queens_valid(q: &[i64]) -> bool {
    let n = q.len() as i64;
    q.iter().all(|&v| (1..=n).contains(&v))
        && (0..q.len()).all(|i| {
            (i + 1..q.len()).all(|j| q[i] != q[j] && (q[i] - q[j]).abs() != (j - i) as i64)
        })
}

pub fn load_triangle(name: &str) -> Vec<Vec<i64>> {
    std::fs::read_to_string(programs_dir().join(name))
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split_whitespace().map(|x| x.parse().unwrap()).collect())
        .collect()
}

/// Bottom-up maximum path sum.
pub fn triangle_dp(t: &[Vec<i64>]) -> i64 {
    let mut best = t.last().unwrap().clone();
    for row in t.iter().rev().skip(1) {
        best = row
            .iter()
            .enumerate()
            .map(|(i, v)| v + best[i].max(best[i + 1]))
            .collect();
    }
    best[0]
}

pub fn triangle_literal(t: &[Vec<i64>]) -> String {
    let rows: Vec<String> = t
        .iter()
        .map(|r| format!("{{{}}}", r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")))
        .collect();
    format!("{{{}}}", rows.join(","))
}

/// A directed graph over states `1..=n`.
#[derive(Clone, Debug)]
pub struct Graph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub goal: usize,
}

impl Graph {
    pub fn random(rng: &mut impl Rng) -> Graph {
        let n = rng.gen_range(2..=8);
        let p = rng.gen_range(0.15..0.45);
        let mut edges = Vec::new();
        for a in 1..=n {
            for b in 1..=n {
                if a != b && rng.gen_bool(p) {
                    edges.push((a, b));
                }
            }
        }
        Graph {
            n,
            edges,
            goal: rng.gen_range(1..=n),
        }
    }

    pub fn source(&self, planner_rules: &str) -> String {
        let mut s = String::from("import planner.\n\n");
        for (a, b) in &self.edges {
            s.push_str(&format!("edge({a},{b}).\n"));
        }
        s.push_str(&format!("final(S) => S == {}.\n", self.goal));
        s.push_str(planner_rules);
        s
    }

    /// Shortest path length from `start` to the goal.
    pub fn bfs(&self, start: usize) -> Option<usize> {
        let mut dist = vec![usize::MAX; self.n + 1];
        dist[start] = 0;
        let mut q = VecDeque::from([start]);
        while let Some(a) = q.pop_front() {
            if a == self.goal {
                return Some(dist[a]);
            }
            for &(x, y) in &self.edges {
                if x == a && dist[y] == usize::MAX {
                    dist[y] = dist[a] + 1;
                    q.push_back(y);
                }
            }
        }
        None
    }
}

pub const GRAPH_RULES: &str = "action(S,T,A,C) ?=> edge(S,T), A = $mv(S,T), C = 1.\n";

pub type Pos = (i64, i64);

/// Ricochet Robots on an N×N board.
#[derive(Clone, Debug)]
pub struct Ricochet {
    pub n: i64,
    pub walls: Vec<(Pos, Pos)>,
    pub target_robot: Pos,
    pub target: Pos,
    pub others: Vec<Pos>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RState {
    pub cur: Pos,
    pub others: Vec<Pos>,
}

impl Ricochet {
    pub fn random(rng: &mut impl Rng, n: i64) -> Ricochet {
        let cells: Vec<Pos> = (1..=n).flat_map(|r| (1..=n).map(move |c| (r, c))).collect();
        let robots = rng.gen_range(2..=3);
        let mut picked: Vec<Pos> = Vec::new();
        while picked.len() < robots {
            let c = cells[rng.gen_range(0..cells.len())];
            if !picked.contains(&c) {
                picked.push(c);
            }
        }
        let mut walls = Vec::new();
        for _ in 0..rng.gen_range(0..=4) {
            let (r, c) = cells[rng.gen_range(0..cells.len())];
            let (a, b) = if rng.gen_bool(0.5) { ((r, c), (r, c + 1)) } else { ((r, c), (r + 1, c)) };
            if b.0 <= n && b.1 <= n && !walls.contains(&(a, b)) {
                walls.push((a, b));
            }
        }
        let target_robot = picked[0];
        let mut others = picked[1..].to_vec();
        others.sort();
        let mut target = cells[rng.gen_range(0..cells.len())];
        while target == target_robot {
            target = cells[rng.gen_range(0..cells.len())];
        }
        Ricochet {
            n,
            walls,
            target_robot,
            target,
            others,
        }
    }

    fn blocked(&self, a: Pos, b: Pos) -> bool {
        self.walls.contains(&(a, b)) || self.walls.contains(&(b, a))
    }

    /// Stopping positions of a robot at `from` with the other robots at `robots`.
    pub fn dests(&self, from: Pos, robots: &[Pos]) -> Vec<Pos> {
        let mut out = Vec::new();
        for (dr, dc) in [(-1, 0), (1, 0), (0, -1), (0, 1)] {
            let mut p = from;
            loop {
                let q = (p.0 + dr, p.1 + dc);
                if q.0 < 1 || q.0 > self.n || q.1 < 1 || q.1 > self.n || robots.contains(&q) || self.blocked(p, q) {
                    break;
                }
                p = q;
            }
            if p != from {
                out.push(p);
            }
        }
        out
    }

    pub fn start(&self) -> RState {
        RState {
            cur: self.target_robot,
            others: self.others.clone(),
        }
    }

    pub fn successors(&self, s: &RState) -> Vec<RState> {
        let mut out = Vec::new();
        for d in self.dests(s.cur, &s.others) {
            out.push(RState {
                cur: d,
                others: s.others.clone(),
            });
        }
        for (i, &r) in s.others.iter().enumerate() {
            let mut rest = s.others.clone();
            rest.remove(i);
            let mut block = rest.clone();
            block.push(s.cur);
            for d in self.dests(r, &block) {
                let mut o = rest.clone();
                o.push(d);
                o.sort();
                out.push(RState { cur: s.cur, others: o });
            }
        }
        out
    }

    pub fn bfs(&self) -> Option<usize> {
        let start = self.start();
        let mut seen: HashMap<RState, usize> = HashMap::from([(start.clone(), 0)]);
        let mut q = VecDeque::from([start]);
        while let Some(s) = q.pop_front() {
            let d = seen[&s];
            if s.cur == self.target {
                return Some(d);
            }
            for t in self.successors(&s) {
                if !seen.contains_key(&t) {
                    seen.insert(t.clone(), d + 1);
                    q.push_back(t);
                }
            }
        }
        None
    }

    /// Applies a plan given as `(from, to)` moves; returns the final state
    /// if every move is legal.
    pub fn replay(&self, moves: &[(Pos, Pos)]) -> Option<RState> {
        let mut s = self.start();
        for &(from, to) in moves {
            let next: HashSet<RState> = self.successors(&s).into_iter().collect();
            let cand = if from == s.cur {
                RState {
                    cur: to,
                    others: s.others.clone(),
                }
            } else {
                let i = s.others.iter().position(|&p| p == from)?;
                let mut o = s.others.clone();
                o[i] = to;
                o.sort();
                RState { cur: s.cur, others: o }
            };
            if !next.contains(&cand) {
                return None;
            }
            s = cand;
        }
        Some(s)
    }

    /// Program text: the shared rules plus this instance's facts.
    pub fn source(&self, heuristic: bool) -> String {
        let p = |(r, c): Pos| format!("p({r},{c})");
        let others: Vec<String> = self.others.iter().map(|&o| p(o)).collect();
        let mut s = String::from("import planner.\n\n");
        s.push_str(&format!("size({}).\n", self.n));
        s.push_str(&format!(
            "init_state(S) => S = $s([{}|{}], [{}]).\n",
            p(self.target_robot),
            p(self.target),
            others.join(",")
        ));
        s.push_str("wall(nowhere, nowhere).\n");
        for &(a, b) in &self.walls {
            s.push_str(&format!("wall({}, {}).\n", p(a), p(b)));
        }
        s.push_str(RICOCHET_RULES);
        if heuristic {
            let guarded = RICOCHET_ACTIONS
                .replace("(From,ORobotLocs,Stop).", "(From,ORobotLocs,Stop),\n    current_resource() > heuristic_val(NextState).")
                .replace("insert_ordered(ORobotLocs1,RTo).", "insert_ordered(ORobotLocs1,RTo),\n    current_resource() > heuristic_val(NextState).");
            s.push_str(&guarded);
            s.push_str(HEURISTIC);
        } else {
            s.push_str(RICOCHET_ACTIONS);
        }
        s
    }
}

pub fn parse_moves(plan: &str) -> Vec<(Pos, Pos)> {
    ints(plan).chunks(4).map(|c| ((c[0], c[1]), (c[2], c[3]))).collect()
}

const RICOCHET_RULES: &str = "
blocked(A, B) ?=> wall(A, B).
blocked(A, B) => wall(B, A).

final(s([Loc|Loc],_)) => true.

choose_move_dest(From, Robots, Stop) =>
    member($d(DR,DC), [$d(-1,0), $d(1,0), $d(0,-1), $d(0,1)]),
    slide(From, DR, DC, Robots, Stop),
    Stop != From.

slide(p(R,C), DR, DC, Robots, Stop) =>
    size(N),
    R1 = R+DR,
    C1 = C+DC,
    Next = $p(R1,C1),
    (R1 >= 1, R1 =< N, C1 >= 1, C1 =< N, not member(Next, Robots), not blocked($p(R,C), Next) ->
        slide(Next, DR, DC, Robots, Stop)
    ;
        Stop = $p(R,C)
    ).
";

const RICOCHET_ACTIONS: &str = "
action(s([From|To],ORobotLocs),NextState,Action,ActionCost) ?=>
    NextState = $s([Stop|To],ORobotLocs),
    Action = [From|Stop],
    ActionCost = 1,
    choose_move_dest(From,ORobotLocs,Stop).
action(s(FromTo@[From|_],ORobotLocs),NextState,Action,ActionCost) =>
    NextState = $s(FromTo,ORobotLocs2),
    Action = [RFrom|RTo],
    ActionCost = 1,
    select(RFrom, ORobotLocs,ORobotLocs1),
    choose_move_dest(RFrom,[From|ORobotLocs1],RTo),
    ORobotLocs2 = insert_ordered(ORobotLocs1,RTo).
";

const HEURISTIC: &str = "
heuristic_val(s([Loc|Loc],_)) = 0.
heuristic_val(s([p(R,_)|p(R,_)],_)) = 1.
heuristic_val(s([p(_,C)|p(_,C)],_)) = 1.
heuristic_val(_) = 2.
";

/// A randomly generated constraint over at most three variables together
/// with its Picat rendering and a direct evaluator.
#[derive(Clone, Debug)]
pub enum Cons {
    Rel(Lin, &'static str, Lin),
    /// `B #<=> (L #=< R)` with `B` a variable index.
    ReifLe(usize, Lin, Lin),
    And(Box<Cons>, Box<Cons>),
    Or(Box<Cons>, Box<Cons>),
}

/// `sum(c * V) + k`.
#[derive(Clone, Debug)]
pub struct Lin {
    pub terms: Vec<(i64, usize)>,
    pub k: i64,
}

pub const VAR_NAMES: [&str; 3] = ["X", "Y", "Z"];
pub const RELS: [&str; 6] = ["#=", "#!=", "#>", "#>=", "#<", "#=<"];

impl Lin {
    pub fn random(rng: &mut impl Rng, nvars: usize) -> Lin {
        let mut terms = Vec::new();
        for v in 0..nvars {
            if rng.gen_bool(0.6) {
                let mut c = rng.gen_range(-3..=3);
                if c == 0 {
                    c = 1;
                }
                terms.push((c, v));
            }
        }
        Lin {
            terms,
            k: rng.gen_range(-4..=4),
        }
    }

    pub fn eval(&self, a: &[i64]) -> i64 {
        self.terms.iter().map(|&(c, v)| c * a[v]).sum::<i64>() + self.k
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for &(c, v) in &self.terms {
            if !s.is_empty() {
                s.push_str(" + ");
            }
            s.push_str(&format!("{c}*{}", VAR_NAMES[v]));
        }
        if s.is_empty() {
            return self.k.to_string();
        }
        format!("({s} + {})", self.k)
    }
}

fn rel_holds(op: &str, a: i64, b: i64) -> bool {
    match op {
        "#=" => a == b,
        "#!=" => a != b,
        "#>" => a > b,
        "#>=" => a >= b,
        "#<" => a < b,
        "#=<" => a <= b,
        _ => unreachable!(),
    }
}

impl Cons {
    pub fn random(rng: &mut impl Rng, nvars: usize, depth: u32) -> Cons {
        match rng.gen_range(0..if depth == 0 { 2 } else { 4 }) {
            0 => Cons::Rel(Lin::random(rng, nvars), RELS[rng.gen_range(0..6)], Lin::random(rng, nvars)),
            1 => Cons::ReifLe(rng.gen_range(0..nvars), Lin::random(rng, nvars), Lin::random(rng, nvars)),
            2 => Cons::And(Box::new(Cons::random(rng, nvars, depth - 1)), Box::new(Cons::random(rng, nvars, depth - 1))),
            _ => Cons::Or(Box::new(Cons::random(rng, nvars, depth - 1)), Box::new(Cons::random(rng, nvars, depth - 1))),
        }
    }

    /// Whether this constraint can appear nested under `#/\` or `#\/`.
    fn reified_ok(&self) -> bool {
        !matches!(self, Cons::ReifLe(..))
    }

    pub fn holds(&self, a: &[i64]) -> bool {
        match self {
            Cons::Rel(l, op, r) => rel_holds(op, l.eval(a), r.eval(a)),
            Cons::ReifLe(b, l, r) => {
                let v = a[*b];
                (v == 0 || v == 1) && (v == 1) == (l.eval(a) <= r.eval(a))
            }
            Cons::And(x, y) => x.holds(a) && y.holds(a),
            Cons::Or(x, y) => x.holds(a) || y.holds(a),
        }
    }

    pub fn render(&self) -> String {
        match self {
            Cons::Rel(l, op, r) => format!("{} {op} {}", l.render(), r.render()),
            Cons::ReifLe(b, l, r) => format!("{} #<=> ({} #=< {})", VAR_NAMES[*b], l.render(), r.render()),
            Cons::And(x, y) => format!("({}) #/\\ ({})", x.render(), y.render()),
            Cons::Or(x, y) => format!("({}) #\\/ ({})", x.render(), y.render()),
        }
    }

    /// Random constraint whose connectives only join plain comparisons.
    pub fn random_model_constraint(rng: &mut impl Rng, nvars: usize) -> Cons {
        loop {
            let c = Cons::random(rng, nvars, 1);
            let ok = match &c {
                Cons::And(x, y) | Cons::Or(x, y) => x.reified_ok() && y.reified_ok(),
                _ => true,
            };
            if ok {
                return c;
            }
        }
    }
}

/// A random model: variable domains plus constraints.
#[derive(Clone, Debug)]
pub struct RandomModel {
    pub doms: Vec<(i64, i64)>,
    pub cons: Vec<Cons>,
}

impl RandomModel {
    pub fn random(rng: &mut impl Rng) -> RandomModel {
        let n = rng.gen_range(1..=3);
        let doms = (0..n)
            .map(|_| {
                let lo = rng.gen_range(-8..=8);
                (lo, rng.gen_range(lo..=(lo + 8).min(8)))
            })
            .collect();
        let cons = (0..rng.gen_range(0..=3)).map(|_| Cons::random_model_constraint(rng, n)).collect();
        RandomModel { doms, cons }
    }

    pub fn vars(&self) -> Vec<&'static str> {
        VAR_NAMES[..self.doms.len()].to_vec()
    }

    pub fn source(&self) -> String {
        let vars = self.vars().join(",");
        let mut body = vec![format!("L = [{vars}]")];
        for (i, (lo, hi)) in self.doms.iter().enumerate() {
            body.push(format!("{} :: {lo}..{hi}", VAR_NAMES[i]));
        }
        for c in &self.cons {
            body.push(c.render());
        }
        body.push("solve(L)".into());
        format!("go(L) =>\n    {}.\n", body.join(",\n    "))
    }

    /// Solutions by enumerating the box.
    pub fn oracle(&self) -> BTreeSet<Vec<i64>> {
        let mut out = BTreeSet::new();
        let mut a: Vec<i64> = self.doms.iter().map(|d| d.0).collect();
        loop {
            if self.cons.iter().all(|c| c.holds(&a)) {
                out.insert(a.clone());
            }
            let mut k = 0;
            loop {
                if k == a.len() {
                    return out;
                }
                if a[k] < self.doms[k].1 {
                    a[k] += 1;
                    break;
                }
                a[k] = self.doms[k].0;
                k += 1;
            }
        }
    }
}

/// Solutions of `go(L)` as integer vectors.
pub fn engine_solutions(src: &str, backend: pl9::engine::Backend) -> Result<BTreeSet<Vec<i64>>, String> {
    let mut eng = pl9::Engine::from_source(src).map_err(|e| e.to_string())?;
    eng.options.backend = Some(backend);
    let sols = eng.solve_all("go(L)", None).map_err(|e| e.to_string())?;
    Ok(sols.iter().map(|s| ints(s.get("L").unwrap())).collect())
}
