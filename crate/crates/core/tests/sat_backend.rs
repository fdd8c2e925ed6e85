mod common;

use std::collections::BTreeSet;
use std::path::PathBuf;

use pl9::engine::Backend;
use pl9::sat::{dpll::solve_clauses, parse_dimacs, Lit};
use pl9::{Engine, Error};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SMALL: &str = "
import sat.
go(L) =>
    L = [X,Y],
    X :: -3..5,
    Y :: 0..6,
    X + 2*Y #= 7,
    X #!= 1,
    solve(L).
";

fn small_holds(x: i64, y: i64) -> bool {
    (-3..=5).contains(&x) && (0..=6).contains(&y) && x + 2 * y == 7 && x != 1
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pl9-sat-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

/// Parsed `.map` line: bounds, magnitude bits, optional sign literal.
struct MapVar {
    lo: i64,
    hi: i64,
    bits: Vec<Lit>,
    sign: Option<Lit>,
}

fn parse_map(text: &str) -> Vec<MapVar> {
    text.lines()
        .map(|line| {
            let mut it = line.split_whitespace();
            it.next().unwrap();
            let (lo, hi) = it.next().unwrap().split_once("..").unwrap();
            assert_eq!(it.next(), Some("bits"));
            let mut bits = Vec::new();
            let mut sign = None;
            while let Some(tok) = it.next() {
                if tok == "sign" {
                    sign = Some(it.next().unwrap().parse().unwrap());
                } else {
                    bits.push(tok.parse().unwrap());
                }
            }
            MapVar {
                lo: lo.parse().unwrap(),
                hi: hi.parse().unwrap(),
                bits,
                sign,
            }
        })
        .collect()
}

/// Unit clauses forcing `v` to value `x`, or `None` if the bits cannot hold it.
fn fix(v: &MapVar, x: i64) -> Option<Vec<Vec<Lit>>> {
    let mag = x.unsigned_abs();
    if mag >> v.bits.len() != 0 {
        return None;
    }
    let mut units: Vec<Vec<Lit>> = v
        .bits
        .iter()
        .enumerate()
        .map(|(i, &b)| vec![if mag >> i & 1 == 1 { b } else { -b }])
        .collect();
    match v.sign {
        Some(s) => units.push(vec![if x < 0 { s } else { -s }]),
        None if x < 0 => return None,
        None => {}
    }
    Some(units)
}

#[test]
fn emitted_dimacs_encodes_exactly_the_model() {
    let cnf_path = scratch("small.cnf");
    let mut e = Engine::from_source(SMALL).unwrap();
    e.options.emit_dimacs = Some(cnf_path.clone());
    let sols: BTreeSet<Vec<i64>> = e
        .solve_all("go(L)", None)
        .unwrap()
        .iter()
        .map(|s| common::ints(s.get("L").unwrap()))
        .collect();
    let want: BTreeSet<Vec<i64>> = (-3..=5)
        .flat_map(|x| (0..=6).map(move |y| vec![x, y]))
        .filter(|v| small_holds(v[0], v[1]))
        .collect();
    assert_eq!(sols, want);

    let text = std::fs::read_to_string(&cnf_path).unwrap();
    assert!(text.starts_with("p cnf ") || text.lines().any(|l| l.starts_with("p cnf ")));
    let (nv, clauses) = parse_dimacs(&text).unwrap();
    let mut map_path = cnf_path.into_os_string();
    map_path.push(".map");
    let map = parse_map(&std::fs::read_to_string(&map_path).unwrap());
    assert!(map.len() >= 2);
    // Bounds are recorded after propagation.
    assert!(-3 <= map[0].lo && map[0].hi <= 5);
    assert!(0 <= map[1].lo && map[1].hi <= 6);
    for v in &map {
        for &l in v.bits.iter().chain(&v.sign) {
            assert!(l != 0 && l.unsigned_abs() <= nv);
        }
    }

    for x in -8..=8 {
        for y in -8..=8 {
            let (Some(fx), Some(fy)) = (fix(&map[0], x), fix(&map[1], y)) else {
                assert!(!small_holds(x, y));
                continue;
            };
            let mut cs = clauses.clone();
            cs.extend(fx);
            cs.extend(fy);
            let sat = solve_clauses(nv, &cs, true, 0).is_some();
            assert_eq!(sat, small_holds(x, y), "({x}, {y})");
        }
    }
}

#[test]
fn sat_agrees_with_cp_on_random_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(515);
    for i in 0..60 {
        let m = common::RandomModel::random(&mut rng);
        let src = m.source();
        let want = m.oracle();
        for b in [Backend::Cp, Backend::Sat] {
            let got = common::engine_solutions(&src, b).unwrap_or_else(|e| panic!("model {i} {b:?}: {e}\n{src}"));
            assert_eq!(got, want, "model {i} under {b:?}\n{src}");
        }
    }
}

#[test]
fn import_selects_the_sat_backend() {
    let e = Engine::from_source(SMALL).unwrap();
    assert_eq!(e.backend(), Backend::Sat);
    let mut e = Engine::from_source(&SMALL.replace("import sat.", "")).unwrap();
    assert_eq!(e.backend(), Backend::Cp);
    assert_eq!(e.solve_all("go(L)", None).unwrap().len(), 4);
}

#[test]
fn queens_under_sat_counts_match() {
    let src = common::read_program("queens.pi");
    let mut e = Engine::from_source(&src).unwrap();
    e.options.backend = Some(Backend::Sat);
    let sols = e.solve_all("queens(6, Q)", None).unwrap();
    assert_eq!(sols.len(), common::queens_count(6));
    for s in &sols {
        assert!(common::queens_valid(&common::ints(s.get("Q").unwrap())));
    }
    assert!(e.sat_stats().decisions > 0);
}

#[test]
fn minimization_returns_only_the_optimum() {
    let src = "
import sat.
go(L,C) =>
    L = [X,Y],
    L :: 0..9,
    X + Y #>= 5,
    X #> Y,
    C #= 3*X + Y,
    solve([$min(C)], L).
";
    let mut e = Engine::from_source(src).unwrap();
    let sols = e.solve_all("go(L,C)", None).unwrap();
    assert_eq!(sols.len(), 1);
    assert_eq!(sols[0].get("L"), Some("[3,2]"));
    assert_eq!(sols[0].get("C"), Some("11"));
}

#[test]
fn element_is_unsupported_under_sat() {
    let src = "
import sat.
go(L) => L = [I,V], I :: 1..3, V :: 0..9, element(I, [4,5,6], V), solve(L).
";
    let mut e = Engine::from_source(src).unwrap();
    match e.solve_once("go(L)") {
        Err(Error::Engine(err)) => assert_eq!(err.kind(), "unsupported_constraint"),
        other => panic!("expected unsupported_constraint, got {other:?}"),
    }
    e.options.backend = Some(Backend::Cp);
    assert_eq!(e.solve_all("go(L)", None).unwrap().len(), 3);
}
