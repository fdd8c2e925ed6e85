use std::collections::HashMap;

use pl9::term::{Store, Term};
use proptest::prelude::*;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Tree {
    Int(i64),
    Atom(String),
    Nil,
    Cons(Box<Tree>, Box<Tree>),
    Struct(String, Vec<Tree>),
    Array(Vec<Tree>),
}

const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const PRIME: u64 = 0x0000_0100_0000_01b3;

fn mix(mut h: u64, w: u64) -> u64 {
    for b in w.to_le_bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(PRIME);
    }
    h
}

fn str_hash(s: &str) -> u64 {
    let mut h = OFFSET;
    for b in s.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(PRIME);
    }
    h
}

/// Reference hash over the flattened tree.
fn reference_hash(t: &Tree) -> u64 {
    match t {
        Tree::Int(n) => mix(mix(OFFSET, 1), *n as u64),
        Tree::Atom(a) => mix(mix(OFFSET, 2), str_hash(a)),
        Tree::Nil => mix(OFFSET, 3),
        Tree::Cons(h, tl) => {
            let x = mix(OFFSET, 4);
            mix(mix(x, reference_hash(h)), reference_hash(tl))
        }
        Tree::Struct(f, args) => {
            let mut x = mix(mix(mix(OFFSET, 5), str_hash(f)), args.len() as u64);
            for a in args {
                x = mix(x, reference_hash(a));
            }
            x
        }
        Tree::Array(xs) => {
            let mut x = mix(mix(OFFSET, 6), xs.len() as u64);
            for a in xs {
                x = mix(x, reference_hash(a));
            }
            x
        }
    }
}

fn build(s: &mut Store, t: &Tree) -> Term {
    match t {
        Tree::Int(n) => Term::Int(*n),
        Tree::Atom(a) => s.atom(a),
        Tree::Nil => Term::Nil,
        Tree::Cons(h, tl) => {
            let h = build(s, h);
            let tl = build(s, tl);
            s.cons(h, tl)
        }
        Tree::Struct(f, args) => {
            let args: Vec<Term> = args.iter().map(|a| build(s, a)).collect();
            s.structure_named(f, &args)
        }
        Tree::Array(xs) => {
            let xs: Vec<Term> = xs.iter().map(|a| build(s, a)).collect();
            s.array(&xs)
        }
    }
}

fn tree() -> impl Strategy<Value = Tree> {
    let leaf = prop_oneof![
        (-5i64..5).prop_map(Tree::Int),
        prop::sample::select(vec!["a", "b", "cd"]).prop_map(|s| Tree::Atom(s.to_string())),
        Just(Tree::Nil),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(h, t)| Tree::Cons(Box::new(h), Box::new(t))),
            (prop::sample::select(vec!["f", "g"]), prop::collection::vec(inner.clone(), 1..3))
                .prop_map(|(f, a)| Tree::Struct(f.to_string(), a)),
            prop::collection::vec(inner, 0..3).prop_map(Tree::Array),
        ]
    })
}

proptest! {
    #[test]
    fn handles_coincide_with_structural_equality(ts in prop::collection::vec(tree(), 1..12)) {
        let mut s = Store::new();
        let mut seen: HashMap<Tree, Term> = HashMap::new();
        for t in &ts {
            let h = build(&mut s, t);
            prop_assert_eq!(s.hash_of(h).unwrap(), reference_hash(t));
            for (u, &hu) in &seen {
                prop_assert_eq!(u == t, hu == h);
            }
            seen.insert(t.clone(), h);
        }
    }
}

#[test]
fn non_ground_terms_have_no_hash() {
    let mut s = Store::new();
    let x = Term::Var(pl9::term::VarId(0));
    let t = s.structure_named("f", &[x, Term::Int(1)]);
    assert!(s.hash_of(t).is_err());
    assert!(!s.is_ground(t));
    let u = s.structure_named("f", &[x, Term::Int(1)]);
    assert_ne!(t, u);
    assert_eq!(s.stats().heap_nodes, 2);
}

#[test]
fn shared_suffixes_are_stored_once() {
    let mut s = Store::new();
    let tail = s.list([Term::Int(2), Term::Int(3)]);
    let a = s.cons(Term::Int(1), tail);
    let before = s.stats().node_count;
    let b = s.list([Term::Int(9), Term::Int(2), Term::Int(3)]);
    assert_ne!(a, b);
    assert_eq!(s.stats().node_count, before + 1);
}
