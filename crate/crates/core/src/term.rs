//! Runtime term representation with hash-consing of ground compound terms.
//!
//! Integers, atoms, `[]` and variables are unboxed in the [`Term`] handle.
//! Compound terms (list cells, structures, arrays) live in a node arena.
//! A compound whose children are all ground is interned: structurally equal
//! ground compounds share one node, and the node's hash code is computed
//! once at intern time. Compounds that contain variables are allocated in
//! the same arena without consing.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Interned atom / functor name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sym(pub u32);

/// Logic variable serial number. Bindings are owned by the engine.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

/// Handle to a term. Copyable; equality of two handles that both refer to
/// ground terms coincides with structural equality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(VarId),
    Atom(Sym),
    Int(i64),
    Nil,
    Node(NodeId),
}

impl Term {
    pub fn as_int(self) -> Option<i64> {
        match self {
            Term::Int(n) => Some(n),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Cons,
    Struct(Sym),
    Array,
}

/// Constructor description accepted by [`Store::intern`].
#[derive(Clone, Debug)]
pub enum TermNode {
    Var(VarId),
    Atom(Sym),
    Int(i64),
    Nil,
    Cons(Term, Term),
    Struct(Sym, Vec<Term>),
    Array(Vec<Term>),
}

/// Borrowed view of one level of a term.
#[derive(Clone, Copy, Debug)]
pub enum View<'a> {
    Var(VarId),
    Atom(Sym),
    Int(i64),
    Nil,
    Cons(Term, Term),
    Struct(Sym, &'a [Term]),
    Array(&'a [Term]),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TermError {
    #[error("hash requested for a non-ground term")]
    NonGround,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StoreStats {
    /// Interned (hash-consed) ground nodes.
    pub node_count: u64,
    pub intern_hits: u64,
    pub intern_misses: u64,
    /// Non-ground nodes allocated outside the consing table.
    pub heap_nodes: u64,
    /// Number of times a hash code was computed from child hashes.
    pub hash_traversals: u64,
}

#[derive(Clone, Debug)]
struct Node {
    kind: NodeKind,
    start: u32,
    len: u32,
    ground: bool,
    hash: u64,
}

struct SymInfo {
    name: Box<str>,
    hash: u64,
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub(crate) const TAG_INT: u64 = 1;
pub(crate) const TAG_ATOM: u64 = 2;
pub(crate) const TAG_NIL: u64 = 3;
pub(crate) const TAG_CONS: u64 = 4;
pub(crate) const TAG_STRUCT: u64 = 5;
pub(crate) const TAG_ARRAY: u64 = 6;

/// One FNV-1a round over the little-endian bytes of `word`.
pub fn fnv_mix(mut h: u64, word: u64) -> u64 {
    for b in word.to_le_bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

pub fn fnv_str(s: &str) -> u64 {
    let mut h = FNV_OFFSET;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

pub struct Store {
    syms: Vec<SymInfo>,
    sym_index: HashMap<Box<str>, Sym>,
    nodes: Vec<Node>,
    args: Vec<Term>,
    table: HashMap<u64, Vec<NodeId>>,
    stats: StoreStats,
}

impl Default for Store {
    fn default() -> Self {
        Self::new()
    }
}

impl Store {
    pub fn new() -> Self {
        Store {
            syms: Vec::new(),
            sym_index: HashMap::new(),
            nodes: Vec::new(),
            args: Vec::new(),
            table: HashMap::new(),
            stats: StoreStats::default(),
        }
    }

    pub fn sym(&mut self, name: &str) -> Sym {
        if let Some(&s) = self.sym_index.get(name) {
            return s;
        }
        let s = Sym(self.syms.len() as u32);
        self.syms.push(SymInfo {
            name: name.into(),
            hash: fnv_str(name),
        });
        self.sym_index.insert(name.into(), s);
        s
    }

    pub fn lookup_sym(&self, name: &str) -> Option<Sym> {
        self.sym_index.get(name).copied()
    }

    pub fn sym_name(&self, s: Sym) -> &str {
        &self.syms[s.0 as usize].name
    }

    pub fn atom(&mut self, name: &str) -> Term {
        if name == "[]" {
            return Term::Nil;
        }
        Term::Atom(self.sym(name))
    }

    pub fn stats(&self) -> StoreStats {
        self.stats
    }

    /// Interns a node description. Ground compounds are hash-consed; compounds
    /// with variables are allocated without consing.
    pub fn intern(&mut self, node: TermNode) -> Term {
        match node {
            TermNode::Var(v) => Term::Var(v),
            TermNode::Atom(s) => {
                if self.sym_name(s) == "[]" {
                    Term::Nil
                } else {
                    Term::Atom(s)
                }
            }
            TermNode::Int(n) => Term::Int(n),
            TermNode::Nil => Term::Nil,
            TermNode::Cons(h, t) => self.make(NodeKind::Cons, &[h, t]),
            TermNode::Struct(f, args) => self.make(NodeKind::Struct(f), &args),
            TermNode::Array(elems) => self.make(NodeKind::Array, &elems),
        }
    }

    pub fn cons(&mut self, head: Term, tail: Term) -> Term {
        self.make(NodeKind::Cons, &[head, tail])
    }

    pub fn structure(&mut self, name: Sym, args: &[Term]) -> Term {
        if args.is_empty() {
            return Term::Atom(name);
        }
        self.make(NodeKind::Struct(name), args)
    }

    pub fn structure_named(&mut self, name: &str, args: &[Term]) -> Term {
        let s = self.sym(name);
        self.structure(s, args)
    }

    pub fn array(&mut self, elems: &[Term]) -> Term {
        self.make(NodeKind::Array, elems)
    }

    pub fn list<I>(&mut self, items: I) -> Term
    where
        I: IntoIterator<Item = Term>,
        I::IntoIter: DoubleEndedIterator,
    {
        self.list_with_tail(items, Term::Nil)
    }

    pub fn list_with_tail<I>(&mut self, items: I, tail: Term) -> Term
    where
        I: IntoIterator<Item = Term>,
        I::IntoIter: DoubleEndedIterator,
    {
        let mut acc = tail;
        for t in items.into_iter().rev() {
            acc = self.cons(t, acc);
        }
        acc
    }

    /// A double-quoted string: list of single-character atoms.
    pub fn string(&mut self, s: &str) -> Term {
        let chars: Vec<Term> = s
            .chars()
            .map(|c| {
                let mut buf = [0u8; 4];
                self.atom(c.encode_utf8(&mut buf))
            })
            .collect();
        self.list(chars)
    }

    fn child_hash(&self, t: Term) -> Option<u64> {
        match t {
            Term::Var(_) => None,
            Term::Int(n) => Some(fnv_mix(fnv_mix(FNV_OFFSET, TAG_INT), n as u64)),
            Term::Atom(s) => Some(fnv_mix(
                fnv_mix(FNV_OFFSET, TAG_ATOM),
                self.syms[s.0 as usize].hash,
            )),
            Term::Nil => Some(fnv_mix(FNV_OFFSET, TAG_NIL)),
            Term::Node(id) => {
                let n = &self.nodes[id.0 as usize];
                n.ground.then_some(n.hash)
            }
        }
    }

    fn header_hash(&self, kind: NodeKind, arity: usize) -> u64 {
        match kind {
            NodeKind::Cons => fnv_mix(FNV_OFFSET, TAG_CONS),
            NodeKind::Struct(f) => {
                let h = fnv_mix(FNV_OFFSET, TAG_STRUCT);
                let h = fnv_mix(h, self.syms[f.0 as usize].hash);
                fnv_mix(h, arity as u64)
            }
            NodeKind::Array => fnv_mix(fnv_mix(FNV_OFFSET, TAG_ARRAY), arity as u64),
        }
    }

    fn make(&mut self, kind: NodeKind, children: &[Term]) -> Term {
        let mut hash = 0;
        let mut ground = true;
        let mut hs = Vec::with_capacity(children.len());
        for &c in children {
            match self.child_hash(c) {
                Some(h) => hs.push(h),
                None => {
                    ground = false;
                    break;
                }
            }
        }
        if ground {
            self.stats.hash_traversals += 1;
            hash = self.header_hash(kind, children.len());
            for h in hs {
                hash = fnv_mix(hash, h);
            }
            if let Some(bucket) = self.table.get(&hash) {
                for &id in bucket {
                    let n = &self.nodes[id.0 as usize];
                    if n.kind == kind
                        && n.len as usize == children.len()
                        && self.args[n.start as usize..(n.start + n.len) as usize] == *children
                    {
                        self.stats.intern_hits += 1;
                        return Term::Node(id);
                    }
                }
            }
            self.stats.intern_misses += 1;
            self.stats.node_count += 1;
        } else {
            self.stats.heap_nodes += 1;
        }
        let id = NodeId(self.nodes.len() as u32);
        let start = self.args.len() as u32;
        self.args.extend_from_slice(children);
        self.nodes.push(Node {
            kind,
            start,
            len: children.len() as u32,
            ground,
            hash,
        });
        if ground {
            self.table.entry(hash).or_default().push(id);
        }
        Term::Node(id)
    }

    /// Cached hash code of a ground term. Performs no traversal.
    pub fn hash_of(&self, t: Term) -> Result<u64, TermError> {
        self.child_hash(t).ok_or(TermError::NonGround)
    }

    /// Structural groundness as built (does not follow variable bindings).
    pub fn is_ground(&self, t: Term) -> bool {
        match t {
            Term::Var(_) => false,
            Term::Node(id) => self.nodes[id.0 as usize].ground,
            _ => true,
        }
    }

    pub fn view(&self, t: Term) -> View<'_> {
        match t {
            Term::Var(v) => View::Var(v),
            Term::Atom(s) => View::Atom(s),
            Term::Int(n) => View::Int(n),
            Term::Nil => View::Nil,
            Term::Node(id) => {
                let n = &self.nodes[id.0 as usize];
                let args = &self.args[n.start as usize..(n.start + n.len) as usize];
                match n.kind {
                    NodeKind::Cons => View::Cons(args[0], args[1]),
                    NodeKind::Struct(f) => View::Struct(f, args),
                    NodeKind::Array => View::Array(args),
                }
            }
        }
    }

    /// Kind and children of a compound node.
    pub fn node(&self, id: NodeId) -> (NodeKind, &[Term]) {
        let n = &self.nodes[id.0 as usize];
        (
            n.kind,
            &self.args[n.start as usize..(n.start + n.len) as usize],
        )
    }

    /// Elements of a proper list, or `None` if `t` is not one. Does not
    /// follow variable bindings.
    pub fn list_items(&self, mut t: Term) -> Option<Vec<Term>> {
        let mut out = Vec::new();
        loop {
            match self.view(t) {
                View::Nil => return Some(out),
                View::Cons(h, tl) => {
                    out.push(h);
                    t = tl;
                }
                _ => return None,
            }
        }
    }

    /// Plain rendering without variable resolution; used in diagnostics.
    pub fn display(&self, t: Term) -> String {
        let mut s = String::new();
        self.write_term(&mut s, t)
            .expect("writing to a String cannot fail");
        s
    }

    fn write_term(&self, out: &mut String, t: Term) -> fmt::Result {
        use fmt::Write;
        match self.view(t) {
            View::Var(v) => write!(out, "_{}", v.0),
            View::Atom(s) => write!(out, "{}", self.sym_name(s)),
            View::Int(n) => write!(out, "{n}"),
            View::Nil => write!(out, "[]"),
            View::Cons(..) => {
                out.push('[');
                let mut cur = t;
                let mut first = true;
                loop {
                    match self.view(cur) {
                        View::Cons(h, tl) => {
                            if !first {
                                out.push(',');
                            }
                            first = false;
                            self.write_term(out, h)?;
                            cur = tl;
                        }
                        View::Nil => break,
                        _ => {
                            out.push('|');
                            self.write_term(out, cur)?;
                            break;
                        }
                    }
                }
                out.push(']');
                Ok(())
            }
            View::Struct(f, args) => {
                write!(out, "{}(", self.sym_name(f))?;
                for (i, &a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    self.write_term(out, a)?;
                }
                out.push(')');
                Ok(())
            }
            View::Array(elems) => {
                out.push('{');
                for (i, &a) in elems.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    self.write_term(out, a)?;
                }
                out.push('}');
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_store_is_empty() {
        let s = Store::new();
        assert_eq!(s.stats().node_count, 0);
    }

    #[test]
    fn equal_lists_share_a_handle() {
        let mut s = Store::new();
        let a = s.list([Term::Int(1), Term::Int(2)]);
        let b = s.list([Term::Int(1), Term::Int(2)]);
        assert_eq!(a, b);
        assert!(s.stats().intern_hits >= 1);
    }

    #[test]
    fn equal_structs_share_a_handle() {
        let mut s = Store::new();
        let f = s.sym("s");
        let (a, b) = (s.atom("a"), s.atom("b"));
        let t1 = s.intern(TermNode::Struct(f, vec![a, b]));
        let t2 = s.intern(TermNode::Struct(f, vec![a, b]));
        assert_eq!(t1, t2);
    }

    #[test]
    fn suffix_sharing_costs_one_node() {
        let mut s = Store::new();
        let p: Vec<Term> = ["p1", "p3", "p7", "p9"].iter().map(|n| s.atom(n)).collect();
        s.list(p[1..].iter().copied());
        let before = s.stats().node_count;
        s.list(p.iter().copied());
        assert_eq!(s.stats().node_count, before + 1);
    }

    #[test]
    fn miss_counter_counts_only_new_cells() {
        let mut s = Store::new();
        s.list([Term::Int(2), Term::Int(3)]);
        let misses = s.stats().intern_misses;
        assert_eq!(misses, 2);
        s.list([Term::Int(1), Term::Int(2), Term::Int(3)]);
        assert_eq!(s.stats().intern_misses, misses + 1);
    }

    #[test]
    fn hash_is_cached() {
        let mut s = Store::new();
        let l = s.list((0..1000).map(Term::Int));
        let traversals = s.stats().hash_traversals;
        let h1 = s.hash_of(l).unwrap();
        let h2 = s.hash_of(l).unwrap();
        assert_eq!(h1, h2);
        assert_eq!(s.stats().hash_traversals, traversals);
        assert_eq!(s.hash_of(Term::Int(5)), s.hash_of(Term::Int(5)));
    }

    #[test]
    fn non_ground_terms_are_not_consed() {
        let mut s = Store::new();
        let v = Term::Var(VarId(0));
        let a = s.cons(v, Term::Nil);
        let b = s.cons(v, Term::Nil);
        assert_ne!(a, b);
        assert_eq!(s.stats().node_count, 0);
        assert_eq!(s.stats().heap_nodes, 2);
        assert_eq!(s.hash_of(a), Err(TermError::NonGround));
    }

    #[test]
    fn strings_are_char_lists() {
        let mut s = Store::new();
        let t = s.string("ab");
        let (a, b) = (s.atom("a"), s.atom("b"));
        let l = s.list([a, b]);
        assert_eq!(t, l);
    }

    #[test]
    fn arrays_differ_from_structs() {
        let mut s = Store::new();
        let arr = s.array(&[Term::Int(1)]);
        let st = s.structure_named("{}", &[Term::Int(1)]);
        assert_ne!(arr, st);
        assert_ne!(s.hash_of(arr).unwrap(), s.hash_of(st).unwrap());
    }
}
