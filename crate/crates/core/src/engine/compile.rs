use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;
use std::str::FromStr;

use crate::parser::{
    self, Ast, ParseError, PredKey, PredicateDef, Program, RuleKind, SourceRule, TableDecl,
};
use crate::term::{Store, Sym, Term};

use super::Engine;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Backend {
    Cp,
    Sat,
    Mip,
}

impl FromStr for Backend {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cp" => Ok(Backend::Cp),
            "sat" => Ok(Backend::Sat),
            "mip" => Ok(Backend::Mip),
            other => Err(format!("unknown backend '{other}'")),
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Cp => "cp",
            Backend::Sat => "sat",
            Backend::Mip => "mip",
        })
    }
}

pub type PredId = usize;

pub(crate) struct Pred {
    pub name: String,
    pub sym: Sym,
    /// Number of arguments, including the result slot of a function.
    pub arity: usize,
    pub function: bool,
    pub rules: Rc<[Rc<Rule>]>,
    pub table: Option<TableDecl>,
}

/// Head pattern, matched one-way against call arguments.
#[derive(Debug)]
pub(crate) enum Pat {
    Anon,
    Var(u32),
    Const(Term),
    Cons(Box<Pat>, Box<Pat>),
    Struct(Sym, Box<[Pat]>),
    Array(Box<[Pat]>),
    As(u32, Box<Pat>),
}

#[derive(Debug)]
pub(crate) struct Rule {
    pub nvars: usize,
    pub head: Box<[Pat]>,
    /// Head arguments of a Horn clause, unified instead of matched.
    pub horn: Option<Box<[Expr]>>,
    pub result: Option<u32>,
    pub kind: RuleKind,
    pub cond: Option<Rc<[Goal]>>,
    pub body: Rc<[Goal]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum ArOp {
    Add,
    Sub,
    Mul,
    IntDiv,
    ExactDiv,
    FloorDiv,
    Mod,
    Rem,
    Neg,
    Pos,
    Abs,
    Min2,
    Max2,
    MinList,
    MaxList,
    Sum,
    Pow,
    BitAnd,
    BitOr,
    Xor,
    Shl,
    Shr,
    BitNot,
    Sign,
}

pub(crate) fn ar_op(name: &str, arity: usize) -> Option<ArOp> {
    use ArOp::*;
    Some(match (name, arity) {
        ("+", 2) => Add,
        ("-", 2) => Sub,
        ("*", 2) => Mul,
        ("//", 2) => IntDiv,
        ("/", 2) => ExactDiv,
        ("div", 2) => FloorDiv,
        ("mod", 2) => Mod,
        ("rem", 2) => Rem,
        ("-", 1) => Neg,
        ("+", 1) => Pos,
        ("abs", 1) => Abs,
        ("min", 2) => Min2,
        ("max", 2) => Max2,
        ("min", 1) => MinList,
        ("max", 1) => MaxList,
        ("sum", 1) => Sum,
        ("**", 2) | ("^", 2) => Pow,
        ("/\\", 2) => BitAnd,
        ("\\/", 2) => BitOr,
        ("xor", 2) => Xor,
        ("<<", 2) => Shl,
        (">>", 2) => Shr,
        ("\\", 1) | ("~", 1) => BitNot,
        ("sign", 1) => Sign,
        _ => return None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Native {
    Length,
    Reverse,
    Sort,
    SortDown,
    SortRemoveDups,
    InsertOrdered,
    Delete,
    DeleteAll,
    Append,
    NewList,
    NewListFilled,
    NewArray,
    Head,
    Tail,
    Last,
    ToList,
    ToArray,
    Iterable,
    CurrentResource,
    Nth,
    CopyTerm,
    Name,
    Arity,
    Arg,
    RemoveDups,
    Flatten,
    Zip,
    Range,
}

fn native_fn(name: &str, arity: usize) -> Option<Native> {
    use Native::*;
    Some(match (name, arity) {
        ("length", 1) | ("len", 1) => Length,
        ("reverse", 1) => Reverse,
        ("sort", 1) => Sort,
        ("sort_down", 1) => SortDown,
        ("sort_remove_dups", 1) => SortRemoveDups,
        ("insert_ordered", 2) => InsertOrdered,
        ("delete", 2) => Delete,
        ("delete_all", 2) => DeleteAll,
        ("++", 2) | ("append", 2) => Append,
        ("new_list", 1) => NewList,
        ("new_list", 2) => NewListFilled,
        ("new_array", n) if (1..=3).contains(&n) => NewArray,
        ("head", 1) | ("first", 1) => Head,
        ("tail", 1) => Tail,
        ("last", 1) => Last,
        ("to_list", 1) => ToList,
        ("to_array", 1) => ToArray,
        ("$iterable", 1) => Iterable,
        ("current_resource", 0) => CurrentResource,
        ("nth", 2) => Nth,
        ("copy_term", 1) => CopyTerm,
        ("name", 1) => Name,
        ("arity", 1) => Arity,
        ("arg", 2) => Arg,
        ("remove_dups", 1) => RemoveDups,
        ("flatten", 1) => Flatten,
        ("zip", 2) => Zip,
        ("..", 2) => Range,
        _ => return None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Builtin {
    NotUnify,
    Identical,
    NotIdentical,
    ArithCmp(CmpOp),
    ArithEq,
    ArithNe,
    OrderCmp(CmpOp),
    Write,
    Writeln,
    Nl,
    Member,
    Select,
    Append3,
    Between,
    Length2,
    Ground,
    IsVar,
    NonVar,
    IsInt,
    IsAtom,
    IsList,
    Domain,
    NotInDomain,
    Constraint,
    AllDifferent,
    TableIn,
    TableNotIn,
    Element,
    UnsupportedGlobal,
    Solve1,
    Solve2,
    Plan,
    BestPlan,
}

/// Argument evaluation mode of a builtin.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Mode {
    /// Arithmetic is evaluated, structures are function calls.
    Value,
    /// Arithmetic over non-integers stays symbolic.
    Constraint,
    /// Structures are data; only indexing and attribute access evaluate.
    Data,
}

const CONSTRAINT_OPS: &[&str] = &[
    "#=", "#!=", "#<", "#=<", "#<=", "#>", "#>=", "#<=>", "#=>", "#/\\", "#\\/", "#^", "#~",
];

fn builtin(name: &str, arity: usize) -> Option<(Builtin, Mode)> {
    use Builtin::*;
    use Mode::*;
    Some(match (name, arity) {
        ("!=", 2) | ("\\=", 2) => (NotUnify, Value),
        ("==", 2) => (Identical, Value),
        ("!==", 2) | ("\\==", 2) => (NotIdentical, Value),
        ("<", 2) => (ArithCmp(CmpOp::Lt), Value),
        ("=<", 2) | ("<=", 2) => (ArithCmp(CmpOp::Le), Value),
        (">", 2) => (ArithCmp(CmpOp::Gt), Value),
        (">=", 2) => (ArithCmp(CmpOp::Ge), Value),
        ("=:=", 2) => (ArithEq, Value),
        ("=\\=", 2) => (ArithNe, Value),
        ("@<", 2) => (OrderCmp(CmpOp::Lt), Value),
        ("@=<", 2) => (OrderCmp(CmpOp::Le), Value),
        ("@>", 2) => (OrderCmp(CmpOp::Gt), Value),
        ("@>=", 2) => (OrderCmp(CmpOp::Ge), Value),
        ("write", 1) | ("print", 1) => (Write, Value),
        ("writeln", 1) | ("println", 1) => (Writeln, Value),
        ("nl", 0) => (Nl, Value),
        ("member", 2) => (Member, Value),
        ("select", 3) => (Select, Value),
        ("append", 3) => (Append3, Value),
        ("between", 3) => (Between, Value),
        ("length", 2) => (Length2, Value),
        ("ground", 1) => (Ground, Value),
        ("var", 1) => (IsVar, Value),
        ("nonvar", 1) => (NonVar, Value),
        ("integer", 1) | ("int", 1) => (IsInt, Value),
        ("atom", 1) => (IsAtom, Value),
        ("list", 1) | ("is_list", 1) => (IsList, Value),
        ("::", 2) | ("in", 2) => (Domain, Mode::Constraint),
        ("notin", 2) => (NotInDomain, Mode::Constraint),
        (op, 2) if CONSTRAINT_OPS.contains(&op) => (Builtin::Constraint, Mode::Constraint),
        ("#~", 1) => (Builtin::Constraint, Mode::Constraint),
        ("all_different", 1) | ("all_distinct", 1) => (AllDifferent, Mode::Constraint),
        ("table_in", 2) => (TableIn, Mode::Constraint),
        ("table_notin", 2) => (TableNotIn, Mode::Constraint),
        ("element", 3) => (Element, Mode::Constraint),
        ("circuit", 1) | ("cumulative", 4) | ("subcircuit", 1) => (UnsupportedGlobal, Mode::Constraint),
        ("solve", 1) => (Solve1, Mode::Constraint),
        ("solve", 2) => (Solve2, Mode::Constraint),
        ("plan", n) if (2..=4).contains(&n) => (Plan, Value),
        ("best_plan", n) if (2..=4).contains(&n) => (BestPlan, Value),
        _ => return None,
    })
}

#[derive(Debug)]
pub(crate) enum Goal {
    Fail,
    Unify(Expr, Expr),
    Call {
        pred: PredId,
        args: Box<[Expr]>,
    },
    /// Runs the clauses of `pred` without consulting its table.
    CallClauses {
        pred: PredId,
        args: Box<[Expr]>,
    },
    Builtin {
        b: Builtin,
        name: Sym,
        args: Box<[Expr]>,
    },
    Ite {
        cond: Rc<[Goal]>,
        then: Rc<[Goal]>,
        els: Rc<[Goal]>,
    },
    Or(Rc<[Goal]>, Rc<[Goal]>),
    Not(Rc<[Goal]>),
    /// Raises `unknown_predicate`.
    Undefined(String),
    /// Raises `unresolved_function_call` for a function that has no rules.
    UndefinedFn(Sym, Box<[Expr]>),
}

#[derive(Debug)]
pub(crate) enum Expr {
    Anon,
    Var(u32),
    Const(Term),
    Cons(Box<Expr>, Box<Expr>),
    Struct(Sym, Box<[Expr]>),
    Array(Box<[Expr]>),
    /// Evaluated to an integer.
    Arith(ArOp, Box<[Expr]>),
    /// Evaluated when all operands are integers, otherwise kept as a term.
    Sym(ArOp, Sym, Box<[Expr]>),
    Native(Native, Box<[Expr]>),
    Index(Box<Expr>, Box<[Expr]>),
    Findall(Box<Expr>, Rc<[Goal]>),
}

/// Symbols the engine refers to directly.
pub(crate) struct CommonSyms {
    pub dotdot: Sym,
    pub var_marker: Sym,
    pub ff: Sym,
    pub min: Sym,
    pub max: Sym,
}

impl CommonSyms {
    pub fn new(store: &mut Store) -> Self {
        CommonSyms {
            dotdot: store.sym(".."),
            var_marker: store.sym("$VAR"),
            ff: store.sym("ff"),
            min: store.sym("min"),
            max: store.sym("max"),
        }
    }
}

struct Ctx<'a> {
    eng: &'a mut Engine,
    vars: HashMap<String, u32>,
    nvars: u32,
    line: usize,
}

type CResult<T> = Result<T, ParseError>;

impl Ctx<'_> {
    fn err<T>(&self, msg: impl Into<String>) -> CResult<T> {
        Err(ParseError::new(self.line, 1, msg))
    }

    fn slot(&mut self, name: &str) -> u32 {
        if let Some(&s) = self.vars.get(name) {
            return s;
        }
        let s = self.fresh_slot();
        self.vars.insert(name.to_string(), s);
        s
    }

    fn fresh_slot(&mut self) -> u32 {
        let s = self.nvars;
        self.nvars += 1;
        s
    }

    fn pred(&self, name: &str, arity: usize, function: bool) -> Option<PredId> {
        self.eng
            .pred_index
            .get(&(name.to_string(), arity, function))
            .copied()
    }

    fn pattern(&mut self, a: &Ast) -> CResult<Pat> {
        Ok(match a {
            Ast::Var(v) if v == "_" => Pat::Anon,
            Ast::Var(v) => Pat::Var(self.slot(v)),
            Ast::As(v, p) => {
                let s = self.slot(v);
                Pat::As(s, Box::new(self.pattern(p)?))
            }
            Ast::Cons(h, t) => {
                let h = self.pattern(h)?;
                let t = self.pattern(t)?;
                match (&h, &t) {
                    (Pat::Const(a), Pat::Const(b)) => Pat::Const(self.eng.store.cons(*a, *b)),
                    _ => Pat::Cons(Box::new(h), Box::new(t)),
                }
            }
            Ast::Struct { name, args, .. } => {
                let ps = args
                    .iter()
                    .map(|x| self.pattern(x))
                    .collect::<CResult<Vec<_>>>()?;
                let f = self.eng.store.sym(name);
                if ps.iter().all(|p| matches!(p, Pat::Const(_))) {
                    let ts: Vec<Term> = ps
                        .iter()
                        .map(|p| match p {
                            Pat::Const(t) => *t,
                            _ => unreachable!(),
                        })
                        .collect();
                    Pat::Const(self.eng.store.structure(f, &ts))
                } else {
                    Pat::Struct(f, ps.into())
                }
            }
            Ast::Array(xs) => {
                let ps = xs
                    .iter()
                    .map(|x| self.pattern(x))
                    .collect::<CResult<Vec<_>>>()?;
                Pat::Array(ps.into())
            }
            other => Pat::Const(self.constant(other)?),
        })
    }

    fn constant(&mut self, a: &Ast) -> CResult<Term> {
        Ok(match a {
            Ast::Int(n) => Term::Int(*n),
            Ast::Atom(s) => self.eng.store.atom(s),
            Ast::Nil => Term::Nil,
            Ast::Str(s) => self.eng.store.string(s),
            other => return self.err(format!("unsupported pattern {other}")),
        })
    }

    fn goals(&mut self, a: &Ast) -> CResult<Rc<[Goal]>> {
        let mut out = Vec::new();
        self.goal(a, &mut out)?;
        Ok(out.into())
    }

    fn goal(&mut self, a: &Ast, out: &mut Vec<Goal>) -> CResult<()> {
        let (name, args): (&str, &[Ast]) = match a {
            Ast::Atom(n) => (n.as_str(), &[]),
            Ast::Struct { name, args, dollar: false } => (name.as_str(), args.as_slice()),
            Ast::Var(v) => return self.err(format!("variable {v} used as a goal")),
            other => return self.err(format!("not a goal: {other}")),
        };
        match (name, args.len()) {
            (",", 2) => {
                self.goal(&args[0], out)?;
                self.goal(&args[1], out)?;
            }
            ("true", 0) => {}
            ("fail", 0) | ("false", 0) => out.push(Goal::Fail),
            (";", 2) => {
                if args[0].is_op("->", 2) {
                    let Ast::Struct { args: ct, .. } = &args[0] else {
                        unreachable!()
                    };
                    let cond = self.goals(&ct[0])?;
                    let then = self.goals(&ct[1])?;
                    let els = self.goals(&args[1])?;
                    out.push(Goal::Ite { cond, then, els });
                } else {
                    let a = self.goals(&args[0])?;
                    let b = self.goals(&args[1])?;
                    out.push(Goal::Or(a, b));
                }
            }
            ("->", 2) => {
                let cond = self.goals(&args[0])?;
                let then = self.goals(&args[1])?;
                out.push(Goal::Ite {
                    cond,
                    then,
                    els: Rc::from(vec![Goal::Fail]),
                });
            }
            ("once", 1) => {
                let cond = self.goals(&args[0])?;
                out.push(Goal::Ite {
                    cond,
                    then: Rc::from(Vec::new()),
                    els: Rc::from(vec![Goal::Fail]),
                });
            }
            ("\\+", 1) | ("not", 1) => {
                let g = self.goals(&args[0])?;
                out.push(Goal::Not(g));
            }
            ("=", 2) => {
                let l = self.expr(&args[0], Mode::Value, out)?;
                let r = self.expr(&args[1], Mode::Value, out)?;
                out.push(Goal::Unify(l, r));
            }
            _ => {
                let n = args.len();
                if let Some(p) = self.pred(name, n, false) {
                    let args = self.exprs(args, Mode::Value, out)?;
                    out.push(Goal::Call {
                        pred: p,
                        args: args.into(),
                    });
                } else if let Some((b, mode)) = builtin(name, n) {
                    let mut es = Vec::with_capacity(n);
                    for (i, a) in args.iter().enumerate() {
                        // table_in/notin tuples and solve's variable list are plain values.
                        let m = match (b, i) {
                            (Builtin::TableIn | Builtin::TableNotIn, 1) => Mode::Value,
                            (Builtin::Solve2, 1) => Mode::Value,
                            _ => mode,
                        };
                        es.push(self.expr(a, m, out)?);
                    }
                    let sym = self.eng.store.sym(name);
                    out.push(Goal::Builtin {
                        b,
                        name: sym,
                        args: es.into(),
                    });
                } else if let Some(p) = self.pred(name, n + 1, true) {
                    let mut es = self.exprs(args, Mode::Value, out)?;
                    es.push(Expr::Anon);
                    out.push(Goal::Call {
                        pred: p,
                        args: es.into(),
                    });
                } else {
                    // Evaluate the arguments so that the error reflects the call.
                    out.push(Goal::Undefined(format!("{name}/{n}")));
                }
            }
        }
        Ok(())
    }

    fn exprs(&mut self, xs: &[Ast], mode: Mode, out: &mut Vec<Goal>) -> CResult<Vec<Expr>> {
        xs.iter().map(|x| self.expr(x, mode, out)).collect()
    }

    fn data_struct(&mut self, name: &str, es: Vec<Expr>) -> Expr {
        let f = self.eng.store.sym(name);
        if es.iter().all(|e| matches!(e, Expr::Const(_))) {
            let ts: Vec<Term> = es
                .iter()
                .map(|e| match e {
                    Expr::Const(t) => *t,
                    _ => unreachable!(),
                })
                .collect();
            return Expr::Const(self.eng.store.structure(f, &ts));
        }
        Expr::Struct(f, es.into())
    }

    fn expr(&mut self, a: &Ast, mode: Mode, out: &mut Vec<Goal>) -> CResult<Expr> {
        Ok(match a {
            Ast::Var(v) if v == "_" => Expr::Anon,
            Ast::Var(v) => Expr::Var(self.slot(v)),
            Ast::Int(_) | Ast::Atom(_) | Ast::Nil | Ast::Str(_) => Expr::Const(self.constant(a)?),
            Ast::Cons(h, t) => {
                let h = self.expr(h, mode, out)?;
                let t = self.expr(t, mode, out)?;
                match (&h, &t) {
                    (Expr::Const(x), Expr::Const(y)) => Expr::Const(self.eng.store.cons(*x, *y)),
                    _ => Expr::Cons(Box::new(h), Box::new(t)),
                }
            }
            Ast::Array(xs) => Expr::Array(self.exprs(xs, mode, out)?.into()),
            Ast::Index(x, idx) => {
                let x = self.expr(x, mode, out)?;
                let idx = self.exprs(idx, Mode::Value, out)?;
                Expr::Index(Box::new(x), idx.into())
            }
            Ast::Attr(x, name) => {
                let call = Ast::op(name, vec![(**x).clone()]);
                let m = if mode == Mode::Data { Mode::Value } else { mode };
                self.expr(&call, m, out)?
            }
            Ast::Qualified { name, args, .. } => {
                let call = Ast::op(name, args.clone().unwrap_or_default());
                self.expr(&call, mode, out)?
            }
            Ast::Struct { name, args, dollar } => {
                let n = args.len();
                let data = *dollar
                    || mode == Mode::Data
                    || (name == "," && n == 2)
                    || CONSTRAINT_OPS.contains(&name.as_str())
                    || ((name == ".." || name == ":") && n == 2);
                if data {
                    let m = if *dollar { Mode::Data } else { mode };
                    let es = self.exprs(args, m, out)?;
                    return Ok(self.data_struct(name, es));
                }
                if name == "findall" && n == 2 {
                    let mut goals = Vec::new();
                    self.goal(&args[1], &mut goals)?;
                    let tmpl = self.expr(&args[0], Mode::Value, &mut goals)?;
                    return Ok(Expr::Findall(Box::new(tmpl), goals.into()));
                }
                if name == "cond" && n == 3 {
                    let r = self.fresh_slot();
                    let cond = self.goals(&args[0])?;
                    let mut then = Vec::new();
                    let a = self.expr(&args[1], mode, &mut then)?;
                    then.push(Goal::Unify(Expr::Var(r), a));
                    let mut els = Vec::new();
                    let b = self.expr(&args[2], mode, &mut els)?;
                    els.push(Goal::Unify(Expr::Var(r), b));
                    out.push(Goal::Ite {
                        cond,
                        then: then.into(),
                        els: els.into(),
                    });
                    return Ok(Expr::Var(r));
                }
                if let Some(p) = self.pred(name, n + 1, true) {
                    let mut es = self.exprs(args, mode, out)?;
                    let r = self.fresh_slot();
                    es.push(Expr::Var(r));
                    out.push(Goal::Call {
                        pred: p,
                        args: es.into(),
                    });
                    return Ok(Expr::Var(r));
                }
                if let Some(op) = ar_op(name, n) {
                    let es = self.exprs(args, mode, out)?;
                    return Ok(if mode == Mode::Constraint {
                        let f = self.eng.store.sym(name);
                        Expr::Sym(op, f, es.into())
                    } else {
                        Expr::Arith(op, es.into())
                    });
                }
                if let Some(nf) = native_fn(name, n) {
                    let es = self.exprs(args, mode, out)?;
                    return Ok(Expr::Native(nf, es.into()));
                }
                let es = self.exprs(args, mode, out)?;
                let f = self.eng.store.sym(name);
                out.push(Goal::UndefinedFn(f, es.into()));
                Expr::Anon
            }
            Ast::As(..) => return self.err(format!("as-pattern outside a rule head: {a}")),
            Ast::Dot { .. }
            | Ast::Comprehension { .. }
            | Ast::Foreach { .. }
            | Ast::If { .. } => return self.err(format!("internal: unlowered construct {a}")),
        })
    }

    fn rule(&mut self, r: &SourceRule) -> CResult<Rule> {
        self.vars.clear();
        self.nvars = 0;
        self.line = r.line;
        let head_args: Vec<Ast> = match &r.head {
            Ast::Atom(_) => Vec::new(),
            Ast::Struct { args, .. } => args.clone(),
            other => return self.err(format!("invalid head {other}")),
        };
        let (head, horn) = if r.kind == RuleKind::Horn {
            let mut pre = Vec::new();
            let es = self.exprs(&head_args, Mode::Data, &mut pre)?;
            if !pre.is_empty() {
                return self.err("function call in a clause head");
            }
            (Vec::new(), Some(es.into_boxed_slice()))
        } else {
            let ps = head_args
                .iter()
                .map(|a| self.pattern(a))
                .collect::<CResult<Vec<_>>>()?;
            (ps, None)
        };
        let result = (r.kind == RuleKind::Function).then(|| self.fresh_slot());
        let cond = if r.cond.is_true() {
            None
        } else {
            Some(self.goals(&r.cond)?)
        };
        let mut body = Vec::new();
        self.goal(&r.body, &mut body)?;
        if let (Some(res), Some(ret)) = (result, &r.ret) {
            let e = self.expr(ret, Mode::Value, &mut body)?;
            body.push(Goal::Unify(Expr::Var(res), e));
        }
        Ok(Rule {
            nvars: self.nvars as usize,
            head: head.into(),
            horn,
            result,
            kind: r.kind,
            cond,
            body: body.into(),
        })
    }
}

fn register(eng: &mut Engine, key: &PredKey, def: &PredicateDef) -> PredId {
    let arity = key.arity + usize::from(key.function);
    let k = (key.name.clone(), arity, key.function);
    if let Some(&id) = eng.pred_index.get(&k) {
        return id;
    }
    let id = eng.preds.len();
    let sym = eng.store.sym(&key.name);
    eng.preds.push(Pred {
        name: key.name.clone(),
        sym,
        arity,
        function: key.function,
        rules: Rc::from(Vec::new()),
        table: def.table.clone(),
    });
    eng.pred_index.insert(k, id);
    id
}

pub(crate) fn load_program(eng: &mut Engine, prog: Program) -> Result<(), ParseError> {
    for imp in &prog.imports {
        if !eng.imports.contains(imp) {
            eng.imports.push(imp.clone());
        }
    }
    let ids: Vec<PredId> = prog
        .preds
        .iter()
        .map(|(k, d)| register(eng, k, d))
        .collect();
    for ((_, def), id) in prog.preds.iter().zip(ids) {
        let mut ctx = Ctx {
            eng,
            vars: HashMap::new(),
            nvars: 0,
            line: 0,
        };
        let mut rules = Vec::with_capacity(def.rules.len());
        for r in &def.rules {
            rules.push(Rc::new(ctx.rule(r)?));
        }
        let p = &mut eng.preds[id];
        let mut all: Vec<Rc<Rule>> = p.rules.iter().cloned().collect();
        all.extend(rules);
        p.rules = all.into();
        if def.table.is_some() {
            p.table = def.table.clone();
        }
    }
    Ok(())
}

/// Compiles a query into goals. Returns the goals, the named variables with
/// their environment slots, and the environment size.
pub(crate) fn compile_query(
    eng: &mut Engine,
    text: &str,
) -> Result<(Rc<[Goal]>, Vec<(String, u32)>, usize), ParseError> {
    let term = parser::parse_term(text)?;
    let mut names = Vec::new();
    term.vars_in_order(&mut names);
    names.retain(|n| !n.starts_with('_'));
    let key = PredKey {
        name: "$query".into(),
        arity: 0,
        function: false,
    };
    let mut def = PredicateDef::new(&key);
    def.rules.push(SourceRule {
        head: Ast::atom("$query"),
        cond: Ast::atom("true"),
        body: term,
        kind: RuleKind::NonBacktrackable,
        ret: None,
        line: 1,
    });
    let mut prog = Program::default();
    prog.preds.insert(key.clone(), def);
    eng.query_count += 1;
    let prefix = format!("$q{}_", eng.query_count);
    let mut lowered = parser::lower_program_with_prefix(prog, &prefix)?;
    let qdef = lowered.preds.shift_remove(&key).expect("query rule present");
    load_program(eng, lowered)?;
    let mut ctx = Ctx {
        eng,
        vars: HashMap::new(),
        nvars: 0,
        line: 1,
    };
    let mut slots = Vec::new();
    for n in &names {
        slots.push((n.clone(), ctx.slot(n)));
    }
    let rule = &qdef.rules[0];
    let mut body = Vec::new();
    ctx.goal(&rule.body, &mut body)?;
    Ok((body.into(), slots, ctx.nvars as usize))
}
