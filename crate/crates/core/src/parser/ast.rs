use std::collections::BTreeSet;
use std::fmt;

/// Surface syntax tree. Operators are plain [`Ast::Struct`] nodes named by
/// the operator.
#[derive(Clone, Debug, PartialEq)]
pub enum Ast {
    Var(String),
    Int(i64),
    Atom(String),
    Str(String),
    Nil,
    Cons(Box<Ast>, Box<Ast>),
    Struct {
        name: String,
        args: Vec<Ast>,
        /// Written with a `$` prefix: data, not a function call.
        dollar: bool,
    },
    Array(Vec<Ast>),
    /// `X[I1,...,In]`
    Index(Box<Ast>, Vec<Ast>),
    /// Raw `Recv.name` / `Recv.name(Args)` before OOP rewriting.
    Dot {
        recv: Box<Ast>,
        name: String,
        args: Option<Vec<Ast>>,
    },
    /// `A.attr`, the same as `get(A, attr)`.
    Attr(Box<Ast>, String),
    /// `module.name` or `module.name(Args)`.
    Qualified {
        module: String,
        name: String,
        args: Option<Vec<Ast>>,
    },
    /// As-pattern `V@Pattern`.
    As(String, Box<Ast>),
    Comprehension {
        template: Box<Ast>,
        items: Vec<LoopItem>,
    },
    Foreach {
        items: Vec<LoopItem>,
        body: Box<Ast>,
    },
    If {
        cond: Box<Ast>,
        then: Box<Ast>,
        otherwise: Box<Ast>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum LoopItem {
    Iter { pattern: Ast, domain: Ast },
    Cond(Ast),
}

impl Ast {
    pub fn atom(name: &str) -> Ast {
        Ast::Atom(name.to_string())
    }

    pub fn var(name: &str) -> Ast {
        Ast::Var(name.to_string())
    }

    pub fn op(name: &str, args: Vec<Ast>) -> Ast {
        Ast::Struct {
            name: name.to_string(),
            args,
            dollar: false,
        }
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Ast::Atom(a) if a == "true")
    }

    /// Name and arguments when this node is a (non-dollar) structure.
    pub fn as_struct(&self) -> Option<(&str, &[Ast])> {
        match self {
            Ast::Struct { name, args, .. } => Some((name, args)),
            Ast::Atom(name) => Some((name, &[])),
            _ => None,
        }
    }

    pub fn is_op(&self, op: &str, arity: usize) -> bool {
        matches!(self, Ast::Struct { name, args, .. } if name == op && args.len() == arity)
    }

    /// Flattens a `','`-conjunction into its goals.
    pub fn conjuncts(&self) -> Vec<Ast> {
        let mut out = Vec::new();
        let mut cur = self;
        loop {
            match cur {
                Ast::Struct {
                    name,
                    args,
                    dollar: false,
                } if name == "," && args.len() == 2 => {
                    out.push(args[0].clone());
                    cur = &args[1];
                }
                _ => {
                    out.push(cur.clone());
                    return out;
                }
            }
        }
    }

    pub fn conj(goals: Vec<Ast>) -> Ast {
        let mut goals: Vec<Ast> = goals.into_iter().filter(|g| !g.is_true()).collect();
        let Some(mut acc) = goals.pop() else {
            return Ast::atom("true");
        };
        while let Some(g) = goals.pop() {
            acc = Ast::op(",", vec![g, acc]);
        }
        acc
    }

    /// Named variables in order of first occurrence (anonymous `_` excluded).
    pub fn vars_in_order(&self, out: &mut Vec<String>) {
        let push = |v: &String, out: &mut Vec<String>| {
            if v != "_" && !out.contains(v) {
                out.push(v.clone());
            }
        };
        match self {
            Ast::Var(v) => push(v, out),
            Ast::As(v, p) => {
                push(v, out);
                p.vars_in_order(out);
            }
            Ast::Int(_) | Ast::Atom(_) | Ast::Str(_) | Ast::Nil => {}
            Ast::Cons(h, t) => {
                h.vars_in_order(out);
                t.vars_in_order(out);
            }
            Ast::Struct { args, .. } | Ast::Array(args) => {
                for a in args {
                    a.vars_in_order(out);
                }
            }
            Ast::Index(x, idx) => {
                x.vars_in_order(out);
                for a in idx {
                    a.vars_in_order(out);
                }
            }
            Ast::Dot { recv, args, .. } => {
                recv.vars_in_order(out);
                for a in args.iter().flatten() {
                    a.vars_in_order(out);
                }
            }
            Ast::Attr(x, _) => x.vars_in_order(out),
            Ast::Qualified { args, .. } => {
                for a in args.iter().flatten() {
                    a.vars_in_order(out);
                }
            }
            Ast::Comprehension { template, items } => {
                for it in items {
                    it.vars_in_order(out);
                }
                template.vars_in_order(out);
            }
            Ast::Foreach { items, body } => {
                for it in items {
                    it.vars_in_order(out);
                }
                body.vars_in_order(out);
            }
            Ast::If {
                cond,
                then,
                otherwise,
            } => {
                cond.vars_in_order(out);
                then.vars_in_order(out);
                otherwise.vars_in_order(out);
            }
        }
    }

    pub fn var_set(&self) -> BTreeSet<String> {
        let mut v = Vec::new();
        self.vars_in_order(&mut v);
        v.into_iter().collect()
    }

    /// Applies `f` bottom-up to every node.
    pub fn map(self, f: &mut impl FnMut(Ast) -> Ast) -> Ast {
        let node = match self {
            Ast::Cons(h, t) => Ast::Cons(Box::new(h.map(f)), Box::new(t.map(f))),
            Ast::Struct { name, args, dollar } => Ast::Struct {
                name,
                args: args.into_iter().map(|a| a.map(f)).collect(),
                dollar,
            },
            Ast::Array(xs) => Ast::Array(xs.into_iter().map(|a| a.map(f)).collect()),
            Ast::Index(x, idx) => Ast::Index(
                Box::new(x.map(f)),
                idx.into_iter().map(|a| a.map(f)).collect(),
            ),
            Ast::Dot { recv, name, args } => Ast::Dot {
                recv: Box::new(recv.map(f)),
                name,
                args: args.map(|xs| xs.into_iter().map(|a| a.map(f)).collect()),
            },
            Ast::Attr(x, n) => Ast::Attr(Box::new(x.map(f)), n),
            Ast::Qualified { module, name, args } => Ast::Qualified {
                module,
                name,
                args: args.map(|xs| xs.into_iter().map(|a| a.map(f)).collect()),
            },
            Ast::As(v, p) => Ast::As(v, Box::new(p.map(f))),
            Ast::Comprehension { template, items } => Ast::Comprehension {
                template: Box::new(template.map(f)),
                items: items.into_iter().map(|i| i.map(f)).collect(),
            },
            Ast::Foreach { items, body } => Ast::Foreach {
                items: items.into_iter().map(|i| i.map(f)).collect(),
                body: Box::new(body.map(f)),
            },
            Ast::If {
                cond,
                then,
                otherwise,
            } => Ast::If {
                cond: Box::new(cond.map(f)),
                then: Box::new(then.map(f)),
                otherwise: Box::new(otherwise.map(f)),
            },
            leaf => leaf,
        };
        f(node)
    }
}

impl LoopItem {
    fn vars_in_order(&self, out: &mut Vec<String>) {
        match self {
            LoopItem::Iter { pattern, domain } => {
                pattern.vars_in_order(out);
                domain.vars_in_order(out);
            }
            LoopItem::Cond(c) => c.vars_in_order(out),
        }
    }

    pub fn map(self, f: &mut impl FnMut(Ast) -> Ast) -> LoopItem {
        match self {
            LoopItem::Iter { pattern, domain } => LoopItem::Iter {
                pattern: pattern.map(f),
                domain: domain.map(f),
            },
            LoopItem::Cond(c) => LoopItem::Cond(c.map(f)),
        }
    }
}

pub(crate) fn is_plain_atom(name: &str) -> bool {
    let mut cs = name.chars();
    match cs.next() {
        Some(c) if c.is_lowercase() => cs.all(|c| c.is_alphanumeric() || c == '_'),
        _ => false,
    }
}

const PREFIX_OPS: &[&str] = &["-", "+", "\\+", "not", "#~", "~", "\\"];

fn write_atom(f: &mut fmt::Formatter<'_>, name: &str) -> fmt::Result {
    if is_plain_atom(name) && !super::grammar::is_reserved_word(name) {
        write!(f, "{name}")
    } else {
        write!(f, "'")?;
        for c in name.chars() {
            match c {
                '\'' => write!(f, "\\'")?,
                '\\' => write!(f, "\\\\")?,
                '\n' => write!(f, "\\n")?,
                c => write!(f, "{c}")?,
            }
        }
        write!(f, "'")
    }
}

fn write_args(f: &mut fmt::Formatter<'_>, args: &[Ast]) -> fmt::Result {
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{a}")?;
    }
    Ok(())
}

fn write_items(f: &mut fmt::Formatter<'_>, items: &[LoopItem]) -> fmt::Result {
    for (i, it) in items.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        match it {
            LoopItem::Iter { pattern, domain } => write!(f, "({pattern} in {domain})")?,
            LoopItem::Cond(c) => write!(f, "{c}")?,
        }
    }
    Ok(())
}

/// Fully parenthesized rendering that re-parses to the same tree.
impl fmt::Display for Ast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ast::Var(v) => write!(f, "{v}"),
            Ast::Int(n) if *n < 0 => write!(f, "({n})"),
            Ast::Int(n) => write!(f, "{n}"),
            Ast::Atom(a) => write_atom(f, a),
            Ast::Str(s) => {
                write!(f, "\"")?;
                for c in s.chars() {
                    match c {
                        '"' => write!(f, "\\\"")?,
                        '\\' => write!(f, "\\\\")?,
                        '\n' => write!(f, "\\n")?,
                        c => write!(f, "{c}")?,
                    }
                }
                write!(f, "\"")
            }
            Ast::Nil => write!(f, "[]"),
            Ast::Cons(..) => {
                write!(f, "[")?;
                let mut cur = self;
                let mut first = true;
                loop {
                    match cur {
                        Ast::Cons(h, t) => {
                            if !first {
                                write!(f, ",")?;
                            }
                            first = false;
                            write!(f, "{h}")?;
                            cur = t;
                        }
                        Ast::Nil => break,
                        other => {
                            write!(f, "|{other}")?;
                            break;
                        }
                    }
                }
                write!(f, "]")
            }
            Ast::Struct { name, args, dollar } => {
                if *dollar {
                    write!(f, "$")?;
                }
                if args.len() == 2 && super::grammar::infix_op(name).is_some() {
                    write!(f, "({} {name} {})", args[0], args[1])
                } else if args.len() == 1 && PREFIX_OPS.contains(&name.as_str()) {
                    write!(f, "({name} ({}))", args[0])
                } else {
                    write_atom(f, name)?;
                    write!(f, "(")?;
                    write_args(f, args)?;
                    write!(f, ")")
                }
            }
            Ast::Array(xs) => {
                write!(f, "{{")?;
                write_args(f, xs)?;
                write!(f, "}}")
            }
            Ast::Index(x, idx) => {
                write!(f, "{x}[")?;
                write_args(f, idx)?;
                write!(f, "]")
            }
            Ast::Dot { recv, name, args } => {
                write!(f, "{recv}.{name}")?;
                if let Some(a) = args {
                    write!(f, "(")?;
                    write_args(f, a)?;
                    write!(f, ")")?;
                }
                Ok(())
            }
            Ast::Attr(x, n) => write!(f, "{x}.{n}"),
            Ast::Qualified { module, name, args } => {
                write!(f, "{module}.{name}")?;
                if let Some(a) = args {
                    write!(f, "(")?;
                    write_args(f, a)?;
                    write!(f, ")")?;
                }
                Ok(())
            }
            Ast::As(v, p) => write!(f, "{v}@{p}"),
            Ast::Comprehension { template, items } => {
                write!(f, "[{template} : ")?;
                write_items(f, items)?;
                write!(f, "]")
            }
            Ast::Foreach { items, body } => {
                write!(f, "foreach(")?;
                write_items(f, items)?;
                write!(f, ") {body} end")
            }
            Ast::If {
                cond,
                then,
                otherwise,
            } => write!(f, "if {cond} then {then} else {otherwise} end"),
        }
    }
}
