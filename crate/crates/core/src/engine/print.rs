use std::fmt::Write;

use crate::parser::{infix_op, Assoc};
use crate::term::{Term, View};

use super::Engine;

impl Engine {
    /// Text of a term with bindings followed. Operators print infix.
    pub fn format_term(&self, t: Term) -> String {
        let mut s = String::new();
        self.fmt_term(&mut s, t, 1200, &mut Vec::new());
        s
    }

    /// Text for `write`/`print`: like [`Engine::format_term`], except that a
    /// string prints as its characters.
    pub(crate) fn display_text(&self, t: Term) -> String {
        if let Some(s) = self.as_string(t) {
            return s;
        }
        self.format_term(t)
    }

    /// A non-empty list of single-character atoms.
    fn as_string(&self, t: Term) -> Option<String> {
        let items = self.list_vec(t).ok()?;
        if items.is_empty() {
            return None;
        }
        let mut s = String::new();
        for x in items {
            match self.deref(x) {
                Term::Atom(a) => {
                    let name = self.store.sym_name(a);
                    let mut cs = name.chars();
                    let c = cs.next()?;
                    if cs.next().is_some() {
                        return None;
                    }
                    s.push(c);
                }
                _ => return None,
            }
        }
        Some(s)
    }

    /// `path` holds the non-ground compounds being printed; meeting one
    /// again means the term is cyclic.
    fn fmt_term(&self, out: &mut String, t: Term, max_prec: u32, path: &mut Vec<Term>) {
        let t = self.deref(t);
        if let Term::Node(_) = t {
            if !self.store.is_ground(t) {
                if path.contains(&t) {
                    out.push_str("...");
                    return;
                }
                path.push(t);
                self.fmt_node(out, t, max_prec, path);
                path.pop();
                return;
            }
        }
        self.fmt_node(out, t, max_prec, path);
    }

    fn fmt_node(&self, out: &mut String, t: Term, max_prec: u32, path: &mut Vec<Term>) {
        match self.store.view(t) {
            View::Var(v) => {
                let _ = write!(out, "_{}", v.0);
            }
            View::Atom(s) => out.push_str(self.store.sym_name(s)),
            View::Int(n) => {
                let _ = write!(out, "{n}");
            }
            View::Nil => out.push_str("[]"),
            View::Cons(..) => {
                out.push('[');
                let mut cur = t;
                let mut first = true;
                loop {
                    match self.store.view(cur) {
                        View::Cons(h, tl) => {
                            if !first {
                                out.push(',');
                            }
                            first = false;
                            self.fmt_term(out, h, 999, path);
                            cur = self.deref(tl);
                            if cur == t || (!self.store.is_ground(cur) && path.contains(&cur)) {
                                out.push_str("|...");
                                break;
                            }
                        }
                        View::Nil => break,
                        _ => {
                            out.push('|');
                            self.fmt_term(out, cur, 999, path);
                            break;
                        }
                    }
                }
                out.push(']');
            }
            View::Array(xs) => {
                out.push('{');
                for (i, &a) in xs.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    self.fmt_term(out, a, 999, path);
                }
                out.push('}');
            }
            View::Struct(f, args) => {
                let name = self.store.sym_name(f);
                if args.len() == 2 && name != "," {
                    if let Some((prec, assoc)) = infix_op(name) {
                        let (lp, rp) = match assoc {
                            Assoc::Xfx => (prec - 1, prec - 1),
                            Assoc::Xfy => (prec - 1, prec),
                            Assoc::Yfx => (prec, prec - 1),
                        };
                        let paren = prec > max_prec;
                        if paren {
                            out.push('(');
                        }
                        self.fmt_term(out, args[0], lp, path);
                        let alpha = name.chars().all(|c| c.is_ascii_alphabetic());
                        if alpha {
                            let _ = write!(out, " {name} ");
                        } else {
                            out.push_str(name);
                        }
                        let start = out.len();
                        self.fmt_term(out, args[1], rp, path);
                        if !alpha && out[start..].starts_with('-') {
                            out.insert(start, ' ');
                        }
                        if paren {
                            out.push(')');
                        }
                        return;
                    }
                }
                if args.len() == 2 && name == "," {
                    out.push('(');
                    self.fmt_term(out, args[0], 999, path);
                    out.push(',');
                    self.fmt_term(out, args[1], 1000, path);
                    out.push(')');
                    return;
                }
                if args.len() == 1 && name == "-" {
                    if let Term::Int(_) | Term::Var(_) | Term::Atom(_) = self.deref(args[0]) {
                        out.push('-');
                        let start = out.len();
                        self.fmt_term(out, args[0], 200, path);
                        if out[start..].starts_with('-') {
                            out.insert(start, ' ');
                        }
                        return;
                    }
                }
                out.push_str(name);
                out.push('(');
                for (i, &a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    self.fmt_term(out, a, 999, path);
                }
                out.push(')');
            }
        }
    }
}
