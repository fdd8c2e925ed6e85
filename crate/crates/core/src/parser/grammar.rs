use super::ast::{Ast, LoopItem};
use super::lexer::{tokenize, Tok, Token};
use super::{
    Mode, ModeTuple, ParseError, PredKey, PredicateDef, Program, RuleKind, SourceRule, TableDecl,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Assoc {
    Xfx,
    Xfy,
    Yfx,
}

pub fn infix_op(name: &str) -> Option<(u32, Assoc)> {
    use Assoc::*;
    Some(match name {
        "=>" | "?=>" | ":-" => (1200, Xfx),
        ";" => (1100, Xfy),
        "->" => (1050, Xfy),
        "," => (1000, Xfy),
        "#<=>" => (760, Yfx),
        "#=>" => (750, Xfy),
        "#\\/" => (740, Yfx),
        "#^" => (730, Yfx),
        "#/\\" => (720, Yfx),
        "=" | "!=" | "==" | "!==" | "=:=" | "=\\=" | "<" | "=<" | ">" | ">=" | ":=" | "::"
        | "#=" | "#!=" | "#<" | "#=<" | "#<=" | "#>" | "#>=" | "in" | "notin" | "@<" | "@>"
        | "@=<" | "@>=" => (700, Xfx),
        ".." => (600, Xfx),
        "++" => (550, Xfy),
        "+" | "-" | "/\\" | "\\/" | "xor" => (500, Yfx),
        "*" | "/" | "//" | "div" | "mod" | "rem" | "<<" | ">>" => (400, Yfx),
        "**" | "^" => (200, Xfy),
        _ => return None,
    })
}

fn prefix_op(name: &str) -> Option<u32> {
    Some(match name {
        "\\+" | "not" => 900,
        "#~" => 710,
        "-" | "+" | "~" | "\\" => 200,
        _ => return None,
    })
}

const ALNUM_OPS: &[&str] = &["in", "notin", "div", "mod", "rem", "xor", "not"];
const KEYWORDS: &[&str] = &["foreach", "if", "then", "else", "elseif", "end"];

/// Words that cannot be written as bare atoms.
pub fn is_reserved_word(name: &str) -> bool {
    ALNUM_OPS.contains(&name) || KEYWORDS.contains(&name)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Token {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)]
    }

    fn cur(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let t = self.cur();
        Err(ParseError::new(t.line, t.col, msg))
    }

    fn expect(&mut self, tok: Tok, what: &str) -> PResult<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected {what}, found {}", describe(self.peek())))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Atom { name, quoted: false } if name == kw)
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<()> {
        if self.is_keyword(kw) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected '{kw}', found {}", describe(self.peek())))
        }
    }

    /// Infix operator name at the current position, if any.
    fn peek_infix(&self) -> Option<String> {
        match self.peek() {
            Tok::Op(op) if infix_op(op).is_some() => Some(op.clone()),
            Tok::Comma => Some(",".into()),
            Tok::Atom {
                name,
                quoted: false,
            } if infix_op(name).is_some() => Some(name.clone()),
            _ => None,
        }
    }

    fn starts_term(&self) -> bool {
        match self.peek() {
            Tok::Int(_)
            | Tok::Var(_)
            | Tok::Str(_)
            | Tok::LParen
            | Tok::LBracket
            | Tok::LBrace
            | Tok::Dollar => true,
            Tok::Atom { name, quoted } => {
                *quoted
                    || !matches!(name.as_str(), "then" | "else" | "elseif" | "end")
                        && infix_op(name).is_none()
            }
            Tok::Op(op) => prefix_op(op).is_some(),
            _ => false,
        }
    }

    fn parse(&mut self, max: u32) -> PResult<Ast> {
        Ok(self.parse_expr(max)?.0)
    }

    fn parse_expr(&mut self, max: u32) -> PResult<(Ast, u32)> {
        let (mut left, mut left_prec) = self.parse_prefix(max)?;
        while let Some(name) = self.peek_infix() {
            let (p, assoc) = infix_op(&name).expect("peek_infix checked the table");
            if p > max {
                break;
            }
            let (lmax, rmax) = match assoc {
                Assoc::Xfx => (p - 1, p - 1),
                Assoc::Xfy => (p - 1, p),
                Assoc::Yfx => (p, p - 1),
            };
            if left_prec > lmax {
                break;
            }
            self.bump();
            let right = self.parse(rmax)?;
            left = Ast::op(&name, vec![left, right]);
            left_prec = p;
        }
        Ok((left, left_prec))
    }

    fn parse_prefix(&mut self, max: u32) -> PResult<(Ast, u32)> {
        let op = match self.peek() {
            Tok::Op(op) if prefix_op(op).is_some() => Some(op.clone()),
            Tok::Atom {
                name,
                quoted: false,
            } if prefix_op(name).is_some() => Some(name.clone()),
            _ => None,
        };
        if let Some(op) = op {
            let p = prefix_op(&op).expect("checked");
            if op == "-" || op == "+" {
                if let Tok::Int(n) = self.peek_at(1).tok {
                    self.bump();
                    self.bump();
                    let v = if op == "-" { -n } else { n };
                    return Ok((self.postfix(Ast::Int(v))?, 0));
                }
            }
            self.bump();
            if p <= max && self.starts_term() {
                let arg = self.parse(p)?;
                return Ok((Ast::op(&op, vec![arg]), p));
            }
            return Ok((Ast::Atom(op), 0));
        }
        Ok((self.parse_primary()?, 0))
    }

    fn parse_args(&mut self, close: Tok, what: &str) -> PResult<Vec<Ast>> {
        let mut args = Vec::new();
        if *self.peek() == close {
            self.bump();
            return Ok(args);
        }
        loop {
            args.push(self.parse(999)?);
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                t if *t == close => {
                    self.bump();
                    return Ok(args);
                }
                t => return self.err(format!("expected ',' or {what}, found {}", describe(t))),
            }
        }
    }

    fn parse_loop_items(&mut self, close: Tok, what: &str) -> PResult<Vec<LoopItem>> {
        let raw = self.parse_args(close, what)?;
        let items: Vec<LoopItem> = raw
            .into_iter()
            .map(|a| match a {
                Ast::Struct {
                    name,
                    mut args,
                    dollar: false,
                } if name == "in" && args.len() == 2 => {
                    let domain = args.pop().expect("arity 2");
                    let pattern = args.pop().expect("arity 2");
                    LoopItem::Iter { pattern, domain }
                }
                other => LoopItem::Cond(other),
            })
            .collect();
        if !matches!(items.first(), Some(LoopItem::Iter { .. })) {
            return self.err("a loop must start with an iterator 'E in D'");
        }
        Ok(items)
    }

    fn parse_primary(&mut self) -> PResult<Ast> {
        let tok = self.bump();
        let node = match tok.tok {
            Tok::Int(n) => Ast::Int(n),
            Tok::Str(s) => Ast::Str(s),
            Tok::Var(v) => {
                if matches!(self.peek(), Tok::Op(op) if op == "@") && !self.cur().spaced {
                    self.bump();
                    let pat = self.parse_primary()?;
                    return Ok(Ast::As(v, Box::new(pat)));
                }
                Ast::Var(v)
            }
            Tok::Atom { name, quoted } => {
                let keyword = !quoted && (name == "foreach" || name == "if");
                if !keyword && *self.peek() == Tok::LParen && !self.cur().spaced {
                    self.bump();
                    let args = self.parse_args(Tok::RParen, "')'")?;
                    Ast::Struct {
                        name,
                        args,
                        dollar: false,
                    }
                } else if !quoted && name == "foreach" {
                    self.expect(Tok::LParen, "'(' after foreach")?;
                    let items = self.parse_loop_items(Tok::RParen, "')'")?;
                    let body = self.parse(1200)?;
                    self.expect_keyword("end")?;
                    Ast::Foreach {
                        items,
                        body: Box::new(body),
                    }
                } else if !quoted && name == "if" {
                    return self.parse_if();
                } else if !quoted && KEYWORDS.contains(&name.as_str()) {
                    return Err(ParseError::new(
                        tok.line,
                        tok.col,
                        format!("unexpected keyword '{name}'"),
                    ));
                } else if !quoted && ALNUM_OPS.contains(&name.as_str()) {
                    return Err(ParseError::new(
                        tok.line,
                        tok.col,
                        format!("unexpected operator '{name}'"),
                    ));
                } else if name == "[]" {
                    Ast::Nil
                } else {
                    Ast::Atom(name)
                }
            }
            Tok::Op(op) => {
                // An operator used as an atom, e.g. the `+` in a table mode.
                if *self.peek() == Tok::LParen && !self.cur().spaced {
                    self.bump();
                    let args = self.parse_args(Tok::RParen, "')'")?;
                    Ast::Struct {
                        name: op,
                        args,
                        dollar: false,
                    }
                } else {
                    Ast::Atom(op)
                }
            }
            Tok::LParen => {
                let inner = self.parse(1200)?;
                self.expect(Tok::RParen, "')'")?;
                inner
            }
            Tok::LBracket => self.parse_list()?,
            Tok::LBrace => Ast::Array(self.parse_args(Tok::RBrace, "'}'")?),
            Tok::Dollar => {
                let inner = self.parse(699)?;
                return Ok(match inner {
                    Ast::Struct { name, args, .. } => Ast::Struct {
                        name,
                        args,
                        dollar: true,
                    },
                    other => other,
                });
            }
            other => {
                return Err(ParseError::new(
                    tok.line,
                    tok.col,
                    format!("unexpected {}", describe(&other)),
                ))
            }
        };
        self.postfix(node)
    }

    fn postfix(&mut self, mut node: Ast) -> PResult<Ast> {
        loop {
            match self.peek() {
                Tok::LBracket if !self.cur().spaced && !matches!(node, Ast::Int(_)) => {
                    self.bump();
                    let idx = self.parse_args(Tok::RBracket, "']'")?;
                    if idx.is_empty() {
                        return self.err("empty index");
                    }
                    node = Ast::Index(Box::new(node), idx);
                }
                Tok::Dot => {
                    self.bump();
                    let name = match self.bump().tok {
                        Tok::Atom { name, .. } => name,
                        other => {
                            return self.err(format!(
                                "expected a name after '.', found {}",
                                describe(&other)
                            ))
                        }
                    };
                    let args = if *self.peek() == Tok::LParen && !self.cur().spaced {
                        self.bump();
                        Some(self.parse_args(Tok::RParen, "')'")?)
                    } else {
                        None
                    };
                    node = Ast::Dot {
                        recv: Box::new(node),
                        name,
                        args,
                    };
                }
                _ => return Ok(node),
            }
        }
    }

    fn parse_list(&mut self) -> PResult<Ast> {
        if *self.peek() == Tok::RBracket {
            self.bump();
            return self.postfix(Ast::Nil);
        }
        let first = self.parse(999)?;
        if matches!(self.peek(), Tok::Op(op) if op == ":") {
            self.bump();
            let items = self.parse_loop_items(Tok::RBracket, "']'")?;
            return Ok(Ast::Comprehension {
                template: Box::new(first),
                items,
            });
        }
        let mut items = vec![first];
        let mut tail = Ast::Nil;
        loop {
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                    items.push(self.parse(999)?);
                }
                Tok::Bar => {
                    self.bump();
                    tail = self.parse(999)?;
                    self.expect(Tok::RBracket, "']'")?;
                    break;
                }
                Tok::RBracket => {
                    self.bump();
                    break;
                }
                t => return self.err(format!("expected ',', '|' or ']', found {}", describe(t))),
            }
        }
        Ok(items
            .into_iter()
            .rev()
            .fold(tail, |acc, h| Ast::Cons(Box::new(h), Box::new(acc))))
    }

    fn parse_if(&mut self) -> PResult<Ast> {
        let cond = self.parse(1200)?;
        self.expect_keyword("then")?;
        let then = self.parse(1200)?;
        let otherwise = if self.is_keyword("elseif") {
            self.bump();
            self.parse_if()?
        } else if self.is_keyword("else") {
            self.bump();
            let e = self.parse(1200)?;
            self.expect_keyword("end")?;
            e
        } else {
            self.expect_keyword("end")?;
            Ast::atom("true")
        };
        Ok(Ast::If {
            cond: Box::new(cond),
            then: Box::new(then),
            otherwise: Box::new(otherwise),
        })
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Int(n) => format!("integer {n}"),
        Tok::Var(v) => format!("variable {v}"),
        Tok::Atom { name, .. } => format!("'{name}'"),
        Tok::Str(_) => "string".into(),
        Tok::Op(op) => format!("'{op}'"),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
        Tok::LBracket => "'['".into(),
        Tok::RBracket => "']'".into(),
        Tok::LBrace => "'{'".into(),
        Tok::RBrace => "'}'".into(),
        Tok::Comma => "','".into(),
        Tok::Bar => "'|'".into(),
        Tok::Dollar => "'$'".into(),
        Tok::Dot => "'.'".into(),
        Tok::End => "end of clause".into(),
        Tok::Eof => "end of input".into(),
    }
}

/// `A.f(B)` becomes `f(A,B)`; `A.attr` becomes an attribute access; an atom
/// receiver is a module qualifier.
pub fn rewrite_oop(t: Ast) -> Ast {
    t.map(&mut |node| match node {
        Ast::Dot { recv, name, args } => match (*recv, args) {
            (Ast::Atom(module), args) => Ast::Qualified { module, name, args },
            (recv, Some(mut args)) => {
                args.insert(0, recv);
                Ast::Struct {
                    name,
                    args,
                    dollar: false,
                }
            }
            (recv, None) => Ast::Attr(Box::new(recv), name),
        },
        other => other,
    })
}

/// Parses a single term (no trailing `.` required).
pub fn parse_term(text: &str) -> Result<Ast, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0 };
    let t = p.parse(1200)?;
    if *p.peek() == Tok::End {
        p.bump();
    }
    if *p.peek() != Tok::Eof {
        return p.err(format!("unexpected {} after term", describe(p.peek())));
    }
    Ok(rewrite_oop(t))
}

fn parse_modes(p: &mut Parser) -> PResult<ModeTuple> {
    let (line, col) = (p.cur().line, p.cur().col);
    let args = p.parse_args(Tok::RParen, "')'")?;
    let mut modes = Vec::new();
    for a in &args {
        modes.push(match a {
            Ast::Atom(s) if s == "+" => Mode::Plus,
            Ast::Atom(s) if s == "-" => Mode::Minus,
            Ast::Atom(s) if s == "min" => Mode::Min,
            Ast::Atom(s) if s == "max" => Mode::Max,
            Ast::Atom(s) if s == "nt" => Mode::Nt,
            other => {
                return Err(ParseError::new(
                    line,
                    col,
                    format!("unknown table mode {other}"),
                ))
            }
        });
    }
    let tuple = ModeTuple(modes);
    tuple
        .validate()
        .map_err(|m| ParseError::new(line, col, m))?;
    Ok(tuple)
}

fn split_head_cond(lhs: Ast) -> (Ast, Ast) {
    match lhs {
        Ast::Struct {
            name,
            mut args,
            dollar: false,
        } if name == "," && args.len() == 2 => {
            let cond = args.pop().expect("arity 2");
            let head = args.pop().expect("arity 2");
            (head, cond)
        }
        other => (other, Ast::atom("true")),
    }
}

fn head_key(head: &Ast, function: bool, line: usize, col: usize) -> PResult<PredKey> {
    match head {
        Ast::Atom(name) => Ok(PredKey {
            name: name.clone(),
            arity: 0,
            function,
        }),
        Ast::Struct {
            name,
            args,
            dollar: false,
        } => Ok(PredKey {
            name: name.clone(),
            arity: args.len(),
            function,
        }),
        other => Err(ParseError::new(
            line,
            col,
            format!("invalid rule head {other}"),
        )),
    }
}

fn classify(term: Ast, line: usize, col: usize) -> PResult<(PredKey, SourceRule)> {
    let (kind, lhs, body) = match term {
        Ast::Struct {
            name,
            mut args,
            dollar: false,
        } if args.len() == 2 && matches!(name.as_str(), "=>" | "?=>" | ":-") => {
            let body = args.pop().expect("arity 2");
            let lhs = args.pop().expect("arity 2");
            let kind = match name.as_str() {
                "=>" => RuleKind::NonBacktrackable,
                "?=>" => RuleKind::Backtrackable,
                _ => RuleKind::Horn,
            };
            (kind, lhs, body)
        }
        other => (RuleKind::Horn, other, Ast::atom("true")),
    };
    if kind == RuleKind::Horn {
        if let Ast::Struct {
            name,
            mut args,
            dollar: false,
        } = lhs.clone()
        {
            if name == "=" && args.len() == 2 && body.is_true() {
                // `F = Exp.`
                let ret = args.pop().expect("arity 2");
                let head = args.pop().expect("arity 2");
                let key = head_key(&head, true, line, col)?;
                return Ok((
                    key,
                    SourceRule {
                        head,
                        cond: Ast::atom("true"),
                        body: Ast::atom("true"),
                        kind: RuleKind::Function,
                        ret: Some(ret),
                        line,
                    },
                ));
            }
        }
        let key = head_key(&lhs, false, line, col)?;
        return Ok((
            key,
            SourceRule {
                head: lhs,
                cond: Ast::atom("true"),
                body,
                kind,
                ret: None,
                line,
            },
        ));
    }
    let (head, cond) = split_head_cond(lhs);
    if let Ast::Struct {
        name,
        mut args,
        dollar: false,
    } = head.clone()
    {
        if name == "=" && args.len() == 2 {
            if kind == RuleKind::Backtrackable {
                return Err(ParseError::new(
                    line,
                    col,
                    "function rules cannot be backtrackable",
                ));
            }
            let ret = args.pop().expect("arity 2");
            let fhead = args.pop().expect("arity 2");
            let key = head_key(&fhead, true, line, col)?;
            return Ok((
                key,
                SourceRule {
                    head: fhead,
                    cond,
                    body,
                    kind: RuleKind::Function,
                    ret: Some(ret),
                    line,
                },
            ));
        }
    }
    let key = head_key(&head, false, line, col)?;
    Ok((
        key,
        SourceRule {
            head,
            cond,
            body,
            kind,
            ret: None,
            line,
        },
    ))
}

pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0 };
    let mut prog = Program::default();
    let mut pending_table: Option<(TableDecl, usize, usize)> = None;

    while *p.peek() != Tok::Eof {
        let (line, col) = (p.cur().line, p.cur().col);
        if p.is_keyword("import") && !matches!(p.peek_at(1).tok, Tok::LParen) {
            p.bump();
            loop {
                match p.bump().tok {
                    Tok::Atom { name, .. } => prog.imports.push(name),
                    other => {
                        return Err(ParseError::new(
                            line,
                            col,
                            format!("bad import: {}", describe(&other)),
                        ))
                    }
                }
                match p.peek() {
                    Tok::Comma => {
                        p.bump();
                    }
                    _ => break,
                }
            }
            p.expect(Tok::End, "'.' after import")?;
            continue;
        }
        if p.is_keyword("table")
            && matches!(
                p.peek_at(1).tok,
                Tok::LParen | Tok::End | Tok::Atom { .. } | Tok::Var(_)
            )
        {
            p.bump();
            let decl = if *p.peek() == Tok::LParen {
                p.bump();
                TableDecl::Modes(parse_modes(&mut p)?)
            } else {
                TableDecl::AllArgs
            };
            if pending_table.is_some() {
                return Err(ParseError::new(line, col, "duplicate table declaration"));
            }
            pending_table = Some((decl, line, col));
            if *p.peek() == Tok::End {
                p.bump();
            }
            continue;
        }
        let term = rewrite_oop(p.parse(1200)?);
        p.expect(Tok::End, "'.' at end of clause")?;
        let (key, rule) = classify(term, line, col)?;
        let def = prog
            .preds
            .entry(key.clone())
            .or_insert_with(|| PredicateDef::new(&key));
        if let Some((decl, tl, tc)) = pending_table.take() {
            if def.table.is_some() {
                return Err(ParseError::new(tl, tc, "duplicate table declaration"));
            }
            if let TableDecl::Modes(m) = &decl {
                let expected = key.arity + usize::from(key.function);
                if m.0.len() != expected {
                    return Err(ParseError::new(
                        tl,
                        tc,
                        format!(
                            "table mode arity {} does not match {}/{}",
                            m.0.len(),
                            key.name,
                            expected
                        ),
                    ));
                }
            }
            def.table = Some(decl);
        }
        def.rules.push(rule);
    }
    if let Some((_, l, c)) = pending_table {
        return Err(ParseError::new(
            l,
            c,
            "table declaration without a following rule",
        ));
    }
    Ok(prog)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn operator_precedence() {
        let t = parse_term("3+4*2").unwrap();
        assert_eq!(
            t,
            Ast::op(
                "+",
                vec![Ast::Int(3), Ast::op("*", vec![Ast::Int(4), Ast::Int(2)])]
            )
        );
    }

    #[test]
    fn as_pattern_and_dollar() {
        let t = parse_term("s(FromTo@[From|_], $s(a))").unwrap();
        let Ast::Struct { args, .. } = t else {
            panic!()
        };
        assert!(matches!(&args[0], Ast::As(v, _) if v == "FromTo"));
        assert!(matches!(&args[1], Ast::Struct { dollar: true, .. }));
    }

    #[test]
    fn dollar_covers_arithmetic() {
        let t = parse_term("$Q[I]-I").unwrap();
        assert!(matches!(t, Ast::Struct { ref name, dollar: true, .. } if name == "-"));
    }

    #[test]
    fn oop_rewrites() {
        assert_eq!(
            parse_term("Lst.delete(E)").unwrap(),
            Ast::op("delete", vec![Ast::var("Lst"), Ast::var("E")])
        );
        assert_eq!(
            parse_term("A.length").unwrap(),
            Ast::Attr(Box::new(Ast::var("A")), "length".into())
        );
        assert_eq!(
            parse_term("math.pi").unwrap(),
            Ast::Qualified {
                module: "math".into(),
                name: "pi".into(),
                args: None
            }
        );
        assert!(matches!(parse_term("B[1].length").unwrap(), Ast::Attr(..)));
    }

    #[test]
    fn range_binds_looser_than_plus() {
        assert_eq!(
            parse_term("1..N+1").unwrap(),
            Ast::op(
                "..",
                vec![Ast::Int(1), Ast::op("+", vec![Ast::var("N"), Ast::Int(1)])]
            )
        );
    }

    #[test]
    fn comprehension_and_foreach() {
        let t = parse_term("[E : E in [1,2,3]]").unwrap();
        assert!(matches!(t, Ast::Comprehension { .. }));
        let f = parse_term("foreach (I in 1..3, I > 1) writeln(I) end").unwrap();
        let Ast::Foreach { items, .. } = f else {
            panic!()
        };
        assert_eq!(items.len(), 2);
        assert!(matches!(items[1], LoopItem::Cond(_)));
    }

    #[test]
    fn if_then_else() {
        let t = parse_term("if X > 0 then Y = 1 elseif X < 0 then Y = -1 else Y = 0 end").unwrap();
        let Ast::If { otherwise, .. } = t else {
            panic!()
        };
        assert!(matches!(*otherwise, Ast::If { .. }));
    }

    #[test]
    fn negative_literals() {
        assert_eq!(parse_term("-3").unwrap(), Ast::Int(-3));
        assert_eq!(
            parse_term("X-1").unwrap(),
            Ast::op("-", vec![Ast::var("X"), Ast::Int(1)])
        );
    }

    #[test]
    fn constraint_operators() {
        let t = parse_term("B #<=> (X #= Y) #/\\ Z").unwrap();
        assert!(t.is_op("#<=>", 2));
    }
}
