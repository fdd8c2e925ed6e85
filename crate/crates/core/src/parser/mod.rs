//! Surface syntax: tokenizer, operator-precedence parser and the lowering
//! passes that remove loops, comprehensions and assignments.

pub mod ast;
mod grammar;
mod lexer;
mod lower;

use std::fmt;

use indexmap::IndexMap;

pub use ast::{Ast, LoopItem};
pub use grammar::{infix_op, Assoc, is_reserved_word, parse_program, parse_term, rewrite_oop};
pub use lower::{lower_program, lower_program_with_prefix};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, col: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            col,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuleKind {
    /// `=>`
    NonBacktrackable,
    /// `?=>`
    Backtrackable,
    /// `F = Exp [, Cond] [=> Body]`
    Function,
    /// Facts and `:-` clauses, resolved by unification.
    Horn,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SourceRule {
    pub head: Ast,
    pub cond: Ast,
    pub body: Ast,
    pub kind: RuleKind,
    pub ret: Option<Ast>,
    pub line: usize,
}

impl fmt::Display for SourceRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if let Some(r) = &self.ret {
            write!(f, " = {r}")?;
        }
        if !self.cond.is_true() {
            write!(f, ", {}", self.cond)?;
        }
        match self.kind {
            RuleKind::NonBacktrackable => write!(f, " => {}", self.body)?,
            RuleKind::Backtrackable => write!(f, " ?=> {}", self.body)?,
            RuleKind::Function if !self.body.is_true() || !self.cond.is_true() => {
                write!(f, " => {}", self.body)?
            }
            RuleKind::Horn if !self.body.is_true() => write!(f, " :- {}", self.body)?,
            _ => {}
        }
        write!(f, ".")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Plus,
    Minus,
    Min,
    Max,
    Nt,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeTuple(pub Vec<Mode>);

impl ModeTuple {
    pub fn validate(&self) -> Result<(), String> {
        let opt = self
            .0
            .iter()
            .filter(|m| matches!(m, Mode::Min | Mode::Max))
            .count();
        if opt > 1 {
            return Err("at most one min/max mode is allowed".into());
        }
        if let Some(i) = self.0.iter().position(|m| *m == Mode::Nt) {
            if i + 1 != self.0.len() {
                return Err("nt may only be the last mode".into());
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TableDecl {
    /// `table` without modes: the whole call is the key.
    AllArgs,
    Modes(ModeTuple),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PredKey {
    pub name: String,
    pub arity: usize,
    pub function: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PredicateDef {
    pub name: String,
    pub arity: usize,
    pub function: bool,
    pub rules: Vec<SourceRule>,
    pub table: Option<TableDecl>,
}

impl PredicateDef {
    pub fn new(key: &PredKey) -> Self {
        PredicateDef {
            name: key.name.clone(),
            arity: key.arity,
            function: key.function,
            rules: Vec::new(),
            table: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Program {
    pub imports: Vec<String>,
    pub preds: IndexMap<PredKey, PredicateDef>,
}

impl Program {
    pub fn get(&self, name: &str, arity: usize) -> Option<&PredicateDef> {
        self.preds
            .iter()
            .find(|(k, _)| k.name == name && k.arity == arity)
            .map(|(_, d)| d)
    }

    /// Source text that parses back to this program.
    pub fn to_source(&self) -> String {
        let mut out = String::new();
        if !self.imports.is_empty() {
            out.push_str(&format!("import {}.\n", self.imports.join(", ")));
        }
        for def in self.preds.values() {
            match &def.table {
                Some(TableDecl::AllArgs) => out.push_str("table\n"),
                Some(TableDecl::Modes(m)) => {
                    let ms: Vec<&str> =
                        m.0.iter()
                            .map(|m| match m {
                                Mode::Plus => "+",
                                Mode::Minus => "-",
                                Mode::Min => "min",
                                Mode::Max => "max",
                                Mode::Nt => "nt",
                            })
                            .collect();
                    out.push_str(&format!("table({})\n", ms.join(",")));
                }
                None => {}
            }
            for r in &def.rules {
                out.push_str(&r.to_string());
                out.push('\n');
            }
        }
        out
    }
}
