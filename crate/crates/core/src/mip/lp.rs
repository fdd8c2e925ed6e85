//! CPLEX LP text output and a parser for the subset it produces.

use std::fmt::Write;

use super::{LinearModel, LpVar, Row};
use crate::cp::Sense;

fn write_terms(out: &mut String, lm: &LinearModel, terms: &[(i64, usize)]) {
    if terms.is_empty() {
        out.push('0');
        return;
    }
    for (i, &(c, v)) in terms.iter().enumerate() {
        let name = lm.name(v);
        let mag = c.unsigned_abs();
        if i == 0 {
            if c < 0 {
                out.push('-');
            }
        } else {
            out.push_str(if c < 0 { " - " } else { " + " });
        }
        if mag != 1 {
            let _ = write!(out, "{mag} ");
        }
        out.push_str(&name);
    }
}

impl LinearModel {
    /// LP-format text. Rows are named `c1, c2, ...`.
    pub fn to_lp(&self) -> String {
        let mut out = String::new();
        match &self.objective {
            Some((Sense::Max, _)) => out.push_str("Maximize\n obj: "),
            _ => out.push_str("Minimize\n obj: "),
        }
        match &self.objective {
            Some((_, t)) => write_terms(&mut out, self, t),
            None => out.push('0'),
        }
        out.push_str("\nSubject To\n");
        for (i, r) in self.rows.iter().enumerate() {
            let _ = write!(out, " c{}: ", i + 1);
            if r.terms.is_empty() && !self.vars.is_empty() {
                out.push_str("0 x0");
            } else {
                write_terms(&mut out, self, &r.terms);
            }
            let _ = writeln!(out, " <= {}", r.rhs);
        }
        if self.n_orig > 0 {
            out.push_str("Bounds\n");
            for v in 0..self.n_orig {
                let b = &self.vars[v];
                if b.lo == b.hi {
                    let _ = writeln!(out, " x{v} = {}", b.lo);
                } else {
                    let _ = writeln!(out, " {} <= x{v} <= {}", b.lo, b.hi);
                }
            }
            out.push_str("Generals\n");
            for v in 0..self.n_orig {
                let _ = write!(out, " x{v}");
            }
            out.push('\n');
        }
        if self.num_binaries() > 0 {
            out.push_str("Binaries\n");
            for v in self.n_orig..self.vars.len() {
                let _ = write!(out, " {}", self.name(v));
            }
            out.push('\n');
        }
        out.push_str("End\n");
        out
    }
}

fn var_index(name: &str, n_orig: usize) -> Result<usize, String> {
    let bad = || format!("bad variable name {name}");
    if let Some(i) = name.strip_prefix('x') {
        i.parse().map_err(|_| bad())
    } else if let Some(i) = name.strip_prefix('b') {
        i.parse::<usize>().map(|i| i + n_orig).map_err(|_| bad())
    } else {
        Err(bad())
    }
}

fn parse_terms(s: &str, n_orig: usize) -> Result<Vec<(i64, usize)>, String> {
    let s = s.trim();
    if s == "0" {
        return Ok(Vec::new());
    }
    let mut terms = Vec::new();
    let mut sign = 1;
    let mut coef: Option<i64> = None;
    for tok in s.split_whitespace() {
        match tok {
            "+" => sign = 1,
            "-" => sign = -1,
            _ => {
                let (neg, body) = match tok.strip_prefix('-') {
                    Some(b) => (true, b),
                    None => (false, tok),
                };
                if neg {
                    sign = -sign;
                }
                if let Ok(n) = body.parse::<i64>() {
                    coef = Some(n);
                    continue;
                }
                let v = var_index(body, n_orig)?;
                terms.push((sign * coef.take().unwrap_or(1), v));
                sign = 1;
            }
        }
    }
    Ok(terms)
}

/// Parses LP text produced by [`LinearModel::to_lp`].
pub fn parse_lp(text: &str) -> Result<LinearModel, String> {
    #[derive(PartialEq)]
    enum Sec {
        Obj,
        Rows,
        Bounds,
        Generals,
        Binaries,
    }
    let mut sense = Sense::Min;
    let mut obj_text = String::new();
    let mut rows_text = Vec::new();
    let mut bounds = Vec::new();
    let mut n_orig = 0;
    let mut n_bin = 0;
    let mut sec = Sec::Obj;
    for line in text.lines() {
        let t = line.trim();
        match t {
            "Minimize" => sense = Sense::Min,
            "Maximize" => sense = Sense::Max,
            "Subject To" => sec = Sec::Rows,
            "Bounds" => sec = Sec::Bounds,
            "Generals" => sec = Sec::Generals,
            "Binaries" => sec = Sec::Binaries,
            "End" => break,
            "" => {}
            _ => match sec {
                Sec::Obj => {
                    obj_text = t.strip_prefix("obj:").ok_or("missing objective")?.to_string();
                }
                Sec::Rows => rows_text.push(t.to_string()),
                Sec::Bounds => bounds.push(t.to_string()),
                Sec::Generals => n_orig += t.split_whitespace().count(),
                Sec::Binaries => n_bin += t.split_whitespace().count(),
            },
        }
    }
    let mut vars = vec![
        LpVar {
            lo: 0,
            hi: 0,
            binary: false
        };
        n_orig
    ];
    vars.extend((0..n_bin).map(|_| LpVar {
        lo: 0,
        hi: 1,
        binary: true,
    }));
    for b in bounds {
        let parts: Vec<&str> = b.split_whitespace().collect();
        let num = |s: &str| s.parse::<i64>().map_err(|_| format!("bad bound {b}"));
        match parts.as_slice() {
            [name, "=", v] => {
                let i = var_index(name, n_orig)?;
                vars[i].lo = num(v)?;
                vars[i].hi = num(v)?;
            }
            [lo, "<=", name, "<=", hi] => {
                let i = var_index(name, n_orig)?;
                vars[i].lo = num(lo)?;
                vars[i].hi = num(hi)?;
            }
            _ => return Err(format!("bad bound {b}")),
        }
    }
    let mut rows = Vec::new();
    for r in rows_text {
        let (_, body) = r.split_once(':').ok_or_else(|| format!("bad row {r}"))?;
        let (lhs, rhs) = body.split_once("<=").ok_or_else(|| format!("bad row {r}"))?;
        let rhs = rhs.trim().parse::<i64>().map_err(|_| format!("bad row {r}"))?;
        let terms = parse_terms(lhs, n_orig)?
            .into_iter()
            .filter(|t| t.0 != 0)
            .collect();
        rows.push(Row { terms, rhs });
    }
    let obj = parse_terms(&obj_text, n_orig)?;
    let objective = if obj.is_empty() { None } else { Some((sense, obj)) };
    Ok(LinearModel {
        vars,
        rows,
        objective,
        n_orig,
    })
}
