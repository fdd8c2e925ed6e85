use std::collections::{HashMap, HashSet};

use super::ast::{Ast, LoopItem};
use super::{ParseError, PredKey, PredicateDef, Program, RuleKind, SourceRule};

/// Variable scope while lowering one rule body. `env` maps a source name to
/// the name currently holding its value; `seen` holds source names that have
/// occurred so far.
#[derive(Clone, Default)]
struct Scope {
    env: HashMap<String, String>,
    seen: HashSet<String>,
}

impl Scope {
    fn current(&mut self, v: &str) -> String {
        if v == "_" {
            return v.to_string();
        }
        self.seen.insert(v.to_string());
        self.env
            .entry(v.to_string())
            .or_insert_with(|| v.to_string())
            .clone()
    }

    fn see_all(&mut self, t: &Ast) {
        let mut vs = Vec::new();
        t.vars_in_order(&mut vs);
        for v in vs {
            self.current(&v);
        }
    }
}

struct Lowerer {
    prefix: String,
    counter: usize,
    loops: usize,
    generated: Vec<PredicateDef>,
    line: usize,
}

type LResult<T> = Result<T, ParseError>;

impl Lowerer {
    fn fresh(&mut self, base: &str) -> String {
        self.counter += 1;
        format!("V__{}_{}", base.trim_start_matches("V__"), self.counter)
    }

    fn err<T>(&self, msg: impl Into<String>) -> LResult<T> {
        Err(ParseError::new(self.line, 1, msg))
    }

    fn lower_rule(&mut self, rule: SourceRule) -> LResult<SourceRule> {
        self.line = rule.line;
        let mut sc = Scope::default();
        sc.see_all(&rule.head);
        let mut cond_out = Vec::new();
        for g in rule.cond.conjuncts() {
            self.lower_goal(g, &mut sc, &mut cond_out)?;
        }
        let mut body_out = Vec::new();
        for g in rule.body.conjuncts() {
            self.lower_goal(g, &mut sc, &mut body_out)?;
        }
        let ret = match rule.ret {
            Some(r) => Some(self.lower_expr(r, &mut sc, &mut body_out)?),
            None => None,
        };
        Ok(SourceRule {
            head: rule.head,
            cond: Ast::conj(cond_out),
            body: Ast::conj(body_out),
            kind: rule.kind,
            ret,
            line: rule.line,
        })
    }

    fn lower_goal(&mut self, g: Ast, sc: &mut Scope, out: &mut Vec<Ast>) -> LResult<()> {
        match g {
            Ast::Struct {
                name,
                mut args,
                dollar: false,
            } if args.len() == 2 && name == "," => {
                let b = args.pop().expect("arity 2");
                let a = args.pop().expect("arity 2");
                self.lower_goal(a, sc, out)?;
                self.lower_goal(b, sc, out)
            }
            Ast::If {
                cond,
                then,
                otherwise,
            } => self.lower_if(*cond, *then, *otherwise, sc, out),
            Ast::Struct {
                name,
                mut args,
                dollar: false,
            } if args.len() == 2 && name == ";" => {
                let b = args.pop().expect("arity 2");
                let a = args.pop().expect("arity 2");
                if let Ast::Struct {
                    name,
                    mut args,
                    dollar: false,
                } = a.clone()
                {
                    if name == "->" && args.len() == 2 {
                        let t = args.pop().expect("arity 2");
                        let c = args.pop().expect("arity 2");
                        return self.lower_if(c, t, b, sc, out);
                    }
                }
                let mut sa = sc.clone();
                let mut ga = Vec::new();
                self.lower_goal(a, &mut sa, &mut ga)?;
                let mut sb = sc.clone();
                let mut gb = Vec::new();
                self.lower_goal(b, &mut sb, &mut gb)?;
                self.merge(sc, sa, &mut ga, sb, &mut gb);
                out.push(Ast::op(";", vec![Ast::conj(ga), Ast::conj(gb)]));
                Ok(())
            }
            Ast::Struct {
                name,
                mut args,
                dollar: false,
            } if args.len() == 2 && name == "->" => {
                let t = args.pop().expect("arity 2");
                let c = args.pop().expect("arity 2");
                self.lower_if(c, t, Ast::atom("fail"), sc, out)
            }
            Ast::Foreach { items, body } => self.lower_foreach(items, *body, sc, out),
            Ast::Struct {
                name,
                mut args,
                dollar: false,
            } if args.len() == 2 && name == ":=" => {
                let rhs = args.pop().expect("arity 2");
                let lhs = args.pop().expect("arity 2");
                let rhs = self.lower_expr(rhs, sc, out)?;
                match lhs {
                    Ast::Var(v) if v != "_" => {
                        let target = if sc.seen.contains(&v) {
                            let n = self.fresh(&v);
                            sc.env.insert(v, n.clone());
                            n
                        } else {
                            sc.current(&v)
                        };
                        out.push(Ast::op("=", vec![Ast::Var(target), rhs]));
                        Ok(())
                    }
                    other => self.err(format!("unsupported assignment target {other}")),
                }
            }
            Ast::Struct {
                name,
                mut args,
                dollar: false,
            } if args.len() == 1 && (name == "not" || name == "\\+") => {
                let inner = args.pop().expect("arity 1");
                let mut si = sc.clone();
                let mut gi = Vec::new();
                self.lower_goal(inner, &mut si, &mut gi)?;
                out.push(Ast::op("\\+", vec![Ast::conj(gi)]));
                Ok(())
            }
            other => {
                let g = self.lower_expr(other, sc, out)?;
                out.push(g);
                Ok(())
            }
        }
    }

    fn lower_if(
        &mut self,
        c: Ast,
        t: Ast,
        e: Ast,
        sc: &mut Scope,
        out: &mut Vec<Ast>,
    ) -> LResult<()> {
        let mut st = sc.clone();
        let mut gc = Vec::new();
        self.lower_goal(c, &mut st, &mut gc)?;
        let mut gt = Vec::new();
        self.lower_goal(t, &mut st, &mut gt)?;
        let mut se = sc.clone();
        let mut ge = Vec::new();
        self.lower_goal(e, &mut se, &mut ge)?;
        self.merge(sc, st, &mut gt, se, &mut ge);
        out.push(Ast::op(
            ";",
            vec![
                Ast::op("->", vec![Ast::conj(gc), Ast::conj(gt)]),
                Ast::conj(ge),
            ],
        ));
        Ok(())
    }

    /// Joins two branch scopes so that every variable has one name afterwards.
    fn merge(&mut self, sc: &mut Scope, a: Scope, ga: &mut Vec<Ast>, b: Scope, gb: &mut Vec<Ast>) {
        let mut names: Vec<&String> = a.env.keys().chain(b.env.keys()).collect();
        names.sort();
        names.dedup();
        for v in names {
            let na = a.env.get(v).cloned().unwrap_or_else(|| v.clone());
            let nb = b.env.get(v).cloned().unwrap_or_else(|| v.clone());
            if na == nb {
                sc.env.insert(v.clone(), na);
                continue;
            }
            let m = self.fresh(v);
            ga.push(Ast::op("=", vec![Ast::var(&m), Ast::Var(na)]));
            gb.push(Ast::op("=", vec![Ast::var(&m), Ast::Var(nb)]));
            sc.env.insert(v.clone(), m);
        }
        sc.seen.extend(a.seen);
        sc.seen.extend(b.seen);
    }

    /// Renames variables and hoists comprehensions into goals on `out`.
    fn lower_expr(&mut self, e: Ast, sc: &mut Scope, out: &mut Vec<Ast>) -> LResult<Ast> {
        Ok(match e {
            Ast::Var(v) => Ast::Var(sc.current(&v)),
            Ast::Int(_) | Ast::Atom(_) | Ast::Str(_) | Ast::Nil => e,
            Ast::Cons(h, t) => {
                let h = self.lower_expr(*h, sc, out)?;
                let t = self.lower_expr(*t, sc, out)?;
                Ast::Cons(Box::new(h), Box::new(t))
            }
            Ast::Struct {
                name,
                mut args,
                dollar,
            } if !dollar
                && args.len() == 2
                && matches!(name.as_str(), "findall" | "count_all_sols") =>
            {
                let goal = args.pop().expect("arity 2");
                let tmpl = args.pop().expect("arity 2");
                let mut si = sc.clone();
                let mut gi = Vec::new();
                self.lower_goal(goal, &mut si, &mut gi)?;
                let mut tail = Vec::new();
                let tmpl = self.lower_expr(tmpl, &mut si, &mut tail)?;
                gi.extend(tail);
                Ast::Struct {
                    name,
                    args: vec![tmpl, Ast::conj(gi)],
                    dollar,
                }
            }
            Ast::Struct { name, args, dollar } => {
                let mut new_args = Vec::with_capacity(args.len());
                for a in args {
                    new_args.push(self.lower_expr(a, sc, out)?);
                }
                Ast::Struct {
                    name,
                    args: new_args,
                    dollar,
                }
            }
            Ast::Array(xs) => {
                let mut ys = Vec::with_capacity(xs.len());
                for x in xs {
                    ys.push(self.lower_expr(x, sc, out)?);
                }
                Ast::Array(ys)
            }
            Ast::Index(x, idx) => {
                let x = self.lower_expr(*x, sc, out)?;
                let mut is = Vec::with_capacity(idx.len());
                for i in idx {
                    is.push(self.lower_expr(i, sc, out)?);
                }
                Ast::Index(Box::new(x), is)
            }
            Ast::Attr(x, n) => Ast::Attr(Box::new(self.lower_expr(*x, sc, out)?), n),
            Ast::Qualified { module, name, args } => {
                let args = match args {
                    Some(xs) => {
                        let mut ys = Vec::new();
                        for x in xs {
                            ys.push(self.lower_expr(x, sc, out)?);
                        }
                        Some(ys)
                    }
                    None => None,
                };
                Ast::Qualified { module, name, args }
            }
            Ast::As(v, p) => {
                let v = sc.current(&v);
                Ast::As(v, Box::new(self.lower_expr(*p, sc, out)?))
            }
            Ast::Dot { .. } => return self.err("internal: unrewritten dot access"),
            Ast::Comprehension { template, items } => {
                let acc = self.fresh("acc");
                let res = self.fresh("list");
                sc.current(&acc);
                out.push(Ast::op("=", vec![Ast::var(&acc), Ast::Nil]));
                let body = Ast::op(
                    ":=",
                    vec![
                        Ast::var(&acc),
                        Ast::Cons(template, Box::new(Ast::var(&acc))),
                    ],
                );
                self.lower_foreach(items, body, sc, out)?;
                let cur = sc.current(&acc);
                out.push(Ast::op(
                    "=",
                    vec![Ast::var(&res), Ast::op("reverse", vec![Ast::Var(cur)])],
                ));
                sc.current(&res);
                Ast::Var(res)
            }
            Ast::Foreach { .. } | Ast::If { .. } => {
                return self.err("loops and conditionals are only allowed as goals")
            }
        })
    }

    fn lower_foreach(
        &mut self,
        items: Vec<LoopItem>,
        body: Ast,
        sc: &mut Scope,
        out: &mut Vec<Ast>,
    ) -> LResult<()> {
        let mut it = items.into_iter();
        let (pattern, domain) = match it.next() {
            Some(LoopItem::Iter { pattern, domain }) => (pattern, domain),
            _ => return self.err("a loop must start with an iterator"),
        };
        let mut conds = Vec::new();
        let mut rest = Vec::new();
        for item in it {
            match item {
                LoopItem::Cond(c) if rest.is_empty() => conds.push(c),
                other => rest.push(other),
            }
        }
        let mut inner = if rest.is_empty() {
            body
        } else {
            Ast::Foreach {
                items: rest,
                body: Box::new(body),
            }
        };
        if !conds.is_empty() {
            inner = Ast::If {
                cond: Box::new(Ast::conj(conds)),
                then: Box::new(inner),
                otherwise: Box::new(Ast::atom("true")),
            };
        }
        let simple_pattern = matches!(pattern, Ast::Var(_));
        if !simple_pattern {
            let elem = self.fresh("elem");
            inner = Ast::If {
                cond: Box::new(Ast::op("=", vec![pattern.clone(), Ast::var(&elem)])),
                then: Box::new(inner),
                otherwise: Box::new(Ast::atom("true")),
            };
            return self.emit_loop(Ast::var(&elem), pattern, domain, inner, sc, out);
        }
        self.emit_loop(pattern.clone(), pattern, domain, inner, sc, out)
    }

    /// Generates `'$foreach_K'(List, Globals.., AccIn.., AccOut..)` for a loop
    /// whose element is bound to `elem` in the head.
    fn emit_loop(
        &mut self,
        elem: Ast,
        pattern: Ast,
        domain: Ast,
        body: Ast,
        sc: &mut Scope,
        out: &mut Vec<Ast>,
    ) -> LResult<()> {
        let domain = self.lower_expr(domain, sc, out)?;

        let local: HashSet<String> = pattern.var_set().into_iter().collect();
        let mut body_vars = Vec::new();
        body.vars_in_order(&mut body_vars);
        let globals: Vec<String> = body_vars
            .into_iter()
            .filter(|v| !local.contains(v) && sc.seen.contains(v))
            .collect();
        let mut assigned = HashSet::new();
        assigned_vars(&body, &mut assigned);
        let accs: Vec<String> = globals
            .iter()
            .filter(|g| assigned.contains(*g))
            .cloned()
            .collect();
        let plain: Vec<String> = globals
            .iter()
            .filter(|g| !assigned.contains(*g))
            .cloned()
            .collect();

        self.loops += 1;
        let name = format!("{}foreach_{}", self.prefix, self.loops);
        let tail = self.fresh("tail");
        let outs: Vec<String> = accs.iter().map(|a| format!("V__out_{a}")).collect();

        let head_args = |first: Ast| -> Vec<Ast> {
            let mut a = vec![first];
            a.extend(plain.iter().map(|v| Ast::var(v)));
            a.extend(accs.iter().map(|v| Ast::var(v)));
            a.extend(outs.iter().map(|v| Ast::var(v)));
            a
        };

        let base = SourceRule {
            head: Ast::op(&name, head_args(Ast::Nil)),
            cond: Ast::atom("true"),
            body: Ast::conj(
                accs.iter()
                    .zip(&outs)
                    .map(|(a, o)| Ast::op("=", vec![Ast::var(o), Ast::var(a)]))
                    .collect(),
            ),
            kind: RuleKind::NonBacktrackable,
            ret: None,
            line: self.line,
        };

        let mut inner = Scope::default();
        inner.see_all(&elem);
        inner.see_all(&pattern);
        for g in &globals {
            inner.current(g);
        }
        inner.current(&tail);
        let mut goals = Vec::new();
        self.lower_goal(body, &mut inner, &mut goals)?;
        let mut rec_args = vec![Ast::var(&tail)];
        rec_args.extend(plain.iter().map(|v| Ast::var(v)));
        for a in &accs {
            rec_args.push(Ast::Var(inner.current(a)));
        }
        rec_args.extend(outs.iter().map(|v| Ast::var(v)));
        goals.push(Ast::op(&name, rec_args));
        let step = SourceRule {
            head: Ast::op(
                &name,
                head_args(Ast::Cons(Box::new(elem), Box::new(Ast::var(&tail)))),
            ),
            cond: Ast::atom("true"),
            body: Ast::conj(goals),
            kind: RuleKind::NonBacktrackable,
            ret: None,
            line: self.line,
        };
        let arity = 1 + plain.len() + 2 * accs.len();
        let mut def = PredicateDef::new(&PredKey {
            name: name.clone(),
            arity,
            function: false,
        });
        def.rules = vec![base, step];
        self.generated.push(def);

        let mut call_args = vec![Ast::op("$iterable", vec![domain])];
        for v in &plain {
            call_args.push(Ast::Var(sc.current(v)));
        }
        for a in &accs {
            call_args.push(Ast::Var(sc.current(a)));
        }
        for a in &accs {
            let n = self.fresh(a);
            sc.env.insert(a.clone(), n.clone());
            call_args.push(Ast::Var(n));
        }
        out.push(Ast::op(&name, call_args));
        Ok(())
    }
}

fn assigned_vars(t: &Ast, out: &mut HashSet<String>) {
    match t {
        Ast::Struct { name, args, .. } => {
            if name == ":=" && args.len() == 2 {
                if let Ast::Var(v) = &args[0] {
                    out.insert(v.clone());
                }
            }
            for a in args {
                assigned_vars(a, out);
            }
        }
        Ast::Foreach { items, body } => {
            for it in items {
                if let LoopItem::Cond(c) = it {
                    assigned_vars(c, out);
                }
            }
            assigned_vars(body, out);
        }
        Ast::If {
            cond,
            then,
            otherwise,
        } => {
            assigned_vars(cond, out);
            assigned_vars(then, out);
            assigned_vars(otherwise, out);
        }
        _ => {}
    }
}

/// Removes loops, comprehensions and `:=` from every rule. Generated loop
/// predicates are appended after the user's predicates.
pub fn lower_program(prog: Program) -> Result<Program, ParseError> {
    lower_program_with_prefix(prog, "$")
}

/// Like [`lower_program`], naming generated predicates `<prefix>foreach_N`.
pub fn lower_program_with_prefix(prog: Program, prefix: &str) -> Result<Program, ParseError> {
    let mut l = Lowerer {
        prefix: prefix.to_string(),
        counter: 0,
        loops: 0,
        generated: Vec::new(),
        line: 0,
    };
    let mut out = Program {
        imports: prog.imports,
        preds: Default::default(),
    };
    for (key, def) in prog.preds {
        let mut rules = Vec::with_capacity(def.rules.len());
        for r in def.rules {
            rules.push(l.lower_rule(r)?);
        }
        out.preds.insert(key, PredicateDef { rules, ..def });
    }
    for def in l.generated {
        let key = PredKey {
            name: def.name.clone(),
            arity: def.arity,
            function: false,
        };
        out.preds.insert(key, def);
    }
    Ok(out)
}
