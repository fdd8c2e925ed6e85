use std::collections::HashMap;
use std::rc::Rc;

use crate::parser::RuleKind;
use crate::term::{Term, VarId, View};

use super::compile::{Expr, Goal, Pat, PredId};
use super::{EResult, Engine, EngineError, Slot, TrailEntry};

pub(crate) type Env = Rc<Vec<Term>>;
pub(crate) type Cont = Option<Rc<Frame>>;

pub(crate) enum Frame {
    Goals {
        goals: Rc<[Goal]>,
        pc: usize,
        env: Env,
        next: Cont,
    },
    /// Removes choice points above `height`, then continues.
    CutTo { height: usize, next: Cont },
    /// End of a rule's condition: commit, then run the body.
    Commit {
        height: usize,
        body: Rc<[Goal]>,
        env: Env,
        next: Cont,
    },
}

pub(crate) enum Step {
    Cont(Cont),
    Fail,
}

/// Source of alternatives for a nondeterministic builtin. Each alternative
/// is a list of pairs to unify.
pub(crate) trait AltStream {
    fn next_alt(&mut self, eng: &mut Engine) -> EResult<Option<Vec<(Term, Term)>>>;
}

pub(crate) enum Alt {
    Rules {
        pred: PredId,
        args: Rc<[Term]>,
        next: usize,
    },
    Goals {
        goals: Rc<[Goal]>,
        env: Env,
    },
    Stream(Box<dyn AltStream>),
    /// Boundary of a nested run; never resumed.
    Barrier,
}

pub(crate) struct ChoicePoint {
    pub alt: Alt,
    pub cont: Cont,
    pub trail_len: usize,
    pub var_len: usize,
}

fn goals_frame(goals: Rc<[Goal]>, env: Env, next: Cont) -> Cont {
    Some(Rc::new(Frame::Goals {
        goals,
        pc: 0,
        env,
        next,
    }))
}

impl Engine {
    pub(crate) fn fresh_var(&mut self) -> Term {
        let id = VarId(self.slots.len() as u32);
        self.slots.push(Slot { val: None, cp: None });
        Term::Var(id)
    }

    pub(crate) fn deref(&self, mut t: Term) -> Term {
        while let Term::Var(v) = t {
            match self.slots[v.0 as usize].val {
                Some(x) => t = x,
                None => return t,
            }
        }
        t
    }

    pub(crate) fn bind(&mut self, v: VarId, t: Term) {
        self.slots[v.0 as usize].val = Some(t);
        self.trail.push(TrailEntry::Bind(v));
    }

    pub(crate) fn undo_to(&mut self, len: usize) {
        while self.trail.len() > len {
            match self.trail.pop().expect("length checked") {
                TrailEntry::Bind(v) => self.slots[v.0 as usize].val = None,
                TrailEntry::Attr(v) => self.slots[v.0 as usize].cp = None,
                TrailEntry::CpVar => self.cpstore.pop_var(),
                TrailEntry::Dom(i, d) => self.cpstore.set_dom(i as usize, d),
                TrailEntry::DomVal(i, x) => self.cpstore.restore_value(i as usize, x),
                TrailEntry::Con => self.cpstore.pop_con(),
            }
        }
    }

    pub(crate) fn push_cp(&mut self, alt: Alt, cont: Cont) {
        self.cps.push(ChoicePoint {
            alt,
            cont,
            trail_len: self.trail.len(),
            var_len: self.slots.len(),
        });
    }

    /// Runs until the continuation is exhausted (a solution, `true`) or
    /// backtracking reaches `base` (`false`).
    pub(crate) fn run(&mut self, mut cont: Cont, base: usize) -> EResult<bool> {
        loop {
            let Some(frame) = cont else {
                return Ok(true);
            };
            let step = match &*frame {
                Frame::Goals {
                    goals,
                    pc,
                    env,
                    next,
                } => {
                    if *pc >= goals.len() {
                        cont = next.clone();
                        continue;
                    }
                    let rest = if pc + 1 < goals.len() {
                        Some(Rc::new(Frame::Goals {
                            goals: goals.clone(),
                            pc: pc + 1,
                            env: env.clone(),
                            next: next.clone(),
                        }))
                    } else {
                        next.clone()
                    };
                    self.step(&goals[*pc], env, rest)?
                }
                Frame::CutTo { height, next } => {
                    self.cps.truncate(*height);
                    Step::Cont(next.clone())
                }
                Frame::Commit {
                    height,
                    body,
                    env,
                    next,
                } => {
                    self.cps.truncate(*height);
                    Step::Cont(goals_frame(body.clone(), env.clone(), next.clone()))
                }
            };
            cont = match step {
                Step::Cont(c) => c,
                Step::Fail => match self.backtrack(base)? {
                    Some(c) => c,
                    None => return Ok(false),
                },
            };
        }
    }

    /// Resumes the most recent choice point above `base`.
    pub(crate) fn backtrack(&mut self, base: usize) -> EResult<Option<Cont>> {
        loop {
            if self.cps.len() <= base {
                return Ok(None);
            }
            let mut cp = self.cps.pop().expect("length checked");
            self.undo_to(cp.trail_len);
            self.slots.truncate(cp.var_len);
            match cp.alt {
                Alt::Barrier => {
                    self.cps.push(cp);
                    return Ok(None);
                }
                Alt::Rules { pred, args, next } => {
                    if let Step::Cont(c) = self.call_pred(pred, args, next, cp.cont)? {
                        return Ok(Some(c));
                    }
                }
                Alt::Goals { goals, env } => {
                    return Ok(Some(goals_frame(goals, env, cp.cont)));
                }
                Alt::Stream(ref mut s) => {
                    let item = s.next_alt(self)?;
                    let Some(pairs) = item else {
                        continue;
                    };
                    let cont = cp.cont.clone();
                    self.cps.push(cp);
                    if self.unify_pairs(&pairs)? {
                        return Ok(Some(cont));
                    }
                }
            }
        }
    }

    pub(crate) fn unify_pairs(&mut self, pairs: &[(Term, Term)]) -> EResult<bool> {
        for &(a, b) in pairs {
            if !self.unify(a, b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Installs a stream of alternatives and takes its first one.
    pub(crate) fn stream_alts(&mut self, mut stream: Box<dyn AltStream>, cont: Cont) -> EResult<Step> {
        let (tl, vl) = (self.trail.len(), self.slots.len());
        loop {
            let Some(pairs) = stream.next_alt(self)? else {
                return Ok(Step::Fail);
            };
            if self.unify_pairs(&pairs)? {
                self.cps.push(ChoicePoint {
                    alt: Alt::Stream(stream),
                    cont: cont.clone(),
                    trail_len: tl,
                    var_len: vl,
                });
                return Ok(Step::Cont(cont));
            }
            self.undo_to(tl);
            self.slots.truncate(vl);
        }
    }

    fn step(&mut self, goal: &Goal, env: &Env, rest: Cont) -> EResult<Step> {
        match goal {
            Goal::Fail => Ok(Step::Fail),
            Goal::Unify(a, b) => {
                let a = self.eval(a, env)?;
                let b = self.eval(b, env)?;
                Ok(if self.unify(a, b)? {
                    Step::Cont(rest)
                } else {
                    Step::Fail
                })
            }
            Goal::Call { pred, args } => {
                let mut ts = Vec::with_capacity(args.len());
                for a in args.iter() {
                    ts.push(self.eval(a, env)?);
                }
                let args: Rc<[Term]> = ts.into();
                if self.preds[*pred].table.is_some() && self.options.tabling {
                    return self.tabled_call(*pred, args, rest);
                }
                self.call_pred(*pred, args, 0, rest)
            }
            Goal::CallClauses { pred, args } => {
                let mut ts = Vec::with_capacity(args.len());
                for a in args.iter() {
                    ts.push(self.eval(a, env)?);
                }
                self.call_pred(*pred, ts.into(), 0, rest)
            }
            Goal::Builtin { b, name, args } => self.call_builtin(*b, *name, args, env, rest),
            Goal::Ite { cond, then, els } => {
                let h = self.cps.len();
                self.push_cp(
                    Alt::Goals {
                        goals: els.clone(),
                        env: env.clone(),
                    },
                    rest.clone(),
                );
                let after = Some(Rc::new(Frame::CutTo {
                    height: h,
                    next: goals_frame(then.clone(), env.clone(), rest),
                }));
                Ok(Step::Cont(goals_frame(cond.clone(), env.clone(), after)))
            }
            Goal::Or(a, b) => {
                self.push_cp(
                    Alt::Goals {
                        goals: b.clone(),
                        env: env.clone(),
                    },
                    rest.clone(),
                );
                Ok(Step::Cont(goals_frame(a.clone(), env.clone(), rest)))
            }
            Goal::Not(g) => {
                let h = self.cps.len();
                self.push_cp(
                    Alt::Goals {
                        goals: Rc::from(Vec::new()),
                        env: env.clone(),
                    },
                    rest,
                );
                let fail: Rc<[Goal]> = Rc::from(vec![Goal::Fail]);
                let after = Some(Rc::new(Frame::CutTo {
                    height: h,
                    next: goals_frame(fail, env.clone(), None),
                }));
                Ok(Step::Cont(goals_frame(g.clone(), env.clone(), after)))
            }
            Goal::Undefined(name) => Err(EngineError::UnknownPredicate(name.clone())),
            Goal::UndefinedFn(f, args) => {
                let mut ts = Vec::with_capacity(args.len());
                for a in args.iter() {
                    ts.push(self.eval(a, env)?);
                }
                let t = self.store.structure(*f, &ts);
                Err(EngineError::UnresolvedFunctionCall(self.format_term(t)))
            }
        }
    }

    /// Tries the rules of `pid` starting at rule `start`.
    pub(crate) fn call_pred(
        &mut self,
        pid: PredId,
        args: Rc<[Term]>,
        start: usize,
        cont: Cont,
    ) -> EResult<Step> {
        let rules = self.preds[pid].rules.clone();
        let n = rules.len();
        let mut i = start;
        while i < n {
            let rule = &rules[i];
            if let Some(hargs) = &rule.horn {
                let mark = self.trail.len();
                let vmark = self.slots.len();
                let env: Env = Rc::new((0..rule.nvars).map(|_| self.fresh_var()).collect());
                let mut ok = true;
                for (h, &a) in hargs.iter().zip(args.iter()) {
                    let ht = self.eval(h, &env)?;
                    if !self.unify(ht, a)? {
                        ok = false;
                        break;
                    }
                }
                if !ok {
                    self.undo_to(mark);
                    self.slots.truncate(vmark);
                    i += 1;
                    continue;
                }
                if i + 1 < n {
                    self.cps.push(super::ChoicePoint {
                        alt: Alt::Rules {
                            pred: pid,
                            args: args.clone(),
                            next: i + 1,
                        },
                        cont: cont.clone(),
                        trail_len: mark,
                        var_len: vmark,
                    });
                }
                return Ok(Step::Cont(goals_frame(rule.body.clone(), env, cont)));
            }

            let mut slots: Vec<Option<Term>> = vec![None; rule.nvars];
            let nargs = rule.head.len();
            let matched = rule
                .head
                .iter()
                .zip(args.iter())
                .all(|(p, &a)| self.match_pat(p, a, &mut slots));
            if !matched {
                i += 1;
                continue;
            }
            if let Some(r) = rule.result {
                slots[r as usize] = Some(args[nargs]);
            }
            let env: Env = Rc::new(
                slots
                    .into_iter()
                    .map(|s| s.unwrap_or_else(|| self.fresh_var()))
                    .collect(),
            );
            let backtrackable = rule.kind == RuleKind::Backtrackable;
            if let Some(cond) = &rule.cond {
                let h = self.cps.len();
                self.push_cp(
                    Alt::Rules {
                        pred: pid,
                        args: args.clone(),
                        next: i + 1,
                    },
                    cont.clone(),
                );
                let commit = Some(Rc::new(Frame::Commit {
                    height: h + usize::from(backtrackable),
                    body: rule.body.clone(),
                    env: env.clone(),
                    next: cont,
                }));
                return Ok(Step::Cont(goals_frame(cond.clone(), env, commit)));
            }
            if backtrackable && i + 1 < n {
                self.push_cp(
                    Alt::Rules {
                        pred: pid,
                        args: args.clone(),
                        next: i + 1,
                    },
                    cont.clone(),
                );
            }
            return Ok(Step::Cont(goals_frame(rule.body.clone(), env, cont)));
        }
        if self.preds[pid].function {
            let sym = self.preds[pid].sym;
            let call_args = &args[..args.len() - 1];
            let t = self.store.structure(sym, call_args);
            return Err(EngineError::UnresolvedFunctionCall(self.format_term(t)));
        }
        Ok(Step::Fail)
    }

    fn match_pat(&self, p: &Pat, t: Term, env: &mut [Option<Term>]) -> bool {
        match p {
            Pat::Anon => true,
            Pat::Var(k) => match env[*k as usize] {
                None => {
                    env[*k as usize] = Some(t);
                    true
                }
                Some(prev) => self.identical(prev, t),
            },
            Pat::Const(c) => {
                let t = self.deref(t);
                !matches!(t, Term::Var(_)) && self.identical(*c, t)
            }
            Pat::Cons(h, tl) => match self.store.view(self.deref(t)) {
                View::Cons(a, b) => self.match_pat(h, a, env) && self.match_pat(tl, b, env),
                _ => false,
            },
            Pat::Struct(f, ps) => match self.store.view(self.deref(t)) {
                View::Struct(g, args) if g == *f && args.len() == ps.len() => {
                    let args = args.to_vec();
                    ps.iter()
                        .zip(args)
                        .all(|(p, a)| self.match_pat(p, a, env))
                }
                _ => false,
            },
            Pat::Array(ps) => match self.store.view(self.deref(t)) {
                View::Array(args) if args.len() == ps.len() => {
                    let args = args.to_vec();
                    ps.iter()
                        .zip(args)
                        .all(|(p, a)| self.match_pat(p, a, env))
                }
                _ => false,
            },
            Pat::As(k, p) => {
                if !self.match_pat(p, t, env) {
                    return false;
                }
                match env[*k as usize] {
                    None => {
                        env[*k as usize] = Some(t);
                        true
                    }
                    Some(prev) => self.identical(prev, t),
                }
            }
        }
    }

    /// Structural identity; unbound variables are identical only to themselves.
    pub(crate) fn identical(&self, a: Term, b: Term) -> bool {
        let mut stack = vec![(a, b)];
        while let Some((a, b)) = stack.pop() {
            let a = self.deref(a);
            let b = self.deref(b);
            if a == b {
                continue;
            }
            if let (Term::Node(x), Term::Node(y)) = (a, b) {
                if self.store.is_ground(a) && self.store.is_ground(b) {
                    debug_assert_ne!(x, y);
                    return false;
                }
            }
            match (self.store.view(a), self.store.view(b)) {
                (View::Cons(h1, t1), View::Cons(h2, t2)) => {
                    stack.push((t1, t2));
                    stack.push((h1, h2));
                }
                (View::Struct(f, xs), View::Struct(g, ys)) if f == g && xs.len() == ys.len() => {
                    stack.extend(xs.iter().copied().zip(ys.iter().copied()).rev());
                }
                (View::Array(xs), View::Array(ys)) if xs.len() == ys.len() => {
                    stack.extend(xs.iter().copied().zip(ys.iter().copied()).rev());
                }
                _ => return false,
            }
        }
        true
    }

    /// Syntactic unification without occurs check.
    pub(crate) fn unify(&mut self, a: Term, b: Term) -> EResult<bool> {
        let mut stack = vec![(a, b)];
        while let Some((a, b)) = stack.pop() {
            let a = self.deref(a);
            let b = self.deref(b);
            if a == b {
                continue;
            }
            match (a, b) {
                (Term::Var(x), Term::Var(y)) => {
                    let (old, young) = if x.0 < y.0 { (x, y) } else { (y, x) };
                    let ok = self.bind_var_var(old, young)?;
                    if !ok {
                        return Ok(false);
                    }
                }
                (Term::Var(x), t) | (t, Term::Var(x)) => {
                    if !self.bind_value(x, t)? {
                        return Ok(false);
                    }
                }
                _ => {
                    if let (Term::Node(_), Term::Node(_)) = (a, b) {
                        if self.store.is_ground(a) && self.store.is_ground(b) {
                            return Ok(false);
                        }
                    }
                    match (self.store.view(a), self.store.view(b)) {
                        (View::Cons(h1, t1), View::Cons(h2, t2)) => {
                            stack.push((t1, t2));
                            stack.push((h1, h2));
                        }
                        (View::Struct(f, xs), View::Struct(g, ys))
                            if f == g && xs.len() == ys.len() =>
                        {
                            stack.extend(xs.iter().copied().zip(ys.iter().copied()).rev());
                        }
                        (View::Array(xs), View::Array(ys)) if xs.len() == ys.len() => {
                            stack.extend(xs.iter().copied().zip(ys.iter().copied()).rev());
                        }
                        _ => return Ok(false),
                    }
                }
            }
        }
        Ok(true)
    }

    fn bind_var_var(&mut self, old: VarId, young: VarId) -> EResult<bool> {
        let old_cp = self.slots[old.0 as usize].cp;
        let young_cp = self.slots[young.0 as usize].cp;
        match (old_cp, young_cp) {
            (_, None) => {
                self.bind(young, Term::Var(old));
                Ok(true)
            }
            (None, Some(_)) => {
                self.bind(old, Term::Var(young));
                Ok(true)
            }
            (Some(_), Some(_)) => self.unify_dvars(old, young),
        }
    }

    fn bind_value(&mut self, v: VarId, t: Term) -> EResult<bool> {
        if self.slots[v.0 as usize].cp.is_some() {
            return self.bind_dvar_value(v, t);
        }
        self.bind(v, t);
        Ok(true)
    }

    /// Evaluates an argument expression.
    pub(crate) fn eval(&mut self, e: &Expr, env: &Env) -> EResult<Term> {
        Ok(match e {
            Expr::Anon => self.fresh_var(),
            Expr::Var(k) => env[*k as usize],
            Expr::Const(t) => *t,
            Expr::Cons(h, t) => {
                let h = self.eval(h, env)?;
                let t = self.eval(t, env)?;
                self.store.cons(h, t)
            }
            Expr::Struct(f, args) => {
                let mut ts = Vec::with_capacity(args.len());
                for a in args.iter() {
                    ts.push(self.eval(a, env)?);
                }
                self.store.structure(*f, &ts)
            }
            Expr::Array(args) => {
                let mut ts = Vec::with_capacity(args.len());
                for a in args.iter() {
                    ts.push(self.eval(a, env)?);
                }
                self.store.array(&ts)
            }
            Expr::Arith(op, args) => {
                let mut ts = Vec::with_capacity(args.len());
                for a in args.iter() {
                    ts.push(self.eval(a, env)?);
                }
                Term::Int(self.arith(*op, &ts)?)
            }
            Expr::Sym(op, f, args) => {
                let mut ts = Vec::with_capacity(args.len());
                for a in args.iter() {
                    ts.push(self.eval(a, env)?);
                }
                match self.try_arith(*op, &ts)? {
                    Some(n) => Term::Int(n),
                    None => self.store.structure(*f, &ts),
                }
            }
            Expr::Native(nf, args) => {
                let mut ts = Vec::with_capacity(args.len());
                for a in args.iter() {
                    ts.push(self.eval(a, env)?);
                }
                self.native(*nf, &ts)?
            }
            Expr::Index(x, idx) => {
                let mut t = self.eval(x, env)?;
                for i in idx.iter() {
                    let i = self.eval(i, env)?;
                    let i = self.int_of(i, "index")?;
                    t = self.index(t, i)?;
                }
                t
            }
            Expr::Findall(tmpl, goals) => {
                let items = self.findall(tmpl, goals, env)?;
                self.store.list(items)
            }
        })
    }

    /// `X[I]`, 1-based, on lists, arrays and structures.
    pub(crate) fn index(&mut self, t: Term, i: i64) -> EResult<Term> {
        let t = self.deref(t);
        let err = |len: usize| EngineError::Index(format!("index {i} out of bounds 1..{len}"));
        match self.store.view(t) {
            View::Array(xs) | View::Struct(_, xs) => {
                if i < 1 || i as usize > xs.len() {
                    return Err(err(xs.len()));
                }
                Ok(xs[i as usize - 1])
            }
            View::Cons(..) | View::Nil => {
                let items = self.list_vec(t)?;
                if i < 1 || i as usize > items.len() {
                    return Err(err(items.len()));
                }
                Ok(items[i as usize - 1])
            }
            View::Var(_) => Err(EngineError::Instantiation("indexing an unbound variable".into())),
            _ => Err(EngineError::Type(format!(
                "cannot index {}",
                self.format_term(t)
            ))),
        }
    }

    /// Runs `cont` in a nested search. `on_solution` is called for each
    /// solution and returns whether to continue. All bindings made by the
    /// nested search are undone afterwards.
    pub(crate) fn nested(
        &mut self,
        cont: Cont,
        mut on_solution: impl FnMut(&mut Engine) -> EResult<bool>,
    ) -> EResult<()> {
        let base = self.cps.len();
        self.push_cp(Alt::Barrier, None);
        let inner = base + 1;
        let mut res = self.run(cont, inner);
        let outcome = loop {
            match res {
                Err(e) => break Err(e),
                Ok(false) => break Ok(()),
                Ok(true) => match on_solution(self) {
                    Err(e) => break Err(e),
                    Ok(false) => break Ok(()),
                    Ok(true) => {
                        res = match self.backtrack(inner) {
                            Ok(Some(c)) => self.run(c, inner),
                            Ok(None) => Ok(false),
                            Err(e) => Err(e),
                        }
                    }
                },
            }
        };
        let barrier = &self.cps[base];
        let (tl, vl) = (barrier.trail_len, barrier.var_len);
        self.cps.truncate(base);
        self.undo_to(tl);
        self.slots.truncate(vl);
        outcome
    }

    /// Runs `goals` in `env` nested, copying `tmpl` out of each solution.
    pub(crate) fn findall(&mut self, tmpl: &Expr, goals: &Rc<[Goal]>, env: &Env) -> EResult<Vec<Term>> {
        let mut found = Vec::new();
        let cont = goals_frame(goals.clone(), env.clone(), None);
        self.nested(cont, |eng| {
            let t = eng.eval(tmpl, env)?;
            found.push(eng.canonical(t));
            Ok(true)
        })?;
        Ok(found
            .into_iter()
            .map(|(t, has_vars)| {
                if has_vars {
                    self.instantiate(t)
                } else {
                    t
                }
            })
            .collect())
    }

    /// Calls predicate `pid` nested and reports each solution's arguments.
    pub(crate) fn call_nested(
        &mut self,
        pid: PredId,
        args: Vec<Term>,
        mut on_solution: impl FnMut(&mut Engine, &[Term]) -> EResult<bool>,
    ) -> EResult<()> {
        let env: Env = Rc::new(args);
        let call = Goal::CallClauses {
            pred: pid,
            args: (0..env.len() as u32).map(Expr::Var).collect(),
        };
        let goals: Rc<[Goal]> = Rc::from(vec![call]);
        let cont = goals_frame(goals, env.clone(), None);
        self.nested(cont, |eng| on_solution(eng, &env))
    }

    /// Fully dereferenced copy of `t` with unbound variables replaced by
    /// `'$VAR'(N)` markers. Also reports whether any marker was introduced.
    pub(crate) fn canonical(&mut self, t: Term) -> (Term, bool) {
        let mut map = HashMap::new();
        let r = self.copy_term(t, &mut map, true);
        (r, !map.is_empty())
    }

    /// Replaces `'$VAR'(N)` markers by fresh variables.
    pub(crate) fn instantiate(&mut self, t: Term) -> Term {
        let mut map: HashMap<i64, Term> = HashMap::new();
        self.instantiate_with(t, &mut map)
    }

    pub(crate) fn instantiate_with(&mut self, t: Term, map: &mut HashMap<i64, Term>) -> Term {
        match self.store.view(t) {
            View::Struct(f, args) if f == self.syms.var_marker && args.len() == 1 => {
                let k = args[0].as_int().unwrap_or(0);
                if let Some(v) = map.get(&k) {
                    return *v;
                }
                let v = self.fresh_var();
                map.insert(k, v);
                v
            }
            View::Cons(h, tl) => {
                let h = self.instantiate_with(h, map);
                let tl = self.instantiate_with(tl, map);
                self.store.cons(h, tl)
            }
            View::Struct(f, args) => {
                let args = args.to_vec();
                let ts: Vec<Term> = args
                    .into_iter()
                    .map(|a| self.instantiate_with(a, map))
                    .collect();
                self.store.structure(f, &ts)
            }
            View::Array(args) => {
                let args = args.to_vec();
                let ts: Vec<Term> = args
                    .into_iter()
                    .map(|a| self.instantiate_with(a, map))
                    .collect();
                self.store.array(&ts)
            }
            _ => t,
        }
    }

    /// Dereferenced copy. With `canonical`, unbound variables become
    /// numbered markers; otherwise they become fresh variables.
    pub(crate) fn copy_term(&mut self, t: Term, map: &mut HashMap<VarId, Term>, canonical: bool) -> Term {
        let t = self.deref(t);
        match t {
            Term::Var(v) => {
                if let Some(x) = map.get(&v) {
                    return *x;
                }
                let x = if canonical {
                    let n = map.len() as i64;
                    self.store
                        .structure(self.syms.var_marker, &[Term::Int(n)])
                } else {
                    self.fresh_var()
                };
                map.insert(v, x);
                x
            }
            Term::Node(_) if self.store.is_ground(t) => t,
            Term::Node(_) => match self.store.view(t) {
                View::Cons(..) => {
                    // Iterative over the spine to support long lists.
                    let mut items = Vec::new();
                    let mut cur = t;
                    loop {
                        match self.store.view(cur) {
                            View::Cons(h, tl) => {
                                items.push(h);
                                cur = self.deref(tl);
                                if self.store.is_ground(cur) {
                                    break;
                                }
                            }
                            _ => break,
                        }
                    }
                    let tail = self.copy_term(cur, map, canonical);
                    let items: Vec<Term> = items
                        .into_iter()
                        .map(|h| self.copy_term(h, map, canonical))
                        .collect();
                    self.store.list_with_tail(items, tail)
                }
                View::Struct(f, args) => {
                    let args = args.to_vec();
                    let ts: Vec<Term> = args
                        .into_iter()
                        .map(|a| self.copy_term(a, map, canonical))
                        .collect();
                    self.store.structure(f, &ts)
                }
                View::Array(args) => {
                    let args = args.to_vec();
                    let ts: Vec<Term> = args
                        .into_iter()
                        .map(|a| self.copy_term(a, map, canonical))
                        .collect();
                    self.store.array(&ts)
                }
                _ => t,
            },
            _ => t,
        }
    }

    /// Dereferenced copy that keeps unbound variables as they are.
    pub(crate) fn resolve(&mut self, t: Term) -> Term {
        let t = self.deref(t);
        match t {
            Term::Node(_) if !self.store.is_ground(t) => match self.store.view(t) {
                View::Cons(..) => {
                    let mut items = Vec::new();
                    let mut cur = t;
                    loop {
                        match self.store.view(cur) {
                            View::Cons(h, tl) => {
                                items.push(h);
                                cur = self.deref(tl);
                            }
                            _ => break,
                        }
                    }
                    let tail = self.resolve(cur);
                    let items: Vec<Term> = items.into_iter().map(|h| self.resolve(h)).collect();
                    self.store.list_with_tail(items, tail)
                }
                View::Struct(f, args) => {
                    let args = args.to_vec();
                    let ts: Vec<Term> = args.into_iter().map(|a| self.resolve(a)).collect();
                    self.store.structure(f, &ts)
                }
                View::Array(args) => {
                    let args = args.to_vec();
                    let ts: Vec<Term> = args.into_iter().map(|a| self.resolve(a)).collect();
                    self.store.array(&ts)
                }
                _ => t,
            },
            _ => t,
        }
    }

    /// Elements of a proper list (following bindings).
    pub(crate) fn list_vec(&self, t: Term) -> EResult<Vec<Term>> {
        let mut out = Vec::new();
        let mut cur = self.deref(t);
        loop {
            match self.store.view(cur) {
                View::Nil => return Ok(out),
                View::Cons(h, tl) => {
                    out.push(h);
                    cur = self.deref(tl);
                }
                View::Var(_) => {
                    return Err(EngineError::Instantiation("partial list".into()));
                }
                _ => {
                    return Err(EngineError::Type(format!(
                        "expected a list, found {}",
                        self.format_term(t)
                    )))
                }
            }
        }
    }

    pub(crate) fn int_of(&self, t: Term, what: &str) -> EResult<i64> {
        match self.deref(t) {
            Term::Int(n) => Ok(n),
            Term::Var(_) => Err(EngineError::Instantiation(format!("unbound {what}"))),
            other => Err(EngineError::Type(format!(
                "{what} must be an integer, found {}",
                self.format_term(other)
            ))),
        }
    }
}
