//! Rule interpreter: pattern-matching rules with explicit choice points,
//! function application, arithmetic and builtins.

mod arith;
mod builtins;
pub(crate) mod compile;
mod cpbridge;
mod machine;
mod print;

use std::collections::HashMap;
use std::io::Write;
use std::rc::Rc;

use thiserror::Error;

use crate::parser::{self, ParseError};
use crate::planner::{PlanStats, PlannerState};
use crate::tabling::{TableStats, Tables};
use crate::term::{Store, Term, VarId};

pub use compile::Backend;
pub(crate) use arith::apply as arith_apply;
pub(crate) use compile::ArOp;
pub(crate) use compile::{Goal, Pred, PredId};
pub(crate) use machine::{AltStream, ChoicePoint, Cont, Env, Frame, Step};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("unknown_predicate: {0}")]
    UnknownPredicate(String),
    #[error("unresolved_function_call: {0}")]
    UnresolvedFunctionCall(String),
    #[error("instantiation error: {0}")]
    Instantiation(String),
    #[error("type error: {0}")]
    Type(String),
    #[error("index error: {0}")]
    Index(String),
    #[error("evaluation error: {0}")]
    Eval(String),
    #[error("unsupported_constraint: backend {backend} does not support {constraint}")]
    Unsupported { backend: String, constraint: String },
    #[error("context error: {0}")]
    Context(String),
    #[error("{0}")]
    Other(String),
}

impl EngineError {
    /// Short exception name, e.g. `unresolved_function_call`.
    pub fn kind(&self) -> &'static str {
        match self {
            EngineError::UnknownPredicate(_) => "unknown_predicate",
            EngineError::UnresolvedFunctionCall(_) => "unresolved_function_call",
            EngineError::Instantiation(_) => "instantiation_error",
            EngineError::Type(_) => "type_error",
            EngineError::Index(_) => "index_error",
            EngineError::Eval(_) => "evaluation_error",
            EngineError::Unsupported { .. } => "unsupported_constraint",
            EngineError::Context(_) => "context_error",
            EngineError::Other(_) => "error",
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Engine(#[from] EngineError),
}

pub type EResult<T> = Result<T, EngineError>;

/// One solution of a query: bindings of the query's named variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub bindings: Vec<(String, String)>,
}

impl Solution {
    pub fn get(&self, name: &str) -> Option<&str> {
        self.bindings
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_str())
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Slot {
    pub val: Option<Term>,
    /// Index into the constraint store when this variable has a domain.
    pub cp: Option<u32>,
}

#[derive(Clone, Debug)]
pub(crate) enum TrailEntry {
    Bind(VarId),
    Attr(VarId),
    CpVar,
    Dom(u32, crate::cp::Domain),
    DomVal(u32, i64),
    Con,
}

/// Where program output goes.
pub enum Output {
    Capture(String),
    Stream(Box<dyn Write>),
}

/// Options that influence solving and search.
#[derive(Clone, Debug)]
pub struct EngineOptions {
    pub backend: Option<Backend>,
    pub tabling: bool,
    pub seed: u64,
    pub plan_limit: i64,
    pub plan_step: i64,
    pub sat_learning: bool,
    pub emit_dimacs: Option<std::path::PathBuf>,
    pub emit_lp: Option<std::path::PathBuf>,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            backend: None,
            tabling: true,
            seed: 0,
            plan_limit: crate::planner::DEFAULT_LIMIT,
            plan_step: 1,
            sat_learning: true,
            emit_dimacs: None,
            emit_lp: None,
        }
    }
}

pub struct Engine {
    pub store: Store,
    pub(crate) preds: Vec<Pred>,
    pub(crate) pred_index: HashMap<(String, usize, bool), PredId>,
    pub(crate) imports: Vec<String>,
    pub(crate) slots: Vec<Slot>,
    pub(crate) trail: Vec<TrailEntry>,
    pub(crate) cps: Vec<ChoicePoint>,
    pub(crate) cpstore: cpbridge::CpStore,
    pub(crate) tables: Tables,
    pub(crate) planner: PlannerState,
    pub(crate) resources: Vec<i64>,
    pub options: EngineOptions,
    output: Output,
    pub(crate) syms: compile::CommonSyms,
    pub(crate) query_count: usize,
    pub(crate) search_stats: crate::cp::SearchStats,
    pub(crate) sat_stats: crate::sat::SolverStats,
}

impl Default for Engine {
    fn default() -> Self {
        Self::new()
    }
}

impl Engine {
    pub fn new() -> Self {
        let mut store = Store::new();
        let syms = compile::CommonSyms::new(&mut store);
        Engine {
            store,
            preds: Vec::new(),
            pred_index: HashMap::new(),
            imports: Vec::new(),
            slots: Vec::new(),
            trail: Vec::new(),
            cps: Vec::new(),
            cpstore: Default::default(),
            tables: Tables::default(),
            planner: PlannerState::default(),
            resources: Vec::new(),
            options: EngineOptions::default(),
            output: Output::Capture(String::new()),
            syms,
            query_count: 0,
            search_stats: Default::default(),
            sat_stats: Default::default(),
        }
    }

    /// Parses, lowers and loads a program.
    pub fn from_source(src: &str) -> Result<Self, Error> {
        let mut e = Engine::new();
        e.load(src)?;
        Ok(e)
    }

    pub fn load(&mut self, src: &str) -> Result<(), Error> {
        let prog = parser::parse_program(src)?;
        let prog = parser::lower_program(prog)?;
        compile::load_program(self, prog)?;
        Ok(())
    }

    pub fn set_output(&mut self, out: Output) {
        self.output = out;
    }

    /// Returns and clears captured output.
    pub fn take_output(&mut self) -> String {
        match &mut self.output {
            Output::Capture(s) => std::mem::take(s),
            Output::Stream(_) => String::new(),
        }
    }

    pub(crate) fn write_out(&mut self, s: &str) {
        match &mut self.output {
            Output::Capture(buf) => buf.push_str(s),
            Output::Stream(w) => {
                let _ = w.write_all(s.as_bytes());
            }
        }
    }

    pub fn flush_output(&mut self) {
        if let Output::Stream(w) = &mut self.output {
            let _ = w.flush();
        }
    }

    /// Backend chosen by options, else by `import`, else CP.
    pub fn backend(&self) -> Backend {
        if let Some(b) = self.options.backend {
            return b;
        }
        for imp in self.imports.iter().rev() {
            match imp.as_str() {
                "sat" => return Backend::Sat,
                "mip" => return Backend::Mip,
                "cp" => return Backend::Cp,
                _ => {}
            }
        }
        Backend::Cp
    }

    pub fn table_stats(&self) -> TableStats {
        self.tables.stats(self)
    }

    /// Per tabled predicate: `(name/arity, stats)`.
    pub fn table_stats_by_pred(&self) -> Vec<(String, TableStats)> {
        self.tables
            .by_pred()
            .into_iter()
            .map(|(pid, st)| {
                let p = &self.preds[pid];
                (format!("{}/{}", p.name, p.arity - usize::from(p.function)), st)
            })
            .collect()
    }

    /// Counters of the CP searches run so far.
    pub fn search_stats(&self) -> crate::cp::SearchStats {
        self.search_stats
    }

    /// Counters of the SAT searches run so far.
    pub fn sat_stats(&self) -> crate::sat::SolverStats {
        self.sat_stats
    }

    pub fn plan_stats(&self) -> PlanStats {
        self.planner.stats.clone()
    }

    pub fn reset_tables(&mut self) {
        self.tables.clear();
        self.planner.clear();
    }

    pub fn has_predicate(&self, name: &str, arity: usize) -> bool {
        self.pred_index.contains_key(&(name.to_string(), arity, false))
    }

    /// Starts a query. Solutions are produced by [`Query::next_solution`].
    pub fn query(&mut self, goal: &str) -> Result<Query<'_>, Error> {
        let (goals, env_vars, nvars) = compile::compile_query(self, goal)?;
        Ok(Query {
            eng: self,
            goals,
            names: env_vars,
            nvars,
            state: QueryState::Fresh,
        })
    }

    /// All solutions of `goal` (at most `limit` when given).
    pub fn solve_all(&mut self, goal: &str, limit: Option<usize>) -> Result<Vec<Solution>, Error> {
        let mut q = self.query(goal)?;
        let mut out = Vec::new();
        while limit.map_or(true, |l| out.len() < l) {
            match q.next_solution()? {
                Some(s) => out.push(s),
                None => break,
            }
        }
        Ok(out)
    }

    /// First solution of `goal`, if any.
    pub fn solve_once(&mut self, goal: &str) -> Result<Option<Solution>, Error> {
        Ok(self.solve_all(goal, Some(1))?.into_iter().next())
    }

    /// Resets all dynamic state after a query finished or failed.
    pub(crate) fn reset_machine(&mut self) {
        self.undo_to(0);
        self.cps.clear();
        self.slots.clear();
        self.resources.clear();
    }
}

enum QueryState {
    Fresh,
    Running { env: Env },
    Done,
}

pub struct Query<'a> {
    eng: &'a mut Engine,
    goals: Rc<[Goal]>,
    names: Vec<(String, u32)>,
    nvars: usize,
    state: QueryState,
}

impl Query<'_> {
    pub fn engine(&mut self) -> &mut Engine {
        self.eng
    }

    pub fn next_solution(&mut self) -> Result<Option<Solution>, EngineError> {
        let found = match &self.state {
            QueryState::Done => return Ok(None),
            QueryState::Fresh => {
                self.eng.reset_machine();
                let env: Env = Rc::new((0..self.nvars).map(|_| self.eng.fresh_var()).collect());
                let cont = Some(Rc::new(Frame::Goals {
                    goals: self.goals.clone(),
                    pc: 0,
                    env: env.clone(),
                    next: None,
                }));
                self.state = QueryState::Running { env };
                self.eng.run(cont, 0)
            }
            QueryState::Running { .. } => match self.eng.backtrack(0) {
                Ok(Some(c)) => self.eng.run(c, 0),
                Ok(None) => Ok(false),
                Err(e) => Err(e),
            },
        };
        let found = match found {
            Ok(f) => f,
            Err(e) => {
                self.state = QueryState::Done;
                self.eng.reset_machine();
                return Err(e);
            }
        };
        self.eng.flush_output();
        if !found {
            self.state = QueryState::Done;
            self.eng.reset_machine();
            return Ok(None);
        }
        let QueryState::Running { env } = &self.state else {
            unreachable!("running query has an environment")
        };
        let env = env.clone();
        let mut bindings = Vec::new();
        for (name, slot) in &self.names {
            let t = env[*slot as usize];
            bindings.push((name.clone(), self.eng.format_term(t)));
        }
        Ok(Some(Solution { bindings }))
    }
}

impl Drop for Query<'_> {
    fn drop(&mut self) {
        self.eng.reset_machine();
    }
}
