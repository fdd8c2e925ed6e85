//! `pl9`: run a program and print solutions of a goal.

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use pl9::engine::Backend;
use pl9::{Engine, Error, Output};

#[derive(Parser, Debug)]
#[command(name = "pl9", version, about = "Run a logic program")]
struct Cli {
    /// Program source file.
    source: PathBuf,
    /// Goal to run.
    #[arg(long, default_value = "main")]
    goal: String,
    /// Print every solution instead of the first.
    #[arg(long)]
    all: bool,
    /// Constraint solver: cp, sat or mip.
    #[arg(long)]
    backend: Option<Backend>,
    /// Write the CNF of each solve call here (sat only).
    #[arg(long, value_name = "PATH")]
    emit_dimacs: Option<PathBuf>,
    /// Write the LP of each solve call here (mip only).
    #[arg(long, value_name = "PATH")]
    emit_lp: Option<PathBuf>,
    /// Print tabling counters to stderr.
    #[arg(long)]
    table_stats: bool,
    /// Print planner counters to stderr.
    #[arg(long)]
    plan_stats: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Default resource limit for best_plan/2 and plan/2.
    #[arg(long)]
    limit: Option<i64>,
    /// Budget increment between best_plan rounds.
    #[arg(long, default_value_t = 1)]
    step: i64,
}

enum Outcome {
    Success,
    Failure,
    Error,
}

fn run(cli: &Cli) -> Outcome {
    let src = match std::fs::read_to_string(&cli.source) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{}: {e}", cli.source.display());
            return Outcome::Error;
        }
    };
    let mut eng = Engine::new();
    eng.options.backend = cli.backend;
    eng.options.seed = cli.seed;
    if let Some(l) = cli.limit {
        eng.options.plan_limit = l;
    }
    if cli.step < 1 {
        eprintln!("error: --step must be at least 1");
        return Outcome::Error;
    }
    eng.options.plan_step = cli.step;
    if let Err(e) = eng.load(&src) {
        report(&cli.source, &e);
        return Outcome::Error;
    }
    let backend = eng.backend();
    if cli.emit_dimacs.is_some() && backend != Backend::Sat {
        eprintln!("error: --emit-dimacs requires --backend sat");
        return Outcome::Error;
    }
    if cli.emit_lp.is_some() && backend != Backend::Mip {
        eprintln!("error: --emit-lp requires --backend mip");
        return Outcome::Error;
    }
    eng.options.emit_dimacs = cli.emit_dimacs.clone();
    eng.options.emit_lp = cli.emit_lp.clone();
    eng.set_output(Output::Stream(Box::new(io::stdout())));

    let outcome = solve(&mut eng, cli);
    eng.flush_output();
    let _ = io::stdout().flush();
    print_stats(&eng, cli);
    outcome
}

fn solve(eng: &mut Engine, cli: &Cli) -> Outcome {
    let mut q = match eng.query(&cli.goal) {
        Ok(q) => q,
        Err(e) => {
            report(std::path::Path::new("goal"), &e);
            return Outcome::Error;
        }
    };
    let mut found = false;
    loop {
        match q.next_solution() {
            Ok(Some(sol)) => {
                found = true;
                if !sol.bindings.is_empty() {
                    let line: Vec<String> = sol.bindings.iter().map(|(n, v)| format!("{n} = {v}")).collect();
                    q.engine().flush_output();
                    println!("{}", line.join(", "));
                }
                if !cli.all {
                    break;
                }
            }
            Ok(None) => break,
            Err(e) => {
                q.engine().flush_output();
                let _ = io::stdout().flush();
                eprintln!("error: {e}");
                return Outcome::Error;
            }
        }
    }
    if found {
        Outcome::Success
    } else {
        Outcome::Failure
    }
}

fn report(origin: &std::path::Path, e: &Error) {
    match e {
        Error::Parse(p) => eprintln!("{}:{p}", origin.display()),
        Error::Engine(err) => eprintln!("error: {err}"),
    }
}

fn print_stats(eng: &Engine, cli: &Cli) {
    if !cli.table_stats && !cli.plan_stats {
        return;
    }
    let mut err = io::stderr().lock();
    let s = eng.store.stats();
    let _ = writeln!(err, "store.node_count {}", s.node_count);
    let _ = writeln!(err, "store.intern_hits {}", s.intern_hits);
    let _ = writeln!(err, "store.intern_misses {}", s.intern_misses);
    let _ = writeln!(err, "store.heap_nodes {}", s.heap_nodes);
    let _ = writeln!(err, "store.hash_traversals {}", s.hash_traversals);
    let c = eng.search_stats();
    let _ = writeln!(err, "search.nodes {}", c.nodes);
    let _ = writeln!(err, "search.failures {}", c.failures);
    let _ = writeln!(err, "search.propagations {}", c.propagations);
    let _ = writeln!(err, "search.solutions {}", c.solutions);
    let sat = eng.sat_stats();
    let _ = writeln!(err, "sat.decisions {}", sat.decisions);
    let _ = writeln!(err, "sat.conflicts {}", sat.conflicts);
    let _ = writeln!(err, "sat.propagations {}", sat.propagations);
    let _ = writeln!(err, "sat.learned {}", sat.learned);
    if cli.table_stats {
        let t = eng.table_stats();
        let _ = writeln!(err, "table.entries {}", t.entries);
        let _ = writeln!(err, "table.answers {}", t.answers);
        let _ = writeln!(err, "table.producer_evaluations {}", t.producer_evaluations);
        let _ = writeln!(err, "table.producer_iterations {}", t.producer_iterations);
        let _ = writeln!(err, "table.consumer_calls {}", t.consumer_calls);
        let _ = writeln!(err, "table.loops_detected {}", t.loops_detected);
        for (name, p) in eng.table_stats_by_pred() {
            let _ = writeln!(err, "table.{name}.entries {}", p.entries);
            let _ = writeln!(err, "table.{name}.answers {}", p.answers);
            let _ = writeln!(err, "table.{name}.producer_evaluations {}", p.producer_evaluations);
            let _ = writeln!(err, "table.{name}.producer_iterations {}", p.producer_iterations);
            let _ = writeln!(err, "table.{name}.consumer_calls {}", p.consumer_calls);
        }
    }
    if cli.plan_stats {
        let p = eng.plan_stats();
        let _ = writeln!(err, "plan.states_interned {}", p.states_interned);
        let _ = writeln!(err, "plan.states_expanded {}", p.states_expanded);
        let _ = writeln!(err, "plan.reexpansions {}", p.reexpansions);
        let _ = writeln!(err, "plan.skips {}", p.skips);
        let _ = writeln!(err, "plan.reuses {}", p.reuses);
        let _ = writeln!(err, "plan.rounds {}", p.rounds);
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let handle = std::thread::Builder::new()
        .stack_size(1 << 30)
        .spawn(move || run(&cli))
        .expect("spawn interpreter thread");
    match handle.join() {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Failure) => ExitCode::from(1),
        Ok(Outcome::Error) | Err(_) => ExitCode::from(2),
    }
}
