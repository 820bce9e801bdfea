//! The `subt` command line: dialogues, reduction search, the lattice suite,
//! constructions and their replay, and jump tables.
//!
//! Exit codes are fixed for scripting: 0 pass or witnessed, 1 refuted,
//! 2 usage, 3 inconclusive, 4 contract abort.

pub mod input;
pub mod lattice;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use subt_core::constructions::scenarios::{bundled, default_budget};
use subt_core::constructions::{replay_bytes, ConstructionName, SCHEMA_VERSION};
use subt_core::machine::{encode, run_dialogue, Budget, DialogueOutcome, Program};
use subt_core::pairing::Nat;
use subt_core::partialfn::{k_jump, JumpAnswer, PartialFn};
use subt_core::search::{search_reduction, SearchResult};
use subt_core::Error;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_REFUTED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INCONCLUSIVE: u8 = 3;
pub const EXIT_CONTRACT_ABORT: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "subt", version, about = "SubTuring reducibility workbench")]
pub struct Cli {
    /// Worker threads for independent checks; output never depends on it.
    #[arg(long, env = "SUBT_JOBS", global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

/// Budget overrides. Unset fields fall back to the command's defaults.
#[derive(Args, Debug, Clone, Default)]
pub struct BudgetArgs {
    /// Machine steps per dialogue, summed over all rounds.
    #[arg(long, env = "SUBT_BUDGET_STEPS")]
    pub steps: Option<u64>,
    /// Maximum answered queries per dialogue.
    #[arg(long)]
    pub rounds: Option<u64>,
    /// Steps a lazy oracle may spend on one query.
    #[arg(long)]
    pub oracle_fuel: Option<u64>,
}

impl BudgetArgs {
    pub fn resolve(&self, defaults: Budget) -> Result<Budget, Error> {
        Budget::new(
            self.steps.unwrap_or(defaults.step_fuel),
            self.rounds.unwrap_or(defaults.round_cap),
            self.oracle_fuel.unwrap_or(defaults.oracle_fuel),
        )
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run one dialogue and print its outcome as JSON.
    Run {
        /// Program file, in the text format or as JSON.
        #[arg(long, conflicts_with = "index", required_unless_present = "index")]
        program: Option<PathBuf>,
        /// Program index instead of a file.
        #[arg(long)]
        index: Option<Nat>,
        /// Oracle as partial function JSON; the empty function if absent.
        #[arg(long)]
        oracle: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        input: Nat,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Search indices for a reduction of f to g.
    Reduce {
        f: PathBuf,
        g: PathBuf,
        #[arg(long, default_value_t = 256)]
        index_bound: Nat,
        /// Inputs to check, as `a..b` or `a,b,c`; defaults to the table domain of f.
        #[arg(long)]
        domain: Option<String>,
        /// Where to write the witness or certificate; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Check join, meet and graph laws on random finite functions.
    LatticeCheck {
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
        /// Inputs `0..grid` are checked for each instance.
        #[arg(long, default_value_t = 64)]
        grid: Nat,
        #[arg(long, default_value_t = 1000)]
        instances: u64,
        /// Deliberately break the join, to confirm the suite notices.
        #[arg(long)]
        inject_fault: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Run a bundled construction and write its transcript.
    Construct {
        #[arg(value_parser = parse_construction)]
        name: ConstructionName,
        /// Last stage to run; each construction has its own default.
        #[arg(long)]
        e_max: Option<Nat>,
        /// Defaults to `<name>.transcript.json`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Re-verify every certificate of a transcript.
    Replay { transcript: PathBuf },
    /// Classify `Φ_e[f](e)` for a range of indices.
    Jump {
        f: PathBuf,
        /// Indices as `a..b` or `a,b,c`.
        #[arg(long, default_value = "0..64")]
        index_range: String,
        #[command(flatten)]
        budget: BudgetArgs,
    },
}

fn parse_construction(s: &str) -> Result<ConstructionName, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ContractAbort(_) => EXIT_CONTRACT_ABORT,
        Error::ReplayMismatch { .. } => EXIT_REFUTED,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` and runs the command, returning the exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code() as u8;
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        pool = pool.num_threads(j);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start {} workers: {e}", cli.jobs.unwrap_or(0));
            return EXIT_USAGE;
        }
    };
    match pool.install(|| dispatch(cli.command)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: Command) -> Result<u8, Error> {
    match cmd {
        Command::Run { program, index, oracle, input, budget } => {
            cmd_run(program.as_deref(), index, oracle.as_deref(), input, &budget)
        }
        Command::Reduce { f, g, index_bound, domain, out, budget } => {
            cmd_reduce(&f, &g, index_bound, domain.as_deref(), out.as_deref(), &budget)
        }
        Command::LatticeCheck { seed, grid, instances, inject_fault, out, budget } => {
            let cfg = lattice::SuiteConfig { seed, instances, grid, budget: budget.resolve(Budget::default())?, inject_fault };
            cmd_lattice_check(&cfg, out.as_deref())
        }
        Command::Construct { name, e_max, out, budget } => cmd_construct(name, e_max, out, &budget),
        Command::Replay { transcript } => cmd_replay(&transcript),
        Command::Jump { f, index_range, budget } => cmd_jump(&f, &index_range, &budget),
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, Error> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, text).map_err(Error::from),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct RunConfig<'a> {
    command: &'static str,
    program: &'a Program,
    program_index: Option<Nat>,
    oracle: &'a PartialFn,
    input: Nat,
    budget: Budget,
}

#[derive(Serialize)]
struct RunOutput<'a> {
    #[serde(flatten)]
    outcome: &'a DialogueOutcome,
    schema_version: u32,
    config: RunConfig<'a>,
}

fn cmd_run(
    program: Option<&Path>,
    index: Option<Nat>,
    oracle: Option<&Path>,
    n: Nat,
    budget: &BudgetArgs,
) -> Result<u8, Error> {
    let p = input::program(program, index)?;
    let g = match oracle {
        Some(path) => input::partial_fn(path)?,
        None => PartialFn::empty(),
    };
    let b = budget.resolve(Budget::default())?;
    let out = run_dialogue(&p, &g, n, &b);
    let config = RunConfig { command: "run", program: &p, program_index: encode(&p).ok(), oracle: &g, input: n, budget: b };
    let text = serde_json::to_string(&RunOutput { outcome: &out, schema_version: SCHEMA_VERSION, config })?;
    println!("{text}");
    Ok(EXIT_PASS)
}

#[derive(Serialize)]
struct ReduceOutput<'a> {
    schema_version: u32,
    config: ReduceConfig<'a>,
    verdict: &'static str,
    #[serde(flatten)]
    result: &'a SearchResult,
}

#[derive(Serialize)]
struct ReduceConfig<'a> {
    command: &'static str,
    f: &'a PartialFn,
    g: &'a PartialFn,
    index_bound: Nat,
    domain: &'a [Nat],
    budget: Budget,
}

fn cmd_reduce(
    f_path: &Path,
    g_path: &Path,
    index_bound: Nat,
    domain: Option<&str>,
    out: Option<&Path>,
    budget: &BudgetArgs,
) -> Result<u8, Error> {
    let f = input::partial_fn(f_path)?;
    let g = input::partial_fn(g_path)?;
    let domain = match domain {
        Some(spec) => input::nat_list(spec)?,
        None => match f.entries() {
            Some(t) => t.keys().copied().collect(),
            None => return Err(Error::InvalidArgument("f is not a table; give --domain".into())),
        },
    };
    let b = budget.resolve(Budget::default())?;
    let result = search_reduction(&f, &g, index_bound, &domain, &b);
    let (verdict, code) = match &result {
        SearchResult::Witness(_) => ("witnessed", EXIT_PASS),
        SearchResult::Refuted(c) if c.is_exact() => ("refuted", EXIT_REFUTED),
        SearchResult::Refuted(_) => ("inconclusive", EXIT_INCONCLUSIVE),
    };
    let config = ReduceConfig { command: "reduce", f: &f, g: &g, index_bound, domain: &domain, budget: b };
    emit(&to_json(&ReduceOutput { schema_version: SCHEMA_VERSION, config, verdict, result: &result })?, out)?;
    match &result {
        SearchResult::Witness(w) => eprintln!("witnessed by index {:?}", w.program_index),
        SearchResult::Refuted(c) => {
            eprintln!("{verdict}: no index up to {index_bound} works ({} budget-limited)", c.unknown_count)
        }
    }
    Ok(code)
}

fn cmd_lattice_check(cfg: &lattice::SuiteConfig, out: Option<&Path>) -> Result<u8, Error> {
    let report = lattice::run_suite(cfg);
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for p in &report.properties {
        let name = serde_json::to_value(p.property)?;
        let name = name.as_str().unwrap_or_default();
        match &p.first_failure {
            None => println!("{name:<24} {:>6} passed {:>6} failed", p.passed, p.failed),
            Some((i, why)) => {
                println!("{name:<24} {:>6} passed {:>6} failed  first at instance {i}: {why}", p.passed, p.failed)
            }
        }
    }
    if let Some(path) = out {
        emit(&to_json(&report)?, Some(path))?;
    }
    let violations = report.violations();
    println!("{} instances, {violations} violations", cfg.instances);
    Ok(if violations == 0 { EXIT_PASS } else { EXIT_REFUTED })
}

fn cmd_construct(name: ConstructionName, e_max: Option<Nat>, out: Option<PathBuf>, budget: &BudgetArgs) -> Result<u8, Error> {
    let b = budget.resolve(default_budget())?;
    let t = bundled(name, e_max, &b)?;
    let path = out.unwrap_or_else(|| PathBuf::from(format!("{name}.transcript.json")));
    fs::write(&path, t.to_bytes())?;
    println!(
        "{}: {} stages, {} satisfied, {} inconclusive",
        path.display(),
        t.summary.stages,
        t.summary.satisfied,
        t.summary.inconclusive
    );
    Ok(EXIT_PASS)
}

fn cmd_replay(path: &Path) -> Result<u8, Error> {
    let bytes = fs::read(path)?;
    match replay_bytes(&bytes) {
        Ok(r) => {
            println!(
                "ok: {} with {} stages, {} dialogues and {} bounded answers re-verified",
                r.construction, r.stages, r.evidence_runs, r.bounded_answers
            );
            Ok(EXIT_PASS)
        }
        Err(e) => {
            println!("replay failed: {e}");
            Ok(EXIT_REFUTED)
        }
    }
}

#[derive(Serialize)]
struct JumpConfig<'a> {
    command: &'static str,
    f: &'a PartialFn,
    indices: &'a [Nat],
    budget: Budget,
}

fn jump_detail(a: JumpAnswer) -> String {
    match a {
        JumpAnswer::UndefinedFrozen { query } => format!("query {query}"),
        JumpAnswer::Unknown { reason } => serde_json::to_value(reason)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default(),
        _ => String::new(),
    }
}

fn cmd_jump(f_path: &Path, range: &str, budget: &BudgetArgs) -> Result<u8, Error> {
    let f = input::partial_fn(f_path)?;
    let indices = input::nat_list(range)?;
    let b = budget.resolve(Budget::default())?;
    let rows: Vec<JumpAnswer> = indices.par_iter().map(|&e| k_jump(&f, e, &b)).collect();
    let config = JumpConfig { command: "jump", f: &f, indices: &indices, budget: b };
    println!("# schema_version {SCHEMA_VERSION}");
    println!("# config {}", serde_json::to_string(&config)?);
    println!("{:>8}  {:<18} detail", "index", "class");
    for (&e, a) in indices.iter().zip(&rows) {
        let row = format!("{e:>8}  {:<18} {}", a.label(), jump_detail(*a));
        println!("{}", row.trim_end());
    }
    for label in ["one", "zero_certified", "undefined_frozen", "unknown"] {
        println!("# {label} {}", rows.iter().filter(|a| a.label() == label).count());
    }
    Ok(EXIT_PASS)
}
