//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on a runtime failure (including a failed
//! comparison), 2 on unusable input.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::WeightedMarkovChain;
use crate::compare::{compare, DEFAULT_Z};
use crate::game::{builtin_game, compile_game, parse_game_spec, GameSpec};
use crate::rational::{format_fraction, to_decimal, Rational};
use crate::simulate::{simulate, simulate_chain, SimConfig, SimulationReport};
use crate::stats::{summarize, StatsReport, ValueReport};
use crate::umbra::{run_absorption_from, AbsorptionRecord, UmbraError};

#[derive(Debug, Parser)]
#[command(name = "umbral", version, about = "Exact absorption analysis of weighted Markov chains and Count Your Chickens! boards")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact joint law of (rounds, capital) at absorption and its statistics.
    Analyze(AnalyzeArgs),
    /// Seeded Monte Carlo play.
    Simulate(SimulateArgs),
    /// Exact statistics side by side with a simulation, checked at 4 standard errors.
    Compare(CompareArgs),
    /// Print the compiled chain as JSON.
    DumpChain(DumpArgs),
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Game spec or chain JSON file (detected by a `board` or `edges` field).
    pub input: Option<PathBuf>,
    /// Use a builtin board: `simplified` or `full`.
    #[arg(long, conflicts_with = "input")]
    pub builtin: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Horizon: number of rounds to evolve.
    #[arg(short = 'M', long = "rounds", default_value_t = 60, value_parser = clap::value_parser!(u32).range(1..))]
    pub rounds: u32,
    /// Decimal places in reported statistics.
    #[arg(long, default_value_t = 13, value_parser = clap::value_parser!(u32).range(1..))]
    pub digits: u32,
    /// Also emit every (round, absorbing state) polynomial of the unconditioned record.
    #[arg(long)]
    pub full_record: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    #[arg(long, default_value_t = 1_000_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Rounds after which a trial is censored (default: 10 × M).
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub round_cap: Option<u32>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Analysis horizon; only sets the default round cap.
    #[arg(short = 'M', long = "rounds", default_value_t = 60, value_parser = clap::value_parser!(u32).range(1..))]
    pub rounds: u32,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    #[arg(short = 'M', long = "rounds", default_value_t = 60, value_parser = clap::value_parser!(u32).range(1..))]
    pub rounds: u32,
    /// Simulate this builtin name or file instead of the analyzed model.
    #[arg(long)]
    pub against: Option<String>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DumpArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

/// What a command produced.
#[derive(Debug, Clone)]
pub struct Rendered {
    pub text: String,
    pub output: Option<PathBuf>,
    pub success: bool,
}

/// A loaded input: either a board or a bare chain.
#[derive(Debug, Clone)]
pub enum Model {
    Game(GameSpec),
    Chain(WeightedMarkovChain),
}

impl Model {
    /// Chain, start state, initial capital and win threshold.
    fn compiled(&self) -> Result<(WeightedMarkovChain, String, i64, i64), CliError> {
        match self {
            Model::Game(spec) => {
                let chain = compile_game(spec).map_err(|e| CliError::Input(e.to_string()))?;
                Ok((chain, "1".to_string(), 0, spec.win_threshold))
            }
            Model::Chain(chain) => {
                let start = chain
                    .start_state()
                    .ok_or_else(|| CliError::Input("chain has no transient states".into()))?
                    .to_string();
                Ok((chain.clone(), start, chain.initial(), chain.support.max))
            }
        }
    }
}

/// Parses a game spec or chain document, deciding by its top-level fields.
pub fn parse_model(text: &str) -> Result<Model, CliError> {
    let value: serde_json::Value = match serde_json::from_str(text) {
        Ok(v) => v,
        // let the game parser produce a located diagnostic
        Err(_) => return parse_game_spec(text).map(Model::Game).map_err(|e| CliError::Input(e.to_string())),
    };
    if value.get("edges").is_some() {
        let chain = WeightedMarkovChain::from_json(text).map_err(|e| CliError::Input(e.to_string()))?;
        chain.ensure_valid().map_err(|e| CliError::Input(e.to_string()))?;
        Ok(Model::Chain(chain))
    } else if value.get("board").is_some() {
        parse_game_spec(text).map(Model::Game).map_err(|e| CliError::Input(e.to_string()))
    } else {
        Err(CliError::Input("input is neither a game spec (`board`) nor a chain (`edges`)".into()))
    }
}

fn load_path(path: &Path) -> Result<Model, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    parse_model(&text)
}

fn load_builtin(name: &str) -> Result<Model, CliError> {
    builtin_game(name).map(Model::Game).map_err(|e| CliError::Input(e.to_string()))
}

fn load(input: &InputArgs) -> Result<Model, CliError> {
    match (&input.input, &input.builtin) {
        (Some(path), _) => load_path(path),
        (None, Some(name)) => load_builtin(name),
        (None, None) => Err(CliError::Input("an input file or --builtin is required".into())),
    }
}

/// Runs `rounds` rounds of the model and returns the raw record.
fn absorb(model: &Model, rounds: u32) -> Result<(AbsorptionRecord, i64), CliError> {
    let (chain, start, initial, threshold) = model.compiled()?;
    let record = run_absorption_from(&chain, &start, initial, rounds).map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok((record, threshold))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbsorbingEntry {
    pub state: String,
    /// Conditional on absorption within the horizon.
    pub probability: ValueReport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordEntry {
    pub round: u32,
    pub state: String,
    /// `[exponent, "p/q"]` pairs with nonzero coefficients.
    pub coefficients: Vec<(i64, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    #[serde(flatten)]
    pub summary: StatsReport,
    pub absorbing: Vec<AbsorbingEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record: Option<Vec<RecordEntry>>,
}

pub fn analyze_report(model: &Model, rounds: u32, digits: usize, full_record: bool) -> Result<AnalyzeReport, CliError> {
    let (record, threshold) = absorb(model, rounds)?;
    let summary = match summarize(&record, threshold) {
        Ok(stats) => StatsReport::new(&stats, digits),
        Err(UmbraError::NothingAbsorbed) => StatsReport::undefined(&record.epsilon, record.rounds_run),
        Err(e) => return Err(CliError::Runtime(e.to_string())),
    };
    let absorbing = match record.conditional() {
        Ok(cond) => cond
            .absorption_by_state()
            .iter()
            .map(|(state, p)| AbsorbingEntry { state: state.clone(), probability: value_report(p, digits) })
            .collect(),
        Err(_) => Vec::new(),
    };
    let record = full_record.then(|| {
        record
            .absorbed
            .iter()
            .map(|((round, state), poly)| RecordEntry {
                round: *round,
                state: state.clone(),
                coefficients: poly.terms().map(|(e, c)| (e, format_fraction(c))).collect(),
            })
            .collect()
    });
    Ok(AnalyzeReport { summary, absorbing, record })
}

fn value_report(q: &Rational, digits: usize) -> ValueReport {
    ValueReport { decimal: to_decimal(q, digits), fraction: format_fraction(q) }
}

fn analyze_text(report: &AnalyzeReport) -> String {
    let mut out = report.summary.to_text();
    if report.absorbing.len() > 1 {
        for entry in &report.absorbing {
            let _ = writeln!(out, "{:<26}{}", format!("absorbed at {}", entry.state), entry.probability.decimal);
        }
    }
    if let Some(record) = &report.record {
        let _ = writeln!(out, "record (unconditioned, {} entries)", record.len());
        for entry in record {
            let terms: Vec<String> = entry.coefficients.iter().map(|(e, c)| format!("{c}*t^{e}")).collect();
            let _ = writeln!(out, "  round {} state {}: {}", entry.round, entry.state, terms.join(" + "));
        }
    }
    out
}

fn sim_config(args: &SimArgs, rounds: u32) -> SimConfig {
    SimConfig {
        trials: args.trials,
        seed: args.seed,
        round_cap: args.round_cap.unwrap_or(rounds.saturating_mul(10)),
    }
}

pub fn simulate_model(model: &Model, config: &SimConfig) -> Result<SimulationReport, CliError> {
    let result = match model {
        Model::Game(spec) => simulate(spec, config),
        Model::Chain(chain) => {
            let start = chain
                .start_state()
                .ok_or_else(|| CliError::Input("chain has no transient states".into()))?;
            simulate_chain(chain, start, chain.initial(), config)
        }
    };
    result.map_err(|e| CliError::Runtime(e.to_string()))
}

fn simulation_text(report: &SimulationReport) -> String {
    let mut out = String::new();
    let opt = |v: Option<f64>| v.map_or("undefined".to_string(), |v| format!("{v:.6}"));
    let _ = writeln!(out, "{:<18}{} (seed {})", "trials", report.trials, report.seed);
    let _ = writeln!(out, "{:<18}{}", "completed", report.completed);
    let _ = writeln!(out, "{:<18}{} (round cap {})", "censored", report.censored, report.round_cap);
    let _ = writeln!(out, "{:<18}{} ({:.6})", "wins", report.wins, report.win_rate);
    let _ = writeln!(out, "{:<18}{:.6}", "chicks mean", report.chick_mean);
    let _ = writeln!(out, "{:<18}{:.6}", "chicks variance", report.chick_variance);
    let _ = writeln!(out, "{:<18}{:.6}", "rounds mean", report.rounds_mean);
    let _ = writeln!(out, "{:<18}{:.6}", "rounds variance", report.rounds_variance);
    let _ = writeln!(out, "{:<18}{}", "correlation", opt(report.correlation));
    let hist = |h: &[(i64, u64)]| h.iter().map(|(k, c)| format!("{k}:{c}")).collect::<Vec<_>>().join(" ");
    let _ = writeln!(out, "{:<18}{}", "chick histogram", hist(&report.chick_histogram));
    let rounds: Vec<(i64, u64)> = report.rounds_histogram.iter().map(|&(k, c)| (i64::from(k), c)).collect();
    let _ = writeln!(out, "{:<18}{}", "rounds histogram", hist(&rounds));
    out
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    text
}

pub fn run(cli: Cli) -> Result<Rendered, CliError> {
    match cli.command {
        Command::Analyze(args) => {
            let model = load(&args.input)?;
            let report = analyze_report(&model, args.rounds, args.digits as usize, args.full_record)?;
            let text = match args.out.format {
                Format::Text => analyze_text(&report),
                Format::Json => to_json(&report),
            };
            Ok(Rendered { text, output: args.out.output, success: true })
        }
        Command::Simulate(args) => {
            let model = load(&args.input)?;
            let report = simulate_model(&model, &sim_config(&args.sim, args.rounds))?;
            let text = match args.out.format {
                Format::Text => simulation_text(&report),
                Format::Json => to_json(&report),
            };
            Ok(Rendered { text, output: args.out.output, success: true })
        }
        Command::Compare(args) => {
            let model = load(&args.input)?;
            let simulated = match &args.against {
                None => model.clone(),
                Some(other) if Path::new(other).exists() => load_path(Path::new(other))?,
                Some(other) => load_builtin(other)?,
            };
            let (record, threshold) = absorb(&model, args.rounds)?;
            let stats = summarize(&record, threshold).map_err(|e| CliError::Runtime(e.to_string()))?;
            let sim = simulate_model(&simulated, &sim_config(&args.sim, args.rounds))?;
            let comparison = compare(&stats, &sim, DEFAULT_Z);
            let text = match args.out.format {
                Format::Text => comparison.to_text(),
                Format::Json => to_json(&comparison),
            };
            Ok(Rendered { text, output: args.out.output, success: comparison.passed })
        }
        Command::DumpChain(args) => {
            let (chain, ..) = load(&args.input)?.compiled()?;
            let mut text = chain.to_json();
            text.push('\n');
            Ok(Rendered { text, output: args.output, success: true })
        }
    }
}

/// Parses the process arguments, runs, prints, and returns the exit code.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    match run(cli) {
        Ok(rendered) => {
            if let Some(path) = &rendered.output {
                if let Err(e) = std::fs::write(path, &rendered.text) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return 1;
                }
            } else {
                print!("{}", rendered.text);
            }
            if rendered.success {
                0
            } else {
                eprintln!("comparison failed");
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
