//! Command-line pipeline: simulate, estimate, solve, landscape, evaluate
//! and export-lp, each driven by a TOML run configuration.

pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{run_command, Outcome};
pub use config::RunConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_STRUCTURE: i32 = 3;
pub const EXIT_RUNTIME_CAP: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Structure(String),
    RuntimeCap(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Io(_) => EXIT_VALIDATION,
            CliError::Structure(_) => EXIT_STRUCTURE,
            CliError::RuntimeCap(_) => EXIT_RUNTIME_CAP,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Structure(m) => write!(f, "structure check failed: {m}"),
            CliError::RuntimeCap(m) => write!(f, "runtime cap reached: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<wearpolicy::Error> for CliError {
    fn from(e: wearpolicy::Error) -> Self {
        use wearpolicy::Error as E;
        let msg = e.to_string();
        match e {
            E::StructureViolation(_) => CliError::Structure(msg),
            E::NonTerminating { .. } | E::IterationCap { .. } => CliError::RuntimeCap(msg),
            E::Io(_) => CliError::Io(msg),
            _ => CliError::Validation(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "wearpolicy", version, about = "Wear-rate estimation and replacement policy optimisation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Verb {
    Simulate,
    Estimate,
    Solve,
    Landscape,
    Evaluate,
    ExportLp,
}

impl Verb {
    pub fn name(self) -> &'static str {
        match self {
            Verb::Simulate => "simulate",
            Verb::Estimate => "estimate",
            Verb::Solve => "solve",
            Verb::Landscape => "landscape",
            Verb::Evaluate => "evaluate",
            Verb::ExportLp => "export-lp",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate limit replacement and write the resulting history.
    Simulate(RunArgs),
    /// Estimate rate tables from a history by simulated annealing.
    Estimate(RunArgs),
    /// Solve for the optimal replacement policy and check its structure.
    Solve(RunArgs),
    /// Landscape diagnostics of the estimation objective.
    Landscape(RunArgs),
    /// Compare the optimal policy's mean cost with the history's.
    Evaluate(RunArgs),
    /// Write the linear-programming form of the replacement problem.
    ExportLp(RunArgs),
}

impl Command {
    pub fn split(self) -> (Verb, RunArgs) {
        match self {
            Command::Simulate(a) => (Verb::Simulate, a),
            Command::Estimate(a) => (Verb::Estimate, a),
            Command::Solve(a) => (Verb::Solve, a),
            Command::Landscape(a) => (Verb::Landscape, a),
            Command::Evaluate(a) => (Verb::Evaluate, a),
            Command::ExportLp(a) => (Verb::ExportLp, a),
        }
    }
}

/// Config file plus per-field overrides.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// TOML run configuration.
    #[arg(short, long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(short, long)]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub history: Option<PathBuf>,
    #[arg(long)]
    pub rates_a: Option<PathBuf>,
    #[arg(long)]
    pub rates_b: Option<PathBuf>,
    #[arg(long)]
    pub l1: Option<u32>,
    #[arg(long)]
    pub l2: Option<u32>,
    #[arg(long)]
    pub c1: Option<f64>,
    #[arg(long)]
    pub c2: Option<f64>,
    #[arg(long)]
    pub v: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Simulation length in days.
    #[arg(long)]
    pub days: Option<u32>,
    /// Value-iteration stopping tolerance.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Also write the LP file when solving.
    #[arg(long)]
    pub lp: bool,
    #[arg(long)]
    pub total_iters: Option<u32>,
    #[arg(long)]
    pub iters_per_temp: Option<u32>,
    #[arg(long)]
    pub cool: Option<f64>,
    /// Comma-separated seeds for multi-start annealing.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    #[arg(long)]
    pub horizon: Option<u32>,
}

impl RunArgs {
    /// Loads the config file (or defaults) and applies the flags on top.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($flag:ident => $($field:ident).+),* $(,)?) => {
                $(if let Some(v) = &self.$flag { c.$($field).+ = v.clone().into(); })*
            };
        }
        set!(
            seed => seed,
            output_dir => output_dir,
            l1 => limits.l1,
            l2 => limits.l2,
            c1 => costs.c1,
            c2 => costs.c2,
            v => costs.v,
            alpha => costs.alpha,
            tolerance => solve.tolerance,
            total_iters => anneal.total_iters,
            iters_per_temp => anneal.iters_per_temp,
            cool => anneal.cool,
            seeds => anneal.seeds,
            horizon => evaluate.horizon,
            history => history,
            rates_a => rates_a,
            rates_b => rates_b,
            days => simulate.days,
        );
        if self.lp {
            c.solve.export_lp = true;
        }
        Ok(c)
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    let (verb, args) = cli.command.split();
    let result = args.resolve().and_then(|config| run_command(verb, &config));
    match result {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            outcome.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
