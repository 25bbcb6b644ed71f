use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hdsign::simulation::{Pattern, Scenario, TestId};

use crate::table::Format;

#[derive(Debug, Parser)]
#[command(
    name = "hdsign",
    version,
    about = "High-dimensional weighted spatial-sign location tests"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test theta = theta0 on a data file (exit code 2 when rejected)
    Test(TestArgs),
    /// Print the asymptotic relative efficiency table
    Are(OutputArgs),
    /// Run one Monte Carlo size/power cell
    Simulate(SimulateArgs),
    /// Run the full size/power grid
    Table2(Table2Args),
    /// Check the uniform-sphere sampler against the moment identities
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TestKind {
    Os,
    Ss,
    Cq,
    ScalarInvariantOs,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SignalNormArg {
    /// theta'theta / sqrt(tr Sigma)
    Trace,
    /// theta'theta / sqrt(tr Sigma^2)
    TraceSq,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// csv, tsv or table
    #[arg(long, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    /// Numeric matrix, one observation per row (.tsv files are tab-separated)
    #[arg(long, short)]
    pub input: PathBuf,

    /// Skip the first row
    #[arg(long)]
    pub header: bool,

    #[arg(long, value_enum, default_value_t = TestKind::Os)]
    pub kind: TestKind,

    /// Weight for --kind custom, e.g. "r^-1", "2*r^(1/2)"
    #[arg(long)]
    pub weight: Option<String>,

    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,

    /// Hypothesized location: one value per column, or a single value for all
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub theta0: Option<Vec<f64>>,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// I to VII
    #[arg(long)]
    pub scenario: Scenario,

    /// size, dense or sparse
    #[arg(long, default_value = "size")]
    pub pattern: Pattern,

    #[arg(long, default_value_t = 40)]
    pub n: usize,

    #[arg(long, default_value_t = 200)]
    pub p: usize,

    #[arg(long, default_value_t = 2500)]
    pub reps: usize,

    /// Signal size; defaults to the scenario's value
    #[arg(long)]
    pub target: Option<f64>,

    #[arg(long, value_enum, default_value_t = SignalNormArg::TraceSq)]
    pub signal_norm: SignalNormArg,

    /// Comma-separated subset of cq, ss, os, si-os
    #[arg(long, value_delimiter = ',', default_values = ["cq", "ss", "os"])]
    pub tests: Vec<TestId>,

    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,

    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct Table2Args {
    /// 500 replications at p = 200 only
    #[arg(long)]
    pub quick: bool,

    /// Override the preset's replication count
    #[arg(long)]
    pub reps: Option<usize>,

    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, default_value_t = 50)]
    pub p: usize,

    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,

    /// M is the AR(1) matrix with this correlation
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,

    /// Subtract the identity from M
    #[arg(long)]
    pub trace_free: bool,

    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    #[command(flatten)]
    pub output: OutputArgs,
}
