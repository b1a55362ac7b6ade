use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Constructed MDP families, exact DP, and circuit / MLP representations.
#[derive(Parser, Debug)]
#[command(name = "mdpzoo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a random or fixture instance file.
    Generate(GenerateArgs),
    /// Solve an instance exactly by backward induction.
    Solve(SolveArgs),
    /// Run a verification suite; exit 1 on any mismatch.
    Verify(VerifyArgs),
    /// Build the constant-depth circuits for a family and size.
    BuildCircuit(BuildArgs),
    /// Build the ReLU networks for a family and size, or a single gate.
    BuildMlp(BuildMlpArgs),
    /// Reachable-state counts of an instance, or builder sizes over a range of n.
    Stats(StatsArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Formula,
    Circuit,
    NdtmFixture,
}

#[derive(Args, Debug)]
pub struct Common {
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Per-layer reachable-state ceiling (default from MDPZOO_CEILING_STATES, else 5000000).
    #[arg(long)]
    pub ceiling_states: Option<usize>,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(value_enum)]
    pub kind: Kind,
    /// sat or stoch-sat for formulas; cvp, stoch-cvp or p for circuits.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub n: usize,
    /// Required for formula and circuit.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Input length for p circuits (default n).
    #[arg(long)]
    pub m: Option<usize>,
    /// Fixture name: accept-all, reject-all, contains-one, guess-match.
    #[arg(long, default_value = "guess-match")]
    pub name: String,
    /// Fixture step bound (default n + 2).
    #[arg(long)]
    pub step_bound: Option<usize>,
    /// Fixture input as a 0/1 string.
    #[arg(long, default_value = "")]
    pub input: String,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    pub instance: PathBuf,
    /// Reinterpret the payload as another family (sat <-> stoch-sat, cvp <-> stoch-cvp).
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub horizon: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// sat-equiv, cvp-equiv, np-equiv, stoch-sat, circuits or mlps.
    pub suite: String,
    #[arg(long)]
    pub n: Option<usize>,
    /// Restrict circuits / mlps to one family.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Corrupt one transition; the suite is expected to fail.
    #[arg(long)]
    pub fault: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    #[arg(long)]
    pub family: String,
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct BuildMlpArgs {
    /// Family to build model (and policy) networks for.
    #[arg(long, required_unless_present = "gate")]
    pub family: Option<String>,
    #[arg(long, required_unless_present = "gate")]
    pub n: Option<usize>,
    /// Build a single gate network instead: AND, OR, NOT, MAJ.
    #[arg(long, conflicts_with = "family")]
    pub gate: Option<String>,
    #[arg(long, default_value_t = 2)]
    pub fanin: usize,
    #[arg(long, default_value_t = mdpzoo::mlp::DEFAULT_PRECISION_BITS)]
    pub precision_bits: u32,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    /// Instance file; when omitted, report builder sizes instead.
    pub instance: Option<PathBuf>,
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 6)]
    pub max_n: usize,
    #[arg(long)]
    pub horizon: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(commands::EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Generate(a) => commands::generate(&a),
        Command::Solve(a) => commands::solve(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::BuildCircuit(a) => commands::build_circuit(&a),
        Command::BuildMlp(a) => commands::build_mlp(&a),
        Command::Stats(a) => commands::stats(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
