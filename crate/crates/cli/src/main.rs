//! `cutgap` command-line runner. Every flag can also be set through an
//! environment variable named `CUTGAP_<FLAG>` (upper case, dashes as
//! underscores).

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cutgap::harness::{self, AuditMap, ExperimentConfig, ExperimentKind};
use cutgap::scalar::ScalarMode;

#[derive(Parser)]
#[command(name = "cutgap", version, about = "Cut-measure, L1 embedding and flow/cut gap experiments on K_{2,n} compositions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build K_{2,n}^k and check its counts.
    Build(Common),
    /// Exact separation table and distortion of the recursive random-cut
    /// embedding, plus a Monte Carlo cross-check when seeded.
    Embed(Common),
    /// Optimal L1 distortion by linear programming (at most 20 vertices).
    C1(Common),
    /// Concurrent flow against sparsest cut on a given or random instance.
    Flowcut(Common),
    /// Coarse-differentiation census and lower-bound certificate.
    Audit(Common),
    /// K_{2,n} lower-bound certificate and efficient-copy search.
    Certify(Common),
}

#[derive(Args)]
struct Common {
    /// Middle count of the base graph K_{2,n}.
    #[arg(long, env = "CUTGAP_N", default_value_t = 2)]
    n: usize,
    /// Composition depth.
    #[arg(long, env = "CUTGAP_K", default_value_t = 1)]
    k: usize,
    /// Efficiency slack (p/q, integer or decimal).
    #[arg(long, env = "CUTGAP_EPS")]
    eps: Option<String>,
    /// Inefficient fraction threshold (p/q, integer or decimal).
    #[arg(long, env = "CUTGAP_DELTA")]
    delta: Option<String>,
    /// Subdivision granularity M of the level schedule.
    #[arg(long, env = "CUTGAP_GRANULARITY")]
    granularity: Option<usize>,
    /// Master seed for every randomized step.
    #[arg(long, env = "CUTGAP_SEED")]
    seed: Option<u64>,
    #[arg(long, env = "CUTGAP_MODE", default_value = "rational", value_parser = ["rational", "double"])]
    mode: String,
    /// Directory for the report and CSV/JSON artifacts.
    #[arg(long, env = "CUTGAP_OUT")]
    out: Option<PathBuf>,
    #[arg(long, env = "CUTGAP_BUDGET_VERTICES", default_value_t = harness::DEFAULT_VERTEX_BUDGET)]
    budget_vertices: u64,
    /// Monte Carlo sample count (embed, with --seed).
    #[arg(long, env = "CUTGAP_SAMPLES", default_value_t = harness::DEFAULT_SAMPLES)]
    samples: u64,
    /// Per-pair z-score limit for the Monte Carlo check.
    #[arg(long, env = "CUTGAP_Z_LIMIT", default_value_t = 3.0)]
    z_limit: f64,
    /// Commodities in a random flow instance.
    #[arg(long, env = "CUTGAP_COMMODITIES", default_value_t = 4)]
    commodities: usize,
    /// Flow instance (flowcut) or cut measure (certify) in JSON.
    #[arg(long, env = "CUTGAP_INPUT")]
    input: Option<PathBuf>,
    /// Map to audit.
    #[arg(long, env = "CUTGAP_MAP", default_value = "embedding", value_parser = ["embedding", "fold", "c1"])]
    map: String,
    /// Worker threads; all cores when unset.
    #[arg(long, env = "CUTGAP_THREADS")]
    threads: Option<usize>,
    /// Print only the status line instead of the full report.
    #[arg(long, short)]
    quiet: bool,
}

impl Common {
    fn into_config(self, kind: ExperimentKind) -> (ExperimentConfig, bool) {
        let config = ExperimentConfig {
            kind,
            n: self.n,
            k: self.k,
            eps: self.eps,
            delta: self.delta,
            granularity: self.granularity,
            seed: self.seed,
            mode: self.mode.parse::<ScalarMode>().expect("checked by clap"),
            out: self.out,
            budget_vertices: self.budget_vertices,
            samples: self.samples,
            z_limit: self.z_limit,
            commodities: self.commodities,
            input: self.input,
            map: self.map.parse::<AuditMap>().expect("checked by clap"),
            threads: self.threads,
        };
        (config, self.quiet)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, common) = match cli.command {
        Command::Build(c) => (ExperimentKind::Build, c),
        Command::Embed(c) => (ExperimentKind::Embed, c),
        Command::C1(c) => (ExperimentKind::C1, c),
        Command::Flowcut(c) => (ExperimentKind::Flowcut, c),
        Command::Audit(c) => (ExperimentKind::Audit, c),
        Command::Certify(c) => (ExperimentKind::Certify, c),
    };
    let (config, quiet) = common.into_config(kind);
    let report = harness::run(&config);
    if !quiet {
        // A closed pipe downstream is not an experiment failure.
        let _ = writeln!(std::io::stdout(), "{}", report.to_json());
    }
    let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    match &report.error {
        Some(e) => eprintln!("{kind}: {e}"),
        None if failed.is_empty() => eprintln!("{kind}: pass ({} checks)", report.checks.len()),
        None => eprintln!("{kind}: fail ({})", failed.join(", ")),
    }
    ExitCode::from(report.exit_code() as u8)
}
