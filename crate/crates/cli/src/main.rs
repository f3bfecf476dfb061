use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pme_lab::experiments::{run, ExperimentConfig, ExperimentKind};
use pme_lab::PmeError;

#[derive(Parser)]
#[command(name = "pme-lab", version, about = "Concavity breaking experiments for the porous medium equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Barenblatt identities and solver convergence.
    ValidateBarenblatt(Overrides),
    /// Shoot and certify the focusing self-similar profile.
    SolveGraveleau(Overrides),
    /// Second-derivative growth of the alpha-power at an interior point.
    InteriorBreaking(Overrides),
    /// Convexity defect of the support near a flat boundary piece.
    BoundaryBreaking(Overrides),
    /// Initial free-boundary velocity against the Darcy law.
    BoundaryVelocity(Overrides),
    /// Ordering of randomized pairs of solutions.
    ComparisonTest(Overrides),
}

#[derive(Args)]
struct Overrides {
    /// Experiment file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Nodes per side on the finest grid.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    m: Option<f64>,
    /// Cache file for the focusing profile.
    #[arg(long)]
    profile: Option<PathBuf>,
}

impl Command {
    fn split(self) -> (ExperimentKind, Overrides) {
        match self {
            Command::ValidateBarenblatt(o) => (ExperimentKind::ValidateBarenblatt, o),
            Command::SolveGraveleau(o) => (ExperimentKind::SolveGraveleau, o),
            Command::InteriorBreaking(o) => (ExperimentKind::InteriorBreaking, o),
            Command::BoundaryBreaking(o) => (ExperimentKind::BoundaryBreaking, o),
            Command::BoundaryVelocity(o) => (ExperimentKind::BoundaryVelocity, o),
            Command::ComparisonTest(o) => (ExperimentKind::ComparisonTest, o),
        }
    }
}

fn configure(kind: ExperimentKind, o: Overrides) -> Result<ExperimentConfig, PmeError> {
    let mut cfg = ExperimentConfig::load(&o.config)?;
    if cfg.experiment != kind {
        return Err(PmeError::Config(format!("{} describes a {} run, not {kind}", o.config.display(), cfg.experiment)));
    }
    if let Some(dir) = o.out {
        cfg.out_dir = dir;
    }
    if let Some(n) = o.grid {
        cfg.grid.nodes = Some(n);
    }
    if let Some(a) = o.alpha {
        cfg.params.alpha = a;
    }
    if let Some(m) = o.m {
        cfg.params.m = m;
    }
    if o.profile.is_some() {
        cfg.graveleau.profile = o.profile;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let (kind, overrides) = Cli::parse().command.split();
    let outcome = configure(kind, overrides).and_then(|cfg| run(&cfg));
    match outcome {
        Ok(report) => {
            for v in &report.verdicts {
                println!("{}", v.summary());
            }
            println!("report: {}", report.report_path().display());
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("pme-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
