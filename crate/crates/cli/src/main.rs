use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, ValueEnum};
use efie_hybrid::config::{Experiment, RunConfig};
use efie_hybrid::hybrid::InnerSolver;
use efie_hybrid::pipeline::run;
use efie_hybrid::precond::PreconditionerKind;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Solve,
    Rcs,
    Mie,
    Bench,
    Compare,
    CaseTable,
}

impl From<Command> for Experiment {
    fn from(c: Command) -> Self {
        match c {
            Command::Solve => Experiment::Solve,
            Command::Rcs => Experiment::Rcs,
            Command::Mie => Experiment::Mie,
            Command::Bench => Experiment::Bench,
            Command::Compare => Experiment::Compare,
            Command::CaseTable => Experiment::CaseTable,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Inner {
    Hhl,
    Vqls,
    Qr,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Precond {
    Ilut,
    Identity,
}

/// EFIE scattering with a hybrid quantum-classical iterative solver.
///
/// Exit status: 0 on success, 2 when a solve hit its iteration cap, 1 on
/// error.
#[derive(Debug, Parser)]
#[command(name = "efie-hybrid", version)]
struct Cli {
    command: Command,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Solver seed (overrides `solver.seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides `output`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    inner: Option<Inner>,
    /// `ilut` keeps the configured drop tolerance, or uses 1e-3.
    #[arg(long, value_enum)]
    precond: Option<Precond>,
    /// Per-gate Pauli error probability.
    #[arg(long)]
    noise: Option<f64>,
    /// Concurrent configurations for bench and case-table.
    #[arg(long)]
    workers: Option<usize>,
}

fn apply_overrides(cli: &Cli, cfg: &mut RunConfig) {
    cfg.experiment = cli.command.into();
    if let Some(seed) = cli.seed {
        cfg.solver.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output = out.clone();
    }
    if let Some(inner) = cli.inner {
        cfg.solver.inner = match inner {
            Inner::Hhl => InnerSolver::Hhl,
            Inner::Vqls => InnerSolver::Vqls,
            Inner::Qr => InnerSolver::Qr,
        };
    }
    match cli.precond {
        Some(Precond::Identity) => cfg.solver.precond = PreconditionerKind::Identity,
        Some(Precond::Ilut) if cfg.solver.precond == PreconditionerKind::Identity => {
            cfg.solver.precond = PreconditionerKind::ilut(1e-3);
        }
        _ => {}
    }
    if let Some(p) = cli.noise {
        cfg.solver.noise.probability = p;
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
}

fn main_inner(cli: &Cli) -> anyhow::Result<bool> {
    let mut cfg =
        RunConfig::load(&cli.config).with_context(|| format!("loading {}", cli.config.display()))?;
    apply_overrides(cli, &mut cfg);
    cfg.validate().context("invalid configuration after command-line overrides")?;
    log::info!("running {} into {}", cfg.experiment.as_str(), cfg.output.display());
    let outcome = run(&cfg)?;
    print!("{}", outcome.summary);
    for path in &outcome.artifacts {
        log::info!("wrote {}", path.display());
    }
    Ok(outcome.converged)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match main_inner(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("efie-hybrid: iteration cap reached before convergence");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("efie-hybrid: {e:#}");
            ExitCode::from(1)
        }
    }
}
