use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use quasistat_cli::report::Status;
use quasistat_cli::{CliError, Report, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "quasistat", version, about = "Quasistationary quaternionic dynamics and their complex projections")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate a scenario and write the trajectory and report files.
    Run(Common),
    /// Run a verification bundle; exits 0 exactly when every check passes.
    Verify {
        #[command(flatten)]
        common: Common,
        /// algebra, sec4, properties, semigroup or factorization.
        #[arg(long)]
        bundle: Option<String>,
    },
    /// Run the scenario at every point of the `[sweep]` grid.
    Sweep(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory that relative output paths are resolved against.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured integrator step.
    #[arg(long)]
    step: Option<f64>,
}

impl Common {
    fn load(&self, required: bool) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None if required => return Err(CliError::config("--config is required for this command")),
            None => RunConfig::empty(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let (Some(step), Some(time)) = (self.step, cfg.time.as_mut()) {
            time.integrator_step = step;
        }
        Ok(cfg)
    }
}

fn summarize(report: &Report) {
    for c in &report.checks {
        let status = match c.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
        };
        let at = c.t_at_worst.map(|t| format!(" at t = {t:.6}")).unwrap_or_default();
        println!("{status} {}: {:.3e}{at}", c.name, c.residual);
        if let Some(note) = &c.note {
            println!("     {note}");
        }
    }
}

fn execute(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Run(common) => {
            let cfg = common.load(true)?;
            let outcome = quasistat_cli::run::run(&cfg, common.out.as_deref())?;
            summarize(&outcome.report);
            println!("trajectory: {}", outcome.trajectory_path.display());
            println!("report: {}", outcome.report_path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { common, bundle } => {
            let cfg = common.load(false)?;
            let report = quasistat_cli::verify(&cfg, bundle.as_deref(), common.step, common.out.as_deref())?;
            summarize(&report);
            Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Sweep(common) => {
            let cfg = common.load(true)?;
            let out = common.out.as_deref().unwrap_or(Path::new("."));
            let index = quasistat_cli::sweep::sweep(&cfg, out)?;
            for p in &index.points {
                let note = p.note.as_deref().map(|n| format!(" ({n})")).unwrap_or_default();
                println!(
                    "point {:04} x={} y={} z=({}, {}) theta={}: {:?}{note}",
                    p.index, p.x, p.y, p.z_re, p.z_im, p.theta, p.status
                );
            }
            println!("index: {}", out.join("index.json").display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
