//! Batch front end: configuration, trajectory runs, verification bundles and
//! parameter sweeps. The `quasistat` binary is a thin wrapper over these.

pub mod config;
pub mod error;
pub mod report;
pub mod run;
pub mod sweep;
pub mod verify;

use std::path::Path;
use std::time::Instant;

pub use config::RunConfig;
pub use error::{CliError, Result};
pub use report::Report;

use config::{output_path, ScenarioConfig};
use quasistat::scenarios::Sec4Params;
use verify::VerifyContext;

/// Runs the named bundle (or the one named in the config) and writes the
/// report.
pub fn verify(cfg: &RunConfig, bundle: Option<&str>, step: Option<f64>, out: Option<&Path>) -> Result<Report> {
    let start = Instant::now();
    let name = bundle
        .map(str::to_string)
        .or_else(|| cfg.verify.as_ref().map(|v| v.bundle.clone()))
        .ok_or_else(|| CliError::config("verify.bundle: missing (pass --bundle or set [verify] bundle)"))?;
    let params = match &cfg.scenario {
        Some(ScenarioConfig::Sec4(s)) => s.params().map_err(|e| CliError::config(format!("scenario: {e}")))?,
        Some(ScenarioConfig::Inline(_)) => {
            return Err(CliError::config("scenario: verification bundles use the sec4 scenario"))
        }
        None => Sec4Params::reference(),
    };
    let step = step
        .or_else(|| cfg.time.map(|t| t.integrator_step))
        .unwrap_or(quasistat::tol::INTEGRATOR_STEP);
    if !(step > 0.0 && step.is_finite()) {
        return Err(CliError::config(format!("time.integrator_step: must be positive, got {step}")));
    }
    let ctx = VerifyContext {
        seed: cfg.seed,
        step,
        params,
        tolerance: cfg.tolerance,
        semigroup: cfg.semigroup,
    };
    let checks = verify::run_bundle(&name, &ctx)?;
    let mut echo = serde_json::to_value(cfg)?;
    echo["verify"] = serde_json::json!({ "bundle": name, "integrator_step": step });
    let report = Report::new("verify", cfg.seed, echo, checks, start.elapsed().as_secs_f64());
    report.write(&output_path(out, &cfg.outputs.report_path))?;
    Ok(report)
}
