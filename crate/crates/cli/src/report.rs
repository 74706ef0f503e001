use std::path::Path;

use serde::Serialize;

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: Status,
    /// Worst residual observed; for a violation search, the quantity that
    /// had to exceed the threshold.
    pub residual: f64,
    pub t_at_worst: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckRecord {
    /// Passes when `residual <= tol`.
    pub fn at_most(name: impl Into<String>, residual: f64, tol: f64, t_at_worst: Option<f64>) -> Self {
        Self {
            name: name.into(),
            status: if residual <= tol { Status::Pass } else { Status::Fail },
            residual,
            t_at_worst,
            note: None,
        }
    }

    /// Passes when `value >= threshold`.
    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64, t_at_worst: Option<f64>) -> Self {
        Self {
            name: name.into(),
            status: if value >= threshold { Status::Pass } else { Status::Fail },
            residual: value,
            t_at_worst,
            note: None,
        }
    }

    pub fn failed(name: impl Into<String>, note: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status: Status::Fail,
            residual: f64::NAN,
            t_at_worst: None,
            note: Some(note.into()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub version: String,
    pub core_version: String,
    pub seed: u64,
    pub wall_time_seconds: f64,
    pub config: serde_json::Value,
    pub checks: Vec<CheckRecord>,
    pub failures: usize,
}

impl Report {
    pub fn new(command: &str, seed: u64, config: serde_json::Value, checks: Vec<CheckRecord>, wall: f64) -> Self {
        let failures = checks.iter().filter(|c| c.status == Status::Fail).count();
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            core_version: quasistat::VERSION.to_string(),
            seed,
            wall_time_seconds: wall,
            config,
            checks,
            failures,
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        create_parent(path)?;
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
    }
}

pub(crate) fn create_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e)),
        _ => Ok(()),
    }
}
