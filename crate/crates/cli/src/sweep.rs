use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{RunConfig, ScenarioConfig, Sec4Config};
use crate::error::{CliError, Result};
use crate::report::create_parent;
use crate::run::run;

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PointStatus {
    Ok,
    Skipped,
    Error,
}

#[derive(Clone, Debug, Serialize)]
pub struct IndexEntry {
    pub index: usize,
    pub x: f64,
    pub y: f64,
    pub z_re: f64,
    pub z_im: f64,
    pub theta: f64,
    pub status: PointStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failures: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepIndex {
    pub points: Vec<IndexEntry>,
    pub skipped: usize,
}

/// Cartesian product of the sweep values, in `x, y, z_re, z_im, theta`
/// order with `theta` varying fastest.
pub fn grid_points(cfg: &RunConfig) -> Result<Vec<Sec4Config>> {
    let base = match &cfg.scenario {
        Some(ScenarioConfig::Sec4(s)) => *s,
        _ => return Err(CliError::config("scenario: sweep needs the sec4 scenario")),
    };
    let sweep = cfg.sweep.as_ref().ok_or_else(|| CliError::config("sweep: missing"))?;
    let axes = [&sweep.x, &sweep.y, &sweep.z_re, &sweep.z_im, &sweep.theta];
    if axes.iter().all(|a| a.is_none()) || axes.iter().any(|a| a.as_ref().is_some_and(|v| v.is_empty())) {
        return Err(CliError::EmptyGrid);
    }
    let values = |axis: &Option<Vec<f64>>, default: f64| axis.clone().unwrap_or_else(|| vec![default]);
    let mut points = Vec::new();
    for &x in &values(&sweep.x, base.x) {
        for &y in &values(&sweep.y, base.y) {
            for &z_re in &values(&sweep.z_re, base.z_re) {
                for &z_im in &values(&sweep.z_im, base.z_im) {
                    for &theta in &values(&sweep.theta, base.theta) {
                        points.push(Sec4Config { x, y, z_re, z_im, theta });
                    }
                }
            }
        }
    }
    Ok(points)
}

/// Runs every grid point independently under `out/point_NNNN/` and writes
/// `out/index.json`. Invalid points are recorded and skipped.
pub fn sweep(cfg: &RunConfig, out: &Path) -> Result<SweepIndex> {
    let points = grid_points(cfg)?;
    let points: Vec<IndexEntry> = points
        .par_iter()
        .enumerate()
        .map(|(index, p)| {
            let mut entry = IndexEntry {
                index,
                x: p.x,
                y: p.y,
                z_re: p.z_re,
                z_im: p.z_im,
                theta: p.theta,
                status: PointStatus::Ok,
                note: None,
                trajectory: None,
                report: None,
                failures: None,
            };
            if let Err(e) = p.params() {
                entry.status = PointStatus::Skipped;
                entry.note = Some(e);
                return entry;
            }
            let mut point_cfg = cfg.clone();
            point_cfg.scenario = Some(ScenarioConfig::Sec4(*p));
            point_cfg.sweep = None;
            let dir = out.join(format!("point_{index:04}"));
            match run(&point_cfg, Some(&dir)) {
                Ok(outcome) => {
                    entry.trajectory = outcome.trajectory_path.strip_prefix(out).ok().map(Path::to_path_buf);
                    entry.report = outcome.report_path.strip_prefix(out).ok().map(Path::to_path_buf);
                    entry.failures = Some(outcome.report.failures);
                }
                Err(e) => {
                    entry.status = PointStatus::Error;
                    entry.note = Some(e.to_string());
                }
            }
            entry
        })
        .collect();
    let skipped = points.iter().filter(|p| !matches!(p.status, PointStatus::Ok)).count();
    let index = SweepIndex { points, skipped };
    let path = out.join("index.json");
    create_parent(&path)?;
    std::fs::write(&path, serde_json::to_string_pretty(&index)? + "\n").map_err(|e| CliError::io(&path, e))?;
    Ok(index)
}
