//! Run configuration. TOML, with unknown keys rejected at every level.
//!
//! ```toml
//! seed = 42
//! tolerance = 1e-8
//! checks = ["trace", "unitarity", "positivity", "pseudo_hermiticity", "property_i", "property_ii"]
//!
//! [scenario]
//! name = "sec4"
//! x = 2.0
//! y = 1.0
//! z_re = 0.5
//! z_im = 0.0
//! theta = 0.0
//!
//! [time]
//! t_start = 0.0
//! t_end = 1.1780972450961724
//! n_samples = 100
//! integrator_step = 1e-4
//!
//! [outputs]
//! trajectory_path = "trajectory.csv"
//! report_path = "report.json"
//! ```
//!
//! An inline scenario gives the metric, the initial `ρ(0)` and a sample
//! table for the generator. Matrix entries are a real number, a complex pair
//! `[re, im]`, or a quaternion `[a, b, c, d]` for `a + bi + cj + dk`:
//!
//! ```toml
//! [scenario]
//! name = "inline"
//! eta = [[1.0, 0.0], [0.0, 1.0]]
//! rho0 = [[0.5, 0.0], [0.0, 0.5]]
//!
//! [scenario.generator]
//! role = "hfrak"            # or "factor", "hamiltonian"
//! times = [0.0, 1.0]
//! values = [[[0.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]
//! ```

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};
use std::path::{Path, PathBuf};

use quasistat::{QMatrix, Quaternion};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<TimeConfig>,
    #[serde(default)]
    pub outputs: OutputConfig,
    #[serde(default = "default_checks")]
    pub checks: Vec<CheckKind>,
    #[serde(default)]
    pub seed: u64,
    /// Pass threshold for residual checks.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub semigroup: SemigroupConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase", deny_unknown_fields)]
pub enum ScenarioConfig {
    Sec4(Sec4Config),
    Inline(InlineConfig),
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sec4Config {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub z_re: f64,
    #[serde(default)]
    pub z_im: f64,
    #[serde(default)]
    pub theta: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineConfig {
    pub eta: MatrixSpec,
    /// Hermitian square root of `eta` to dress with; the principal root
    /// when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<MatrixSpec>,
    /// Hermitian positive `ρ(0)`; the run starts from `ρ̃(0) = ρ(0)η`
    /// normalized to unit real trace.
    pub rho0: MatrixSpec,
    pub generator: SampleTable,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleTable {
    pub role: GeneratorRole,
    pub times: Vec<f64>,
    pub values: Vec<MatrixSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub breakpoints: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorRole {
    /// Anti-Hermitian generator of the undressed unitary.
    Hfrak,
    /// Anti-Hermitian factor `F` with `H = Fη`.
    Factor,
    Hamiltonian,
}

pub type MatrixSpec = Vec<Vec<Entry>>;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
    Quaternion([f64; 4]),
}

impl Entry {
    pub fn quaternion(self) -> Quaternion {
        match self {
            Entry::Real(a) => Quaternion::new(a, 0.0, 0.0, 0.0),
            Entry::Complex([a, b]) => Quaternion::new(a, b, 0.0, 0.0),
            Entry::Quaternion([a, b, c, d]) => Quaternion::new(a, b, c, d),
        }
    }
}

/// Square quaternion matrix from a row-major nested list.
pub fn matrix_from_spec(spec: &MatrixSpec, path: &str) -> std::result::Result<QMatrix, String> {
    let n = spec.len();
    if n == 0 {
        return Err(format!("{path}: matrix is empty"));
    }
    if let Some(r) = spec.iter().position(|row| row.len() != n) {
        return Err(format!("{path}[{r}]: expected {n} entries, found {}", spec[r].len()));
    }
    let mut bad = None;
    let m = QMatrix::from_fn(n, n, |r, c| {
        let q = spec[r][c].quaternion();
        if ![q.a, q.b, q.c, q.d].iter().all(|v| v.is_finite()) {
            bad = Some((r, c));
        }
        q
    });
    match bad {
        Some((r, c)) => Err(format!("{path}[{r}][{c}]: entry is not finite")),
        None => Ok(m),
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t_start: f64,
    pub t_end: f64,
    pub n_samples: usize,
    #[serde(default = "default_step")]
    pub integrator_step: f64,
    /// Restart the integrator at generator discontinuities; when disabled a
    /// breakpoint strictly inside a grid interval is an error.
    #[serde(default = "default_true")]
    pub split_at_breakpoints: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_trajectory_path")]
    pub trajectory_path: PathBuf,
    #[serde(default = "default_report_path")]
    pub report_path: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            trajectory_path: default_trajectory_path(),
            report_path: default_report_path(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckKind {
    #[serde(rename = "trace")]
    Trace,
    #[serde(rename = "unitarity")]
    Unitarity,
    #[serde(rename = "positivity")]
    Positivity,
    #[serde(rename = "pseudo_hermiticity")]
    PseudoHermiticity,
    #[serde(rename = "semigroup")]
    Semigroup,
    #[serde(rename = "property_i")]
    PropertyI,
    #[serde(rename = "property_ii")]
    PropertyIi,
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Trace => "trace",
            CheckKind::Unitarity => "unitarity",
            CheckKind::Positivity => "positivity",
            CheckKind::PseudoHermiticity => "pseudo_hermiticity",
            CheckKind::Semigroup => "semigroup",
            CheckKind::PropertyI => "property_i",
            CheckKind::PropertyIi => "property_ii",
        }
    }
}

/// Times for the semigroup comparison and the gap that counts as a
/// violation.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemigroupConfig {
    #[serde(default = "default_semigroup_t")]
    pub t: f64,
    #[serde(default = "default_semigroup_t_prime")]
    pub t_prime: f64,
    #[serde(default = "default_min_gap")]
    pub min_gap: f64,
}

impl Default for SemigroupConfig {
    fn default() -> Self {
        Self {
            t: default_semigroup_t(),
            t_prime: default_semigroup_t_prime(),
            min_gap: default_min_gap(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub bundle: String,
}

/// Values to sweep; an absent key keeps the scenario's value.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_re: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_im: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,
}

fn default_checks() -> Vec<CheckKind> {
    vec![
        CheckKind::Trace,
        CheckKind::Unitarity,
        CheckKind::Positivity,
        CheckKind::PseudoHermiticity,
        CheckKind::PropertyI,
        CheckKind::PropertyIi,
    ]
}

fn default_tolerance() -> f64 {
    1e-8
}

fn default_step() -> f64 {
    quasistat::tol::INTEGRATOR_STEP
}

fn default_true() -> bool {
    true
}

fn default_trajectory_path() -> PathBuf {
    PathBuf::from("trajectory.csv")
}

fn default_report_path() -> PathBuf {
    PathBuf::from("report.json")
}

fn default_semigroup_t() -> f64 {
    FRAC_PI_4
}

fn default_semigroup_t_prime() -> f64 {
    FRAC_PI_8
}

fn default_min_gap() -> f64 {
    0.1
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let de = toml::Deserializer::new(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let msg = e.inner().message().to_string();
            // spans survive only a direct parse, and tagged tables lose them
            let location = toml::from_str::<RunConfig>(text)
                .err()
                .and_then(|direct| direct.span())
                .filter(|s| s.start > 0)
                .map(|s| {
                    let line = text[..s.start.min(text.len())].matches('\n').count() + 1;
                    format!(" (line {line})")
                })
                .unwrap_or_default();
            if path == "." {
                CliError::config(format!("{msg}{location}"))
            } else {
                CliError::config(format!("{path}: {msg}{location}"))
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    /// A configuration with no scenario and default everything else.
    pub fn empty() -> Self {
        Self::parse("").expect("defaults parse")
    }

    /// Checks that apply to `run` and `sweep`, listing every problem with
    /// the key path it concerns.
    pub fn validate_run(&self) -> Result<()> {
        let mut errors = Vec::new();
        match &self.scenario {
            None => errors.push("scenario: missing".to_string()),
            Some(ScenarioConfig::Sec4(s)) => {
                if let Err(e) = s.params() {
                    errors.push(format!("scenario: {e}"));
                }
            }
            Some(ScenarioConfig::Inline(inline)) => validate_inline(inline, &mut errors),
        }
        match &self.time {
            None => errors.push("time: missing".to_string()),
            Some(t) => validate_time(t, &mut errors),
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            errors.push(format!("tolerance: must be positive, got {}", self.tolerance));
        }
        for (k, c) in self.checks.iter().enumerate() {
            if self.checks[..k].contains(c) {
                errors.push(format!("checks[{k}]: `{}` listed twice", c.name()));
            }
            if *c == CheckKind::Semigroup && !matches!(self.scenario, Some(ScenarioConfig::Sec4(_))) {
                errors.push(format!("checks[{k}]: semigroup check needs the sec4 scenario"));
            }
        }
        let sg = &self.semigroup;
        if !(0.0 <= sg.t_prime && sg.t_prime <= sg.t && sg.t.is_finite()) {
            errors.push(format!("semigroup: need 0 <= t_prime <= t, got t = {}, t_prime = {}", sg.t, sg.t_prime));
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(errors))
        }
    }
}

impl Sec4Config {
    pub fn params(&self) -> std::result::Result<quasistat::scenarios::Sec4Params, String> {
        quasistat::scenarios::Sec4Params::new(self.x, self.y, quasistat::C64::new(self.z_re, self.z_im), self.theta)
            .map_err(|e| match e {
                quasistat::Error::DegenerateMetric { det } => {
                    format!("degenerate metric (xy - |z|^2 = {det})")
                }
                other => other.to_string(),
            })
    }
}

fn validate_time(t: &TimeConfig, errors: &mut Vec<String>) {
    if !(t.t_start.is_finite() && t.t_end.is_finite()) {
        errors.push("time: t_start and t_end must be finite".to_string());
    } else if t.t_start >= t.t_end {
        errors.push(format!("time.t_end: must exceed t_start ({} >= {})", t.t_start, t.t_end));
    }
    if t.n_samples < 2 {
        errors.push(format!("time.n_samples: must be at least 2, got {}", t.n_samples));
    }
    if !(t.integrator_step > 0.0 && t.integrator_step.is_finite()) {
        errors.push(format!("time.integrator_step: must be positive, got {}", t.integrator_step));
    }
}

fn validate_inline(inline: &InlineConfig, errors: &mut Vec<String>) {
    let mut dims = Vec::new();
    for (path, spec) in [("scenario.eta", &inline.eta), ("scenario.rho0", &inline.rho0)]
        .into_iter()
        .chain(inline.root.as_ref().map(|r| ("scenario.root", r)))
    {
        match matrix_from_spec(spec, path) {
            Ok(m) => dims.push((path.to_string(), m.nrows())),
            Err(e) => errors.push(e),
        }
    }
    let g = &inline.generator;
    if g.times.is_empty() {
        errors.push("scenario.generator.times: needs at least one sample".to_string());
    }
    if g.times.len() != g.values.len() {
        errors.push(format!(
            "scenario.generator.values: {} values for {} times",
            g.values.len(),
            g.times.len()
        ));
    }
    if g.times.iter().any(|t| !t.is_finite()) || g.times.windows(2).any(|w| w[1] <= w[0]) {
        errors.push("scenario.generator.times: must be finite and strictly increasing".to_string());
    }
    for (k, v) in g.values.iter().enumerate() {
        let path = format!("scenario.generator.values[{k}]");
        match matrix_from_spec(v, &path) {
            Ok(m) => dims.push((path, m.nrows())),
            Err(e) => errors.push(e),
        }
    }
    if let Some((_, n)) = dims.first() {
        for (path, d) in &dims[1..] {
            if d != n {
                errors.push(format!("{path}: dimension {d} does not match scenario.eta dimension {n}"));
            }
        }
    }
}

/// Resolves a relative output path against `out`.
pub fn output_path(out: Option<&Path>, p: &Path) -> PathBuf {
    match out {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p.to_path_buf(),
    }
}
