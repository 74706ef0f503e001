//! Evolution operators and (generalized) density-matrix evolution.
//!
//! Time-dependent operators are supplied as a [`GeneratorSource`]. The
//! propagator solves `dY/dt = −G(t) Y`, `Y(t₀) = 1`, with the classical
//! fixed-step Runge–Kutta scheme applied to `χ(Y)`; the scheme only forms
//! real combinations of products of `χ` matrices, so every iterate stays in
//! the image of `χ`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::metric::{GeneralizedDensity, Metric};
use crate::projection;
use crate::quatmat::{CMatrix, QMatrix, C64};
use crate::tol;

/// What a [`GeneratorSource`] evaluates to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorRole {
    /// Anti-Hermitian undressed generator `ℌ(t)`.
    AntiHermitian,
    /// Anti-Hermitian factor `F(t)` with `H = Fη`.
    Factor,
    /// General (dressed) Hamiltonian `H(t)`.
    Hamiltonian,
    /// Hermitian metric `η(t)`.
    Metric,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceKind {
    ClosedForm,
    Sampled,
}

/// Known discontinuities of a source.
#[derive(Clone, Debug, PartialEq)]
pub enum Breakpoints {
    None,
    List(Vec<f64>),
    /// `offset + k·period` for every integer `k`.
    Periodic { offset: f64, period: f64 },
}

impl Breakpoints {
    /// Breakpoints in the closed interval `[a, b]`, ascending. Points within
    /// a relative `1e-12` of either end are included.
    pub fn within(&self, a: f64, b: f64) -> Vec<f64> {
        let slack = 1e-12 * a.abs().max(b.abs()).max(1.0);
        let (a, b) = (a - slack, b + slack);
        match self {
            Breakpoints::None => Vec::new(),
            Breakpoints::List(v) => {
                let mut out: Vec<f64> = v.iter().copied().filter(|&p| p >= a && p <= b).collect();
                out.sort_by(f64::total_cmp);
                out
            }
            Breakpoints::Periodic { offset, period } => {
                let k0 = ((a - offset) / period).ceil() as i64;
                let mut out = Vec::new();
                let mut k = k0 - 1;
                loop {
                    let p = offset + k as f64 * period;
                    if p > b {
                        break;
                    }
                    if p >= a {
                        out.push(p);
                    }
                    k += 1;
                }
                out
            }
        }
    }
}

pub type Evaluator = Arc<dyn Fn(f64) -> Result<QMatrix> + Send + Sync>;

#[derive(Clone)]
enum Repr {
    ClosedForm {
        eval: Evaluator,
        derivative: Option<Evaluator>,
    },
    Sampled {
        times: Vec<f64>,
        values: Vec<QMatrix>,
    },
}

/// A time-dependent operator, either as a closed-form evaluator or as grid
/// samples joined by linear interpolation.
#[derive(Clone)]
pub struct GeneratorSource {
    role: OperatorRole,
    dim: usize,
    repr: Repr,
    breakpoints: Breakpoints,
}

impl fmt::Debug for GeneratorSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneratorSource")
            .field("role", &self.role)
            .field("dim", &self.dim)
            .field("kind", &self.kind())
            .field("breakpoints", &self.breakpoints)
            .finish()
    }
}

impl GeneratorSource {
    pub fn closed_form(
        role: OperatorRole,
        dim: usize,
        eval: impl Fn(f64) -> Result<QMatrix> + Send + Sync + 'static,
    ) -> Self {
        Self {
            role,
            dim,
            repr: Repr::ClosedForm {
                eval: Arc::new(eval),
                derivative: None,
            },
            breakpoints: Breakpoints::None,
        }
    }

    pub fn constant(role: OperatorRole, value: QMatrix) -> Self {
        let dim = value.nrows();
        let zero = QMatrix::zeros(dim, dim);
        Self::closed_form(role, dim, move |_| Ok(value.clone()))
            .with_derivative(move |_| Ok(zero.clone()))
    }

    /// Samples at strictly increasing `times`. A single sample is treated as
    /// a constant operator.
    pub fn sampled(role: OperatorRole, times: Vec<f64>, values: Vec<QMatrix>) -> Result<Self> {
        if times.is_empty() || times.len() != values.len() {
            return Err(Error::InvalidGrid(format!(
                "{} sample times for {} sample values",
                times.len(),
                values.len()
            )));
        }
        if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("sample times must be finite and strictly increasing".into()));
        }
        let dim = values[0].nrows();
        for v in &values {
            if v.shape() != (dim, dim) {
                return Err(Error::DimensionMismatch {
                    op: "GeneratorSource::sampled",
                    left: v.shape(),
                    right: (dim, dim),
                });
            }
        }
        let src = Self {
            role,
            dim,
            repr: Repr::Sampled { times, values },
            breakpoints: Breakpoints::None,
        };
        if let Repr::Sampled { times, values } = &src.repr {
            for (t, v) in times.iter().zip(values) {
                src.check_structure(*t, v)?;
            }
        }
        Ok(src)
    }

    /// Exact time derivative, used instead of central differences.
    pub fn with_derivative(mut self, d: impl Fn(f64) -> Result<QMatrix> + Send + Sync + 'static) -> Self {
        if let Repr::ClosedForm { derivative, .. } = &mut self.repr {
            *derivative = Some(Arc::new(d));
        }
        self
    }

    pub fn with_breakpoints(mut self, breakpoints: Breakpoints) -> Self {
        self.breakpoints = breakpoints;
        self
    }

    pub fn role(&self) -> OperatorRole {
        self.role
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> SourceKind {
        match self.repr {
            Repr::ClosedForm { .. } => SourceKind::ClosedForm,
            Repr::Sampled { .. } => SourceKind::Sampled,
        }
    }

    pub fn breakpoints(&self) -> &Breakpoints {
        &self.breakpoints
    }

    /// Evaluates the operator and checks the structure its role demands.
    pub fn eval(&self, t: f64) -> Result<QMatrix> {
        let value = match &self.repr {
            Repr::ClosedForm { eval, .. } => eval(t)?,
            Repr::Sampled { times, values } => interpolate(times, values, t)?,
        };
        if value.shape() != (self.dim, self.dim) {
            return Err(Error::DimensionMismatch {
                op: "GeneratorSource::eval",
                left: value.shape(),
                right: (self.dim, self.dim),
            });
        }
        self.check_structure(t, &value)?;
        Ok(value)
    }

    fn check_structure(&self, t: f64, value: &QMatrix) -> Result<()> {
        let scale = value.max_abs().max(1.0);
        match self.role {
            OperatorRole::AntiHermitian | OperatorRole::Factor => {
                let residual = value.anti_hermitian_residual();
                if residual > tol::GENERATOR * scale {
                    return Err(Error::NotAntiHermitian {
                        what: if self.role == OperatorRole::Factor { "F(t)" } else { "generator" },
                        t,
                        residual,
                    });
                }
            }
            OperatorRole::Metric => {
                let residual = value.hermitian_residual();
                if residual > tol::HERMITICITY * scale {
                    return Err(Error::NotHermitian { what: "eta(t)", residual });
                }
            }
            OperatorRole::Hamiltonian => {}
        }
        Ok(())
    }

    /// Time derivative: exact when available, otherwise a central difference
    /// with step `h`.
    pub fn derivative(&self, t: f64, h: f64) -> Result<QMatrix> {
        if let Repr::ClosedForm {
            derivative: Some(d), ..
        } = &self.repr
        {
            return d(t);
        }
        let plus = self.eval(t + h)?;
        let minus = self.eval(t - h)?;
        Ok((&plus - &minus).scale(0.5 / h))
    }
}

fn interpolate(times: &[f64], values: &[QMatrix], t: f64) -> Result<QMatrix> {
    let (start, end) = (times[0], *times.last().expect("nonempty"));
    if times.len() == 1 {
        return Ok(values[0].clone());
    }
    let slack = 1e-12 * (end - start).abs().max(1.0);
    if t < start - slack || t > end + slack || !t.is_finite() {
        return Err(Error::OutOfRange { t, start, end });
    }
    let t = t.clamp(start, end);
    let k = match times.binary_search_by(|p| p.total_cmp(&t)) {
        Ok(k) => return Ok(values[k].clone()),
        Err(k) => k,
    };
    let (t0, t1) = (times[k - 1], times[k]);
    let w = (t - t0) / (t1 - t0);
    Ok(&values[k - 1].scale(1.0 - w) + &values[k].scale(w))
}

/// Fixed-step integrator settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorOptions {
    /// Largest step; each interval is cut into equal steps no longer than this.
    pub step: f64,
    /// Restart integration at declared breakpoints. When disabled, a step
    /// that would cross a breakpoint is an error.
    pub split_at_breakpoints: bool,
    /// Replace `U` by its unitary polar factor after every output interval.
    pub renormalize: bool,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            step: tol::INTEGRATOR_STEP,
            split_at_breakpoints: true,
            renormalize: false,
        }
    }
}

impl IntegratorOptions {
    pub fn with_step(step: f64) -> Self {
        Self {
            step,
            ..Self::default()
        }
    }
}

/// Evolution operators sampled on a grid.
#[derive(Clone, Debug)]
pub struct Propagation {
    pub times: Vec<f64>,
    pub operators: Vec<QMatrix>,
    /// `‖Y†Y − 1‖_max` per sample; only meaningful for anti-Hermitian
    /// generators.
    pub unitarity_drift: Vec<f64>,
}

fn validate_grid(grid: &[f64], step: f64) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("empty grid".into()));
    }
    if grid.iter().any(|t| !t.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("grid must be finite and strictly increasing".into()));
    }
    if step <= 0.0 || !step.is_finite() {
        return Err(Error::InvalidGrid(format!("integrator step must be positive, got {step}")));
    }
    Ok(())
}

/// `n` evenly spaced points from `start` to `end` inclusive.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n)
            .map(|k| {
                if k == n - 1 {
                    end
                } else {
                    start + (end - start) * k as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// Solves `dU/dt = −ℌ(t) U`, `U(grid[0]) = 1` for an anti-Hermitian `ℌ`.
pub fn propagate_unitary(src: &GeneratorSource, grid: &[f64], opts: &IntegratorOptions) -> Result<Propagation> {
    if src.role() != OperatorRole::AntiHermitian {
        return Err(Error::Invalid(format!(
            "propagate_unitary needs an anti-Hermitian generator, got {:?}",
            src.role()
        )));
    }
    integrate(src, grid, opts, opts.renormalize)
}

/// Solves `dV/dt = −H(t) V`, `V(grid[0]) = 1` for a general Hamiltonian.
pub fn propagate_evolution(src: &GeneratorSource, grid: &[f64], opts: &IntegratorOptions) -> Result<Propagation> {
    match src.role() {
        OperatorRole::AntiHermitian | OperatorRole::Hamiltonian => integrate(src, grid, opts, false),
        role => Err(Error::Invalid(format!("cannot propagate a {role:?} source"))),
    }
}

fn integrate(src: &GeneratorSource, grid: &[f64], opts: &IntegratorOptions, renormalize: bool) -> Result<Propagation> {
    validate_grid(grid, opts.step)?;
    let n = src.dim();
    let mut state = CMatrix::identity(2 * n, 2 * n);
    let mut operators = Vec::with_capacity(grid.len());
    let mut drift = Vec::with_capacity(grid.len());

    let record = |state: &CMatrix, operators: &mut Vec<QMatrix>, drift: &mut Vec<f64>| -> Result<()> {
        let y = QMatrix::from_chi(state)?;
        drift.push((&y.dagger() * &y).max_abs_diff(&QMatrix::identity(n)));
        operators.push(y);
        Ok(())
    };
    record(&state, &mut operators, &mut drift)?;

    for w in grid.windows(2) {
        let (a, b) = (w[0], w[1]);
        let inner = src.breakpoints.within(a, b);
        let near = |p: f64, t: f64| (p - t).abs() <= 1e-12 * t.abs().max(1.0);
        let is_break = |t: f64| inner.iter().any(|&p| near(p, t));
        let interior: Vec<f64> = inner.iter().copied().filter(|&p| !near(p, a) && !near(p, b)).collect();
        if !interior.is_empty() && !opts.split_at_breakpoints {
            return Err(Error::CrossesDiscontinuity {
                from: a,
                to: b,
                at: interior[0],
            });
        }
        let mut knots = Vec::with_capacity(interior.len() + 2);
        knots.push(a);
        knots.extend(interior);
        knots.push(b);
        for seg in knots.windows(2) {
            let (s0, s1) = (seg[0], seg[1]);
            let lo_nudge = is_break(s0);
            let hi_nudge = is_break(s1);
            rk4_segment(src, &mut state, s0, s1, opts.step, lo_nudge, hi_nudge)?;
        }
        if renormalize {
            let y = QMatrix::from_chi(&state)?;
            let gram = &y.dagger() * &y;
            let inv_sqrt = gram.hermitian_map(|v| 1.0 / v.sqrt())?;
            state = (&y * &inv_sqrt).chi_unchecked();
        }
        record(&state, &mut operators, &mut drift)?;
    }

    Ok(Propagation {
        times: grid.to_vec(),
        operators,
        unitarity_drift: drift,
    })
}

/// One smooth segment. Endpoints sitting on a breakpoint are evaluated as
/// one-sided limits by nudging them into the segment.
fn rk4_segment(
    src: &GeneratorSource,
    state: &mut CMatrix,
    a: f64,
    b: f64,
    max_step: f64,
    lo_nudge: bool,
    hi_nudge: bool,
) -> Result<()> {
    let span = b - a;
    let steps = ((span / max_step) - 1e-9).ceil().max(1.0) as usize;
    let h = span / steps as f64;
    let nudge = 1e-12 * a.abs().max(b.abs()).max(1.0);
    let lo = if lo_nudge { a + nudge } else { a };
    let hi = if hi_nudge { b - nudge } else { b };
    let eval = |t: f64| -> Result<CMatrix> {
        let t = t.clamp(lo, hi);
        Ok(-src.eval(t)?.chi_unchecked())
    };

    let half = C64::new(h / 2.0, 0.0);
    let full = C64::new(h, 0.0);
    let sixth = C64::new(h / 6.0, 0.0);
    let two = C64::new(2.0, 0.0);

    let mut g_start = eval(a)?;
    for k in 0..steps {
        let t = a + k as f64 * h;
        let t_end = if k + 1 == steps { b } else { a + (k + 1) as f64 * h };
        let g_mid = eval(t + h / 2.0)?;
        let g_end = eval(t_end)?;
        let k1 = &g_start * &*state;
        let k2 = &g_mid * (&*state + &k1 * half);
        let k3 = &g_mid * (&*state + &k2 * half);
        let k4 = &g_end * (&*state + &k3 * full);
        *state += (k1 + k2 * two + k3 * two + k4) * sixth;
        g_start = g_end;
    }
    Ok(())
}

/// `T⁻¹ X T` with the metric's dressing root.
pub fn dress(x: &QMatrix, m: &Metric) -> Result<QMatrix> {
    let (t, t_inv) = m.root()?;
    t_inv.checked_mul(x)?.checked_mul(t)
}

/// `T X T⁻¹`.
pub fn undress(x: &QMatrix, m: &Metric) -> Result<QMatrix> {
    let (t, t_inv) = m.root()?;
    t.checked_mul(x)?.checked_mul(t_inv)
}

/// `ρ̃(t) = V ρ̃(0) V⁻¹`.
pub fn evolve_generalized(rho_tilde0: &QMatrix, v: &QMatrix) -> Result<QMatrix> {
    let v_inv = v.inverse()?;
    Ok(&(v.checked_mul(rho_tilde0)?) * &v_inv)
}

/// `ρ(t) = V ρ(0) V†`.
pub fn evolve_rho(rho0: &QMatrix, v: &QMatrix) -> Result<QMatrix> {
    Ok(&v.checked_mul(rho0)? * &v.dagger())
}

/// Liouville–von Neumann right-hand side `−[H, ρ̃]`.
pub fn liouville_rhs(h: &QMatrix, rho_tilde: &QMatrix) -> Result<QMatrix> {
    Ok(-&h.commutator(rho_tilde)?)
}

/// `R(t) = (dη/dt) η⁻¹ − H† − η H η⁻¹`; it vanishes identically exactly when
/// `H` is pseudoanti-Hermitian with respect to a time-independent `η`.
pub fn quasistationarity_residual(
    eta_of_t: &GeneratorSource,
    h_of_t: &GeneratorSource,
    t: f64,
    h: f64,
) -> Result<QMatrix> {
    let eta = eta_of_t.eval(t)?;
    let eta_inv = eta.inverse()?;
    let d_eta = eta_of_t.derivative(t, h)?;
    let ham = h_of_t.eval(t)?;
    let lhs = d_eta.checked_mul(&eta_inv)?;
    let rhs = &ham.dagger() + &(&(&eta * &ham) * &eta_inv);
    lhs.checked_sub(&rhs)
}

/// Both constructions of a quasistationary Hamiltonian from an
/// anti-Hermitian factor `F`.
#[derive(Clone, Debug)]
pub struct Factorization {
    /// `H = F η`.
    pub direct: QMatrix,
    /// `ℌ = η^{1/2} F η^{1/2}`.
    pub hfrak: QMatrix,
    /// `H = η^{-1/2} ℌ η^{1/2}`.
    pub dressed: QMatrix,
    pub path_residual: f64,
    pub pseudo_anti_hermitian_residual: f64,
}

pub fn factorize(f: &QMatrix, m: &Metric) -> Result<Factorization> {
    let sqrt = m.principal_root()?;
    let inv_sqrt = m.principal_root_inv()?;
    let scale = f.max_abs().max(1.0);
    let residual = f.anti_hermitian_residual();
    if residual > tol::GENERATOR * scale {
        return Err(Error::NotAntiHermitian {
            what: "F",
            t: f64::NAN,
            residual,
        });
    }
    let direct = f.checked_mul(m.eta())?;
    let hfrak = &(sqrt * f) * sqrt;
    let dressed = &(inv_sqrt * &hfrak) * sqrt;
    let path_residual = direct.max_abs_diff(&dressed);
    let pseudo_anti_hermitian_residual = m.is_pseudo_anti_hermitian(&direct, 0.0)?.residual;
    Ok(Factorization {
        direct,
        hfrak,
        dressed,
        path_residual,
        pseudo_anti_hermitian_residual,
    })
}

/// Tolerance applied by [`hamiltonian_from_f`] to the cross-checks, relative
/// to `‖F‖·‖η‖`.
pub const FACTORIZATION_TOL: f64 = 1e-10;

/// `H(t) = F(t) η`, cross-checked at every evaluation against
/// `η^{-1/2} (η^{1/2} F η^{1/2}) η^{1/2}` and against pseudoanti-Hermiticity.
pub fn hamiltonian_from_f(f: &GeneratorSource, m: &Arc<Metric>) -> Result<GeneratorSource> {
    if f.role() != OperatorRole::Factor && f.role() != OperatorRole::AntiHermitian {
        return Err(Error::Invalid(format!("expected an anti-Hermitian factor, got {:?}", f.role())));
    }
    m.principal_root()?;
    let f = f.clone();
    let metric = Arc::clone(m);
    let breakpoints = f.breakpoints().clone();
    let dim = f.dim();
    Ok(GeneratorSource::closed_form(OperatorRole::Hamiltonian, dim, move |t| {
        let ft = f.eval(t)?;
        let fz = factorize(&ft, &metric)?;
        let scale = ft.max_abs().max(1.0) * metric.eta().max_abs().max(1.0);
        let worst = fz.path_residual.max(fz.pseudo_anti_hermitian_residual);
        if worst > FACTORIZATION_TOL * scale {
            return Err(Error::FactorizationMismatch { residual: worst });
        }
        Ok(fz.direct)
    })
    .with_breakpoints(breakpoints))
}

/// `ℌ(t) = T F(t) T` with the metric's dressing root, so that
/// `T⁻¹ ℌ T = F η`.
pub fn hfrak_from_f(f: &GeneratorSource, m: &Arc<Metric>) -> Result<GeneratorSource> {
    m.root()?;
    let f = f.clone();
    let metric = Arc::clone(m);
    let breakpoints = f.breakpoints().clone();
    Ok(GeneratorSource::closed_form(OperatorRole::AntiHermitian, f.dim(), move |t| {
        let (root, _) = metric.root()?;
        Ok(&(root * &f.eval(t)?) * root)
    })
    .with_breakpoints(breakpoints))
}

/// Per-sample diagnostics of a trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepDiagnostics {
    /// `Re Tr ρ̃(t)`.
    pub re_trace: f64,
    /// `‖V†ηV − η‖_max`.
    pub eta_unitarity_residual: f64,
    /// `‖ηρ̃η⁻¹ − ρ̃†‖_max`.
    pub pseudo_hermiticity_residual: f64,
    /// `‖U†U − 1‖_max`.
    pub unitarity_drift: f64,
    /// `‖(VρV†)η − Vρ̃V⁻¹‖_max`, comparing the two evolution laws.
    pub rho_route_residual: f64,
    /// `Re Tr ρ̃_α(t)`.
    pub projected_re_trace: f64,
    /// Smallest eigenvalue of the Hermitian form `T ρ̃_α T⁻¹`; present when
    /// the metric is complex and positive.
    pub min_eig_projection: Option<f64>,
    /// `‖η ρ̃_α η⁻¹ − ρ̃_α†‖_max`; present when the metric is complex and positive.
    pub projected_quasi_hermiticity_residual: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct TrajectoryStep {
    pub t: f64,
    pub u: QMatrix,
    pub v: QMatrix,
    pub rho_tilde: QMatrix,
    pub rho_tilde_alpha: CMatrix,
    pub diagnostics: StepDiagnostics,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub steps: Vec<TrajectoryStep>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.t).collect()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Largest value of `f` over the steps together with the time it occurs.
    pub fn worst(&self, f: impl Fn(&TrajectoryStep) -> f64) -> (f64, f64) {
        self.steps
            .iter()
            .map(|s| (f(s), s.t))
            .fold((f64::NEG_INFINITY, f64::NAN), |acc, x| if x.0 > acc.0 || x.0.is_nan() { x } else { acc })
    }
}

/// Evolves `rho_tilde0` under `generator` and records diagnostics at every
/// grid point.
///
/// An anti-Hermitian generator `ℌ` is propagated to `U` and dressed to
/// `V = T⁻¹UT`; a Hamiltonian is propagated to `V` directly; a factor `F` is
/// turned into `ℌ = TFT` first.
pub fn simulate(
    generator: &GeneratorSource,
    rho_tilde0: &GeneralizedDensity,
    grid: &[f64],
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    let metric = rho_tilde0.metric();
    if generator.dim() != metric.dim() {
        return Err(Error::DimensionMismatch {
            op: "simulate",
            left: (generator.dim(), generator.dim()),
            right: (metric.dim(), metric.dim()),
        });
    }
    let (us, vs, drift) = match generator.role() {
        OperatorRole::AntiHermitian => {
            let p = propagate_unitary(generator, grid, opts)?;
            let vs = p.operators.iter().map(|u| dress(u, metric)).collect::<Result<Vec<_>>>()?;
            (p.operators, vs, p.unitarity_drift)
        }
        OperatorRole::Factor => {
            let hfrak = hfrak_from_f(generator, metric)?;
            let p = propagate_unitary(&hfrak, grid, opts)?;
            let vs = p.operators.iter().map(|u| dress(u, metric)).collect::<Result<Vec<_>>>()?;
            (p.operators, vs, p.unitarity_drift)
        }
        OperatorRole::Hamiltonian => {
            let p = propagate_evolution(generator, grid, opts)?;
            let us = p.operators.iter().map(|v| undress(v, metric)).collect::<Result<Vec<_>>>()?;
            let n = metric.dim();
            let drift = us
                .iter()
                .map(|u| (&u.dagger() * u).max_abs_diff(&QMatrix::identity(n)))
                .collect();
            (us, p.operators, drift)
        }
        OperatorRole::Metric => return Err(Error::Invalid("a metric source cannot generate dynamics".into())),
    };

    let rt0 = rho_tilde0.rho_tilde();
    let rho0 = rt0 * metric.eta_inv();
    let rho0 = (&rho0 + &rho0.dagger()).scale(0.5);
    let projected = metric.is_complex() && metric.is_positive();

    let mut steps = Vec::with_capacity(grid.len());
    for (k, &t) in grid.iter().enumerate() {
        let v = &vs[k];
        let rt = evolve_generalized(rt0, v)?;
        let rho_t = evolve_rho(&rho0, v)?;
        let rho_route_residual = (&rho_t * metric.eta()).max_abs_diff(&rt);
        let rt_alpha = rt.complex_projection();
        let (min_eig_projection, projected_quasi_hermiticity_residual) = if projected {
            (
                Some(projection::projected_min_eigenvalue(&rt_alpha, metric)?),
                Some(projection::quasi_hermiticity_residual(&rt_alpha, metric)?),
            )
        } else {
            (None, None)
        };
        let diagnostics = StepDiagnostics {
            re_trace: rt.re_trace()?,
            eta_unitarity_residual: metric.is_eta_unitary(v, 0.0)?.residual,
            pseudo_hermiticity_residual: metric.is_pseudo_hermitian(&rt, 0.0)?.residual,
            unitarity_drift: drift[k],
            rho_route_residual,
            projected_re_trace: rt_alpha.trace().re,
            min_eig_projection,
            projected_quasi_hermiticity_residual,
        };
        steps.push(TrajectoryStep {
            t,
            u: us[k].clone(),
            v: v.clone(),
            rho_tilde: rt,
            rho_tilde_alpha: rt_alpha,
            diagnostics,
        });
    }
    Ok(Trajectory { steps })
}
