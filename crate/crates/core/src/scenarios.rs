//! Closed-form two-level quasistationary family.
//!
//! The metric is `η = T²` with the Hermitian `T = [[x, z], [z*, y]]`, the
//! undressed evolution is the quaternionic unitary `U(t) = diag(q(t), 1)`
//! with `q = √(1 − sin⁴2t) + j·e^{−iθ} sin²2t`, and everything else follows
//! by dressing with `T`. The undressed generator contains `sign(cos 2t)`,
//! so it jumps at `t = π/4 + kπ/2`; `U(t)` itself is continuous there.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::sync::Arc;

use crate::dynamics::{Breakpoints, GeneratorSource, OperatorRole};
use crate::error::{Error, Result};
use crate::metric::{GeneralizedDensity, Metric};
use crate::quatmat::{CMatrix, QMatrix, Quaternion, C64};

/// Smallest accepted `|xy − |z|²|`.
pub const MIN_DETERMINANT: f64 = 1e-8;

/// `|cos 2t|` below which the generator is considered to sit on a breakpoint.
const BREAKPOINT_GUARD: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sec4Params {
    pub x: f64,
    pub y: f64,
    pub z: C64,
    pub theta: f64,
}

impl Sec4Params {
    pub fn new(x: f64, y: f64, z: C64, theta: f64) -> Result<Self> {
        let p = Self { x, y, z, theta };
        if ![x, y, z.re, z.im, theta].iter().all(|v| v.is_finite()) {
            return Err(Error::Invalid("non-finite scenario parameter".into()));
        }
        let det = p.det();
        if det.abs() < MIN_DETERMINANT {
            return Err(Error::DegenerateMetric { det });
        }
        Ok(p)
    }

    /// `(x, y, z, θ) = (2, 1, 0.5, 0)`: `xy − |z|² = 1.75`.
    pub fn reference() -> Self {
        Self::new(2.0, 1.0, C64::new(0.5, 0.0), 0.0).expect("reference parameters are valid")
    }

    /// `xy − |z|²`, the determinant of `T`.
    pub fn det(&self) -> f64 {
        self.x * self.y - self.z.norm_sqr()
    }

    fn phase(&self) -> C64 {
        C64::from_polar(1.0, -self.theta)
    }
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn complex2(entries: [C64; 4]) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &entries)
}

/// `η`, the Hermitian root `T` used for dressing and `T⁻¹`.
#[derive(Clone, Debug)]
pub struct Sec4Metric {
    pub eta: QMatrix,
    pub t: QMatrix,
    pub t_inv: QMatrix,
}

impl Sec4Metric {
    /// A [`Metric`] that dresses with this `T` rather than the principal root.
    pub fn metric(&self) -> Result<Metric> {
        Metric::with_root(self.eta.clone(), self.t.clone())
    }
}

/// `η = [[x² + |z|², (x + y)z], [(x + y)z*, y² + |z|²]]`.
pub fn sec4_eta(p: &Sec4Params) -> Sec4Metric {
    let (x, y, z) = (p.x, p.y, p.z);
    let zz = z.norm_sqr();
    let eta = complex2([c(x * x + zz), z * (x + y), z.conj() * (x + y), c(y * y + zz)]);
    let t = complex2([c(x), z, z.conj(), c(y)]);
    let t_inv = complex2([c(y), -z, -z.conj(), c(x)]) / c(p.det());
    Sec4Metric {
        eta: QMatrix::from_complex(eta),
        t: QMatrix::from_complex(t),
        t_inv: QMatrix::from_complex(t_inv),
    }
}

pub fn sec4_metric(p: &Sec4Params) -> Result<Arc<Metric>> {
    Ok(Arc::new(sec4_eta(p).metric()?))
}

/// `√(1 − s⁴)`, clamped at zero under the radical.
fn cos_part(s: f64) -> f64 {
    (1.0 - s.powi(4)).max(0.0).sqrt()
}

/// `q(t) = √(1 − sin⁴2t) + j·e^{−iθ} sin²2t`.
pub fn sec4_q(t: f64, p: &Sec4Params) -> Quaternion {
    let s = (2.0 * t).sin();
    Quaternion::from_symplectic(c(cos_part(s)), p.phase() * (s * s))
}

/// `U(t) = diag(q(t), 1)`.
pub fn sec4_u(t: f64, p: &Sec4Params) -> QMatrix {
    QMatrix::from_diagonal(&[sec4_q(t, p), Quaternion::ONE])
}

/// The complex coefficient of `j` in `ℌ₁₁(t)`:
/// `−4e^{−iθ} sin 2t cos 2t / (|cos 2t| √(1 + sin²2t))`.
fn hfrak_coefficient(t: f64, p: &Sec4Params) -> Result<C64> {
    let (s, co) = (2.0 * t).sin_cos();
    if co.abs() < BREAKPOINT_GUARD {
        return Err(Error::Breakpoint { t });
    }
    Ok(p.phase() * (-4.0 * s * co / (co.abs() * (1.0 + s * s).sqrt())))
}

/// `ℌ(t) = [[j·a(t), 0], [0, 0]]`, anti-Hermitian.
pub fn sec4_hfrak(t: f64, p: &Sec4Params) -> Result<QMatrix> {
    let a = hfrak_coefficient(t, p)?;
    Ok(QMatrix::from_j_part(complex2([a, c(0.0), c(0.0), c(0.0)])))
}

/// `H(t) = j·a(t)/(xy − |z|²)·[[yx, yz], [−zx, −z²]]`.
pub fn sec4_h(t: f64, p: &Sec4Params) -> Result<QMatrix> {
    let a = hfrak_coefficient(t, p)? / p.det();
    let (x, y, z) = (p.x, p.y, p.z);
    let m = complex2([c(x * y), z * y, -z * x, -z * z]);
    Ok(QMatrix::from_j_part(m * a))
}

/// `V(t) = (1/(xy − |z|²))·[[xyq − |z|², y(q − 1)z], [−z*(q − 1)x, −z*qz + xy]]`.
pub fn sec4_v(t: f64, p: &Sec4Params) -> QMatrix {
    let q = sec4_q(t, p);
    let (x, y) = (p.x, p.y);
    let z = Quaternion::from_complex(p.z);
    let zc = Quaternion::from_complex(p.z.conj());
    let real = |v: f64| Quaternion::new(v, 0.0, 0.0, 0.0);
    let qm1 = q - Quaternion::ONE;
    let inv = 1.0 / p.det();
    let entries = [
        q.scale(x * y) - real(p.z.norm_sqr()),
        (qm1 * z).scale(y),
        -(zc * qm1).scale(x),
        -(zc * q * z) + real(x * y),
    ];
    QMatrix::from_fn(2, 2, |r, k| entries[2 * r + k].scale(inv))
}

/// The matrices shared by the initial and evolved closed-form states.
fn j_block(p: &Sec4Params) -> CMatrix {
    let (x, y, z) = (p.x, p.y, p.z);
    let zz = z.norm_sqr();
    complex2([-z.conj() * (x + y), c(-zz - y * y), c(zz + x * x), z * (x + y)])
}

/// Initial generalized density
/// `ρ̃(0) = ½·1 + j·e^{−iθ}/(2(xy − |z|²))·[[−(x+y)z*, −(|z|²+y²)], [|z|²+x², (x+y)z]]`.
pub fn sec4_rho0_matrix(p: &Sec4Params) -> QMatrix {
    let alpha = CMatrix::identity(2, 2) * c(0.5);
    let beta = j_block(p) * (p.phase() / (2.0 * p.det()));
    QMatrix::new(alpha, beta).expect("2x2 blocks")
}

/// [`sec4_rho0_matrix`] validated against the scenario metric.
pub fn sec4_rho0(p: &Sec4Params) -> Result<GeneralizedDensity> {
    GeneralizedDensity::from_rho_tilde(sec4_rho0_matrix(p), sec4_metric(p)?)
}

/// Closed-form evolved state
/// `ρ̃(t) = ½·1 + sin²2t/(2D)·[[yz* − xz, y² − z²], [x² − z*², −yz* + xz]]
///        + j·e^{−iθ}√(1 − sin⁴2t)/(2D)·[[−z*(x+y), −|z|² − y²], [|z|² + x², z(x+y)]]`
/// with `D = xy − |z|²`.
pub fn sec4_rho_t(t: f64, p: &Sec4Params) -> QMatrix {
    let s = (2.0 * t).sin();
    let d = p.det();
    let (x, y, z) = (p.x, p.y, p.z);
    let zc = z.conj();
    let drift = complex2([zc * y - z * x, c(y * y) - z * z, c(x * x) - zc * zc, -zc * y + z * x]);
    let alpha = CMatrix::identity(2, 2) * c(0.5) + drift * c(s * s / (2.0 * d));
    let beta = j_block(p) * (p.phase() * (cos_part(s) / (2.0 * d)));
    QMatrix::new(alpha, beta).expect("2x2 blocks")
}

/// Generator jumps at `t = π/4 + kπ/2`.
pub fn sec4_breakpoints() -> Breakpoints {
    Breakpoints::Periodic {
        offset: FRAC_PI_4,
        period: FRAC_PI_2,
    }
}

pub fn hfrak_source(p: &Sec4Params) -> GeneratorSource {
    let p = *p;
    GeneratorSource::closed_form(OperatorRole::AntiHermitian, 2, move |t| sec4_hfrak(t, &p))
        .with_breakpoints(sec4_breakpoints())
}

pub fn hamiltonian_source(p: &Sec4Params) -> GeneratorSource {
    let p = *p;
    GeneratorSource::closed_form(OperatorRole::Hamiltonian, 2, move |t| sec4_h(t, &p))
        .with_breakpoints(sec4_breakpoints())
}

/// The constant scenario metric as a time-dependent source.
pub fn eta_source(p: &Sec4Params) -> GeneratorSource {
    GeneratorSource::constant(OperatorRole::Metric, sec4_eta(p).eta)
}

/// Direct versus composed evolution of the projected `(2,1)` entry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SemigroupGap {
    pub t: f64,
    pub t_prime: f64,
    /// `P[V(t) ρ̃(0) V(t)⁻¹]₂₁`.
    pub direct: C64,
    /// `P[V(t−t′) V(t′) ρ̃(0) V(t′)⁻¹ V(t−t′)⁻¹]₂₁`.
    pub composed: C64,
    /// `|direct − composed|`.
    pub gap: f64,
    /// Quoted closed form for the direct entry, `sin²2t`.
    pub quoted_direct: f64,
    /// Quoted closed form for the composed entry,
    /// `cos²2(t−t′) sin²2t′ − [(1 − cos⁴2(t−t′))(1 − sin⁴2t′)]^{1/2}`.
    pub quoted_composed: f64,
    pub quoted_gap: f64,
}

/// The quoted closed-form values `(direct, composed)`.
pub fn quoted_semigroup_entries(t: f64, t_prime: f64) -> (f64, f64) {
    let s = (2.0 * t).sin();
    let cd = (2.0 * (t - t_prime)).cos();
    let sp = (2.0 * t_prime).sin();
    let direct = s * s;
    let composed = cd * cd * sp * sp - ((1.0 - cd.powi(4)) * (1.0 - sp.powi(4))).max(0.0).sqrt();
    (direct, composed)
}

impl SemigroupGap {
    /// Builds the comparison from `V(t)`, `V(t′)` and `V(t − t′)` however
    /// they were obtained.
    pub fn from_operators(
        t: f64,
        t_prime: f64,
        rho_tilde0: &QMatrix,
        v_t: &QMatrix,
        v_t_prime: &QMatrix,
        v_diff: &QMatrix,
    ) -> Result<Self> {
        let direct_state = crate::dynamics::evolve_generalized(rho_tilde0, v_t)?;
        let composed_op = v_diff.checked_mul(v_t_prime)?;
        let composed_state = crate::dynamics::evolve_generalized(rho_tilde0, &composed_op)?;
        let direct = direct_state.complex_projection()[(1, 0)];
        let composed = composed_state.complex_projection()[(1, 0)];
        let (quoted_direct, quoted_composed) = quoted_semigroup_entries(t, t_prime);
        Ok(Self {
            t,
            t_prime,
            direct,
            composed,
            gap: (direct - composed).norm(),
            quoted_direct,
            quoted_composed,
            quoted_gap: (quoted_direct - quoted_composed).abs(),
        })
    }
}

/// Semigroup comparison using the closed-form `V`.
pub fn semigroup_gap(t: f64, t_prime: f64, p: &Sec4Params) -> Result<SemigroupGap> {
    if !(0.0..=t).contains(&t_prime) {
        return Err(Error::Invalid(format!("need 0 <= t' <= t, got t = {t}, t' = {t_prime}")));
    }
    let rho0 = sec4_rho0_matrix(p);
    SemigroupGap::from_operators(
        t,
        t_prime,
        &rho0,
        &sec4_v(t, p),
        &sec4_v(t_prime, p),
        &sec4_v(t - t_prime, p),
    )
}
