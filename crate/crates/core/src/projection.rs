//! Complex projection of quasistationary quaternionic dynamics.
//!
//! With a complex positive metric the complex part `ρ̃_α` of an evolved
//! generalized density is again a quasi-Hermitian, positive, unit-trace
//! density. This module carries the finite projected map in two algebraic
//! forms, the infinitesimal projected equation, and validators for the two
//! structural properties of the projection (quasi-Hermiticity, and
//! positivity with unit trace).

use rand::Rng;

use crate::error::{Error, Result};
use crate::metric::{GeneralizedDensity, Metric, ResidualCheck};
use crate::quatmat::{max_abs, CMatrix, QMatrix};
use crate::sampling;
use crate::tol;
use std::sync::Arc;

/// The symplectic blocks `(X_α, X_β)` of an operator `X = X_α + j·X_β`.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitOperator {
    pub alpha: CMatrix,
    pub beta: CMatrix,
}

impl From<&QMatrix> for SplitOperator {
    fn from(m: &QMatrix) -> Self {
        Self {
            alpha: m.alpha().clone(),
            beta: m.beta().clone(),
        }
    }
}

impl SplitOperator {
    pub fn to_qmatrix(&self) -> Result<QMatrix> {
        QMatrix::new(self.alpha.clone(), self.beta.clone())
    }

    /// Residuals of `V_α†η = ηW_α` and `−V_βᵀη = conj(η)W_β` for an
    /// `η`-unitary `V = self` and `W` the split of `V⁻¹`.
    pub fn inverse_relation_residuals(&self, w: &SplitOperator, m: &Metric) -> Result<(f64, f64)> {
        require_complex_positive(m)?;
        let eta = m.eta().alpha();
        let r_alpha = self.alpha.adjoint() * eta - eta * &w.alpha;
        let r_beta = -(self.beta.transpose() * eta) - eta.conjugate() * &w.beta;
        Ok((max_abs(&r_alpha), max_abs(&r_beta)))
    }
}

fn require_complex_positive(m: &Metric) -> Result<()> {
    if !m.is_complex() {
        return Err(Error::MetricNotComplex {
            beta_norm: max_abs(m.eta().beta()),
        });
    }
    if !m.is_positive() {
        return Err(Error::NotPositive {
            what: "metric",
            min_eigenvalue: m.min_eigenvalue(),
        });
    }
    Ok(())
}

/// Finite projected map from the Hermitian `ρ(0) = ρ_α + j·ρ_β`:
///
/// `ρ̃_α(t) = (V_α ρ_α V_α† + V_β* ρ_α* V_βᵀ + V_α ρ_β* V_βᵀ − V_β* ρ_β V_α†) η`.
pub fn project_map_finite(rho0: &QMatrix, v: &SplitOperator, m: &Metric) -> Result<CMatrix> {
    require_complex_positive(m)?;
    if rho0.shape() != m.eta().shape() || v.alpha.shape() != m.eta().shape() {
        return Err(Error::DimensionMismatch {
            op: "project_map_finite",
            left: rho0.shape(),
            right: v.alpha.shape(),
        });
    }
    let (ra, rb) = (rho0.alpha(), rho0.beta());
    let (va, vb) = (&v.alpha, &v.beta);
    let vb_conj = vb.conjugate();
    let rho_alpha_t = va * ra * va.adjoint() + &vb_conj * ra.conjugate() * vb.transpose()
        + va * rb.conjugate() * vb.transpose()
        - &vb_conj * rb * va.adjoint();
    Ok(rho_alpha_t * m.eta().alpha())
}

/// Tolerance on `V·W = 1` accepted by [`project_map_w_form`].
pub const INVERSE_CONSISTENCY_TOL: f64 = 1e-8;

/// The same map written in terms of `ρ̃_α(0)`, `ρ̃_β(0)` and `W = V⁻¹`:
///
/// `ρ̃_α(t) = V_α ρ̃_α W_α − V_β* ρ̃_α* W_β − V_α ρ̃_β* W_β − V_β* ρ̃_β W_α`.
pub fn project_map_w_form(
    rt_alpha0: &CMatrix,
    rt_beta0: &CMatrix,
    v: &SplitOperator,
    w: &SplitOperator,
) -> Result<CMatrix> {
    let vq = v.to_qmatrix()?;
    let wq = w.to_qmatrix()?;
    let n = vq.nrows();
    let residual = vq.checked_mul(&wq)?.max_abs_diff(&QMatrix::identity(n));
    if residual > INVERSE_CONSISTENCY_TOL * vq.max_abs().max(1.0) * wq.max_abs().max(1.0) {
        return Err(Error::InconsistentInverse { residual });
    }
    if rt_alpha0.shape() != (n, n) || rt_beta0.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            op: "project_map_w_form",
            left: rt_alpha0.shape(),
            right: (n, n),
        });
    }
    let (va, vb_conj) = (&v.alpha, v.beta.conjugate());
    let (wa, wb) = (&w.alpha, &w.beta);
    Ok(va * rt_alpha0 * wa
        - &vb_conj * rt_alpha0.conjugate() * wb
        - va * rt_beta0.conjugate() * wb
        - &vb_conj * rt_beta0 * wa)
}

/// `dρ̃_α/dt = −[H_α, ρ̃_α] + H_β* ρ̃_β − ρ̃_β* H_β`.
pub fn project_rhs_infinitesimal(h: &SplitOperator, rt_alpha: &CMatrix, rt_beta: &CMatrix) -> CMatrix {
    let (ha, hb) = (&h.alpha, &h.beta);
    -(ha * rt_alpha - rt_alpha * ha) + hb.conjugate() * rt_beta - rt_beta.conjugate() * hb
}

/// `‖η ρ̃_α η⁻¹ − ρ̃_α†‖_max`, evaluated in quaternion arithmetic so that a
/// quaternionic `η` is handled too.
pub fn quasi_hermiticity_residual(rt_alpha: &CMatrix, m: &Metric) -> Result<f64> {
    let p = QMatrix::from_complex(rt_alpha.clone());
    Ok(m.is_pseudo_hermitian(&p, 0.0)?.residual)
}

/// Smallest eigenvalue of the Hermitian part of `T ρ̃_α T⁻¹`.
pub fn projected_min_eigenvalue(rt_alpha: &CMatrix, m: &Metric) -> Result<f64> {
    let (t, t_inv) = m.root()?;
    let p = QMatrix::from_complex(rt_alpha.clone());
    let s = t.checked_mul(&p)?.checked_mul(t_inv)?;
    let herm = (&s + &s.dagger()).scale(0.5);
    Ok(herm.is_positive(0.0)?.min_eigenvalue)
}

fn require_quasi_hermitian(rt: &QMatrix, m: &Metric) -> Result<()> {
    if !m.is_positive() {
        return Err(Error::NotPositive {
            what: "metric",
            min_eigenvalue: m.min_eigenvalue(),
        });
    }
    let check = m.is_pseudo_hermitian(rt, tol::PRECONDITION * rt.max_abs().max(1.0))?;
    if !check.passed {
        return Err(Error::NotPseudoHermitian {
            what: "generalized density",
            residual: check.residual,
        });
    }
    Ok(())
}

/// Whether the complex projection of a quasi-Hermitian `ρ̃` is again
/// quasi-Hermitian. Holds for every `ρ̃` when `η` is complex.
pub fn check_property_i(rt: &QMatrix, m: &Metric, tol: f64) -> Result<ResidualCheck> {
    require_quasi_hermitian(rt, m)?;
    let residual = quasi_hermiticity_residual(rt.alpha(), m)?;
    Ok(ResidualCheck::new(residual, tol))
}

/// Outcome of a randomized search for a generalized density whose projection
/// is not quasi-Hermitian.
#[derive(Clone, Debug)]
pub struct CounterexampleSearch {
    pub seed: u64,
    pub draws: usize,
    pub threshold: f64,
    pub max_residual: f64,
    /// Index of the first draw above the threshold.
    pub first_hit: Option<usize>,
    /// The `ρ̃` achieving `max_residual`.
    pub witness: Option<QMatrix>,
}

impl CounterexampleSearch {
    pub fn found(&self) -> bool {
        self.first_hit.is_some()
    }
}

/// Draws `draws` random quaternionic densities `ρ` (normalized `GG†`),
/// forms `ρ̃ = ρη`, and records the largest projected quasi-Hermiticity
/// residual.
pub fn search_property_i_counterexample(
    m: &Arc<Metric>,
    draws: usize,
    seed: u64,
    threshold: f64,
) -> Result<CounterexampleSearch> {
    let mut rng = sampling::rng(seed);
    let n = m.dim();
    let mut out = CounterexampleSearch {
        seed,
        draws,
        threshold,
        max_residual: 0.0,
        first_hit: None,
        witness: None,
    };
    for k in 0..draws {
        let rho = if rng.random_bool(0.5) {
            sampling::density(&mut rng, n)
        } else {
            sampling::pure_density(&mut rng, n)
        };
        let gd = match GeneralizedDensity::from_rho(&rho, Arc::clone(m)) {
            Ok(gd) => gd,
            Err(Error::NotPositive { .. }) => continue,
            Err(e) => return Err(e),
        };
        let residual = check_property_i(gd.rho_tilde(), m, threshold)?.residual;
        if residual > out.max_residual {
            out.max_residual = residual;
            out.witness = Some(gd.rho_tilde().clone());
        }
        if residual > threshold && out.first_hit.is_none() {
            out.first_hit = Some(k);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropertyIiCheck {
    pub positive: bool,
    pub min_eigenvalue: f64,
    pub re_trace: f64,
}

impl PropertyIiCheck {
    /// Positive and `|Re Tr − 1| ≤ trace_tol`.
    pub fn holds(&self, trace_tol: f64) -> bool {
        self.positive && (self.re_trace - 1.0).abs() <= trace_tol
    }
}

/// Positivity of `ρ̃_α = P[ρ̃]`, read off the Hermitian form `T ρ̃_α T⁻¹`,
/// and its real trace.
pub fn check_property_ii(rt: &QMatrix, m: &Metric, tol: f64) -> Result<PropertyIiCheck> {
    require_complex_positive(m)?;
    require_quasi_hermitian(rt, m)?;
    let rho = rt.checked_mul(m.eta_inv())?;
    let rho = (&rho + &rho.dagger()).scale(0.5);
    let pos = rho.is_positive_scaled(tol::POSITIVITY)?;
    if !pos.positive {
        return Err(Error::NotPositive {
            what: "rho = rho_tilde * eta^-1",
            min_eigenvalue: pos.min_eigenvalue,
        });
    }
    let tr = rt.re_trace()?;
    if (tr - 1.0).abs() > tol::PRECONDITION {
        return Err(Error::Invalid(format!("Re Tr rho_tilde = {tr}, expected 1")));
    }
    let min_eigenvalue = projected_min_eigenvalue(rt.alpha(), m)?;
    Ok(PropertyIiCheck {
        positive: min_eigenvalue >= -tol,
        min_eigenvalue,
        re_trace: rt.alpha().trace().re,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quatmat::{Quaternion, C64};

    fn identity_metric(n: usize) -> Arc<Metric> {
        Arc::new(Metric::new(QMatrix::identity(n)).unwrap())
    }

    #[test]
    fn identity_evolution_is_trivial() {
        let m = identity_metric(2);
        let mut rng = sampling::rng(3);
        let rho = sampling::density(&mut rng, 2);
        let id = SplitOperator::from(&QMatrix::identity(2));
        let out = project_map_finite(&rho, &id, &m).unwrap();
        assert!(max_abs(&(out - rho.alpha())) < 1e-15);
        let w = project_map_w_form(rho.alpha(), rho.beta(), &id, &id).unwrap();
        assert!(max_abs(&(w - rho.alpha())) < 1e-15);
    }

    #[test]
    fn complex_evolution_is_plain_similarity() {
        let mut rng = sampling::rng(5);
        let va = sampling::complex_gaussian(&mut rng, 3, 3) + CMatrix::identity(3, 3) * C64::new(3.0, 0.0);
        let v = QMatrix::from_complex(va.clone());
        let w = v.inverse().unwrap();
        let ra = sampling::complex_gaussian(&mut rng, 3, 3);
        let out = project_map_w_form(&ra, &CMatrix::zeros(3, 3), &(&v).into(), &(&w).into()).unwrap();
        let expected = &va * &ra * w.alpha();
        assert!(max_abs(&(out - expected)) < 1e-12);
    }

    #[test]
    fn w_form_rejects_wrong_inverse() {
        let v = QMatrix::from_diagonal(&[Quaternion::J, Quaternion::ONE]);
        let not_inverse = v.clone();
        let z = CMatrix::zeros(2, 2);
        assert!(matches!(
            project_map_w_form(&z, &z, &(&v).into(), &(&not_inverse).into()),
            Err(Error::InconsistentInverse { .. })
        ));
    }

    #[test]
    fn rhs_cases() {
        let z = CMatrix::zeros(2, 2);
        let ha = CMatrix::from_diagonal_element(2, 2, C64::new(0.0, 1.0));
        let h = SplitOperator { alpha: ha.clone(), beta: z.clone() };
        let id = CMatrix::identity(2, 2);
        assert_eq!(project_rhs_infinitesimal(&h, &id, &z), z);

        let mut rng = sampling::rng(1);
        let ha = sampling::complex_gaussian(&mut rng, 2, 2);
        let ra = sampling::complex_gaussian(&mut rng, 2, 2);
        let rb = sampling::complex_gaussian(&mut rng, 2, 2);
        let h = SplitOperator { alpha: ha.clone(), beta: z };
        let expected = -(&ha * &ra - &ra * &ha);
        assert!(max_abs(&(project_rhs_infinitesimal(&h, &ra, &rb) - expected)) < 1e-14);
    }

    #[test]
    fn quaternionic_metric_is_refused_by_the_finite_map() {
        let eta = QMatrix::new(
            CMatrix::identity(2, 2),
            CMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(0.5, 0.0), C64::new(-0.5, 0.0), C64::new(0.0, 0.0)]),
        )
        .unwrap();
        let m = Metric::new(eta).unwrap();
        assert!(m.is_positive() && !m.is_complex());
        let id = SplitOperator::from(&QMatrix::identity(2));
        assert!(matches!(
            project_map_finite(&QMatrix::identity(2), &id, &m),
            Err(Error::MetricNotComplex { .. })
        ));
    }

    #[test]
    fn property_i_with_identity_metric() {
        let m = identity_metric(3);
        let mut rng = sampling::rng(9);
        for _ in 0..20 {
            let rho = sampling::density(&mut rng, 3);
            assert!(check_property_i(&rho, &m, 1e-12).unwrap().passed);
        }
    }

    #[test]
    fn property_i_rejects_non_quasi_hermitian_input() {
        let m = identity_metric(1);
        let j = QMatrix::from_diagonal(&[Quaternion::J]);
        assert!(matches!(check_property_i(&j, &m, 1e-8), Err(Error::NotPseudoHermitian { .. })));
    }

    #[test]
    fn property_ii_maximally_mixed() {
        let m = identity_metric(4);
        let rt = QMatrix::identity(4).scale(0.25);
        let c = check_property_ii(&rt, &m, 1e-12).unwrap();
        assert!(c.holds(1e-14));
        assert!((c.min_eigenvalue - 0.25).abs() < 1e-14);
        assert!((c.re_trace - 1.0).abs() < 1e-15);
    }

    #[test]
    fn property_ii_rejects_unnormalized_state() {
        let m = identity_metric(2);
        assert!(check_property_ii(&QMatrix::identity(2), &m, 1e-12).is_err());
    }
}
