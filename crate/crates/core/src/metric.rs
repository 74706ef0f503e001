//! The metric operator `η` and the notions defined relative to it.
//!
//! A [`Metric`] is validated once at construction: Hermitian, nonsingular,
//! classified as complex-entried and/or positive, and, when positive, given
//! its principal square root `T` with `η = T²`. A caller may supply a
//! different Hermitian root; the closed-form two-level family does so.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quatmat::QMatrix;
use crate::tol;

/// Which square root of `η` is used for dressing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RootSource {
    Principal,
    UserSupplied,
}

/// A pass/fail verdict together with the residual that produced it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidualCheck {
    pub passed: bool,
    pub residual: f64,
}

impl ResidualCheck {
    pub fn new(residual: f64, tol: f64) -> Self {
        Self {
            passed: residual <= tol,
            residual,
        }
    }
}

#[derive(Clone, Debug)]
struct Root {
    t: QMatrix,
    t_inv: QMatrix,
}

#[derive(Clone, Debug)]
pub struct Metric {
    eta: QMatrix,
    eta_inv: QMatrix,
    is_complex: bool,
    is_positive: bool,
    min_eigenvalue: f64,
    principal: Option<Root>,
    root: Option<(Root, RootSource)>,
}

impl Metric {
    /// Validates `η` and computes the principal root when `η` is positive.
    ///
    /// Indefinite Hermitian metrics are accepted; operations that need a root
    /// report [`Error::NotPositive`] or [`Error::RootUnavailable`].
    pub fn new(eta: QMatrix) -> Result<Self> {
        if !eta.is_square() {
            return Err(Error::NotSquare {
                op: "metric_new",
                rows: eta.nrows(),
                cols: eta.ncols(),
            });
        }
        let scale = eta.max_abs().max(1.0);
        let residual = eta.hermitian_residual();
        if residual > tol::HERMITICITY * scale {
            return Err(Error::NotHermitian { what: "metric", residual });
        }
        let eta_inv = eta.inverse()?;
        let is_complex = eta.is_complex(tol::HERMITICITY * scale);
        let min_eigenvalue = eta.is_positive(0.0)?.min_eigenvalue;
        let is_positive = min_eigenvalue > 0.0;

        let principal = if is_positive {
            let t = eta.hermitian_map(f64::sqrt)?;
            let t_inv = eta.hermitian_map(|v| 1.0 / v.sqrt())?;
            let err = (&t * &t).max_abs_diff(&eta);
            if err > tol::ROOT * scale {
                return Err(Error::InconsistentRoot {
                    reason: format!("principal root squares to eta only within {err:.3e}"),
                });
            }
            Some(Root { t, t_inv })
        } else {
            None
        };
        let root = principal.clone().map(|r| (r, RootSource::Principal));

        Ok(Self {
            eta,
            eta_inv,
            is_complex,
            is_positive,
            min_eigenvalue,
            principal,
            root,
        })
    }

    /// Like [`Metric::new`] but dresses with the supplied Hermitian root `t`,
    /// which must satisfy `t² = η`.
    pub fn with_root(eta: QMatrix, t: QMatrix) -> Result<Self> {
        let mut metric = Self::new(eta)?;
        if t.shape() != metric.eta.shape() {
            return Err(Error::InconsistentRoot {
                reason: format!("root has shape {:?}, metric {:?}", t.shape(), metric.eta.shape()),
            });
        }
        let scale = metric.eta.max_abs().max(1.0);
        let herm = t.hermitian_residual();
        if herm > tol::HERMITICITY * t.max_abs().max(1.0) {
            return Err(Error::InconsistentRoot {
                reason: format!("root is not Hermitian (residual {herm:.3e})"),
            });
        }
        let err = (&t * &t).max_abs_diff(&metric.eta);
        if err > tol::ROOT * scale {
            return Err(Error::InconsistentRoot {
                reason: format!("root squared differs from eta by {err:.3e}"),
            });
        }
        let t_inv = t.inverse()?;
        metric.root = Some((Root { t, t_inv }, RootSource::UserSupplied));
        Ok(metric)
    }

    pub fn eta(&self) -> &QMatrix {
        &self.eta
    }

    pub fn eta_inv(&self) -> &QMatrix {
        &self.eta_inv
    }

    pub fn dim(&self) -> usize {
        self.eta.nrows()
    }

    /// `η` has a vanishing `j` block.
    pub fn is_complex(&self) -> bool {
        self.is_complex
    }

    pub fn is_positive(&self) -> bool {
        self.is_positive
    }

    /// Smallest eigenvalue of `χ(η)`.
    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    pub fn root_source(&self) -> Option<RootSource> {
        self.root.as_ref().map(|(_, s)| *s)
    }

    /// The root used for dressing, `(T, T⁻¹)`.
    pub fn root(&self) -> Result<(&QMatrix, &QMatrix)> {
        self.root
            .as_ref()
            .map(|(r, _)| (&r.t, &r.t_inv))
            .ok_or(Error::RootUnavailable)
    }

    /// Hermitian positive `η^{1/2}`.
    pub fn principal_root(&self) -> Result<&QMatrix> {
        self.principal_pair().map(|r| &r.t)
    }

    /// `η^{-1/2}`.
    pub fn principal_root_inv(&self) -> Result<&QMatrix> {
        self.principal_pair().map(|r| &r.t_inv)
    }

    fn principal_pair(&self) -> Result<&Root> {
        self.principal.as_ref().ok_or(Error::NotPositive {
            what: "metric",
            min_eigenvalue: self.min_eigenvalue,
        })
    }

    fn require_dim(&self, o: &QMatrix, op: &'static str) -> Result<()> {
        if o.shape() != self.eta.shape() {
            return Err(Error::DimensionMismatch {
                op,
                left: o.shape(),
                right: self.eta.shape(),
            });
        }
        Ok(())
    }

    /// `O‡ = η⁻¹ O† η`.
    pub fn pseudo_adjoint(&self, o: &QMatrix) -> Result<QMatrix> {
        self.require_dim(o, "pseudo_adjoint")?;
        Ok(&(&self.eta_inv * &o.dagger()) * &self.eta)
    }

    /// Residual `‖η O η⁻¹ − O†‖_max`.
    pub fn is_pseudo_hermitian(&self, o: &QMatrix, tol: f64) -> Result<ResidualCheck> {
        self.require_dim(o, "is_pseudo_hermitian")?;
        let lhs = &(&self.eta * o) * &self.eta_inv;
        Ok(ResidualCheck::new(lhs.max_abs_diff(&o.dagger()), tol))
    }

    /// Residual `‖η H η⁻¹ + H†‖_max`.
    pub fn is_pseudo_anti_hermitian(&self, h: &QMatrix, tol: f64) -> Result<ResidualCheck> {
        self.require_dim(h, "is_pseudo_anti_hermitian")?;
        let lhs = &(&self.eta * h) * &self.eta_inv;
        Ok(ResidualCheck::new(lhs.max_abs_diff(&(-&h.dagger())), tol))
    }

    /// Residual `‖V† η V − η‖_max`.
    pub fn is_eta_unitary(&self, v: &QMatrix, tol: f64) -> Result<ResidualCheck> {
        self.require_dim(v, "is_eta_unitary")?;
        let lhs = &(&v.dagger() * &self.eta) * v;
        Ok(ResidualCheck::new(lhs.max_abs_diff(&self.eta), tol))
    }
}

/// A generalized density matrix `ρ̃ = ρη`, normalized to `Re Tr ρ̃ = 1`.
#[derive(Clone, Debug)]
pub struct GeneralizedDensity {
    rho_tilde: QMatrix,
    metric: Arc<Metric>,
    raw_re_trace: f64,
}

impl GeneralizedDensity {
    /// Builds `ρη` from a Hermitian positive `ρ` and rescales it to unit
    /// real trace.
    pub fn from_rho(rho: &QMatrix, metric: Arc<Metric>) -> Result<Self> {
        metric.require_dim(rho, "generalized_density_from_rho")?;
        let scale = rho.max_abs().max(1.0);
        let residual = rho.hermitian_residual();
        if residual > tol::PRECONDITION * scale {
            return Err(Error::NotHermitian { what: "rho", residual });
        }
        let pos = rho.is_positive_scaled(tol::POSITIVITY)?;
        if !pos.positive {
            return Err(Error::NotPositive {
                what: "rho",
                min_eigenvalue: pos.min_eigenvalue,
            });
        }
        let rt = rho * metric.eta();
        Self::normalized(rt, metric)
    }

    /// Accepts `ρ̃` directly. It must be `η`-pseudo-Hermitian with
    /// `ρ = ρ̃η⁻¹` positive; the raw scale is recorded before normalizing.
    pub fn from_rho_tilde(rho_tilde: QMatrix, metric: Arc<Metric>) -> Result<Self> {
        metric.require_dim(&rho_tilde, "generalized_density")?;
        let scale = rho_tilde.max_abs().max(1.0);
        let check = metric.is_pseudo_hermitian(&rho_tilde, tol::PRECONDITION * scale)?;
        if !check.passed {
            return Err(Error::NotPseudoHermitian {
                what: "generalized density",
                residual: check.residual,
            });
        }
        let rho = &rho_tilde * metric.eta_inv();
        let rho = (&rho + &rho.dagger()).scale(0.5);
        let pos = rho.is_positive_scaled(tol::POSITIVITY)?;
        if !pos.positive {
            return Err(Error::NotPositive {
                what: "rho = rho_tilde * eta^-1",
                min_eigenvalue: pos.min_eigenvalue,
            });
        }
        Self::normalized(rho_tilde, metric)
    }

    fn normalized(rt: QMatrix, metric: Arc<Metric>) -> Result<Self> {
        let raw_re_trace = rt.re_trace()?;
        if raw_re_trace.abs() < 1e-300 || !raw_re_trace.is_finite() {
            return Err(Error::ZeroTrace { re_trace: raw_re_trace });
        }
        Ok(Self {
            rho_tilde: rt.scale(1.0 / raw_re_trace),
            metric,
            raw_re_trace,
        })
    }

    pub fn rho_tilde(&self) -> &QMatrix {
        &self.rho_tilde
    }

    pub fn metric(&self) -> &Arc<Metric> {
        &self.metric
    }

    /// `Re Tr` of the matrix before normalization.
    pub fn raw_re_trace(&self) -> f64 {
        self.raw_re_trace
    }

    /// The underlying Hermitian `ρ = ρ̃ η⁻¹`.
    pub fn rho(&self) -> QMatrix {
        &self.rho_tilde * self.metric.eta_inv()
    }

    /// `⟨O⟩_η = Re Tr(ρ̃ O)`. A non-pseudo-Hermitian observable is logged
    /// and evaluated anyway.
    pub fn expectation(&self, o: &QMatrix) -> Result<f64> {
        self.metric.require_dim(o, "expectation")?;
        let check = self
            .metric
            .is_pseudo_hermitian(o, tol::PRECONDITION * o.max_abs().max(1.0))?;
        if !check.passed {
            log::warn!(
                "observable is not eta-pseudo-Hermitian (residual {:.3e}); expectation may be meaningless",
                check.residual
            );
        }
        (&self.rho_tilde * o).re_trace()
    }
}
