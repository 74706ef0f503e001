//! Quaternionic scalars and matrices in symplectic form.
//!
//! A quaternion `q = a + bi + cj + dk` is stored as the pair
//! `q = z_α + j·z_β` with `z_α = a + bi` and `z_β = c − di`. Complex scalars
//! do not commute with `j`: `j·z = conj(z)·j`. A quaternionic matrix is stored
//! the same way, `M = M_α + j·M_β`, so that the complex projection
//! `P[M] = ½(M − iMi)` is exactly the stored `alpha` block.
//!
//! Inversion and spectra go through the complex adjoint representation
//! `χ(M) = [[M_α, −conj(M_β)], [M_β, conj(M_α)]]`, an injective algebra
//! homomorphism into the `2n × 2n` complex matrices.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tol;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// `q = a + bi + cj + dk`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Quaternion {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Quaternion {
    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Self = Self::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Self = Self::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Self = Self::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Self = Self::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    /// Builds `alpha + j·beta`.
    pub fn from_symplectic(alpha: C64, beta: C64) -> Self {
        Self::new(alpha.re, alpha.im, beta.re, -beta.im)
    }

    pub fn from_complex(z: C64) -> Self {
        Self::new(z.re, z.im, 0.0, 0.0)
    }

    pub fn alpha(&self) -> C64 {
        C64::new(self.a, self.b)
    }

    pub fn beta(&self) -> C64 {
        C64::new(self.c, -self.d)
    }

    pub fn conj(&self) -> Self {
        Self::new(self.a, -self.b, -self.c, -self.d)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }
}

impl Add for Quaternion {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

impl Sub for Quaternion {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

impl Neg for Quaternion {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.a, -self.b, -self.c, -self.d)
    }
}

/// Hamilton product.
impl Mul for Quaternion {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.a * o.a - self.b * o.b - self.c * o.c - self.d * o.d,
            self.a * o.b + self.b * o.a + self.c * o.d - self.d * o.c,
            self.a * o.c - self.b * o.d + self.c * o.a + self.d * o.b,
            self.a * o.d + self.b * o.c - self.c * o.b + self.d * o.a,
        )
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:+}i {:+}j {:+}k", self.a, self.b, self.c, self.d)
    }
}

/// Quaternionic matrix `alpha + j·beta`.
#[derive(Clone, Debug, PartialEq)]
pub struct QMatrix {
    alpha: CMatrix,
    beta: CMatrix,
}

/// Outcome of a positivity test on a Hermitian quaternionic matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Positivity {
    pub positive: bool,
    pub min_eigenvalue: f64,
    pub max_abs_eigenvalue: f64,
}

impl QMatrix {
    pub fn new(alpha: CMatrix, beta: CMatrix) -> Result<Self> {
        if alpha.shape() != beta.shape() {
            return Err(Error::DimensionMismatch {
                op: "QMatrix::new",
                left: alpha.shape(),
                right: beta.shape(),
            });
        }
        Ok(Self { alpha, beta })
    }

    pub fn from_complex(alpha: CMatrix) -> Self {
        let beta = CMatrix::zeros(alpha.nrows(), alpha.ncols());
        Self { alpha, beta }
    }

    /// The purely quaternionic matrix `j·beta`.
    pub fn from_j_part(beta: CMatrix) -> Self {
        let alpha = CMatrix::zeros(beta.nrows(), beta.ncols());
        Self { alpha, beta }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            alpha: CMatrix::zeros(rows, cols),
            beta: CMatrix::zeros(rows, cols),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_complex(CMatrix::identity(n, n))
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Quaternion) -> Self {
        let mut out = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                out.set(r, c, f(r, c));
            }
        }
        out
    }

    pub fn from_diagonal(diag: &[Quaternion]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |r, c| if r == c { diag[r] } else { Quaternion::ZERO })
    }

    pub fn alpha(&self) -> &CMatrix {
        &self.alpha
    }

    pub fn beta(&self) -> &CMatrix {
        &self.beta
    }

    pub fn into_parts(self) -> (CMatrix, CMatrix) {
        (self.alpha, self.beta)
    }

    pub fn nrows(&self) -> usize {
        self.alpha.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.alpha.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.alpha.shape()
    }

    pub fn is_square(&self) -> bool {
        self.nrows() == self.ncols()
    }

    pub fn entry(&self, r: usize, c: usize) -> Quaternion {
        Quaternion::from_symplectic(self.alpha[(r, c)], self.beta[(r, c)])
    }

    pub fn set(&mut self, r: usize, c: usize, q: Quaternion) {
        self.alpha[(r, c)] = q.alpha();
        self.beta[(r, c)] = q.beta();
    }

    /// True when the `j` block vanishes to `tol`.
    pub fn is_complex(&self, tol: f64) -> bool {
        max_abs(&self.beta) <= tol
    }

    /// `(AB)_α = A_α B_α − conj(A_β) B_β`, `(AB)_β = conj(A_α) B_β + A_β B_α`.
    pub fn checked_mul(&self, rhs: &QMatrix) -> Result<QMatrix> {
        if self.ncols() != rhs.nrows() {
            return Err(Error::DimensionMismatch {
                op: "qm_mul",
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let alpha = &self.alpha * &rhs.alpha - self.beta.conjugate() * &rhs.beta;
        let beta = self.alpha.conjugate() * &rhs.beta + &self.beta * &rhs.alpha;
        Ok(QMatrix { alpha, beta })
    }

    pub fn checked_add(&self, rhs: &QMatrix) -> Result<QMatrix> {
        self.same_shape(rhs, "qm_add")?;
        Ok(QMatrix {
            alpha: &self.alpha + &rhs.alpha,
            beta: &self.beta + &rhs.beta,
        })
    }

    pub fn checked_sub(&self, rhs: &QMatrix) -> Result<QMatrix> {
        self.same_shape(rhs, "qm_sub")?;
        Ok(QMatrix {
            alpha: &self.alpha - &rhs.alpha,
            beta: &self.beta - &rhs.beta,
        })
    }

    fn same_shape(&self, rhs: &QMatrix, op: &'static str) -> Result<()> {
        if self.shape() != rhs.shape() {
            return Err(Error::DimensionMismatch {
                op,
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        Ok(())
    }

    pub fn scale(&self, s: f64) -> QMatrix {
        QMatrix {
            alpha: self.alpha.map(|z| z * s),
            beta: self.beta.map(|z| z * s),
        }
    }

    /// `z·M = z·M_α + j·conj(z)·M_β`.
    pub fn scale_left(&self, z: C64) -> QMatrix {
        QMatrix {
            alpha: self.alpha.map(|w| z * w),
            beta: self.beta.map(|w| z.conj() * w),
        }
    }

    /// `M·z = M_α·z + j·M_β·z`.
    pub fn scale_right(&self, z: C64) -> QMatrix {
        QMatrix {
            alpha: self.alpha.map(|w| w * z),
            beta: self.beta.map(|w| w * z),
        }
    }

    /// Quaternionic conjugate transpose: `(A†)_α = A_α†`, `(A†)_β = −A_βᵀ`.
    pub fn dagger(&self) -> QMatrix {
        QMatrix {
            alpha: self.alpha.adjoint(),
            beta: -self.beta.transpose(),
        }
    }

    /// Complex projection `P[M] = M_α`.
    pub fn complex_projection(&self) -> CMatrix {
        self.alpha.clone()
    }

    /// `Re Tr A = Re tr(A_α)`.
    pub fn re_trace(&self) -> Result<f64> {
        self.require_square("qm_re_trace")?;
        Ok(self.alpha.trace().re)
    }

    fn require_square(&self, op: &'static str) -> Result<()> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                op,
                rows: self.nrows(),
                cols: self.ncols(),
            });
        }
        Ok(())
    }

    /// Complex adjoint representation `[[A_α, −conj(A_β)], [A_β, conj(A_α)]]`.
    pub fn chi(&self) -> Result<CMatrix> {
        self.require_square("qm_chi")?;
        Ok(self.chi_unchecked())
    }

    pub(crate) fn chi_unchecked(&self) -> CMatrix {
        let (n, m) = self.shape();
        let mut out = CMatrix::zeros(2 * n, 2 * m);
        out.view_mut((0, 0), (n, m)).copy_from(&self.alpha);
        out.view_mut((0, m), (n, m)).copy_from(&(-self.beta.conjugate()));
        out.view_mut((n, 0), (n, m)).copy_from(&self.beta);
        out.view_mut((n, m), (n, m)).copy_from(&self.alpha.conjugate());
        out
    }

    /// Reads the `(α, β)` blocks out of a matrix in the image of `χ`.
    pub fn from_chi(x: &CMatrix) -> Result<QMatrix> {
        let (r, c) = x.shape();
        if r % 2 != 0 || c % 2 != 0 {
            return Err(Error::Invalid(format!(
                "adjoint representation must have even shape, got {r}x{c}"
            )));
        }
        let (n, m) = (r / 2, c / 2);
        Ok(QMatrix {
            alpha: x.view((0, 0), (n, m)).into_owned(),
            beta: x.view((n, 0), (n, m)).into_owned(),
        })
    }

    /// Inverse through `χ(A)⁻¹`; rejects matrices whose `χ` condition number
    /// exceeds [`tol::MAX_CONDITION`].
    pub fn inverse(&self) -> Result<QMatrix> {
        self.require_square("qm_inverse")?;
        let x = self.chi_unchecked();
        let condition = condition_number(&x);
        if !condition.is_finite() || condition > tol::MAX_CONDITION {
            return Err(Error::Singular { condition });
        }
        let inv = x.try_inverse().ok_or(Error::Singular { condition })?;
        QMatrix::from_chi(&inv)
    }

    pub fn hermitian_residual(&self) -> f64 {
        max_abs(&(&self.alpha - self.alpha.adjoint())).max(max_abs(&(&self.beta + self.beta.transpose())))
    }

    pub fn anti_hermitian_residual(&self) -> f64 {
        max_abs(&(&self.alpha + self.alpha.adjoint())).max(max_abs(&(&self.beta - self.beta.transpose())))
    }

    /// Positivity of a Hermitian matrix through the spectrum of `χ(A)`.
    ///
    /// `tol` is absolute: the matrix is positive iff every eigenvalue is
    /// `≥ −tol`. The Hermiticity precondition is checked relative to the
    /// largest entry.
    pub fn is_positive(&self, tol: f64) -> Result<Positivity> {
        self.require_square("qm_is_positive")?;
        let scale = self.max_abs().max(1.0);
        let residual = self.hermitian_residual();
        if residual > tol::PRECONDITION * scale {
            return Err(Error::NotHermitian {
                what: "qm_is_positive input",
                residual,
            });
        }
        let eig = hermitian_eigenvalues(&self.chi_unchecked());
        let min_eigenvalue = eig.first().copied().unwrap_or(0.0);
        let max_abs_eigenvalue = eig.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        Ok(Positivity {
            positive: min_eigenvalue >= -tol,
            min_eigenvalue,
            max_abs_eigenvalue,
        })
    }

    /// [`is_positive`](Self::is_positive) with the tolerance scaled by the
    /// spectral radius.
    pub fn is_positive_scaled(&self, rel_tol: f64) -> Result<Positivity> {
        let mut p = self.is_positive(0.0)?;
        p.positive = p.min_eigenvalue >= -rel_tol * p.max_abs_eigenvalue;
        Ok(p)
    }

    /// Applies a real function to the spectrum of a Hermitian matrix,
    /// `f(A) = Q f(Λ) Q†` with `χ(A) = Q Λ Q†`.
    ///
    /// The result lies in the image of `χ` because `f(χ(A))` agrees with a
    /// real polynomial in `χ(A)`.
    pub fn hermitian_map(&self, f: impl Fn(f64) -> f64) -> Result<QMatrix> {
        self.require_square("hermitian_map")?;
        let residual = self.hermitian_residual();
        if residual > tol::PRECONDITION * self.max_abs().max(1.0) {
            return Err(Error::NotHermitian {
                what: "hermitian_map input",
                residual,
            });
        }
        let x = self.chi_unchecked();
        let h = (&x + x.adjoint()).map(|z| z * 0.5);
        let eig = h.symmetric_eigen();
        let mapped = eig.eigenvalues.map(|v| C64::new(f(v), 0.0));
        let q = &eig.eigenvectors;
        let out = q * CMatrix::from_diagonal(&mapped) * q.adjoint();
        QMatrix::from_chi(&out)
    }

    pub fn commutator(&self, rhs: &QMatrix) -> Result<QMatrix> {
        self.checked_mul(rhs)?.checked_sub(&rhs.checked_mul(self)?)
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.alpha).max(max_abs(&self.beta))
    }

    /// Largest entrywise quaternion modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &QMatrix) -> f64 {
        assert_eq!(self.shape(), other.shape(), "max_abs_diff shape mismatch");
        let da = &self.alpha - &other.alpha;
        let db = &self.beta - &other.beta;
        da.iter()
            .zip(db.iter())
            .map(|(a, b)| (a.norm_sqr() + b.norm_sqr()).sqrt())
            .fold(0.0, f64::max)
    }
}

impl<'a> Mul<&'a QMatrix> for &'a QMatrix {
    type Output = QMatrix;

    /// Panics on a dimension mismatch; use [`QMatrix::checked_mul`] otherwise.
    fn mul(self, rhs: &'a QMatrix) -> QMatrix {
        self.checked_mul(rhs).expect("quaternionic matrix product")
    }
}

impl<'a> Add<&'a QMatrix> for &'a QMatrix {
    type Output = QMatrix;
    fn add(self, rhs: &'a QMatrix) -> QMatrix {
        self.checked_add(rhs).expect("quaternionic matrix sum")
    }
}

impl<'a> Sub<&'a QMatrix> for &'a QMatrix {
    type Output = QMatrix;
    fn sub(self, rhs: &'a QMatrix) -> QMatrix {
        self.checked_sub(rhs).expect("quaternionic matrix difference")
    }
}

impl Neg for &QMatrix {
    type Output = QMatrix;
    fn neg(self) -> QMatrix {
        QMatrix {
            alpha: -&self.alpha,
            beta: -&self.beta,
        }
    }
}

impl fmt::Display for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.nrows() {
            let row: Vec<String> = (0..self.ncols()).map(|c| format!("({})", self.entry(r, c))).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Ascending eigenvalues of the Hermitian part of `m`.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let h = (m + m.adjoint()).map(|z| z * 0.5);
    let mut eig: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// Ratio of extreme singular values; infinite for an exactly singular matrix.
pub fn condition_number(m: &CMatrix) -> f64 {
    let sv = m.singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}
