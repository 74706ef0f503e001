//! Seeded random matrices for randomized checks and counterexample searches.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::quatmat::{CMatrix, QMatrix, Quaternion, C64};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn complex_gaussian<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| C64::new(normal(rng), normal(rng)))
}

/// Independent standard normal components in every quaternion slot.
pub fn quaternion_gaussian<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> QMatrix {
    QMatrix::from_fn(rows, cols, |_, _| {
        Quaternion::new(normal(rng), normal(rng), normal(rng), normal(rng))
    })
}

/// Entries drawn uniformly from the unit 3-sphere of quaternions.
pub fn unit_entries<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> QMatrix {
    QMatrix::from_fn(rows, cols, |_, _| loop {
        let q = Quaternion::new(normal(rng), normal(rng), normal(rng), normal(rng));
        let n = q.norm();
        if n > 1e-12 {
            break q.scale(1.0 / n);
        }
    })
}

pub fn hermitian<R: Rng>(rng: &mut R, n: usize) -> QMatrix {
    let g = quaternion_gaussian(rng, n, n);
    (&g + &g.dagger()).scale(0.5)
}

pub fn anti_hermitian<R: Rng>(rng: &mut R, n: usize) -> QMatrix {
    let g = quaternion_gaussian(rng, n, n);
    (&g - &g.dagger()).scale(0.5)
}

/// Quaternionic density matrix `GG† / Re Tr(GG†)`.
pub fn density<R: Rng>(rng: &mut R, n: usize) -> QMatrix {
    let g = quaternion_gaussian(rng, n, n);
    let rho = &g * &g.dagger();
    let tr = rho.re_trace().expect("square");
    rho.scale(1.0 / tr)
}

/// Rank-one quaternionic density `ψψ†` with `‖ψ‖ = 1`.
pub fn pure_density<R: Rng>(rng: &mut R, n: usize) -> QMatrix {
    let psi = quaternion_gaussian(rng, n, 1);
    let rho = &psi * &psi.dagger();
    let tr = rho.re_trace().expect("square");
    rho.scale(1.0 / tr)
}

/// Well-conditioned complex Hermitian positive metric `GG†/n + ½·1`.
pub fn complex_positive_metric<R: Rng>(rng: &mut R, n: usize) -> QMatrix {
    let g = complex_gaussian(rng, n, n);
    let eta = &g * g.adjoint() / C64::new(n as f64, 0.0) + CMatrix::identity(n, n) * C64::new(0.5, 0.0);
    QMatrix::from_complex(eta)
}

/// Quaternionic Hermitian positive metric whose `j` block is nonzero.
pub fn quaternionic_positive_metric<R: Rng>(rng: &mut R, n: usize) -> QMatrix {
    let g = quaternion_gaussian(rng, n, n);
    let gg = &g * &g.dagger();
    (&gg.scale(1.0 / n as f64) + &QMatrix::identity(n).scale(0.5)).clone()
}

/// Quaternionic unitary obtained as the polar factor of a Gaussian matrix.
pub fn unitary<R: Rng>(rng: &mut R, n: usize) -> QMatrix {
    let g = quaternion_gaussian(rng, n, n);
    let gram = &g.dagger() * &g;
    let inv_sqrt = gram.hermitian_map(|v| 1.0 / v.sqrt()).expect("Hermitian Gram matrix");
    &g * &inv_sqrt
}
