use std::sync::Arc;

use proptest::prelude::*;
use quasistat::metric::{GeneralizedDensity, Metric, RootSource};
use quasistat::quatmat::{hermitian_eigenvalues, CMatrix};
use quasistat::sampling;
use quasistat::scenarios::{sec4_rho0, Sec4Params};
use quasistat::{Error, QMatrix, Quaternion, C64};

fn random_metric(seed: u64, n: usize, quaternionic: bool) -> Metric {
    let mut rng = sampling::rng(seed);
    let eta = if quaternionic {
        sampling::quaternionic_positive_metric(&mut rng, n)
    } else {
        sampling::complex_positive_metric(&mut rng, n)
    };
    Metric::new(eta).unwrap()
}

/// `η⁻¹ K` with Hermitian `K` is pseudo-Hermitian.
fn pseudo_hermitian(m: &Metric, seed: u64) -> QMatrix {
    let mut rng = sampling::rng(seed ^ 0xa5a5);
    m.eta_inv() * &sampling::hermitian(&mut rng, m.dim())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn pseudo_adjoint_is_an_involutive_anti_automorphism(seed in any::<u64>(), n in 1usize..=4, quat in any::<bool>()) {
        let m = random_metric(seed, n, quat);
        let mut rng = sampling::rng(seed.wrapping_add(1));
        let a = sampling::unit_entries(&mut rng, n, n);
        let b = sampling::unit_entries(&mut rng, n, n);
        let aa = m.pseudo_adjoint(&m.pseudo_adjoint(&a).unwrap()).unwrap();
        prop_assert!(aa.max_abs_diff(&a) <= 1e-10);
        let lhs = m.pseudo_adjoint(&(&a * &b)).unwrap();
        let rhs = &m.pseudo_adjoint(&b).unwrap() * &m.pseudo_adjoint(&a).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-10);
    }

    #[test]
    fn pseudo_hermitian_means_eta_o_is_hermitian(seed in any::<u64>(), n in 1usize..=4, quat in any::<bool>()) {
        let m = random_metric(seed, n, quat);
        let o = pseudo_hermitian(&m, seed);
        prop_assert!(m.is_pseudo_hermitian(&o, 1e-10).unwrap().passed);
        prop_assert!((m.eta() * &o).hermitian_residual() <= 1e-10);
    }

    #[test]
    fn principal_root_squares_to_eta(seed in any::<u64>(), n in 1usize..=4, quat in any::<bool>()) {
        let m = random_metric(seed, n, quat);
        let r = m.principal_root().unwrap();
        prop_assert!((r * r).max_abs_diff(m.eta()) <= 1e-10);
        prop_assert!((r * m.principal_root_inv().unwrap()).max_abs_diff(&QMatrix::identity(n)) <= 1e-10);
        prop_assert!(r.is_positive(0.0).unwrap().positive);
    }

    #[test]
    fn dressed_densities_are_positive(seed in any::<u64>(), n in 1usize..=4, quat in any::<bool>()) {
        let m = Arc::new(random_metric(seed, n, quat));
        let mut rng = sampling::rng(seed.wrapping_mul(3));
        let gd = GeneralizedDensity::from_rho(&sampling::density(&mut rng, n), Arc::clone(&m)).unwrap();
        let (t, t_inv) = m.root().unwrap();
        let s = &(t * gd.rho_tilde()) * t_inv;
        prop_assert!(s.hermitian_residual() <= 1e-10);
        prop_assert!(s.is_positive(1e-12).unwrap().positive);
        prop_assert!((gd.rho_tilde().re_trace().unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn expectation_matches_the_complex_image(seed in any::<u64>(), n in 1usize..=4, quat in any::<bool>()) {
        let m = Arc::new(random_metric(seed, n, quat));
        let mut rng = sampling::rng(seed.wrapping_add(17));
        let gd = GeneralizedDensity::from_rho(&sampling::density(&mut rng, n), Arc::clone(&m)).unwrap();
        let o = pseudo_hermitian(&m, seed);
        let oracle = (gd.rho_tilde().chi().unwrap() * o.chi().unwrap()).trace().re / 2.0;
        prop_assert!((gd.expectation(&o).unwrap() - oracle).abs() <= 1e-10);
    }
}

#[test]
fn sec4_initial_state_at_trivial_parameters() {
    let p = Sec4Params::new(1.0, 1.0, C64::new(0.0, 0.0), 0.0).unwrap();
    let gd = sec4_rho0(&p).unwrap();
    let half = Quaternion::new(0.5, 0.0, 0.0, 0.0);
    let half_j = Quaternion::new(0.0, 0.0, 0.5, 0.0);
    let expected = QMatrix::from_fn(2, 2, |r, c| match (r, c) {
        (0, 0) | (1, 1) => half,
        (0, 1) => -half_j,
        _ => half_j,
    });
    assert!(gd.rho_tilde().max_abs_diff(&expected) <= 1e-15);
    // η = 1, so ρ = ρ̃ is a rank-one projector
    let eig = hermitian_eigenvalues(&gd.rho().chi().unwrap());
    assert!(eig[0].abs() <= 1e-14 && eig[1].abs() <= 1e-14);
    assert!((eig[2] - 1.0).abs() <= 1e-14 && (eig[3] - 1.0).abs() <= 1e-14);
}

#[test]
fn metric_validation() {
    let not_hermitian = QMatrix::from_complex(CMatrix::from_row_slice(
        2,
        2,
        &[C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
    ));
    assert!(matches!(Metric::new(not_hermitian), Err(Error::NotHermitian { .. })));
    let singular = QMatrix::from_diagonal(&[Quaternion::ONE, Quaternion::ZERO]);
    assert!(matches!(Metric::new(singular), Err(Error::Singular { .. })));

    let indefinite = Metric::new(QMatrix::from_diagonal(&[Quaternion::ONE, -Quaternion::ONE])).unwrap();
    assert!(!indefinite.is_positive());
    assert!(matches!(indefinite.root(), Err(Error::RootUnavailable) | Err(Error::NotPositive { .. })));
}

#[test]
fn user_root_is_used_for_dressing() {
    let t = QMatrix::from_complex(CMatrix::from_row_slice(
        2,
        2,
        &[C64::new(2.0, 0.0), C64::new(0.5, 0.0), C64::new(0.5, 0.0), C64::new(-1.0, 0.0)],
    ));
    let eta = &t * &t;
    let m = Metric::with_root(eta.clone(), t.clone()).unwrap();
    assert_eq!(m.root_source(), Some(RootSource::UserSupplied));
    assert!(m.root().unwrap().0.max_abs_diff(&t) == 0.0);
    let wrong = QMatrix::identity(2);
    assert!(Metric::with_root(eta, wrong).is_err());
}

#[test]
fn density_validation() {
    let m = Arc::new(Metric::new(QMatrix::identity(2)).unwrap());
    let negative = QMatrix::from_diagonal(&[Quaternion::ONE, -Quaternion::ONE]);
    assert!(matches!(
        GeneralizedDensity::from_rho(&negative, Arc::clone(&m)),
        Err(Error::NotPositive { .. })
    ));
    let rho = QMatrix::from_diagonal(&[Quaternion::ONE.scale(3.0), Quaternion::ONE]);
    let gd = GeneralizedDensity::from_rho(&rho, m).unwrap();
    assert_eq!(gd.raw_re_trace(), 4.0);
    assert!((gd.rho_tilde().re_trace().unwrap() - 1.0).abs() <= 1e-15);
}
