use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

use quasistat::dynamics::{linspace, simulate, IntegratorOptions};
use quasistat::quatmat::{max_abs, CMatrix};
use quasistat::scenarios::*;
use quasistat::{Error, QMatrix, C64};

/// `P[V₂V₁ρ̃V₁⁻¹V₂⁻¹]₂₁` computed on the complex images with nalgebra.
fn composed_entry(rho0: &QMatrix, v1: &QMatrix, v2: &QMatrix) -> C64 {
    let v = v2.chi().unwrap() * v1.chi().unwrap();
    let v_inv = v.clone().try_inverse().unwrap();
    let out: CMatrix = &v * rho0.chi().unwrap() * v_inv;
    out[(1, 0)]
}

#[test]
fn integrated_state_matches_closed_form_for_general_parameters() {
    for p in [
        Sec4Params::reference(),
        Sec4Params::new(1.3, 0.8, C64::new(0.2, -0.4), 0.9).unwrap(),
        Sec4Params::new(-1.0, 2.0, C64::new(0.0, 0.6), -2.0).unwrap(),
    ] {
        let rho0 = sec4_rho0(&p).unwrap();
        let grid = linspace(0.0, 1.4, 29);
        let traj = simulate(&hfrak_source(&p), &rho0, &grid, &IntegratorOptions::with_step(1e-3)).unwrap();
        let (err, at) = traj.worst(|s| s.rho_tilde.max_abs_diff(&sec4_rho_t(s.t, &p)));
        assert!(err <= 1e-9, "{p:?}: error {err:e} at t = {at}");
    }
}

#[test]
fn closed_form_initial_state_is_the_t_zero_limit() {
    let p = Sec4Params::new(1.3, 0.8, C64::new(0.2, -0.4), 0.9).unwrap();
    assert!(sec4_rho_t(0.0, &p).max_abs_diff(&sec4_rho0_matrix(&p)) <= 1e-15);
}

#[test]
fn projection_does_not_depend_on_theta() {
    let base = Sec4Params::reference();
    let grid = linspace(0.0, 1.0, 11);
    let reference = simulate(
        &hfrak_source(&base),
        &sec4_rho0(&base).unwrap(),
        &grid,
        &IntegratorOptions::with_step(1e-3),
    )
    .unwrap();
    for theta in [0.5, 2.0, -1.0] {
        let p = Sec4Params { theta, ..base };
        let traj = simulate(&hfrak_source(&p), &sec4_rho0(&p).unwrap(), &grid, &IntegratorOptions::with_step(1e-3))
            .unwrap();
        for (a, b) in reference.steps.iter().zip(&traj.steps) {
            assert!(max_abs(&(&a.rho_tilde_alpha - &b.rho_tilde_alpha)) <= 1e-10);
        }
        for t in grid.iter() {
            assert!(max_abs(&(sec4_rho_t(*t, &p).alpha() - sec4_rho_t(*t, &base).alpha())) <= 1e-15);
        }
    }
}

#[test]
fn semigroup_gap_at_reference_parameters() {
    let p = Sec4Params::reference();
    let (t, tp) = (FRAC_PI_4, FRAC_PI_8);
    let g = semigroup_gap(t, tp, &p).unwrap();
    let direct_oracle = sec4_rho_t(t, &p).alpha()[(1, 0)];
    let rho0 = sec4_rho0_matrix(&p);
    let composed_oracle = composed_entry(&rho0, &sec4_v(tp, &p), &sec4_v(t - tp, &p));
    assert!((g.direct - direct_oracle).norm() <= 1e-12);
    assert!((g.composed - composed_oracle).norm() <= 1e-12);
    assert!(g.gap >= 0.1, "gap {}", g.gap);
    assert!((g.quoted_direct - 1.0).abs() <= 1e-12);
    assert!((g.quoted_composed + 0.5).abs() <= 1e-12);
    assert!((g.quoted_gap - 1.5).abs() <= 1e-12);
}

#[test]
fn semigroup_gap_at_trivial_parameters() {
    let p = Sec4Params::new(1.0, 1.0, C64::new(0.0, 0.0), 0.0).unwrap();
    let g = semigroup_gap(FRAC_PI_4, FRAC_PI_8, &p).unwrap();
    assert!((g.direct - C64::new(0.5, 0.0)).norm() <= 1e-12);
    assert!((g.composed - C64::new(3f64.sqrt() / 4.0, 0.0)).norm() <= 1e-12);
    assert!(g.gap > 0.05);
}

#[test]
fn semigroup_gap_vanishes_when_one_leg_is_trivial() {
    let p = Sec4Params::reference();
    for t in [0.3, 0.7] {
        assert!(semigroup_gap(t, 0.0, &p).unwrap().gap <= 1e-12);
        assert!(semigroup_gap(t, t, &p).unwrap().gap <= 1e-12);
    }
    assert!(semigroup_gap(0.2, 0.3, &p).is_err());
}

#[test]
fn parameter_validation() {
    assert!(matches!(
        Sec4Params::new(1.0, 1.0, C64::new(1.0, 0.0), 0.0),
        Err(Error::DegenerateMetric { .. })
    ));
    assert!(Sec4Params::new(f64::NAN, 1.0, C64::new(0.0, 0.0), 0.0).is_err());
    let p = Sec4Params::reference();
    assert!(matches!(sec4_hfrak(FRAC_PI_4, &p), Err(Error::Breakpoint { .. })));
}
