//! Verification bundles. Each bundle returns one record per check; a bundle
//! passes when every record does.

use std::f64::consts::FRAC_PI_8;
use std::sync::Arc;

use quasistat::dynamics::{factorize, linspace, quasistationarity_residual, simulate, IntegratorOptions};
use quasistat::projection::{check_property_i, check_property_ii, search_property_i_counterexample};
use quasistat::quatmat::max_abs;
use quasistat::scenarios::{
    eta_source, hamiltonian_source, hfrak_source, sec4_metric, sec4_rho0, sec4_rho_t, sec4_v, Sec4Params,
};
use quasistat::{sampling, GeneralizedDensity, Metric, QMatrix, Quaternion};

use crate::config::SemigroupConfig;
use crate::error::{CliError, Result};
use crate::report::CheckRecord;
use crate::run::semigroup_check;

pub const BUNDLES: [&str; 5] = ["algebra", "sec4", "properties", "semigroup", "factorization"];

#[derive(Clone, Copy, Debug)]
pub struct VerifyContext {
    pub seed: u64,
    pub step: f64,
    pub params: Sec4Params,
    pub tolerance: f64,
    pub semigroup: SemigroupConfig,
}

pub fn run_bundle(name: &str, ctx: &VerifyContext) -> Result<Vec<CheckRecord>> {
    match name {
        "algebra" => Ok(algebra(ctx)),
        "sec4" => Ok(sec4(ctx)),
        "properties" => Ok(properties(ctx)),
        "semigroup" => Ok(vec![semigroup_check(
            &ctx.params,
            &ctx.semigroup,
            &IntegratorOptions::with_step(ctx.step),
        )]),
        "factorization" => Ok(factorization(ctx)),
        other => Err(CliError::UnknownBundle(other.to_string())),
    }
}

fn or_failed(name: &str, r: quasistat::Result<CheckRecord>) -> CheckRecord {
    r.unwrap_or_else(|e| CheckRecord::failed(name, e.to_string()))
}

const ALGEBRA_TOL: f64 = 1e-10;

fn algebra(ctx: &VerifyContext) -> Vec<CheckRecord> {
    let mut rng = sampling::rng(ctx.seed);
    let mut worst = [0.0_f64; 5];
    let mut error = None;
    for k in 0..200 {
        let n = 1 + k % 4;
        let a = sampling::unit_entries(&mut rng, n, n);
        let b = sampling::unit_entries(&mut rng, n, n);
        let step = || -> quasistat::Result<[f64; 5]> {
            let ab = a.checked_mul(&b)?;
            let hamilton = QMatrix::from_fn(n, n, |r, c| {
                (0..n).fold(Quaternion::ZERO, |acc, i| acc + a.entry(r, i) * b.entry(i, c))
            });
            let chi = max_abs(&(ab.chi()? - a.chi()? * b.chi()?)).max(ab.max_abs_diff(&hamilton));
            let dagger = ab
                .dagger()
                .max_abs_diff(&b.dagger().checked_mul(&a.dagger())?)
                .max(a.dagger().dagger().max_abs_diff(&a));
            let trace = (ab.re_trace()? - b.checked_mul(&a)?.re_trace()?).abs();
            let scalar_projection = QMatrix::from_fn(n, n, |r, c| {
                let q = a.entry(r, c);
                (q - Quaternion::I * q * Quaternion::I).scale(0.5)
            });
            let projection = scalar_projection.max_abs_diff(&QMatrix::from_complex(a.complex_projection()));
            let shifted = &a + &QMatrix::identity(n).scale(2.0 * n as f64);
            let inverse = shifted.checked_mul(&shifted.inverse()?)?.max_abs_diff(&QMatrix::identity(n));
            Ok([chi, dagger, trace, projection, inverse])
        };
        match step() {
            Ok(r) => {
                for (w, v) in worst.iter_mut().zip(r) {
                    *w = w.max(v);
                }
            }
            Err(e) => {
                error = Some(e.to_string());
                break;
            }
        }
    }
    let names = [
        "chi_homomorphism",
        "dagger_anti_automorphism",
        "re_trace_cyclicity",
        "projection_identity",
        "inverse",
    ];
    names
        .iter()
        .zip(worst)
        .map(|(name, w)| match &error {
            Some(e) => CheckRecord::failed(*name, e.clone()),
            None => CheckRecord::at_most(*name, w, ALGEBRA_TOL, None),
        })
        .collect()
}

/// Grid used for closed-form comparisons: 100 samples on `[0, 3π/8]`.
fn sec4_grid() -> Vec<f64> {
    linspace(0.0, 3.0 * FRAC_PI_8, 100)
}

fn sec4(ctx: &VerifyContext) -> Vec<CheckRecord> {
    let p = ctx.params;
    let traj = sec4_rho0(&p).and_then(|rho0| {
        simulate(
            &hfrak_source(&p),
            &rho0,
            &sec4_grid(),
            &IntegratorOptions::with_step(ctx.step),
        )
    });
    let traj = match traj {
        Ok(t) => t,
        Err(e) => return vec![CheckRecord::failed("closed_form", e.to_string())],
    };
    let tol = ctx.tolerance;
    let (err, t_err) = traj.worst(|s| s.rho_tilde.max_abs_diff(&sec4_rho_t(s.t, &p)));
    let (trace, t_trace) = traj.worst(|s| (s.diagnostics.re_trace - 1.0).abs());
    let (unit, t_unit) = traj.worst(|s| s.diagnostics.eta_unitarity_residual);
    let (pseudo, t_pseudo) = traj.worst(|s| s.diagnostics.pseudo_hermiticity_residual);
    let mut out = vec![
        CheckRecord::at_most("closed_form", err, 1e-8, Some(t_err)),
        CheckRecord::at_most("trace", trace, tol, Some(t_trace)),
        CheckRecord::at_most("unitarity", unit, tol, Some(t_unit)),
        CheckRecord::at_most("pseudo_hermiticity", pseudo, tol, Some(t_pseudo)),
    ];
    out.push(or_failed("closed_form_v_eta_unitary", (|| {
        let m = sec4_metric(&p)?;
        let mut worst = (0.0_f64, 0.0);
        for t in sec4_grid() {
            let r = m.is_eta_unitary(&sec4_v(t, &p), 0.0)?.residual;
            if r > worst.0 {
                worst = (r, t);
            }
        }
        Ok(CheckRecord::at_most("closed_form_v_eta_unitary", worst.0, tol, Some(worst.1)))
    })()));
    out.push(or_failed("quasistationarity_residual", (|| {
        let (eta, ham) = (eta_source(&p), hamiltonian_source(&p));
        let mut worst = (0.0_f64, 0.0);
        for t in [0.05, 0.3, FRAC_PI_8, 0.6, 1.0] {
            let r = quasistationarity_residual(&eta, &ham, t, quasistat::tol::DERIVATIVE_STEP)?.max_abs();
            if r > worst.0 {
                worst = (r, t);
            }
        }
        Ok(CheckRecord::at_most("quasistationarity_residual", worst.0, tol, Some(worst.1)))
    })()));
    out
}

/// Draws for the counterexample search.
const COUNTEREXAMPLE_DRAWS: usize = 10_000;
const COUNTEREXAMPLE_THRESHOLD: f64 = 1e-3;

fn properties(ctx: &VerifyContext) -> Vec<CheckRecord> {
    let tol = ctx.tolerance;
    let mut out = Vec::new();
    let mut rng = sampling::rng(ctx.seed);
    let random = (|| -> quasistat::Result<(f64, f64)> {
        let (mut i_worst, mut ii_worst) = (0.0_f64, 0.0_f64);
        for k in 0..100 {
            let n = 1 + k % 4;
            let m = Arc::new(Metric::new(sampling::complex_positive_metric(&mut rng, n))?);
            let gd = GeneralizedDensity::from_rho(&sampling::density(&mut rng, n), Arc::clone(&m))?;
            let v = quasistat::dynamics::dress(&sampling::unitary(&mut rng, n), &m)?;
            let rt = quasistat::dynamics::evolve_generalized(gd.rho_tilde(), &v)?;
            i_worst = i_worst.max(check_property_i(&rt, &m, tol)?.residual);
            let ii = check_property_ii(&rt, &m, tol)?;
            ii_worst = ii_worst.max((-ii.min_eigenvalue).max(0.0)).max((ii.re_trace - 1.0).abs());
        }
        Ok((i_worst, ii_worst))
    })();
    match random {
        Ok((i, ii)) => {
            out.push(CheckRecord::at_most("property_i_random", i, tol, None));
            out.push(CheckRecord::at_most("property_ii_random", ii, tol, None));
        }
        Err(e) => {
            out.push(CheckRecord::failed("property_i_random", e.to_string()));
            out.push(CheckRecord::failed("property_ii_random", e.to_string()));
        }
    }

    let p = ctx.params;
    let traj = sec4_rho0(&p).and_then(|rho0| {
        simulate(
            &hfrak_source(&p),
            &rho0,
            &sec4_grid(),
            &IntegratorOptions::with_step(ctx.step),
        )
    });
    match traj {
        Ok(traj) => {
            let (i, ti) = traj.worst(|s| s.diagnostics.projected_quasi_hermiticity_residual.unwrap_or(f64::NAN));
            let (ii, tii) = traj.worst(|s| {
                let neg = (-s.diagnostics.min_eig_projection.unwrap_or(f64::NAN)).max(0.0);
                neg.max((s.diagnostics.projected_re_trace - 1.0).abs())
            });
            out.push(CheckRecord::at_most("property_i_sec4", i, tol, Some(ti)));
            out.push(CheckRecord::at_most("property_ii_sec4", ii, tol, Some(tii)));
        }
        Err(e) => out.push(CheckRecord::failed("property_sec4", e.to_string())),
    }

    let half_j = Quaternion::J.scale(0.5);
    let eta = QMatrix::from_fn(2, 2, |r, c| match (r, c) {
        (0, 1) => half_j,
        (1, 0) => -half_j,
        _ => Quaternion::ONE,
    });
    let search = Metric::new(eta).and_then(|m| {
        search_property_i_counterexample(&Arc::new(m), COUNTEREXAMPLE_DRAWS, ctx.seed, COUNTEREXAMPLE_THRESHOLD)
    });
    out.push(match search {
        Ok(s) => CheckRecord::at_least("counterexample_quaternionic_metric", s.max_residual, COUNTEREXAMPLE_THRESHOLD, None)
            .with_note(format!(
                "seed {}, {} draws, first hit at draw {:?}",
                s.seed, s.draws, s.first_hit
            )),
        Err(e) => CheckRecord::failed("counterexample_quaternionic_metric", e.to_string()),
    });
    out
}

const FACTORIZATION_TOL: f64 = 1e-10;

fn factorization(ctx: &VerifyContext) -> Vec<CheckRecord> {
    let mut rng = sampling::rng(ctx.seed);
    let mut out = Vec::new();
    for n in [2, 3] {
        let result = (|| -> quasistat::Result<(f64, f64)> {
            let (mut path, mut anti) = (0.0_f64, 0.0_f64);
            for _ in 0..50 {
                let m = Metric::new(sampling::complex_positive_metric(&mut rng, n))?;
                let fz = factorize(&sampling::anti_hermitian(&mut rng, n), &m)?;
                path = path.max(fz.path_residual);
                anti = anti.max(fz.pseudo_anti_hermitian_residual);
            }
            Ok((path, anti))
        })();
        match result {
            Ok((path, anti)) => {
                out.push(CheckRecord::at_most(format!("factorization_paths_n{n}"), path, FACTORIZATION_TOL, None));
                out.push(CheckRecord::at_most(
                    format!("pseudo_anti_hermitian_n{n}"),
                    anti,
                    FACTORIZATION_TOL,
                    None,
                ));
            }
            Err(e) => out.push(CheckRecord::failed(format!("factorization_n{n}"), e.to_string())),
        }
    }
    out
}
