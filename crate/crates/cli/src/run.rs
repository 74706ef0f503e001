use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use quasistat::dynamics::{
    dress, linspace, propagate_unitary, simulate, Breakpoints, GeneratorSource, IntegratorOptions, OperatorRole,
    Trajectory,
};
use quasistat::projection::{projected_min_eigenvalue, quasi_hermiticity_residual};
use quasistat::scenarios::{hfrak_source, sec4_metric, sec4_rho0, sec4_rho0_matrix, Sec4Params, SemigroupGap};
use quasistat::{GeneralizedDensity, Metric, QMatrix};

use crate::config::{
    matrix_from_spec, output_path, CheckKind, GeneratorRole, InlineConfig, RunConfig, ScenarioConfig, SemigroupConfig,
};
use crate::error::{CliError, Result};
use crate::report::{create_parent, CheckRecord, Report};

/// A scenario resolved into core objects.
pub struct Prepared {
    pub metric: Arc<Metric>,
    pub density: GeneralizedDensity,
    pub generator: GeneratorSource,
    pub sec4: Option<Sec4Params>,
}

pub fn prepare(scenario: &ScenarioConfig) -> Result<Prepared> {
    match scenario {
        ScenarioConfig::Sec4(s) => {
            let p = s.params().map_err(|e| CliError::config(format!("scenario: {e}")))?;
            let density = sec4_rho0(&p)?;
            Ok(Prepared {
                metric: Arc::clone(density.metric()),
                density,
                generator: hfrak_source(&p),
                sec4: Some(p),
            })
        }
        ScenarioConfig::Inline(inline) => prepare_inline(inline),
    }
}

fn prepare_inline(inline: &InlineConfig) -> Result<Prepared> {
    let eta = matrix_from_spec(&inline.eta, "scenario.eta").map_err(CliError::config)?;
    let metric = match &inline.root {
        Some(r) => Metric::with_root(eta, matrix_from_spec(r, "scenario.root").map_err(CliError::config)?)?,
        None => Metric::new(eta)?,
    };
    let metric = Arc::new(metric);
    let rho0 = matrix_from_spec(&inline.rho0, "scenario.rho0").map_err(CliError::config)?;
    let density = GeneralizedDensity::from_rho(&rho0, Arc::clone(&metric))?;
    let g = &inline.generator;
    let values = g
        .values
        .iter()
        .enumerate()
        .map(|(k, v)| matrix_from_spec(v, &format!("scenario.generator.values[{k}]")))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(CliError::config)?;
    let role = match g.role {
        GeneratorRole::Hfrak => OperatorRole::AntiHermitian,
        GeneratorRole::Factor => OperatorRole::Factor,
        GeneratorRole::Hamiltonian => OperatorRole::Hamiltonian,
    };
    let mut generator = GeneratorSource::sampled(role, g.times.clone(), values)?;
    if !g.breakpoints.is_empty() {
        generator = generator.with_breakpoints(Breakpoints::List(g.breakpoints.clone()));
    }
    Ok(Prepared {
        metric,
        density,
        generator,
        sec4: None,
    })
}

pub struct RunOutcome {
    pub report: Report,
    pub trajectory_path: PathBuf,
    pub report_path: PathBuf,
}

/// Integrates the configured scenario, writes the trajectory and the report,
/// and returns the report.
pub fn run(cfg: &RunConfig, out: Option<&Path>) -> Result<RunOutcome> {
    cfg.validate_run()?;
    let start = Instant::now();
    let scenario = cfg.scenario.as_ref().expect("validated");
    let time = cfg.time.expect("validated");
    let prepared = prepare(scenario)?;
    let grid = linspace(time.t_start, time.t_end, time.n_samples);
    let opts = IntegratorOptions {
        step: time.integrator_step,
        split_at_breakpoints: time.split_at_breakpoints,
        renormalize: false,
    };
    let traj = simulate(&prepared.generator, &prepared.density, &grid, &opts)?;

    let trajectory_path = output_path(out, &cfg.outputs.trajectory_path);
    write_trajectory(&trajectory_path, &traj, &prepared.metric)?;

    let checks = cfg
        .checks
        .iter()
        .map(|c| evaluate(*c, &traj, &prepared, cfg.tolerance, &cfg.semigroup, &opts))
        .collect();
    let report = Report::new(
        "run",
        cfg.seed,
        serde_json::to_value(cfg)?,
        checks,
        start.elapsed().as_secs_f64(),
    );
    let report_path = output_path(out, &cfg.outputs.report_path);
    report.write(&report_path)?;
    Ok(RunOutcome {
        report,
        trajectory_path,
        report_path,
    })
}

fn projected_min_eig(step_alpha: &quasistat::CMatrix, m: &Metric) -> f64 {
    projected_min_eigenvalue(step_alpha, m).unwrap_or(f64::NAN)
}

/// Column names of the trajectory file for an `n`-level system.
pub fn trajectory_columns(n: usize) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    for r in 0..n {
        for c in 0..n {
            for part in ["alpha_re", "alpha_im", "beta_re", "beta_im"] {
                cols.push(format!("rho_tilde_{r}{c}_{part}"));
            }
        }
    }
    for r in 0..n {
        for c in 0..n {
            cols.push(format!("proj_{r}{c}_re"));
            cols.push(format!("proj_{r}{c}_im"));
        }
    }
    cols.extend(["re_trace", "min_eig_projection", "eta_unitarity_residual"].map(String::from));
    cols
}

pub fn write_trajectory(path: &Path, traj: &Trajectory, m: &Metric) -> Result<()> {
    create_parent(path)?;
    let n = m.dim();
    let mut text = format!("# {}\n", trajectory_columns(n).join(","));
    for s in &traj.steps {
        let mut row = vec![s.t];
        for r in 0..n {
            for c in 0..n {
                let (a, b) = (s.rho_tilde.alpha()[(r, c)], s.rho_tilde.beta()[(r, c)]);
                row.extend([a.re, a.im, b.re, b.im]);
            }
        }
        for r in 0..n {
            for c in 0..n {
                let z = s.rho_tilde_alpha[(r, c)];
                row.extend([z.re, z.im]);
            }
        }
        row.push(s.diagnostics.re_trace);
        row.push(projected_min_eig(&s.rho_tilde_alpha, m));
        row.push(s.diagnostics.eta_unitarity_residual);
        for (k, v) in row.iter().enumerate() {
            if k > 0 {
                text.push(',');
            }
            write!(text, "{v:.16e}").expect("writing to a String");
        }
        text.push('\n');
    }
    let mut file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    file.write_all(text.as_bytes()).map_err(|e| CliError::io(path, e))
}

/// Worst value of `f` with its time; NaN propagates as the worst value.
fn worst(traj: &Trajectory, f: impl Fn(&quasistat::dynamics::TrajectoryStep) -> f64) -> (f64, Option<f64>) {
    let (v, t) = traj.worst(f);
    (v, Some(t))
}

fn evaluate(
    check: CheckKind,
    traj: &Trajectory,
    prepared: &Prepared,
    tol: f64,
    semigroup: &SemigroupConfig,
    opts: &IntegratorOptions,
) -> CheckRecord {
    let name = check.name();
    let m = &prepared.metric;
    match check {
        CheckKind::Trace => {
            let (v, t) = worst(traj, |s| (s.diagnostics.re_trace - 1.0).abs());
            CheckRecord::at_most(name, v, tol, t)
        }
        CheckKind::Unitarity => {
            let (v, t) = worst(traj, |s| s.diagnostics.eta_unitarity_residual);
            CheckRecord::at_most(name, v, tol, t)
        }
        CheckKind::PseudoHermiticity => {
            let (v, t) = worst(traj, |s| s.diagnostics.pseudo_hermiticity_residual);
            CheckRecord::at_most(name, v, tol, t)
        }
        CheckKind::Positivity => {
            let Ok((root, root_inv)) = m.root() else {
                return CheckRecord::failed(name, "metric has no Hermitian square root");
            };
            let (v, t) = worst(traj, |s| {
                let h = &(root * &s.rho_tilde) * root_inv;
                let h = (&h + &h.dagger()).scale(0.5);
                h.is_positive(0.0).map(|p| (-p.min_eigenvalue).max(0.0)).unwrap_or(f64::NAN)
            });
            CheckRecord::at_most(name, v, tol, t)
        }
        CheckKind::PropertyI => {
            let (v, t) = worst(traj, |s| quasi_hermiticity_residual(&s.rho_tilde_alpha, m).unwrap_or(f64::NAN));
            let rec = CheckRecord::at_most(name, v, tol, t);
            if m.is_complex() {
                rec
            } else {
                rec.with_note("metric has a nonzero j-part; the projection need not be quasi-Hermitian")
            }
        }
        CheckKind::PropertyIi => {
            let (v, t) = worst(traj, |s| {
                let neg = (-projected_min_eig(&s.rho_tilde_alpha, m)).max(0.0);
                neg.max((s.diagnostics.projected_re_trace - 1.0).abs())
            });
            CheckRecord::at_most(name, v, tol, t)
        }
        CheckKind::Semigroup => match prepared.sec4 {
            Some(p) => semigroup_check(&p, semigroup, opts),
            None => CheckRecord::failed(name, "needs the sec4 scenario"),
        },
    }
}

/// Integrated `V(t)`, `V(t′)` and `V(t − t′)` for the closed-form family.
pub fn integrated_semigroup_gap(p: &Sec4Params, t: f64, t_prime: f64, opts: &IntegratorOptions) -> Result<SemigroupGap> {
    let m = sec4_metric(p)?;
    let mut grid = vec![0.0, t_prime, t - t_prime, t];
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let prop = propagate_unitary(&hfrak_source(p), &grid, opts)?;
    let v_at = |s: f64| -> Result<QMatrix> {
        let k = grid.iter().position(|g| *g == s).expect("time is on the grid");
        Ok(dress(&prop.operators[k], &m)?)
    };
    Ok(SemigroupGap::from_operators(
        t,
        t_prime,
        &sec4_rho0_matrix(p),
        &v_at(t)?,
        &v_at(t_prime)?,
        &v_at(t - t_prime)?,
    )?)
}

pub fn semigroup_check(p: &Sec4Params, sg: &SemigroupConfig, opts: &IntegratorOptions) -> CheckRecord {
    match integrated_semigroup_gap(p, sg.t, sg.t_prime, opts) {
        Ok(g) => CheckRecord::at_least("semigroup", g.gap, sg.min_gap, Some(sg.t)).with_note(format!(
            "direct {:.12}{:+.12}i, composed {:.12}{:+.12}i; quoted closed forms: direct {:.12}, composed {:.12}, gap {:.12}",
            g.direct.re, g.direct.im, g.composed.re, g.composed.im, g.quoted_direct, g.quoted_composed, g.quoted_gap
        )),
        Err(e) => CheckRecord::failed("semigroup", e.to_string()),
    }
}
