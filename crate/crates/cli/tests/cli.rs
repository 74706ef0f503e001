use std::path::Path;
use std::process::{Command, Output};

use quasistat_cli::config::RunConfig;
use quasistat_cli::CliError;

fn quasistat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quasistat"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn rows(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("# "));
    let cols = header[2..].split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect())
        .collect();
    (cols, rows)
}

fn column(cols: &[String], name: &str) -> usize {
    cols.iter().position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"))
}

fn report(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const TRIVIAL_SEC4: &str = r#"
seed = 42

[scenario]
name = "sec4"
x = 1.0
y = 1.0
z_re = 0.0
z_im = 0.0
theta = 0.0

[time]
t_start = 0.0
t_end = 0.7853981633974483
n_samples = 50
integrator_step = 1e-4
"#;

#[test]
fn trivial_parameters_end_on_the_uniform_projection() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", TRIVIAL_SEC4);
    let out = dir.path().join("out");
    let o = quasistat(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let (cols, data) = rows(&out.join("trajectory.csv"));
    assert_eq!(data.len(), 50);
    assert!(data.iter().all(|r| r.len() == cols.len()));
    let last = data.last().unwrap();
    for name in ["proj_00", "proj_01", "proj_10", "proj_11"] {
        assert!((last[column(&cols, &format!("{name}_re"))] - 0.5).abs() <= 1e-8);
        assert!(last[column(&cols, &format!("{name}_im"))].abs() <= 1e-8);
    }

    let rep = report(&out.join("report.json"));
    assert_eq!(rep["failures"], 0);
    assert_eq!(rep["seed"], 42);
    let names: Vec<&str> = rep["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(
        names,
        ["trace", "unitarity", "positivity", "pseudo_hermiticity", "property_i", "property_ii"]
    );
    assert_eq!(rep["config"]["scenario"]["name"], "sec4");
}

#[test]
fn zero_generator_leaves_the_state_constant() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "zero.toml",
        r#"
[scenario]
name = "inline"
eta = [[2.0, [0.5, 0.5]], [[0.5, -0.5], 1.0]]
rho0 = [[0.6, [0.1, 0.0, 0.1, 0.0]], [[0.1, 0.0, -0.1, 0.0], 0.4]]

[scenario.generator]
role = "hfrak"
times = [0.0]
values = [[[0.0, 0.0], [0.0, 0.0]]]

[time]
t_start = 0.0
t_end = 3.0
n_samples = 7
integrator_step = 0.1
"#,
    );
    let o = quasistat(&["run", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (cols, data) = rows(&dir.path().join("trajectory.csv"));
    let t = column(&cols, "t");
    let resid = column(&cols, "eta_unitarity_residual");
    for r in &data {
        for (k, v) in r.iter().enumerate() {
            if k != t && k != resid {
                assert_eq!(*v, data[0][k], "column {}", cols[k]);
            }
        }
        // V = T⁻¹·1·T is formed in floating point
        assert!(r[resid] <= 1e-14);
    }
    let rep = report(&dir.path().join("report.json"));
    for c in rep["checks"].as_array().unwrap() {
        assert_eq!(c["status"], "pass", "{c}");
    }
}

#[test]
fn identical_configs_give_identical_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", TRIVIAL_SEC4);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = quasistat(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--step", "1e-3"]);
        assert!(o.status.success());
    }
    let ta = std::fs::read(a.join("trajectory.csv")).unwrap();
    let tb = std::fs::read(b.join("trajectory.csv")).unwrap();
    assert_eq!(ta, tb);
    let step = report(&a.join("report.json"))["config"]["time"]["integrator_step"].as_f64();
    assert_eq!(step, Some(1e-3));
}

#[test]
fn degenerate_metric_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", &TRIVIAL_SEC4.replace("z_re = 0.0", "z_re = 1.0"));
    let o = quasistat(&["run", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("degenerate metric"));
}

#[test]
fn schema_errors_name_their_paths() {
    let err = RunConfig::parse(&TRIVIAL_SEC4.replace("n_samples = 50", "n_samples = 50\nn_sample = 3")).unwrap_err();
    assert!(err.to_string().contains("time.n_sample"), "{err}");

    let cfg = RunConfig::parse(
        &TRIVIAL_SEC4
            .replace("n_samples = 50", "n_samples = 1")
            .replace("integrator_step = 1e-4", "integrator_step = -1.0"),
    )
    .unwrap();
    match cfg.validate_run() {
        Err(CliError::Config(errors)) => {
            assert!(errors.iter().any(|e| e.starts_with("time.n_samples")));
            assert!(errors.iter().any(|e| e.starts_with("time.integrator_step")));
        }
        other => panic!("expected config errors, got {other:?}"),
    }

    let unknown = RunConfig::parse(&TRIVIAL_SEC4.replace("\"sec4\"", "\"sec5\"")).unwrap_err();
    assert!(unknown.to_string().contains("sec5"), "{unknown}");
}

#[test]
fn breakpoint_inside_an_interval_without_splitting_fails() {
    let dir = tempfile::tempdir().unwrap();
    let text = TRIVIAL_SEC4
        .replace("t_end = 0.7853981633974483", "t_end = 1.0")
        .replace("n_samples = 50", "n_samples = 2\nsplit_at_breakpoints = false");
    let cfg = write(dir.path(), "bp.toml", &text);
    let o = quasistat(&["run", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("discontinuity"), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn verify_exit_status_follows_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    for bundle in ["algebra", "semigroup", "factorization"] {
        let o = quasistat(&["verify", "--bundle", bundle, "--seed", "42", "--out", d]);
        assert!(o.status.success(), "{bundle}: {}", String::from_utf8_lossy(&o.stdout));
        let rep = report(&dir.path().join("report.json"));
        assert_eq!(rep["failures"], 0);
        if bundle == "algebra" {
            for c in rep["checks"].as_array().unwrap() {
                assert!(c["residual"].as_f64().unwrap() <= 1e-10);
            }
        }
    }

    // (1, 1, 0, 0) has a semigroup gap below 0.1 at (π/4, π/8)
    let cfg = write(dir.path(), "trivial.toml", TRIVIAL_SEC4);
    let o = quasistat(&["verify", "--config", &cfg, "--bundle", "semigroup", "--out", d]);
    assert_eq!(o.status.code(), Some(1));
    let rep = report(&dir.path().join("report.json"));
    assert_eq!(rep["failures"], 1);
    assert_eq!(rep["checks"][0]["status"], "fail");

    let o = quasistat(&["verify", "--bundle", "nonsense", "--out", d]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown bundle"));
}

#[test]
fn verify_reads_the_bundle_from_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "v.toml", "seed = 3\n[verify]\nbundle = \"factorization\"\n");
    let o = quasistat(&["verify", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let rep = report(&dir.path().join("report.json"));
    assert_eq!(rep["config"]["verify"]["bundle"], "factorization");
    assert_eq!(rep["seed"], 3);
}

const SWEEP: &str = r#"
checks = ["trace", "property_i", "property_ii"]

[scenario]
name = "sec4"
x = 2.0
y = 1.0
z_re = 0.5

[time]
t_start = 0.0
t_end = 1.0
n_samples = 9
integrator_step = 1e-3
"#;

#[test]
fn theta_sweep_gives_identical_projections() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sweep.toml",
        &format!("{SWEEP}\n[sweep]\ntheta = [0.0, 0.7853981633974483, 1.5707963267948966]\n"),
    );
    let out = dir.path().join("sweep");
    let o = quasistat(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let index = report(&out.join("index.json"));
    let points = index["points"].as_array().unwrap();
    assert_eq!(points.len(), 3);

    let mut projections = Vec::new();
    for p in points {
        assert_eq!(p["status"], "ok");
        assert_eq!(p["failures"], 0);
        let (cols, data) = rows(&out.join(p["trajectory"].as_str().unwrap()));
        let proj: Vec<usize> = (0..cols.len()).filter(|&k| cols[k].starts_with("proj_")).collect();
        projections.push(data.iter().map(|r| proj.iter().map(|&k| r[k]).collect::<Vec<_>>()).collect::<Vec<_>>());
    }
    for other in &projections[1..] {
        for (ra, rb) in projections[0].iter().zip(other) {
            for (a, b) in ra.iter().zip(rb) {
                assert!((a - b).abs() <= 1e-10);
            }
        }
    }
}

#[test]
fn sweep_skips_degenerate_points() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sweep.toml",
        &format!("{SWEEP}\n[sweep]\nx = [1.0, 2.0]\nz_re = [1.0]\n"),
    );
    let out = dir.path().join("sweep");
    let o = quasistat(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let index = report(&out.join("index.json"));
    assert_eq!(index["skipped"], 1);
    let first = &index["points"][0];
    assert_eq!(first["status"], "skipped");
    assert!(first["note"].as_str().unwrap().contains("degenerate metric"));
    assert_eq!(index["points"][1]["status"], "ok");
}

#[test]
fn empty_sweep_grid_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sweep.toml", &format!("{SWEEP}\n[sweep]\ntheta = []\n"));
    let o = quasistat(&["sweep", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("empty"));
}
