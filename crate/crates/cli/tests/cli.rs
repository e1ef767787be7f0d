use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use shocklens::approx::{classify, ApproxConfig, Zone};
use shocklens::experiment::{resolve_datum, run_sweep, SweepConfig};

fn shocklens(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_shocklens"));
    cmd.args(args).env_remove("SHOCKLENS_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

const SMALL_GRID: &str = r#""grid": {"x_points": 121, "t_slices": 24, "cluster_per_octave": 8}"#;

#[test]
fn minimal_sweep_writes_one_row_per_viscosity_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        &format!(r#"{{"datum": "gaussian-odd", "K": 0, "nus": [1e-2, 1e-3], "norms": ["linf"], {SMALL_GRID}}}"#),
    );
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let out = shocklens(&["sweep", "--config", &cfg, "--out", a.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = shocklens(&["--threads", "1", "sweep", "--config", &cfg, "--out", b.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(a.join("errors.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert_eq!(csv.lines().next().unwrap(), "nu,linf,linf_app");
    for f in ["errors.csv", "rates.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write(dir.path(), "e.json", r#"{"datum": "gaussian-odd", "K": 0, "nus": [], "norms": ["linf"]}"#);
    let out = shocklens(&["sweep", "--config", &empty, "--out", dir.path().to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nus"));
    let typo = write(dir.path(), "t.json", "{\"datum\": \"gaussian-odd\",\n \"nus\": [1e-3],\n \"norms\": [\"lmax\"]}");
    let out = shocklens(&["sweep", "--config", &typo], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    let field = write(
        dir.path(),
        "f.json",
        r#"{"datum": "gaussian-odd", "nus": [1e-3], "profiles": {"fields": ["u2"]}}"#,
    );
    assert_eq!(shocklens(&["profiles", "--config", &field], &[]).status.code(), Some(2));
    let ok = write(dir.path(), "ok.json", r#"{"datum": "gaussian-odd", "nus": [1e-3], "grid": {"x_points": 11, "t_slices": 2}}"#);
    let out = shocklens(&["sweep", "--config", &ok, "--out", dir.path().to_str().unwrap()], &[("SHOCKLENS_THREADS", "zero")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gates_follow_the_fit_and_match_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!(
        r#"{{"datum": "gaussian-odd", "K": 0, "nus": [1e-2, 3.1622776601683794e-3, 1e-3, 3.1622776601683794e-4, 1e-4],
            "norms": ["linf"], {SMALL_GRID}, "seed_irrelevant": true}}"#
    );
    let cfg = write(dir.path(), "g.json", &body);
    let out_dir = dir.path().join("out");
    let out_s = out_dir.to_str().unwrap();
    let pass = shocklens(&["sweep", "--config", &cfg, "--out", out_s, "--gate", "rates.linf.exponent in [0.22, 0.28]"], &[("SHOCKLENS_THREADS", "2")]);
    assert_eq!(pass.status.code(), Some(0), "{}", String::from_utf8_lossy(&pass.stdout));
    let fail = shocklens(&["sweep", "--config", &cfg, "--out", out_s, "--gate", "rates.linf.exponent in [0.9, 1.1]"], &[]);
    assert_eq!(fail.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&fail.stdout).contains("FAIL"));

    let parsed = SweepConfig::from_json(&body).unwrap();
    let table = run_sweep(&parsed, &resolve_datum("gaussian-odd").unwrap()).unwrap();
    let mut expected = Vec::new();
    table.write_csv(&mut expected).unwrap();
    assert_eq!(fs::read(out_dir.join("errors.csv")).unwrap(), expected);

    let errors = out_dir.join("errors.csv");
    let refit = shocklens(&["rates", "--errors", errors.to_str().unwrap()], &[]);
    assert_eq!(refit.status.code(), Some(0));
    assert_eq!(refit.stdout, fs::read(out_dir.join("rates.json")).unwrap());
    let refit = shocklens(&["rates", "--errors", errors.to_str().unwrap(), "--gate", "rates.linf_app.exponent in [0.3, 0.5]"], &[]);
    assert_eq!(refit.status.code(), Some(0));
}

#[test]
fn profile_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "p.json",
        r#"{"datum": "gaussian-odd", "K": 0, "nus": [1e-4],
            "profiles": {"fields": ["U0", "theta", "E", "u_nu"], "times": [0.0, -1e-3, -0.02, -0.3], "xs": [-0.5, -1e-3, 0.0, 2e-4, 0.01, 0.5]}}"#,
    );
    let out = shocklens(&["profiles", "--config", &cfg], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,x,field,value,tolerance");
    let d = resolve_datum("gaussian-odd").unwrap();
    let app = ApproxConfig::new(1e-4, 0).unwrap();
    let (mut inner_rows, mut outer_rows) = (0, 0);
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let (t, x): (f64, f64) = (f[0].parse().unwrap(), f[1].parse().unwrap());
        let (v, tol): (f64, f64) = (f[3].parse().unwrap(), f[4].parse().unwrap());
        match f[2] {
            "U0" if t == 0.0 && x == 0.0 => assert_eq!(v, 0.0),
            "theta" if t < 0.0 && classify(&app, &d, t, x).unwrap() == Zone::Outer => {
                outer_rows += 1;
                assert_eq!(v, 0.0);
            }
            "E" if t < 0.0 && classify(&app, &d, t, x).unwrap() == Zone::Inner => {
                inner_rows += 1;
                assert!(v.abs() <= tol, "E({t}, {x}) = {v} above {tol}");
            }
            "E" | "theta" if t == 0.0 => assert!(v.is_nan()),
            "u_nu" => assert!(v.is_finite() && tol < 1e-8),
            _ => {}
        }
    }
    assert!(inner_rows > 0 && outer_rows > 0);
}

#[test]
fn selftest_passes() {
    let out = shocklens(&["selftest"], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).lines().all(|l| l.starts_with("PASS")));
}
