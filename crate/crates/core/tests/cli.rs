use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn nrmh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nrmh")).args(args).output().expect("binary runs")
}

fn files(root: &Path) -> BTreeMap<PathBuf, String> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let text = fs::read_to_string(&path).unwrap();
                let kept: Vec<&str> = text.lines().filter(|l| !l.contains("wall_time")).collect();
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), kept.join("\n"));
            }
        }
    }
    out
}

fn key_values(path: &Path) -> BTreeMap<String, f64> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let (k, v) = l.split_once(',').unwrap();
            (k.to_string(), v.parse().unwrap())
        })
        .collect()
}

#[test]
fn experiment3d_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let out = nrmh(&["experiment3d", "--steps", "20000", "--seed", "5", "--out", dir.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (fa, fb) = (files(&a), files(&b));
    for name in ["params.csv", "acceptance.csv", "nrmh/trace.csv", "nrmh/eacf.csv", "mh/summary.csv", "mh/metadata.json"] {
        assert!(fa.contains_key(Path::new(name)), "missing {name}");
    }
    assert_eq!(fa, fb);

    let params = key_values(&a.join("params.csv"));
    assert!((params["c"] - 0.5333).abs() < 5e-4);
    assert!((params["h"] - 0.0334).abs() < 5e-4);
    assert!((params["sigma"] - 0.8109).abs() < 5e-4);
}

#[test]
fn config_file_and_flags_combine() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    fs::write(&cfg, "steps = 3000\nseed = 9\nbaseline = false\nmax_lag = 50\nout = from_config\n").unwrap();
    let out = nrmh(&["experiment3d", "--config", cfg.to_str().unwrap(), "--seed", "10"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("from_config");
    assert!(dir.join("nrmh/eacf.csv").exists());
    assert!(!dir.join("mh").exists());
    let meta = fs::read_to_string(dir.join("nrmh/metadata.json")).unwrap();
    assert!(meta.contains("\"seed\": "));
    assert!(meta.contains("\"master_seed\": 10"));
}

#[test]
fn invalid_overrides_abort_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.cfg");
    fs::write(&cfg, "h = 1.0\n").unwrap();
    let dir = tmp.path().join("out");
    let out = nrmh(&["experiment3d", "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.exists());

    fs::write(&cfg, "sigma = 0.99\n").unwrap();
    let out = nrmh(&["experiment3d", "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.exists());
}

#[test]
fn configuration_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.cfg");
    fs::write(&cfg, "colour = red\n").unwrap();
    assert_eq!(nrmh(&["discrete-demo", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(nrmh(&["experiment3d", "--steps", "many"]).status.code(), Some(2));
    let missing = tmp.path().join("missing.cfg");
    assert_eq!(nrmh(&["experiment9d", "--config", missing.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn discrete_demo_writes_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("demo.cfg");
    fs::write(&cfg, "instances = 6\nfunctions = 3\nmeasures = 2\n").unwrap();
    let dir = tmp.path().join("demo");
    let out = nrmh(&["discrete-demo", "--config", cfg.to_str().unwrap(), "--steps", "5000", "--out", dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["cyclic/p_nrmh.csv", "cyclic_checks.csv", "asvar.csv", "asvar_control.csv", "rate.csv"] {
        assert!(dir.join(name).exists(), "missing {name}");
    }
    let summary = key_values(&dir.join("summary.csv"));
    assert_eq!(summary["variance_violations"], 0.0);
    assert_eq!(summary["rate_violations"], 0.0);
    assert_eq!(summary["control_max_diff"], 0.0);
    let checks = key_values(&dir.join("cyclic_checks.csv"));
    assert!(checks["stationarity_residual"] <= 1e-12);
    assert_eq!(fs::read_to_string(dir.join("asvar.csv")).unwrap().lines().count(), 1 + 6 * 3);
}

#[test]
fn experiment9d_reports_drift_quality() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("quick.cfg");
    fs::write(&cfg, "restarts = 2\niterations = 300\nsteps = 2000\nmax_lag = 20\n").unwrap();
    let dir = tmp.path().join("nine");
    let out = nrmh(&["experiment9d", "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let params = key_values(&dir.join("params.csv"));
    assert!((params["reversible_spectral_bound"] + 1.0444).abs() < 1e-3);
    assert!(params["spectral_bound"] < params["reversible_spectral_bound"]);
    let skew = fs::read_to_string(dir.join("skew.csv")).unwrap();
    assert_eq!(skew.lines().count(), 9);
}
