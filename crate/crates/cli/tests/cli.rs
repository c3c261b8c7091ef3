//! End-to-end runs of the `roughflow` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_roughflow"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn capacity_of_disk_in_disk() {
    let cfg = configs().join("disk_in_disk.json");
    let o = run(&["capacity", "--domain", cfg.to_str().unwrap(), "--res", "256"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let line = stdout(&o);
    let v: f64 = line.trim().strip_prefix("capacity[0] = ").unwrap().parse().unwrap();
    let exact = 2.0 * std::f64::consts::PI / 4f64.ln();
    assert!((v - exact).abs() / exact < 0.02, "{v}");
}

#[test]
fn capacity_writes_matrices_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("two_obstacles.json");
    let out = dir.path().join("cap");
    let o = run(&["capacity", "--config", cfg.to_str().unwrap(), "--res", "96", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let p = std::fs::read_to_string(out.join("P.csv")).unwrap();
    let rows: Vec<Vec<f64>> = p.lines().map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 2);
    // Gram matrix: symmetric, positive diagonal, negative coupling
    assert_eq!(rows[0][1], rows[1][0]);
    assert!(rows[0][0] > 0.0 && rows[1][1] > 0.0 && rows[0][1] < 0.0);
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "capacity");
    assert_eq!(m["config"]["resolution"], 96);
    assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);
    for f in ["P.csv", "C.csv", "capacity.json"] {
        assert!(m["outputs"].as_array().unwrap().iter().any(|v| v == f), "{f}");
    }
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(files(&p));
        } else if p.file_name().unwrap() != "manifest.json" {
            out.push((p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()));
        }
    }
    out.sort();
    out
}

#[test]
fn simulate_is_bit_identical_across_job_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("annulus.json");
    let mut outs = Vec::new();
    for jobs in ["1", "4"] {
        let out = dir.path().join(format!("run{jobs}"));
        let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--res", "48", "--jobs", jobs, "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        outs.push(out);
    }
    let a = files(&outs[0]);
    assert!(a.iter().any(|(n, _)| n == "diagnostics.csv"));
    assert!(a.iter().any(|(n, _)| n == "snap_000000.bin"));
    assert_eq!(a, files(&outs[1]));
    let csv = String::from_utf8(a.iter().find(|(n, _)| n == "diagnostics.csv").unwrap().1.clone()).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "step,t,energy,omega_l1,omega_l2,omega_linf,circ_0,alpha_0,support_radius,clamped");
    let last: Vec<&str> = lines.last().unwrap().split(',').collect();
    assert_eq!(last[1].parse::<f64>().unwrap(), 1.0);
    assert_eq!(last[6], "0.5");
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(outs[0].join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["jobs"], 1);
    assert_eq!(m["config"]["resolution"], 48);
}

#[test]
fn manifest_config_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a");
    let cfg = configs().join("vortex_pair.json");
    assert_eq!(code(&run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", first.to_str().unwrap()])), 0);
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(first.join("manifest.json")).unwrap()).unwrap();
    let again = write(dir.path(), "resolved.json", &m["config"].to_string());
    let second = dir.path().join("b");
    assert_eq!(code(&run(&["simulate", "--config", &again, "--out", second.to_str().unwrap()])), 0);
    assert_eq!(files(&first), files(&second));
    let m2: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(second.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["config_sha256"], m2["config_sha256"]);
    let snap = std::fs::read_to_string(second.join("snapshots/snap_000000.csv")).unwrap();
    assert!(snap.starts_with("x,y,gamma\n1.6,0.35,-1\n"));
}

#[test]
fn validation_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad_json = write(dir.path(), "bad.json", "{ not json");
    let unknown = write(dir.path(), "unknown.json", r#"{"method": "particles", "obstacle": {"kind": "slit"}, "initial": {"kind": "zero"}, "t_final": 1, "colour": 3}"#);
    let negative = write(dir.path(), "neg.json", r#"{"method": "particles", "obstacle": {"kind": "slit"}, "initial": {"kind": "zero"}, "t_final": -1}"#);
    for p in [&bad_json, &unknown, &negative] {
        assert_eq!(code(&run(&["simulate", "--config", p])), 2, "{p}");
        assert_eq!(code(&run(&["validate", "simulate", "--config", p])), 2, "{p}");
    }
    assert_eq!(code(&run(&["simulate", "--config", "/does/not/exist.json"])), 2);
    assert_eq!(code(&run(&["simulate", "--config", &negative, "--bogus"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
    let fam = write(dir.path(), "fam.json", r#"{"family": "nope", "n_max": 3, "resolutions": [32]}"#);
    assert_eq!(code(&run(&["validate", "gamma", "--config", &fam])), 2);
}

#[test]
fn validate_fills_defaults() {
    let o = run(&["validate", "simulate", "--config", configs().join("vortex_pair.json").to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["resolution"], 128);
    assert_eq!(v["interpolation"], "monotone_cubic");
}

#[test]
fn strict_escalates_under_resolved_geometry() {
    let dir = tempfile::tempdir().unwrap();
    let thin = write(dir.path(), "thin.json", r#"{"domain": {"family": "shrink_segment", "n": 6}, "resolution": 32}"#);
    let o = run(&["capacity", "--config", &thin]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("under-resolved"));
    assert_eq!(code(&run(&["capacity", "--config", &thin, "--strict"])), 2);
}

#[test]
fn runtime_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    // a fixed step far above the CFL limit fails during the run
    let cfl = write(
        dir.path(),
        "cfl.json",
        r#"{"method": "grid", "domain": {"family": "shrink_point", "n": 2}, "initial": {"kind": "zero"}, "gamma": [40.0], "resolution": 32, "dt": 1.0, "t_final": 1.0}"#,
    );
    let o = run(&["simulate", "--config", &cfl]);
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("CFL"));
}

#[test]
fn study_with_family_flags_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cont.json",
        r#"{"family": "shrink_segment", "members": [2, 3], "initial": {"kind": "radial_bump", "center": [0.0, 0.5], "radius": 0.3, "amplitude": 1.0},
            "t_final": 0.05, "resolution": 32}"#,
    );
    let out = dir.path().join("study");
    let o = run(&["study", "domain-continuity", "--config", &cfg, "--family", "rugosity", "--alpha", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(csv.starts_with("n,sup_gap,gap_t0,clamped\n"));
    assert_eq!(csv.lines().count(), 3);
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(r["study"], "domain_continuity");
    assert_eq!(r["params"]["family"]["family"], "rugosity");
    assert!(stdout(&o).lines().any(|l| l.starts_with("PASS") || l.starts_with("FAIL")));
    assert_eq!(code(&run(&["study", "arc-flow", "--family", "rugosity"])), 2);
}

#[test]
fn conformal_writes_map_and_gaps() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("map");
    let o = run(&["conformal", "--config", configs().join("ellipses_to_slit.json").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("map.json")).unwrap()).unwrap();
    assert_eq!(m["beta"], 2.0);
    let gaps: Vec<f64> = std::fs::read_to_string(out.join("caratheodory.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(gaps.len(), 8);
    assert!(gaps.windows(2).all(|w| w[1] < w[0]));
}
