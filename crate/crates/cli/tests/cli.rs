use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn bnsp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bnsp")).args(args).output().expect("spawn bnsp")
}

fn config(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
        .display()
        .to_string()
}

fn out_dir(tmp: &tempfile::TempDir, name: &str) -> PathBuf {
    tmp.path().join(name)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn ok(o: &Output) {
    assert!(
        o.status.success(),
        "status {:?}\nstdout {}\nstderr {}",
        o.status,
        String::from_utf8_lossy(&o.stdout),
        String::from_utf8_lossy(&o.stderr)
    );
}

fn verify_manifest(dir: &Path) {
    let m = json(&dir.join("manifest.json"));
    let outputs = m["outputs"].as_array().unwrap();
    assert!(!outputs.is_empty());
    for o in outputs {
        let bytes = std::fs::read(dir.join(o["path"].as_str().unwrap())).unwrap();
        assert_eq!(o["bytes"].as_u64().unwrap(), bytes.len() as u64);
        assert_eq!(o["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
    }
    assert!(!m["stages"].as_array().unwrap().is_empty());
}

#[test]
fn symbol_default_writes_eigenvalue_table() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = out_dir(&tmp, "symbol");
    let o = bnsp(&["symbol", "--out", dir.to_str().unwrap()]);
    ok(&o);
    let csv = std::fs::read_to_string(dir.join("eigenvalues.csv")).unwrap();
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    for i in 1..=4 {
        assert!(header.contains(&format!("lambda{i}_re").as_str()));
        assert!(header.contains(&format!("lambda{i}_im").as_str()));
    }
    assert_eq!(csv.lines().count(), 201);
    verify_manifest(&dir);
}

#[test]
fn symbol_expansion_run_reports_kappas() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = out_dir(&tmp, "symbol");
    let o = bnsp(&["symbol", "--rmin", "1e-3", "--rmax", "0.05", "--out", dir.to_str().unwrap()]);
    ok(&o);
    let j = json(&dir.join("symbol.json"));
    let e = &j["expansion"];
    assert!((e["kappa1"].as_f64().unwrap() - 1.125).abs() < 1e-6);
    assert!((e["kappa2"].as_f64().unwrap() - 1.125).abs() < 1e-6);
    for key in ["exponent_re_fast", "exponent_re_acoustic"] {
        assert!(e[key].as_f64().unwrap() >= 3.5, "{key}");
    }
    assert!(j["max_projector_residual"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn degenerate_parameters_exit_nonzero_with_record() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = out_dir(&tmp, "deg");
    let o = bnsp(&["--config", &config("degenerate.toml"), "symbol", "--out", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let rec = json(&dir.join("error.json"));
    assert_eq!(rec["error"]["kind"], "degenerate_spectrum");
    assert_eq!(rec["error"]["stage"], "spectrum");
    let stderr: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(stderr, rec);
}

#[test]
fn bad_config_is_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    std::fs::write(&cfg, "[params]\nZ = -1.0\nmu1 = 1.0\nnu1 = 0.5\nmu2 = 2.0\nnu2 = 1.0\np1_prime = 1.0\np2_prime = 1.0\n").unwrap();
    let dir = out_dir(&tmp, "bad");
    let o = bnsp(&["--config", cfg.to_str().unwrap(), "symbol", "--out", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&dir.join("error.json"))["error"]["kind"], "invalid_params");
}

#[test]
fn linear_decay_is_deterministic_and_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let a = out_dir(&tmp, "a");
    let b = out_dir(&tmp, "b");
    for (dir, threads) in [(&a, "1"), (&b, "2")] {
        let o = bnsp(&["linear-decay", "--case", "neutral", "--kmax", "2", "--threads", threads, "--out", dir.to_str().unwrap()]);
        ok(&o);
    }
    for f in ["norms.csv", "fits.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    verify_manifest(&a);
    let fits = json(&a.join("fits.json"));
    let entries = fits["verdict"]["entries"].as_array().unwrap();
    for (comp, k, rate) in [("rho1", 0, -0.75), ("rho2", 1, -1.25), ("rho1", 2, -1.75)] {
        let e = entries.iter().find(|e| e["component"] == comp && e["k"] == k).unwrap();
        assert!((e["fitted"].as_f64().unwrap() - rate).abs() <= 0.05);
        assert_eq!(e["pass"], true);
    }
}

#[test]
fn lower_bound_default_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = out_dir(&tmp, "lb");
    let o = bnsp(&["lower-bound", "--out", dir.to_str().unwrap()]);
    ok(&o);
    let j = json(&dir.join("lower_bound.json"));
    assert_eq!(j["pass"], true);
    assert!(j["min_norm_band"]["ratio"].as_f64().unwrap() <= 3.0);
    verify_manifest(&dir);
}

#[test]
fn simulate_then_fit_notes_the_periodic_box() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = out_dir(&tmp, "sim");
    let o = bnsp(&["--config", &config("simulate_small.toml"), "simulate", "--t-final", "2", "--out", dir.to_str().unwrap()]);
    ok(&o);
    verify_manifest(&dir);
    let summary = json(&dir.join("summary.json"));
    assert!(summary["mass_drift"].as_f64().unwrap() <= 1e-12);
    let snaps = summary["snapshots"].as_array().unwrap();
    assert!(!snaps.is_empty());
    let first = dir.join(snaps[0].as_str().unwrap());
    let state = bnsp_core::spectral::snapshot::read_snapshot(&first).unwrap();
    assert_eq!(state.n, 16);

    let fit_dir = out_dir(&tmp, "fit");
    let diag = dir.join("diagnostics.csv");
    let o = bnsp(&["fit", diag.to_str().unwrap(), "--column", "rho1_k0", "--out", fit_dir.to_str().unwrap()]);
    ok(&o);
    let j = json(&fit_dir.join("fits.json"));
    assert_eq!(j["source"], "periodic-box");
    let notes = j["notes"].as_array().unwrap();
    assert!(notes.iter().any(|n| n.as_str().unwrap().contains("exponentially")));
    let fits = j["fits"].as_array().unwrap();
    assert_eq!(fits.len(), 1);
    assert!(fits[0]["exponential_rate"].as_f64().unwrap() > 0.0);
}

#[test]
fn simulate_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let dir = out_dir(&tmp, name);
        ok(&bnsp(&["--config", &config("simulate_small.toml"), "simulate", "--out", dir.to_str().unwrap()]));
        dir
    };
    let (a, b) = (run("a"), run("b"));
    for f in ["diagnostics.csv", "summary.json", "snapshot_000016.bin"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn unknown_case_is_a_usage_error() {
    let o = bnsp(&["linear-decay", "--case", "sideways"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown case"));
}
