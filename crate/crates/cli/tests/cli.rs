use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const TAU: f64 = 2.0 * PI;

fn aacs(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aacs"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|x| x.parse::<f64>().unwrap()).collect())
        .collect();
    (header, rows)
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn default_check_passes_and_writes_manifest() {
    let dir = TempDir::new().unwrap();
    let out = aacs(dir.path(), &["check", "--out", "check.json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&dir.path().join("check.json"));
    assert_eq!(report["passed"], true);
    let manifest = read_json(&dir.path().join("check.json.manifest.json"));
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(manifest["tool_version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(manifest["tolerances"]["operator"], 1e-12);
}

#[test]
fn perturbed_correlations_fail_the_commutator_check() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"varpi_perturbation": 1e-6}"#);
    let out = aacs(
        dir.path(),
        &["check", "--config", cfg.to_str().unwrap(), "--out", "c.out.json"],
    );
    assert_eq!(code(&out), 1);
    let report = read_json(&dir.path().join("c.out.json"));
    let checks = report["checks"].as_array().unwrap();
    let failing: Vec<&str> = checks
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(failing, vec!["commutator"]);
}

#[test]
fn corrupted_alpha_list_is_a_selection_rule_violation() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"family": {"kind": "gamma"}, "alpha": {"custom": [0.0, 1.0, 2.5]}, "window": {"nmin": 0, "nmax": 2}}"#,
    );
    let out = aacs(
        dir.path(),
        &["check", "--config", cfg.to_str().unwrap(), "--out", "r.json"],
    );
    assert_eq!(code(&out), 1);
    let report = read_json(&dir.path().join("r.json"));
    let detail = report["checks"][0]["detail"].as_str().unwrap();
    assert!(detail.contains("SelectionRuleViolation"), "{detail}");
    // The same configuration is a config error for a computing command.
    let out = aacs(
        dir.path(),
        &["spectrum", "--config", cfg.to_str().unwrap(), "--out", "s.csv"],
    );
    assert_eq!(code(&out), 2);
}

#[test]
fn angle_spectrum_sweep_has_one_block_per_epsilon_and_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let args = ["spectrum", "--epsilon-list", "1e-7,0.3,1,3,5,50", "--nmax", "10"];
    let out = aacs(dir.path(), &[&args[..], &["--out", "a.csv"]].concat());
    assert_eq!(code(&out), 0);
    aacs(dir.path(), &[&args[..], &["--out", "b.csv"]].concat());
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.csv")).unwrap());

    let (header, rows) = read_csv(&dir.path().join("a.csv"));
    assert_eq!(header, ["epsilon", "index", "eigenvalue"]);
    let mut blocks: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    blocks.dedup();
    assert_eq!(blocks, vec![1e-7, 0.3, 1.0, 3.0, 5.0, 50.0]);
    assert_eq!(rows.len(), 6 * 21);
    for r in &rows {
        assert!(r[2] > -1e-9 && r[2] < TAU + 1e-9);
    }
}

#[test]
fn gamma_action_spectrum_is_h_times_n_plus_one() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"operator": "action", "window": {"nmax": 20}}"#,
    );
    let out = aacs(
        dir.path(),
        &[
            "spectrum",
            "--config",
            cfg.to_str().unwrap(),
            "--family",
            "gamma",
            "--out",
            "s.csv",
        ],
    );
    assert_eq!(code(&out), 0);
    let (_, rows) = read_csv(&dir.path().join("s.csv"));
    assert_eq!(rows.len(), 21);
    for (n, r) in rows.iter().enumerate() {
        assert!(r[0].is_nan());
        assert!((r[2] - TAU * (n + 1) as f64).abs() < 1e-9 * TAU * (n + 1) as f64);
    }
}

#[test]
fn empty_epsilon_list_exits_with_config_error() {
    let dir = TempDir::new().unwrap();
    let out = aacs(dir.path(), &["spectrum", "--epsilon-list", "", "--out", "s.csv"]);
    assert_eq!(code(&out), 2);
    let cfg = write_config(dir.path(), "c.json", r#"{"epsilon_list": []}"#);
    let out = aacs(
        dir.path(),
        &["spectrum", "--config", cfg.to_str().unwrap(), "--out", "s.csv"],
    );
    assert_eq!(code(&out), 2);
}

#[test]
fn malformed_configs_exit_with_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"window": {"nmax": 4, "size": 3}}"#);
    assert_eq!(
        code(&aacs(dir.path(), &["husimi", "--config", cfg.to_str().unwrap()])),
        2
    );
    assert_eq!(code(&aacs(dir.path(), &["husimi", "--config", "missing.json"])), 2);
    let out = aacs(dir.path(), &["pendulum-fit", "--model", "oscillator", "--out", "f.csv"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn identity_lower_symbol_is_one() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"operator": "identity", "grid": {"gamma_nodes": 16}}"#,
    );
    let out = aacs(
        dir.path(),
        &["lower-symbol", "--config", cfg.to_str().unwrap(), "--out", "l.csv"],
    );
    assert_eq!(code(&out), 0);
    let (header, rows) = read_csv(&dir.path().join("l.csv"));
    assert_eq!(header, ["epsilon", "gamma", "J_tilde", "value"]);
    assert_eq!(rows.len(), 16);
    for r in &rows {
        assert!((r[3] - 1.0).abs() < 1e-12, "{}", r[3]);
    }
}

#[test]
fn angle_lower_symbol_is_half_period_at_mid_angle() {
    // At J~ = 1/2 the weights of k and -k coincide, so the odd part of the
    // sawtooth cancels at gamma = tau / 2.
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"grid": {"gamma_nodes": 256}}"#);
    let out = aacs(
        dir.path(),
        &[
            "lower-symbol",
            "--config",
            cfg.to_str().unwrap(),
            "--epsilon-list",
            "1e-7,0.1,1,3,10",
            "--out",
            "l.csv",
        ],
    );
    assert_eq!(code(&out), 0);
    let (_, rows) = read_csv(&dir.path().join("l.csv"));
    let mid: Vec<&Vec<f64>> = rows.iter().filter(|r| r[1] == PI).collect();
    assert_eq!(mid.len(), 5);
    for r in mid {
        assert!((r[3] - PI).abs() < 1e-12, "eps {} -> {}", r[0], r[3]);
    }
}

#[test]
fn husimi_is_normalized_and_matches_evolve_at_time_zero() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&aacs(dir.path(), &["husimi", "--out", "h.csv"])), 0);
    let (header, h) = read_csv(&dir.path().join("h.csv"));
    assert_eq!(header, ["t", "J_tilde", "gamma", "rho"]);

    // Trapezoid in J~, periodic rule in gamma (the density carries no 1/tau).
    let j: Vec<f64> = {
        let mut v: Vec<f64> = h.iter().map(|r| r[1]).collect();
        v.dedup();
        v
    };
    let ng = h.len() / j.len();
    let dj = j[1] - j[0];
    let mut mass = 0.0;
    for (i, chunk) in h.chunks(ng).enumerate() {
        let wj = if i == 0 || i == j.len() - 1 { 0.5 * dj } else { dj };
        mass += wj * chunk.iter().map(|r| r[3]).sum::<f64>() / ng as f64;
    }
    assert!((mass - 1.0).abs() < 1e-6, "{mass}");

    let cfg = write_config(dir.path(), "c.json", r#"{"times": [0.0]}"#);
    assert_eq!(
        code(&aacs(
            dir.path(),
            &["evolve", "--config", cfg.to_str().unwrap(), "--out", "e.csv"]
        )),
        0
    );
    let (_, e) = read_csv(&dir.path().join("e.csv"));
    assert_eq!(e.len(), h.len());
    for (a, b) in h.iter().zip(&e) {
        assert_eq!(&a[..3], &b[..3]);
        assert!(
            (a[3] - b[3]).abs() <= 1e-14 * a[3].abs().max(1e-300) + 1e-300,
            "{} {}",
            a[3],
            b[3]
        );
    }
}

#[test]
fn evolve_reports_bound_and_revives() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"times": [0.0, 6.283185307179586], "grid": {"j_nodes": 33, "gamma_nodes": 64}}"#,
    );
    let out = aacs(
        dir.path(),
        &["evolve", "--config", cfg.to_str().unwrap(), "--out", "e.csv"],
    );
    assert_eq!(code(&out), 0);
    let report = read_json(&dir.path().join("e.csv.bound.json"));
    assert_eq!(report["bound"]["form"], "coherent");
    assert!(report["bound"]["max_violation"].as_f64().unwrap() <= 1e-10);
    assert_eq!(report["bound_satisfied"], true);
    // t~ = 2 pi is the revival time: the density repeats.
    let (_, rows) = read_csv(&dir.path().join("e.csv"));
    let (first, second) = rows.split_at(rows.len() / 2);
    for (a, b) in first.iter().zip(second) {
        assert!((a[3] - b[3]).abs() < 1e-10, "{} {}", a[3], b[3]);
    }
}

#[test]
fn rotor_self_fit_recovers_constant_width() {
    let dir = TempDir::new().unwrap();
    let out = aacs(dir.path(), &["pendulum-fit", "--model", "rotor", "--out", "f.csv"]);
    assert_eq!(code(&out), 0);
    let fit = read_json(&dir.path().join("f.csv.fit.json"));
    for key in ["levels", "J_cl", "sigma_n", "residuals", "cst"] {
        assert!(fit.get(key).is_some(), "{key}");
    }
    for s in fit["sigma_n"].as_array().unwrap() {
        assert!((s.as_f64().unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-8);
    }
    let (header, rows) = read_csv(&dir.path().join("f.csv"));
    assert_eq!(header, ["level", "J_cl", "sigma", "residual", "cst"]);
    assert_eq!(rows.len(), 6);
}

#[test]
fn infeasible_fit_reports_no_bracket() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"pendulum_fit": {"anchor": {"fixed": -100.0}}}"#,
    );
    let out = aacs(
        dir.path(),
        &[
            "pendulum-fit",
            "--model",
            "pendulum",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            "f.csv",
        ],
    );
    assert_eq!(code(&out), 3);
    let stderr = String::from_utf8_lossy(&out.stderr);
    let report: Value = serde_json::from_str(stderr.lines().last().unwrap()).unwrap();
    assert_eq!(report["error"], "NoBracket");
    assert_eq!(report["scanned"].as_array().unwrap().len(), 41);
}

#[test]
fn flags_override_config_and_change_the_hash() {
    let dir = TempDir::new().unwrap();
    aacs(dir.path(), &["spectrum", "--nmax", "4", "--out", "a.csv"]);
    aacs(dir.path(), &["spectrum", "--nmax", "4", "--out", "b.csv"]);
    aacs(dir.path(), &["spectrum", "--nmax", "5", "--out", "a.csv"]);
    let hash = |p: &str| {
        read_json(&dir.path().join(p))["config_hash"]
            .as_str()
            .unwrap()
            .to_string()
    };
    let (_, rows) = read_csv(&dir.path().join("a.csv"));
    assert_eq!(rows.len(), 11);
    assert_ne!(hash("a.csv.manifest.json"), hash("b.csv.manifest.json"));
}
