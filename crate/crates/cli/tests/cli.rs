use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use lambda1_core::mesh::parse_imesh;
use lambda1_core::util::sha256_hex;
use serde_json::Value;
use tempfile::TempDir;

fn lambda1(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lambda1")).args(args).output().unwrap()
}

/// Runs `command` with `config` written to a file; returns the output and the report dir.
fn run_with(command: &str, config: &str, extra: &[&str]) -> (Output, TempDir) {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, config).unwrap();
    let out = dir.path().join("out");
    let mut args = vec![command, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend(extra);
    (lambda1(&args), dir)
}

fn report(dir: &TempDir, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.path().join("out").join(name)).unwrap()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn spectrum_of_the_round_sphere() {
    let cfg = "# round sphere\nmesh = icosphere\nsubdiv = 5\ncount = 8\n";
    let (o, dir) = run_with("spectrum", cfg, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&dir, "spectrum.json");
    let lb = r["result"]["lambda1_bar"].as_f64().unwrap();
    assert!((lb / (8.0 * PI) - 1.0).abs() < 0.01, "{lb}");
    assert_eq!(r["result"]["multiplicity"], 3);
    assert_eq!(r["pass"], true);
    assert_eq!(r["provenance"]["config"], cfg);
    assert_eq!(r["provenance"]["config_sha256"], sha256_hex(cfg.as_bytes()));
    assert_eq!(r["provenance"]["seed"], 7);
}

#[test]
fn identical_configs_give_identical_payloads() {
    let cfg = "mesh = square-torus\nn = 16\nexport_matrices = true\n";
    let (a, da) = run_with("spectrum", cfg, &["--seed", "42"]);
    let (b, db) = run_with("spectrum", cfg, &["--seed", "42", "--threads", "1"]);
    assert_eq!((code(&a), code(&b)), (0, 0));
    for name in ["spectrum.json", "stiffness.coo", "mass.coo"] {
        let x = fs::read(da.path().join("out").join(name)).unwrap();
        let y = fs::read(db.path().join("out").join(name)).unwrap();
        assert_eq!(x, y, "{name} differs");
    }
    assert_eq!(report(&da, "spectrum.json")["provenance"]["seed"], 42);
    let side = report(&da, "spectrum.timestamp.json");
    assert!(side["elapsed_seconds"].as_f64().unwrap() >= 0.0);
    assert_eq!(side["exit_code"], 0);
}

#[test]
fn verify_extend_certificate_at_the_threshold_length() {
    let (o, dir) = run_with("verify-extend", "max_k = 16\nlengths = 1.0397207708399179\n", &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("out").join("verify-extend.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 16);
    let coth1 = 1.0 / 1.0397207708399179f64.tanh();
    for r in rows {
        let f: Vec<&str> = r.split(',').collect();
        let ratio: f64 = f[4].parse().unwrap();
        assert!(ratio <= coth1 * (1.0 + 1e-12), "{r}");
        assert_eq!(f[7], "true");
    }
    assert!(csv.contains("# config: max_k = 16"));
}

#[test]
fn failed_certificate_exits_with_numerical_failure() {
    let (o, dir) = run_with("verify-extend", "max_k = 4\ntol = 1e-300\n", &[]);
    assert_eq!(code(&o), 2);
    assert_eq!(report(&dir, "verify-extend.json")["pass"], false);
}

#[test]
fn gap_without_eps_is_a_validation_error() {
    let (o, _) = run_with("gap", "lengths = 1, 2\n", &[]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("eps"));
}

#[test]
fn unknown_keys_and_bad_values_carry_line_numbers() {
    let (o, _) = run_with("spectrum", "mesh = icosphere\n\nsubdvi = 3\n", &[]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3") && err.contains("subdvi"), "{err}");

    let (o, _) = run_with("spectrum", "count = many\n", &[]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));

    let (o, _) = run_with("glue", "eps = 0.1\nN = 7\n", &[]);
    assert_eq!(code(&o), 1, "odd N is rejected by the gluing preconditions");
}

#[test]
fn glue_writes_a_loadable_mesh() {
    let (o, dir) = run_with("glue", "subdiv = 4\nkind = crosscap\neps = 0.1\nL = 1.0\nN = 32\n", &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("out").join("glued.imesh")).unwrap();
    let (mesh, _) = parse_imesh(&text).unwrap();
    assert_eq!(mesh.euler_char(), 1);
    let r = report(&dir, "glue.json");
    assert_eq!(r["result"]["mesh"]["euler_characteristic"], 1);
    assert!(r["result"]["lambda1_bar"].as_f64().unwrap() > 0.0);
}

#[test]
fn maximize_on_a_small_torus() {
    let (o, dir) = run_with("maximize", "mesh = square-torus\nn = 12\nmax_iter = 3\n", &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&dir, "maximize.json");
    let steps = r["result"]["trace"]["steps"].as_array().unwrap();
    assert!(!steps.is_empty() && steps.len() <= 4);
    let dens = fs::read_to_string(dir.path().join("out").join("maximize_density.csv")).unwrap();
    assert_eq!(dens.lines().filter(|l| !l.starts_with('#')).count(), 12 * 12 + 1);
}

fn summary(dir: &Path) -> Output {
    lambda1(&["summary", dir.to_str().unwrap()])
}

#[test]
fn summary_of_empty_and_mixed_directories() {
    let empty = TempDir::new().unwrap();
    let o = summary(empty.path());
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 1);

    let (o, dir) = run_with("spectrum", "mesh = icosphere\nsubdiv = 2\n", &[]);
    assert_eq!(code(&o), 0);
    let out = dir.path().join("out");
    let o = summary(&out);
    assert_eq!(code(&o), 0);
    let table = String::from_utf8_lossy(&o.stdout).to_string();
    assert_eq!(table.lines().count(), 2, "{table}");
    assert!(table.contains("lambda1-bar"));

    fs::write(out.join("broken.json"), "{ not json").unwrap();
    fs::write(out.join("bad.json"), r#"{"command": "gap", "pass": false, "headline": "max gap -1"}"#).unwrap();
    let o = summary(&out);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("broken.json"));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));

    assert_eq!(code(&summary(&out.join("missing"))), 1);
}
