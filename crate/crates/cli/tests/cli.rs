use std::fs;
use std::process::{Command, Output};

use stratmc::experiment::parse_csv;

fn stratmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stratmc")).args(args).output().unwrap()
}

const CONFIG: &str = r#"
[run]
seed = 5
samples = 5000
strata = 10
methods = ["la", "pca"]
allocations = ["opt"]

[model]
kind = "bs"
spots = [50.0]
vols = [0.3]
rate = 0.05
steps = 8
maturity = 1.0

[payoff]
kind = "barrier-expiry"
strikes = [50.0]
barrier = 60.0
"#;

fn write_config(dir: &tempfile::TempDir, text: &str) -> String {
    let path = dir.path().join("c.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn experiment_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(&dir, CONFIG);
    let out = dir.path().join("t.csv");
    let o = stratmc(&["experiment", "--config", &config, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = parse_csv(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0].method, "mc");
    assert_eq!(rows[0].time_ratio, Some(1.0));
    assert!(rows.iter().all(|r| r.barrier == Some(60.0) && r.seed == 5));

    let o = stratmc(&["experiment", "--config", &config, "--format", "json", "--seed", "6"]);
    assert!(o.status.success());
    let json: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 3);
    assert_eq!(json[1]["method"], "la");
    assert_eq!(json[1]["seed"], 6);
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(&dir, CONFIG);
    let a = stratmc(&["experiment", "--no-timing", "--config", &config]);
    let b = stratmc(&["--threads", "2", "experiment", "--no-timing", "--config", &config]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(&dir, &CONFIG.replace("[\"la\", \"pca\"]", "[\"pilot-pca\"]"));
    assert_eq!(stratmc(&["experiment", "--config", &bad]).status.code(), Some(2));
    let unknown = write_config(&dir, &CONFIG.replace("seed = 5", "seed = 5\ncolour = 1"));
    assert_eq!(stratmc(&["price", "--config", &unknown]).status.code(), Some(2));
    assert_eq!(stratmc(&["price", "--config", "/nonexistent.toml"]).status.code(), Some(2));

    // a one-dimensional model has no second independent gradient direction
    let flat = write_config(&dir, &CONFIG.replace("steps = 8", "steps = 1"));
    let o = stratmc(&["directions", "--config", &flat, "--method", "two-dir-la"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn price_and_directions() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(&dir, CONFIG);
    let o = stratmc(&["price", "--config", &config, "--method", "la", "--alloc", "const"]);
    assert!(o.status.success());
    let line = String::from_utf8(o.stdout).unwrap();
    assert!(line.starts_with("la const K=50 price"), "{line}");

    let out = dir.path().join("d.txt");
    let o = stratmc(&[
        "directions", "--config", &config, "--method", "la", "--method", "lt", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let angle: f64 = text.trim().rsplit(' ').next().unwrap().parse().unwrap();
    assert!(angle < 1e-6, "{text}");
    let values: Vec<f64> = fs::read_to_string(&out)
        .unwrap()
        .lines()
        .filter(|l| !l.is_empty())
        .map(|l| l.parse().unwrap())
        .collect();
    assert_eq!(values.len(), 16);
}
