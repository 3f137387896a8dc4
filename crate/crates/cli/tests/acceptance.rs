//! Runs every acceptance criterion and prints one PASS/FAIL line each.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use stratmc::selftest::{self, Outcome};

/// Criteria that fail against the published figures, with the reason.
const KNOWN_FAILURES: [(u32, &str); 1] = [(
    4,
    "the strike-independent LA direction gives the angle printed for the first strike (54.62), not 52.73",
)];

const CONFIG: &str = r#"
[run]
seed = 99
samples = 20000
strata = 25
methods = ["la", "lt", "pca", "la+pca", "two-dir-la"]
lhs = true
lhs_replications = 10

[model]
kind = "bs"
spots = [50.0]
vols = [0.3]
rate = 0.05
steps = 16
maturity = 1.0

[payoff]
kind = "asian"
strikes = [45.0, 55.0]
"#;

fn cli_determinism(dir: &Path) -> Result<String, String> {
    let config = dir.join("det.toml");
    std::fs::write(&config, CONFIG).map_err(|e| e.to_string())?;
    let run = |threads: &str| -> Result<Vec<u8>, String> {
        let out = dir.join(format!("out-{threads}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_stratmc"))
            .args(["--threads", threads, "experiment", "--no-timing", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("exit status {status}"));
        }
        std::fs::read(&out).map_err(|e| e.to_string())
    };
    let one = run("1")?;
    let four = run("4")?;
    if one == four {
        Ok(format!("binary --threads 1 vs 4: {} identical bytes", one.len()))
    } else {
        Err("binary --threads 1 vs 4 outputs differ".into())
    }
}

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let mut unexpected = Vec::new();
    for (id, name) in selftest::CRITERIA {
        let start = Instant::now();
        let mut outcome = selftest::run(id).unwrap_or_else(|e| Outcome {
            id,
            name,
            passed: false,
            detail: format!("error: {e}"),
        });
        if id == 9 {
            match cli_determinism(dir.path()) {
                Ok(note) => outcome.detail = format!("{}; {note}", outcome.detail),
                Err(note) => {
                    outcome.passed = false;
                    outcome.detail = format!("{}; {note}", outcome.detail);
                }
            }
        }
        println!("{outcome} [{:.1} s]", start.elapsed().as_secs_f64());
        match (outcome.passed, KNOWN_FAILURES.iter().find(|k| k.0 == id)) {
            (false, Some((_, why))) => println!("      known: {why}"),
            (false, None) => unexpected.push(format!("criterion {id} failed")),
            (true, Some(_)) => unexpected.push(format!("criterion {id} now passes; update the known list")),
            (true, None) => {}
        }
    }
    if !unexpected.is_empty() {
        eprintln!("{}", unexpected.join("\n"));
        std::process::exit(1);
    }
}
