//! Acceptance criteria 1 to 8, one pass/fail line each. Criteria 1 to 7 run
//! the full-size suite in process; criterion 8 drives the built binary twice.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use onetwo_cli::checks::{self, read_tree, SuiteParams};

/// Runtime budgets in seconds, by criterion; 8 has none.
const BUDGET: [(u32, f64); 7] = [(1, 10.0), (2, 300.0), (3, 120.0), (4, 10.0), (5, 60.0), (6, 300.0), (7, 600.0)];

fn onetwo(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_onetwo"))
        .args(args)
        .current_dir(dir)
        .output()
        .map_err(|e| format!("spawn failed: {e}"))?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("`onetwo {}` exited {}: {}", args.join(" "), out.status, String::from_utf8_lossy(&out.stderr).trim()))
    }
}

/// `sample`, then `census` over the samples, then a live `keane` run.
fn pipeline(root: &Path) -> Result<(), String> {
    let common = ["--seed", "20240611"];
    let sample: Vec<&str> = ["sample", "--L", "16", "--a", "1", "--b", "1", "--c", "1"]
        .into_iter()
        .chain(["--sweeps", "120", "--burn-in", "40", "--thin", "4", "--out", "sample"])
        .chain(common)
        .collect();
    onetwo(root, &sample)?;
    let census: Vec<&str> = ["census", "--in", "sample", "--adjacency", "lattice", "--out", "census"].into_iter().chain(common).collect();
    onetwo(root, &census)?;
    let keane: Vec<&str> = ["keane", "--L", "20", "--sweeps", "60", "--burn-in", "20", "--thin", "2", "--s", "4", "--N", "1", "--out", "keane"]
        .into_iter()
        .chain(common)
        .collect();
    onetwo(root, &keane)
}

fn reproducibility() -> Result<String, String> {
    let mut trees = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        pipeline(dir.path())?;
        trees.push(read_tree(dir.path()).map_err(|e| e.to_string())?);
    }
    if trees[0].is_empty() {
        return Err("no outputs written".into());
    }
    if trees[0] != trees[1] {
        let differing: Vec<&String> = trees[0].keys().chain(trees[1].keys()).filter(|k| trees[0].get(*k) != trees[1].get(*k)).collect();
        return Err(format!("outputs differ: {differing:?}"));
    }
    Ok(format!("{} files byte-identical across two binary runs", trees[0].len()))
}

fn main() -> ExitCode {
    let params = SuiteParams::full();
    let mut all = true;
    for result in checks::run_checks(&params, &[1, 2, 3, 4, 5, 6, 7]) {
        let budget = BUDGET.iter().find(|(id, _)| *id == result.id).map(|&(_, s)| s).unwrap_or(f64::INFINITY);
        let in_time = result.seconds < budget;
        let passed = result.passed && in_time;
        all &= passed;
        let time = if in_time { String::new() } else { format!(" over the {budget} s budget") };
        println!(
            "criterion {}: {}: {}: {} ({:.1} s{time})",
            result.id,
            if passed { "PASS" } else { "FAIL" },
            result.name,
            result.summary,
            result.seconds
        );
        for f in &result.failures {
            println!("    {f}");
        }
    }

    let start = Instant::now();
    match reproducibility() {
        Ok(summary) => println!("criterion 8: PASS: reproducibility: {summary} ({:.1} s)", start.elapsed().as_secs_f64()),
        Err(why) => {
            all = false;
            println!("criterion 8: FAIL: reproducibility: {why}");
        }
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
