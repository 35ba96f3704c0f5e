//! Acceptance criterion 11: repeated runs with identical configs produce
//! byte-identical CSV.

use std::fs;
use std::path::Path;
use std::process::Command;

fn run(args: &[&str], out: &Path) -> bool {
    Command::new(env!("CARGO_BIN_EXE_heralded"))
        .args(args)
        .arg("--out")
        .arg(out)
        .status()
        .map(|s| s.success())
        .unwrap_or(false)
}

fn identical_outputs(args: &[&str], files: &[&str]) -> Result<(), String> {
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    if !run(args, d1.path()) || !run(args, d2.path()) {
        return Err(format!("{args:?} did not exit cleanly"));
    }
    for f in files {
        let (a, b) = (fs::read(d1.path().join(f)), fs::read(d2.path().join(f)));
        match (a, b) {
            (Ok(a), Ok(b)) if a == b => {}
            (Ok(_), Ok(_)) => return Err(format!("{f} differs between runs")),
            _ => return Err(format!("{f} missing")),
        }
    }
    Ok(())
}

fn main() {
    let config = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/fig5.toml");
    let checks = [
        identical_outputs(&["figures", "fig4"], &["fig4.csv", "fig4.summary.json"]),
        identical_outputs(&["run", config], &["fig5.csv", "fig5.summary.json"]),
    ];
    let failures: Vec<&String> = checks.iter().filter_map(|c| c.as_ref().err()).collect();
    if failures.is_empty() {
        println!("PASS criterion 11: fig4 bundle and fig5 config reproduce byte-identical CSV and summaries");
    } else {
        println!("FAIL criterion 11: {}", failures.iter().map(|s| s.as_str()).collect::<Vec<_>>().join("; "));
        std::process::exit(1);
    }
}
