//! The committed instance files: they must parse, solve, and survive a
//! parse → emit → parse cycle without changing value.

use std::path::{Path, PathBuf};
use std::process::Command;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

const GOLDEN: [&str; 3] = ["wct_small.json", "kmedian_line.json", "makespan_small.json"];

#[test]
fn golden_files_round_trip_losslessly() {
    for name in GOLDEN {
        let text = std::fs::read_to_string(data(name)).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        let emitted = serde_json::to_string_pretty(&parsed).unwrap();
        let reparsed: serde_json::Value = serde_json::from_str(&emitted).unwrap();
        assert_eq!(parsed, reparsed, "{name}");
    }
}

#[test]
fn golden_files_solve() {
    for name in GOLDEN {
        let out = Command::new(env!("CARGO_BIN_EXE_probe"))
            .args([
                "solve",
                data(name).to_str().unwrap(),
                "--strategy",
                "none",
                "--strategy",
                "nonadaptive",
                "--format",
                "csv",
            ])
            .output()
            .unwrap();
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        let text = String::from_utf8(out.stdout).unwrap();
        assert_eq!(text.lines().count(), 3, "{name}: {text}");
    }
}

#[test]
fn golden_wct_values_are_pinned() {
    // Hand-checked: means are 2, 1, 3.625; weights 2, 1, 0.75.
    // No-probe value = Σ w·μ + pairwise mins
    //   = (4 + 1 + 2.71875) + min(2·1, 1·2) + min(2·3.625, 0.75·2)
    //   + min(1·3.625, 0.75·1) = 7.71875 + 2 + 1.5 + 0.75 = 11.96875.
    let out = Command::new(env!("CARGO_BIN_EXE_probe"))
        .args([
            "solve",
            data("wct_small.json").to_str().unwrap(),
            "--strategy",
            "none",
            "--format",
            "json",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let value = report["rows"][0]["value"].as_f64().unwrap();
    assert!((value - 11.96875).abs() < 1e-9, "{value}");
}
