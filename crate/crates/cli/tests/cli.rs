use std::path::Path;
use std::process::{Command, Output};

use dce_cli::commands::{
    CollateralContract, CollateralThresholds, CombinedThresholds, RegionClassification, ReputationSolution,
    ReputationThresholds, VerifyReport,
};
use dce_core::collateral::CollateralDecision;
use dce_core::combined::{Date0Action, Date0Solution, Date1Outcome};
use dce_core::oracle::{OlgRun, SimStats};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

fn dce(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dce"))
        .args(args)
        .env_remove("DCE_SEED")
        .output()
        .expect("spawn dce")
}

fn ok(args: &[&str]) -> String {
    let out = dce(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Parses `text` as `T` and checks that re-serializing gives the same JSON.
fn round_trip<T: Serialize + DeserializeOwned>(text: &str) -> T {
    let v: T = serde_json::from_str(text).unwrap();
    let original: Value = serde_json::from_str(text).unwrap();
    assert_eq!(serde_json::to_value(&v).unwrap(), original);
    let again: T = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(serde_json::to_value(&again).unwrap(), original);
    v
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

const FIG3: [&str; 8] = ["--beta", "0.5", "--pi0", "0.2", "--y", "1", "--p0", "1.2"];

#[test]
fn solve_combined_keeps() {
    let s: Date0Solution = round_trip(&ok(&[
        "solve", "--regime", "combined", "--beta", "0.5", "--pi0", "0.4", "--y", "1", "--p0", "1.2",
    ]));
    assert_eq!(s.decision, Date0Action::Keep);
    assert_eq!(s.r1_star, 2.0);
}

#[test]
fn classify_reputation_pooling() {
    let text = ok(&["classify", "--regime", "reputation", "--beta", "0.5", "--pi0", "0.6", "--y1", "5", "--y2", "10"]);
    let c: RegionClassification = round_trip(&text);
    assert_eq!(c.region.to_string(), "Pooling");
    let want = [[2.0, 2.0], [6.0, 10.0]];
    for (row, w) in c.plan.iter().zip(want) {
        for (a, b) in row.iter().zip(w) {
            assert!((a - b).abs() < 1e-12, "{:?}", c.plan);
        }
    }
}

#[test]
fn every_json_output_round_trips() {
    let _: ReputationSolution = round_trip(&ok(&[
        "solve", "--regime", "reputation", "--beta", "0.5", "--pi0", "0.9", "--y1", "5", "--y2", "10",
    ]));
    let _: CollateralDecision = round_trip(&ok(&["solve", "--regime", "collateral", "--beta", "0.5", "--p0", "2", "--x", "1"]));
    let _: CollateralContract = round_trip(&ok(&[
        "classify", "--regime", "collateral", "--beta", "0.5", "--p0", "2", "--x", "1", "--p", "3",
    ]));
    let mut a = vec!["classify", "--p", "0.7", "--R1", "1.5"];
    a.extend(FIG3);
    let o: Date1Outcome = round_trip(&ok(&a));
    assert_eq!(o.region.to_string(), "PartialSeparation");
    let mut a = vec!["thresholds", "--R1", "1.5"];
    a.extend(FIG3);
    let t: CombinedThresholds = round_trip(&ok(&a));
    assert_eq!((t.lower, t.upper), (0.5, 1.5));
    let t: CollateralThresholds = round_trip(&ok(&[
        "thresholds", "--regime", "collateral", "--beta", "0.5", "--p0", "1", "--x", "1", "--R1", "4", "--R2", "3",
    ]));
    assert!((t.date0_sell - 8.0 / 3.0).abs() < 1e-12);
    assert!((t.date1_repayment.unwrap() - 2.822876).abs() < 1e-6);
    assert_eq!(t.date2_default, Some(2.0));
    let t: ReputationThresholds = round_trip(&ok(&[
        "thresholds", "--regime", "reputation", "--beta", "0.5", "--pi0", "0.6", "--y1", "1", "--y2", "2",
    ]));
    assert_eq!((t.autarky_below, t.separating_from), (0.5, 0.75));
}

#[test]
fn figure2_follows_the_boundaries() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig2.csv");
    ok(&["figures", "--which", "fig2", "--g", "1", "--out", path.to_str().unwrap()]);
    let (header, rows) = csv_rows(&path);
    assert_eq!(header, ["beta", "pi0", "g", "label"]);
    assert_eq!(rows.len(), 10_000);
    for r in rows {
        let beta: f64 = r[0].parse().unwrap();
        let pi0: f64 = r[1].parse().unwrap();
        let want = if pi0 < beta {
            "Autarky"
        } else if pi0 < (1.0 + beta) / 2.0 {
            "Pooling"
        } else {
            "Separating"
        };
        assert_eq!(r[3], want, "beta {beta} pi0 {pi0}");
    }
}

#[test]
fn figure3_has_four_regions_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig3.csv");
    let mut a = vec!["figures", "--which", "fig3", "--R1", "1.5", "--n", "241", "--out", path.to_str().unwrap()];
    a.extend(FIG3);
    ok(&a);
    let (header, rows) = csv_rows(&path);
    assert_eq!(header, ["p1", "region", "pi1", "delta1", "alpha"]);
    assert_eq!(rows.len(), 241);
    let mut regions: Vec<&str> = rows.iter().map(|r| r[1].as_str()).collect();
    regions.dedup();
    assert_eq!(
        regions,
        ["CompleteSeparation", "PartialSeparation", "CreditRationing", "PoolingAutarky"]
    );
}

#[test]
fn prior_sweep_flips_once_at_the_bound() {
    let text = ok(&[
        "sweep", "--regime", "combined", "--beta", "0.5", "--y", "1", "--p0", "1.2", "--axis", "pi0", "--range",
        "0.05,0.45,0.05",
    ]);
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let col = r.headers().unwrap().iter().position(|h| h == "decision").unwrap();
    let rows: Vec<(f64, String)> = r
        .records()
        .map(|rec| {
            let rec = rec.unwrap();
            (rec[0].parse().unwrap(), rec[col].to_string())
        })
        .collect();
    assert_eq!(rows.len(), 9);
    let flips: Vec<usize> = (1..rows.len()).filter(|&i| rows[i].1 != rows[i - 1].1).collect();
    assert_eq!(flips.len(), 1);
    let i = flips[0];
    assert_eq!((rows[i - 1].1.as_str(), rows[i].1.as_str()), ("Sell", "Keep"));
    assert!(rows[i - 1].0 < 0.3233 && 0.3233 <= rows[i].0);
}

#[test]
fn price_sweep_keeps_on_one_interval() {
    let text = ok(&[
        "sweep", "--beta", "0.5", "--pi0", "0.4999", "--y", "1", "--axis", "p0", "--range", "0.05,4,0.05",
    ]);
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let col = r.headers().unwrap().iter().position(|h| h == "decision").unwrap();
    let keeps: Vec<bool> = r.records().map(|rec| &rec.unwrap()[col] == "Keep").collect();
    let first = keeps.iter().position(|&k| k).expect("some keep");
    let last = keeps.iter().rposition(|&k| k).unwrap();
    assert!(keeps[first..=last].iter().all(|&k| k));
    assert!(last + 1 < keeps.len(), "sells again for large p0");
}

#[test]
fn sweep_rejects_empty_range() {
    let out = dce(&["sweep", "--beta", "0.5", "--pi0", "0.3", "--y", "1", "--p0", "1", "--axis", "pi0", "--range", "0.4,0.4,0.1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("range"));
    let out = dce(&["sweep", "--beta", "0.5", "--pi0", "0.3", "--y", "1", "--p0", "1", "--axis", "pi0", "--range", "0.1,0.4,-1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn csv_uses_twelve_significant_digits() {
    let text = ok(&["sweep", "--beta", "0.5", "--pi0", "0.1", "--y", "1", "--axis", "p0", "--range", "1,1.2,0.1"]);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("p0,beta"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    // R1* = (1-beta)(2 p0 + beta y)/(1 - pi0) = 1.3888...
    assert_eq!(row[5], "1.38888888889");
}

#[test]
fn domain_errors_exit_2() {
    let out = dce(&["solve", "--beta", "0.5", "--pi0", "0.6", "--y", "1", "--p0", "1.2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("pi0"));
    let out = dce(&["solve", "--beta", "1.5", "--pi0", "0.2", "--y", "1", "--p0", "1.2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = dce(&["solve", "--pi0", "0.2", "--y", "1", "--p0", "1.2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn format_must_match_command() {
    let out = dce(&["solve", "--format", "csv", "--beta", "0.5", "--pi0", "0.2", "--y", "1", "--p0", "1.2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"command": "solve", "regime": "combined", "params": {"pi0": 0.4, "y": 1}}"#,
    )
    .unwrap();
    let s: Date0Solution = round_trip(&ok(&[
        "solve", "--beta", "0.5", "--pi0", "0.1", "--y", "3", "--p0", "1.2", "--config", cfg.to_str().unwrap(),
    ]));
    assert_eq!(s.decision, Date0Action::Keep);
    assert_eq!(s.r1_star, 2.0);
}

#[test]
fn malformed_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    for body in [
        "{not json",
        r#"{"params": {"beta": 0.5, "gamma": 1}}"#,
        r#"{"command": "verify"}"#,
    ] {
        std::fs::write(&cfg, body).unwrap();
        let out = dce(&["solve", "--beta", "0.5", "--pi0", "0.2", "--y", "1", "--p0", "1.2", "--config", cfg.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{body}");
    }
}

#[test]
fn io_errors_name_the_path() {
    let out = dce(&["verify", "--config", "/nonexistent/run.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/run.json"));
    let out = dce(&["figures", "--which", "fig2", "--out", "/nonexistent/dir/fig2.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/dir/fig2.csv"));
}

#[test]
fn verify_default_matrix() {
    let r: VerifyReport = round_trip(&ok(&["verify"]));
    assert!(r.pass);
    let out = dce(&["verify", "--tolerance", "1e-30"]);
    assert_eq!(out.status.code(), Some(3));
    let r: VerifyReport = round_trip(&String::from_utf8(out.stdout).unwrap());
    assert!(!r.pass);
}

#[test]
fn simulate_is_seeded() {
    let mut a = vec!["simulate", "--R1", "1.5", "--paths", "20000"];
    a.extend(FIG3);
    let run = |seed: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_dce"))
            .args(&a)
            .env("DCE_SEED", seed)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        String::from_utf8(out.stdout).unwrap()
    };
    let first = run("42");
    assert_eq!(first, run("42"));
    assert_ne!(first, run("43"));
    let s: SimStats = round_trip(&first);
    assert_eq!((s.seed, s.n_paths), (42, 20_000));
    assert!((s.date1_default_rate - 0.5528).abs() < 0.03);
}

#[test]
fn olg_outputs() {
    let mut a = vec!["olg", "--periods", "50", "--seed", "3"];
    a.extend(FIG3);
    let text = ok(&a);
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let h: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    let (t, e) = (
        h.iter().position(|c| c == "total_mass").unwrap(),
        h.iter().position(|c| c == "expected_mass").unwrap(),
    );
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 50);
    for row in rows {
        let total: f64 = row[t].parse().unwrap();
        let expected: f64 = row[e].parse().unwrap();
        assert!((total - expected).abs() < 1e-9);
    }
    a.extend(["--format", "json"]);
    let run: OlgRun = round_trip(&ok(&a));
    assert_eq!(run.seed, Some(3));
}
