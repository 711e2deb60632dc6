use std::path::{Path, PathBuf};
use std::process::Command;

use impact_irr::cli;

const SMALL: &str = r#"
schema_version = 1
name = "small"

[investment]
c0 = 1000
term = 2
tier = "tier1"
tier_total = 1000
evidence = "narrative"
capital_type = "bic"
instrument = { kind = "interest_only_balloon", rate = 0.02 }
hurdle = { policy = "explicit", rate = 0.06 }

[impact_model]
model = "explicit"
values = [100, 100]

[thresholds]
market_rate_floor = 0.06
impact_floor = { basis = "asserted", met = true }
"#;

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["impact-irr"];
    full.extend_from_slice(args);
    let code = cli::run(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write_temp(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn sweep_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn evaluate_reports_headline_figures() {
    let (code, out, _) = run(&["evaluate", scenario("ff.scenario").to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.contains("Impact IRR"));
    assert!(out.contains("11.8%"), "{out}");
}

#[test]
fn hurdle_at_the_root_gives_zero_inpv() {
    let (_, json, _) = run(&["evaluate", scenario("ff.scenario").to_str().unwrap(), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    let irr = v["impact_irr"].as_f64().unwrap();
    let (code, json, _) = run(&[
        "evaluate",
        scenario("ff.scenario").to_str().unwrap(),
        "--format",
        "json",
        "--hurdle",
        &irr.to_string(),
    ]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    // whole-dollar amounts serialize as integers, others as exact decimal strings
    let inpv = match &v["inpv_at_hurdle"] {
        serde_json::Value::String(s) => s.parse().unwrap(),
        other => other.as_f64().unwrap(),
    };
    assert!(inpv.abs() <= 0.01, "INPV at its own IRR: {inpv}");
}

#[test]
fn percent_hurdle_is_rejected() {
    let (code, _, err) = run(&["evaluate", scenario("ff.scenario").to_str().unwrap(), "--hurdle", "12%"]);
    assert_eq!(code, 2);
    assert!(err.contains("percent"), "{err}");
}

#[test]
fn missing_file_is_an_io_error() {
    let (code, _, err) = run(&["evaluate", "/definitely/not/here.scenario"]);
    assert_eq!(code, 4);
    assert!(err.contains("here.scenario"));
}

#[test]
fn invalid_scenario_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_temp(dir.path(), "bad.scenario", &SMALL.replace("term = 2", "term = 0"));
    let (code, _, err) = run(&["evaluate", &path]);
    assert_eq!(code, 2);
    assert!(err.contains("investment.term"), "{err}");

    let path = write_temp(dir.path(), "typo.scenario", &SMALL.replace("tier_total", "tier_totl"));
    let (code, _, err) = run(&["evaluate", &path]);
    assert_eq!(code, 2);
    assert!(err.contains("tier_totl"), "{err}");
}

#[test]
fn missing_table_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(scenario("ff.scenario")).unwrap();
    let path = write_temp(dir.path(), "ff.scenario", &text);
    let (code, _, err) = run(&["evaluate", &path]);
    assert_eq!(code, 4);
    assert!(err.contains(".csv"), "{err}");
}

#[test]
fn unsolvable_scenario_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // returns of 100,000% lie outside the search domain
    let path = write_temp(dir.path(), "wild.scenario", &SMALL.replace("values = [100, 100]", "values = [1000000, 0]"));
    let (code, _, err) = run(&["evaluate", &path]);
    assert_eq!(code, 3, "{err}");
}

#[test]
fn hurdle_sweep_is_strictly_decreasing() {
    let (code, out, _) = run(&[
        "sweep",
        scenario("ff.scenario").to_str().unwrap(),
        "--param",
        "hurdle",
        "--from",
        "0.02",
        "--to",
        "0.12",
        "--step",
        "0.005",
    ]);
    assert_eq!(code, 0);
    assert!(out.starts_with("hurdle,inpv_at_hurdle,impact_irr,status\n"));
    let rows = sweep_rows(&out);
    assert_eq!(rows.len(), 21);
    let inpv: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(inpv.windows(2).all(|w| w[1] < w[0]), "{inpv:?}");
    assert!(rows.iter().all(|r| r[3] == "ok"));
    assert_eq!(rows[0][0], "0.02");
    assert_eq!(rows[20][0], "0.12");
}

#[test]
fn degenerate_range_is_one_row() {
    let (code, out, _) = run(&[
        "sweep",
        scenario("ff.scenario").to_str().unwrap(),
        "--param",
        "vacancy",
        "--from",
        "0.05",
        "--to",
        "0.05",
        "--step",
        "0.01",
    ]);
    assert_eq!(code, 0);
    assert_eq!(sweep_rows(&out).len(), 1);
}

#[test]
fn attribution_sweep_is_non_decreasing() {
    let (code, out, _) = run(&[
        "sweep",
        scenario("ffcp-dt2.scenario").to_str().unwrap(),
        "--param",
        "attribution",
        "--from",
        "0",
        "--to",
        "1",
        "--step",
        "0.1",
    ]);
    assert_eq!(code, 0, "{out}");
    let rows = sweep_rows(&out);
    assert_eq!(rows.len(), 11);
    let inpv: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(inpv.windows(2).all(|w| w[1] >= w[0]), "{inpv:?}");
}

#[test]
fn bad_sweep_range_is_invalid() {
    let (code, _, err) = run(&[
        "sweep",
        scenario("ff.scenario").to_str().unwrap(),
        "--param",
        "hurdle",
        "--from",
        "0.2",
        "--to",
        "0.1",
        "--step",
        "0.01",
    ]);
    assert_eq!(code, 2);
    assert!(!err.is_empty());
}

#[test]
fn vacancy_sweep_rejected_for_explicit_schedules() {
    let (code, out, _) = run(&[
        "sweep",
        scenario("learn.scenario").to_str().unwrap(),
        "--param",
        "vacancy",
        "--from",
        "0.0",
        "--to",
        "0.1",
        "--step",
        "0.1",
    ]);
    assert_eq!(code, 0);
    assert!(sweep_rows(&out).iter().all(|r| r[3].starts_with("invalid")), "{out}");
}

#[test]
fn every_case_reproduces() {
    for case in ["ff", "lisc", "ffcp-dt1", "ffcp-dt2", "learn"] {
        let (code, out, err) = run(&["reproduce", case]);
        assert_eq!(code, 0, "{case}: {out}{err}");
        assert!(out.contains("Published figures"));
        assert!(!out.contains("FAIL"), "{case}: {out}");
    }
}

#[test]
fn reproduce_json_keeps_stdout_clean() {
    let (code, out, err) = run(&["reproduce", "lisc", "--format", "json"]);
    assert_eq!(code, 0);
    serde_json::from_str::<serde_json::Value>(&out).unwrap();
    assert!(err.contains("PASS"));
}

#[test]
fn output_is_deterministic() {
    let path = scenario("lisc.scenario");
    let args = ["sweep", path.to_str().unwrap(), "--param", "growth", "--from", "0", "--to", "0.05", "--step", "0.001"];
    let first = run(&args);
    for _ in 0..3 {
        assert_eq!(run(&args), first);
    }
    let json = ["evaluate", path.to_str().unwrap(), "--format", "json"];
    assert_eq!(run(&json), run(&json));
}

#[test]
fn binary_reads_format_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_impact-irr"))
        .args(["evaluate", scenario("ffcp-dt2.scenario").to_str().unwrap()])
        .env("IMPACT_IRR_FORMAT", "csv")
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("year,financial,impact,total,discounted\n"), "{stdout}");
    assert_eq!(stdout.lines().count(), 5);
}

#[test]
fn binary_exit_codes() {
    let status = Command::new(env!("CARGO_BIN_EXE_impact-irr"))
        .args(["evaluate", "/no/such/file.scenario"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(4));
    let status = Command::new(env!("CARGO_BIN_EXE_impact-irr")).args(["reproduce", "nope"]).status().unwrap();
    assert_eq!(status.code(), Some(2));
}
