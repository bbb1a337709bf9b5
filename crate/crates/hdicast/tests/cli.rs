//! Black-box tests of the binary: exit codes, stdout/stderr contracts, and
//! artifact reuse across staged invocations. Each test builds its own panel
//! and config in a temporary directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Output;

use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_hdicast"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).unwrap()
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).unwrap()
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

/// Sixteen-year panel for two well-behaved countries; `with_bad` adds a
/// third country that has a target series but no predictors at all, so its
/// ranking stage must fail.
fn write_panel(path: &Path, with_bad: bool) {
    let noise = [
        3.1, 4.1, 5.9, 2.6, 5.3, 5.8, 9.7, 9.3, 2.3, 8.4, 6.2, 6.4, 3.3, 8.3, 2.7, 9.5,
    ];
    let mut csv = String::from("country,indicator,year,value\n");
    for i in 0..16usize {
        let year = 2000 + i as i32;
        let t = i as f64;
        writeln!(csv, "AAA,T.HDI,{year},{}", 0.70 + 0.010 * t).unwrap();
        writeln!(csv, "AAA,F.GOOD,{year},{}", 50.0 + 5.0 * t).unwrap();
        writeln!(csv, "AAA,F.OK,{year},{}", 10.0 + 0.5 * t + 0.01 * t * t).unwrap();
        writeln!(csv, "AAA,F.NOISE,{year},{}", noise[i]).unwrap();
        writeln!(csv, "BBB,T.HDI,{year},{}", 0.60 + 0.012 * t).unwrap();
        writeln!(csv, "BBB,F.GOOD,{year},{}", 40.0 + 4.0 * t).unwrap();
        writeln!(csv, "BBB,F.OK,{year},{}", 12.0 + 0.4 * t + 0.02 * t * t).unwrap();
        writeln!(csv, "BBB,F.NOISE,{year},{}", noise[15 - i]).unwrap();
        if with_bad {
            writeln!(csv, "BAD,T.HDI,{year},{}", 0.50 + 0.010 * t).unwrap();
        }
    }
    fs::write(path, csv).unwrap();
}

fn config_json(countries: &[&str]) -> String {
    let countries = countries
        .iter()
        .map(|c| format!("\"{c}\""))
        .collect::<Vec<_>>()
        .join(", ");
    format!(
        r#"{{
  "data_path": "panel.csv",
  "target_code": "T.HDI",
  "countries": [{countries}],
  "boundary_year": 2012,
  "epsilon": 0.25,
  "k": 2,
  "grid": [
    {{ "n_rounds": 30, "eta": 0.3, "max_depth": 1, "lambda": 1.0, "gamma": 0.0, "min_child_weight": 1.0 }},
    {{ "n_rounds": 30, "eta": 0.3, "max_depth": 2, "lambda": 1.0, "gamma": 0.0, "min_child_weight": 1.0 }}
  ],
  "cv": {{ "min_train": 5, "horizon": 1 }},
  "forecast": {{ "first_year": 2016, "horizon": 3 }},
  "output_dir": "out"
}}"#
    )
}

/// Panel + config in a fresh tempdir; returns (dir, config path).
fn fixture(countries: &[&str], with_bad: bool) -> (TempDir, PathBuf) {
    let dir = TempDir::new().unwrap();
    write_panel(&dir.path().join("panel.csv"), with_bad);
    let config = dir.path().join("config.json");
    fs::write(&config, config_json(countries)).unwrap();
    (dir, config)
}

#[test]
fn help_and_version_exit_zero() {
    let help = run(&["--help"]);
    assert_eq!(exit_code(&help), 0);
    assert!(stdout(&help).contains("hdicast"));
    assert!(stdout(&help).contains("run-all"));

    let version = run(&["--version"]);
    assert_eq!(exit_code(&version), 0);
}

#[test]
fn usage_errors_exit_one() {
    let unknown_flag = run(&["run-all", "--bogus"]);
    assert_eq!(exit_code(&unknown_flag), 1);

    let no_subcommand = run(&[]);
    assert_eq!(exit_code(&no_subcommand), 1);
}

#[test]
fn unreadable_config_exits_one() {
    let missing = run(&["validate", "--config", "/definitely/not/here.json"]);
    assert_eq!(exit_code(&missing), 1);
    assert!(stderr(&missing).contains("error:"));
}

#[test]
fn validate_accepts_the_fixture_config() {
    let (_dir, config) = fixture(&["AAA", "BBB"], false);
    let output = run(&["validate", "--config", config.to_str().unwrap()]);
    assert_eq!(exit_code(&output), 0);
    assert_eq!(stdout(&output), "config OK\n");
}

#[test]
fn validate_reports_every_violation() {
    let dir = TempDir::new().unwrap();
    let config = dir.path().join("config.json");
    fs::write(
        &config,
        r#"{
  "data_path": "panel.csv",
  "target_code": "T.HDI",
  "countries": [],
  "boundary_year": 2012,
  "forecast": { "first_year": 2016, "horizon": 0 },
  "output_dir": "out"
}"#,
    )
    .unwrap();
    let output = run(&["validate", "--config", config.to_str().unwrap()]);
    assert_eq!(exit_code(&output), 1);
    let errors = stderr(&output);
    assert!(errors.contains("violation: countries"), "got: {errors}");
    assert!(errors.contains("violation: forecast.horizon"), "got: {errors}");
    assert_eq!(errors.lines().count(), 2, "got: {errors}");
}

#[test]
fn run_all_writes_all_artifacts() {
    let (dir, config) = fixture(&["AAA", "BBB"], false);
    let output = run(&["run-all", "--config", config.to_str().unwrap()]);
    assert_eq!(exit_code(&output), 0, "stderr: {}", stderr(&output));

    let run_stdout = stdout(&output);
    let wrote: Vec<&str> = run_stdout
        .lines()
        .filter(|l| l.starts_with("wrote "))
        .map(|l| l.trim_start_matches("wrote "))
        .map(|l| l.rsplit('/').next().unwrap())
        .collect();
    assert_eq!(
        wrote,
        [
            "ranking_AAA.csv",
            "eval_AAA.csv",
            "model_AAA.json",
            "forecast_AAA.csv",
            "predictors_AAA.csv",
            "ranking_BBB.csv",
            "eval_BBB.csv",
            "model_BBB.json",
            "forecast_BBB.csv",
            "predictors_BBB.csv",
            "eval_summary.csv",
            "forecast.svg",
            "manifest.json",
        ],
    );
    let out_dir = dir.path().join("out");
    for file in &wrote {
        assert!(out_dir.join(file).exists(), "{file} missing on disk");
    }
    let summary = fs::read_to_string(out_dir.join("eval_summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
    assert!(stderr(&output).is_empty());
}

#[test]
fn failing_country_is_isolated_and_exits_two() {
    let (dir, config) = fixture(&["AAA", "BAD", "BBB"], true);
    let output = run(&["run-all", "--config", config.to_str().unwrap()]);
    assert_eq!(exit_code(&output), 2);

    let errors = stderr(&output);
    assert!(
        errors.contains("country BAD, stage rank"),
        "got: {errors}",
    );
    assert!(!errors.contains("AAA") && !errors.contains("BBB"), "got: {errors}");

    // The healthy countries still produce their full artifact sets.
    let out_dir = dir.path().join("out");
    for country in ["AAA", "BBB"] {
        for file in [
            format!("ranking_{country}.csv"),
            format!("model_{country}.json"),
            format!("forecast_{country}.csv"),
        ] {
            assert!(out_dir.join(&file).exists(), "{file} missing");
        }
    }
    assert!(!out_dir.join("ranking_BAD.csv").exists());
    let summary = fs::read_to_string(out_dir.join("eval_summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3, "got: {summary}");
    assert!(!summary.contains("BAD"));
}

#[test]
fn staged_invocations_reuse_earlier_artifacts() {
    let (dir, config) = fixture(&["AAA", "BBB"], false);
    let config = config.to_str().unwrap();
    let out_dir = dir.path().join("out");

    // Stage 1: rank only.
    let rank = run(&["rank", "--config", config]);
    assert_eq!(exit_code(&rank), 0, "stderr: {}", stderr(&rank));
    assert!(out_dir.join("ranking_AAA.csv").exists());
    assert!(!out_dir.join("eval_summary.csv").exists());
    assert!(!out_dir.join("manifest.json").exists());

    // Tamper with AAA's ranking so only the noise feature is selected. If
    // the evaluate stage really consumes the file, the refit model must
    // record exactly that feature.
    fs::write(
        out_dir.join("ranking_AAA.csv"),
        "rank,indicator,edr_distance,selected\n\
         1,F.NOISE,0,true\n\
         2,F.GOOD,9,false\n\
         3,F.OK,11,false\n",
    )
    .unwrap();

    // Stage 2: evaluate, reusing the rankings (tampered one included).
    let evaluate = run(&["evaluate", "--config", config]);
    assert_eq!(exit_code(&evaluate), 0, "stderr: {}", stderr(&evaluate));
    let evaluate_out = stdout(&evaluate);
    assert!(
        !evaluate_out.contains("ranking_"),
        "evaluate rewrote rankings: {evaluate_out}",
    );
    let model = fs::read_to_string(out_dir.join("model_AAA.json")).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&model).unwrap();
    assert_eq!(doc["features"], serde_json::json!(["F.NOISE"]));

    // Stage 3: forecast, reusing rankings and models.
    let forecast = run(&["forecast", "--config", config]);
    assert_eq!(exit_code(&forecast), 0, "stderr: {}", stderr(&forecast));
    let forecast_out = stdout(&forecast);
    assert!(
        !forecast_out.contains("ranking_") && !forecast_out.contains("model_"),
        "forecast rewrote upstream artifacts: {forecast_out}",
    );
    let forecast_csv = fs::read_to_string(out_dir.join("forecast_AAA.csv")).unwrap();
    assert_eq!(forecast_csv.lines().count(), 4); // header + 2016..2018
}

#[test]
fn corrupt_cached_artifact_fails_loudly() {
    let (dir, config) = fixture(&["AAA", "BBB"], false);
    let config = config.to_str().unwrap();
    let out_dir = dir.path().join("out");

    assert_eq!(exit_code(&run(&["rank", "--config", config])), 0);
    fs::write(out_dir.join("ranking_AAA.csv"), "not,a,ranking\n").unwrap();

    let evaluate = run(&["evaluate", "--config", config]);
    assert_eq!(exit_code(&evaluate), 2);
    let errors = stderr(&evaluate);
    assert!(
        errors.contains("country AAA") && errors.contains("cannot reuse"),
        "got: {errors}",
    );
    // The healthy country still evaluates.
    assert!(out_dir.join("model_BBB.json").exists());
}

#[test]
fn workers_flag_is_validated() {
    let (_dir, config) = fixture(&["AAA", "BBB"], false);
    let config = config.to_str().unwrap();

    let zero = run(&["run-all", "--config", config, "--workers", "0"]);
    assert_eq!(exit_code(&zero), 1);
    assert!(stderr(&zero).contains("--workers"));

    let two = run(&["run-all", "--config", config, "--workers", "2"]);
    assert_eq!(exit_code(&two), 0, "stderr: {}", stderr(&two));
}
