use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hyperpstl_cli::RunReport;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn bench(path: &str) -> String {
    root().join("benchmarks").join(path).display().to_string()
}

fn hpstl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hpstl")).args(args).output().expect("binary runs")
}

fn scratch(name: &str, text: &str) -> String {
    let dir = std::env::temp_dir().join(format!("hpstl-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn check(formula: &str, extra: &[&str]) -> Output {
    let model = bench("thermostat/model.toml");
    let mut args = vec!["check", "--model", &model, "--formula", formula];
    args.extend_from_slice(extra);
    hpstl(&args)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn thermostat_sensitivity_holds() {
    let out = check(&bench("thermostat/sens_d1.1_e0.05.hpstl"), &["--alpha", "0.05", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = RunReport::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(report.verdict.assertion, hyperpstl::smc::Assertion::True);
    assert!(report.verdict.achieved_significance <= 0.05);
    assert_eq!(report.inputs.seed, 7);
    assert_eq!(report.inputs.horizon, 20.0);
}

#[test]
fn reports_are_reproducible() {
    let f = bench("thermostat/sens_d0.9_e0.05.hpstl");
    let run = |seed: &str| {
        let out = check(&f, &["--seed", seed, "--iterations", "--trace-stats"]);
        RunReport::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap().without_timing()
    };
    let a = run("11");
    assert_eq!(a, run("11"));
    assert!(!a.verdict.iterations.is_empty());
    assert_eq!(a.trace_stats.as_ref().unwrap().traces, 100);
    assert_ne!(a.verdict.total_tuples(), 0);
}

#[test]
fn report_file_round_trips() {
    let path = scratch("report.json", "");
    let out = check(&bench("thermostat/sens_d0.9_e0.01.hpstl"), &["--report", &path]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let report = RunReport::from_json(&text).unwrap();
    assert_eq!(RunReport::from_json(&report.to_json()).unwrap(), report);
}

#[test]
fn malformed_formula_reports_position() {
    let f = scratch("bad.hpstl", "P{p}(F[0,1] q@p)\n  >= >= 0.5\n");
    let out = check(&f, &[]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("2:") || err.contains("line 2"), "{err}");
}

#[test]
fn alpha_out_of_range() {
    let out = check(&bench("thermostat/sens_d1.1_e0.05.hpstl"), &["--alpha", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("significance must be in (0,1)"));
}

#[test]
fn undecided_exits_with_two() {
    // the exact probability of this event under a fair split is 1/2, so a
    // small cap never settles it
    let model = scratch(
        "coin.toml",
        "kind = \"ctmc\"\nstates = [\"s\", \"h\", \"t\"]\nrates = [[-2, 1, 1], [0, 0, 0], [0, 0, 0]]\ninitial = \"s\"\nhorizon = 50\n",
    );
    let f = scratch("coin.hpstl", "P{x}(F[0,inf] h@x) > 0.5\n");
    let out = hpstl(&["check", "--model", &model, "--formula", &f, "--alpha", "1e-6", "--max-samples", "100"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    let report = RunReport::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(report.verdict.samples_used[0].tuples, 100);
}

#[test]
fn error_classes_exit_with_one() {
    let good_f = bench("thermostat/sens_d1.1_e0.05.hpstl");
    let good_m = bench("thermostat/model.toml");
    let no_horizon = scratch("nohorizon.toml", "kind = \"ctmc\"\nstates = [\"a\"]\nrates = [[0]]\ninitial = \"a\"\n");
    let bad_model = scratch("bad.toml", "kind = \"ctmc\"\nstates = [\"a\"]\n");
    let unknown_region = scratch("region.hpstl", "(P{x}(F[0,1] q@x)) in nowhere\n");
    let equality = scratch("eq.hpstl", "P{x}(F[0,1] q@x) = 0.5\n");
    let cases: Vec<Vec<&str>> = vec![
        vec!["check", "--model", "/nonexistent.toml", "--formula", &good_f],
        vec!["check", "--model", &good_m, "--formula", "/nonexistent.hpstl"],
        vec!["check", "--model", &bad_model, "--formula", &good_f],
        vec!["check", "--model", &no_horizon, "--formula", &good_f],
        vec!["check", "--model", &good_m, "--formula", &unknown_region],
        vec!["check", "--model", &good_m, "--formula", &equality],
        vec!["check", "--model", &good_m, "--formula", &good_f, "--batch", "0"],
        vec!["check", "--model", &good_m, "--formula", &good_f, "--horizon", "-1"],
        vec!["check", "--model", &good_m, "--formula", &good_f, "--truncation-policy", "maybe"],
        vec!["check", "--model", &good_m],
        vec!["bench", "nosuch"],
        vec!["frobnicate"],
        vec![],
    ];
    for args in cases {
        let out = hpstl(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}: {}", stderr(&out));
        assert!(!stderr(&out).is_empty(), "{args:?}");
    }
}

#[test]
fn truncation_policy_count_error() {
    let f = scratch("late.hpstl", "P{x}(F[0,50] q@x) > 0.5\n");
    let out = check(&f, &["--horizon", "1", "--truncation-policy", "count-error"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("horizon"), "{}", stderr(&out));
    let out = check(&f, &["--horizon", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
}

#[test]
fn dump_trace_goes_to_stderr() {
    let out = check(&bench("thermostat/sens_d1.1_e0.05.hpstl"), &["--dump-trace", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let err = stderr(&out);
    assert!(err.lines().next().unwrap().starts_with("t=0 "), "{err}");
    assert!(err.lines().count() > 2);
}

#[test]
fn help_and_version_exit_zero() {
    for flag in ["--help", "--version"] {
        let out = hpstl(&[flag]);
        assert_eq!(out.status.code(), Some(0));
    }
    let help = String::from_utf8(hpstl(&["check", "--help"]).stdout).unwrap();
    for flag in ["--alpha", "--batch", "--horizon", "--seed", "--max-samples", "--report", "--trace-stats", "--truncation-policy", "--dump-trace"] {
        assert!(help.contains(flag), "{flag}");
    }
    assert!(help.contains("[default: 10]"));
}

#[test]
fn bench_stats_unit_passes() {
    let out = hpstl(&["bench", "stats-unit"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().all(|l| l.starts_with("PASS")), "{text}");
}

#[test]
fn bench_example1_json() {
    let out = hpstl(&["bench", "example1", "--reps", "3", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["majority"], "true");
    assert_eq!(rows[1]["majority"], "false");
    assert_eq!(rows[0]["runs"].as_array().unwrap().len(), 3);
}
