//! End-to-end tests of the slicebox binary: flags, formats, exit codes, and
//! the sample -> diagnose round trip.

use std::collections::HashMap;
use std::path::Path;
use std::process::{Command, Output};

fn slicebox(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slicebox"))
        .args(args)
        .env_remove("SLICEBOX_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

/// Report text lines are `name<spaces>value`.
fn report_fields(text: &str) -> HashMap<String, String> {
    text.lines()
        .filter_map(|l| {
            let mut parts = l.split_whitespace();
            Some((parts.next()?.to_string(), parts.next()?.to_string()))
        })
        .collect()
}

#[test]
fn sample_gamma_writes_csv_and_report() {
    let out = slicebox(&[
        "sample", "--target", "gamma51", "--method", "positive", "--x0", "1", "--n", "20000",
        "--seed", "1",
    ]);
    assert_eq!(exit_code(&out), 0);
    let body = stdout(&out);
    let mut lines = body.lines();
    assert_eq!(lines.next().unwrap(), "t,x,n_evals,n_shrinks");
    assert_eq!(lines.count(), 20000);
    let fields = report_fields(&stderr(&out));
    let mean: f64 = fields["mean"].parse().unwrap();
    assert!((4.9..=5.1).contains(&mean), "mean = {mean}");
}

#[test]
fn sample_expression_target_reaches_distant_mode() {
    let out = slicebox(&[
        "sample",
        "--target",
        "expr:exp(-(x-500)^2/10)",
        "--method",
        "unbounded",
        "--x0",
        "0",
        "--n",
        "10000",
        "--seed",
        "1",
        "--out",
        "/dev/null",
    ]);
    assert_eq!(exit_code(&out), 0);
    let fields = report_fields(&stderr(&out));
    let mean: f64 = fields["mean"].parse().unwrap();
    assert!((499.0..=501.0).contains(&mean), "mean = {mean}");
}

#[test]
fn golden_first_rows_for_fixed_seed() {
    let out = slicebox(&[
        "sample", "--target", "gamma51", "--method", "positive", "--x0", "1", "--n", "3",
        "--burn-in", "0", "--seed", "1",
    ]);
    assert_eq!(
        stdout(&out),
        "t,x,n_evals,n_shrinks\n\
         1,1.6953463734041743,3,2\n\
         2,3.8240984273032046,2,2\n\
         3,8.424722875224115,2,2\n"
    );
}

#[test]
fn thinning_keeps_every_kth_row() {
    let out = slicebox(&[
        "sample", "--target", "gamma51", "--method", "positive", "--n", "100", "--burn-in", "0",
        "--seed", "2", "--thin", "10",
    ]);
    let body = stdout(&out);
    let rows: Vec<&str> = body.lines().skip(1).collect();
    assert_eq!(rows.len(), 10);
    assert!(rows[0].starts_with("1,"));
    assert!(rows[1].starts_with("11,"));
}

#[test]
fn json_draw_format() {
    let out = slicebox(&[
        "sample", "--target", "gamma51", "--method", "positive", "--n", "3", "--burn-in", "0",
        "--seed", "1", "--format", "json",
    ]);
    let body = stdout(&out);
    assert!(body.trim_start().starts_with('['));
    assert!(body.contains("\"t\": 1"));
    assert!(body.contains("\"n_shrinks\""));
    assert!(body.trim_end().ends_with(']'));
}

#[test]
fn bounded_without_bounds_is_usage_error() {
    let out = slicebox(&["sample", "--method", "bounded", "--target", "gamma51"]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("--bounds"));
}

#[test]
fn method_parameter_mismatches_are_usage_errors() {
    let out = slicebox(&[
        "sample", "--method", "positive", "--target", "gamma51", "--a", "100",
    ]);
    assert_eq!(exit_code(&out), 2);
    let out = slicebox(&[
        "sample", "--method", "unbounded", "--target", "gmm", "--width", "1",
    ]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn unknown_target_lists_the_registry() {
    let out = slicebox(&["sample", "--target", "nosuch", "--method", "unbounded"]);
    assert_eq!(exit_code(&out), 2);
    let msg = stderr(&out);
    assert!(msg.contains("nosuch") && msg.contains("gamma51"), "{msg}");
}

#[test]
fn stepout_on_positive_target_is_rejected() {
    let out = slicebox(&["sample", "--target", "gamma51", "--method", "stepout"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn sampler_state_errors_exit_one() {
    // x0 far beyond the sigmoid map's resolution is a state error, not a
    // usage error.
    let out = slicebox(&[
        "sample", "--target", "gauss1000", "--method", "unbounded", "--x0", "40000",
    ]);
    assert_eq!(exit_code(&out), 1);
    assert!(stderr(&out).contains("rescale"), "{}", stderr(&out));
}

#[test]
fn unknown_scenario_lists_available_names() {
    let out = slicebox(&["compare", "--scenario", "nosuch"]);
    assert_eq!(exit_code(&out), 2);
    let msg = stderr(&out);
    for name in ["fig2a", "fig2b", "fig2c", "fig3a", "fig3b", "fig4"] {
        assert!(msg.contains(name), "missing {name} in {msg}");
    }
}

#[test]
fn compare_fig4_emits_table_and_is_deterministic() {
    let a = slicebox(&["compare", "--scenario", "fig4", "--seed", "3"]);
    assert_eq!(exit_code(&a), 0);
    let text = stdout(&a);
    assert!(text.contains("unbounded"));
    assert!(text.contains("stepout"));
    assert!(text.contains("mode_occupancy"));
    let b = slicebox(&["compare", "--scenario", "fig4", "--seed", "3"]);
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn compare_scenario_file_works() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("custom.scn");
    std::fs::write(
        &path,
        "name = custom\ntarget = gauss500\nmethods = unbounded\nn = 1000\nseed = 9\n",
    )
    .unwrap();
    let out = slicebox(&["compare", "--scenario-file", path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0);
    assert!(stdout(&out).contains("scenario custom"));
}

#[test]
fn compare_handles_mixed_methods_with_bounds() {
    // Bounds apply to the bounded run only; the other methods must not
    // reject the scenario over them.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mixed.scn");
    std::fs::write(
        &path,
        "name = mixed\ntarget = gamma51\nmethods = bounded, positive\n\
         bounds = 0.001, 40\nn = 2000\nseed = 9\nreference = gamma51\n",
    )
    .unwrap();
    let out = slicebox(&["compare", "--scenario-file", path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("[bounded]") && text.contains("[positive]"), "{text}");
}

#[test]
fn all_shipped_scenarios_run() {
    for name in ["fig2a", "fig2b", "fig2c", "fig3a", "fig3b", "fig4"] {
        let out = slicebox(&["compare", "--scenario", name]);
        assert_eq!(exit_code(&out), 0, "{name}: {}", stderr(&out));
        let text = stdout(&out);
        assert!(text.contains(&format!("scenario {name}")), "{name}");
        assert!(text.contains("mean_shrinks"), "{name}");
    }
}

#[test]
fn seed_env_var_is_a_fallback() {
    let run = |args: &[&str], env_seed: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_slicebox"));
        cmd.args(args).env_remove("SLICEBOX_SEED");
        if let Some(seed) = env_seed {
            cmd.env("SLICEBOX_SEED", seed);
        }
        cmd.output().unwrap()
    };
    let base = ["sample", "--target", "gamma51", "--method", "positive", "--n", "50",
        "--burn-in", "0"];
    let with_flag: Vec<&str> = base.iter().copied().chain(["--seed", "17"]).collect();
    let by_flag = run(&with_flag, None);
    let by_env = run(&base, Some("17"));
    assert_eq!(by_flag.stdout, by_env.stdout);
    // An explicit flag wins over the environment.
    let flag_wins = run(&with_flag, Some("99"));
    assert_eq!(flag_wins.stdout, by_flag.stdout);
}

fn write_run(dir: &Path, name: &str, extra: &[&str]) -> std::path::PathBuf {
    let path = dir.join(name);
    let mut args = vec![
        "sample", "--target", "gauss500", "--method", "unbounded", "--x0", "1", "--n", "10000",
        "--seed", "1", "--out",
    ];
    args.push(path.to_str().unwrap());
    args.extend_from_slice(extra);
    let out = slicebox(&args);
    assert_eq!(exit_code(&out), 0);
    path
}

#[test]
fn diagnose_round_trip_reproduces_moments_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("report.json");
    let csv = write_run(
        dir.path(),
        "run.csv",
        &["--report", report_path.to_str().unwrap()],
    );
    let original = report_fields(&stderr(&slicebox(&[
        "sample", "--target", "gauss500", "--method", "unbounded", "--x0", "1", "--n", "10000",
        "--seed", "1", "--out", "/dev/null",
    ])));
    let diag = slicebox(&[
        "diagnose", "--in", csv.to_str().unwrap(), "--reference", "gauss500",
    ]);
    assert_eq!(exit_code(&diag), 0, "{}", stderr(&diag));
    let recomputed = report_fields(&stdout(&diag));
    for field in ["mean", "variance", "mean_shrinks"] {
        assert_eq!(original[field], recomputed[field], "field {field}");
    }
    assert!(recomputed["ks_stat"].len() > 1);
    // The JSON report was written and has the stable field names.
    let json = std::fs::read_to_string(&report_path).unwrap();
    assert!(json.contains("\"mean_shrinks\""));
}

#[test]
fn diagnose_detects_corrupt_csv_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "t,x,n_evals,n_shrinks\n1,1.0,2,2\n2,not-a-number,2,2\n").unwrap();
    let out = slicebox(&["diagnose", "--in", path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 1);
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
}

#[test]
fn diagnose_flags_degenerate_data_against_reference() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("zeros.csv");
    let mut body = String::from("t,x,n_evals,n_shrinks\n");
    for t in 1..=1000 {
        body.push_str(&format!("{t},0,1,1\n"));
    }
    std::fs::write(&path, body).unwrap();
    let out = slicebox(&[
        "diagnose", "--in", path.to_str().unwrap(), "--reference", "gauss500",
    ]);
    assert_eq!(exit_code(&out), 1);
    assert!(stdout(&out).contains("FAIL"), "{}", stdout(&out));
}

#[test]
fn identical_command_lines_produce_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_run(dir.path(), "a.csv", &[]);
    let b = write_run(dir.path(), "b.csv", &[]);
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}
