//! End-to-end checks of the `qsd` binary: output schemas, exit codes,
//! and reproducibility.

use std::process::{Command, Output};

fn qsd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn exact_mean_json_and_csv() {
    let out = qsd(&["exact-mean", "--n", "3", "--m", "2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("\"mean_exact\":\"8/3\""), "{text}");
    assert!(text.contains("2.6666666666666665e0"), "{text}");

    let out = qsd(&["exact-mean", "--n", "3", "--m", "2", "--format", "csv"]);
    let text = stdout(&out);
    assert!(text.starts_with("n,m,mean_exact,mean\n"), "{text}");
    assert!(text.contains("3,2,8/3,"), "{text}");
}

#[test]
fn exact_pmf_csv_columns() {
    let out = qsd(&["exact-pmf", "--n", "3", "--m", "1", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "count,probability,probability_exact");
    assert_eq!(lines[1], "2,0.6666666666666666,2/3");
    assert_eq!(lines[2], "3,0.3333333333333333,1/3");
}

#[test]
fn exact_pmf_respects_size_cap() {
    let out = qsd(&["exact-pmf", "--n", "250", "--m", "1"]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("exceeds"), "{err}");
}

#[test]
fn simulate_runs_deterministically() {
    let args = [
        "simulate", "--n", "6", "--m", "2", "--samples", "50", "--seed", "7", "--format", "csv",
    ];
    let a = qsd(&args);
    let b = qsd(&args);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(stdout(&a).lines().count(), 51);

    let hist = qsd(&[
        "simulate", "--n", "6", "--m", "2", "--samples", "50", "--seed", "7", "--format", "csv",
        "--histogram",
    ]);
    let text = stdout(&hist);
    assert!(text.starts_with("count,occurrences\n"), "{text}");
}

#[test]
fn simulate_array_engine_matches_interface() {
    let out = qsd(&[
        "simulate", "--n", "4", "--m", "1", "--samples", "10", "--engine", "array",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("\"engine\":\"array\""));
}

#[test]
fn dickman_sample_reports_depth() {
    let out = qsd(&[
        "dickman-sample", "--theta", "1.0", "--eps", "0.00000095367431640625", "--samples", "3",
    ]);
    assert!(out.status.success());
    // eps = 2^-20 at theta 1 needs exactly depth 20.
    assert!(stdout(&out).contains("\"depth\":20"), "{}", stdout(&out));
}

#[test]
fn coupling_emits_required_json_keys() {
    let out = qsd(&["coupling", "--n", "8", "--m", "1", "--samples", "500"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for key in ["gap_estimate", "ci", "d1_upper_estimate"] {
        assert!(text.contains(&format!("\"{key}\":")), "{text}");
    }
}

#[test]
fn bounds_csv_header_is_pinned() {
    let out = qsd(&[
        "bounds", "--n-list", "8", "--m-list", "1", "--samples", "2000", "--format", "csv",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(
        text.starts_with("n,m,lower_raw,lower,mean_gap_lower,d1_hat,ci,coupling_upper,theorem_upper\n"),
        "{text}"
    );
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn bounds_empty_list_gives_empty_table_exit_zero() {
    let out = qsd(&["bounds", "--samples", "100", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 1, "{text}");
}

#[test]
fn bounds_invalid_cell_continues() {
    let out = qsd(&[
        "bounds", "--n-list", "2,8", "--m-list", "3", "--samples", "1000", "--format", "csv",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    // n=2 < m=3 is skipped with a warning; n=8 row is present.
    assert_eq!(text.lines().count(), 2, "{text}");
    assert!(text.lines().nth(1).unwrap().starts_with("8,3,"));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("skipped n=2 m=3"), "{err}");
}

#[test]
fn bounds_json_numbers_have_seventeen_digits() {
    let out = qsd(&[
        "bounds", "--n-list", "8", "--m-list", "1", "--samples", "1000", "--seed", "3",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("\"theorem_upper\":2.6362943611198908e0"), "{text}");
    assert!(text.contains("\"path\":[8,1]"), "{text}");
}

#[test]
fn bounds_runs_are_reproducible_and_thread_independent() {
    let base = [
        "bounds", "--n-list", "4,8", "--m-list", "1,2", "--samples", "2000", "--seed", "11",
        "--format", "csv",
    ];
    let a = qsd(&base);
    let b = qsd(&base);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));

    let mut threaded = base.to_vec();
    threaded.extend(["--threads", "3"]);
    let c = qsd(&threaded);
    assert_eq!(stdout(&a), stdout(&c));
}

#[test]
fn verify_lemmas_passes_quickly() {
    let out = qsd(&[
        "verify-lemmas", "--horizon", "5000", "--trials", "20000", "--quick", "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("lemma,instance,status,detail\n"), "{text}");
    assert_eq!(text.matches(",pass,").count(), 6, "{text}");
}

#[test]
fn quick_suite_exits_zero_and_corruption_exits_two() {
    let ok = qsd(&["suite", "--quick", "--format", "csv"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));

    let bad = qsd(&["suite", "--quick", "--corrupt-harmonic"]);
    assert_eq!(bad.status.code(), Some(2));
    let err = String::from_utf8_lossy(&bad.stderr).into_owned();
    assert!(err.contains("knuth_mean_equality"), "{err}");
}

#[test]
fn usage_errors_exit_three() {
    let out = qsd(&["simulate", "--n", "4"]);
    assert_eq!(out.status.code(), Some(3));
    let out = qsd(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(3));
    let out = qsd(&["coupling", "--n", "2", "--m", "1", "--samples", "1"]);
    assert_eq!(out.status.code(), Some(3));
    let out = qsd(&["exact-mean", "--n", "50000", "--m", "1"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(qsd(&["--help"]).status.code(), Some(0));
    assert_eq!(qsd(&["--version"]).status.code(), Some(0));
}
