//! The consistency suite at full (non-quick) horizons, plus the
//! fault-injection path.

use quickselect_dickman::report::{run_consistency_suite, SuiteOptions};

#[test]
fn full_suite_passes_on_the_default_seed() {
    let report = run_consistency_suite(&SuiteOptions::new(42));
    for check in &report.checks {
        println!(
            "{}: {}: {}",
            check.name,
            if check.passed { "PASS" } else { "FAIL" },
            check.detail
        );
    }
    assert!(
        report.passed(),
        "failing checks: {:?}",
        report
            .failures()
            .iter()
            .map(|c| c.name)
            .collect::<Vec<_>>()
    );
}

#[test]
fn large_cell_distance_sits_well_below_its_bound() {
    // n = 1024, m = 1 with 1e5 samples: even the upper edge of the
    // estimate stays under the closed-form bound (8 log(512) + 10)/1024.
    use quickselect_dickman::metrics::upper_bound_thm;
    use quickselect_dickman::report::estimate_d1;
    use quickselect_dickman::rng::RandomStream;

    let cell = RandomStream::new(42).split(1024).split(1);
    let (d1_hat, ci) = estimate_d1(1024, 1, 100_000, 60, 1e-6, &cell).unwrap();
    let bound = upper_bound_thm(1024, 1);
    assert!((bound - 0.0585).abs() < 5e-4);
    assert!(
        d1_hat + ci <= bound,
        "d1_hat {d1_hat} + ci {ci} vs bound {bound}"
    );
}

#[test]
fn corrupted_harmonic_table_is_detected() {
    let report = run_consistency_suite(&SuiteOptions {
        seed: 42,
        quick: true,
        corrupt_harmonic: true,
    });
    let knuth = report
        .checks
        .iter()
        .find(|c| c.name == "knuth_mean_equality")
        .expect("mean equality check present");
    assert!(!knuth.passed, "fault injection must break the equality");
}
