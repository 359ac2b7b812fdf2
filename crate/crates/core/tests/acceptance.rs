//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line. Run with `cargo test --test acceptance -- --nocapture` to see
//! the lines.

use quickselect_dickman::coupling::{adjacent_diff_estimate, estimate_coupling_gap};
use quickselect_dickman::dickman::{sample_dickman, DickmanParams};
use quickselect_dickman::exact::{
    exact_pmf, expected_count, expected_count_f64, expected_count_special_f64, for_each_pmf_up_to,
    HarmonicTable,
};
use quickselect_dickman::lemmas::{
    extremal_averaged_tail, extremal_weighted, floor_commutation_check, RecurrenceKind,
    RecurrenceSpec,
};
use quickselect_dickman::metrics::{lower_bound_thm, mean_gap_lower, upper_bound_thm};
use quickselect_dickman::quickselect::{sample_count_recursion, select_count_array};
use quickselect_dickman::report::estimate_d1;
use quickselect_dickman::rng::RandomStream;
use quickselect_dickman::stats::{chi_square_gof, histogram, mean_with_ci3};

const SEED: u64 = 20260810;

fn criterion_stream(index: u64) -> RandomStream {
    RandomStream::new(SEED).split(index)
}

fn report(criterion: u32, label: &str, passed: bool, detail: &str) {
    println!(
        "criterion {criterion:02} ({label}): {}: {detail}",
        if passed { "PASS" } else { "FAIL" }
    );
    assert!(passed, "criterion {criterion} ({label}) failed: {detail}");
}

#[test]
fn criterion_01_exact_mean_oracle_equality() {
    let mut table = HarmonicTable::new();
    let mut states = 0usize;
    let mut first_bad = None;
    for_each_pmf_up_to(60, |view| {
        states += 1;
        let formula = expected_count(&mut table, view.n(), view.m()).unwrap();
        if view.mean() != formula && first_bad.is_none() {
            first_bad = Some((view.n(), view.m()));
        }
    });
    report(
        1,
        "exact mean equality, zero tolerance",
        first_bad.is_none() && states == 60 * 61 / 2,
        &format!("{states} states with pmf mean identical to the closed form"),
    );
}

#[test]
fn criterion_02_specialization_equality() {
    let mut table = HarmonicTable::new();
    let mut worst: f64 = 0.0;
    for n in 1..=10_000usize {
        for m in 1..=4.min(n) {
            let special = expected_count_special_f64(&mut table, n, m).unwrap();
            let general = expected_count_f64(&mut table, n, m).unwrap();
            if general != 0.0 {
                worst = worst.max(((special - general) / general).abs());
            }
        }
    }
    report(
        2,
        "rank 1..4 specializations vs general formula",
        worst < 1e-10,
        &format!("worst relative deviation {worst:.3e} over n <= 10^4"),
    );
}

#[test]
fn criterion_03_linear_mean_bound() {
    let mut table = HarmonicTable::new();
    let mut min_slack = f64::INFINITY;
    for n in 1..=2000usize {
        for m in 1..=n {
            let slack = 4.0 * n as f64 - expected_count_f64(&mut table, n, m).unwrap();
            min_slack = min_slack.min(slack);
        }
    }
    report(
        3,
        "E[C] <= 4n for n <= 2000",
        min_slack >= 0.0,
        &format!("min(4n - E[C]) = {min_slack:.6}"),
    );
}

#[test]
fn criterion_04_upper_bound_reproduction_m1() {
    let root = criterion_stream(4);
    let mut lines = Vec::new();
    let mut ok = true;
    for (i, &n) in [8usize, 32, 128, 1024].iter().enumerate() {
        let cell = root.split(i as u64);
        let (d1_hat, ci) = estimate_d1(n, 1, 100_000, 60, 1e-6, &cell).unwrap();
        let bound = upper_bound_thm(n, 1);
        ok &= d1_hat - ci <= bound;
        lines.push(format!("n={n}: d1_hat={d1_hat:.5}+-{ci:.5} bound={bound:.5}"));
    }
    report(
        4,
        "d1(W_{n,1}, D) within the m=1 theorem bound",
        ok,
        &lines.join("; "),
    );
}

#[test]
fn criterion_05_upper_bound_reproduction_higher_m() {
    let root = criterion_stream(5);
    let mut lines = Vec::new();
    let mut ok = true;
    let mut idx = 0;
    for &m in &[2usize, 3, 5] {
        for &n in &[64usize, 256, 1024] {
            let cell = root.split(idx);
            idx += 1;
            let (d1_hat, ci) = estimate_d1(n, m, 100_000, 60, 1e-6, &cell).unwrap();
            let bound = upper_bound_thm(n, m);
            ok &= d1_hat - ci <= bound;
            lines.push(format!("n={n} m={m}: d1={d1_hat:.4} bound={bound:.4}"));
        }
    }
    report(
        5,
        "d1(W_{n,m}, D) within the m>=2 theorem bound",
        ok,
        &lines.join("; "),
    );
}

#[test]
fn criterion_06_lower_bound_reproduction() {
    let root = criterion_stream(6);
    let mut table = HarmonicTable::new();
    let mut lines = Vec::new();
    let mut ok = true;
    let mut idx = 0;
    for &m in &[1usize, 3, 4] {
        for &n in &[100usize, 1000, 10_000] {
            let cell = root.split(idx);
            idx += 1;
            let lower = lower_bound_thm(&mut table, n, m);
            let gap = mean_gap_lower(&mut table, n, m).unwrap();
            // Exact part: tolerance-free.
            let exact_ok = lower <= gap;
            // Monte Carlo part: the mean-gap bound must sit below the
            // empirical distance plus its allowance.
            let (d1_hat, ci) = estimate_d1(n, m, 100_000, 60, 1e-6, &cell).unwrap();
            let mc_ok = gap <= d1_hat + ci;
            ok &= exact_ok && mc_ok;
            lines.push(format!(
                "n={n} m={m}: lower={lower:.5} gap={gap:.5} d1={d1_hat:.5}+-{ci:.5}"
            ));
        }
    }
    report(
        6,
        "lower bound <= mean gap <= empirical d1",
        ok,
        &lines.join("; "),
    );
}

#[test]
fn criterion_07_coupling_gap_proof_chain() {
    let root = criterion_stream(7);
    let samples = 20_000;
    let mut lines = Vec::new();
    let mut ok = true;
    let mut idx = 0;
    for &n in &[4usize, 16, 64, 256, 1024] {
        let est = estimate_coupling_gap(n, 1, samples, &root.split(idx)).unwrap();
        idx += 1;
        let lhs = n as f64 * (est.gap - est.ci3);
        let bound = 4.0 * (std::f64::consts::E * n as f64 / 2.0).ln() + 1.0;
        ok &= lhs <= bound;
        lines.push(format!("m=1 n={n}: {lhs:.2} <= {bound:.2}"));
    }
    for &m in &[2usize, 3] {
        for &n in &[64usize, 256] {
            let est = estimate_coupling_gap(n, m, samples, &root.split(idx)).unwrap();
            idx += 1;
            let lhs = n as f64 * (est.gap - est.ci3);
            let mf = m as f64;
            let bound = (4.0 + 23.0 * mf) * (n as f64 * std::f64::consts::E / mf).ln() + 4.0 * mf;
            ok &= lhs <= bound;
            lines.push(format!("m={m} n={n}: {lhs:.2} <= {bound:.2}"));
        }
    }
    report(
        7,
        "n E|W*-W| within the proof-chain bounds",
        ok,
        &lines.join("; "),
    );
}

#[test]
fn criterion_08_lemma_suite() {
    // Floor commutation: random triples, then the full rational grid.
    let mut s = criterion_stream(8);
    let mut violations = 0u64;
    for _ in 0..1_000_000 {
        let u1 = s.next_uniform();
        let u2 = s.next_uniform();
        let n = s.next_u64() % 1_000_001;
        if floor_commutation_check(u1, u2, n) > 1 {
            violations += 1;
        }
    }
    let mut grid_violations = 0u64;
    for n in 1..=500u64 {
        for k2 in 0..997u64 {
            let t2 = n * k2 / 997;
            for k1 in 0..997u64 {
                let t1 = n * k1 / 997;
                if (k1 * t2 / 997).abs_diff(k2 * t1 / 997) > 1 {
                    grid_violations += 1;
                }
            }
        }
    }

    // Extremal recurrences to horizon 1e5 with roundoff slack -1e-9.
    let mut min_slack = f64::INFINITY;
    for (c, q) in [(4.0, 2usize), (1.0, 1)] {
        let check = extremal_averaged_tail(&RecurrenceSpec {
            kind: RecurrenceKind::AveragedTail { q },
            c,
            horizon: 100_000,
        })
        .unwrap();
        min_slack = min_slack.min(check.min_slack);
    }
    for c in [1.0, 25.0] {
        let check = extremal_weighted(&RecurrenceSpec {
            kind: RecurrenceKind::WeightedK,
            c,
            horizon: 100_000,
        })
        .unwrap();
        min_slack = min_slack.min(check.min_slack);
    }

    report(
        8,
        "floor commutation and extremal recurrences",
        violations == 0 && grid_violations == 0 && min_slack >= -1e-9,
        &format!(
            "random violations={violations}, grid violations={grid_violations}, \
             min recurrence slack={min_slack:.3e}"
        ),
    );
}

#[test]
fn criterion_09_adjacent_size_difference() {
    let root = criterion_stream(9);
    let samples = 10_000;
    let mut ok = true;
    let mut worst = f64::NEG_INFINITY;
    let mut worst_at = (0usize, 0usize);
    for (mi, &m) in [1usize, 2, 3].iter().enumerate() {
        let limit = if m == 1 { 2.0 } else { 2.0 + 16.0 * m as f64 };
        let stream = root.split(mi as u64);
        for p in 2..=100usize {
            let est = adjacent_diff_estimate(p, m, samples, &stream.split(p as u64)).unwrap();
            let excess = est.mean - est.ci3 - limit;
            if excess > worst {
                worst = excess;
                worst_at = (p, m);
            }
            ok &= excess <= 0.0;
        }
    }
    report(
        9,
        "E|C(p)-C(p-1)| within 2 (m=1) and 2+16m (m=2,3)",
        ok,
        &format!(
            "worst (estimate - 3sigma - limit) = {worst:.4} at p={}, m={}",
            worst_at.0, worst_at.1
        ),
    );
}

#[test]
fn criterion_10_dickman_sampler_moments_and_contraction() {
    let mut s = criterion_stream(10);
    let params = DickmanParams::new(1.0, 60).unwrap();
    let n = 1_000_000usize;
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    let mut sum4 = 0.0;
    for _ in 0..n {
        let w = sample_dickman(&params, &mut s);
        sum += w;
        sum2 += w * w;
        sum4 += w.powi(4);
    }
    let nf = n as f64;
    let mean = sum / nf;
    let m2 = sum2 / nf;
    let mean_tol = 3.0 * ((m2 - mean * mean) / nf).sqrt() + 2f64.powi(-60);
    let m2_tol = 3.0 * ((sum4 / nf - m2 * m2) / nf).sqrt();
    let moments_ok = (mean - 1.0).abs() <= mean_tol && (m2 - 1.5).abs() <= m2_tol;

    // Coupled iterates share uniforms, so each step multiplies the gap by
    // u^{1/theta}; the residual against theta/(theta+1) is mean-zero.
    let mut contraction_ok = true;
    for theta in [0.5f64, 1.0, 2.0] {
        let ratio = theta / (theta + 1.0);
        let paths = 200_000usize;
        let mut gap = vec![1.0f64; paths];
        let mut stream = criterion_stream(10).split(theta.to_bits());
        for _ in 0..30 {
            let mut residuals = Vec::with_capacity(paths);
            for g in gap.iter_mut() {
                let mult = stream.next_uniform().powf(1.0 / theta);
                residuals.push((mult - ratio) * *g);
                *g *= mult;
            }
            let est = mean_with_ci3(&residuals);
            contraction_ok &= est.mean <= est.ci3;
        }
    }
    report(
        10,
        "sampler moments and coupled contraction",
        moments_ok && contraction_ok,
        &format!(
            "mean={mean:.6} (tol {mean_tol:.6}), second moment={m2:.6} (tol {m2_tol:.6}), \
             contraction residuals within 3 sigma"
        ),
    );
}

#[test]
fn criterion_11_engine_cross_validation() {
    let root = criterion_stream(11);
    let runs = 100_000usize;
    let mut ok = true;
    let mut checked = 0;
    let mut detail = String::new();
    let mut idx = 0;
    for n in 1..=8usize {
        for m in 1..=n {
            let pmf = exact_pmf(n, m).unwrap();
            let expected = pmf.atoms_f64();
            let data: Vec<f64> = (1..=n).map(|i| i as f64).collect();

            let mut s = root.split(idx);
            idx += 1;
            let arr: Vec<u64> = (0..runs)
                .map(|_| select_count_array(&data, m, &mut s).unwrap().comparisons)
                .collect();
            let chi_arr = chi_square_gof(&histogram(&arr), &expected, 1e-3);

            let mut s = root.split(idx);
            idx += 1;
            let rec: Vec<u64> = (0..runs)
                .map(|_| sample_count_recursion(n, m, &mut s).unwrap())
                .collect();
            let chi_rec = chi_square_gof(&histogram(&rec), &expected, 1e-3);

            checked += 2;
            if !chi_arr.pass || !chi_rec.pass {
                ok = false;
                detail = format!(
                    "n={n} m={m}: array stat {:.2}/{:.2}, recursion stat {:.2}/{:.2}",
                    chi_arr.statistic, chi_arr.critical, chi_rec.statistic, chi_rec.critical
                );
            }
        }
    }
    if ok {
        detail = format!("{checked} chi-square tests consistent with the exact pmf");
    }
    report(11, "array and recursion engines match exact pmf", ok, &detail);
}
