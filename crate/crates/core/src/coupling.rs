//! The explicit coupling `(W_n, W_n*)` behind the distance bounds, and
//! Monte Carlo estimators built on it.
//!
//! One draw uses a single uniform `u1` in two roles and a shared
//! continuation stream: `w` runs the count recursion with `u1` as its
//! first pivot fraction followed by the continuation uniforms, while
//! `w_star = u1 * (w' + 1)` with `w'` the normalized count driven by the
//! continuation stream alone. Marginally `w ~ W_{n,m}` and `w_star` has
//! the bias law of `W_{n,m}`; sharing the tail is exactly the proof's
//! construction and keeps the gap estimate tight.

use crate::error::{Error, Result};
use crate::quickselect::count_recursion_with;
use crate::rng::RandomStream;
use crate::stats::{mean_with_ci3, MeanEstimate};

/// One joint draw of `(W_{n,m}, W_{n,m}*)` on a shared probability space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledPair {
    pub n: usize,
    pub m: usize,
    pub w: f64,
    pub w_star: f64,
}

impl CoupledPair {
    pub fn gap(&self) -> f64 {
        (self.w_star - self.w).abs()
    }
}

/// Count draw whose first pivot fraction is `first` and whose remaining
/// levels consume `cont`.
fn count_with_first(n: usize, m: usize, first: f64, cont: &mut RandomStream) -> Result<u64> {
    let mut injected = Some(first);
    count_recursion_with(n, m, || match injected.take() {
        Some(u) => u,
        None => cont.next_uniform(),
    })
}

/// Draw one coupled pair. Consumes one uniform for `u1` and derives the
/// shared continuation substream from the stream's current position, so
/// successive calls are independent and replayable.
pub fn draw_coupled_pair(n: usize, m: usize, stream: &mut RandomStream) -> Result<CoupledPair> {
    if m == 0 {
        return Err(Error::InvalidRank(m));
    }
    if n < m {
        return Err(Error::InvalidParameter(format!(
            "coupling needs n >= m >= 1, got n={n}, m={m}"
        )));
    }
    let u1 = stream.next_uniform();
    let cont = stream.split(stream.position());

    let count_w = count_with_first(n, m, u1, &mut cont.clone())?;
    let count_prime = count_recursion_with(n, m, {
        let mut tail = cont;
        move || tail.next_uniform()
    })?;

    let nf = n as f64;
    Ok(CoupledPair {
        n,
        m,
        w: count_w as f64 / nf - 1.0,
        w_star: u1 * (count_prime as f64 / nf),
    })
}

/// Coupling-gap estimate with its 3-sigma radius and the implied d1 upper
/// estimate `2 * (gap + radius)` (theta = 1 in the distance inequality).
#[derive(Debug, Clone, Copy)]
pub struct GapEstimate {
    pub n: usize,
    pub m: usize,
    pub gap: f64,
    pub ci3: f64,
    pub d1_upper: f64,
    pub samples: usize,
}

/// Estimate `E|W* - W|` over `samples` independent pairs, each drawn from
/// its own child substream of `stream`.
pub fn estimate_coupling_gap(
    n: usize,
    m: usize,
    samples: usize,
    stream: &RandomStream,
) -> Result<GapEstimate> {
    if samples < 2 {
        return Err(Error::InsufficientSamples {
            min: 2,
            got: samples,
        });
    }
    let mut gaps = Vec::with_capacity(samples);
    for i in 0..samples {
        let mut sub = stream.split(i as u64);
        gaps.push(draw_coupled_pair(n, m, &mut sub)?.gap());
    }
    let MeanEstimate { mean, ci3, .. } = mean_with_ci3(&gaps);
    Ok(GapEstimate {
        n,
        m,
        gap: mean,
        ci3,
        d1_upper: 2.0 * (mean + ci3),
        samples,
    })
}

/// Draw the coupled pairs themselves (for marginal checks).
pub fn draw_coupled_pairs(
    n: usize,
    m: usize,
    samples: usize,
    stream: &RandomStream,
) -> Result<Vec<CoupledPair>> {
    (0..samples)
        .map(|i| {
            let mut sub = stream.split(i as u64);
            draw_coupled_pair(n, m, &mut sub)
        })
        .collect()
}

/// Shared-stream estimate of the adjacent-size difference
/// `E|C_m(p; U) - C_m(p-1; U)|`: both runs replay the same uniform
/// sequence, mirroring the single-sequence definition in the lemmas.
pub fn adjacent_diff_estimate(
    p: usize,
    m: usize,
    samples: usize,
    stream: &RandomStream,
) -> Result<MeanEstimate> {
    if p == 0 {
        return Err(Error::InvalidParameter("need p >= 1".into()));
    }
    if samples < 2 {
        return Err(Error::InsufficientSamples {
            min: 2,
            got: samples,
        });
    }
    let mut diffs = Vec::with_capacity(samples);
    for i in 0..samples {
        let sub = stream.split(i as u64);
        let c_p = count_recursion_with(p, m, {
            let mut s = sub.clone();
            move || s.next_uniform()
        })?;
        let c_pm1 = count_recursion_with(p - 1, m, {
            let mut s = sub;
            move || s.next_uniform()
        })?;
        diffs.push((c_p as f64 - c_pm1 as f64).abs());
    }
    Ok(mean_with_ci3(&diffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::exact_pmf;
    use crate::quickselect::sample_count_recursion;
    use crate::stats::{chi_square_gof, ks_two_sample};
    use num::ToPrimitive;

    #[test]
    fn degenerate_single_element_pair() {
        // C_1 = 0: w = -1 exactly, w_star = 0, gap = 1 on every draw.
        let root = RandomStream::new(1);
        for i in 0..50 {
            let mut s = root.split(i);
            let pair = draw_coupled_pair(1, 1, &mut s).unwrap();
            assert_eq!(pair.w, -1.0);
            assert_eq!(pair.w_star, 0.0);
            assert_eq!(pair.gap(), 1.0);
        }
        let est = estimate_coupling_gap(1, 1, 1000, &root.split(99)).unwrap();
        assert_eq!(est.gap, 1.0);
        assert_eq!(est.ci3, 0.0);
    }

    #[test]
    fn two_element_pair_closed_form() {
        // C_2 = 1 a.s.: w = -1/2, w_star = u1/2, E|w*-w| = 3/4.
        let root = RandomStream::new(2);
        let mut s = root.split(0);
        let pair = draw_coupled_pair(2, 1, &mut s).unwrap();
        assert_eq!(pair.w, -0.5);
        assert!(pair.w_star >= 0.0 && pair.w_star < 0.5);
        let est = estimate_coupling_gap(2, 1, 100_000, &root.split(1)).unwrap();
        assert!(
            (est.gap - 0.75).abs() < est.ci3,
            "gap {} ci {}",
            est.gap,
            est.ci3
        );
    }

    #[test]
    fn invalid_arguments_rejected() {
        let mut s = RandomStream::new(3);
        assert!(draw_coupled_pair(2, 0, &mut s).is_err());
        assert!(draw_coupled_pair(2, 3, &mut s).is_err());
        assert!(estimate_coupling_gap(4, 1, 1, &s).is_err());
    }

    #[test]
    fn w_marginal_matches_exact_pmf() {
        // n = 6, m = 2 against the exact law of (C - offset): compare raw
        // counts recovered from w = c/n - 1.
        let n = 6usize;
        let m = 2usize;
        let pmf = exact_pmf(n, m).unwrap();
        let expected: Vec<(f64, f64)> = pmf
            .atoms()
            .map(|(c, p)| (c as f64, p.to_f64().unwrap()))
            .collect();
        let root = RandomStream::new(40);
        let pairs = draw_coupled_pairs(n, m, 100_000, &root).unwrap();
        let counts: Vec<u64> = pairs
            .iter()
            .map(|p| ((p.w + 1.0) * n as f64).round() as u64)
            .collect();
        let out = chi_square_gof(&crate::stats::histogram(&counts), &expected, 1e-3);
        assert!(out.pass, "stat {} crit {}", out.statistic, out.critical);
    }

    #[test]
    fn w_star_marginal_matches_independent_bias_transform() {
        let n = 6usize;
        let m = 2usize;
        let root = RandomStream::new(41);
        let pairs = draw_coupled_pairs(n, m, 100_000, &root.split(0)).unwrap();
        let mut coupled: Vec<f64> = pairs.iter().map(|p| p.w_star).collect();

        // Independent construction: fresh u, fresh W draw.
        let mut s = root.split(1);
        let mut independent: Vec<f64> = (0..100_000)
            .map(|_| {
                let u = s.next_uniform();
                let c = sample_count_recursion(n, m, &mut s).unwrap();
                u * (c as f64 / n as f64)
            })
            .collect();
        let out = ks_two_sample(&mut coupled, &mut independent, 1e-3);
        assert!(out.pass, "D {} crit {}", out.statistic, out.critical);
    }

    #[test]
    fn coupled_floor_sizes_stay_adjacent() {
        // The first-level sizes floor(u1*floor(n*u2)) and
        // floor(u2*floor(n*u1)) differ by at most 1 on every draw.
        let mut s = RandomStream::new(17);
        for _ in 0..10_000 {
            let u1 = s.next_uniform();
            let u2 = s.next_uniform();
            let gap = crate::lemmas::floor_commutation_check(u1, u2, 1000);
            assert!(gap <= 1);
        }
    }

    #[test]
    fn adjacent_diff_small_cases() {
        let root = RandomStream::new(23);
        // p = 1: C_1 = 0 = C_0, difference identically zero.
        let est = adjacent_diff_estimate(1, 1, 100, &root.split(0)).unwrap();
        assert_eq!(est.mean, 0.0);
        // p = 2: |C_2 - C_1| = 1 always.
        let est = adjacent_diff_estimate(2, 1, 100, &root.split(1)).unwrap();
        assert_eq!(est.mean, 1.0);
    }
}
