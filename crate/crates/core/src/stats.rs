//! Shared statistical machinery: sample summaries, chi-square goodness of
//! fit against an exact law, and the two-sample Kolmogorov-Smirnov test.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Sample mean together with a 3-sigma confidence radius for the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub ci3: f64,
    pub samples: usize,
}

pub fn mean_with_ci3(values: &[f64]) -> MeanEstimate {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    MeanEstimate {
        mean,
        ci3: 3.0 * (var / n as f64).sqrt(),
        samples: n,
    }
}

/// Chi-square goodness-of-fit outcome.
#[derive(Debug, Clone)]
pub struct ChiSquareOutcome {
    pub statistic: f64,
    pub dof: usize,
    pub critical: f64,
    pub pass: bool,
}

/// Test observed atom counts against exact probabilities at the given
/// significance. Adjacent cells with expected count below 5 are pooled;
/// any observation outside the support fails outright.
pub fn chi_square_gof(
    observed: &[(f64, u64)],
    expected: &[(f64, f64)],
    significance: f64,
) -> ChiSquareOutcome {
    let total: u64 = observed.iter().map(|&(_, c)| c).sum();
    let mut obs_map: std::collections::BTreeMap<u64, u64> = std::collections::BTreeMap::new();
    for &(x, c) in observed {
        obs_map.insert(x.to_bits(), c);
    }
    let support: std::collections::BTreeSet<u64> =
        expected.iter().map(|&(x, _)| x.to_bits()).collect();
    let stray: u64 = observed
        .iter()
        .filter(|(x, _)| !support.contains(&x.to_bits()))
        .map(|&(_, c)| c)
        .sum();
    if stray > 0 {
        return ChiSquareOutcome {
            statistic: f64::INFINITY,
            dof: expected.len().saturating_sub(1),
            critical: 0.0,
            pass: false,
        };
    }

    // Pool cells until each pooled expectation reaches 5.
    let mut cells: Vec<(f64, f64)> = Vec::new(); // (observed, expected)
    let mut acc_o = 0.0;
    let mut acc_e = 0.0;
    for &(x, p) in expected {
        acc_o += obs_map.get(&x.to_bits()).copied().unwrap_or(0) as f64;
        acc_e += p * total as f64;
        if acc_e >= 5.0 {
            cells.push((acc_o, acc_e));
            acc_o = 0.0;
            acc_e = 0.0;
        }
    }
    if acc_e > 0.0 || acc_o > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += acc_o;
                last.1 += acc_e;
            }
            None => cells.push((acc_o, acc_e)),
        }
    }

    if cells.len() < 2 {
        // Degenerate law: pass iff all mass sat on the support.
        return ChiSquareOutcome {
            statistic: 0.0,
            dof: 0,
            critical: 0.0,
            pass: true,
        };
    }

    let statistic: f64 = cells
        .iter()
        .map(|&(o, e)| {
            let d = o - e;
            d * d / e
        })
        .sum();
    let dof = cells.len() - 1;
    let critical = ChiSquared::new(dof as f64)
        .unwrap()
        .inverse_cdf(1.0 - significance);
    ChiSquareOutcome {
        statistic,
        dof,
        critical,
        pass: statistic <= critical,
    }
}

/// Build atom counts from integer-valued samples.
pub fn histogram(samples: &[u64]) -> Vec<(f64, u64)> {
    let mut map: std::collections::BTreeMap<u64, u64> = std::collections::BTreeMap::new();
    for &s in samples {
        *map.entry(s).or_insert(0) += 1;
    }
    map.into_iter().map(|(k, v)| (k as f64, v)).collect()
}

/// Two-sample Kolmogorov-Smirnov outcome.
#[derive(Debug, Clone)]
pub struct KsOutcome {
    pub statistic: f64,
    pub critical: f64,
    pub pass: bool,
}

/// Two-sample KS test at the given significance, using the asymptotic
/// critical value `c(a) * sqrt((n+m)/(nm))` with `c(a) = sqrt(-ln(a/2)/2)`.
pub fn ks_two_sample(x: &mut [f64], y: &mut [f64], significance: f64) -> KsOutcome {
    x.sort_by(|a, b| a.partial_cmp(b).unwrap());
    y.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (n, m) = (x.len(), y.len());
    let mut i = 0;
    let mut j = 0;
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let t = x[i].min(y[j]);
        while i < n && x[i] <= t {
            i += 1;
        }
        while j < m && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let c = (-(significance / 2.0).ln() / 2.0).sqrt();
    let critical = c * ((n + m) as f64 / (n as f64 * m as f64)).sqrt();
    KsOutcome {
        statistic: d,
        critical,
        pass: d <= critical,
    }
}
