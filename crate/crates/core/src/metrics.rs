//! Wasserstein-1 distance and the closed-form distance bounds.
//!
//! In one dimension the optimal coupling of two equal-size empirical
//! measures pairs order statistics, and the distance between two
//! finitely-supported laws is the integral of the CDF gap over the merged
//! support; both are computed exactly here, no transport solver involved.

use crate::error::{Error, Result};
use crate::exact::HarmonicTable;

/// An empirical distribution: a non-decreasing vector of finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDist {
    values: Vec<f64>,
}

impl EmpiricalDist {
    /// Sorts the input. Non-finite values are rejected.
    pub fn from_unsorted(mut values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "empirical distributions require finite values".into(),
            ));
        }
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(EmpiricalDist { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Exact d1 between two equal-size empirical measures: the mean absolute
/// difference of paired order statistics.
pub fn w1_sorted_samples(x: &EmpiricalDist, y: &EmpiricalDist) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::SizeMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::InsufficientSamples { min: 1, got: 0 });
    }
    let total: f64 = x
        .values
        .iter()
        .zip(&y.values)
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(total / x.len() as f64)
}

/// Upper bound on the sampling standard deviation of
/// `w1_sorted_samples(x, y)` for independent samples:
/// `std(int |F_x - F_y|) <= int std(F_x(t) - F_y(t)) dt` by Minkowski's
/// integral inequality, and folding only shrinks variance, so the
/// binomial plug-in `int sqrt((F_x(1-F_x) + F_y(1-F_y))/N) dt` dominates.
pub fn w1_sampling_std_bound(x: &EmpiricalDist, y: &EmpiricalDist) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::SizeMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::InsufficientSamples { min: 1, got: 0 });
    }
    let n = x.len() as f64;
    let (xs, ys) = (x.values(), y.values());
    let mut i = 0usize;
    let mut j = 0usize;
    let mut prev: Option<f64> = None;
    let mut total = 0.0;
    while i < xs.len() || j < ys.len() {
        let t = match (xs.get(i), ys.get(j)) {
            (Some(&a), Some(&b)) => a.min(b),
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => unreachable!(),
        };
        if let Some(t0) = prev {
            let f_x = i as f64 / n;
            let f_y = j as f64 / n;
            let var = (f_x * (1.0 - f_x) + f_y * (1.0 - f_y)) / n;
            total += var.sqrt() * (t - t0);
        }
        while i < xs.len() && xs[i] <= t {
            i += 1;
        }
        while j < ys.len() && ys[j] <= t {
            j += 1;
        }
        prev = Some(t);
    }
    Ok(total)
}

/// A finitely-supported law: atoms sorted by position with merged
/// duplicates and positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDist {
    atoms: Vec<(f64, f64)>,
}

impl DiscreteDist {
    pub fn new(mut atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidParameter("law needs at least one atom".into()));
        }
        for &(x, p) in &atoms {
            if !x.is_finite() || !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "bad atom ({x}, {p})"
                )));
            }
        }
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (x, p) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == x => last.1 += p,
                _ => merged.push((x, p)),
            }
        }
        Ok(DiscreteDist { atoms: merged })
    }

    pub fn point_mass(x: f64) -> Self {
        DiscreteDist {
            atoms: vec![(x, 1.0)],
        }
    }

    /// The uniform empirical law of a sample set.
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        let w = 1.0 / samples.len() as f64;
        DiscreteDist::new(samples.iter().map(|&x| (x, w)).collect())
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }
}

/// Exact d1 between two finitely-supported laws: the integral of the CDF
/// gap over the merged support grid.
pub fn w1_discrete(p: &DiscreteDist, q: &DiscreteDist) -> f64 {
    let mut i = 0;
    let mut j = 0;
    let mut f_p: f64 = 0.0;
    let mut f_q: f64 = 0.0;
    let mut prev: Option<f64> = None;
    let mut total = 0.0;
    while i < p.atoms.len() || j < q.atoms.len() {
        let t = match (p.atoms.get(i), q.atoms.get(j)) {
            (Some(&(a, _)), Some(&(b, _))) => a.min(b),
            (Some(&(a, _)), None) => a,
            (None, Some(&(b, _))) => b,
            (None, None) => unreachable!(),
        };
        if let Some(t0) = prev {
            total += (f_p - f_q).abs() * (t - t0);
        }
        while i < p.atoms.len() && p.atoms[i].0 == t {
            f_p += p.atoms[i].1;
            i += 1;
        }
        while j < q.atoms.len() && q.atoms[j].0 == t {
            f_q += q.atoms[j].1;
            j += 1;
        }
        prev = Some(t);
    }
    total
}

/// The proved d1 upper bound for `W_{n,m}`:
/// `(8 log(n/2) + 10)/n` at `m = 1`, and
/// `((46m+8) log(n/m) + 54m+8)/n` for `m >= 2`.
pub fn upper_bound_thm(n: usize, m: usize) -> f64 {
    let nf = n as f64;
    if m == 1 {
        (8.0 * (nf / 2.0).ln() + 10.0) / nf
    } else {
        let mf = m as f64;
        ((46.0 * mf + 8.0) * (nf / mf).ln() + 54.0 * mf + 8.0) / nf
    }
}

/// The proved d1 lower bound, clamped at 0:
/// `2(|m-2| log n - |(m+2) h_m - 3|)/n`.
pub fn lower_bound_thm(table: &mut HarmonicTable, n: usize, m: usize) -> f64 {
    lower_bound_thm_raw(table, n, m).max(0.0)
}

/// Same bound without the clamp (negative for m = 2).
pub fn lower_bound_thm_raw(table: &mut HarmonicTable, n: usize, m: usize) -> f64 {
    let nf = n as f64;
    let h_m = table.value(m);
    2.0 * ((m as f64 - 2.0).abs() * nf.ln() - ((m as f64 + 2.0) * h_m - 3.0).abs()) / nf
}

/// The mean-gap lower bound `|E[C_{n,m}]/n - 2|`, which dominates the
/// clamped theorem bound.
pub fn mean_gap_lower(table: &mut HarmonicTable, n: usize, m: usize) -> Result<f64> {
    let mean = crate::exact::expected_count_f64(table, n, m)?;
    Ok((mean / n as f64 - 2.0).abs())
}

/// Per-(n, m) record comparing every bound to the empirical distance.
/// CSV column order is fixed:
/// `n,m,lower_raw,lower,mean_gap_lower,d1_hat,ci,coupling_upper,theorem_upper`.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub n: usize,
    pub m: usize,
    pub lower_raw: f64,
    pub lower: f64,
    pub mean_gap_lower: f64,
    pub d1_hat: f64,
    pub ci: f64,
    pub coupling_upper: f64,
    pub theorem_upper: f64,
    /// Substream path of the root used for this row's estimates.
    pub path: Vec<u64>,
}

impl BoundReport {
    /// The sandwich this row must satisfy, with the CI as slack on the
    /// Monte Carlo side.
    pub fn sandwich_holds(&self) -> bool {
        self.lower <= self.mean_gap_lower
            && self.mean_gap_lower <= self.d1_hat + self.ci
            && self.d1_hat - self.ci <= self.theorem_upper
            && self.lower <= self.theorem_upper
    }
}
