//! Deterministic verification of the analytic lemmas: the two
//! recurrence-to-bound inequalities on their extremal sequences, and the
//! floor-commutation inequality.
//!
//! Each recurrence is run at equality, the worst case its hypotheses
//! permit; any sequence satisfying the inequality form is dominated
//! pointwise by the extremal one, so a single run certifies the family.

use crate::error::{Error, Result};

/// Which recurrence family to verify.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RecurrenceKind {
    /// `e_n = c + (1/n) sum_{u=q}^{n-1} e_u`, bounded by `c log(en/q)`.
    AveragedTail { q: usize },
    /// `f_p = c + (1/(p(p-1))) sum_{k<p} k f_k`, `f_1 = 0`, bounded by `2c`.
    WeightedK,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecurrenceSpec {
    pub kind: RecurrenceKind,
    pub c: f64,
    pub horizon: usize,
}

/// Result of running an extremal sequence against its bound.
#[derive(Debug, Clone)]
pub struct RecurrenceCheck {
    pub values: Vec<f64>,
    /// `min_n (bound_n - value_n)` over the verified range.
    pub min_slack: f64,
    /// First index where the bound is violated beyond roundoff, if any.
    pub first_violation: Option<usize>,
}

const ROUNDOFF_SLACK: f64 = -1e-9;

/// Run `e_q = c`, `e_n = c + (1/n) sum_{u=q}^{n-1} e_u` up to the horizon
/// and compare against `c log(en/q) = c (1 + log(n/q))`.
pub fn extremal_averaged_tail(spec: &RecurrenceSpec) -> Result<RecurrenceCheck> {
    let q = match spec.kind {
        RecurrenceKind::AveragedTail { q } => q,
        RecurrenceKind::WeightedK => {
            return Err(Error::InvalidParameter(
                "extremal_averaged_tail needs an averaged-tail spec".into(),
            ))
        }
    };
    if q == 0 || spec.horizon < q || spec.c < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "need q >= 1, horizon >= q, c >= 0; got q={q}, horizon={h}, c={c}",
            h = spec.horizon,
            c = spec.c
        )));
    }
    let mut values = Vec::with_capacity(spec.horizon - q + 1);
    let mut tail_sum = 0.0;
    let mut min_slack = f64::INFINITY;
    let mut first_violation = None;
    for n in q..=spec.horizon {
        let e_n = spec.c + tail_sum / n as f64;
        let bound = spec.c * (1.0 + (n as f64 / q as f64).ln());
        let slack = bound - e_n;
        if slack < min_slack {
            min_slack = slack;
        }
        if slack < ROUNDOFF_SLACK && first_violation.is_none() {
            first_violation = Some(n);
        }
        values.push(e_n);
        tail_sum += e_n;
    }
    Ok(RecurrenceCheck {
        values,
        min_slack,
        first_violation,
    })
}

/// Run `f_1 = 0`, `f_p = c + (1/(p(p-1))) sum_{k<p} k f_k` up to the
/// horizon and compare against `2c`.
pub fn extremal_weighted(spec: &RecurrenceSpec) -> Result<RecurrenceCheck> {
    if spec.kind != RecurrenceKind::WeightedK {
        return Err(Error::InvalidParameter(
            "extremal_weighted needs a weighted-k spec".into(),
        ));
    }
    if spec.horizon < 1 || spec.c < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "need horizon >= 1, c >= 0; got horizon={h}, c={c}",
            h = spec.horizon,
            c = spec.c
        )));
    }
    let mut values = vec![0.0];
    let mut weighted_sum = 0.0; // sum_{k<=p} k f_k
    let mut min_slack = 2.0 * spec.c;
    let mut first_violation = None;
    for p in 2..=spec.horizon {
        let f_p = spec.c + weighted_sum / (p as f64 * (p as f64 - 1.0));
        let slack = 2.0 * spec.c - f_p;
        if slack < min_slack {
            min_slack = slack;
        }
        if slack < ROUNDOFF_SLACK && first_violation.is_none() {
            first_violation = Some(p);
        }
        values.push(f_p);
        weighted_sum += p as f64 * f_p;
    }
    Ok(RecurrenceCheck {
        values,
        min_slack,
        first_violation,
    })
}

/// `floor(k * u)` evaluated exactly: a double in [0,1) is the dyadic
/// rational `mant * 2^-shift`, so the floor is an integer shift. A rounded
/// `k * u` product could cross an integer boundary and manufacture
/// spurious gaps of 2 near `u = j/k`.
fn dyadic_floor_mul(k: u128, u: f64) -> u128 {
    let bits = u.to_bits();
    let exp_field = (bits >> 52) & 0x7ff;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, shift) = if exp_field == 0 {
        (frac, 1074u64)
    } else {
        (frac | (1 << 52), 1075 - exp_field)
    };
    if mant == 0 || shift >= 128 {
        return 0;
    }
    (k * mant as u128) >> shift
}

/// `| floor(u1 * floor(n u2)) - floor(u2 * floor(n u1)) |` for
/// `u1, u2 in [0,1)`, evaluated exactly. Callers assert the result is at
/// most 1.
pub fn floor_commutation_check(u1: f64, u2: f64, n: u64) -> u64 {
    let t2 = dyadic_floor_mul(n as u128, u2);
    let a = dyadic_floor_mul(t2, u1);
    let t1 = dyadic_floor_mul(n as u128, u1);
    let b = dyadic_floor_mul(t1, u2);
    a.abs_diff(b) as u64
}

/// Exact-rational variant for grid points `u1 = k1/den`, `u2 = k2/den`:
/// both iterated floors reduce to integer division, so boundary cases
/// carry no floating-point hazard.
pub fn floor_commutation_check_rational(k1: u64, k2: u64, den: u64, n: u64) -> u64 {
    let t2 = n * k2 / den; // floor(n u2)
    let t1 = n * k1 / den; // floor(n u1)
    let a = k1 * t2 / den; // floor(u1 floor(n u2))
    let b = k2 * t1 / den; // floor(u2 floor(n u1))
    a.abs_diff(b)
}
