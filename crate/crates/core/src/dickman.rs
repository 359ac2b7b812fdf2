//! Generalized Dickman distribution via its fixed-point transform.
//!
//! The transform sends a non-negative `w` to `u^{1/theta} * (w + 1)` with
//! `u` uniform; its unique fixed point in distribution is the generalized
//! Dickman law. Iterating the transform from 0 contracts the Wasserstein
//! distance to the fixed point by `theta/(theta+1)` per step, starting
//! from an initial gap of exactly `theta` (the mean of the fixed point),
//! so `K` iterations guarantee `d1 <= theta * (theta/(theta+1))^K`.

use crate::error::{Error, Result};
use crate::rng::RandomStream;

/// Sampler parameters: the shape `theta > 0` and the iteration depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DickmanParams {
    pub theta: f64,
    pub depth: u32,
}

impl DickmanParams {
    pub fn new(theta: f64, depth: u32) -> Result<Self> {
        if theta.is_nan() || theta <= 0.0 || !theta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "theta must be a positive finite real, got {theta}"
            )));
        }
        Ok(DickmanParams { theta, depth })
    }

    /// Guaranteed d1 accuracy of a depth-`depth` iterate started at 0.
    pub fn accuracy_bound(&self) -> f64 {
        self.theta * (self.theta / (self.theta + 1.0)).powi(self.depth as i32)
    }
}

/// One application of the bias transform: `u^{1/theta} * (w + 1)`.
pub fn bias_transform(w: f64, theta: f64, stream: &mut RandomStream) -> Result<f64> {
    if theta.is_nan() || theta <= 0.0 || !theta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "theta must be a positive finite real, got {theta}"
        )));
    }
    if w.is_nan() || w < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "w must be non-negative, got {w}"
        )));
    }
    let u = stream.next_uniform();
    Ok(apply(u, w, theta))
}

#[inline]
fn apply(u: f64, w: f64, theta: f64) -> f64 {
    // u = 0 maps to 0; theta = 1 needs no powf.
    let mult = if theta == 1.0 { u } else { u.powf(1.0 / theta) };
    mult * (w + 1.0)
}

/// The depth-`K` iterate `W_K` with `W_0 = 0`, consuming `K` uniforms.
pub fn sample_dickman(params: &DickmanParams, stream: &mut RandomStream) -> f64 {
    let mut w = 0.0;
    for _ in 0..params.depth {
        w = apply(stream.next_uniform(), w, params.theta);
    }
    w
}

/// A batch of iterates drawn sequentially from one stream.
#[derive(Debug, Clone)]
pub struct DickmanSampleSet {
    pub theta: f64,
    pub depth: u32,
    pub seed: u64,
    pub path: Vec<u64>,
    pub values: Vec<f64>,
}

pub fn sample_dickman_set(
    params: &DickmanParams,
    count: usize,
    stream: &mut RandomStream,
) -> DickmanSampleSet {
    let values = (0..count).map(|_| sample_dickman(params, stream)).collect();
    DickmanSampleSet {
        theta: params.theta,
        depth: params.depth,
        seed: stream.seed(),
        path: stream.path().to_vec(),
        values,
    }
}

/// Smallest depth `K` with `theta * (theta/(theta+1))^K <= eps`.
pub fn depth_for_accuracy(theta: f64, eps: f64) -> Result<u32> {
    if theta.is_nan() || theta <= 0.0 || !theta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "theta must be a positive finite real, got {theta}"
        )));
    }
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "eps must be positive, got {eps}"
        )));
    }
    let ratio = theta / (theta + 1.0);
    let mut err = theta;
    let mut depth = 0u32;
    while err > eps {
        err *= ratio;
        depth += 1;
    }
    Ok(depth)
}
