//! Quickselect comparison counts and their Dickman approximation:
//! exact expectations and distributions, fixed-point sampling, the
//! proof's couplings, and Wasserstein-distance bound verification.

pub mod coupling;
pub mod dickman;
pub mod error;
pub mod exact;
pub mod lemmas;
pub mod metrics;
pub mod quickselect;
pub mod report;
pub mod rng;
pub mod stats;

pub use coupling::{draw_coupled_pair, estimate_coupling_gap, CoupledPair, GapEstimate};
pub use dickman::{depth_for_accuracy, sample_dickman, DickmanParams};
pub use error::{Error, Result};
pub use exact::{exact_pmf, expected_count, CountPmf, HarmonicTable};
pub use metrics::{w1_discrete, w1_sorted_samples, BoundReport, DiscreteDist, EmpiricalDist};
pub use quickselect::{sample_count_recursion, select_count_array};
pub use report::{run_bounds_sweep, run_consistency_suite, BoundsConfig, SuiteOptions};
pub use rng::RandomStream;
