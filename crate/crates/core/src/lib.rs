//! Block-sparse proportionate affine projection adaptive filters.
//!
//! The crate implements one update engine covering the whole family:
//! APA, PAPA, BS-PAPA, the memory variants MPAPA and BS-MPAPA, and the
//! single-projection members PNLMS and BS-PNLMS. Gains are computed per
//! block of `P` taps from the block Euclidean norms of the current
//! estimate, so `P = 1` gives classic per-tap proportionate gains and
//! `P = L` gives uniform (APA) gains.
//!
//! Alongside the filters, [`signal`] synthesizes block-sparse echo paths,
//! white or AR(1) excitation and calibrated measurement noise, and
//! [`bench`] drives complete system-identification experiments and writes
//! misalignment traces to CSV.

pub mod bench;
pub mod error;
pub mod filter;
pub mod gains;
pub mod history;
pub mod reference;
pub mod regressor;
pub mod signal;
pub mod solve;

pub use error::{Error, Result};
pub use filter::{
    error_vector, filter_step, AdaptiveFilter, FilterConfig, FilterConfigBuilder, FilterState,
    RegressorMode, StepOutput, Variant,
};
pub use gains::{block_l2_norms, proportionate_gains, BlockPartition, GainVector, StallGuards};
pub use history::{DelayLine, RegressorHistory};
pub use regressor::{
    build_weighted_regressor_direct, build_weighted_regressor_efficient, WeightedRegressor,
};
pub use solve::solve_regularized;

/// Dot product with several independent accumulators so the inner loop
/// vectorizes. Used for every length-`L` inner product in the update.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 8];
    let chunks_a = a.chunks_exact(8);
    let chunks_b = b.chunks_exact(8);
    let tail: f64 = chunks_a
        .remainder()
        .iter()
        .zip(chunks_b.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (ca, cb) in chunks_a.zip(chunks_b) {
        for k in 0..8 {
            acc[k] += ca[k] * cb[k];
        }
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}
