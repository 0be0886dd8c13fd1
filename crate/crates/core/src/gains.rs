//! Block norms and stall-protected proportionate gains.
//!
//! The filter of length `L` is split into `N = L / P` contiguous blocks of
//! `P` taps. Each block gets one gain, derived from the Euclidean norm of
//! its taps in the current estimate:
//!
//! ```text
//! gamma_i = max(rho * max(q, |h_[1]|, ..., |h_[N]|), |h_[i]|)
//! g_i     = gamma_i / ((1/N) * sum_k gamma_k)
//! ```
//!
//! With `P = 1` the block norm of a tap is its magnitude and the rule is the
//! classic PNLMS/PAPA gain; with `P = L` there is one block and `g = [1]`.

use crate::error::{Error, Result};

/// Split of `filter_length` taps into `block_count` blocks of `group_size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockPartition {
    filter_length: usize,
    group_size: usize,
    block_count: usize,
}

impl BlockPartition {
    /// Fails unless `1 <= group_size <= filter_length` and `group_size`
    /// divides `filter_length`. Nothing is padded.
    pub fn new(filter_length: usize, group_size: usize) -> Result<Self> {
        if filter_length == 0 {
            return Err(Error::invalid("filter length must be positive"));
        }
        if group_size == 0 || group_size > filter_length {
            return Err(Error::invalid(format!(
                "group size {group_size} outside 1..={filter_length}"
            )));
        }
        if !filter_length.is_multiple_of(group_size) {
            return Err(Error::invalid(format!(
                "group size {group_size} does not divide filter length {filter_length}"
            )));
        }
        Ok(Self {
            filter_length,
            group_size,
            block_count: filter_length / group_size,
        })
    }

    pub fn filter_length(&self) -> usize {
        self.filter_length
    }

    pub fn group_size(&self) -> usize {
        self.group_size
    }

    pub fn block_count(&self) -> usize {
        self.block_count
    }

    /// Zero-based block index of zero-based tap `tap`.
    #[inline]
    pub fn block_of(&self, tap: usize) -> usize {
        tap / self.group_size
    }
}

/// Floors that keep gains away from zero: `q` at initialization, `rho` for
/// taps much smaller than the largest one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StallGuards {
    rho: f64,
    q: f64,
}

impl StallGuards {
    pub fn new(rho: f64, q: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::invalid(format!("rho must be positive, got {rho}")));
        }
        if !(q > 0.0 && q.is_finite()) {
            return Err(Error::invalid(format!("q must be positive, got {q}")));
        }
        Ok(Self { rho, q })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn q(&self) -> f64 {
        self.q
    }
}

impl Default for StallGuards {
    fn default() -> Self {
        Self { rho: 0.01, q: 0.01 }
    }
}

/// One gain per block. The per-tap diagonal of `G` repeats each block gain
/// `P` times.
#[derive(Debug, Clone, PartialEq)]
pub struct GainVector {
    block_gains: Vec<f64>,
    partition: BlockPartition,
}

impl GainVector {
    /// All gains equal to one, i.e. `G = I`.
    pub fn unity(partition: BlockPartition) -> Self {
        Self {
            block_gains: vec![1.0; partition.block_count()],
            partition,
        }
    }

    /// Wraps explicit block gains. Gains must be finite and nonnegative; no
    /// normalization is applied.
    pub fn from_block_gains(block_gains: Vec<f64>, partition: BlockPartition) -> Result<Self> {
        Error::check_len("block gains", partition.block_count(), block_gains.len())?;
        if let Some(bad) = block_gains.iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
            return Err(Error::invalid(format!("block gain {bad} is not a finite nonnegative value")));
        }
        Ok(Self {
            block_gains,
            partition,
        })
    }

    pub fn block_gains(&self) -> &[f64] {
        &self.block_gains
    }

    pub fn partition(&self) -> BlockPartition {
        self.partition
    }

    #[inline]
    pub fn tap_gain(&self, tap: usize) -> f64 {
        self.block_gains[self.partition.block_of(tap)]
    }

    /// Per-tap diagonal of `G`, length `L`.
    pub fn expanded(&self) -> Vec<f64> {
        let p = self.partition.group_size();
        self.block_gains
            .iter()
            .flat_map(|&g| std::iter::repeat_n(g, p))
            .collect()
    }
}

/// Euclidean norm of each block of `weights`.
pub fn block_l2_norms(weights: &[f64], partition: BlockPartition) -> Result<Vec<f64>> {
    Error::check_len("weights", partition.filter_length(), weights.len())?;
    Ok(weights
        .chunks_exact(partition.group_size())
        .map(|block| block.iter().map(|w| w * w).sum::<f64>().sqrt())
        .collect())
}

pub fn proportionate_gains(
    block_norms: &[f64],
    partition: BlockPartition,
    guards: StallGuards,
) -> Result<GainVector> {
    if block_norms.is_empty() {
        return Err(Error::invalid("block norms must be nonempty"));
    }
    Error::check_len("block norms", partition.block_count(), block_norms.len())?;

    let largest = block_norms.iter().copied().fold(guards.q(), f64::max);
    let floor = guards.rho() * largest;
    let gamma: Vec<f64> = block_norms.iter().map(|&n| floor.max(n)).collect();
    let mean = gamma.iter().sum::<f64>() / gamma.len() as f64;

    Ok(GainVector {
        block_gains: gamma.into_iter().map(|g| g / mean).collect(),
        partition,
    })
}
