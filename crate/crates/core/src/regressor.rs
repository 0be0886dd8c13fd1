//! Gain-weighted regressor `P(n) = G(n-1) X(n)`.
//!
//! Two constructions give bit-identical matrices:
//!
//! * direct: one product `g_block(l) * x(n-j-l)` per element, `M L`
//!   multiplications;
//! * efficient: within block `i` every column of the `P x M` submatrix is a
//!   shifted window of the same `P + M - 1` products
//!   `g_i * x(n - iP - k)`, so each product is formed once and copied,
//!   `(P + M - 1) N` multiplications.
//!
//! The memory variants instead keep a rolling matrix whose newest column is
//! `g(n-1) ⊙ x(n)` and whose older columns retain the gains they were built
//! with ([`MemoryRegressor`]).

use crate::error::{Error, Result};
use crate::gains::GainVector;
use crate::history::RegressorHistory;

/// Column-major `L x M` weighted regressor plus the number of scalar
/// multiplications spent building it.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedRegressor {
    data: Vec<f64>,
    filter_length: usize,
    projection_order: usize,
    multiplication_count: u64,
}

impl WeightedRegressor {
    pub fn zeros(filter_length: usize, projection_order: usize) -> Self {
        Self {
            data: vec![0.0; filter_length * projection_order],
            filter_length,
            projection_order,
            multiplication_count: 0,
        }
    }

    pub fn filter_length(&self) -> usize {
        self.filter_length
    }

    pub fn projection_order(&self) -> usize {
        self.projection_order
    }

    pub fn multiplication_count(&self) -> u64 {
        self.multiplication_count
    }

    #[inline]
    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.filter_length..(j + 1) * self.filter_length]
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[col * self.filter_length + row]
    }

    /// Column-major storage, `L * M` values.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    fn check_shape(&self, gains: &GainVector, history: &RegressorHistory) -> Result<()> {
        Error::check_len(
            "gain partition length",
            history.filter_length(),
            gains.partition().filter_length(),
        )?;
        Error::check_len("regressor rows", history.filter_length(), self.filter_length)?;
        Error::check_len(
            "regressor columns",
            history.projection_order(),
            self.projection_order,
        )
    }

    pub(crate) fn fill_direct(&mut self, gains: &GainVector, history: &RegressorHistory) -> Result<()> {
        self.check_shape(gains, history)?;
        let l_len = self.filter_length;
        let p = gains.partition().group_size();
        let window = history.window();
        let mut mults = 0u64;
        for j in 0..self.projection_order {
            let col = &mut self.data[j * l_len..(j + 1) * l_len];
            let xs = &window[j..j + l_len];
            for ((out_block, x_block), &g) in col
                .chunks_exact_mut(p)
                .zip(xs.chunks_exact(p))
                .zip(gains.block_gains())
            {
                for (o, &x) in out_block.iter_mut().zip(x_block) {
                    *o = g * x;
                }
            }
            mults += l_len as u64;
        }
        self.multiplication_count = mults;
        Ok(())
    }

    pub(crate) fn fill_efficient(
        &mut self,
        gains: &GainVector,
        history: &RegressorHistory,
        scratch: &mut Vec<f64>,
    ) -> Result<()> {
        self.check_shape(gains, history)?;
        let l_len = self.filter_length;
        let m = self.projection_order;
        let p = gains.partition().group_size();
        let span = p + m - 1;
        let window = history.window();
        scratch.resize(span, 0.0);
        let mut mults = 0u64;
        for (i, &g) in gains.block_gains().iter().enumerate() {
            let start = i * p;
            // p_i(n): g_i * x(n - iP - k), k = 0 .. P+M-2
            for (s, &x) in scratch.iter_mut().zip(&window[start..start + span]) {
                *s = g * x;
            }
            mults += span as u64;
            for j in 0..m {
                let dst = j * l_len + start;
                self.data[dst..dst + p].copy_from_slice(&scratch[j..j + p]);
            }
        }
        self.multiplication_count = mults;
        Ok(())
    }
}

/// Direct construction of `P(n)`: `M L` multiplications.
pub fn build_weighted_regressor_direct(
    gains: &GainVector,
    history: &RegressorHistory,
) -> Result<WeightedRegressor> {
    let mut out = WeightedRegressor::zeros(history.filter_length(), history.projection_order());
    out.fill_direct(gains, history)?;
    Ok(out)
}

/// Sliding-window construction of `P(n)`: `(P + M - 1) N` multiplications,
/// bit-identical to [`build_weighted_regressor_direct`].
pub fn build_weighted_regressor_efficient(
    gains: &GainVector,
    history: &RegressorHistory,
) -> Result<WeightedRegressor> {
    let mut out = WeightedRegressor::zeros(history.filter_length(), history.projection_order());
    let mut scratch = Vec::new();
    out.fill_efficient(gains, history, &mut scratch)?;
    Ok(out)
}

/// Rolling regressor `P'(n) = [g(n-1) ⊙ x(n), P'(n-1) without its last column]`.
///
/// Column `j` holds `g(n-j-1) ⊙ x(n-j)`, newest first. Starts at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryRegressor {
    inner: WeightedRegressor,
}

impl MemoryRegressor {
    pub fn new(filter_length: usize, projection_order: usize) -> Self {
        Self {
            inner: WeightedRegressor::zeros(filter_length, projection_order),
        }
    }

    /// Shifts every column one place older and writes `gains ⊙ newest` into
    /// column 0. Exactly `L` multiplications.
    pub fn push(&mut self, gains: &GainVector, newest: &[f64]) -> Result<()> {
        let l_len = self.inner.filter_length;
        Error::check_len("newest input vector", l_len, newest.len())?;
        Error::check_len("gain partition length", l_len, gains.partition().filter_length())?;
        let m = self.inner.projection_order;
        self.inner.data.copy_within(0..l_len * (m - 1), l_len);
        let p = gains.partition().group_size();
        for ((out_block, x_block), &g) in self.inner.data[..l_len]
            .chunks_exact_mut(p)
            .zip(newest.chunks_exact(p))
            .zip(gains.block_gains())
        {
            for (o, &x) in out_block.iter_mut().zip(x_block) {
                *o = g * x;
            }
        }
        self.inner.multiplication_count = l_len as u64;
        Ok(())
    }

    pub fn as_regressor(&self) -> &WeightedRegressor {
        &self.inner
    }

    pub fn column(&self, j: usize) -> &[f64] {
        self.inner.column(j)
    }

    pub fn reset(&mut self) {
        self.inner.data.fill(0.0);
        self.inner.multiplication_count = 0;
    }
}
