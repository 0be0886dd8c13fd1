//! Newest-first sample windows.

use crate::error::{Error, Result};

/// Fixed-capacity delay line addressed newest-first.
///
/// Every sample is written twice, `capacity` slots apart, so the most recent
/// `capacity` samples are always available as one contiguous slice without
/// wrap-around handling. Slots never written read as zero.
#[derive(Debug, Clone)]
pub struct DelayLine {
    data: Vec<f64>,
    pos: usize,
    capacity: usize,
    pushed: u64,
}

impl DelayLine {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "delay line capacity must be positive");
        Self {
            data: vec![0.0; 2 * capacity],
            pos: 0,
            capacity,
            pushed: 0,
        }
    }

    pub fn push(&mut self, x: f64) {
        self.pos = if self.pos == 0 {
            self.capacity - 1
        } else {
            self.pos - 1
        };
        self.data[self.pos] = x;
        self.data[self.pos + self.capacity] = x;
        self.pushed += 1;
    }

    /// The `capacity` most recent samples, newest at index 0.
    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data[self.pos..self.pos + self.capacity]
    }

    /// Sample delayed by `lag`; zero before the stream start.
    pub fn get(&self, lag: usize) -> f64 {
        self.as_slice()[lag]
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn samples_pushed(&self) -> u64 {
        self.pushed
    }

    pub fn clear(&mut self) {
        self.data.fill(0.0);
        self.pos = 0;
        self.pushed = 0;
    }
}

/// Input history long enough to form the `L x M` regressor
/// `X(n) = [x(n), x(n-1), ..., x(n-M+1)]`, i.e. the last `L + M - 1` samples.
///
/// Column `j` of `X(n)` is the contiguous slice `x(n-j) .. x(n-j-L+1)`, so
/// nothing is materialized on the hot path.
#[derive(Debug, Clone)]
pub struct RegressorHistory {
    line: DelayLine,
    filter_length: usize,
    projection_order: usize,
}

impl RegressorHistory {
    pub fn new(filter_length: usize, projection_order: usize) -> Result<Self> {
        if filter_length == 0 || projection_order == 0 {
            return Err(Error::invalid(format!(
                "history needs L >= 1 and M >= 1, got L={filter_length}, M={projection_order}"
            )));
        }
        Ok(Self {
            line: DelayLine::new(filter_length + projection_order - 1),
            filter_length,
            projection_order,
        })
    }

    /// Advances to the next time index with input sample `x`.
    pub fn push(&mut self, x: f64) {
        self.line.push(x);
    }

    pub fn filter_length(&self) -> usize {
        self.filter_length
    }

    pub fn projection_order(&self) -> usize {
        self.projection_order
    }

    /// `x(n - lag)`, zero before stream start.
    pub fn sample(&self, lag: usize) -> f64 {
        self.line.get(lag)
    }

    /// All `L + M - 1` retained samples, newest first.
    #[inline]
    pub fn window(&self) -> &[f64] {
        self.line.as_slice()
    }

    /// Column `j` of `X(n)`: the input vector delayed by `j` samples.
    #[inline]
    pub fn column(&self, j: usize) -> &[f64] {
        assert!(j < self.projection_order, "column {j} out of range");
        &self.window()[j..j + self.filter_length]
    }

    /// `x(n)`, the newest input vector.
    #[inline]
    pub fn newest(&self) -> &[f64] {
        self.column(0)
    }

    /// `X(n)` as an owned column-major `L x M` matrix.
    pub fn materialize(&self) -> Vec<f64> {
        (0..self.projection_order)
            .flat_map(|j| self.column(j).iter().copied())
            .collect()
    }

    pub fn clear(&mut self) {
        self.line.clear();
    }
}
