//! Unified update engine for the proportionate affine projection family.
//!
//! Every member runs the same step
//!
//! ```text
//! e(n) = d(n) - X^T(n) h(n-1)
//! h(n) = h(n-1) + mu * P(n) (X^T(n) P(n) + delta I)^-1 e(n)
//! ```
//!
//! and differs only in how the weighted regressor `P(n)` is obtained:
//! exact `G(n-1) X(n)` with block gains for APA/PAPA/BS-PAPA (and the
//! `M = 1` members PNLMS/BS-PNLMS), or the rolling memory matrix for
//! MPAPA/BS-MPAPA. The named special cases are canonicalized onto the
//! general parameters at construction.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dot;
use crate::error::{Error, Result};
use crate::gains::{block_l2_norms, proportionate_gains, BlockPartition, GainVector, StallGuards};
use crate::history::{DelayLine, RegressorHistory};
use crate::regressor::{MemoryRegressor, WeightedRegressor};
use crate::solve::lu_solve_in_place;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Apa,
    Papa,
    BsPapa,
    Mpapa,
    BsMpapa,
    BsPnlms,
    Pnlms,
}

impl Variant {
    pub const ALL: [Variant; 7] = [
        Variant::Apa,
        Variant::Papa,
        Variant::BsPapa,
        Variant::Mpapa,
        Variant::BsMpapa,
        Variant::BsPnlms,
        Variant::Pnlms,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Apa => "apa",
            Variant::Papa => "papa",
            Variant::BsPapa => "bs-papa",
            Variant::Mpapa => "mpapa",
            Variant::BsMpapa => "bs-mpapa",
            Variant::BsPnlms => "bs-pnlms",
            Variant::Pnlms => "pnlms",
        }
    }

    /// Uses the rolling memory regressor instead of the exact `G X`.
    pub fn is_memory(self) -> bool {
        matches!(self, Variant::Mpapa | Variant::BsMpapa)
    }

    /// Group size fixed by the variant, if any.
    fn forced_group_size(self, filter_length: usize) -> Option<usize> {
        match self {
            Variant::Apa => Some(filter_length),
            Variant::Papa | Variant::Mpapa | Variant::Pnlms => Some(1),
            Variant::BsPapa | Variant::BsMpapa | Variant::BsPnlms => None,
        }
    }

    fn forced_projection_order(self) -> Option<usize> {
        match self {
            Variant::Pnlms | Variant::BsPnlms => Some(1),
            _ => None,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == key)
            .ok_or_else(|| Error::invalid(format!("unknown variant {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegressorMode {
    Direct,
    #[default]
    Efficient,
}

/// Validated, canonical filter parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterConfig {
    variant: Variant,
    partition: BlockPartition,
    projection_order: usize,
    step_size: f64,
    regularization: f64,
    guards: StallGuards,
    regressor_mode: RegressorMode,
}

impl FilterConfig {
    pub fn builder(variant: Variant, filter_length: usize) -> FilterConfigBuilder {
        FilterConfigBuilder::new(variant, filter_length)
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn filter_length(&self) -> usize {
        self.partition.filter_length()
    }

    pub fn partition(&self) -> BlockPartition {
        self.partition
    }

    pub fn group_size(&self) -> usize {
        self.partition.group_size()
    }

    pub fn projection_order(&self) -> usize {
        self.projection_order
    }

    pub fn step_size(&self) -> f64 {
        self.step_size
    }

    pub fn regularization(&self) -> f64 {
        self.regularization
    }

    pub fn guards(&self) -> StallGuards {
        self.guards
    }

    pub fn regressor_mode(&self) -> RegressorMode {
        self.regressor_mode
    }

    /// Multiplications spent building the weighted regressor each step.
    pub fn regressor_multiplications(&self) -> u64 {
        let l = self.filter_length() as u64;
        let m = self.projection_order as u64;
        if self.variant.is_memory() {
            return l;
        }
        match self.regressor_mode {
            RegressorMode::Direct => m * l,
            RegressorMode::Efficient => {
                (self.group_size() as u64 + m - 1) * self.partition.block_count() as u64
            }
        }
    }
}

/// Builder for [`FilterConfig`]. Defaults: `M = 8`, `mu = 0.01`,
/// `delta = 0.01`, `rho = q = 0.01`, efficient regressor construction.
#[derive(Debug, Clone)]
pub struct FilterConfigBuilder {
    variant: Variant,
    filter_length: usize,
    projection_order: Option<usize>,
    group_size: Option<usize>,
    step_size: f64,
    regularization: f64,
    rho: f64,
    q: f64,
    regressor_mode: RegressorMode,
}

impl FilterConfigBuilder {
    pub fn new(variant: Variant, filter_length: usize) -> Self {
        Self {
            variant,
            filter_length,
            projection_order: None,
            group_size: None,
            step_size: 0.01,
            regularization: 0.01,
            rho: 0.01,
            q: 0.01,
            regressor_mode: RegressorMode::Efficient,
        }
    }

    pub fn projection_order(mut self, m: usize) -> Self {
        self.projection_order = Some(m);
        self
    }

    pub fn group_size(mut self, p: usize) -> Self {
        self.group_size = Some(p);
        self
    }

    pub fn step_size(mut self, mu: f64) -> Self {
        self.step_size = mu;
        self
    }

    pub fn regularization(mut self, delta: f64) -> Self {
        self.regularization = delta;
        self
    }

    pub fn guards(mut self, rho: f64, q: f64) -> Self {
        self.rho = rho;
        self.q = q;
        self
    }

    pub fn regressor_mode(mut self, mode: RegressorMode) -> Self {
        self.regressor_mode = mode;
        self
    }

    pub fn build(self) -> Result<FilterConfig> {
        let v = self.variant;
        let l = self.filter_length;

        let group_size = match (v.forced_group_size(l), self.group_size) {
            (Some(forced), Some(given)) if forced != given => {
                return Err(Error::invalid(format!(
                    "{v} requires group size {forced}, got {given}"
                )))
            }
            (Some(forced), _) => forced,
            (None, Some(given)) => given,
            (None, None) => return Err(Error::invalid(format!("{v} requires a group size"))),
        };
        let projection_order = match (v.forced_projection_order(), self.projection_order) {
            (Some(forced), Some(given)) if forced != given => {
                return Err(Error::invalid(format!(
                    "{v} requires projection order {forced}, got {given}"
                )))
            }
            (Some(forced), _) => forced,
            (None, Some(given)) => given,
            (None, None) => 8,
        };
        if projection_order == 0 {
            return Err(Error::invalid("projection order must be at least 1"));
        }
        if !(0.0..=2.0).contains(&self.step_size) {
            return Err(Error::invalid(format!(
                "step size must lie in [0, 2], got {}",
                self.step_size
            )));
        }
        if !(self.regularization >= 0.0 && self.regularization.is_finite()) {
            return Err(Error::invalid(format!(
                "regularization must be finite and nonnegative, got {}",
                self.regularization
            )));
        }

        Ok(FilterConfig {
            variant: v,
            partition: BlockPartition::new(l, group_size)?,
            projection_order,
            step_size: self.step_size,
            regularization: self.regularization,
            guards: StallGuards::new(self.rho, self.q)?,
            regressor_mode: self.regressor_mode,
        })
    }
}

/// Weights, the memory regressor of the memory variants, and scratch space
/// reused across steps.
#[derive(Debug, Clone)]
pub struct FilterState {
    weights: Vec<f64>,
    memory: Option<MemoryRegressor>,
    step_counter: u64,
    regressor: WeightedRegressor,
    block_scratch: Vec<f64>,
    correlation: Vec<f64>,
    solution: Vec<f64>,
}

impl FilterState {
    /// Zero weights; the memory regressor (if any) starts at zero.
    pub fn new(config: &FilterConfig) -> Self {
        let l = config.filter_length();
        let m = config.projection_order();
        Self {
            weights: vec![0.0; l],
            memory: config.variant().is_memory().then(|| MemoryRegressor::new(l, m)),
            step_counter: 0,
            regressor: WeightedRegressor::zeros(l, m),
            block_scratch: Vec::new(),
            correlation: vec![0.0; m * m],
            solution: vec![0.0; m],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn memory_regressor(&self) -> Option<&MemoryRegressor> {
        self.memory.as_ref()
    }

    pub fn step_counter(&self) -> u64 {
        self.step_counter
    }

    /// Rolls the memory regressor forward with `gains ⊙ newest`.
    pub fn update_memory_regressor(&mut self, gains: &GainVector, newest: &[f64]) -> Result<()> {
        match self.memory.as_mut() {
            Some(mem) => mem.push(gains, newest),
            None => Err(Error::ContractViolation(
                "memory regressor update on a non-memory variant".into(),
            )),
        }
    }

    pub fn reset(&mut self) {
        self.weights.fill(0.0);
        if let Some(mem) = self.memory.as_mut() {
            mem.reset();
        }
        self.step_counter = 0;
    }
}

/// `e(n) = d(n) - X^T(n) h`, component `k` for lag `k`.
pub fn error_vector(history: &RegressorHistory, desired: &[f64], weights: &[f64]) -> Result<Vec<f64>> {
    Error::check_len("desired vector", history.projection_order(), desired.len())?;
    Error::check_len("weights", history.filter_length(), weights.len())?;
    Ok(desired
        .iter()
        .enumerate()
        .map(|(k, d)| d - dot(history.column(k), weights))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutput {
    /// A priori error `e(n)` at lag zero.
    pub error: f64,
    /// Multiplications spent building the weighted regressor.
    pub regressor_multiplications: u64,
}

/// One adaptation step. `history` must already contain `x(n)` and
/// `desired` holds `d(n), ..., d(n-M+1)`.
pub fn filter_step(
    config: &FilterConfig,
    state: &mut FilterState,
    history: &RegressorHistory,
    desired: &[f64],
) -> Result<StepOutput> {
    let l = config.filter_length();
    let m = config.projection_order();
    Error::check_len("history filter length", l, history.filter_length())?;
    Error::check_len("history projection order", m, history.projection_order())?;
    Error::check_len("desired vector", m, desired.len())?;
    Error::check_len("weights", l, state.weights.len())?;

    for (k, (s, d)) in state.solution.iter_mut().zip(desired).enumerate() {
        *s = d - dot(history.column(k), &state.weights);
    }
    let a_priori = state.solution[0];

    let norms = block_l2_norms(&state.weights, config.partition())?;
    let gains = proportionate_gains(&norms, config.partition(), config.guards())?;

    let symmetric = match state.memory.as_mut() {
        Some(mem) => {
            mem.push(&gains, history.newest())?;
            false
        }
        None => {
            match config.regressor_mode() {
                RegressorMode::Direct => state.regressor.fill_direct(&gains, history)?,
                RegressorMode::Efficient => {
                    state
                        .regressor
                        .fill_efficient(&gains, history, &mut state.block_scratch)?
                }
            }
            true
        }
    };
    let weighted = match state.memory.as_ref() {
        Some(mem) => mem.as_regressor(),
        None => &state.regressor,
    };

    // X^T P; with diagonal G this is symmetric, so only the upper triangle
    // is formed.
    let a = &mut state.correlation;
    for i in 0..m {
        let xi = history.column(i);
        let first = if symmetric { i } else { 0 };
        for j in first..m {
            let v = dot(xi, weighted.column(j));
            a[i * m + j] = v;
            if symmetric {
                a[j * m + i] = v;
            }
        }
    }
    for i in 0..m {
        a[i * m + i] += config.regularization();
    }
    lu_solve_in_place(a, &mut state.solution)?;

    let mu = config.step_size();
    for (j, &z) in state.solution.iter().enumerate() {
        let scale = mu * z;
        for (w, p) in state.weights.iter_mut().zip(weighted.column(j)) {
            *w += scale * p;
        }
    }
    state.step_counter += 1;

    Ok(StepOutput {
        error: a_priori,
        regressor_multiplications: weighted.multiplication_count(),
    })
}

/// A filter that owns its input and desired-signal histories and consumes
/// one `(x, d)` pair per call.
#[derive(Debug, Clone)]
pub struct AdaptiveFilter {
    config: FilterConfig,
    state: FilterState,
    history: RegressorHistory,
    desired: DelayLine,
}

impl AdaptiveFilter {
    pub fn new(config: FilterConfig) -> Self {
        let history = RegressorHistory::new(config.filter_length(), config.projection_order())
            .expect("validated config has positive L and M");
        Self {
            state: FilterState::new(&config),
            desired: DelayLine::new(config.projection_order()),
            history,
            config,
        }
    }

    pub fn process(&mut self, x: f64, d: f64) -> Result<StepOutput> {
        self.history.push(x);
        self.desired.push(d);
        filter_step(&self.config, &mut self.state, &self.history, self.desired.as_slice())
    }

    pub fn config(&self) -> &FilterConfig {
        &self.config
    }

    pub fn state(&self) -> &FilterState {
        &self.state
    }

    pub fn weights(&self) -> &[f64] {
        self.state.weights()
    }

    pub fn history(&self) -> &RegressorHistory {
        &self.history
    }

    pub fn reset(&mut self) {
        self.state.reset();
        self.history.clear();
        self.desired.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regressor::build_weighted_regressor_direct;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn config(variant: Variant, l: usize) -> FilterConfigBuilder {
        FilterConfig::builder(variant, l)
    }

    #[test]
    fn canonicalization() {
        let c = config(Variant::Apa, 64).projection_order(4).build().unwrap();
        assert_eq!(c.group_size(), 64);
        let c = config(Variant::Pnlms, 64).build().unwrap();
        assert_eq!((c.group_size(), c.projection_order()), (1, 1));
        let c = config(Variant::BsPnlms, 64).group_size(8).build().unwrap();
        assert_eq!(c.projection_order(), 1);
        let c = config(Variant::Mpapa, 64).build().unwrap();
        assert_eq!((c.group_size(), c.projection_order()), (1, 8));

        assert!(config(Variant::Papa, 64).group_size(4).build().is_err());
        assert!(config(Variant::BsPnlms, 64).group_size(8).projection_order(2).build().is_err());
        assert!(config(Variant::BsPapa, 64).build().is_err());
        assert!(config(Variant::BsPapa, 64).group_size(5).build().is_err());
        assert!(config(Variant::Papa, 64).step_size(-0.1).build().is_err());
        assert!(config(Variant::Papa, 64).regularization(-1.0).build().is_err());
        assert!(config(Variant::Papa, 64).projection_order(0).build().is_err());
    }

    #[test]
    fn variant_names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        assert_eq!("BS_MPAPA".parse::<Variant>().unwrap(), Variant::BsMpapa);
        assert!("nlms".parse::<Variant>().is_err());
    }

    #[test]
    fn error_vector_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut hist = RegressorHistory::new(8, 3).unwrap();
        for _ in 0..20 {
            hist.push(rng.random_range(-1.0..1.0));
        }
        let d = [0.3, -0.2, 1.1];
        assert_eq!(error_vector(&hist, &d, &[0.0; 8]).unwrap(), d.to_vec());

        let w: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
        let clean: Vec<f64> = (0..3)
            .map(|k| (0..8).map(|l| hist.sample(k + l) * w[l]).sum())
            .collect();
        let e = error_vector(&hist, &clean, &w).unwrap();
        assert!(e.iter().all(|v| v.abs() < 1e-14));

        let got = error_vector(&hist, &d, &w).unwrap();
        let x = hist.materialize();
        for k in 0..3 {
            let mut acc = 0.0;
            for l in 0..8 {
                acc += x[k * 8 + l] * w[l];
            }
            let want = d[k] - acc;
            assert!((got[k] - want).abs() <= 1e-14 * want.abs().max(1.0));
        }
        assert!(error_vector(&hist, &d[..2], &w).is_err());
        assert!(error_vector(&hist, &d, &w[..7]).is_err());
    }

    #[test]
    fn scalar_projection_identifies_in_one_step() {
        let c = config(Variant::BsPapa, 1)
            .group_size(1)
            .projection_order(1)
            .step_size(1.0)
            .regularization(0.0)
            .build()
            .unwrap();
        let mut f = AdaptiveFilter::new(c);
        let out = f.process(2.0, 2.0).unwrap();
        assert_eq!(out.error, 2.0);
        assert_eq!(f.weights(), &[1.0]);
    }

    #[test]
    fn zero_step_size_leaves_weights() {
        let c = config(Variant::BsPapa, 16).group_size(4).projection_order(3).step_size(0.0).build().unwrap();
        let mut f = AdaptiveFilter::new(c);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            f.process(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)).unwrap();
        }
        assert!(f.weights().iter().all(|&w| w == 0.0));
    }

    #[test]
    fn exact_model_stays_put() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h: Vec<f64> = (0..16).map(|_| rng.random_range(-1.0..1.0)).collect();
        let c = config(Variant::BsMpapa, 16).group_size(4).projection_order(3).step_size(0.5).build().unwrap();
        let mut state = FilterState::new(&c);
        state.weights_mut().copy_from_slice(&h);
        let mut hist = RegressorHistory::new(16, 3).unwrap();
        let mut d = DelayLine::new(3);
        for _ in 0..40 {
            hist.push(rng.random_range(-1.0..1.0));
            d.push(dot(hist.newest(), &h));
            filter_step(&c, &mut state, &hist, d.as_slice()).unwrap();
        }
        for (a, b) in state.weights().iter().zip(&h) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn memory_update_rejected_for_exact_variants() {
        let c = config(Variant::Papa, 8).build().unwrap();
        let mut s = FilterState::new(&c);
        let g = GainVector::unity(c.partition());
        assert!(matches!(
            s.update_memory_regressor(&g, &[0.0; 8]),
            Err(Error::ContractViolation(_))
        ));
    }

    #[test]
    fn memory_newest_column_matches_exact_regressor() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = config(Variant::BsMpapa, 32).group_size(4).projection_order(4).step_size(0.3).build().unwrap();
        let h: Vec<f64> = (0..32).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut f = AdaptiveFilter::new(c.clone());
        for _ in 0..200 {
            let prev = f.weights().to_vec();
            let x = rng.random_range(-1.0..1.0);
            let mut probe = f.history().clone();
            probe.push(x);
            let d = dot(probe.newest(), &h);
            f.process(x, d).unwrap();

            let norms = block_l2_norms(&prev, c.partition()).unwrap();
            let g = proportionate_gains(&norms, c.partition(), c.guards()).unwrap();
            let exact = build_weighted_regressor_direct(&g, f.history()).unwrap();
            assert_eq!(f.state().memory_regressor().unwrap().column(0), exact.column(0));
        }
    }

    #[test]
    fn direct_and_efficient_runs_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let base = config(Variant::BsPapa, 32).group_size(8).projection_order(4).step_size(0.2);
        let mut a = AdaptiveFilter::new(base.clone().regressor_mode(RegressorMode::Direct).build().unwrap());
        let mut b = AdaptiveFilter::new(base.build().unwrap());
        for _ in 0..300 {
            let (x, d) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let oa = a.process(x, d).unwrap();
            let ob = b.process(x, d).unwrap();
            assert_eq!(oa.regressor_multiplications, 128);
            assert_eq!(ob.regressor_multiplications, 44);
        }
        assert_eq!(a.weights(), b.weights());
    }

    #[test]
    fn singular_system_is_reported() {
        let c = config(Variant::Apa, 4).projection_order(2).regularization(0.0).build().unwrap();
        let mut f = AdaptiveFilter::new(c);
        assert!(matches!(f.process(0.0, 1.0), Err(Error::Singular { .. })));
    }
}
