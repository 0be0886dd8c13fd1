//! Synthetic echo-path identification scenarios: block-sparse impulse
//! responses, white or AR(1) excitation, and measurement noise calibrated
//! to a target SNR.
//!
//! Every random quantity comes from a ChaCha stream keyed by the scenario
//! seed, so equal seeds give bit-identical signals.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dot;
use crate::error::{Error, Result};
use crate::history::RegressorHistory;

/// Lower clamp for [`misalignment_db`].
pub const MISALIGNMENT_FLOOR_DB: f64 = -300.0;

const STREAM_RESPONSE: u64 = 1;
const STREAM_EXCITATION: u64 = 2;
const STREAM_NOISE: u64 = 3;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Inclusive 1-based tap range `[start, end]`, as in "taps 257 to 288".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cluster {
    pub start: usize,
    pub end: usize,
}

impl Cluster {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.start
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseResponse {
    taps: Vec<f64>,
    clusters: Vec<Cluster>,
}

impl ImpulseResponse {
    /// Wraps explicit taps; the clusters are the maximal runs of nonzero taps.
    pub fn from_taps(taps: Vec<f64>) -> Self {
        let mut clusters = Vec::new();
        let mut run: Option<usize> = None;
        for (i, &t) in taps.iter().enumerate() {
            match (t != 0.0, run) {
                (true, None) => run = Some(i + 1),
                (false, Some(start)) => {
                    clusters.push(Cluster::new(start, i));
                    run = None;
                }
                _ => {}
            }
        }
        if let Some(start) = run {
            clusters.push(Cluster::new(start, taps.len()));
        }
        Self { taps, clusters }
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }
}

fn validate_clusters(filter_length: usize, clusters: &[Cluster]) -> Result<()> {
    let mut sorted = clusters.to_vec();
    sorted.sort_by_key(|c| c.start);
    for c in &sorted {
        if c.start == 0 || c.start > c.end || c.end > filter_length {
            return Err(Error::invalid(format!(
                "cluster [{}, {}] is not a range within [1, {filter_length}]",
                c.start, c.end
            )));
        }
    }
    for pair in sorted.windows(2) {
        if pair[1].start <= pair[0].end {
            return Err(Error::invalid(format!(
                "clusters [{}, {}] and [{}, {}] overlap",
                pair[0].start, pair[0].end, pair[1].start, pair[1].end
            )));
        }
    }
    Ok(())
}

/// Impulse response whose taps inside `clusters` are standard normal draws
/// (taken cluster by cluster in the given order) and exactly zero elsewhere.
///
/// Two responses built from the same seed share the taps of any leading
/// clusters they have in common, so a path change that adds a cluster keeps
/// the existing one.
pub fn make_block_sparse_ir(filter_length: usize, clusters: &[Cluster], seed: u64) -> Result<ImpulseResponse> {
    if filter_length == 0 {
        return Err(Error::invalid("impulse response length must be positive"));
    }
    validate_clusters(filter_length, clusters)?;
    let mut rng = rng_for(seed, STREAM_RESPONSE);
    let mut taps = vec![0.0; filter_length];
    for c in clusters {
        for tap in &mut taps[c.start - 1..c.end] {
            *tap = StandardNormal.sample(&mut rng);
        }
    }
    Ok(ImpulseResponse {
        taps,
        clusters: clusters.to_vec(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Excitation {
    White,
    /// `y(n) = pole * y(n-1) + w(n)`, `|pole| < 1`.
    Ar1 { pole: f64 },
}

impl Excitation {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Excitation::White => Ok(()),
            Excitation::Ar1 { pole } if pole.abs() < 1.0 => Ok(()),
            Excitation::Ar1 { pole } => Err(Error::invalid(format!("AR(1) pole {pole} is not stable"))),
        }
    }
}

/// Runs `driving` through the AR(1) recursion with zero initial state.
pub fn ar1_filter(pole: f64, driving: &[f64]) -> Vec<f64> {
    driving
        .iter()
        .scan(0.0, |y, &w| {
            *y = pole * *y + w;
            Some(*y)
        })
        .collect()
}

/// `n_samples` of excitation: unit-variance white Gaussian noise, or that
/// same sequence shaped by the AR(1) recursion. Not variance-normalized.
pub fn gen_excitation(excitation: Excitation, seed: u64, n_samples: usize) -> Result<Vec<f64>> {
    excitation.validate()?;
    let white = gaussian(&mut rng_for(seed, STREAM_EXCITATION), n_samples);
    Ok(match excitation {
        Excitation::White => white,
        Excitation::Ar1 { pole } => ar1_filter(pole, &white),
    })
}

/// Clean echo sample `x^T(n) h`.
pub fn echo_output(response: &ImpulseResponse, history: &RegressorHistory) -> Result<f64> {
    Error::check_len("history filter length", response.len(), history.filter_length())?;
    Ok(dot(history.newest(), response.taps()))
}

fn mean_power(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64
}

/// White Gaussian noise scaled so that the empirical power ratio
/// `P(clean) / P(noise)` equals `10^(snr_db / 10)`.
pub fn scale_noise_for_snr(clean_echo: &[f64], snr_db: f64, seed: u64) -> Result<Vec<f64>> {
    if clean_echo.is_empty() {
        return Err(Error::invalid("clean echo is empty"));
    }
    if !snr_db.is_finite() {
        return Err(Error::invalid(format!("SNR must be finite, got {snr_db}")));
    }
    let signal_power = mean_power(clean_echo);
    if !(signal_power > 0.0) {
        return Err(Error::invalid("clean echo has zero power"));
    }
    let raw = gaussian(&mut rng_for(seed, STREAM_NOISE), clean_echo.len());
    let raw_power = mean_power(&raw);
    let target = signal_power / 10f64.powf(snr_db / 10.0);
    let gain = (target / raw_power).sqrt();
    Ok(raw.into_iter().map(|v| v * gain).collect())
}

/// `10 log10(|h - est|^2 / |h|^2)`, clamped below at -300 dB.
pub fn misalignment_db(true_h: &[f64], est_h: &[f64]) -> Result<f64> {
    Error::check_len("estimate length", true_h.len(), est_h.len())?;
    let energy: f64 = true_h.iter().map(|h| h * h).sum();
    if !(energy > 0.0) {
        return Err(Error::invalid("true system has zero energy"));
    }
    let err: f64 = true_h.iter().zip(est_h).map(|(h, e)| (h - e) * (h - e)).sum();
    Ok((10.0 * (err / energy).log10()).max(MISALIGNMENT_FLOOR_DB))
}

/// One entry of an echo-path schedule: `response` is active from sample
/// `start` until the next entry.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSegment {
    pub start: usize,
    pub response: ImpulseResponse,
}

/// A complete identification scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct EchoScenario {
    schedule: Vec<PathSegment>,
    excitation: Excitation,
    /// `None` runs noiseless.
    snr_db: Option<f64>,
    seed: u64,
    total_samples: usize,
}

impl EchoScenario {
    pub fn new(
        schedule: Vec<PathSegment>,
        excitation: Excitation,
        snr_db: Option<f64>,
        seed: u64,
        total_samples: usize,
    ) -> Result<Self> {
        if total_samples == 0 {
            return Err(Error::invalid("total samples must be positive"));
        }
        let first = schedule
            .first()
            .ok_or_else(|| Error::invalid("echo-path schedule is empty"))?;
        if first.start != 0 {
            return Err(Error::invalid("echo-path schedule must start at sample 0"));
        }
        let l = first.response.len();
        for pair in schedule.windows(2) {
            if pair[1].start <= pair[0].start {
                return Err(Error::invalid("echo-path switches must be strictly increasing"));
            }
        }
        for seg in &schedule {
            if seg.start >= total_samples {
                return Err(Error::invalid(format!(
                    "path switch at {} is beyond the {total_samples}-sample run",
                    seg.start
                )));
            }
            Error::check_len("impulse response length", l, seg.response.len())?;
            if !seg.response.taps().iter().any(|&t| t != 0.0) {
                return Err(Error::invalid(format!(
                    "impulse response starting at {} is identically zero",
                    seg.start
                )));
            }
        }
        excitation.validate()?;
        if let Some(snr) = snr_db {
            if !snr.is_finite() {
                return Err(Error::invalid(format!("SNR must be finite, got {snr}")));
            }
        }
        Ok(Self {
            schedule,
            excitation,
            snr_db,
            seed,
            total_samples,
        })
    }

    pub fn filter_length(&self) -> usize {
        self.schedule[0].response.len()
    }

    pub fn schedule(&self) -> &[PathSegment] {
        &self.schedule
    }

    pub fn excitation(&self) -> Excitation {
        self.excitation
    }

    pub fn snr_db(&self) -> Option<f64> {
        self.snr_db
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn total_samples(&self) -> usize {
        self.total_samples
    }

    /// Sample ranges `[start, end)` of each schedule entry.
    pub fn segment_bounds(&self) -> Vec<(usize, usize)> {
        self.schedule
            .iter()
            .enumerate()
            .map(|(i, seg)| {
                let end = self
                    .schedule
                    .get(i + 1)
                    .map_or(self.total_samples, |next| next.start);
                (seg.start, end)
            })
            .collect()
    }

    /// Index of the schedule entry active at `sample`.
    pub fn segment_at(&self, sample: usize) -> usize {
        self.schedule.partition_point(|seg| seg.start <= sample) - 1
    }

    /// Generates excitation, clean echo and noisy observation for the whole
    /// run. Noise is calibrated separately on each segment's clean echo so
    /// the target SNR holds on both sides of a path change.
    pub fn synthesize(&self) -> Result<SynthesizedScenario> {
        let l = self.filter_length();
        let input = gen_excitation(self.excitation, self.seed, self.total_samples)?;

        let mut history = RegressorHistory::new(l, 1)?;
        let mut clean = Vec::with_capacity(self.total_samples);
        for (n, &x) in input.iter().enumerate() {
            history.push(x);
            let seg = &self.schedule[self.segment_at(n)];
            clean.push(echo_output(&seg.response, &history)?);
        }

        let mut desired = clean.clone();
        if let Some(snr) = self.snr_db {
            for (k, (start, end)) in self.segment_bounds().into_iter().enumerate() {
                let noise_seed = self.seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
                let noise = scale_noise_for_snr(&clean[start..end], snr, noise_seed)?;
                for (d, v) in desired[start..end].iter_mut().zip(noise) {
                    *d += v;
                }
            }
        }

        Ok(SynthesizedScenario {
            input,
            clean_echo: clean,
            desired,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesizedScenario {
    pub input: Vec<f64>,
    pub clean_echo: Vec<f64>,
    /// Clean echo plus measurement noise.
    pub desired: Vec<f64>,
}
