//! Textbook implementations of the classical family members, written
//! independently of the unified engine in [`crate::filter`]: explicit
//! shift-register buffers, per-tap gain rules, naive matrix products and a
//! separate Gauss-Jordan solve. They exist to cross-check the engine's
//! special-case reductions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::filter::{AdaptiveFilter, FilterConfig, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassicKind {
    /// Plain affine projection, `G = I`.
    Apa,
    /// Per-tap proportionate gains.
    Papa,
    /// Per-tap gains with the memory regressor.
    Mpapa,
    /// Single projection, block gains, scalar normalization.
    BsPnlms { group_size: usize },
}

#[derive(Debug, Clone, Copy)]
pub struct ClassicParams {
    pub filter_length: usize,
    pub projection_order: usize,
    pub step_size: f64,
    pub regularization: f64,
    pub rho: f64,
    pub q: f64,
}

#[derive(Debug, Clone)]
pub struct ClassicFilter {
    kind: ClassicKind,
    params: ClassicParams,
    weights: Vec<f64>,
    inputs: Vec<f64>,
    desired: Vec<f64>,
    memory: Vec<Vec<f64>>,
}

impl ClassicFilter {
    pub fn new(kind: ClassicKind, mut params: ClassicParams) -> Result<Self> {
        if let ClassicKind::BsPnlms { group_size } = kind {
            params.projection_order = 1;
            if group_size == 0 || !params.filter_length.is_multiple_of(group_size) {
                return Err(Error::invalid(format!(
                    "group size {group_size} does not divide {}",
                    params.filter_length
                )));
            }
        }
        let l = params.filter_length;
        let m = params.projection_order;
        if l == 0 || m == 0 {
            return Err(Error::invalid("L and M must be positive"));
        }
        Ok(Self {
            kind,
            params,
            weights: vec![0.0; l],
            inputs: vec![0.0; l + m - 1],
            desired: vec![0.0; m],
            memory: vec![vec![0.0; l]; m],
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn gains(&self) -> Vec<f64> {
        let l = self.params.filter_length;
        let (rho, q) = (self.params.rho, self.params.q);
        match self.kind {
            ClassicKind::Apa => vec![1.0; l],
            ClassicKind::Papa | ClassicKind::Mpapa => {
                let mut largest = q;
                for w in &self.weights {
                    if w.abs() > largest {
                        largest = w.abs();
                    }
                }
                let gamma: Vec<f64> = self.weights.iter().map(|w| (rho * largest).max(w.abs())).collect();
                let total: f64 = gamma.iter().sum();
                gamma.iter().map(|g| g / (total / l as f64)).collect()
            }
            ClassicKind::BsPnlms { group_size } => {
                let n = l / group_size;
                let mut norms = vec![0.0; n];
                for (i, norm) in norms.iter_mut().enumerate() {
                    let mut s = 0.0;
                    for k in 0..group_size {
                        let w = self.weights[i * group_size + k];
                        s += w * w;
                    }
                    *norm = s.sqrt();
                }
                let largest = norms.iter().fold(q, |a, &b| a.max(b));
                let gamma: Vec<f64> = norms.iter().map(|nm| (rho * largest).max(*nm)).collect();
                let mean = gamma.iter().sum::<f64>() / n as f64;
                let mut out = Vec::with_capacity(l);
                for g in gamma {
                    for _ in 0..group_size {
                        out.push(g / mean);
                    }
                }
                out
            }
        }
    }

    pub fn process(&mut self, x: f64, d: f64) -> Result<f64> {
        let l = self.params.filter_length;
        let m = self.params.projection_order;
        self.inputs.rotate_right(1);
        self.inputs[0] = x;
        self.desired.rotate_right(1);
        self.desired[0] = d;

        let xmat: Vec<Vec<f64>> = (0..m).map(|j| self.inputs[j..j + l].to_vec()).collect();
        let mut err = vec![0.0; m];
        for k in 0..m {
            let mut y = 0.0;
            for t in 0..l {
                y += xmat[k][t] * self.weights[t];
            }
            err[k] = self.desired[k] - y;
        }
        let g = self.gains();
        let (mu, delta) = (self.params.step_size, self.params.regularization);

        if let ClassicKind::BsPnlms { .. } = self.kind {
            let p: Vec<f64> = (0..l).map(|t| g[t] * xmat[0][t]).collect();
            let mut power = delta;
            for t in 0..l {
                power += xmat[0][t] * p[t];
            }
            if power == 0.0 {
                return Err(Error::Singular { pivot: 0.0, row: 0 });
            }
            for t in 0..l {
                self.weights[t] += mu * p[t] * err[0] / power;
            }
            return Ok(err[0]);
        }

        let pmat: Vec<Vec<f64>> = match self.kind {
            ClassicKind::Mpapa => {
                self.memory.rotate_right(1);
                self.memory[0] = (0..l).map(|t| g[t] * xmat[0][t]).collect();
                self.memory.clone()
            }
            _ => (0..m)
                .map(|j| (0..l).map(|t| g[t] * xmat[j][t]).collect())
                .collect(),
        };

        let mut a = vec![vec![0.0; m]; m];
        for i in 0..m {
            for j in 0..m {
                let mut s = 0.0;
                for t in 0..l {
                    s += xmat[i][t] * pmat[j][t];
                }
                a[i][j] = s;
            }
            a[i][i] += delta;
        }
        let z = gauss_jordan(a, err.clone())?;
        for t in 0..l {
            let mut corr = 0.0;
            for j in 0..m {
                corr += pmat[j][t] * z[j];
            }
            self.weights[t] += mu * corr;
        }
        Ok(err[0])
    }
}

fn gauss_jordan(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let m = b.len();
    for col in 0..m {
        let mut best = col;
        for r in col + 1..m {
            if a[r][col].abs() > a[best][col].abs() {
                best = r;
            }
        }
        if a[best][col] == 0.0 {
            return Err(Error::Singular { pivot: 0.0, row: col });
        }
        a.swap(col, best);
        b.swap(col, best);
        let piv = a[col][col];
        for c in 0..m {
            a[col][c] /= piv;
        }
        b[col] /= piv;
        for r in 0..m {
            if r != col {
                let f = a[r][col];
                for c in 0..m {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    Ok(b)
}

/// Result of one reduction cross-check.
#[derive(Debug, Clone)]
pub struct EquivalenceCheck {
    pub name: &'static str,
    pub max_abs_deviation: f64,
    pub tolerance: f64,
}

impl EquivalenceCheck {
    pub fn passed(&self) -> bool {
        self.max_abs_deviation <= self.tolerance
    }
}

pub const EQUIVALENCE_TOLERANCE: f64 = 1e-10;

/// Runs every special-case reduction of the engine against the matching
/// textbook filter for `steps` samples (L = 64, M = 4, white input, sparse
/// target with light measurement noise) and reports the largest final-weight
/// deviation of each pair.
pub fn equivalence_suite(seed: u64, steps: usize) -> Result<Vec<EquivalenceCheck>> {
    const L: usize = 64;
    const M: usize = 4;
    const BS_GROUP: usize = 4;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut target = vec![0.0; L];
    for _ in 0..6 {
        let at = rng.random_range(0..L);
        target[at] = StandardNormal.sample(&mut rng);
    }
    let mut window = vec![0.0; L];
    let mut xs = Vec::with_capacity(steps);
    let mut ds = Vec::with_capacity(steps);
    for _ in 0..steps {
        let x: f64 = StandardNormal.sample(&mut rng);
        window.rotate_right(1);
        window[0] = x;
        let noise: f64 = StandardNormal.sample(&mut rng);
        let d: f64 = window.iter().zip(&target).map(|(a, b)| a * b).sum::<f64>() + 0.01 * noise;
        xs.push(x);
        ds.push(d);
    }

    let params = ClassicParams {
        filter_length: L,
        projection_order: M,
        step_size: 0.2,
        regularization: 0.01,
        rho: 0.01,
        q: 0.01,
    };
    let engine = |variant: Variant, p: usize, m: usize| -> Result<FilterConfig> {
        FilterConfig::builder(variant, L)
            .group_size(p)
            .projection_order(m)
            .step_size(params.step_size)
            .regularization(params.regularization)
            .guards(params.rho, params.q)
            .build()
    };

    let pairs: [(&'static str, FilterConfig, ClassicKind); 4] = [
        ("bs-papa(P=1) vs papa", engine(Variant::BsPapa, 1, M)?, ClassicKind::Papa),
        ("bs-papa(P=L) vs apa", engine(Variant::BsPapa, L, M)?, ClassicKind::Apa),
        (
            "bs-papa(M=1) vs bs-pnlms",
            engine(Variant::BsPapa, BS_GROUP, 1)?,
            ClassicKind::BsPnlms { group_size: BS_GROUP },
        ),
        ("bs-mpapa(P=1) vs mpapa", engine(Variant::BsMpapa, 1, M)?, ClassicKind::Mpapa),
    ];

    pairs
        .into_iter()
        .map(|(name, config, kind)| {
            let mut unified = AdaptiveFilter::new(config);
            let mut classic = ClassicFilter::new(kind, params)?;
            for (&x, &d) in xs.iter().zip(&ds) {
                unified.process(x, d)?;
                classic.process(x, d)?;
            }
            let dev = unified
                .weights()
                .iter()
                .zip(classic.weights())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            Ok(EquivalenceCheck {
                name,
                max_abs_deviation: dev,
                tolerance: EQUIVALENCE_TOLERANCE,
            })
        })
        .collect()
}
