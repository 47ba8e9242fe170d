//! Sample paths from an MVAR model.

use nalgebra::DVector;
use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{MvarError, Result};
use crate::model::{MvarParameters, SeriesMatrix};
use crate::rng::{self, Rng};

pub const DEFAULT_BURN_IN: usize = 200;

#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub params: MvarParameters,
    pub n: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// p starting vectors, oldest first; zeros when absent.
    pub initial: Option<Vec<DVector<f64>>>,
}

impl SimulationConfig {
    pub fn new(params: MvarParameters, n: usize, seed: u64) -> Self {
        Self { params, n, burn_in: DEFAULT_BURN_IN, seed, initial: None }
    }
}

/// A simulated path and the component drawn at each of its steps.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedPath {
    pub series: SeriesMatrix,
    pub labels: Vec<usize>,
}

/// Draws a component label with probability π_k.
pub(crate) fn draw_label(weights: &[f64], rng: &mut Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return k;
        }
    }
    // u landed in the rounding gap above the cumulative sum
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(0)
}

/// One transition: label, then Y = μ_k + L_k ε with L_k the lower Cholesky
/// factor of Ω_k. `lags[i-1]` is Y_{t-i}.
pub(crate) fn step(
    params: &MvarParameters,
    lags: &[&DVector<f64>],
    rng: &mut Rng,
) -> (usize, DVector<f64>) {
    let k = draw_label(params.weights(), rng);
    let m = params.spec().m();
    let eps = DVector::from_fn(m, |_, _| rng.sample::<f64, _>(StandardNormal));
    let mut y = params.component_mean(k, lags);
    y.gemv(1.0, params.cov_lower(k), &eps, 1.0);
    (k, y)
}

/// Generates `n` observations after discarding `burn_in` steps. Identical
/// configurations give bit-identical output.
pub fn simulate(config: &SimulationConfig) -> Result<SimulatedPath> {
    let params = &config.params;
    let (m, p) = (params.spec().m(), params.spec().p());
    if config.n == 0 {
        return Err(MvarError::InvalidParameters("simulation length must be at least 1".into()));
    }
    let mut path: Vec<DVector<f64>> = match &config.initial {
        Some(init) => {
            if init.len() != p {
                return Err(MvarError::DimensionMismatch { expected: p, found: init.len() });
            }
            if let Some(v) = init.iter().find(|v| v.len() != m) {
                return Err(MvarError::DimensionMismatch { expected: m, found: v.len() });
            }
            init.clone()
        }
        None => vec![DVector::zeros(m); p],
    };
    let total = config.burn_in + config.n;
    path.reserve(total);
    let mut labels = Vec::with_capacity(total);
    let mut rng = rng::stream(config.seed, 0);
    for _ in 0..total {
        let t = path.len();
        let lags: Vec<&DVector<f64>> = (1..=p).map(|i| &path[t - i]).collect();
        let (k, y) = step(params, &lags, &mut rng);
        path.push(y);
        labels.push(k);
    }
    let keep = path.split_off(p + config.burn_in);
    Ok(SimulatedPath {
        series: SeriesMatrix::new(keep)?,
        labels: labels.split_off(config.burn_in),
    })
}
