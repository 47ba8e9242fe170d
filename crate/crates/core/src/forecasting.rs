//! Conditional predictive distributions.
//!
//! Given the information up to time t, Y_{t+1} is a g-component Gaussian
//! mixture and Y_{t+2} a g²-component one. Component (k, l) of the two-step
//! mixture corresponds to regime l at t+1 followed by regime k at t+2, so it has
//! weight π_k π_l, covariance Ψ_kl = Ω_k + Θ_k1 Ω_l Θ_k1ᵀ and mean
//!
//! ```text
//! μ_kl = Θ_k0 + Θ_k1 Θ_l0 + Σ_{i=1}^{p-1} (Θ_k,i+1 + Θ_k1 Θ_li) Y_{t+1-i} + Θ_k1 Θ_lp Y_{t+1-p}
//! ```
//!
//! In general μ_kl ≠ μ_lk. Longer horizons are handled by simulation.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{MvarError, Result};
use crate::linalg::{is_symmetric, spd_cholesky, symmetrize};
use crate::model::{ForecastOrigin, MvarParameters, WEIGHT_SUM_TOL};
use crate::rng;
use crate::simulation::step;

/// Weighted set of multivariate Gaussian components.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureNormalMV {
    weights: Vec<f64>,
    means: Vec<DVector<f64>>,
    covs: Vec<DMatrix<f64>>,
    horizon: usize,
    origin: usize,
}

impl MixtureNormalMV {
    pub fn new(
        weights: Vec<f64>,
        means: Vec<DVector<f64>>,
        covs: Vec<DMatrix<f64>>,
        horizon: usize,
        origin: usize,
    ) -> Result<Self> {
        if weights.is_empty() || weights.len() != means.len() || weights.len() != covs.len() {
            return Err(MvarError::InvalidParameters(
                "mixture needs equally many weights, means and covariances".into(),
            ));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0))
            || (weights.iter().sum::<f64>() - 1.0).abs() > WEIGHT_SUM_TOL
        {
            return Err(MvarError::InvalidParameters(
                "mixture weights must be nonnegative and sum to 1".into(),
            ));
        }
        let m = means[0].len();
        for (j, (mu, cov)) in means.iter().zip(&covs).enumerate() {
            if mu.len() != m || cov.nrows() != m || cov.ncols() != m {
                return Err(MvarError::DimensionMismatch { expected: m, found: mu.len() });
            }
            if spd_cholesky(cov).is_none() {
                return Err(MvarError::NotPositiveDefinite { component: j });
            }
        }
        Ok(Self { weights, means, covs, horizon, origin })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn means(&self) -> &[DVector<f64>] {
        &self.means
    }

    pub fn covs(&self) -> &[DMatrix<f64>] {
        &self.covs
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn origin(&self) -> usize {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.means[0].len()
    }
}

/// Conditional mean and covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentPair {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

/// One-step predictive mixture: weights π_k, means μ_{t+1,k}, covariances Ω_k.
pub fn predictive_one_step(
    params: &MvarParameters,
    origin: &ForecastOrigin,
) -> Result<MixtureNormalMV> {
    origin.check_model(params.spec())?;
    let lags = origin.lags();
    let g = params.spec().g();
    let means = (0..g).map(|k| params.component_mean(k, &lags)).collect();
    Ok(MixtureNormalMV {
        weights: params.weights().to_vec(),
        means,
        covs: params.covs().to_vec(),
        horizon: 1,
        origin: origin.time(),
    })
}

/// Mixture mean Σ w_j μ_j and covariance Σ w_j Σ_j + Σ w_j μ_j μ_jᵀ − μ μᵀ.
pub fn mixture_moments(mix: &MixtureNormalMV) -> MomentPair {
    let m = mix.dim();
    let mut mean = DVector::zeros(m);
    for (w, mu) in mix.weights.iter().zip(&mix.means) {
        mean.axpy(*w, mu, 1.0);
    }
    // centring each component mean before the outer product avoids the
    // cancellation in Σ w μμᵀ − μ̄μ̄ᵀ
    let mut cov = DMatrix::zeros(m, m);
    for ((w, mu), sigma) in mix.weights.iter().zip(&mix.means).zip(&mix.covs) {
        let d = mu - &mean;
        cov += sigma * *w;
        cov.ger(*w, &d, &d, 1.0);
    }
    MomentPair { mean, cov: symmetrize(&cov) }
}

/// Two-step predictive mixture with g² components ordered k-major: index
/// k·g + l holds regime l at t+1 followed by regime k at t+2.
pub fn predictive_two_step(
    params: &MvarParameters,
    origin: &ForecastOrigin,
) -> Result<MixtureNormalMV> {
    origin.check_model(params.spec())?;
    let spec = params.spec();
    let (g, m, p) = (spec.g(), spec.m(), spec.p());
    let lags = origin.lags();
    let zero = DMatrix::zeros(m, m);
    let lag1 = |k: usize| if p >= 1 { params.ar(k, 1) } else { &zero };

    let mut weights = Vec::with_capacity(g * g);
    let mut means = Vec::with_capacity(g * g);
    let mut covs = Vec::with_capacity(g * g);
    for k in 0..g {
        let a1 = lag1(k);
        for l in 0..g {
            let mut mu = params.intercept(k) + a1 * params.intercept(l);
            for i in 1..p {
                let coef = params.ar(k, i + 1) + a1 * params.ar(l, i);
                mu.gemv(1.0, &coef, lags[i - 1], 1.0);
            }
            if p >= 1 {
                mu += a1 * (params.ar(l, p) * lags[p - 1]);
            }
            let psi = params.cov(k) + a1 * params.cov(l) * a1.transpose();
            weights.push(params.weights()[k] * params.weights()[l]);
            means.push(mu);
            covs.push(symmetrize(&psi));
        }
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    Ok(MixtureNormalMV { weights, means, covs, horizon: 2, origin: origin.time() })
}

/// Paths simulated per RNG substream in Monte Carlo forecasts.
pub const MC_CHUNK: usize = 8192;

/// Monte Carlo draws of Y_{t+h} and their empirical moments.
#[derive(Debug, Clone, PartialEq)]
pub struct McForecast {
    /// n_paths × m endpoint sample.
    pub samples: DMatrix<f64>,
    pub moments: MomentPair,
    pub horizon: usize,
}

/// Simulates `n_paths` trajectories of length h from the origin. Chunk c of
/// `MC_CHUNK` paths uses substream c of `seed`, so the result does not depend
/// on thread scheduling.
pub fn predictive_h_step_mc(
    params: &MvarParameters,
    origin: &ForecastOrigin,
    horizon: usize,
    n_paths: usize,
    seed: u64,
) -> Result<McForecast> {
    origin.check_model(params.spec())?;
    if horizon == 0 || n_paths == 0 {
        return Err(MvarError::InvalidParameters(
            "horizon and path count must be at least 1".into(),
        ));
    }
    let (m, p) = (params.spec().m(), params.spec().p());
    let n_chunks = n_paths.div_ceil(MC_CHUNK);
    let chunks: Vec<Vec<DVector<f64>>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng::stream(seed, c as u64);
            let count = MC_CHUNK.min(n_paths - c * MC_CHUNK);
            let mut out = Vec::with_capacity(count);
            let mut path: Vec<DVector<f64>> = Vec::with_capacity(p + horizon);
            for _ in 0..count {
                path.clear();
                path.extend(origin.history().iter().cloned());
                for _ in 0..horizon {
                    let t = path.len();
                    let lags: Vec<&DVector<f64>> = (1..=p).map(|i| &path[t - i]).collect();
                    let (_, y) = step(params, &lags, &mut rng);
                    path.push(y);
                }
                out.push(path.pop().expect("horizon >= 1"));
            }
            out
        })
        .collect();

    let mut samples = DMatrix::zeros(n_paths, m);
    for (r, y) in chunks.iter().flatten().enumerate() {
        samples.row_mut(r).copy_from(&y.transpose());
    }
    let moments = sample_moments(&samples);
    Ok(McForecast { samples, moments, horizon })
}

/// Sample mean and covariance (denominator N − 1; zero covariance for N = 1).
pub fn sample_moments(samples: &DMatrix<f64>) -> MomentPair {
    let (n, m) = samples.shape();
    let mean: DVector<f64> = samples.row_mean().transpose();
    let mut cov = DMatrix::zeros(m, m);
    if n > 1 {
        for r in 0..n {
            let d = samples.row(r).transpose() - &mean;
            cov.ger(1.0, &d, &d, 1.0);
        }
        cov /= (n - 1) as f64;
    }
    MomentPair { mean, cov }
}

impl MomentPair {
    /// Symmetric within 1e-10 and with no eigenvalue below −1e-10.
    pub fn is_valid(&self) -> bool {
        is_symmetric(&self.cov, 1e-10)
            && symmetrize(&self.cov).symmetric_eigenvalues().iter().all(|e| *e >= -1e-10)
    }
}
