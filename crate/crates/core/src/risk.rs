//! Distribution function, quantiles, VaR, expected shortfall and CRPS for
//! univariate Gaussian mixtures.
//!
//! VaR at level α is the (1 − α)-quantile of the return distribution reported
//! as a signed return, so a 95% VaR is the 5% quantile and is negative when it
//! denotes a loss. Expected shortfall is the mean return below that quantile.

use crate::error::{MvarError, Result};
use crate::normal;
use crate::portfolio::{scalar_mixture_moments, MixtureNormal1D};

/// Accuracy required of the quantile search on the probability scale.
pub const QUANTILE_TOL: f64 = 1e-10;

pub fn mixture_cdf(mix: &MixtureNormal1D, x: f64) -> f64 {
    mix.components().map(|(w, m, s)| w * normal::cdf((x - m) / s)).sum()
}

pub fn mixture_pdf(mix: &MixtureNormal1D, x: f64) -> f64 {
    mix.components().map(|(w, m, s)| w * normal::pdf((x - m) / s) / s).sum()
}

/// Inverts the mixture CDF with a bisection-safeguarded Newton iteration on
/// an adaptively widened bracket.
pub fn mixture_quantile(mix: &MixtureNormal1D, q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(MvarError::InvalidProbability(q));
    }
    let (mut lo, mut hi) = mix.components().fold(
        (f64::INFINITY, f64::NEG_INFINITY),
        |(lo, hi), (_, m, s)| (lo.min(m - 10.0 * s), hi.max(m + 10.0 * s)),
    );
    let span = (hi - lo).max(1.0);
    let mut widen = 0;
    while mixture_cdf(mix, lo) > q {
        lo -= span * f64::powi(2.0, widen);
        widen += 1;
        if widen > 60 {
            return Err(MvarError::QuantileBracket(q));
        }
    }
    widen = 0;
    while mixture_cdf(mix, hi) < q {
        hi += span * f64::powi(2.0, widen);
        widen += 1;
        if widen > 60 {
            return Err(MvarError::QuantileBracket(q));
        }
    }

    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let f = mixture_cdf(mix, x) - q;
        if f.abs() < QUANTILE_TOL * 0.01 {
            return Ok(x);
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let density = mixture_pdf(mix, x);
        let newton = x - f / density;
        x = if density > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo <= f64::EPSILON * x.abs().max(1e-300) {
            break;
        }
    }
    if (mixture_cdf(mix, x) - q).abs() < QUANTILE_TOL {
        Ok(x)
    } else {
        Err(MvarError::QuantileBracket(q))
    }
}

/// Value-at-Risk and expected shortfall at one level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskReport {
    pub alpha: f64,
    pub var: f64,
    pub es: f64,
}

impl RiskReport {
    /// VaR as a positive loss magnitude.
    pub fn loss(&self) -> f64 {
        -self.var
    }
}

/// VaR = (1 − α)-quantile; ES = (1/(1 − α)) Σ_j w_j [μ_j Φ(z_j) − σ_j φ(z_j)]
/// with z_j = (VaR − μ_j)/σ_j.
pub fn var_es(mix: &MixtureNormal1D, alpha: f64) -> Result<RiskReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(MvarError::InvalidProbability(alpha));
    }
    let tail = 1.0 - alpha;
    let var = mixture_quantile(mix, tail)?;
    let partial: f64 = mix
        .components()
        .map(|(w, m, s)| {
            let z = (var - m) / s;
            w * (m * normal::cdf(z) - s * normal::pdf(z))
        })
        .sum();
    // the tail mass equals `tail` only to QUANTILE_TOL; es ≤ var holds exactly
    // when dividing by the realised mass
    let mass = mixture_cdf(mix, var);
    Ok(RiskReport { alpha, var, es: (partial / mass).min(var) })
}

/// E|X − x| − ½ E|X − X'| building block for normal differences:
/// A(d, s) = d(2Φ(d/s) − 1) + 2sφ(d/s), the mean of |N(d, s²)|.
fn abs_normal_mean(d: f64, s: f64) -> f64 {
    let z = d / s;
    d * (2.0 * normal::cdf(z) - 1.0) + 2.0 * s * normal::pdf(z)
}

/// Closed-form CRPS of a Gaussian mixture at observation x:
/// Σ_j w_j A(x − μ_j, σ_j) − ½ Σ_j Σ_l w_j w_l A(μ_j − μ_l, √(σ_j² + σ_l²)).
pub fn crps_mixture(mix: &MixtureNormal1D, x: f64) -> f64 {
    let first: f64 = mix.components().map(|(w, m, s)| w * abs_normal_mean(x - m, s)).sum();
    let mut second = 0.0;
    for (wj, mj, sj) in mix.components() {
        for (wl, ml, sl) in mix.components() {
            second += wj * wl * abs_normal_mean(mj - ml, (sj * sj + sl * sl).sqrt());
        }
    }
    (first - 0.5 * second).max(0.0)
}

/// Points for a density plot: `points` evenly spaced values over μ ± 6σ of
/// the mixture, paired with the mixture density.
pub fn density_grid(mix: &MixtureNormal1D, points: usize) -> Vec<(f64, f64)> {
    let (mean, variance) = scalar_mixture_moments(mix);
    let sd = variance.sqrt();
    let (lo, hi) = (mean - 6.0 * sd, mean + 6.0 * sd);
    let step = if points > 1 { (hi - lo) / (points - 1) as f64 } else { 0.0 };
    (0..points)
        .map(|i| {
            let x = lo + step * i as f64;
            (x, mixture_pdf(mix, x))
        })
        .collect()
}
