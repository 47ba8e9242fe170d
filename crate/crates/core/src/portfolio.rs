//! Portfolio returns under a predictive mixture and Markowitz weights.
//!
//! A portfolio w applied to a Gaussian mixture for Y gives a univariate
//! Gaussian mixture for R = wᵀY with the same weights, component means wᵀμ_j
//! and variances wᵀΣ_j w. Markowitz weights are computed from the conditional
//! mean and covariance of the mixture, with short selling allowed and the
//! budget constraint Σw = 1. Every Ω⁻¹ application is a Cholesky solve.

use nalgebra::{DMatrix, DVector};

use crate::error::{MvarError, Result};
use crate::forecasting::{
    mixture_moments, predictive_one_step, predictive_two_step, MixtureNormalMV,
};
use crate::linalg::spd_cholesky;
use crate::model::{ForecastOrigin, MvarParameters, WEIGHT_SUM_TOL};

/// Frontier curvature D at or below which the efficient frontier is degenerate.
pub const DEGENERATE_D: f64 = 1e-12;

/// Weighted set of univariate Gaussian components.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureNormal1D {
    weights: Vec<f64>,
    means: Vec<f64>,
    sds: Vec<f64>,
    horizon: usize,
    origin: usize,
}

impl MixtureNormal1D {
    pub fn new(
        weights: Vec<f64>,
        means: Vec<f64>,
        sds: Vec<f64>,
        horizon: usize,
        origin: usize,
    ) -> Result<Self> {
        if weights.is_empty() || weights.len() != means.len() || weights.len() != sds.len() {
            return Err(MvarError::InvalidParameters(
                "mixture needs equally many weights, means and standard deviations".into(),
            ));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0))
            || (weights.iter().sum::<f64>() - 1.0).abs() > WEIGHT_SUM_TOL
        {
            return Err(MvarError::InvalidParameters(
                "mixture weights must be nonnegative and sum to 1".into(),
            ));
        }
        if means.iter().any(|m| !m.is_finite()) {
            return Err(MvarError::InvalidParameters("component means must be finite".into()));
        }
        if let Some(j) = sds.iter().position(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(MvarError::NonPositiveVariance { component: j, variance: sds[j] });
        }
        Ok(Self { weights, means, sds, horizon, origin })
    }

    /// Weights that sum to one only up to rounding are rescaled.
    pub fn normalized(
        mut weights: Vec<f64>,
        means: Vec<f64>,
        sds: Vec<f64>,
        horizon: usize,
        origin: usize,
    ) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Self::new(weights, means, sds, horizon, origin)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn sds(&self) -> &[f64] {
        &self.sds
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

    /// Iterator over (weight, mean, sd).
    pub fn components(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.weights
            .iter()
            .zip(&self.means)
            .zip(&self.sds)
            .map(|((w, m), s)| (*w, *m, *s))
    }

    /// Adds `c` to every component mean.
    pub fn shifted(&self, c: f64) -> Self {
        Self { means: self.means.iter().map(|m| m + c).collect(), ..self.clone() }
    }
}

/// Distribution of wᵀY when Y follows `mix`.
pub fn project(mix: &MixtureNormalMV, w: &DVector<f64>) -> Result<MixtureNormal1D> {
    if w.len() != mix.dim() {
        return Err(MvarError::DimensionMismatch { expected: mix.dim(), found: w.len() });
    }
    let mut sds = Vec::with_capacity(mix.len());
    for (j, cov) in mix.covs().iter().enumerate() {
        let variance = (w.transpose() * cov * w)[(0, 0)];
        if !(variance > 0.0) {
            return Err(MvarError::NonPositiveVariance { component: j, variance });
        }
        sds.push(variance.sqrt());
    }
    Ok(MixtureNormal1D {
        weights: mix.weights().to_vec(),
        means: mix.means().iter().map(|mu| w.dot(mu)).collect(),
        sds,
        horizon: mix.horizon(),
        origin: mix.origin(),
    })
}

/// Mean Σ w_j μ_j and variance Σ w_j σ_j² + Σ w_j μ_j² − μ².
pub fn scalar_mixture_moments(mix: &MixtureNormal1D) -> (f64, f64) {
    let mean: f64 = mix.components().map(|(w, m, _)| w * m).sum();
    // written around the mixture mean, equal to Σ w σ² + Σ w μ² − μ̄²
    let variance = mix
        .components()
        .map(|(w, m, s)| w * (s * s + (m - mean) * (m - mean)))
        .sum();
    (mean, variance)
}

/// A = 𝟙ᵀΩ⁻¹μ, B = μᵀΩ⁻¹μ, C = 𝟙ᵀΩ⁻¹𝟙, D = CB − A².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkowitzCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl MarkowitzCoefficients {
    /// Variance of the efficient portfolio with the given target return,
    /// (C·target² − 2A·target + B) / D.
    pub fn frontier_variance(&self, target: f64) -> f64 {
        (self.c * target * target - 2.0 * self.a * target + self.b) / self.d
    }

    pub fn mvp_return(&self) -> f64 {
        self.a / self.c
    }
}

struct Frontier {
    inv_ones: DVector<f64>,
    inv_mean: DVector<f64>,
    coefs: MarkowitzCoefficients,
}

fn frontier(mean: &DVector<f64>, cov: &DMatrix<f64>) -> Result<Frontier> {
    let m = mean.len();
    if cov.nrows() != m || cov.ncols() != m {
        return Err(MvarError::DimensionMismatch { expected: m, found: cov.nrows() });
    }
    let chol = spd_cholesky(cov).ok_or(MvarError::SingularCovariance)?;
    let ones = DVector::from_element(m, 1.0);
    let inv_ones = chol.solve(&ones);
    let inv_mean = chol.solve(mean);
    let a = ones.dot(&inv_mean);
    let b = mean.dot(&inv_mean);
    let c = ones.dot(&inv_ones);
    let d = c * b - a * a;
    Ok(Frontier { inv_ones, inv_mean, coefs: MarkowitzCoefficients { a, b, c, d } })
}

pub fn markowitz_coefficients(
    mean: &DVector<f64>,
    cov: &DMatrix<f64>,
) -> Result<MarkowitzCoefficients> {
    frontier(mean, cov).map(|f| f.coefs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PortfolioKind {
    MinimumVariance,
    Efficient,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioSolution {
    pub weights: DVector<f64>,
    pub expected_return: f64,
    pub sd: f64,
    pub kind: PortfolioKind,
    pub horizon: usize,
}

fn solution(
    weights: DVector<f64>,
    mean: &DVector<f64>,
    cov: &DMatrix<f64>,
    kind: PortfolioKind,
) -> PortfolioSolution {
    let variance = (weights.transpose() * cov * &weights)[(0, 0)];
    PortfolioSolution {
        expected_return: weights.dot(mean),
        sd: variance.max(0.0).sqrt(),
        weights,
        kind,
        horizon: 1,
    }
}

/// Minimum variance portfolio w = Ω⁻¹𝟙 / C.
pub fn mvp_weights(mean: &DVector<f64>, cov: &DMatrix<f64>) -> Result<PortfolioSolution> {
    let f = frontier(mean, cov)?;
    let w = &f.inv_ones / f.coefs.c;
    Ok(solution(w, mean, cov, PortfolioKind::MinimumVariance))
}

/// Efficient portfolio with expected return `target`:
/// w = (1/D)[BΩ⁻¹𝟙 − AΩ⁻¹μ + target·(CΩ⁻¹μ − AΩ⁻¹𝟙)].
pub fn efficient_weights(
    mean: &DVector<f64>,
    cov: &DMatrix<f64>,
    target: f64,
) -> Result<PortfolioSolution> {
    let f = frontier(mean, cov)?;
    let MarkowitzCoefficients { a, b, c, d } = f.coefs;
    if !(d > DEGENERATE_D) {
        return Err(MvarError::DegenerateFrontier { d });
    }
    let w = (&f.inv_ones * (b - a * target) + &f.inv_mean * (c * target - a)) / d;
    Ok(solution(w, mean, cov, PortfolioKind::Efficient))
}

/// Compares wᵀΩ_{t+1}w with the variance of the projected one-step mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceIdentity {
    pub quadratic_form: f64,
    pub mixture_variance: f64,
    pub gap: f64,
}

pub fn variance_identity_check(
    params: &MvarParameters,
    origin: &ForecastOrigin,
    w: &DVector<f64>,
) -> Result<VarianceIdentity> {
    let mix = predictive_one_step(params, origin)?;
    let moments = mixture_moments(&mix);
    let lhs = (w.transpose() * &moments.cov * w)[(0, 0)];
    let (_, rhs) = scalar_mixture_moments(&project(&mix, w)?);
    Ok(VarianceIdentity { quadratic_form: lhs, mixture_variance: rhs, gap: (lhs - rhs).abs() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Objective {
    MinimumVariance,
    TargetReturn(f64),
}

/// Solves the Markowitz problem for the given horizon's conditional moments
/// and returns the weights with the projected return mixture.
pub fn horizon_portfolio(
    params: &MvarParameters,
    origin: &ForecastOrigin,
    horizon: usize,
    objective: Objective,
) -> Result<(PortfolioSolution, MixtureNormal1D)> {
    let mix = match horizon {
        1 => predictive_one_step(params, origin)?,
        2 => predictive_two_step(params, origin)?,
        h => {
            return Err(MvarError::InvalidParameters(format!(
                "analytic portfolios are available for horizons 1 and 2, not {h}"
            )))
        }
    };
    let moments = mixture_moments(&mix);
    let mut sol = match objective {
        Objective::MinimumVariance => mvp_weights(&moments.mean, &moments.cov)?,
        Objective::TargetReturn(target) => efficient_weights(&moments.mean, &moments.cov, target)?,
    };
    sol.horizon = horizon;
    let returns = project(&mix, &sol.weights)?;
    Ok((sol, returns))
}

/// Two-step portfolio: weights from the moments of the g²-component mixture
/// and the projected return distribution.
pub fn two_step_portfolio(
    params: &MvarParameters,
    origin: &ForecastOrigin,
    objective: Objective,
) -> Result<(PortfolioSolution, MixtureNormal1D)> {
    horizon_portfolio(params, origin, 2, objective)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(x)
    }

    #[test]
    fn coefficient_examples() {
        let c = markowitz_coefficients(&v(&[0.0, 0.0, 0.0]), &DMatrix::identity(3, 3)).unwrap();
        assert_eq!((c.a, c.b, c.c, c.d), (0.0, 0.0, 3.0, 0.0));
        let c = markowitz_coefficients(&v(&[1.0, 0.0]), &DMatrix::identity(2, 2)).unwrap();
        assert_eq!((c.a, c.b, c.c, c.d), (1.0, 1.0, 2.0, 1.0));
        assert!(matches!(
            markowitz_coefficients(&v(&[1.0, 0.0]), &DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0])),
            Err(MvarError::SingularCovariance)
        ));
    }

    #[test]
    fn mvp_examples() {
        let s = mvp_weights(&v(&[0.3, -1.0, 2.0]), &DMatrix::identity(3, 3)).unwrap();
        for w in s.weights.iter() {
            assert!((w - 1.0 / 3.0).abs() < 1e-15);
        }
        let s = mvp_weights(&v(&[0.0, 0.0]), &DMatrix::from_diagonal(&v(&[1.0, 4.0]))).unwrap();
        assert!((s.weights[0] - 0.8).abs() < 1e-15);
        assert!((s.weights[1] - 0.2).abs() < 1e-15);
        assert!((s.sd - (1.0 / 1.25_f64).sqrt()).abs() < 1e-15);
        assert_eq!(s.kind, PortfolioKind::MinimumVariance);
    }

    #[test]
    fn efficient_at_frontier_bottom_is_mvp() {
        let mean = v(&[0.1, 0.3, -0.2]);
        let cov = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.1, 0.3, 1.0, -0.2, 0.1, -0.2, 1.5]);
        let coefs = markowitz_coefficients(&mean, &cov).unwrap();
        let eff = efficient_weights(&mean, &cov, coefs.mvp_return()).unwrap();
        let mvp = mvp_weights(&mean, &cov).unwrap();
        assert!((eff.weights - mvp.weights).amax() < 1e-12);
    }

    #[test]
    fn degenerate_frontier() {
        let err = efficient_weights(&v(&[0.5, 0.5]), &DMatrix::identity(2, 2), 1.0).unwrap_err();
        assert!(matches!(err, MvarError::DegenerateFrontier { .. }));
        assert!(err.to_string().contains("mean vector proportional to ones"));
    }

    #[test]
    fn coordinate_projection() {
        let mix = MixtureNormalMV::new(
            vec![0.3, 0.7],
            vec![v(&[1.0, 2.0]), v(&[-1.0, 0.5])],
            vec![
                DMatrix::from_row_slice(2, 2, &[4.0, 0.5, 0.5, 1.0]),
                DMatrix::from_row_slice(2, 2, &[9.0, -0.2, -0.2, 2.0]),
            ],
            1,
            7,
        )
        .unwrap();
        let r = project(&mix, &v(&[0.0, 1.0])).unwrap();
        assert_eq!(r.means(), &[2.0, 0.5]);
        assert_eq!(r.sds(), &[1.0, 2.0_f64.sqrt()]);
        assert_eq!(r.weights(), &[0.3, 0.7]);
        assert_eq!(r.origin(), 7);
        assert!(project(&mix, &v(&[1.0])).is_err());
        assert!(matches!(
            project(&mix, &v(&[0.0, 0.0])),
            Err(MvarError::NonPositiveVariance { component: 0, .. })
        ));
    }

    #[test]
    fn scalar_projection_is_identity() {
        let mix = MixtureNormalMV::new(
            vec![0.5, 0.5],
            vec![v(&[1.0]), v(&[-2.0])],
            vec![DMatrix::from_element(1, 1, 4.0), DMatrix::from_element(1, 1, 0.25)],
            1,
            0,
        )
        .unwrap();
        let r = project(&mix, &v(&[1.0])).unwrap();
        assert_eq!(r.means(), &[1.0, -2.0]);
        assert_eq!(r.sds(), &[2.0, 0.5]);
    }

    #[test]
    fn single_component_moments() {
        let mix = MixtureNormal1D::new(vec![1.0], vec![0.4], vec![1.5], 1, 0).unwrap();
        assert_eq!(scalar_mixture_moments(&mix), (0.4, 2.25));
    }

    #[test]
    fn one_dimensional_validation() {
        assert!(MixtureNormal1D::new(vec![1.0], vec![0.0], vec![0.0], 1, 0).is_err());
        assert!(MixtureNormal1D::new(vec![0.6, 0.6], vec![0.0; 2], vec![1.0; 2], 1, 0).is_err());
        assert!(MixtureNormal1D::normalized(vec![0.6, 0.6], vec![0.0; 2], vec![1.0; 2], 1, 0).is_ok());
    }
}
