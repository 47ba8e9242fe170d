//! JSON shapes for forecast, portfolio and risk outputs.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{MvarError, Result};
use crate::forecasting::{MixtureNormalMV, MomentPair};
use crate::linalg::{from_rows, to_rows};
use crate::portfolio::{MixtureNormal1D, PortfolioKind, PortfolioSolution};
use crate::risk::RiskReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureMvJson {
    pub horizon: usize,
    pub origin: usize,
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub covs: Vec<Vec<Vec<f64>>>,
}

impl From<&MixtureNormalMV> for MixtureMvJson {
    fn from(mix: &MixtureNormalMV) -> Self {
        Self {
            horizon: mix.horizon(),
            origin: mix.origin(),
            weights: mix.weights().to_vec(),
            means: mix.means().iter().map(|v| v.iter().copied().collect()).collect(),
            covs: mix.covs().iter().map(to_rows).collect(),
        }
    }
}

impl MixtureMvJson {
    pub fn to_mixture(&self) -> Result<MixtureNormalMV> {
        let covs = self
            .covs
            .iter()
            .map(|c| from_rows(c).ok_or_else(|| MvarError::Data("ragged covariance".into())))
            .collect::<Result<Vec<_>>>()?;
        MixtureNormalMV::new(
            self.weights.clone(),
            self.means.iter().map(|v| DVector::from_vec(v.clone())).collect(),
            covs,
            self.horizon,
            self.origin,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentsJson {
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

impl From<&MomentPair> for MomentsJson {
    fn from(m: &MomentPair) -> Self {
        Self { mean: m.mean.iter().copied().collect(), cov: to_rows(&m.cov) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mixture1DJson {
    pub horizon: usize,
    pub origin: usize,
    pub weights: Vec<f64>,
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
}

impl From<&MixtureNormal1D> for Mixture1DJson {
    fn from(mix: &MixtureNormal1D) -> Self {
        Self {
            horizon: mix.horizon(),
            origin: mix.origin(),
            weights: mix.weights().to_vec(),
            means: mix.means().to_vec(),
            sds: mix.sds().to_vec(),
        }
    }
}

impl Mixture1DJson {
    pub fn to_mixture(&self) -> Result<MixtureNormal1D> {
        MixtureNormal1D::new(
            self.weights.clone(),
            self.means.clone(),
            self.sds.clone(),
            self.horizon,
            self.origin,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortfolioJson {
    pub kind: String,
    pub horizon: usize,
    pub weights: Vec<f64>,
    pub expected_return: f64,
    pub sd: f64,
    pub mixture: Mixture1DJson,
}

impl PortfolioJson {
    pub fn new(sol: &PortfolioSolution, mix: &MixtureNormal1D) -> Self {
        Self {
            kind: match sol.kind {
                PortfolioKind::MinimumVariance => "mvp".into(),
                PortfolioKind::Efficient => "efficient".into(),
            },
            horizon: sol.horizon,
            weights: sol.weights.iter().copied().collect(),
            expected_return: sol.expected_return,
            sd: sol.sd,
            mixture: mix.into(),
        }
    }
}

/// Risk input: either a bare return mixture or a portfolio output holding one.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum RiskInput {
    Portfolio(PortfolioJson),
    Mixture(Mixture1DJson),
}

impl RiskInput {
    pub fn mixture(&self) -> Result<MixtureNormal1D> {
        match self {
            RiskInput::Portfolio(p) => p.mixture.to_mixture(),
            RiskInput::Mixture(m) => m.to_mixture(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskJson {
    pub alpha: f64,
    pub var: f64,
    pub es: f64,
    /// Positive loss magnitude of the VaR.
    pub var_loss: f64,
}

impl From<&RiskReport> for RiskJson {
    fn from(r: &RiskReport) -> Self {
        Self { alpha: r.alpha, var: r.var, es: r.es, var_loss: r.loss() }
    }
}
