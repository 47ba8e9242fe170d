//! Mixture vector autoregressive (MVAR) models.
//!
//! The crate covers the full workflow for heteroskedastic multivariate return
//! series modelled as a mixture of Gaussian VAR components:
//!
//! - [`model`]: parameters, conditional log-likelihood, companion matrices and
//!   the second-order stability criterion.
//! - [`estimation`]: EM fitting with random multi-start and order selection.
//! - [`simulation`]: seeded sample paths.
//! - [`forecasting`]: analytic one- and two-step predictive mixtures and Monte
//!   Carlo for longer horizons.
//! - [`portfolio`]: projection onto portfolio returns and Markowitz weights.
//! - [`risk`]: mixture quantiles, VaR, expected shortfall and CRPS.
//! - [`io`]: CSV ingestion, model files and the command workflows behind the
//!   `mvar` binary.

// NaN-rejecting checks are written as negated comparisons.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimation;
pub mod forecasting;
pub mod io;
pub mod linalg;
pub mod model;
pub mod normal;
pub mod portfolio;
pub mod risk;
pub mod rng;
pub mod simulation;

pub use error::{MvarError, Result};
pub use estimation::{em_fit, e_step, m_step, select_order, EmOptions, FitReport, InitStrategy, Responsibilities};
pub use forecasting::{mixture_moments, predictive_h_step_mc, predictive_one_step, predictive_two_step, MixtureNormalMV, MomentPair};
pub use model::{companion_matrix, component_residual, is_stable, log_likelihood, ForecastOrigin, ModelSpec, MvarParameters, SeriesMatrix, Stability};
pub use portfolio::{efficient_weights, markowitz_coefficients, mvp_weights, project, scalar_mixture_moments, MixtureNormal1D, PortfolioSolution};
pub use risk::{crps_mixture, mixture_cdf, mixture_quantile, var_es, RiskReport};
pub use simulation::{simulate, SimulationConfig};
