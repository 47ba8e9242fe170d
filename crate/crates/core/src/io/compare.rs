//! Out-of-sample comparison of competing specifications.
//!
//! Each model is fitted on the series without its last `holdout` rows. From
//! the last training observation, each model builds its own minimum variance
//! portfolio at horizons 1..=holdout and its predictive return mixture is
//! scored against the realised portfolio return. A plain VAR(p) is the
//! one-component spec with order p.

use serde::Serialize;

use crate::error::{MvarError, Result};
use crate::estimation::{em_fit, EmOptions, InitStrategy};
use crate::model::{ForecastOrigin, ModelSpec, MvarParameters, SeriesMatrix};
use crate::portfolio::{horizon_portfolio, scalar_mixture_moments, Objective};
use crate::risk::{crps_mixture, var_es};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub model: String,
    pub horizon: usize,
    /// Zero-based index of the last observation used.
    pub origin: usize,
    pub mean: f64,
    pub sd: f64,
    pub var: f64,
    pub es: f64,
    pub crps: f64,
    pub realized: f64,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelFailure {
    pub model: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub alpha: f64,
    pub training_rows: usize,
    pub rows: Vec<ComparisonRow>,
    pub failures: Vec<ModelFailure>,
}

/// `VAR(p)` for one component, `MVAR(g;p_1,...,p_g)` otherwise.
pub fn model_label(spec: &ModelSpec) -> String {
    if spec.g() == 1 {
        format!("VAR({})", spec.order(0))
    } else {
        let orders: Vec<String> = spec.orders().iter().map(ToString::to_string).collect();
        format!("MVAR({};{})", spec.g(), orders.join(","))
    }
}

/// Minimum variance portfolio built at row `t` for horizon `horizon`, scored
/// against the realised return at row `t + horizon`.
pub fn evaluate_origin(
    params: &MvarParameters,
    series: &SeriesMatrix,
    t: usize,
    horizon: usize,
    alpha: f64,
) -> Result<ComparisonRow> {
    if t + horizon >= series.len() {
        return Err(MvarError::IndexOutOfRange {
            t: t + horizon,
            lo: 0,
            hi: series.len().saturating_sub(1),
        });
    }
    let origin = ForecastOrigin::from_series(series, t, params.spec().p())?;
    let (sol, mix) = horizon_portfolio(params, &origin, horizon, Objective::MinimumVariance)?;
    let realized = sol.weights.dot(series.row(t + horizon));
    let (mean, variance) = scalar_mixture_moments(&mix);
    let risk = var_es(&mix, alpha)?;
    Ok(ComparisonRow {
        model: model_label(params.spec()),
        horizon,
        origin: t,
        mean,
        sd: variance.sqrt(),
        var: risk.var,
        es: risk.es,
        crps: crps_mixture(&mix, realized),
        realized,
        weights: sol.weights.iter().copied().collect(),
    })
}

/// CRPS of the model's minimum variance forecast at every origin in `origins`.
pub fn rolling_crps(
    params: &MvarParameters,
    series: &SeriesMatrix,
    origins: std::ops::Range<usize>,
    horizon: usize,
) -> Result<Vec<f64>> {
    origins
        .map(|t| evaluate_origin(params, series, t, horizon, 0.95).map(|row| row.crps))
        .collect()
}

pub fn compare_models(
    series: &SeriesMatrix,
    specs: &[ModelSpec],
    holdout: usize,
    alpha: f64,
    init: &InitStrategy,
    options: &EmOptions,
) -> Result<ComparisonReport> {
    if !(1..=2).contains(&holdout) {
        return Err(MvarError::InvalidParameters(format!(
            "holdout must be 1 or 2 (analytic horizons), got {holdout}"
        )));
    }
    let needed = specs.iter().map(ModelSpec::p).max().unwrap_or(0) + 1 + holdout;
    if series.len() < needed {
        return Err(MvarError::SeriesTooShort { needed, have: series.len() });
    }
    let training_rows = series.len() - holdout;
    let train = series.slice(0..training_rows)?;
    let origin = training_rows - 1;

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for spec in specs {
        let outcome = em_fit(&train, spec, init, options).and_then(|fit| {
            (1..=holdout)
                .map(|h| evaluate_origin(&fit.params, series, origin, h, alpha))
                .collect::<Result<Vec<_>>>()
        });
        match outcome {
            Ok(mut r) => rows.append(&mut r),
            Err(e) => failures.push(ModelFailure { model: model_label(spec), error: e.to_string() }),
        }
    }
    Ok(ComparisonReport { alpha, training_rows, rows, failures })
}
