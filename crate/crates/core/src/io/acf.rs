use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{MvarError, Result};
use crate::linalg::to_rows;
use crate::model::SeriesMatrix;

/// Sample auto- and cross-correlations up to `max_lag`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTable {
    pub n: usize,
    /// ±1.96/√n white-noise band.
    pub band: f64,
    /// `lags[k][(i, j)]` = corr(Y_{t+k, i}, Y_{t, j}).
    pub lags: Vec<DMatrix<f64>>,
}

#[derive(Serialize)]
struct CorrelationJson {
    n: usize,
    band: f64,
    lags: Vec<Vec<Vec<f64>>>,
}

impl CorrelationTable {
    pub fn to_json(&self) -> Result<String> {
        let json = CorrelationJson {
            n: self.n,
            band: self.band,
            lags: self.lags.iter().map(to_rows).collect(),
        };
        Ok(serde_json::to_string_pretty(&json)?)
    }
}

/// Autocovariances use the 1/n normalisation, so every matrix is bounded by
/// one in absolute value and lag 0 has a unit diagonal.
pub fn acf_ccf(series: &SeriesMatrix, max_lag: usize) -> Result<CorrelationTable> {
    let n = series.len();
    if n <= max_lag {
        return Err(MvarError::SeriesTooShort { needed: max_lag + 1, have: n });
    }
    let m = series.dim();
    let mean = series.rows().iter().fold(nalgebra::DVector::zeros(m), |acc, r| acc + r) / n as f64;
    let centered: Vec<_> = series.rows().iter().map(|r| r - &mean).collect();
    let mut lags = Vec::with_capacity(max_lag + 1);
    for k in 0..=max_lag {
        let mut c = DMatrix::zeros(m, m);
        for t in 0..n - k {
            c.ger(1.0, &centered[t + k], &centered[t], 1.0);
        }
        lags.push(c / n as f64);
    }
    let sd: Vec<f64> = (0..m).map(|i| lags[0][(i, i)].sqrt()).collect();
    for c in lags.iter_mut() {
        for i in 0..m {
            for j in 0..m {
                c[(i, j)] /= sd[i] * sd[j];
            }
        }
    }
    for i in 0..m {
        lags[0][(i, i)] = 1.0;
    }
    Ok(CorrelationTable { n, band: 1.96 / (n as f64).sqrt(), lags })
}
