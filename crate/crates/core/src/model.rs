//! Model objects for mixture vector autoregressions, the conditional
//! log-likelihood and the stability criterion.
//!
//! An MVAR(g; p_1, ..., p_g) process of dimension m draws, at every step, a
//! component k with probability π_k and then sets
//!
//! ```text
//! Y_t = Θ_k0 + Θ_k1 Y_{t-1} + ... + Θ_kp_k Y_{t-p_k} + Ω_k^{1/2} ε_t
//! ```
//!
//! Lag blocks beyond p_k are stored explicitly as zero matrices so every
//! component carries p = max p_k lag matrices.
//!
//! Time indices are zero based throughout the crate: observation `t` of a
//! series of length n is row `t`, and a model of maximal order p can score
//! rows `p..n`.

use nalgebra::{DMatrix, DVector};

use crate::error::{MvarError, Result};
use crate::linalg::{mvn_log_density, spd_cholesky, Chol};

/// Tolerance on the mixing weights summing to one.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Margin below 1 required of the spectral radius for a model to count as stable.
pub const STABILITY_TOL: f64 = 1e-10;

/// Component count, dimension and per-component autoregressive orders.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModelSpec {
    m: usize,
    orders: Vec<usize>,
}

impl ModelSpec {
    pub fn new(m: usize, orders: Vec<usize>) -> Result<Self> {
        if m == 0 {
            return Err(MvarError::InvalidSpec("dimension m must be at least 1".into()));
        }
        if orders.is_empty() {
            return Err(MvarError::InvalidSpec("at least one component is required".into()));
        }
        Ok(Self { m, orders })
    }

    /// g components sharing the same order p.
    pub fn uniform(m: usize, g: usize, p: usize) -> Result<Self> {
        Self::new(m, vec![p; g])
    }

    pub fn g(&self) -> usize {
        self.orders.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    pub fn order(&self, k: usize) -> usize {
        self.orders[k]
    }

    /// Largest component order.
    pub fn p(&self) -> usize {
        self.orders.iter().copied().max().unwrap_or(0)
    }

    /// Number of free parameters: g-1 weights plus, per component, an
    /// intercept, p_k coefficient blocks and a symmetric covariance.
    pub fn free_parameters(&self) -> usize {
        let m = self.m;
        let per_component: usize = self
            .orders
            .iter()
            .map(|&pk| m + m * m * pk + m * (m + 1) / 2)
            .sum();
        self.g() - 1 + per_component
    }
}

impl std::fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let orders: Vec<String> = self.orders.iter().map(ToString::to_string).collect();
        write!(f, "MVAR({};{}) m={}", self.g(), orders.join(","), self.m)
    }
}

/// Parameters of an MVAR model. Construction validates every invariant, and
/// the Cholesky factors of the component covariances are kept alongside.
#[derive(Debug, Clone)]
pub struct MvarParameters {
    spec: ModelSpec,
    weights: Vec<f64>,
    intercepts: Vec<DVector<f64>>,
    /// `ar[k][i]` is the lag-(i+1) matrix of component k, padded to p lags.
    ar: Vec<Vec<DMatrix<f64>>>,
    covs: Vec<DMatrix<f64>>,
    chols: Vec<Chol>,
    lowers: Vec<DMatrix<f64>>,
}

impl PartialEq for MvarParameters {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
            && self.weights == other.weights
            && self.intercepts == other.intercepts
            && self.ar == other.ar
            && self.covs == other.covs
    }
}

impl MvarParameters {
    /// `ar[k]` may hold either the p_k free lag matrices or all p lag matrices;
    /// in the latter case the blocks beyond p_k must be zero.
    ///
    /// Mixing weights must be nonnegative and sum to one. A zero weight is
    /// accepted so that degenerate mixtures can be simulated; estimation never
    /// produces one.
    pub fn new(
        spec: ModelSpec,
        weights: Vec<f64>,
        intercepts: Vec<DVector<f64>>,
        ar: Vec<Vec<DMatrix<f64>>>,
        covs: Vec<DMatrix<f64>>,
    ) -> Result<Self> {
        let (g, m, p) = (spec.g(), spec.m(), spec.p());
        if weights.len() != g || intercepts.len() != g || ar.len() != g || covs.len() != g {
            return Err(MvarError::InvalidParameters(format!(
                "expected {g} entries for weights, intercepts, AR blocks and covariances"
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(MvarError::InvalidParameters(
                "mixing weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(MvarError::InvalidParameters(format!(
                "mixing weights sum to {total}, not 1"
            )));
        }
        for (k, c) in intercepts.iter().enumerate() {
            if c.len() != m {
                return Err(MvarError::DimensionMismatch { expected: m, found: c.len() });
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(MvarError::InvalidParameters(format!(
                    "intercept of component {k} is not finite"
                )));
            }
        }
        let mut padded = Vec::with_capacity(g);
        for (k, blocks) in ar.into_iter().enumerate() {
            let pk = spec.order(k);
            if blocks.len() != pk && blocks.len() != p {
                return Err(MvarError::InvalidParameters(format!(
                    "component {k} has {} lag matrices, expected {pk} or {p}",
                    blocks.len()
                )));
            }
            for (i, b) in blocks.iter().enumerate() {
                if b.nrows() != m || b.ncols() != m {
                    return Err(MvarError::DimensionMismatch { expected: m, found: b.nrows() });
                }
                if b.iter().any(|v| !v.is_finite()) {
                    return Err(MvarError::InvalidParameters(format!(
                        "lag {} of component {k} is not finite",
                        i + 1
                    )));
                }
                if i >= pk && b.iter().any(|v| *v != 0.0) {
                    return Err(MvarError::InvalidParameters(format!(
                        "lag {} of component {k} exceeds its order {pk} but is nonzero",
                        i + 1
                    )));
                }
            }
            let mut blocks = blocks;
            blocks.resize(p, DMatrix::zeros(m, m));
            padded.push(blocks);
        }
        let mut chols = Vec::with_capacity(g);
        for (k, c) in covs.iter().enumerate() {
            if c.nrows() != m || c.ncols() != m {
                return Err(MvarError::DimensionMismatch { expected: m, found: c.nrows() });
            }
            chols.push(spd_cholesky(c).ok_or(MvarError::NotPositiveDefinite { component: k })?);
        }
        let lowers = chols.iter().map(|c| c.l()).collect();
        Ok(Self { spec, weights, intercepts, ar: padded, covs, chols, lowers })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn intercept(&self, k: usize) -> &DVector<f64> {
        &self.intercepts[k]
    }

    pub fn intercepts(&self) -> &[DVector<f64>] {
        &self.intercepts
    }

    /// Lag-`lag` coefficient matrix (1-based lag) of component k; zero beyond p_k.
    pub fn ar(&self, k: usize, lag: usize) -> &DMatrix<f64> {
        &self.ar[k][lag - 1]
    }

    /// All p lag matrices of component k.
    pub fn ar_blocks(&self, k: usize) -> &[DMatrix<f64>] {
        &self.ar[k]
    }

    pub fn cov(&self, k: usize) -> &DMatrix<f64> {
        &self.covs[k]
    }

    pub fn covs(&self) -> &[DMatrix<f64>] {
        &self.covs
    }

    /// Cholesky factorisation of Ω_k.
    pub fn cov_factor(&self, k: usize) -> &Chol {
        &self.chols[k]
    }

    /// Lower triangular L_k with L_k L_kᵀ = Ω_k.
    pub fn cov_lower(&self, k: usize) -> &DMatrix<f64> {
        &self.lowers[k]
    }

    /// Θ_k0 + Σ_{i=1..p_k} Θ_ki Y_{t-i}, where `lags[i-1]` is Y_{t-i}.
    pub fn component_mean(&self, k: usize, lags: &[&DVector<f64>]) -> DVector<f64> {
        let mut mu = self.intercepts[k].clone();
        for (a, y) in self.ar[k].iter().zip(lags).take(self.spec.order(k)) {
            mu.gemv(1.0, a, y, 1.0);
        }
        mu
    }

    /// Returns the parameters with components reordered so that new
    /// component j is old component `perm[j]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let spec = ModelSpec {
            m: self.spec.m,
            orders: perm.iter().map(|&k| self.spec.orders[k]).collect(),
        };
        Self {
            spec,
            weights: perm.iter().map(|&k| self.weights[k]).collect(),
            intercepts: perm.iter().map(|&k| self.intercepts[k].clone()).collect(),
            ar: perm.iter().map(|&k| self.ar[k].clone()).collect(),
            covs: perm.iter().map(|&k| self.covs[k].clone()).collect(),
            chols: perm.iter().map(|&k| self.chols[k].clone()).collect(),
            lowers: perm.iter().map(|&k| self.lowers[k].clone()).collect(),
        }
    }
}

/// Time-ordered panel of observations, oldest first.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesMatrix {
    m: usize,
    rows: Vec<DVector<f64>>,
}

impl SeriesMatrix {
    pub fn new(rows: Vec<DVector<f64>>) -> Result<Self> {
        let m = rows.first().map_or(0, |r| r.len());
        if m == 0 {
            return Err(MvarError::Data("series must have at least one row and column".into()));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != m {
                return Err(MvarError::DimensionMismatch { expected: m, found: r.len() });
            }
            if let Some(j) = r.iter().position(|v| !v.is_finite()) {
                return Err(MvarError::NonFiniteData { row: i, col: j });
            }
        }
        Ok(Self { m, rows })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(rows.iter().map(|r| DVector::from_vec(r.clone())).collect())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn row(&self, t: usize) -> &DVector<f64> {
        &self.rows[t]
    }

    pub fn rows(&self) -> &[DVector<f64>] {
        &self.rows
    }

    /// Rows `range` as a new series.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Result<Self> {
        Self::new(self.rows[range].to_vec())
    }

    /// Lagged observations (Y_{t-1}, ..., Y_{t-p}).
    pub fn lags(&self, t: usize, p: usize) -> Vec<&DVector<f64>> {
        (1..=p).map(|i| &self.rows[t - i]).collect()
    }

    pub(crate) fn check_model(&self, spec: &ModelSpec) -> Result<()> {
        if self.m != spec.m() {
            return Err(MvarError::DimensionMismatch { expected: spec.m(), found: self.m });
        }
        if self.len() < spec.p() + 1 {
            return Err(MvarError::SeriesTooShort { needed: spec.p() + 1, have: self.len() });
        }
        Ok(())
    }
}

/// The last p observations at a forecast origin, oldest first, together with
/// the (zero-based) time index of the newest one.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastOrigin {
    history: Vec<DVector<f64>>,
    time: usize,
}

impl ForecastOrigin {
    pub fn new(history: Vec<DVector<f64>>, time: usize) -> Result<Self> {
        if let Some(first) = history.first() {
            let m = first.len();
            if let Some(bad) = history.iter().find(|h| h.len() != m) {
                return Err(MvarError::DimensionMismatch { expected: m, found: bad.len() });
            }
        }
        Ok(Self { history, time })
    }

    /// Origin at row `t` of `series`, holding rows t-p+1..=t.
    pub fn from_series(series: &SeriesMatrix, t: usize, p: usize) -> Result<Self> {
        if t >= series.len() || t + 1 < p {
            return Err(MvarError::IndexOutOfRange {
                t,
                lo: p.saturating_sub(1),
                hi: series.len().saturating_sub(1),
            });
        }
        Self::new(series.rows()[t + 1 - p..=t].to_vec(), t)
    }

    pub fn history(&self) -> &[DVector<f64>] {
        &self.history
    }

    pub fn time(&self) -> usize {
        self.time
    }

    /// (Y_t, Y_{t-1}, ..., Y_{t-p+1}): the lags of Y_{t+1}.
    pub fn lags(&self) -> Vec<&DVector<f64>> {
        self.history.iter().rev().collect()
    }

    pub(crate) fn check_model(&self, spec: &ModelSpec) -> Result<()> {
        if self.history.len() != spec.p() {
            return Err(MvarError::DimensionMismatch {
                expected: spec.p(),
                found: self.history.len(),
            });
        }
        if let Some(h) = self.history.iter().find(|h| h.len() != spec.m()) {
            return Err(MvarError::DimensionMismatch { expected: spec.m(), found: h.len() });
        }
        Ok(())
    }
}

/// e_tk = Y_t − Θ_k0 − Σ Θ_ki Y_{t−i}, for zero-based p ≤ t < n.
pub fn component_residual(
    params: &MvarParameters,
    series: &SeriesMatrix,
    t: usize,
    k: usize,
) -> Result<DVector<f64>> {
    let spec = params.spec();
    if series.dim() != spec.m() {
        return Err(MvarError::DimensionMismatch { expected: spec.m(), found: series.dim() });
    }
    let p = spec.p();
    if t < p || t >= series.len() {
        return Err(MvarError::IndexOutOfRange { t, lo: p, hi: series.len().saturating_sub(1) });
    }
    if k >= spec.g() {
        return Err(MvarError::IndexOutOfRange { t: k, lo: 0, hi: spec.g() - 1 });
    }
    let lags = series.lags(t, p);
    Ok(series.row(t) - params.component_mean(k, &lags))
}

/// log Σ_k exp(x_k), ignoring `-inf` entries.
pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// log(π_k φ_m(Y_t; μ_tk, Ω_k)) for every component, at zero-based time t.
pub(crate) fn component_log_densities(
    params: &MvarParameters,
    series: &SeriesMatrix,
    t: usize,
    out: &mut [f64],
) {
    let lags = series.lags(t, params.spec().p());
    for (k, slot) in out.iter_mut().enumerate() {
        let w = params.weights()[k];
        *slot = if w > 0.0 {
            let e = series.row(t) - params.component_mean(k, &lags);
            w.ln() + mvn_log_density(&e, params.cov_factor(k))
        } else {
            f64::NEG_INFINITY
        };
    }
}

/// Conditional log-likelihood Σ_{t=p..n-1} log Σ_k π_k φ_m(Y_t; μ_tk, Ω_k);
/// the first p observations are conditioned on.
pub fn log_likelihood(params: &MvarParameters, series: &SeriesMatrix) -> Result<f64> {
    series.check_model(params.spec())?;
    let mut buf = vec![0.0; params.spec().g()];
    let mut total = 0.0;
    for t in params.spec().p()..series.len() {
        component_log_densities(params, series, t, &mut buf);
        total += log_sum_exp(&buf);
    }
    if total.is_finite() {
        Ok(total)
    } else {
        Err(MvarError::NonFiniteLikelihood)
    }
}

/// Companion matrix A_k of size mp × mp: the lag blocks of component k on the
/// first block row, identities on the block subdiagonal.
pub fn companion_matrix(params: &MvarParameters, k: usize) -> Result<DMatrix<f64>> {
    let (m, p) = (params.spec().m(), params.spec().p());
    if p == 0 {
        return Err(MvarError::InvalidSpec("companion matrix needs p >= 1".into()));
    }
    if k >= params.spec().g() {
        return Err(MvarError::IndexOutOfRange { t: k, lo: 0, hi: params.spec().g() - 1 });
    }
    let mut a = DMatrix::zeros(m * p, m * p);
    for (i, block) in params.ar_blocks(k).iter().enumerate() {
        a.view_mut((0, i * m), (m, m)).copy_from(block);
    }
    for i in 1..p {
        a.view_mut((i * m, (i - 1) * m), (m, m)).fill_with_identity();
    }
    Ok(a)
}

/// Outcome of the second-order stability check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stability {
    pub stable: bool,
    pub spectral_radius: f64,
}

/// Spectral radius of Σ_k π_k (A_k ⊗ A_k); stable when it is below
/// `1 - STABILITY_TOL`. A model without lag dynamics (p = 0 or every lag
/// matrix zero) has ρ = 0 exactly; its companion sum is nilpotent.
pub fn is_stable(params: &MvarParameters) -> Result<Stability> {
    let static_model = (0..params.spec().g())
        .all(|k| params.ar_blocks(k).iter().all(|a| a.iter().all(|x| *x == 0.0)));
    if params.spec().p() == 0 || static_model {
        return Ok(Stability { stable: true, spectral_radius: 0.0 });
    }
    let dim = params.spec().m() * params.spec().p();
    let mut sum = DMatrix::<f64>::zeros(dim * dim, dim * dim);
    for (k, &w) in params.weights().iter().enumerate() {
        let a = companion_matrix(params, k)?;
        sum += a.kronecker(&a) * w;
    }
    let rho = spectral_radius(sum)?;
    Ok(Stability { stable: rho < 1.0 - STABILITY_TOL, spectral_radius: rho })
}

fn spectral_radius(a: DMatrix<f64>) -> Result<f64> {
    let schur = nalgebra::linalg::Schur::try_new(a, f64::EPSILON, 100_000)
        .ok_or_else(|| MvarError::Eigen("Schur decomposition did not converge".into()))?;
    let rho = schur
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if rho.is_finite() {
        Ok(rho)
    } else {
        Err(MvarError::Eigen("non-finite eigenvalue".into()))
    }
}
