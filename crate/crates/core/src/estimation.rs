//! EM estimation of MVAR parameters.
//!
//! The E-step computes posterior component probabilities τ_tk in log space;
//! the M-step solves one weighted least squares problem per component,
//! regressing Y_t on X_tk = (1, Y_{t-1}ᵀ, ..., Y_{t-p_k}ᵀ)ᵀ with weights τ_tk.
//! Random starts draw τ rows from a symmetric Dirichlet(1) and run an M-step.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use crate::error::{MvarError, Result};
use crate::linalg::{min_symmetric_eigenvalue, symmetrize};
use crate::model::{
    component_log_densities, log_sum_exp, ModelSpec, MvarParameters, SeriesMatrix,
};
use crate::rng;

/// Smallest covariance eigenvalue tolerated before a component counts as collapsed.
pub const COLLAPSE_EIGENVALUE: f64 = 1e-12;

/// Posterior component probabilities for rows p..n of a series.
#[derive(Debug, Clone, PartialEq)]
pub struct Responsibilities {
    /// (n - p) × g, row r belongs to time index `offset + r`.
    tau: DMatrix<f64>,
    offset: usize,
}

impl Responsibilities {
    /// Rows must be nonnegative and sum to one within 1e-10.
    pub fn new(tau: DMatrix<f64>, offset: usize) -> Result<Self> {
        for r in 0..tau.nrows() {
            let row = tau.row(r);
            if row.iter().any(|v| !v.is_finite() || *v < 0.0) || (row.sum() - 1.0).abs() > 1e-10
            {
                return Err(MvarError::InvalidParameters(format!(
                    "responsibility row {r} is not a probability vector"
                )));
            }
        }
        Ok(Self { tau, offset })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.tau
    }

    /// Time index of the first row.
    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn g(&self) -> usize {
        self.tau.ncols()
    }

    /// τ_tk for zero-based time index t.
    pub fn get(&self, t: usize, k: usize) -> f64 {
        self.tau[(t - self.offset, k)]
    }

    fn permuted(&self, perm: &[usize]) -> Self {
        let tau = DMatrix::from_fn(self.tau.nrows(), perm.len(), |r, j| self.tau[(r, perm[j])]);
        Self { tau, offset: self.offset }
    }
}

/// Builds X_tk = (1, Y_{t-1}ᵀ, ..., Y_{t-order}ᵀ)ᵀ.
pub fn regressor(series: &SeriesMatrix, t: usize, order: usize) -> DVector<f64> {
    let m = series.dim();
    let mut x = DVector::zeros(1 + m * order);
    x[0] = 1.0;
    for i in 1..=order {
        x.rows_mut(1 + (i - 1) * m, m).copy_from(series.row(t - i));
    }
    x
}

fn e_step_with_loglik(
    params: &MvarParameters,
    series: &SeriesMatrix,
) -> Result<(Responsibilities, f64)> {
    series.check_model(params.spec())?;
    let (g, p) = (params.spec().g(), params.spec().p());
    let mut tau = DMatrix::zeros(series.len() - p, g);
    let mut buf = vec![0.0; g];
    let mut loglik = 0.0;
    for t in p..series.len() {
        component_log_densities(params, series, t, &mut buf);
        let norm = log_sum_exp(&buf);
        if !norm.is_finite() {
            return Err(MvarError::Underflow { t });
        }
        loglik += norm;
        for k in 0..g {
            tau[(t - p, k)] = (buf[k] - norm).exp();
        }
    }
    Ok((Responsibilities { tau, offset: p }, loglik))
}

/// E-step: τ_tk ∝ π_k φ_m(Y_t; μ_tk, Ω_k), normalised over k in log space.
pub fn e_step(params: &MvarParameters, series: &SeriesMatrix) -> Result<Responsibilities> {
    e_step_with_loglik(params, series).map(|(tau, _)| tau)
}

/// M-step: weighted least squares per component, weighted residual
/// covariances and average responsibilities as mixing weights.
pub fn m_step(
    series: &SeriesMatrix,
    tau: &Responsibilities,
    spec: &ModelSpec,
) -> Result<MvarParameters> {
    series.check_model(spec)?;
    let (g, m, p, n) = (spec.g(), spec.m(), spec.p(), series.len());
    if tau.g() != g || tau.offset != p || tau.tau.nrows() != n - p {
        return Err(MvarError::InvalidParameters(format!(
            "responsibilities are {}×{} from row {}, expected {}×{g} from row {p}",
            tau.tau.nrows(),
            tau.g(),
            tau.offset,
            n - p
        )));
    }

    let mut weights = Vec::with_capacity(g);
    let mut intercepts = Vec::with_capacity(g);
    let mut ar = Vec::with_capacity(g);
    let mut covs = Vec::with_capacity(g);
    for k in 0..g {
        let pk = spec.order(k);
        let dim = 1 + m * pk;
        let mut sxx = DMatrix::zeros(dim, dim);
        let mut sxy = DMatrix::zeros(dim, m);
        let mut mass = 0.0;
        for t in p..n {
            let w = tau.get(t, k);
            if w == 0.0 {
                continue;
            }
            let x = regressor(series, t, pk);
            sxx.ger(w, &x, &x, 1.0);
            sxy.ger(w, &x, series.row(t), 1.0);
            mass += w;
        }
        let coef = sxx
            .cholesky()
            .filter(|c| c.l_dirty().diagonal().iter().all(|d| *d > 0.0))
            .map(|c| c.solve(&sxy))
            .filter(|b| b.iter().all(|v| v.is_finite()))
            .ok_or(MvarError::SingularRegression { component: k })?;

        let intercept = coef.row(0).transpose();
        let blocks: Vec<DMatrix<f64>> = (0..pk)
            .map(|i| coef.rows(1 + i * m, m).transpose())
            .collect();

        let mut cov = DMatrix::zeros(m, m);
        for t in p..n {
            let w = tau.get(t, k);
            if w == 0.0 {
                continue;
            }
            let x = regressor(series, t, pk);
            let e = series.row(t) - coef.tr_mul(&x);
            cov.ger(w, &e, &e, 1.0);
        }
        let cov = symmetrize(&(cov / mass));
        let min_eig = min_symmetric_eigenvalue(&cov);
        if !(min_eig >= COLLAPSE_EIGENVALUE) {
            return Err(MvarError::ComponentCollapse { component: k, min_eigenvalue: min_eig });
        }

        weights.push(mass / (n - p) as f64);
        intercepts.push(intercept);
        ar.push(blocks);
        covs.push(cov);
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    MvarParameters::new(spec.clone(), weights, intercepts, ar, covs)
}

/// How EM obtains its starting point.
#[derive(Debug, Clone)]
pub enum InitStrategy {
    /// `starts` independent starts, each from Dirichlet(1) responsibilities on
    /// substream `i` of `seed`. The start with the best final log-likelihood wins.
    RandomStarts { starts: usize, seed: u64 },
    Parameters(MvarParameters),
    Responsibilities(Responsibilities),
}

impl Default for InitStrategy {
    fn default() -> Self {
        InitStrategy::RandomStarts { starts: 10, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmOptions {
    pub max_iter: usize,
    /// Convergence threshold on the absolute log-likelihood change.
    pub tol: f64,
}

impl Default for EmOptions {
    fn default() -> Self {
        Self { max_iter: 500, tol: 1e-8 }
    }
}

/// Outcome of an EM fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub params: MvarParameters,
    /// Log-likelihood of the starting parameters followed by one entry per iteration.
    pub loglik_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub responsibilities: Responsibilities,
    pub loglik: f64,
    pub aic: f64,
    pub bic: f64,
    /// Scored observations, n - p.
    pub n_obs: usize,
    /// Index of the winning start (0 for explicit initialisations).
    pub start: usize,
    pub failed_starts: usize,
}

impl FitReport {
    fn new(
        params: MvarParameters,
        responsibilities: Responsibilities,
        loglik_trace: Vec<f64>,
        iterations: usize,
        converged: bool,
    ) -> Self {
        let loglik = *loglik_trace.last().expect("trace holds the starting value");
        let n_obs = responsibilities.tau.nrows();
        let d = params.spec().free_parameters() as f64;
        Self {
            aic: -2.0 * loglik + 2.0 * d,
            bic: -2.0 * loglik + d * (n_obs as f64).ln(),
            params,
            loglik_trace,
            iterations,
            converged,
            responsibilities,
            loglik,
            n_obs,
            start: 0,
            failed_starts: 0,
        }
    }

    /// Reorders components by descending mixing weight, ties broken by the
    /// intercept vectors in lexicographic order.
    fn canonicalize(mut self) -> Self {
        let params = &self.params;
        let mut perm: Vec<usize> = (0..params.spec().g()).collect();
        perm.sort_by(|&a, &b| {
            params.weights()[b]
                .total_cmp(&params.weights()[a])
                .then_with(|| {
                    let (ia, ib) = (params.intercept(a), params.intercept(b));
                    ia.iter()
                        .zip(ib.iter())
                        .map(|(x, y)| x.total_cmp(y))
                        .find(|o| o.is_ne())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
        });
        self.params = self.params.permuted(&perm);
        self.responsibilities = self.responsibilities.permuted(&perm);
        self
    }
}

fn run_em(
    series: &SeriesMatrix,
    start: MvarParameters,
    options: &EmOptions,
) -> Result<FitReport> {
    let mut params = start;
    let (mut tau, mut loglik) = e_step_with_loglik(&params, series)?;
    let mut trace = vec![loglik];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < options.max_iter {
        let next = m_step(series, &tau, params.spec())?;
        let (next_tau, next_loglik) = e_step_with_loglik(&next, series)?;
        iterations += 1;
        trace.push(next_loglik);
        params = next;
        tau = next_tau;
        let delta = (next_loglik - loglik).abs();
        loglik = next_loglik;
        if delta < options.tol {
            converged = true;
            break;
        }
    }
    Ok(FitReport::new(params, tau, trace, iterations, converged).canonicalize())
}

/// Dirichlet(1) responsibilities on substream `substream` of `seed`.
pub fn random_responsibilities(
    n_rows: usize,
    g: usize,
    offset: usize,
    seed: u64,
    substream: u64,
) -> Responsibilities {
    let mut rng = rng::stream(seed, substream);
    let mut tau = DMatrix::zeros(n_rows, g);
    for r in 0..n_rows {
        let draws: Vec<f64> = (0..g).map(|_| Exp1.sample(&mut rng)).collect();
        let total: f64 = draws.iter().sum();
        for (k, d) in draws.into_iter().enumerate() {
            tau[(r, k)] = d / total;
        }
    }
    Responsibilities { tau, offset }
}

/// Fits an MVAR model by EM.
///
/// Non-convergence within `max_iter` is reported through `converged = false`.
/// With random starts, failing starts (collapse, singular regressions) are
/// counted in `failed_starts`; the call fails only when every start fails.
pub fn em_fit(
    series: &SeriesMatrix,
    spec: &ModelSpec,
    init: &InitStrategy,
    options: &EmOptions,
) -> Result<FitReport> {
    series.check_model(spec)?;
    let p = spec.p();
    match init {
        InitStrategy::Parameters(params) => {
            if params.spec() != spec {
                return Err(MvarError::InvalidSpec(format!(
                    "initial parameters are {} but the fit asks for {spec}",
                    params.spec()
                )));
            }
            run_em(series, params.clone(), options)
        }
        InitStrategy::Responsibilities(tau) => {
            run_em(series, m_step(series, tau, spec)?, options)
        }
        InitStrategy::RandomStarts { starts, seed } => {
            let starts = (*starts).max(1);
            let results: Vec<Result<FitReport>> = (0..starts)
                .into_par_iter()
                .map(|i| {
                    let tau = random_responsibilities(
                        series.len() - p,
                        spec.g(),
                        p,
                        *seed,
                        i as u64,
                    );
                    let mut report = run_em(series, m_step(series, &tau, spec)?, options)?;
                    report.start = i;
                    Ok(report)
                })
                .collect();
            let failed = results.iter().filter(|r| r.is_err()).count();
            let mut best: Option<FitReport> = None;
            for report in results.into_iter().flatten() {
                if best.as_ref().is_none_or(|b| report.loglik > b.loglik) {
                    best = Some(report);
                }
            }
            let mut best = best.ok_or(MvarError::AllStartsFailed(starts))?;
            best.failed_starts = failed;
            Ok(best)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    Aic,
    Bic,
}

impl Criterion {
    pub fn score(&self, report: &FitReport) -> f64 {
        match self {
            Criterion::Aic => report.aic,
            Criterion::Bic => report.bic,
        }
    }
}

/// One entry of an order-selection sweep.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub spec: ModelSpec,
    pub fit: Result<FitReport>,
    /// Criterion value; `None` when the fit failed.
    pub score: Option<f64>,
    /// 1-based rank after sorting; failed candidates rank last.
    pub rank: usize,
}

/// Every combination of component count and common order.
pub fn candidate_grid(m: usize, g_range: &[usize], p_range: &[usize]) -> Result<Vec<ModelSpec>> {
    let mut specs = Vec::new();
    for &g in g_range {
        if g == 0 {
            return Err(MvarError::InvalidSpec("component count must be at least 1".into()));
        }
        for &p in p_range {
            specs.push(ModelSpec::uniform(m, g, p)?);
        }
    }
    Ok(specs)
}

/// Fits each candidate and ranks them by the criterion, ascending.
///
/// Every candidate is scored on the same observations: the first
/// max_c p_c rows are conditioned on for all of them, so likelihoods and
/// information criteria are comparable across orders.
pub fn select_order(
    series: &SeriesMatrix,
    candidates: &[ModelSpec],
    criterion: Criterion,
    init: &InitStrategy,
    options: &EmOptions,
) -> Vec<Candidate> {
    let p_max = candidates.iter().map(ModelSpec::p).max().unwrap_or(0);
    let mut out: Vec<Candidate> = candidates
        .iter()
        .map(|spec| {
            let skip = (p_max - spec.p()).min(series.len());
            let fit = series
                .slice(skip..series.len())
                .and_then(|s| em_fit(&s, spec, init, options));
            let score = fit.as_ref().ok().map(|r| criterion.score(r));
            Candidate { spec: spec.clone(), fit, score, rank: 0 }
        })
        .collect();
    out.sort_by(|a, b| match (a.score, b.score) {
        (Some(x), Some(y)) => x.total_cmp(&y),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    for (i, c) in out.iter_mut().enumerate() {
        c.rank = i + 1;
    }
    out
}
