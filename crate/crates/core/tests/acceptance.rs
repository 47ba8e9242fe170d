//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

mod common;

use std::time::{Duration, Instant};

use mvar::forecasting::predictive_h_step_mc;
use mvar::io::compare::evaluate_origin;
use mvar::portfolio::variance_identity_check;
use mvar::{
    efficient_weights, em_fit, is_stable, markowitz_coefficients, mixture_moments, mvp_weights,
    predictive_two_step, simulate, crps_mixture, var_es, EmOptions, ForecastOrigin, InitStrategy,
    MixtureNormal1D, ModelSpec, MvarParameters, SimulationConfig,
};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;

use common::{random_params, random_spd, rng, true_params};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 9] = [
        ("VaR/ES of the projected return mixture", Duration::from_secs(1), var_reproduction),
        ("parameter recovery", Duration::from_secs(120), parameter_recovery),
        ("EM monotonicity", Duration::from_secs(300), em_monotonicity),
        ("two-step analytic vs Monte Carlo", Duration::from_secs(120), two_step_vs_mc),
        ("variance identity", Duration::from_secs(60), variance_identity),
        ("Markowitz correctness", Duration::from_secs(60), markowitz),
        ("CRPS closed form vs quadrature", Duration::from_secs(60), crps_quadrature),
        ("CRPS model-comparison propriety", Duration::from_secs(600), comparison_propriety),
        ("stability criterion", Duration::from_secs(60), stability),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut out = run();
        let elapsed = start.elapsed();
        if elapsed > *budget {
            out.pass = false;
            out.detail.push_str(&format!("; over time budget {budget:?}"));
        }
        if !out.pass {
            failed += 1;
        }
        println!(
            "{} [{}] {name}: {} ({:.2}s)",
            if out.pass { "PASS" } else { "FAIL" },
            i + 1,
            out.detail,
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn var_reproduction() -> Outcome {
    let mix = MixtureNormal1D::new(
        vec![0.7242, 0.2758],
        vec![0.2642, -0.6939],
        vec![1.2235, 1.3025],
        1,
        0,
    )
    .unwrap();
    let r = var_es(&mix, 0.95).unwrap();
    let var_ok = (r.var - -2.2039).abs() <= 1e-3;
    let es_ok = (r.es - -2.7912).abs() <= 2e-2;
    outcome(
        var_ok && es_ok,
        format!(
            "VaR {:.5} (target -2.2039 ±1e-3, {}), ES {:.5} (target -2.7912 ±2e-2, {})",
            r.var,
            if var_ok { "ok" } else { "off" },
            r.es,
            if es_ok { "ok" } else { "off" }
        ),
    )
}

fn parameter_recovery() -> Outcome {
    let truth = true_params();
    let results: Vec<(bool, String)> = (0..10u64)
        .into_par_iter()
        .map(|seed| {
            let path = simulate(&SimulationConfig::new(truth.clone(), 2000, seed)).unwrap();
            let fit = em_fit(
                &path.series,
                truth.spec(),
                &InitStrategy::RandomStarts { starts: 10, seed },
                &EmOptions::default(),
            );
            let Ok(fit) = fit else {
                return (false, format!("seed {seed}: fit failed"));
            };
            let p = &fit.params;
            let dpi = (0..2).map(|k| (p.weights()[k] - truth.weights()[k]).abs()).fold(0.0, f64::max);
            let mut dtheta = 0.0f64;
            let mut domega = 0.0f64;
            for k in 0..2 {
                dtheta = dtheta.max((p.intercept(k) - truth.intercept(k)).amax());
                dtheta = dtheta.max((p.ar(k, 1) - truth.ar(k, 1)).amax());
                domega = domega.max((p.cov(k) - truth.cov(k)).amax());
            }
            let ok = dpi <= 0.04 && dtheta <= 0.1 && domega <= 0.3;
            (ok, format!("seed {seed}: |dpi| {dpi:.3} |dtheta| {dtheta:.3} |domega| {domega:.3}"))
        })
        .collect();
    let passed = results.iter().filter(|r| r.0).count();
    let misses: Vec<&str> = results.iter().filter(|r| !r.0).map(|r| r.1.as_str()).collect();
    outcome(
        passed >= 9,
        format!("{passed}/10 seeds within tolerance{}", if misses.is_empty() { String::new() } else { format!(" [{}]", misses.join("; ")) }),
    )
}

fn em_monotonicity() -> Outcome {
    let mut r = rng(3);
    let mut triples = Vec::new();
    while triples.len() < 50 {
        let m = r.random_range(1..=3);
        let g = r.random_range(1..=3);
        let orders: Vec<usize> = (0..g).map(|_| r.random_range(0..=2)).collect();
        let n = r.random_range(150..=400);
        let truth = random_params(&mut r, m, orders);
        let data_seed: u64 = r.random();
        let start_seed: u64 = r.random();
        triples.push((truth, n, data_seed, start_seed));
    }
    let results: Vec<Option<f64>> = triples
        .par_iter()
        .map(|(truth, n, data_seed, start_seed)| {
            let series = simulate(&SimulationConfig::new(truth.clone(), *n, *data_seed)).unwrap().series;
            let init = InitStrategy::RandomStarts { starts: 1, seed: *start_seed };
            let fit = em_fit(&series, truth.spec(), &init, &EmOptions::default()).ok()?;
            Some(fit.loglik_trace.windows(2).map(|w| w[0] - w[1]).fold(f64::NEG_INFINITY, f64::max))
        })
        .collect();
    let fitted: Vec<f64> = results.iter().flatten().copied().collect();
    let worst = fitted.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let failed_fits = results.len() - fitted.len();
    outcome(
        fitted.len() == 50 && worst <= 1e-8,
        format!("{} traces, largest decrease {worst:.3e}, {failed_fits} fits aborted", fitted.len()),
    )
}

fn two_step_vs_mc() -> Outcome {
    let params = true_params();
    let path = simulate(&SimulationConfig::new(params.clone(), 1000, 77)).unwrap().series;
    let mut r = rng(4);
    let origins: Vec<usize> = (0..20).map(|_| r.random_range(1..path.len())).collect();
    let n_paths = 1_000_000;
    let mut worst = 0.0f64;
    let mut misses = Vec::new();
    for (i, &t) in origins.iter().enumerate() {
        let origin = ForecastOrigin::from_series(&path, t, 1).unwrap();
        let analytic = mixture_moments(&predictive_two_step(&params, &origin).unwrap());
        let mc = predictive_h_step_mc(&params, &origin, 2, n_paths, 1000 + i as u64).unwrap();
        let x = &mc.samples;
        let mean = &mc.moments.mean;
        let centered = DMatrix::from_fn(n_paths, 3, |r, c| x[(r, c)] - mean[c]);
        for a in 0..3 {
            let se = (mc.moments.cov[(a, a)] / n_paths as f64).sqrt();
            let z = (mean[a] - analytic.mean[a]).abs() / se;
            worst = worst.max(z);
            if z > 3.0 {
                misses.push(format!("t={t} mean[{a}] z={z:.2}"));
            }
            for b in a..3 {
                let prod = centered.column(a).component_mul(&centered.column(b));
                let mu = prod.mean();
                let var = prod.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (n_paths - 1) as f64;
                let se = (var / n_paths as f64).sqrt();
                let z = (mc.moments.cov[(a, b)] - analytic.cov[(a, b)]).abs() / se;
                worst = worst.max(z);
                if z > 3.0 {
                    misses.push(format!("t={t} cov[{a},{b}] z={z:.2}"));
                }
            }
        }
    }
    outcome(
        misses.is_empty(),
        format!("180 comparisons, max |z| {worst:.2}{}", if misses.is_empty() { String::new() } else { format!(", beyond 3 SE: {}", misses.join(", ")) }),
    )
}

fn variance_identity() -> Outcome {
    let mut r = rng(5);
    let mut worst = 0.0f64;
    let mut count = 0;
    while count < 100 {
        let m = r.random_range(2..=4);
        let g = r.random_range(1..=3);
        let orders: Vec<usize> = (0..g).map(|_| r.random_range(0..=2)).collect();
        let params = random_params(&mut r, m, orders);
        if !is_stable(&params).unwrap().stable {
            continue;
        }
        let p = params.spec().p();
        let history = (0..p).map(|_| DVector::from_fn(m, |_, _| r.random_range(-2.0..2.0))).collect();
        let origin = ForecastOrigin::new(history, 10).unwrap();
        let w = DVector::from_fn(m, |_, _| r.random_range(-1.0..1.0));
        worst = worst.max(variance_identity_check(&params, &origin, &w).unwrap().gap);
        count += 1;
    }
    outcome(worst < 1e-8, format!("max gap {worst:.3e} over 100 instances"))
}

/// A, B, C, D through an explicit inverse.
fn explicit_coefficients(mean: &DVector<f64>, cov: &DMatrix<f64>) -> (f64, f64, f64, f64) {
    let inv = cov.clone().try_inverse().unwrap();
    let ones = DVector::from_element(mean.len(), 1.0);
    let a = (ones.transpose() * &inv * mean)[(0, 0)];
    let b = (mean.transpose() * &inv * mean)[(0, 0)];
    let c = (ones.transpose() * &inv * &ones)[(0, 0)];
    (a, b, c, b * c - a * a)
}

fn markowitz() -> Outcome {
    let mut r = rng(6);
    let (mut budget, mut target_err, mut var_err, mut mvp_err, mut coef_err) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let m = r.random_range(2..=6);
        let cov = random_spd(&mut r, m);
        let mean = DVector::from_fn(m, |_, _| r.random_range(-0.05..0.05));
        let target = r.random_range(-0.1..0.1);
        let (a, b, c, d) = explicit_coefficients(&mean, &cov);
        let coefs = markowitz_coefficients(&mean, &cov).unwrap();
        coef_err = coef_err.max(((coefs.d - d) / d).abs());

        let sol = efficient_weights(&mean, &cov, target).unwrap();
        budget = budget.max((sol.weights.sum() - 1.0).abs());
        target_err = target_err.max((sol.weights.dot(&mean) - target).abs());
        let frontier = (c * target * target - 2.0 * a * target + b) / d;
        var_err = var_err.max((sol.sd * sol.sd - frontier).abs());

        let at_mvp = efficient_weights(&mean, &cov, a / c).unwrap();
        let mvp = mvp_weights(&mean, &cov).unwrap();
        mvp_err = mvp_err.max((at_mvp.weights - mvp.weights).amax());
    }
    let pass = budget < 1e-10 && target_err < 1e-10 && var_err < 1e-8 && mvp_err < 1e-10;
    outcome(
        pass,
        format!(
            "budget {budget:.1e}, target {target_err:.1e}, frontier variance {var_err:.1e}, MVP {mvp_err:.1e}, D rel {coef_err:.1e}"
        ),
    )
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        if depth == 0 || diff.abs() <= 15.0 * tol {
            left + right + diff / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50)
}

/// ∫ (F(y) − 1{y ≥ x})² dy, split at x and truncated 12 sd beyond the components.
fn crps_by_quadrature(mix: &MixtureNormal1D, x: f64) -> f64 {
    let cdf = |y: f64| mix.components().map(|(w, m, s)| w * mvar::normal::cdf((y - m) / s)).sum::<f64>();
    let lo = mix.components().map(|(_, m, s)| m - 12.0 * s).fold(x, f64::min);
    let hi = mix.components().map(|(_, m, s)| m + 12.0 * s).fold(x, f64::max);
    let below = adaptive_simpson(&|y| cdf(y).powi(2), lo, x, 1e-12);
    let above = adaptive_simpson(&|y| (1.0 - cdf(y)).powi(2), x, hi, 1e-12);
    below + above
}

fn crps_quadrature() -> Outcome {
    let mut r = rng(7);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let g = r.random_range(1..=4);
        let weights: Vec<f64> = (0..g).map(|_| r.random_range(0.1..1.0)).collect();
        let total: f64 = weights.iter().sum();
        let mix = MixtureNormal1D::new(
            weights.iter().map(|w| w / total).collect(),
            (0..g).map(|_| r.random_range(-2.0..2.0)).collect(),
            (0..g).map(|_| r.random_range(0.1..3.0)).collect(),
            1,
            0,
        )
        .unwrap();
        let x = r.random_range(-5.0..5.0);
        worst = worst.max((crps_mixture(&mix, x) - crps_by_quadrature(&mix, x)).abs());
    }
    let std_normal = MixtureNormal1D::new(vec![1.0], vec![0.0], vec![1.0], 1, 0).unwrap();
    let at_mean = crps_mixture(&std_normal, 0.0);
    // (√2 − 1)/√π, printed to five places as 0.23370.
    let exact = (2f64.sqrt() - 1.0) / std::f64::consts::PI.sqrt();
    let quad_ok = worst < 1e-7;
    let ref_ok = (at_mean - exact).abs() < 1e-6;
    outcome(
        quad_ok && ref_ok,
        format!(
            "max |closed - quadrature| {worst:.2e} ({}); N(0,1) at mean {at_mean:.7} vs (sqrt2-1)/sqrtpi = {exact:.7} ±1e-6 ({}), gap to the rounded 0.23370 is {:.1e}",
            if quad_ok { "ok" } else { "off" },
            if ref_ok { "ok" } else { "off" },
            (at_mean - 0.23370).abs()
        ),
    )
}

fn comparison_propriety() -> Outcome {
    let truth = true_params();
    let train = 2000;
    let origins = 200;
    let series = simulate(&SimulationConfig::new(truth.clone(), train + origins + 1, 11)).unwrap().series;
    let training = series.slice(0..train).unwrap();
    let init = InitStrategy::RandomStarts { starts: 10, seed: 11 };
    let mvar = em_fit(&training, truth.spec(), &init, &EmOptions::default()).unwrap().params;
    let var = em_fit(&training, &ModelSpec::new(3, vec![1]).unwrap(), &init, &EmOptions::default()).unwrap().params;

    let mut details = Vec::new();
    let mut pass = true;
    for h in 1..=2 {
        let range = train - 1..train - 1 + origins;
        let diffs: Vec<f64> = range
            .clone()
            .into_par_iter()
            .map(|t| {
                let a = evaluate_origin(&var, &series, t, h, 0.95).unwrap().crps;
                let b = evaluate_origin(&mvar, &series, t, h, 0.95).unwrap().crps;
                a - b
            })
            .collect();
        let n = diffs.len() as f64;
        let mean = diffs.iter().sum::<f64>() / n;
        let sd = (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let se = sd / n.sqrt();
        pass &= mean > 3.0 * se;
        details.push(format!("h={h}: mean CRPS(VAR) - CRPS(MVAR) = {mean:.4} (SE {se:.4}, {:.1} SE)", mean / se));
    }
    outcome(pass, details.join("; "))
}

fn scalar(theta: f64) -> MvarParameters {
    MvarParameters::new(
        ModelSpec::new(1, vec![1]).unwrap(),
        vec![1.0],
        vec![DVector::zeros(1)],
        vec![vec![DMatrix::from_element(1, 1, theta)]],
        vec![DMatrix::identity(1, 1)],
    )
    .unwrap()
}

fn stability() -> Outcome {
    let scalar_err = [0.3, -0.7, 0.95, 1.2]
        .iter()
        .map(|&t| (is_stable(&scalar(t)).unwrap().spectral_radius - t * t).abs())
        .fold(0.0, f64::max);
    let zero = is_stable(&scalar(0.0)).unwrap().spectral_radius;
    let truth = is_stable(&true_params()).unwrap();
    // Largest eigenvalue modulus of the 9×9 matrix, from a 40-digit dense eigensolver.
    let oracle = 0.423_511_312_732_228_0;
    let pass = scalar_err < 1e-12 && zero == 0.0 && truth.stable && (truth.spectral_radius - oracle).abs() < 1e-10;
    outcome(
        pass,
        format!(
            "scalar |rho - theta^2| {scalar_err:.1e}, zero rho {zero}, design rho {:.16} (oracle {oracle}), stable {}",
            truth.spectral_radius, truth.stable
        ),
    )
}
