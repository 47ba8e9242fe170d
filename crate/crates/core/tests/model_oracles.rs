mod common;

use mvar::{
    companion_matrix, component_residual, is_stable, log_likelihood, simulate, ModelSpec,
    MvarParameters, SeriesMatrix, SimulationConfig,
};
use nalgebra::{DMatrix, DVector};

use common::{random_params, rng, true_params};

/// Residual written out entry by entry.
fn residual_oracle(params: &MvarParameters, y: &SeriesMatrix, t: usize, k: usize) -> Vec<f64> {
    let m = params.spec().m();
    (0..m)
        .map(|i| {
            let mut v = y.row(t)[i] - params.intercept(k)[i];
            for lag in 1..=params.spec().order(k) {
                for j in 0..m {
                    v -= params.ar(k, lag)[(i, j)] * y.row(t - lag)[j];
                }
            }
            v
        })
        .collect()
}

/// Gaussian density through an explicit inverse and determinant.
fn density(e: &[f64], cov: &DMatrix<f64>) -> f64 {
    let m = e.len();
    let inv = cov.clone().try_inverse().unwrap();
    let mut q = 0.0;
    for i in 0..m {
        for j in 0..m {
            q += e[i] * inv[(i, j)] * e[j];
        }
    }
    (-0.5 * q).exp() / ((2.0 * std::f64::consts::PI).powi(m as i32) * cov.determinant()).sqrt()
}

fn likelihood_oracle(params: &MvarParameters, y: &SeriesMatrix) -> f64 {
    let p = params.spec().p();
    let mut total = 0.0;
    for t in p..y.len() {
        let mut mix = 0.0;
        for k in 0..params.spec().g() {
            mix += params.weights()[k] * density(&residual_oracle(params, y, t, k), params.cov(k));
        }
        total += mix.ln();
    }
    total
}

#[test]
fn residuals_match_direct_evaluation() {
    let params = true_params();
    let y = simulate(&SimulationConfig::new(params.clone(), 300, 1)).unwrap().series;
    for t in [1, 2, 57, 299] {
        for k in 0..2 {
            let e = component_residual(&params, &y, t, k).unwrap();
            let oracle = residual_oracle(&params, &y, t, k);
            for i in 0..3 {
                assert!((e[i] - oracle[i]).abs() < 1e-13);
            }
        }
    }
    assert!(component_residual(&params, &y, 0, 0).is_err());
    assert!(component_residual(&params, &y, 300, 0).is_err());
}

#[test]
fn residual_is_unit_linear_in_current_observation() {
    let params = true_params();
    let y = simulate(&SimulationConfig::new(params.clone(), 50, 2)).unwrap().series;
    let shift = DVector::from_row_slice(&[0.3, -1.0, 2.5]);
    let mut rows = y.rows().to_vec();
    rows[20] += &shift;
    let shifted = SeriesMatrix::new(rows).unwrap();
    let a = component_residual(&params, &y, 20, 1).unwrap();
    let b = component_residual(&params, &shifted, 20, 1).unwrap();
    assert!((b - a - shift).amax() < 1e-14);
}

#[test]
fn likelihood_matches_naive_density_sum() {
    let params = true_params();
    let y = simulate(&SimulationConfig::new(params.clone(), 500, 3)).unwrap().series;
    let ll = log_likelihood(&params, &y).unwrap();
    assert!((ll - likelihood_oracle(&params, &y)).abs() < 1e-8, "{ll}");

    let mut r = rng(30);
    for orders in [vec![2, 0], vec![1, 2, 1], vec![0]] {
        let params = random_params(&mut r, 2, orders);
        let y = simulate(&SimulationConfig::new(params.clone(), 200, 4)).unwrap().series;
        let ll = log_likelihood(&params, &y).unwrap();
        assert!((ll - likelihood_oracle(&params, &y)).abs() < 1e-8);
    }
}

#[test]
fn single_component_is_gaussian_var() {
    let mut r = rng(31);
    let params = random_params(&mut r, 3, vec![2]);
    let y = simulate(&SimulationConfig::new(params.clone(), 150, 5)).unwrap().series;
    let direct: f64 = (2..y.len())
        .map(|t| density(&residual_oracle(&params, &y, t, 0), params.cov(0)).ln())
        .sum();
    assert!((log_likelihood(&params, &y).unwrap() - direct).abs() < 1e-9);
}

#[test]
fn likelihood_ignores_component_labels() {
    let mut r = rng(32);
    let params = random_params(&mut r, 2, vec![1, 2, 0]);
    let y = simulate(&SimulationConfig::new(params.clone(), 100, 6)).unwrap().series;
    let base = log_likelihood(&params, &y).unwrap();
    for perm in [[2, 0, 1], [1, 0, 2], [2, 1, 0]] {
        let ll = log_likelihood(&params.permuted(&perm), &y).unwrap();
        assert!((ll - base).abs() < 1e-10);
    }
}

#[test]
fn companion_of_order_one_model_is_lag_matrix() {
    let params = true_params();
    for k in 0..2 {
        assert_eq!(companion_matrix(&params, k).unwrap(), *params.ar(k, 1));
    }
    let scalar = MvarParameters::new(
        ModelSpec::new(1, vec![1]).unwrap(),
        vec![1.0],
        vec![DVector::zeros(1)],
        vec![vec![DMatrix::from_element(1, 1, 0.5)]],
        vec![DMatrix::identity(1, 1)],
    )
    .unwrap();
    assert_eq!(companion_matrix(&scalar, 0).unwrap(), DMatrix::from_element(1, 1, 0.5));
}

#[test]
fn stability_of_simulation_design() {
    let s = is_stable(&true_params()).unwrap();
    assert!(s.stable);
    // 40-digit dense eigensolver on the 9×9 Kronecker sum.
    assert!((s.spectral_radius - 0.423_511_312_732_228_0).abs() < 1e-10);
}

#[test]
fn scalar_spectral_radius_is_square() {
    for theta in [-0.9, -0.2, 0.0, 0.4, 0.99, 1.0, 1.3] {
        let params = MvarParameters::new(
            ModelSpec::new(1, vec![1]).unwrap(),
            vec![1.0],
            vec![DVector::zeros(1)],
            vec![vec![DMatrix::from_element(1, 1, theta)]],
            vec![DMatrix::identity(1, 1)],
        )
        .unwrap();
        let s = is_stable(&params).unwrap();
        assert!((s.spectral_radius - theta * theta).abs() < 1e-14);
        assert_eq!(s.stable, theta * theta < 1.0 - 1e-10);
    }
}
