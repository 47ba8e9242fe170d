#![allow(dead_code)]

use mvar::{MixtureNormalMV, ModelSpec, MvarParameters};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_chacha::ChaCha8Rng;

pub fn mat3(v: [f64; 9]) -> DMatrix<f64> {
    DMatrix::from_row_slice(3, 3, &v)
}

/// The three-asset, two-component, order-one design used for simulation studies.
pub fn true_params() -> MvarParameters {
    MvarParameters::new(
        ModelSpec::new(3, vec![1, 1]).unwrap(),
        vec![0.75, 0.25],
        vec![DVector::zeros(3), DVector::zeros(3)],
        vec![
            vec![mat3([0.5, 0.0, 0.4, -0.3, 0.0, 0.5, -0.6, 0.5, -0.3])],
            vec![mat3([-0.5, 1.0, -0.4, 0.3, 0.0, -0.2, 0.0, -0.5, 0.5])],
        ],
        vec![
            mat3([1.0, 0.5, -0.4, 0.5, 2.0, 0.8, -0.4, 0.8, 4.0]),
            mat3([1.0, 0.2, 0.0, 0.2, 2.0, -0.55, 0.0, -0.55, 4.0]),
        ],
    )
    .unwrap()
}

/// Estimates printed for the first 498 observations of a path from [`true_params`].
pub fn fitted_params() -> MvarParameters {
    MvarParameters::new(
        ModelSpec::new(3, vec![1, 1]).unwrap(),
        vec![0.7242, 0.2758],
        vec![
            DVector::from_row_slice(&[-0.0022, -0.0303, 0.1276]),
            DVector::from_row_slice(&[0.0338, 0.5499, -0.7580]),
        ],
        vec![
            vec![mat3([0.4931, -0.0339, 0.4169, -0.3156, -0.0012, 0.5078, -0.6141, 0.6007, -0.3844])],
            vec![mat3([-0.4595, 1.0124, -0.4004, 0.3343, -0.1423, -0.1551, -0.1273, -0.2336, 0.6509])],
        ],
        vec![
            mat3([0.9551, 0.4783, -0.2776, 0.4783, 1.9123, 0.9736, -0.2776, 0.9736, 3.9455]),
            mat3([0.8767, 0.4794, -0.3627, 0.4794, 2.9148, -0.6576, -0.3627, -0.6576, 9.8135]),
        ],
    )
    .unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random SPD matrix A Aᵀ + εI.
pub fn random_spd(rng: &mut ChaCha8Rng, m: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(m, m, |_, _| rng.random_range(-1.0..1.0));
    &a * a.transpose() + DMatrix::identity(m, m) * 0.1
}

/// Random parameters whose lag matrices are scaled small enough to keep the
/// model stable.
pub fn random_params(rng: &mut ChaCha8Rng, m: usize, orders: Vec<usize>) -> MvarParameters {
    let g = orders.len();
    let raw: Vec<f64> = (0..g).map(|_| rng.random_range(0.2..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let scale = 0.4 / (m as f64 * orders.iter().copied().max().unwrap_or(1).max(1) as f64);
    let ar = orders
        .iter()
        .map(|&p| {
            (0..p)
                .map(|_| DMatrix::from_fn(m, m, |_, _| rng.random_range(-scale..scale)))
                .collect()
        })
        .collect();
    MvarParameters::new(
        ModelSpec::new(m, orders).unwrap(),
        raw.iter().map(|w| w / total).collect(),
        (0..g).map(|_| DVector::from_fn(m, |_, _| rng.random_range(-1.0..1.0))).collect(),
        ar,
        (0..g).map(|_| random_spd(rng, m)).collect(),
    )
    .unwrap()
}

/// Draws from a multivariate mixture with an independent sampler.
pub fn sample_mixture(mix: &MixtureNormalMV, n: usize, seed: u64) -> DMatrix<f64> {
    let mut r = rng(seed);
    let lowers: Vec<DMatrix<f64>> = mix.covs().iter().map(|c| c.clone().cholesky().unwrap().l()).collect();
    let m = mix.dim();
    let mut out = DMatrix::zeros(n, m);
    for i in 0..n {
        let u: f64 = r.random();
        let mut acc = 0.0;
        let mut j = mix.len() - 1;
        for (k, w) in mix.weights().iter().enumerate() {
            acc += w;
            if u < acc {
                j = k;
                break;
            }
        }
        let z = DVector::from_fn(m, |_, _| r.sample::<f64, _>(StandardNormal));
        let y = &mix.means()[j] + &lowers[j] * z;
        out.row_mut(i).copy_from(&y.transpose());
    }
    out
}

