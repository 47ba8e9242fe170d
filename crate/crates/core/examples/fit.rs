//! Fits a two-component model to a simulated path of 498 observations.

use mvar::io::ModelFile;
use mvar::{em_fit, is_stable, simulate, EmOptions, InitStrategy, SimulationConfig};

fn main() -> mvar::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/design.json");
    let truth = ModelFile::load(path.as_ref())?.params()?;
    let y = simulate(&SimulationConfig::new(truth.clone(), 498, 7))?.series;

    let init = InitStrategy::RandomStarts { starts: 10, seed: 1 };
    let fit = em_fit(&y, truth.spec(), &init, &EmOptions::default())?;
    println!(
        "loglik {:.3}  AIC {:.3}  BIC {:.3}  iterations {}  converged {}",
        fit.loglik, fit.aic, fit.bic, fit.iterations, fit.converged
    );
    let p = &fit.params;
    for k in 0..p.spec().g() {
        println!("component {}: weight {:.4}", k + 1, p.weights()[k]);
        println!("  intercept {}", row(p.intercept(k)));
        println!("  lag 1 {:.4}", p.ar(k, 1));
        println!("  covariance {:.4}", p.cov(k));
    }
    println!("spectral radius {:.4}", is_stable(p)?.spectral_radius);
    Ok(())
}

fn row(v: &nalgebra::DVector<f64>) -> String {
    let cells: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("[{}]", cells.join(", "))
}
