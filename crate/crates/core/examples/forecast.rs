//! One- and two-step predictive mixtures, and Monte Carlo at a longer horizon.

use mvar::io::ModelFile;
use mvar::{
    mixture_moments, predictive_h_step_mc, predictive_one_step, predictive_two_step, simulate,
    ForecastOrigin, SimulationConfig,
};

fn main() -> mvar::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/design.json");
    let params = ModelFile::load(path.as_ref())?.params()?;
    let y = simulate(&SimulationConfig::new(params.clone(), 500, 11))?.series;
    let origin = ForecastOrigin::from_series(&y, 499, params.spec().p())?;
    println!("origin value {}", row(y.row(499)));

    let one = predictive_one_step(&params, &origin)?;
    for (w, mean) in one.weights().iter().zip(one.means()) {
        println!("h=1 component weight {w:.4} mean {}", row(mean));
    }
    let m1 = mixture_moments(&one);
    println!("h=1 mean {}\ncovariance {:.4}", row(&m1.mean), m1.cov);

    let two = predictive_two_step(&params, &origin)?;
    let m2 = mixture_moments(&two);
    println!("h=2 ({} components) mean {}\ncovariance {:.4}", two.len(), row(&m2.mean), m2.cov);

    let mc = predictive_h_step_mc(&params, &origin, 5, 200_000, 1)?;
    println!("h=5 Monte Carlo mean {}\ncovariance {:.4}", row(&mc.moments.mean), mc.moments.cov);
    Ok(())
}

fn row(v: &nalgebra::DVector<f64>) -> String {
    let cells: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("[{}]", cells.join(", "))
}
