//! Minimum-variance and target-return portfolios at horizons one and two.

use mvar::io::ModelFile;
use mvar::portfolio::{horizon_portfolio, Objective};
use mvar::{markowitz_coefficients, mixture_moments, predictive_one_step, simulate, ForecastOrigin, SimulationConfig};

fn main() -> mvar::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/design.json");
    let params = ModelFile::load(path.as_ref())?.params()?;
    let y = simulate(&SimulationConfig::new(params.clone(), 500, 11))?.series;
    let origin = ForecastOrigin::from_series(&y, 499, 1)?;

    for h in [1, 2] {
        let (mvp, returns) = horizon_portfolio(&params, &origin, h, Objective::MinimumVariance)?;
        println!(
            "h={h} MVP weights {} mean {:.4} sd {:.4} ({} return components)",
            row(&mvp.weights),
            mvp.expected_return,
            mvp.sd,
            returns.len()
        );
    }

    let moments = mixture_moments(&predictive_one_step(&params, &origin)?);
    let coefs = markowitz_coefficients(&moments.mean, &moments.cov)?;
    println!("frontier A {:.4} B {:.4} C {:.4} D {:.4}", coefs.a, coefs.b, coefs.c, coefs.d);
    for step in -2..=2 {
        let target = coefs.mvp_return() + 0.5 * step as f64;
        let (sol, _) = horizon_portfolio(&params, &origin, 1, Objective::TargetReturn(target))?;
        println!("target {target:>8.4}  sd {:.4}  weights {}", sol.sd, row(&sol.weights));
    }
    Ok(())
}

fn row(v: &nalgebra::DVector<f64>) -> String {
    let cells: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("[{}]", cells.join(", "))
}
