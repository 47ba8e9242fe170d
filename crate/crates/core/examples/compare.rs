//! Out-of-sample comparison of a Gaussian VAR and a two-component mixture
//! over rolling origins.

use mvar::io::{evaluate_origin, model_label, ModelFile};
use mvar::{em_fit, simulate, EmOptions, InitStrategy, ModelSpec, SimulationConfig};

fn main() -> mvar::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/design.json");
    let truth = ModelFile::load(path.as_ref())?.params()?;
    let train = 1000;
    let origins = 100;
    let y = simulate(&SimulationConfig::new(truth, train + origins + 1, 5))?.series;
    let sample = y.slice(0..train)?;

    let init = InitStrategy::RandomStarts { starts: 5, seed: 0 };
    for orders in [vec![1], vec![1, 1]] {
        let spec = ModelSpec::new(3, orders)?;
        let fit = em_fit(&sample, &spec, &init, &EmOptions::default())?;
        for h in [1, 2] {
            let mut crps = 0.0;
            let mut breaches = 0;
            let mut count = 0;
            for t in train - 1..train + origins - h {
                let row = evaluate_origin(&fit.params, &y, t, h, 0.95)?;
                crps += row.crps;
                breaches += usize::from(row.realized < row.var);
                count += 1;
            }
            println!(
                "{:<12} h={h}  mean CRPS {:.4}  VaR breaches {breaches}/{count}",
                model_label(&spec),
                crps / count as f64
            );
        }
    }
    Ok(())
}
