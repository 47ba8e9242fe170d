//! Ranks candidate specifications by BIC.

use mvar::estimation::{candidate_grid, Criterion};
use mvar::io::{model_label, ModelFile};
use mvar::{select_order, simulate, EmOptions, InitStrategy, SimulationConfig};

fn main() -> mvar::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/design.json");
    let truth = ModelFile::load(path.as_ref())?.params()?;
    let y = simulate(&SimulationConfig::new(truth, 1000, 3))?.series;

    let specs = candidate_grid(3, &[1, 2, 3], &[1, 2])?;
    let init = InitStrategy::RandomStarts { starts: 5, seed: 0 };
    for c in select_order(&y, &specs, Criterion::Bic, &init, &EmOptions::default()) {
        match c.score {
            Some(bic) => println!("{:>2}  {:<14} BIC {bic:.2}", c.rank, model_label(&c.spec)),
            None => println!("{:>2}  {:<14} failed", c.rank, model_label(&c.spec)),
        }
    }
    Ok(())
}
