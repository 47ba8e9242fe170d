//! Simulates the three-asset design model and reports regime shares and
//! sample moments.

use mvar::forecasting::sample_moments;
use mvar::io::ModelFile;
use mvar::{is_stable, simulate, SimulationConfig};
use nalgebra::DMatrix;

fn main() -> mvar::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/design.json");
    let params = ModelFile::load(path.as_ref())?.params()?;
    let stability = is_stable(&params)?;
    println!("spectral radius {:.6} (stable: {})", stability.spectral_radius, stability.stable);

    let path = simulate(&SimulationConfig::new(params, 10_000, 2024))?;
    let share = path.labels.iter().filter(|&&k| k == 0).count() as f64 / path.labels.len() as f64;
    println!("regime 1 share {share:.4}");

    let y = &path.series;
    let samples = DMatrix::from_fn(y.len(), y.dim(), |t, i| y.row(t)[i]);
    let moments = sample_moments(&samples);
    println!("sample mean {}", row(&moments.mean));
    println!("sample covariance {:.4}", moments.cov);
    Ok(())
}

fn row(v: &nalgebra::DVector<f64>) -> String {
    let cells: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("[{}]", cells.join(", "))
}
