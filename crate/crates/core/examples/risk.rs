//! VaR, expected shortfall and CRPS of a two-component return mixture.

use mvar::{crps_mixture, mixture_cdf, var_es, MixtureNormal1D};

fn main() -> mvar::Result<()> {
    let mix = MixtureNormal1D::new(vec![0.7242, 0.2758], vec![-0.0019, -0.0299], vec![0.9773, 2.1212], 1, 0)?;
    for alpha in [0.90, 0.95, 0.99] {
        let r = var_es(&mix, alpha)?;
        println!(
            "alpha {alpha:.2}  VaR {:.5}  ES {:.5}  P(R <= VaR) {:.5}",
            r.var,
            r.es,
            mixture_cdf(&mix, r.var)
        );
    }
    for x in [-3.0, -1.0, 0.0, 1.0, 3.0] {
        println!("CRPS at {x:>4}: {:.5}", crps_mixture(&mix, x));
    }
    Ok(())
}
