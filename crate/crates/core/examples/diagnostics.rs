//! Integrability ladder and Hölder proxy for a computed solution and for a
//! rough reference field.

use fractorus::continuation::{bootstrap_diagnostic, holder_proxy, rough_field};
use fractorus::linking::{minimax_search, LinkingConfig};
use fractorus::nonlinearity::{NonlinearityKind, NonlinearitySpec};
use fractorus::spectral::{FracParams, TorusGrid};
use std::f64::consts::PI;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = TorusGrid::new(1, 2.0 * PI, 64)?;
    let frac = FracParams::new(0.5, 1.0)?;
    let spec = NonlinearitySpec::new(NonlinearityKind::PurePower, 3.0, &grid, &frac)?;
    let u = minimax_search(&frac, &spec, &LinkingConfig::default())?.iterate;

    let qs = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0];
    let boot = bootstrap_diagnostic(&u, frac.s(), &qs)?;
    for r in &boot.rows {
        println!("|u|_L{:<4} {:.8}", r.q, r.norm);
    }
    println!("largest growth    {:.4}", boot.max_growth);
    let h = holder_proxy(&u)?;
    println!("solution: alpha {:.4}, top band {:.1e}", h.alpha, h.top_band_fraction);

    let fine = TorusGrid::new(1, 2.0 * PI, 512)?;
    for seed in 0..6 {
        let h = holder_proxy(&rough_field(&fine, seed))?;
        println!(
            "rough field {seed}: alpha {:.4}, spectral {:.4}",
            h.alpha,
            h.spectral_alpha.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
