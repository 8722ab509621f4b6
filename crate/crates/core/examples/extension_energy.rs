//! Extends a trace to the half-cylinder, compares its weighted energy with
//! κ_s|u|²_{H^s}, and measures how far competitor profiles sit above it.

use fractorus::bessel::{kappa, limit_points};
use fractorus::extension::{
    conormal_derivative, extend, ground_gap, sharp_trace_gap, ModalCylinder, ProfileKind,
    DEFAULT_CYLINDER_NODES,
};
use fractorus::spectral::{apply_bessel_operator, forward_transform, hs_norm, Field, FracParams, TorusGrid};
use std::f64::consts::PI;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = TorusGrid::new(1, 2.0 * PI, 32)?;
    let frac = FracParams::new(0.3, 0.8)?;
    let u = forward_transform(&Field::from_fn(grid, |x| 0.4 + x[0].sin() + 0.3 * (3.0 * x[0]).cos())?);
    let k = kappa(frac.s())?;

    let ext = extend(&u, &frac)?;
    let target = k * hs_norm(&u, &frac).powi(2);
    println!("kappa |u|_Hs^2        {target:.12}");
    println!("analytic energy       {:.12}", ext.energy()?);
    let sampled = ext.sample(DEFAULT_CYLINDER_NODES);
    println!("sampled energy        {:.12}", sampled.energy(&frac));
    println!("trace gap (exact)     {:.2e}", sharp_trace_gap(&sampled, &frac)?);
    println!("ground gap            {:.6}", ground_gap(&sampled, &frac)?);

    let cn = conormal_derivative(&ext, &limit_points(0.2, 6))?;
    let expect = apply_bessel_operator(&u, &frac).scaled(k);
    println!(
        "conormal vs kappa Lu  {:.2e}",
        cn.lincomb(1.0, &expect, -1.0).l2_norm() / expect.l2_norm()
    );

    println!("competitors:");
    for kind in [
        ProfileKind::Theta { scale: 0.7 },
        ProfileKind::Theta { scale: 1.4 },
        ProfileKind::Exponential { rate: 0.8 },
        ProfileKind::Exponential { rate: 1.5 },
    ] {
        let cyl = ModalCylinder::uniform(&u, &frac, kind)?.sample(DEFAULT_CYLINDER_NODES);
        println!("  {kind:?}: gap {:.6}", sharp_trace_gap(&cyl, &frac)?);
    }
    Ok(())
}
