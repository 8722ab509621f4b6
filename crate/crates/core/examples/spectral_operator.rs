//! Applies `(-Δ+m²)^s` and its shifted form to a smooth field on the 2-torus
//! and inverts the shifted operator on zero-mean data.

use fractorus::spectral::{
    apply_bessel_operator, apply_shifted_operator, forward_transform, hs_norm, inverse_transform,
    project_zero_mean, solve_linear, Field, FracParams, TorusGrid,
};
use std::f64::consts::PI;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = TorusGrid::new(2, 2.0 * PI, 32)?;
    let frac = FracParams::new(0.75, 0.5)?;
    let u = forward_transform(&Field::from_fn(grid, |x| {
        (x[0].cos() + 0.5 * (2.0 * x[1]).sin()).exp()
    })?);
    let lu = apply_bessel_operator(&u, &frac);
    let su = apply_shifted_operator(&u, &frac);
    println!("mean coefficient      {:.6}", u.mean_coeff());
    println!("|u|_L2                {:.6}", u.l2_norm());
    println!("|u|_Hs                {:.6}", hs_norm(&u, &frac));
    println!("<Lu, u> = |u|_Hs^2    {:.6}", lu.dot(&u));
    println!("<(L - m^2s)u, u>      {:.6}", su.dot(&u));

    let g = project_zero_mean(&su);
    let back = solve_linear(&g, &frac, true)?;
    let err = back.lincomb(1.0, &project_zero_mean(&u), -1.0).l2_norm();
    println!("inverse on zero mean  error {err:.2e}");

    let field = inverse_transform(&lu)?;
    let max = field.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    println!("Lu range              [{:.4}, {max:.4}]", field.min());
    Ok(())
}
