//! Linking-type minimax solve of `(√(-Δ+1) - 1)u = u³` on the circle.

use fractorus::linking::{minimax_search, newton_refine, residual_norm, LinkingConfig, Stage};
use fractorus::nonlinearity::{NonlinearityKind, NonlinearitySpec};
use fractorus::spectral::{hs_norm, FracParams, TorusGrid};
use std::f64::consts::PI;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = TorusGrid::new(1, 2.0 * PI, 64)?;
    let frac = FracParams::new(0.5, 1.0)?;
    let spec = NonlinearitySpec::new(NonlinearityKind::PurePower, 3.0, &grid, &frac)?;
    let start = std::time::Instant::now();
    let state = minimax_search(&frac, &spec, &LinkingConfig::default())?;
    println!("status       {:?} ({:.2?})", state.status, start.elapsed());
    println!("level        {:.12}", state.level);
    println!("ridge        eta = {:.6}, rho = {:.6}", state.ridge.eta, state.ridge.rho);
    println!("sampled max  {:.6}", state.delta_hat);
    println!("caps         R = {}, R' = {}", state.r_cap, state.r_prime);
    println!("residual     {:.3e}", residual_norm(&state.iterate, &frac, &spec));
    println!("H^s norm     {:.6}", hs_norm(&state.iterate, &frac));
    let sweeps = state.history.len();
    let reduce = state.polish.iter().filter(|r| r.stage == Stage::Reduce).count();
    println!("sweeps       {sweeps} deformation, {reduce} fiber descent");
    for row in state.history.iter().step_by((sweeps / 8).max(1)) {
        println!("  sweep {:4}  level {:.8}  |grad| {:.3e}", row.sweep, row.level, row.grad_norm);
    }
    let polished = newton_refine(&state.iterate, &frac, &spec, 1e-11)?;
    let moved = hs_norm(&polished.lincomb(1.0, &state.iterate, -1.0), &frac);
    println!("Newton shift {moved:.3e}");
    Ok(())
}
