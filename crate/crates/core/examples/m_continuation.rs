//! Continuation of the linking solution from `m = 0.5` down to the
//! massless problem `(-Δ)^{1/2} u = u³`.

use fractorus::continuation::{
    estimate_sobolev_constant, extract_limit, sobolev_exponent, sweep_m,
};
use fractorus::linking::LinkingConfig;
use fractorus::nonlinearity::{NonlinearityKind, NonlinearitySpec};
use fractorus::spectral::{FracParams, TorusGrid};
use std::f64::consts::PI;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = TorusGrid::new(1, 2.0 * PI, 64)?;
    let frac = FracParams::new(0.5, 1.0)?;
    let spec = NonlinearitySpec::new(NonlinearityKind::PurePower, 3.0, &grid, &frac)?;
    let q = sobolev_exponent(&grid, &frac, spec.p())?;
    let sob = estimate_sobolev_constant(&grid, &frac, q, 0);
    println!("Sobolev estimate (q = {q}): C = {:.6}, m0 = {:.6}", sob.c_sharp, sob.m0);

    let sweep = sweep_m(&[0.5, 0.1, 0.02, 0.004], &frac, &spec, &LinkingConfig::default(), sob.m0)?;
    println!("{:>8} {:>14} {:>10} {:>10} {:>10}  status", "m", "alpha", "|u|_Hs", "|u|_L2", "residual");
    for r in &sweep.records {
        println!(
            "{:>8} {:>14.10} {:>10.6} {:>10.6} {:>10.2e}  {:?}",
            r.m, r.alpha, r.hs_norm_t, r.l2_norm, r.residual, r.status
        );
    }
    println!("envelope [{:.6}, {:.6}] ok = {}", sweep.lambda_hat, sweep.delta_hat, sweep.envelope_ok);

    let limit = extract_limit(&sweep, &frac, &spec, 1e-8)?;
    println!("m = 0 limit: level {:.10}, residual {:.2e}, H^s norm {:.6}", limit.level, limit.residual, limit.hs_norm);
    println!("∫ f(u)u = {:.6} (in envelope: {})", limit.f_u_integral, limit.in_envelope);
    Ok(())
}
