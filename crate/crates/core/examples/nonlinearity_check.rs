//! Sampled hypothesis report for a modulated cubic and a rejected
//! sign-changing coefficient.

use fractorus::nonlinearity::{
    default_t_samples, evaluate_hypotheses, verify_hypotheses, NonlinearityKind, NonlinearitySpec,
};
use fractorus::spectral::{Field, FracParams, TorusGrid};
use std::f64::consts::PI;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = TorusGrid::new(1, 2.0 * PI, 32)?;
    let frac = FracParams::new(0.5, 1.0)?;
    let xs: Vec<usize> = (0..grid.len()).collect();

    let a = Field::from_fn(grid, |x| 1.0 + 0.3 * x[0].cos())?;
    let spec = NonlinearitySpec::new(NonlinearityKind::ModulatedPower { a }, 3.0, &grid, &frac)?;
    let report = evaluate_hypotheses(&spec, &default_t_samples(spec.r0()), &xs);
    for c in &report.checks {
        println!("{:<16} {:<5} {}", c.name, c.passed, c.detail);
    }
    println!("growth constant  {:.6}", report.growth_constant);
    for (eps, c) in &report.eps_constants {
        println!("C_eps({eps})       {c:.6}");
    }
    println!("(a3, a4)         ({:.6}, {:.6})", report.lower_bound.0, report.lower_bound.1);
    println!("AR defect        {:.2e}", report.ar_defect);

    let bad = Field::from_fn(grid, |x| x[0].cos())?;
    let spec = NonlinearitySpec::new(NonlinearityKind::ModulatedPower { a: bad }, 3.0, &grid, &frac)?;
    match verify_hypotheses(&spec, &default_t_samples(1.0), &xs) {
        Ok(_) => println!("sign-changing coefficient unexpectedly accepted"),
        Err(e) => println!("sign-changing coefficient: {e}"),
    }
    Ok(())
}
