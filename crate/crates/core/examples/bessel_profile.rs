//! Tabulates the extension profile θ and checks the three routes to κ_s.

use fractorus::bessel::{kappa, limit_points, ThetaProfile};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for s in [0.25, 0.5, 0.75] {
        let theta = ThetaProfile::new(s)?;
        let gamma_route = kappa(s)?;
        let integral = theta.energy_integral()?;
        let flux = theta.conormal_limit_check(&limit_points(0.2, 6))?;
        println!("s = {s}");
        println!("  kappa: gamma {gamma_route:.12}  integral {integral:.12}  flux limit {flux:.12}");
        println!("  {:>8} {:>14} {:>14} {:>10}", "y", "theta", "theta'", "residual");
        for y in [1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 30.0] {
            println!(
                "  {:>8} {:>14.6e} {:>14.6e} {:>10.1e}",
                y,
                theta.theta(y)?,
                theta.theta_prime(y)?,
                theta.ode_residual(y)?
            );
        }
    }
    Ok(())
}
