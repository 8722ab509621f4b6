use super::{Field, FracParams, SpectralError, Spectrum};
use num_complex::Complex64;

/// Multiplies mode `k` by `(ω²|k|²+m²)^s`.
pub fn apply_bessel_operator(u: &Spectrum, p: &FracParams) -> Spectrum {
    u.mul_weights(&p.symbols(&u.grid).bessel)
}

/// Multiplies mode `k` by `(ω²|k|²+m²)^s - m^{2s}`; the zero mode is annihilated.
pub fn apply_shifted_operator(u: &Spectrum, p: &FracParams) -> Spectrum {
    u.mul_weights(&p.symbols(&u.grid).shifted)
}

/// Inverts the Bessel (or shifted) multiplier. When the zero-mode symbol
/// vanishes the data must have zero mean and the solution is returned with
/// zero mean.
pub fn solve_linear(g: &Spectrum, p: &FracParams, shifted: bool) -> Result<Spectrum, SpectralError> {
    let sym = p.symbols(&g.grid);
    let table = if shifted { &sym.shifted } else { &sym.bessel };
    let mut out = g.coeffs.clone();
    let norm = g.l2_norm();
    for (k, c) in out.iter_mut().enumerate() {
        if table[k] == 0.0 {
            if c.norm() > 1e-10 * norm {
                return Err(SpectralError::SingularMode { mean: c.re });
            }
            *c = Complex64::new(0.0, 0.0);
        } else {
            *c /= table[k];
        }
    }
    Ok(Spectrum {
        grid: g.grid,
        coeffs: out,
    })
}

/// `sqrt(Σ (ω²|k|²+m²)^s |c_k|²)`.
pub fn hs_norm(u: &Spectrum, p: &FracParams) -> f64 {
    u.weighted_norm_sq(&p.symbols(&u.grid).bessel).sqrt()
}

/// Periodic trapezoid `L^q` norm; `q = ∞` gives the max norm.
pub fn lq_norm(f: &Field, q: f64) -> Result<f64, SpectralError> {
    if q.is_nan() || q < 1.0 {
        return Err(SpectralError::BadExponent(q));
    }
    if q.is_infinite() {
        return Ok(f.values.iter().fold(0.0, |a: f64, v| a.max(v.abs())));
    }
    let sum: f64 = f.values.iter().map(|v| v.abs().powf(q)).sum();
    Ok((sum * f.grid.cell_volume()).powf(1.0 / q))
}

/// Drops the zero mode.
pub fn project_zero_mean(u: &Spectrum) -> Spectrum {
    let mut out = u.clone();
    out.coeffs[0] = Complex64::new(0.0, 0.0);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{forward_transform, inverse_transform, TorusGrid};
    use approx::assert_relative_eq;
    use std::f64::consts::{PI, SQRT_2};

    fn cos_spec(n: usize) -> Spectrum {
        let g = TorusGrid::new(1, 2.0 * PI, n).unwrap();
        forward_transform(&Field::from_fn(g, |x| x[0].cos()).unwrap())
    }

    #[test]
    fn bessel_operator_on_cosine() {
        let u = cos_spec(16);
        let out = apply_bessel_operator(&u, &FracParams::new(0.5, 0.0).unwrap());
        assert!((out.dot(&u) / u.norm_sq() - 1.0).abs() < 1e-14);
        let out = apply_bessel_operator(&u, &FracParams::new(0.5, 1.0).unwrap());
        assert_relative_eq!(out.coeffs[1].re, SQRT_2 * u.coeffs[1].re, max_relative = 1e-14);
    }

    #[test]
    fn constant_mode_scales_by_mass_symbol() {
        let g = TorusGrid::new(1, 2.0 * PI, 8).unwrap();
        let c = forward_transform(&Field::new(g, vec![3.0; 8]).unwrap());
        let p = FracParams::new(0.3, 2.0).unwrap();
        let out = apply_bessel_operator(&c, &p);
        assert_relative_eq!(out.coeffs[0].re, 2f64.powf(0.6) * c.coeffs[0].re, max_relative = 1e-14);
        assert_eq!(apply_shifted_operator(&c, &p).norm_sq(), 0.0);
    }

    #[test]
    fn shifted_operator_on_cosine() {
        let u = cos_spec(16);
        let out = apply_shifted_operator(&u, &FracParams::new(0.5, 1.0).unwrap());
        let f = inverse_transform(&out).unwrap();
        for (j, v) in f.values.iter().enumerate() {
            let x = 2.0 * PI * j as f64 / 16.0;
            assert!((v - (SQRT_2 - 1.0) * x.cos()).abs() < 1e-13);
        }
    }

    #[test]
    fn solve_linear_cases() {
        let u = cos_spec(16);
        let p0 = FracParams::new(0.5, 0.0).unwrap();
        let sol = solve_linear(&u, &p0, false).unwrap();
        assert!(sol.lincomb(1.0, &u, -1.0).l2_norm() < 1e-14);
        let p1 = FracParams::new(0.5, 1.0).unwrap();
        let sol = solve_linear(&u, &p1, false).unwrap();
        assert_relative_eq!(sol.coeffs[1].re, u.coeffs[1].re / SQRT_2, max_relative = 1e-14);
        let g = TorusGrid::new(1, 2.0 * PI, 8).unwrap();
        let c = forward_transform(&Field::new(g, vec![1.0; 8]).unwrap());
        assert!(matches!(
            solve_linear(&c, &p0, false),
            Err(SpectralError::SingularMode { .. })
        ));
        assert!(solve_linear(&c, &p1, true).is_err());
        assert!(solve_linear(&c, &p1, false).is_ok());
    }

    #[test]
    fn norms_of_cosine() {
        let u = cos_spec(32);
        for s in [0.2, 0.5, 0.9] {
            let p = FracParams::new(s, 0.0).unwrap();
            assert_relative_eq!(hs_norm(&u, &p).powi(2), PI, max_relative = 1e-13);
        }
        let f = inverse_transform(&u).unwrap();
        assert_relative_eq!(lq_norm(&f, 2.0).unwrap(), PI.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(lq_norm(&f, 4.0).unwrap(), (0.75 * PI).powf(0.25), max_relative = 1e-13);
        let one = Field::new(*f.grid(), vec![1.0; 32]).unwrap();
        assert_relative_eq!(lq_norm(&one, 2.0).unwrap(), (2.0 * PI).sqrt(), max_relative = 1e-14);
        assert!(matches!(lq_norm(&f, 0.5), Err(SpectralError::BadExponent(_))));
    }

    #[test]
    fn hs_norm_of_constant() {
        let g = TorusGrid::new(1, 2.0 * PI, 8).unwrap();
        let c = forward_transform(&Field::new(g, vec![2.0; 8]).unwrap());
        let p = FracParams::new(0.4, 1.5).unwrap();
        assert_relative_eq!(
            hs_norm(&c, &p).powi(2),
            1.5f64.powf(0.8) * 4.0 * 2.0 * PI,
            max_relative = 1e-13
        );
    }

    #[test]
    fn zero_mean_projection() {
        let g = TorusGrid::new(1, 2.0 * PI, 8).unwrap();
        let u = forward_transform(&Field::from_fn(g, |x| 3.0 + x[0].cos()).unwrap());
        let z = project_zero_mean(&u);
        let f = inverse_transform(&z).unwrap();
        for (j, v) in f.values.iter().enumerate() {
            assert!((v - (2.0 * PI * j as f64 / 8.0).cos()).abs() < 1e-13);
        }
        assert_eq!(project_zero_mean(&z), z);
    }
}
