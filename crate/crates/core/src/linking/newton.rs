//! Damped Newton polish of `R(u) = 0` with a dense symmetric Jacobian in
//! grid-value coordinates.

use super::LinkingError;
use crate::energy::Functional;
use crate::nonlinearity::NonlinearitySpec;
use crate::spectral::{forward_transform, inverse_transform_unchecked, Field, FracParams, Spectrum};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

const MAX_NEWTON_STEPS: usize = 60;
const MAX_INCREASES: usize = 5;

#[derive(Debug, Clone)]
pub struct Refinement {
    pub solution: Spectrum,
    pub iterations: usize,
    /// Final `‖R(u)‖_{L²}`.
    pub residual: f64,
}

/// `‖R(u)‖` in the dual norm with weights `1/(ω²|k|²+m²)^s`.
pub fn residual_norm(u: &Spectrum, p: &FracParams, spec: &NonlinearitySpec) -> f64 {
    let fun = Functional::new(*p, spec.clone());
    fun.dual_norm(&fun.residual(u))
}

/// Newton iteration on `R(u) = 0` until `‖R‖_{L²} < tol`.
pub fn newton_refine(
    u0: &Spectrum,
    p: &FracParams,
    spec: &NonlinearitySpec,
    tol: f64,
) -> Result<Spectrum, LinkingError> {
    refine(&Functional::new(*p, spec.clone()), u0, tol).map(|r| r.solution)
}

fn field_values(s: &Spectrum) -> Vec<f64> {
    inverse_transform_unchecked(s).into_values()
}

/// Jacobian of `u ↦ R(u)` acting on grid values.
pub fn jacobian(fun: &Functional, u: &Spectrum) -> DMatrix<f64> {
    let grid = *fun.grid();
    let len = grid.len();
    let fprime = fun.spec().derivative_samples(u);
    let shifted = fun.shifted_symbol();
    let cols: Vec<Vec<f64>> = (0..len)
        .into_par_iter()
        .map(|j| {
            let mut e = vec![0.0; len];
            e[j] = 1.0;
            let ej = forward_transform(&Field::new(grid, e).expect("finite"));
            let jw = ej
                .mul_weights(shifted)
                .lincomb(1.0, &fun.spec().apply_derivative(&fprime, &ej), -1.0);
            field_values(&jw)
        })
        .collect();
    let mut m = DMatrix::<f64>::zeros(len, len);
    for (j, col) in cols.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            m[(i, j)] = *v;
        }
    }
    (&m + m.transpose()) * 0.5
}

/// As [`newton_refine`], with iteration details.
pub fn refine(fun: &Functional, u0: &Spectrum, tol: f64) -> Result<Refinement, LinkingError> {
    let grid = *fun.grid();
    let mut u = u0.clone();
    let mut r = fun.residual(&u);
    let mut rn = r.l2_norm();
    let mut increases = 0;
    let mut iterations = 0;
    while rn >= tol {
        if iterations == MAX_NEWTON_STEPS {
            return Err(LinkingError::DivergedRefinement { residual: rn });
        }
        iterations += 1;
        let eig = SymmetricEigen::new(jacobian(fun, &u));
        let cut = 1e-11 * eig.eigenvalues.amax();
        let rhs = DVector::from_vec(field_values(&r));
        let proj = eig.eigenvectors.transpose() * &rhs;
        let mut coef = DVector::<f64>::zeros(proj.len());
        for i in 0..proj.len() {
            let lam = eig.eigenvalues[i];
            if lam.abs() > cut {
                coef[i] = -proj[i] / lam;
            }
        }
        let step = &eig.eigenvectors * coef;
        let ds = forward_transform(&Field::new(grid, step.as_slice().to_vec()).expect("finite step"));

        let mut alpha = 1.0;
        let mut best: Option<(Spectrum, Spectrum, f64)> = None;
        for _ in 0..30 {
            let trial = u.lincomb(1.0, &ds, alpha);
            let tr = fun.residual(&trial);
            let tn = tr.l2_norm();
            let better = best.as_ref().is_none_or(|b| tn < b.2);
            if better {
                best = Some((trial, tr, tn));
            }
            if tn < rn {
                break;
            }
            alpha *= 0.5;
        }
        let (nu, nr, nn) = best.expect("at least one trial");
        if nn >= rn {
            increases += 1;
            if increases >= MAX_INCREASES {
                return Err(LinkingError::DivergedRefinement { residual: nn });
            }
        } else {
            increases = 0;
        }
        u = nu;
        r = nr;
        rn = nn;
    }
    Ok(Refinement {
        solution: u,
        iterations,
        residual: rn,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::NonlinearityKind;
    use crate::spectral::{random_spectrum, TorusGrid};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn jacobian_matches_directional_difference() {
        let g = TorusGrid::new(1, 2.0 * PI, 16).unwrap();
        let fp = FracParams::new(0.5, 1.0).unwrap();
        let spec = NonlinearitySpec::new(NonlinearityKind::PurePower, 3.0, &g, &fp).unwrap();
        let fun = Functional::new(fp, spec);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_spectrum(&g, 5, 1.0, &mut rng);
        let w = random_spectrum(&g, 5, 1.0, &mut rng);
        let j = jacobian(&fun, &u);
        let jw = &j * DVector::from_vec(field_values(&w));
        let h = 1e-6;
        let fd = fun
            .residual(&u.lincomb(1.0, &w, h))
            .lincomb(0.5 / h, &fun.residual(&u.lincomb(1.0, &w, -h)), -0.5 / h);
        let fdv = field_values(&fd);
        let err: f64 = fdv.iter().zip(jw.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-7, "{err}");
    }

    #[test]
    fn zero_start_returns_immediately() {
        let g = TorusGrid::new(1, 2.0 * PI, 16).unwrap();
        let fp = FracParams::new(0.5, 1.0).unwrap();
        let spec = NonlinearitySpec::new(NonlinearityKind::PurePower, 3.0, &g, &fp).unwrap();
        let out = refine(&Functional::new(fp, spec), &Spectrum::zeros(g), 1e-12).unwrap();
        assert_eq!(out.iterations, 0);
        assert_eq!(out.solution.norm_sq(), 0.0);
    }
}
