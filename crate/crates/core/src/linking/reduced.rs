//! Fiber maximization over `{c + t·w : c ∈ ℝ, t > 0}` and steepest descent
//! of the fiber maximum over unit directions `w` in the zero-mean space.

use super::LinkingProblem;
use crate::spectral::{project_zero_mean, Spectrum};

#[derive(Debug, Clone)]
pub(crate) struct FiberPoint {
    pub c: f64,
    pub t: f64,
    pub value: f64,
    pub u: Spectrum,
    pub residual: Spectrum,
}

/// Maximizes `I(c·e₀ + t·w)` over `c ∈ ℝ, t > 0`. `None` when the fiber is
/// unbounded above within `|c|, t <= clip`.
pub(crate) fn fiber_max(
    prob: &LinkingProblem,
    w: &Spectrum,
    warm: Option<(f64, f64)>,
    clip: f64,
) -> Option<FiberPoint> {
    let fun = &prob.fun;
    let spec = fun.spec();
    let q = w.weighted_norm_sq(fun.shifted_symbol());
    let nw = spec.energy_of_spectrum(w);
    if nw <= 0.0 || !nw.is_finite() {
        return None;
    }
    let p = spec.p();
    let t_ray = (q / ((p + 1.0) * nw)).powf(1.0 / (p - 1.0));
    if t_ray > clip {
        return None;
    }
    let (mut c, mut t) = warm.unwrap_or((0.0, t_ray));
    if !(t > 0.0) {
        t = t_ray;
    }
    let point = |c: f64, t: f64| prob.e0.lincomb(c, w, t);
    let mut u = point(c, t);
    let (mut value, mut residual) = fun.value_and_residual(&u);
    for _ in 0..80 {
        let gc = residual.coeffs()[0].re;
        let gt = residual.dot(w);
        let fprime = spec.derivative_samples(&u);
        let je0 = spec.apply_derivative(&fprime, &prob.e0);
        let jw = spec.apply_derivative(&fprime, w);
        let hcc = -je0.coeffs()[0].re;
        let hct = -jw.coeffs()[0].re;
        let htt = q - jw.dot(w);
        let det = hcc * htt - hct * hct;
        let (dc, dt) = if hcc < 0.0 && det > 0.0 {
            ((-htt * gc + hct * gt) / det, (hct * gc - hcc * gt) / det)
        } else {
            let scale = hcc.abs().max(htt.abs()).max(1e-12);
            (gc / scale, gt / scale)
        };
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..50 {
            let (nc, nt) = (c + alpha * dc, t + alpha * dt);
            if nt > 0.0 {
                let nu = point(nc, nt);
                let (nv, nr) = fun.value_and_residual(&nu);
                if nv >= value - 1e-14 * value.abs() {
                    accepted = Some((nc, nt, nu, nv, nr));
                    break;
                }
            }
            alpha *= 0.5;
        }
        let Some((nc, nt, nu, nv, nr)) = accepted else { break };
        let moved = (nc - c).abs() + (nt - t).abs();
        c = nc;
        t = nt;
        u = nu;
        value = nv;
        residual = nr;
        if t > clip || c.abs() > clip {
            return None;
        }
        if moved <= 1e-14 * (1.0 + c.abs() + t) {
            break;
        }
    }
    Some(FiberPoint {
        c,
        t,
        value,
        u,
        residual,
    })
}

#[derive(Debug, Clone)]
pub(crate) struct ReducedStep {
    pub level: f64,
    pub grad_norm: f64,
    pub c: f64,
    pub t: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct ReducedRun {
    pub fiber: FiberPoint,
    pub trace: Vec<ReducedStep>,
}

/// Armijo descent of `Ψ(w) = max_{c,t} I(c + t·w)` on the unit sphere of the
/// zero-mean space. `None` when a fiber is unbounded.
pub(crate) fn reduced_descent(
    prob: &LinkingProblem,
    w0: &Spectrum,
    clip: f64,
    switch_tol: f64,
    max_iters: usize,
) -> Option<ReducedRun> {
    let fun = &prob.fun;
    let norm0 = prob.hs_norm(&project_zero_mean(w0));
    if norm0 == 0.0 {
        return None;
    }
    let mut w = project_zero_mean(w0).scaled(1.0 / norm0);
    let mut fiber = fiber_max(prob, &w, None, clip)?;
    let mut trace = Vec::new();
    let mut tau = 1.0 / (fiber.t * fiber.t);
    for _ in 0..max_iters {
        let gn = fun.dual_norm(&fiber.residual);
        trace.push(ReducedStep {
            level: fiber.value,
            grad_norm: gn,
            c: fiber.c,
            t: fiber.t,
        });
        if gn < switch_tol {
            break;
        }
        let g = project_zero_mean(&fun.to_x_metric(&fiber.residual));
        let gt = g.lincomb(1.0, &w, -prob.hs_dot(&g, &w));
        let gt2 = prob.hs_dot(&gt, &gt);
        if gt2 == 0.0 {
            break;
        }
        let mut accepted = None;
        for _ in 0..60 {
            let trial = w.lincomb(1.0, &gt, -tau * fiber.t);
            let trial = trial.scaled(1.0 / prob.hs_norm(&trial));
            if let Some(f) = fiber_max(prob, &trial, Some((fiber.c, fiber.t)), clip) {
                if f.value <= fiber.value - 1e-4 * tau * fiber.t * fiber.t * gt2 {
                    accepted = Some((trial, f));
                    break;
                }
            }
            tau *= 0.5;
        }
        let Some((nw, nf)) = accepted else { break };
        w = nw;
        fiber = nf;
        tau *= 2.0;
    }
    if trace.last().is_none_or(|s| s.level != fiber.value) {
        trace.push(ReducedStep {
            level: fiber.value,
            grad_norm: fun.dual_norm(&fiber.residual),
            c: fiber.c,
            t: fiber.t,
        });
    }
    Some(ReducedRun { fiber, trace })
}
