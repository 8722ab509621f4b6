//! Linking-type minimax search for critical points of the reduced functional.
//!
//! The trace space splits into constants `Y` and zero-mean spectra `Z`. The
//! linking set `A = {c·e₀ + r·z : |c| <= R', 0 <= r <= R}` is deformed by
//! X-metric descent with its boundary held fixed; the deformed maximizer
//! seeds a descent of the fiber maximum `Ψ(w) = max_{c,t} I(c + t·w)` over
//! unit `w ∈ Z`, and the resulting point is polished by Newton.

mod newton;
mod reduced;

pub use newton::{jacobian, newton_refine, refine, residual_norm, Refinement};

use crate::energy::Functional;
use crate::nonlinearity::NonlinearitySpec;
use crate::spectral::{
    forward_transform, project_zero_mean, random_spectrum, Field, FracParams, SpectralError,
    Spectrum, TorusGrid,
};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use reduced::{fiber_max, reduced_descent, FiberPoint};
use serde::{Deserialize, Serialize};
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinkingError {
    #[error("no positive ridge: sampled sphere minima are <= 0 at every probe radius")]
    NoPositiveRidge,
    #[error("functional is positive on the boundary of A (R = {r_cap}, R' = {r_prime}) at c = {c}, r = {r}")]
    BoundaryNotNegative { r_cap: f64, r_prime: f64, c: f64, r: f64 },
    #[error("Newton refinement diverged (residual {residual})")]
    DivergedRefinement { residual: f64 },
    #[error("invalid linking configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkingConfig {
    /// Cap `R` of the ray coordinate; calibrated by doubling when absent.
    #[serde(rename = "R")]
    pub r_cap: Option<f64>,
    /// Cap `R'` of the constant coefficient `c₀`; calibrated when absent.
    #[serde(rename = "R_prime")]
    pub r_prime: Option<f64>,
    /// `(n_c, n_r)` parameter points of the linking set.
    pub grid_a: (usize, usize),
    pub descent_step: f64,
    pub ps_tol: f64,
    pub max_iters: usize,
    pub seed: u64,
    /// Random starts used by the ridge estimate and the reduced descent.
    pub starts: usize,
}

impl Default for LinkingConfig {
    fn default() -> Self {
        Self {
            r_cap: None,
            r_prime: None,
            grid_a: (9, 9),
            descent_step: 1.0,
            ps_tol: 1e-8,
            max_iters: 400,
            seed: 0,
            starts: 6,
        }
    }
}

impl LinkingConfig {
    pub fn validate(&self) -> Result<(), LinkingError> {
        let bad = |m: &str| Err(LinkingError::InvalidConfig(m.into()));
        if self.grid_a.0 < 3 || self.grid_a.1 < 3 {
            return bad("grid_a needs at least 3 points per direction");
        }
        if !(self.descent_step > 0.0 && self.descent_step.is_finite()) {
            return bad("descent_step must be positive");
        }
        if !(self.ps_tol > 0.0) {
            return bad("ps_tol must be positive");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be positive");
        }
        for (name, v) in [("R", self.r_cap), ("R_prime", self.r_prime)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return bad(&format!("{name} must be positive"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverStatus {
    Converged,
    MaxIters,
    NoNontrivialSolution,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    /// Deformation sweep of the linking set.
    Deform,
    /// Descent of the fiber maximum.
    Reduce,
    /// Newton polish.
    Newton,
}

/// One row of the solver trace; `(c, r)` locates the maximizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub stage: Stage,
    pub sweep: usize,
    pub level: f64,
    pub grad_norm: f64,
    pub c: f64,
    pub r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ridge {
    pub eta: f64,
    pub rho: f64,
}

/// Parameterization and current images of the linking set.
#[derive(Debug, Clone)]
pub struct Surface {
    pub c_values: Vec<f64>,
    pub r_values: Vec<f64>,
    /// Images in row-major `(c, r)` order.
    pub images: Vec<Spectrum>,
    pub levels: Vec<f64>,
}

impl Surface {
    pub fn is_boundary(&self, idx: usize) -> bool {
        let nr = self.r_values.len();
        let (i, j) = (idx / nr, idx % nr);
        i == 0 || j == 0 || i + 1 == self.c_values.len() || j + 1 == nr
    }
}

#[derive(Debug, Clone)]
pub struct SolverState {
    pub iterate: Spectrum,
    pub level: f64,
    /// Dual norm of the gradient at `iterate`.
    pub grad_norm: f64,
    /// Deformation sweeps; levels are non-increasing.
    pub history: Vec<TraceRow>,
    /// Fiber-maximum descent and Newton rows.
    pub polish: Vec<TraceRow>,
    pub status: SolverStatus,
    pub ridge: Ridge,
    /// Largest sampled level on the undeformed linking set.
    pub delta_hat: f64,
    pub r_cap: f64,
    pub r_prime: f64,
    pub z: Spectrum,
    pub surface: Option<Surface>,
}

impl SolverState {
    /// All trace rows in execution order.
    pub fn trace(&self) -> impl Iterator<Item = &TraceRow> {
        self.history.iter().chain(&self.polish)
    }

    pub fn write_trace_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        for row in self.trace() {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn read_trace_csv<R: std::io::Read>(input: R) -> Result<Vec<TraceRow>, csv::Error> {
    csv::Reader::from_reader(input).deserialize().collect()
}

/// `u = y + z` with `y` the zero mode and `z` zero-mean.
pub fn decompose(u: &Spectrum) -> (Spectrum, Spectrum) {
    let mut y = Spectrum::zeros(*u.grid());
    let mut coeffs = y.coeffs().to_vec();
    coeffs[0] = u.coeffs()[0];
    y = Spectrum::new(*u.grid(), coeffs).expect("finite");
    (y, project_zero_mean(u))
}

/// Spectrum of `Π sin(ωx_i)` normalized to unit H^s norm.
pub fn pick_z_direction(grid: &TorusGrid, p: &FracParams) -> Spectrum {
    let w = grid.omega();
    let d = grid.dim();
    let f = Field::from_fn(*grid, |x| (0..d).map(|i| (w * x[i]).sin()).product()).expect("finite");
    let z = project_zero_mean(&forward_transform(&f));
    let norm = crate::spectral::hs_norm(&z, p);
    z.scaled(1.0 / norm)
}

/// Functional plus the geometry of the splitting.
#[derive(Debug, Clone)]
pub struct LinkingProblem {
    pub(crate) fun: Functional,
    bessel: Vec<f64>,
    pub(crate) e0: Spectrum,
    z: Spectrum,
}

impl LinkingProblem {
    pub fn new(p: FracParams, spec: NonlinearitySpec) -> Self {
        let grid = *spec.grid();
        let bessel = p.symbols(&grid).bessel;
        let mut e0 = vec![Complex64::new(0.0, 0.0); grid.len()];
        e0[0] = Complex64::new(1.0, 0.0);
        let z = pick_z_direction(&grid, &p);
        Self {
            fun: Functional::new(p, spec),
            bessel,
            e0: Spectrum::new(grid, e0).expect("finite"),
            z,
        }
    }

    pub fn functional(&self) -> &Functional {
        &self.fun
    }

    pub fn z(&self) -> &Spectrum {
        &self.z
    }

    pub fn grid(&self) -> &TorusGrid {
        self.fun.grid()
    }

    pub fn hs_dot(&self, a: &Spectrum, b: &Spectrum) -> f64 {
        a.coeffs()
            .iter()
            .zip(b.coeffs())
            .zip(&self.bessel)
            .map(|((x, y), w)| w * (x.re * y.re + x.im * y.im))
            .sum()
    }

    pub fn hs_norm(&self, a: &Spectrum) -> f64 {
        self.hs_dot(a, a).sqrt()
    }

    /// `c·e₀ + r·z`.
    pub fn linking_point(&self, c: f64, r: f64) -> Spectrum {
        self.e0.lincomb(c, &self.z, r)
    }

    /// Ray maximizer `t` of `I(t·w)` for homogeneous `f`, if finite.
    fn ray_radius(&self, w: &Spectrum) -> Option<f64> {
        let q = w.weighted_norm_sq(self.fun.shifted_symbol());
        let nw = self.fun.spec().energy_of_spectrum(w);
        (nw > 0.0).then(|| {
            let p = self.fun.spec().p();
            (q / ((p + 1.0) * nw)).powf(1.0 / (p - 1.0))
        })
    }

    /// Zero-mean starting directions: `z`, a periodic bump and seeded random spectra.
    pub fn start_directions(&self, count: usize, seed: u64) -> Vec<Spectrum> {
        let grid = *self.grid();
        let d = grid.dim();
        let w = grid.omega();
        let bump = Field::from_fn(grid, |x| {
            (0..d).map(|i| (4.0 * ((w * x[i]).cos() - 1.0)).exp()).product()
        })
        .expect("finite");
        let mut out = vec![self.z.clone(), project_zero_mean(&forward_transform(&bump))];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let band = (grid.n() / 4).max(2);
        for _ in 0..count {
            out.push(project_zero_mean(&random_spectrum(&grid, band, 2.0, &mut rng)));
        }
        out.into_iter()
            .filter_map(|v| {
                let n = self.hs_norm(&v);
                (n > 0.0).then(|| v.scaled(1.0 / n))
            })
            .collect()
    }
}

/// Minimizes `I` on the sphere `{v ∈ Z : ‖v‖ = η}` by projected Armijo descent.
fn sphere_min(prob: &LinkingProblem, start: &Spectrum, eta: f64, iters: usize) -> f64 {
    let fun = &prob.fun;
    let mut v = start.scaled(eta / prob.hs_norm(start));
    let (mut val, mut r) = fun.value_and_residual(&v);
    let mut tau = 1.0;
    for _ in 0..iters {
        let g = project_zero_mean(&fun.to_x_metric(&r));
        let gt = g.lincomb(1.0, &v, -prob.hs_dot(&g, &v) / (eta * eta));
        let gt2 = prob.hs_dot(&gt, &gt);
        if gt2 <= 1e-24 * (1.0 + val.abs()) {
            break;
        }
        let mut accepted = None;
        for _ in 0..40 {
            let trial = v.lincomb(1.0, &gt, -tau);
            let trial = trial.scaled(eta / prob.hs_norm(&trial));
            let (tv, tr) = fun.value_and_residual(&trial);
            if tv <= val - 1e-4 * tau * gt2 {
                accepted = Some((trial, tv, tr));
                break;
            }
            tau *= 0.5;
        }
        let Some((nv, tv, tr)) = accepted else { break };
        v = nv;
        val = tv;
        r = tr;
        tau *= 2.0;
    }
    val
}

/// Sphere minima of `I` over `Z` at each probe radius; returns the radius
/// with the largest minimum and that minimum.
pub fn ridge_estimate(
    prob: &LinkingProblem,
    probe_radii: &[f64],
    starts: &[Spectrum],
) -> Result<(Ridge, Vec<(f64, f64)>), LinkingError> {
    if probe_radii.is_empty() || probe_radii.iter().any(|r| !(*r > 0.0)) {
        return Err(LinkingError::InvalidConfig("probe radii must be positive".into()));
    }
    let mut table = Vec::with_capacity(probe_radii.len());
    let mut carried: Option<Spectrum> = None;
    for &eta in probe_radii {
        let mut candidates: Vec<Spectrum> = starts.to_vec();
        if let Some(c) = &carried {
            candidates.push(c.clone());
        }
        let results: Vec<f64> = candidates
            .par_iter()
            .map(|s| sphere_min(prob, s, eta, 300))
            .collect();
        let (best_idx, min) = results
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
        carried = Some(candidates[best_idx].clone());
        table.push((eta, min));
    }
    let (eta, rho) = table
        .iter()
        .copied()
        .fold((0.0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    if rho <= 0.0 {
        return Err(LinkingError::NoPositiveRidge);
    }
    Ok((Ridge { eta, rho }, table))
}

/// Default probe radii: twelve fractions of the ray maximizer along `z`.
pub fn default_probe_radii(prob: &LinkingProblem) -> Vec<f64> {
    let top = prob.ray_radius(&prob.z).unwrap_or(3.0);
    (1..=12).map(|j| top * j as f64 / 12.0).collect()
}

const BOUNDARY_SAMPLES: usize = 64;

/// First boundary point of `A` with `I > 0`, as `(c, r, on_ray_cap)`.
fn boundary_violation(prob: &LinkingProblem, r_cap: f64, r_prime: f64) -> Option<(f64, f64, bool)> {
    let k = BOUNDARY_SAMPLES;
    for i in 0..=k {
        let c = -r_prime + 2.0 * r_prime * i as f64 / k as f64;
        for (cc, rr, cap) in [(c, 0.0, false), (c, r_cap, true)] {
            if prob.fun.value(&prob.linking_point(cc, rr)) > 0.0 {
                return Some((cc, rr, cap));
            }
        }
        let r = r_cap * i as f64 / k as f64;
        for cc in [-r_prime, r_prime] {
            if prob.fun.value(&prob.linking_point(cc, r)) > 0.0 {
                return Some((cc, r, false));
            }
        }
    }
    None
}

fn calibrate(prob: &LinkingProblem, cfg: &LinkingConfig, eta: f64) -> Result<(f64, f64), LinkingError> {
    let mut r_cap = cfg.r_cap.unwrap_or(2.0 * eta);
    if r_cap <= eta {
        return Err(LinkingError::InvalidConfig(format!(
            "R = {r_cap} must exceed the ridge radius {eta}"
        )));
    }
    let mut r_prime = cfg.r_prime.unwrap_or(1.0);
    for _ in 0..40 {
        match boundary_violation(prob, r_cap, r_prime) {
            None => return Ok((r_cap, r_prime)),
            Some((c, r, on_cap)) => {
                let fixed = if on_cap { cfg.r_cap.is_some() } else { cfg.r_prime.is_some() };
                if fixed {
                    return Err(LinkingError::BoundaryNotNegative { r_cap, r_prime, c, r });
                }
                if on_cap {
                    r_cap *= 2.0;
                } else {
                    r_prime *= 2.0;
                }
            }
        }
    }
    let (c, r, _) = boundary_violation(prob, r_cap, r_prime).unwrap_or((0.0, 0.0, false));
    Err(LinkingError::BoundaryNotNegative { r_cap, r_prime, c, r })
}

fn argmax(levels: &[f64]) -> usize {
    let mut best = 0;
    for (i, &l) in levels.iter().enumerate() {
        if l > levels[best] + 1e-12 * levels[best].abs().max(1e-300) {
            best = i;
        }
    }
    best
}

/// One Armijo step of X-metric descent, kept inside the ball of radius `clip`
/// and above the level `floor`.
fn descend(
    prob: &LinkingProblem,
    u: &Spectrum,
    level: f64,
    tau0: f64,
    clip: f64,
    floor: f64,
) -> (Spectrum, f64, f64) {
    if level <= floor {
        return (u.clone(), level, tau0);
    }
    let (_, r) = prob.fun.value_and_residual(u);
    let g = prob.fun.to_x_metric(&r);
    let slope = r.dot(&g);
    if slope <= 0.0 {
        return (u.clone(), level, tau0);
    }
    let mut tau = tau0;
    for _ in 0..60 {
        let mut trial = u.lincomb(1.0, &g, -tau);
        let norm = prob.hs_norm(&trial);
        if norm > clip {
            trial = trial.scaled(clip / norm);
        }
        let tv = prob.fun.value(&trial);
        if tv >= floor && tv <= level - 1e-4 * tau * slope {
            return (trial, tv, tau);
        }
        tau *= 0.5;
    }
    (u.clone(), level, tau)
}

/// Runs the full search from scratch.
pub fn minimax_search(p: &FracParams, spec: &NonlinearitySpec, cfg: &LinkingConfig) -> Result<SolverState, LinkingError> {
    minimax_search_with(&LinkingProblem::new(*p, spec.clone()), cfg, None)
}

/// As [`minimax_search`]; a warm start restricts the fiber descent to the
/// warm direction so that a solution branch is followed.
pub fn minimax_search_with(
    prob: &LinkingProblem,
    cfg: &LinkingConfig,
    warm: Option<&Spectrum>,
) -> Result<SolverState, LinkingError> {
    cfg.validate()?;
    let fun = &prob.fun;
    let starts = prob.start_directions(cfg.starts, cfg.seed);
    let (ridge, _) = ridge_estimate(prob, &default_probe_radii(prob), &starts)?;

    if prob.ray_radius(&prob.z).is_none() {
        return Ok(collapse(prob, cfg, ridge));
    }
    let (r_cap, r_prime) = calibrate(prob, cfg, ridge.eta)?;
    let clip = 10.0 * r_cap.max(r_prime * prob.hs_norm(&prob.e0).max(1.0));

    // Deformation of the linking set.
    let (nc, nr) = cfg.grid_a;
    let c_values: Vec<f64> = (0..nc).map(|i| -r_prime + 2.0 * r_prime * i as f64 / (nc - 1) as f64).collect();
    let r_values: Vec<f64> = (0..nr).map(|j| r_cap * j as f64 / (nr - 1) as f64).collect();
    let mut images = Vec::with_capacity(nc * nr);
    for &c in &c_values {
        for &r in &r_values {
            images.push(prob.linking_point(c, r));
        }
    }
    let mut levels: Vec<f64> = images.par_iter().map(|u| fun.value(u)).collect();
    let mut steps = vec![cfg.descent_step; images.len()];
    let mut surface = Surface {
        c_values,
        r_values,
        images: Vec::new(),
        levels: Vec::new(),
    };
    let param = |idx: usize| (surface.c_values[idx / nr], surface.r_values[idx % nr]);
    let row = |sweep: usize, idx: usize, levels: &[f64], images: &[Spectrum]| {
        let (c, r) = param(idx);
        TraceRow {
            stage: Stage::Deform,
            sweep,
            level: levels[idx],
            grad_norm: fun.dual_norm(&fun.residual(&images[idx])),
            c,
            r,
        }
    };
    let mut best = argmax(&levels);
    let mut delta_hat = levels[best];
    if let Some(f) = fiber_max(prob, &prob.z, None, clip) {
        if f.c.abs() <= r_prime && f.t <= r_cap {
            delta_hat = delta_hat.max(f.value);
        }
    }
    let mut history = vec![row(0, best, &levels, &images)];
    let tol = 1e-10 * ridge.rho.abs().max(1.0);
    for sweep in 1..=cfg.max_iters {
        if history.last().expect("nonempty").grad_norm < cfg.ps_tol {
            break;
        }
        let moved: Vec<(Spectrum, f64, f64)> = (0..images.len())
            .into_par_iter()
            .map(|idx| {
                let interior = {
                    let (i, j) = (idx / nr, idx % nr);
                    i > 0 && j > 0 && i + 1 < nc && j + 1 < nr
                };
                if interior {
                    let tau0 = (2.0 * steps[idx]).min(cfg.descent_step);
                    descend(prob, &images[idx], levels[idx], tau0, clip, ridge.rho)
                } else {
                    (images[idx].clone(), levels[idx], steps[idx])
                }
            })
            .collect();
        let prev = levels[best];
        for (idx, (img, lvl, tau)) in moved.into_iter().enumerate() {
            images[idx] = img;
            levels[idx] = lvl;
            steps[idx] = tau;
        }
        best = argmax(&levels);
        history.push(row(sweep, best, &levels, &images));
        if prev - levels[best] <= 1e-10 * prev.abs().max(1.0) {
            break;
        }
    }
    let deformed_best = images[best].clone();
    surface.images = images;
    surface.levels = levels;

    // Fiber-maximum descent from several directions.
    let switch_tol = (1e3 * cfg.ps_tol).min(1e-5);
    let mut dirs: Vec<Spectrum> = Vec::new();
    match warm {
        Some(w) => dirs.push(project_zero_mean(w)),
        None => {
            dirs.push(project_zero_mean(&deformed_best));
            dirs.extend(starts.iter().cloned());
        }
    }
    let dirs: Vec<Spectrum> = dirs.into_iter().filter(|d| prob.hs_norm(d) > 0.0).collect();
    let runs: Vec<Option<reduced::ReducedRun>> = dirs
        .par_iter()
        .map(|d| reduced_descent(prob, d, clip, switch_tol, cfg.max_iters.max(50) * 5))
        .collect();
    let mut chosen: Option<reduced::ReducedRun> = None;
    for run in runs.into_iter().flatten() {
        let better = chosen
            .as_ref()
            .is_none_or(|c| run.fiber.value < c.fiber.value - 1e-12 * c.fiber.value.abs());
        if better {
            chosen = Some(run);
        }
    }
    let Some(run) = chosen else {
        let mut st = collapse(prob, cfg, ridge);
        st.history = history;
        st.delta_hat = delta_hat;
        st.r_cap = r_cap;
        st.r_prime = r_prime;
        st.surface = Some(surface);
        return Ok(st);
    };
    let mut polish: Vec<TraceRow> = run
        .trace
        .iter()
        .enumerate()
        .map(|(i, s)| TraceRow {
            stage: Stage::Reduce,
            sweep: i,
            level: s.level,
            grad_norm: s.grad_norm,
            c: s.c,
            r: s.t,
        })
        .collect();
    let FiberPoint { c, t, u, .. } = run.fiber;

    // Newton polish.
    let newton_tol = 1e-3 * cfg.ps_tol;
    let (iterate, newton_ok) = match refine(fun, &u, newton_tol) {
        Ok(r) => (r.solution, true),
        Err(_) => (u, false),
    };
    let (_, zpart) = decompose(&iterate);
    let iterate = if iterate.dot(&prob.z) < 0.0 { iterate.scaled(-1.0) } else { iterate };
    let report = fun.evaluate(&iterate);
    polish.push(TraceRow {
        stage: Stage::Newton,
        sweep: 0,
        level: report.value,
        grad_norm: report.grad_norm,
        c,
        r: t,
    });
    let nontrivial = prob.hs_norm(&zpart) > 1e-8;
    let status = if !nontrivial {
        SolverStatus::NoNontrivialSolution
    } else if newton_ok && report.grad_norm < cfg.ps_tol && report.value >= ridge.rho - tol {
        SolverStatus::Converged
    } else {
        SolverStatus::MaxIters
    };
    Ok(SolverState {
        iterate,
        level: report.value,
        grad_norm: report.grad_norm,
        history,
        polish,
        status,
        ridge,
        delta_hat,
        r_cap,
        r_prime,
        z: prob.z.clone(),
        surface: Some(surface),
    })
}

/// X-metric descent from the ridge point when no fiber has a finite
/// maximum: the flow contracts to the constants and no critical point off
/// `Y` exists.
fn collapse(prob: &LinkingProblem, cfg: &LinkingConfig, ridge: Ridge) -> SolverState {
    let fun = &prob.fun;
    let mut u = prob.z.scaled(ridge.eta);
    let mut level = fun.value(&u);
    let mut history = Vec::new();
    let mut tau = cfg.descent_step;
    for sweep in 0..=cfg.max_iters {
        let gn = fun.dual_norm(&fun.residual(&u));
        history.push(TraceRow {
            stage: Stage::Deform,
            sweep,
            level,
            grad_norm: gn,
            c: u.mean_coeff(),
            r: prob.hs_norm(&project_zero_mean(&u)),
        });
        if prob.hs_norm(&u) < 1e-8 {
            break;
        }
        let (nu, nl, nt) = descend(
            prob,
            &u,
            level,
            (2.0 * tau).min(cfg.descent_step),
            f64::INFINITY,
            f64::NEG_INFINITY,
        );
        if nl >= level {
            break;
        }
        u = nu;
        level = nl;
        tau = nt;
    }
    let report = fun.evaluate(&u);
    SolverState {
        iterate: u,
        level: report.value,
        grad_norm: report.grad_norm,
        history,
        polish: Vec::new(),
        status: SolverStatus::NoNontrivialSolution,
        ridge,
        delta_hat: f64::INFINITY,
        r_cap: f64::INFINITY,
        r_prime: f64::INFINITY,
        z: prob.z.clone(),
        surface: None,
    }
}
