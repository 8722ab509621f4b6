//! Property suite behind `solver verify`.

use super::RunConfig;
use crate::bessel::{kappa, limit_points, ThetaProfile};
use crate::energy::{coercivity_constant, quadratic_gap, Functional, Metric};
use crate::extension::{conormal_derivative, extend, ground_gap, sharp_trace_gap, ModalCylinder, ProfileKind};
use crate::extension::DEFAULT_CYLINDER_NODES;
use crate::nonlinearity::{default_t_samples, evaluate_hypotheses, NonlinearityKind, NonlinearitySpec};
use crate::spectral::{
    apply_bessel_operator, apply_shifted_operator, forward_transform, inverse_transform, pad_spectrum,
    project_zero_mean, random_spectrum, solve_linear, truncate_spectrum, Field, FracParams, Spectrum,
    TorusGrid,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyResult {
    pub module: String,
    pub name: String,
    pub passed: bool,
    /// Observed defect (or statistic) compared against `tolerance`.
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub properties: Vec<PropertyResult>,
    pub all_passed: bool,
}

struct Collector(Vec<PropertyResult>);

impl Collector {
    /// Records `value <= tolerance`.
    fn below(&mut self, module: &str, name: &str, value: f64, tolerance: f64, detail: impl Into<String>) {
        self.0.push(PropertyResult {
            module: module.into(),
            name: name.into(),
            passed: value <= tolerance,
            value,
            tolerance,
            detail: detail.into(),
        });
    }

    fn flag(&mut self, module: &str, name: &str, ok: bool, detail: impl Into<String>) {
        self.below(module, name, if ok { 0.0 } else { 1.0 }, 0.0, detail);
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Directional derivative of `I` along `w` by central differences.
fn fd_directional(fun: &Functional, u: &Spectrum, w: &Spectrum, eps: f64) -> f64 {
    (fun.value(&u.lincomb(1.0, w, eps)) - fun.value(&u.lincomb(1.0, w, -eps))) / (2.0 * eps)
}

pub fn run_verify(cfg: &RunConfig) -> VerifyReport {
    let grid = cfg.grid;
    let frac = cfg.frac;
    let spec = &cfg.spec;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Collector(Vec::new());
    let band = (grid.n() / 4).max(1);

    // spectral_core
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let k: [i64; 3] = std::array::from_fn(|i| {
            if i < grid.dim() {
                rng.gen_range(-(band as i64)..=band as i64)
            } else {
                0
            }
        });
        for m in [0.0, frac.m()] {
            let p = frac.with_mass(m).expect("valid mass");
            let u = Spectrum::trig_mode(grid, k, 1.0, false).expect("mode in band");
            let out = apply_bessel_operator(&u, &p);
            let j = grid.index_of(k).expect("mode in band");
            let expect = p.bessel_symbol(grid.omega(), grid.k_squared(j));
            if expect > 0.0 {
                worst = worst.max(rel(out.coeffs()[j].re / u.coeffs()[j].re, expect));
            }
        }
    }
    out.below("spectral_core", "multiplier_exactness", worst, 1e-12, "20 random modes, m ∈ {0, m}");

    let f = Field::new(grid, (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).expect("finite");
    let fs = forward_transform(&f);
    let l2: f64 = f.values().iter().map(|v| v * v).sum::<f64>() * grid.cell_volume();
    out.below("spectral_core", "parseval", rel(fs.norm_sq(), l2), 1e-12, "Σ|c|² against the trapezoid L² norm");
    let back = inverse_transform(&fs).expect("hermitian");
    out.below("spectral_core", "transform_roundtrip", max_abs_diff(back.values(), f.values()), 1e-12, "");
    out.below("spectral_core", "hermitian_forward", fs.hermitian_defect(), 1e-13, "forward transform of a real field");
    let u = project_zero_mean(&random_spectrum(&grid, band, 1.0, &mut rng));
    let solved = solve_linear(&apply_shifted_operator(&u, &frac), &frac, true);
    let defect = solved.map(|s| s.lincomb(1.0, &u, -1.0).l2_norm() / u.l2_norm()).unwrap_or(f64::INFINITY);
    out.below("spectral_core", "solve_linear_inverse", defect, 1e-12, "shifted operator on zero-mean data");
    let fine = pad_spectrum(&u, 2 * grid.n());
    let v = random_spectrum(fine.grid(), grid.n(), 1.0, &mut rng);
    let lhs = fine.dot(&v);
    let rhs = u.dot(&truncate_spectrum(&v, &grid));
    out.below("spectral_core", "pad_truncate_adjoint", (lhs - rhs).abs() / lhs.abs().max(1e-300), 1e-12, "");

    let line = TorusGrid::new(1, 2.0 * std::f64::consts::PI, 16).expect("valid grid");
    let half = FracParams::new(0.5, 1.0).expect("valid params");
    let cubic = NonlinearitySpec::new(NonlinearityKind::PurePower, 3.0, &line, &half).expect("p = 3 admissible");
    let c = forward_transform(&Field::from_fn(line, |x| x[0].cos()).expect("finite"));
    let g = inverse_transform(&cubic.nonlinear_gradient(&c).expect("same grid")).expect("hermitian");
    let expect = Field::from_fn(line, |x| (3.0 * x[0].cos() + (3.0 * x[0]).cos()) / 4.0).expect("finite");
    out.below("spectral_core", "dealiased_cube", max_abs_diff(g.values(), expect.values()), 1e-12, "cos³ on 16 points");

    // bessel_theta
    let s = frac.s();
    match ThetaProfile::new(s) {
        Ok(theta) => {
            let k = kappa(s).unwrap_or(f64::NAN);
            let integral = theta.energy_integral().unwrap_or(f64::NAN);
            let limit = theta.conormal_limit_check(&limit_points(0.2, 6)).unwrap_or(f64::NAN);
            let spread = rel(integral, k).max(rel(limit, k)).max(rel(integral, limit));
            out.below("bessel_theta", "kappa_triple_agreement", spread, 1e-5, format!("κ = {k}"));
            let mut worst: f64 = 0.0;
            let mut monotone = true;
            let mut prev = f64::INFINITY;
            for i in 0..100 {
                let y = 1e-3 * (3e4f64).powf(i as f64 / 99.0);
                let th = theta.theta(y).unwrap_or(f64::NAN);
                let r = theta.ode_residual(y).unwrap_or(f64::NAN);
                worst = worst.max(r.abs() / th.max(1.0));
                monotone &= th > 0.0 && th < prev;
                prev = th;
            }
            out.below("bessel_theta", "ode_residual", worst, 1e-8, "100 log points in [1e-3, 30]");
            out.flag("bessel_theta", "positive_decreasing", monotone, "θ > 0 and decreasing on the same points");
        }
        Err(e) => out.flag("bessel_theta", "profile_construction", false, e.to_string()),
    }
    let half_theta = ThetaProfile::new(0.5).expect("s = 1/2 is valid");
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let y = 1e-3 * (3e4f64).powf(i as f64 / 199.0);
        worst = worst.max((half_theta.theta(y).unwrap_or(f64::NAN) - (-y).exp()).abs());
    }
    out.below("bessel_theta", "half_order_closed_form", worst, 1e-10, "θ(y) = e^{-y} at s = 1/2");
    out.below("bessel_theta", "kappa_half", (kappa(0.5).unwrap_or(f64::NAN) - 1.0).abs(), 1e-12, "");

    // extension
    let massive = if frac.m() > 0.0 { frac } else { frac.with_mass(1.0).expect("valid mass") };
    let base = random_spectrum(&grid, 3.min(band), 1.5, &mut rng);
    match extend(&base, &massive) {
        Ok(ext) => {
            let k = kappa(s).unwrap_or(f64::NAN);
            let hs2 = crate::spectral::hs_norm(&base, &massive).powi(2);
            let energy = ext.energy().unwrap_or(f64::NAN);
            out.below("extension", "energy_identity", rel(energy, k * hs2), 1e-6, "‖Ext u‖² = κ_s |u|²_{H^s}");
            let sampled = ext.sample(DEFAULT_CYLINDER_NODES);
            out.below("extension", "sampled_energy", rel(sampled.energy(&massive), energy), 1e-6, "weighted quadrature");
            let gap = sharp_trace_gap(&sampled, &massive).unwrap_or(f64::NAN);
            out.below("extension", "sharp_trace_equality", gap.abs() / energy, 1e-6, "extension attains equality");
            let mut min_gap = f64::INFINITY;
            for rate in [0.7, 1.5] {
                if let Ok(mc) = ModalCylinder::uniform(&base, &massive, ProfileKind::Exponential { rate }) {
                    min_gap = min_gap.min(sharp_trace_gap(&mc.sample(DEFAULT_CYLINDER_NODES), &massive).unwrap_or(f64::NAN));
                }
            }
            out.below("extension", "sharp_trace_inequality", -min_gap, 1e-8, "exponential competitors");
            let cn = conormal_derivative(&ext, &limit_points(0.2, 6));
            let target = apply_bessel_operator(&base, &massive).scaled(k);
            let d = cn.map(|c| c.lincomb(1.0, &target, -1.0).l2_norm() / target.l2_norm()).unwrap_or(f64::INFINITY);
            out.below("extension", "conormal_derivative", d, 1e-4, "-y^{1-2s}∂_y v → κ_s (-Δ+m²)^s u");
            let mut worst: f64 = 0.0;
            for y in [0.1, 0.5, 1.0, 2.0] {
                worst = worst.max(ext.pde_residual(y).unwrap_or(f64::INFINITY) / energy.max(1.0));
            }
            out.below("extension", "interior_residual", worst, 1e-7, "per unit energy");
        }
        Err(e) => out.flag("extension", "extend", false, e.to_string()),
    }
    let constant = forward_transform(&Field::new(grid, vec![1.3; grid.len()]).expect("finite"));
    let zm = project_zero_mean(&base);
    let gg = extend(&constant, &massive).map(|e| ground_gap(&e.sample(DEFAULT_CYLINDER_NODES), &massive));
    let gz = extend(&zm, &massive).map(|e| ground_gap(&e.sample(DEFAULT_CYLINDER_NODES), &massive));
    match (gg, gz) {
        (Ok(Ok(a)), Ok(Ok(b))) => {
            out.below("extension", "ground_gap_zero_on_ground_state", a.abs(), 1e-6, "");
            out.flag("extension", "ground_gap_positive_off_ground_state", b > 1e-4, format!("gap = {b}"));
        }
        _ => out.flag("extension", "ground_gap", false, "ground gap failed"),
    }

    // nonlinearity
    let xs: Vec<usize> = (0..grid.len()).step_by((grid.len() / 16).max(1)).collect();
    let rep = evaluate_hypotheses(spec, &default_t_samples(spec.r0()), &xs);
    let fails: Vec<String> = rep.checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
    out.flag("nonlinearity", "hypotheses", fails.is_empty(), format!("failing: {fails:?}"));
    if (spec.mu() - spec.p() - 1.0).abs() < 1e-15 {
        out.below("nonlinearity", "ar_equality", rep.ar_defect, 1e-9 * (10.0 * spec.r0()).powf(spec.p() + 1.0), "μF = tf");
    }
    let fun = Functional::new(frac, spec.clone());
    let (mut worst_nl, mut worst_l2, mut worst_x): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut nonneg = true;
    let weights = frac.symbols(&grid).bessel;
    for _ in 0..5 {
        let u = random_spectrum(&grid, band, 1.0, &mut rng);
        let w = random_spectrum(&grid, band, 1.0, &mut rng);
        let eps = 1e-5;
        let fd_nl = (spec.energy_of_spectrum(&u.lincomb(1.0, &w, eps))
            - spec.energy_of_spectrum(&u.lincomb(1.0, &w, -eps)))
            / (2.0 * eps);
        let an = spec.nonlinear_gradient(&u).map(|g| g.dot(&w)).unwrap_or(f64::NAN);
        worst_nl = worst_nl.max((fd_nl - an).abs() / an.abs().max(1e-12));
        nonneg &= spec.energy_of_spectrum(&u) >= 0.0;
        let fd = fd_directional(&fun, &u, &w, eps);
        let l2 = fun.gradient(&u, Metric::L2).dot(&w);
        let gx = fun.gradient(&u, Metric::X);
        let x: f64 = gx
            .coeffs()
            .iter()
            .zip(w.coeffs())
            .zip(&weights)
            .enumerate()
            .map(|(k, ((a, b), lam))| {
                let lam = if k == 0 && *lam == 0.0 { 1.0 } else { *lam };
                lam * (a.re * b.re + a.im * b.im)
            })
            .sum();
        worst_l2 = worst_l2.max((fd - l2).abs() / fd.abs().max(1e-12));
        worst_x = worst_x.max((fd - x).abs() / fd.abs().max(1e-12));
    }
    out.below("nonlinearity", "gradient_consistency", worst_nl, 1e-6, "central differences, ε = 1e-5");
    out.flag("nonlinearity", "primitive_nonnegative", nonneg, "∫F(x,u) >= 0");

    // energy
    let mut min_quad = f64::INFINITY;
    let mut min_ratio = f64::INFINITY;
    let mut rays_negative = true;
    for _ in 0..10 {
        let u = random_spectrum(&grid, band, 1.0, &mut rng);
        min_quad = min_quad.min(fun.quad(&u));
        let z = project_zero_mean(&u);
        if let Ok(r) = quadratic_gap(&z, &frac) {
            min_ratio = min_ratio.min(r);
        }
        if !spec.is_zero_probe() {
            let mut t = 1.0;
            while fun.value(&z.scaled(t)) >= 0.0 && t < 1e8 {
                t *= 2.0;
            }
            rays_negative &= fun.value(&z.scaled(t)) < 0.0;
        }
    }
    out.below("energy", "quadratic_nonnegative", -min_quad, 1e-10, "");
    out.below("energy", "constants_in_kernel", fun.quad(&constant).abs(), 1e-14, "quadratic part of a constant");
    out.below("energy", "gradient_l2", worst_l2, 1e-6, "⟨R(u), w⟩ against central differences");
    out.below("energy", "gradient_x", worst_x, 1e-6, "X-metric gradient paired in the X inner product");
    let cg = coercivity_constant(&grid, &frac);
    out.below("energy", "coercivity_on_z", cg - min_ratio, 1e-12, format!("C_gap = {cg}"));
    if !spec.is_zero_probe() {
        out.flag("energy", "superquadratic_rays", rays_negative, "I(t·u) < 0 for large t");
    }

    let all_passed = out.0.iter().all(|p| p.passed);
    VerifyReport {
        properties: out.0,
        all_passed,
    }
}
