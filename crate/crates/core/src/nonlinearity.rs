//! Odd power nonlinearities `f(x,t) = a(x)|t|^{p-1}t`, their primitives,
//! sampled checks of the structural hypotheses, and dealiased evaluation
//! of `∫F(x,u)` and `f(·,u)` on a zero-padded grid.

use crate::spectral::{
    forward_transform, inverse_transform_unchecked, pad_spectrum, padded_len, truncate_spectrum,
    Field, FracParams, SpectralError, Spectrum, TorusGrid,
};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NonlinearityError {
    #[error("growth exponent p = {p} must satisfy 1 < p < {bound}")]
    InvalidExponent { p: f64, bound: f64 },
    #[error("Ambrosetti–Rabinowitz exponent mu = {mu} must satisfy 2 < mu <= p + 1 = {bound}")]
    InvalidMu { mu: f64, bound: f64 },
    #[error("threshold r0 = {0} must be positive")]
    InvalidThreshold(f64),
    #[error("coefficient field lives on a different grid")]
    GridMismatch,
    #[error("hypothesis ({hypothesis}) fails at x index {x_index}, t = {t}")]
    HypothesisViolated {
        hypothesis: String,
        x_index: usize,
        t: f64,
    },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum NonlinearityKind {
    /// `|t|^{p-1}t`.
    PurePower,
    /// `a(x)|t|^{p-1}t`.
    ModulatedPower { a: Field },
    /// `f ≡ 0`: violates the superlinear hypotheses; used as a degenerate probe.
    ZeroProbe,
}

#[derive(Debug, Clone)]
pub struct NonlinearitySpec {
    kind: NonlinearityKind,
    p: f64,
    mu: f64,
    r0: f64,
    grid: TorusGrid,
    padded: usize,
    a_fine: Option<Vec<f64>>,
}

/// `|t|^{p-1}t`.
fn odd_power(t: f64, p: f64) -> f64 {
    if p == 3.0 {
        t * t * t
    } else if p.fract() == 0.0 {
        t.abs().powi(p as i32 - 1) * t
    } else {
        t.abs().powf(p - 1.0) * t
    }
}

impl NonlinearitySpec {
    /// Validates `1 < p < 2♯_s - 1` (no upper bound when `N = 2s`) and sets
    /// `μ = p + 1`, `r₀ = 1`.
    pub fn new(
        kind: NonlinearityKind,
        p: f64,
        grid: &TorusGrid,
        frac: &FracParams,
    ) -> Result<Self, NonlinearityError> {
        let bound = match frac.critical_exponent(grid)? {
            Some(q) => q - 1.0,
            None => f64::INFINITY,
        };
        if !(p > 1.0 && p < bound && p.is_finite()) {
            return Err(NonlinearityError::InvalidExponent { p, bound });
        }
        let padded = padded_len(grid.n(), p);
        let a_fine = match &kind {
            NonlinearityKind::ModulatedPower { a } => {
                if a.grid() != grid {
                    return Err(NonlinearityError::GridMismatch);
                }
                let fine = pad_spectrum(&forward_transform(a), padded);
                Some(inverse_transform_unchecked(&fine).into_values())
            }
            _ => None,
        };
        Ok(Self {
            kind,
            p,
            mu: p + 1.0,
            r0: 1.0,
            grid: *grid,
            padded,
            a_fine,
        })
    }

    /// `f ≡ 0` on `grid`; bypasses the hypothesis-driven validation.
    pub fn zero_probe(grid: &TorusGrid) -> Self {
        Self {
            kind: NonlinearityKind::ZeroProbe,
            p: 3.0,
            mu: 4.0,
            r0: 1.0,
            grid: *grid,
            padded: grid.n(),
            a_fine: None,
        }
    }

    /// Overrides the AR constants; requires `2 < μ <= p+1` and `r₀ > 0`.
    pub fn with_ar(mut self, mu: f64, r0: f64) -> Result<Self, NonlinearityError> {
        if !(mu > 2.0 && mu <= self.p + 1.0) {
            return Err(NonlinearityError::InvalidMu {
                mu,
                bound: self.p + 1.0,
            });
        }
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(NonlinearityError::InvalidThreshold(r0));
        }
        self.mu = mu;
        self.r0 = r0;
        Ok(self)
    }

    pub fn kind(&self) -> &NonlinearityKind {
        &self.kind
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    /// Points per axis of the dealiasing grid.
    pub fn padded_points(&self) -> usize {
        self.padded
    }

    pub fn is_zero_probe(&self) -> bool {
        matches!(self.kind, NonlinearityKind::ZeroProbe)
    }

    /// `a(x_j)` on the base grid (`1` for the pure power).
    pub fn coefficient(&self, x_index: usize) -> f64 {
        match &self.kind {
            NonlinearityKind::PurePower => 1.0,
            NonlinearityKind::ModulatedPower { a } => a.values()[x_index],
            NonlinearityKind::ZeroProbe => 0.0,
        }
    }

    /// Smallest coefficient value on the base grid.
    pub fn coefficient_min(&self) -> f64 {
        match &self.kind {
            NonlinearityKind::PurePower => 1.0,
            NonlinearityKind::ModulatedPower { a } => a.min(),
            NonlinearityKind::ZeroProbe => 0.0,
        }
    }

    fn fine_coefficient(&self, j: usize) -> f64 {
        match &self.a_fine {
            Some(a) => a[j],
            None if self.is_zero_probe() => 0.0,
            None => 1.0,
        }
    }

    pub fn f_eval(&self, x_index: usize, t: f64) -> f64 {
        self.coefficient(x_index) * odd_power(t, self.p)
    }

    #[allow(non_snake_case)]
    pub fn F_eval(&self, x_index: usize, t: f64) -> f64 {
        self.coefficient(x_index) * odd_power(t, self.p) * t / (self.p + 1.0)
    }

    /// `∂_t f(x,t) = p·a(x)|t|^{p-1}`.
    pub fn f_prime(&self, x_index: usize, t: f64) -> f64 {
        self.coefficient(x_index) * self.p * t.abs().powf(self.p - 1.0)
    }

    fn fine_samples(&self, u: &Spectrum) -> Field {
        inverse_transform_unchecked(&pad_spectrum(u, self.padded))
    }

    /// `∫F(x,u)` by the trapezoid rule on the padded grid.
    pub fn nonlinear_energy(&self, u: &Field) -> Result<f64, NonlinearityError> {
        self.check_grid(u.grid())?;
        Ok(self.energy_of_spectrum(&forward_transform(u)))
    }

    pub fn energy_of_spectrum(&self, u: &Spectrum) -> f64 {
        if self.is_zero_probe() {
            return 0.0;
        }
        let fine = self.fine_samples(u);
        let p1 = self.p + 1.0;
        let sum: f64 = fine
            .values()
            .iter()
            .enumerate()
            .map(|(j, &t)| self.fine_coefficient(j) * odd_power(t, self.p) * t / p1)
            .sum();
        sum * fine.grid().cell_volume()
    }

    /// Spectrum of `f(·,u)`: evaluated on the padded grid and truncated by
    /// the adjoint of the padding, so it is the exact L² gradient of
    /// [`Self::energy_of_spectrum`].
    pub fn nonlinear_gradient(&self, u: &Spectrum) -> Result<Spectrum, NonlinearityError> {
        self.check_grid(u.grid())?;
        Ok(self.energy_and_gradient(u).1)
    }

    /// `(∫F(x,u), f(·,u))` from one padded evaluation.
    pub fn energy_and_gradient(&self, u: &Spectrum) -> (f64, Spectrum) {
        if self.is_zero_probe() {
            return (0.0, Spectrum::zeros(self.grid));
        }
        let fine = self.fine_samples(u);
        let p1 = self.p + 1.0;
        let mut energy = 0.0;
        let fvals: Vec<f64> = fine
            .values()
            .iter()
            .enumerate()
            .map(|(j, &t)| {
                let f = self.fine_coefficient(j) * odd_power(t, self.p);
                energy += f * t / p1;
                f
            })
            .collect();
        let fg = *fine.grid();
        let spec = forward_transform(&Field::new(fg, fvals).expect("finite nonlinearity"));
        (energy * fg.cell_volume(), truncate_spectrum(&spec, &self.grid))
    }

    /// `∫ f(x,u) u dx` on the padded grid.
    pub fn f_u_integral(&self, u: &Spectrum) -> f64 {
        self.energy_of_spectrum(u) * (self.p + 1.0)
    }

    /// Samples of `∂_t f(x, u(x))` on the padded grid, for linearization.
    pub fn derivative_samples(&self, u: &Spectrum) -> Field {
        let fine = self.fine_samples(u);
        let vals = fine
            .values()
            .iter()
            .enumerate()
            .map(|(j, &t)| self.fine_coefficient(j) * self.p * t.abs().powf(self.p - 1.0))
            .collect();
        Field::new(*fine.grid(), vals).expect("finite derivative")
    }

    /// Applies the linearization `w ↦ T[f'(·,Pu)·Pw]` given
    /// [`Self::derivative_samples`].
    pub fn apply_derivative(&self, fprime: &Field, w: &Spectrum) -> Spectrum {
        if self.is_zero_probe() {
            return Spectrum::zeros(self.grid);
        }
        let fw = self.fine_samples(w);
        let vals = fw
            .values()
            .iter()
            .zip(fprime.values())
            .map(|(a, b)| a * b)
            .collect();
        let spec = forward_transform(&Field::new(*fw.grid(), vals).expect("finite product"));
        truncate_spectrum(&spec, &self.grid)
    }

    fn check_grid(&self, g: &TorusGrid) -> Result<(), NonlinearityError> {
        if g != &self.grid {
            Err(NonlinearityError::GridMismatch)
        } else {
            Ok(())
        }
    }
}

/// Outcome of one sampled hypothesis.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct HypothesisCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub witness: Option<(usize, f64)>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct HypothesisReport {
    pub checks: Vec<HypothesisCheck>,
    /// Fitted constant of `|f| <= C(1+|t|^p)`.
    pub growth_constant: f64,
    /// `(ε, C_ε)` of the ε-growth bounds.
    pub eps_constants: Vec<(f64, f64)>,
    /// `(a₃, a₄)` of `F >= a₃|t|^μ - a₄`.
    pub lower_bound: (f64, f64),
    /// Largest `|t f - μ F|` over `|t| >= r₀`.
    pub ar_defect: f64,
}

impl HypothesisReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| !c.passed)
    }
}

/// Symmetric samples of `[-10r₀, 10r₀]` plus small and large magnitudes.
pub fn default_t_samples(r0: f64) -> Vec<f64> {
    let mut t: Vec<f64> = (0..=400).map(|i| -10.0 * r0 + 0.05 * r0 * i as f64).collect();
    for e in [1e-6, 1e-4, 1e-2, 20.0 * r0, 50.0 * r0] {
        t.push(e);
        t.push(-e);
    }
    t.sort_by(f64::total_cmp);
    t
}

fn check(name: &str, passed: bool, detail: String, witness: Option<(usize, f64)>) -> HypothesisCheck {
    HypothesisCheck {
        name: name.into(),
        passed,
        detail,
        witness,
    }
}

/// Runs every sampled check and returns the full report.
pub fn evaluate_hypotheses(
    spec: &NonlinearitySpec,
    t_samples: &[f64],
    x_samples: &[usize],
) -> HypothesisReport {
    let p = spec.p;
    let mu = spec.mu;
    let mut checks = Vec::new();

    checks.push(check("f1", true, "coefficient is a grid field: periodic by construction".into(), None));

    // Continuity: the largest jump between neighbouring samples must
    // shrink when the t spacing is halved.
    let (lo, hi) = t_samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &t| (a.min(t), b.max(t)));
    let jump = |count: usize| -> (f64, Option<(usize, f64)>) {
        let h = (hi - lo) / count as f64;
        let mut worst = (0.0, None);
        for &x in x_samples {
            for i in 0..count {
                let t = lo + h * i as f64;
                let d = (spec.f_eval(x, t + h) - spec.f_eval(x, t)).abs();
                if d > worst.0 {
                    worst = (d, Some((x, t)));
                }
            }
        }
        worst
    };
    let (j1, w1) = jump(4000);
    let (j2, _) = jump(8000);
    checks.push(check(
        "f2",
        j2 <= 0.75 * j1 || j1 == 0.0,
        format!("max jump {j1:e} then {j2:e} after refinement"),
        if j2 <= 0.75 * j1 || j1 == 0.0 { None } else { w1 },
    ));

    // f(x,t) = o(t): sup |f/t| over |t| = δ must decay as δ → 0.
    let ratio = |d: f64| {
        x_samples
            .iter()
            .map(|&x| (spec.f_eval(x, d) / d).abs().max((spec.f_eval(x, -d) / d).abs()))
            .fold(0.0, f64::max)
    };
    let (r2, r4, r6) = (ratio(1e-2), ratio(1e-4), ratio(1e-6));
    let f3_ok = r6 <= r4 && r4 <= r2 && r6 <= 0.5 * r2.max(f64::MIN_POSITIVE) || r2 == 0.0;
    checks.push(check(
        "f3",
        f3_ok,
        format!("sup|f/t| at 1e-2, 1e-4, 1e-6: {r2:e}, {r4:e}, {r6:e}"),
        if f3_ok { None } else { x_samples.first().map(|&x| (x, 1e-6)) },
    ));

    let mut growth = 0.0f64;
    for &x in x_samples {
        for &t in t_samples {
            growth = growth.max(spec.f_eval(x, t).abs() / (1.0 + t.abs().powf(p)));
        }
    }
    checks.push(check(
        "f4",
        growth.is_finite(),
        format!("|f| <= {growth} (1 + |t|^{p})"),
        None,
    ));

    // Sign condition t·f >= 0; checked before AR, which presupposes F > 0.
    let mut sign_witness = None;
    'sign: for &x in x_samples {
        for &t in t_samples {
            if t * spec.f_eval(x, t) < 0.0 {
                sign_witness = Some((x, t));
                break 'sign;
            }
        }
    }
    checks.push(check(
        "f6",
        sign_witness.is_none(),
        "t f(x,t) >= 0".into(),
        sign_witness,
    ));

    let mut ar_witness = None;
    let mut ar_defect = 0.0f64;
    for &x in x_samples {
        for &t in t_samples {
            if t.abs() < spec.r0 {
                continue;
            }
            let big_f = spec.F_eval(x, t);
            let tf = t * spec.f_eval(x, t);
            ar_defect = ar_defect.max((tf - mu * big_f).abs());
            let ok = big_f > 0.0 && mu * big_f <= tf + 1e-12 * tf.abs();
            if !ok && ar_witness.is_none() {
                ar_witness = Some((x, t));
            }
        }
    }
    checks.push(check(
        "f5",
        ar_witness.is_none(),
        format!("0 < mu F <= t f for |t| >= r0 (max |tf - mu F| = {ar_defect:e})"),
        ar_witness,
    ));

    // ε-growth bounds: C_ε fitted from the f bound, then the F bound checked.
    let mut eps_constants = Vec::new();
    for eps in [1.0, 0.1] {
        let mut c_eps = 0.0f64;
        for &x in x_samples {
            for &t in t_samples {
                if t == 0.0 {
                    continue;
                }
                let excess = spec.f_eval(x, t).abs() - 2.0 * eps * t.abs();
                c_eps = c_eps.max(excess / ((p + 1.0) * t.abs().powf(p)));
            }
        }
        let mut witness = None;
        for &x in x_samples {
            for &t in t_samples {
                let bound = eps * t * t + c_eps * t.abs().powf(p + 1.0);
                if spec.F_eval(x, t).abs() > bound * (1.0 + 1e-12) + 1e-300 && witness.is_none() {
                    witness = Some((x, t));
                }
            }
        }
        checks.push(check(
            &format!("growth_eps_{eps}"),
            witness.is_none(),
            format!("|f| <= 2·{eps}|t| + (p+1)C|t|^p, |F| <= {eps}t² + C|t|^(p+1), C = {c_eps}"),
            witness,
        ));
        eps_constants.push((eps, c_eps));
    }

    let a_min = x_samples
        .iter()
        .map(|&x| spec.coefficient(x))
        .fold(f64::INFINITY, f64::min);
    let a3 = a_min / (p + 1.0);
    let a4 = if (mu - (p + 1.0)).abs() < 1e-15 { 0.0 } else { a_min / (p + 1.0) };
    let mut lb_witness = None;
    for &x in x_samples {
        for &t in t_samples {
            let lb = a3 * t.abs().powf(mu) - a4;
            if spec.F_eval(x, t) < lb - 1e-12 * lb.abs() && lb_witness.is_none() {
                lb_witness = Some((x, t));
            }
        }
    }
    checks.push(check(
        "lower_bound",
        lb_witness.is_none() && a_min > 0.0,
        format!("F >= {a3}|t|^{mu} - {a4}"),
        lb_witness,
    ));

    HypothesisReport {
        checks,
        growth_constant: growth,
        eps_constants,
        lower_bound: (a3, a4),
        ar_defect,
    }
}

/// As [`evaluate_hypotheses`], failing on the first violated hypothesis.
pub fn verify_hypotheses(
    spec: &NonlinearitySpec,
    t_samples: &[f64],
    x_samples: &[usize],
) -> Result<HypothesisReport, NonlinearityError> {
    let report = evaluate_hypotheses(spec, t_samples, x_samples);
    if let Some(fail) = report.first_failure() {
        let (x_index, t) = fail.witness.unwrap_or((0, f64::NAN));
        return Err(NonlinearityError::HypothesisViolated {
            hypothesis: fail.name.clone(),
            x_index,
            t,
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::inverse_transform;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn setup(n: usize) -> (TorusGrid, FracParams) {
        (
            TorusGrid::new(1, 2.0 * PI, n).unwrap(),
            FracParams::new(0.5, 1.0).unwrap(),
        )
    }

    #[test]
    fn pointwise_values() {
        let (g, fp) = setup(8);
        let spec = NonlinearitySpec::new(NonlinearityKind::PurePower, 3.0, &g, &fp).unwrap();
        assert_eq!(spec.f_eval(0, 2.0), 8.0);
        assert_eq!(spec.F_eval(0, 2.0), 4.0);
        assert_eq!(spec.f_eval(0, 0.0), 0.0);
        let a = Field::from_fn(g, |x| 1.0 + 0.5 * x[0].cos()).unwrap();
        let spec = NonlinearitySpec::new(NonlinearityKind::ModulatedPower { a }, 3.0, &g, &fp).unwrap();
        assert_eq!(spec.f_eval(0, 1.0), 1.5);
    }

    #[test]
    fn exponent_bounds() {
        let g2 = TorusGrid::new(2, 1.0, 8).unwrap();
        let fp = FracParams::new(0.5, 1.0).unwrap();
        // 2♯ - 1 = (N+2s)/(N-2s) = 3 for N = 2, s = 1/2.
        let err = NonlinearitySpec::new(NonlinearityKind::PurePower, 3.0, &g2, &fp);
        assert!(matches!(err, Err(NonlinearityError::InvalidExponent { .. })));
        assert!(NonlinearitySpec::new(NonlinearityKind::PurePower, 2.9, &g2, &fp).is_ok());
        assert!(NonlinearitySpec::new(NonlinearityKind::PurePower, 1.0, &g2, &fp).is_err());
        let spec = NonlinearitySpec::new(NonlinearityKind::PurePower, 2.5, &g2, &fp).unwrap();
        assert!(spec.clone().with_ar(3.6, 1.0).is_err());
        assert!(spec.clone().with_ar(2.0, 1.0).is_err());
        assert!(spec.with_ar(3.0, 0.0).is_err());
    }

    #[test]
    fn energies_of_simple_fields() {
        let (g, fp) = setup(16);
        let spec = NonlinearitySpec::new(NonlinearityKind::PurePower, 3.0, &g, &fp).unwrap();
        assert_eq!(spec.nonlinear_energy(&Field::zeros(g)).unwrap(), 0.0);
        let one = Field::new(g, vec![1.0; 16]).unwrap();
        assert_relative_eq!(spec.nonlinear_energy(&one).unwrap(), PI / 2.0, max_relative = 1e-14);
        let c = Field::from_fn(g, |x| x[0].cos()).unwrap();
        assert_relative_eq!(spec.nonlinear_energy(&c).unwrap(), 3.0 * PI / 16.0, max_relative = 1e-14);
    }

    #[test]
    fn cubic_gradient_is_alias_free() {
        let (g, fp) = setup(8);
        let spec = NonlinearitySpec::new(NonlinearityKind::PurePower, 3.0, &g, &fp).unwrap();
        let u = forward_transform(&Field::from_fn(g, |x| x[0].cos()).unwrap());
        let got = inverse_transform(&spec.nonlinear_gradient(&u).unwrap()).unwrap();
        for (j, v) in got.values().iter().enumerate() {
            let x = 2.0 * PI * j as f64 / 8.0;
            assert!((v - (3.0 * x.cos() + (3.0 * x).cos()) / 4.0).abs() < 1e-13);
        }
        let c = forward_transform(&Field::new(g, vec![1.5; 8]).unwrap());
        let got = inverse_transform(&spec.nonlinear_gradient(&c).unwrap()).unwrap();
        assert!(got.values().iter().all(|v| (v - 3.375).abs() < 1e-13));
    }

    #[test]
    fn pure_power_passes_all_hypotheses() {
        let (g, fp) = setup(8);
        let spec = NonlinearitySpec::new(NonlinearityKind::PurePower, 3.0, &g, &fp).unwrap();
        let rep = verify_hypotheses(&spec, &default_t_samples(1.0), &[0, 3]).unwrap();
        assert!(rep.ar_defect < 1e-9);
        assert_eq!(rep.lower_bound, (0.25, 0.0));
        assert_eq!(rep.eps_constants.len(), 2);
    }

    #[test]
    fn sign_changing_coefficient_fails_at_sign_condition() {
        let (g, fp) = setup(8);
        let a = Field::from_fn(g, |x| x[0].cos()).unwrap();
        let spec = NonlinearitySpec::new(NonlinearityKind::ModulatedPower { a }, 3.0, &g, &fp).unwrap();
        let xs: Vec<usize> = (0..8).collect();
        match verify_hypotheses(&spec, &default_t_samples(1.0), &xs) {
            Err(NonlinearityError::HypothesisViolated { hypothesis, x_index, .. }) => {
                assert_eq!(hypothesis, "f6");
                assert!(spec.coefficient(x_index) < 0.0);
            }
            other => panic!("expected a violation, got {other:?}"),
        }
    }

    #[test]
    fn fractional_power_passes() {
        let (g, fp) = setup(8);
        let spec = NonlinearitySpec::new(NonlinearityKind::PurePower, 2.5, &g, &fp)
            .unwrap()
            .with_ar(3.0, 0.5)
            .unwrap();
        let rep = verify_hypotheses(&spec, &default_t_samples(0.5), &[0]).unwrap();
        assert_relative_eq!(rep.lower_bound.1, 1.0 / 3.5);
    }
}
