//! The extension profile `θ(y) = (2/Γ(s))(y/2)^s K_s(y)` and the constant
//! `κ_s = 2^{1-2s}Γ(1-s)/Γ(s)`.
//!
//! `θ` solves `θ'' + ((1-2s)/y)θ' - θ = 0` with `θ(0) = 1`, `θ(∞) = 0`, and
//! `κ_s = -lim_{y→0} y^{1-2s}θ'(y) = ∫₀^∞ y^{1-2s}(θ'² + θ²) dy`.
//!
//! Below `y = 2` the profile is summed from the ascending series of
//! `I_{±s}`; above it `K_s` and `K_{1-s}` come from Steed's continued
//! fraction. At `s = 1/2` the closed form `θ = e^{-y}` is used.

mod kfun;
mod richardson;

use kfun::bessel_k_pair;
pub use richardson::{extrapolate_to_zero, profile_exponents};

use crate::quadrature::HalfLineRule;
use statrs::function::gamma::gamma;
use std::sync::OnceLock;
use thiserror::Error;

const SERIES_CROSSOVER: f64 = 2.0;

/// Default Gauss–Jacobi node count for profile integrals.
pub const DEFAULT_NODES: usize = 200;

/// Length scale of the half-line map used for profile integrals.
pub const PROFILE_SCALE: f64 = 2.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BesselError {
    #[error("argument {0} outside the domain")]
    DomainError(f64),
    #[error("quadrature did not settle: {coarse} vs {fine}")]
    QuadratureUnconverged { coarse: f64, fine: f64 },
    #[error("extrapolated limits are not Cauchy: {full} vs {reduced}")]
    ExtrapolationDiverged { full: f64, reduced: f64 },
}

/// `2^{1-2s}Γ(1-s)/Γ(s)`.
pub fn kappa(s: f64) -> Result<f64, BesselError> {
    if !(s > 0.0 && s < 1.0) {
        return Err(BesselError::DomainError(s));
    }
    Ok(2f64.powf(1.0 - 2.0 * s) * gamma(1.0 - s) / gamma(s))
}

/// `θ`, `θ'` and `θ''` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaJet {
    pub value: f64,
    pub first: f64,
    pub second: f64,
}

#[derive(Debug)]
pub struct ThetaProfile {
    s: f64,
    kappa: f64,
    gamma_1ms: f64,
    inv_gamma_1ms: f64,
    inv_gamma_1ps: f64,
    large_prefactor: f64,
    energy_integral: OnceLock<Result<f64, BesselError>>,
}

impl Clone for ThetaProfile {
    fn clone(&self) -> Self {
        Self {
            energy_integral: OnceLock::new(),
            ..*self
        }
    }
}

impl ThetaProfile {
    pub fn new(s: f64) -> Result<Self, BesselError> {
        let kappa = kappa(s)?;
        Ok(Self {
            s,
            kappa,
            gamma_1ms: gamma(1.0 - s),
            inv_gamma_1ms: 1.0 / gamma(1.0 - s),
            inv_gamma_1ps: 1.0 / gamma(1.0 + s),
            large_prefactor: 2f64.powf(1.0 - s) / gamma(s),
            energy_integral: OnceLock::new(),
        })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    fn is_half(&self) -> bool {
        self.s == 0.5
    }

    pub fn theta(&self, y: f64) -> Result<f64, BesselError> {
        check(y)?;
        Ok(self.jet(y).value)
    }

    pub fn theta_prime(&self, y: f64) -> Result<f64, BesselError> {
        check(y)?;
        Ok(self.jet(y).first)
    }

    pub fn theta_second(&self, y: f64) -> Result<f64, BesselError> {
        check(y)?;
        Ok(self.jet(y).second)
    }

    /// `|θ'' + ((1-2s)/y)θ' - θ|` with `θ''` from the series (small `y`) or
    /// the Bessel recurrences (large `y`).
    pub fn ode_residual(&self, y: f64) -> Result<f64, BesselError> {
        check(y)?;
        let j = self.jet(y);
        Ok((j.second + (1.0 - 2.0 * self.s) / y * j.first - j.value).abs())
    }

    /// Value and derivatives for `y > 0` (no domain check).
    pub fn jet(&self, y: f64) -> ThetaJet {
        if self.is_half() {
            let e = (-y).exp();
            return ThetaJet {
                value: e,
                first: -e,
                second: e,
            };
        }
        if y <= SERIES_CROSSOVER {
            self.series(y)
        } else {
            self.asymptotic(y)
        }
    }

    /// `(θ, θ')` for `y > 0`.
    pub fn value_and_slope(&self, y: f64) -> (f64, f64) {
        let j = self.jet(y);
        (j.value, j.first)
    }

    /// `y^{1-2s}θ'(y)`, the weighted flux of the profile.
    pub fn flux(&self, y: f64) -> f64 {
        y.powf(1.0 - 2.0 * self.s) * self.jet(y).first
    }

    fn series(&self, y: f64) -> ThetaJet {
        let s = self.s;
        let z = 0.5 * y;
        let z2 = z * z;
        // θ/Γ(1-s) = Σ a_k z^{2k} - z^{2s} Σ b_k z^{2k}.
        let mut a = self.inv_gamma_1ms;
        let mut b = self.inv_gamma_1ps;
        let zs = z.powf(2.0 * s);
        let mut zk = 1.0;
        let (mut v, mut d1, mut d2) = (0.0, 0.0, 0.0);
        for k in 0..60 {
            let kf = k as f64;
            let ea = 2.0 * kf;
            let eb = 2.0 * kf + 2.0 * s;
            let ta = a * zk;
            let tb = b * zk * zs;
            v += ta - tb;
            // d/dy z^e = (e/2) z^{e-1}.
            d1 += 0.5 * (ea * ta - eb * tb) / z;
            d2 += 0.25 * (ea * (ea - 1.0) * ta - eb * (eb - 1.0) * tb) / z2;
            if (ta.abs() + tb.abs()) < 1e-18 * v.abs() && k > 2 {
                break;
            }
            a /= (kf + 1.0) * (kf + 1.0 - s);
            b /= (kf + 1.0) * (kf + 1.0 + s);
            zk *= z2;
        }
        ThetaJet {
            value: self.gamma_1ms * v,
            first: self.gamma_1ms * d1,
            second: self.gamma_1ms * d2,
        }
    }

    fn asymptotic(&self, y: f64) -> ThetaJet {
        let s = self.s;
        let (ks, k1ms) = bessel_k_pair(s, y);
        let ys = y.powf(s);
        let value = self.large_prefactor * ys * ks;
        let first = -self.large_prefactor * ys * k1ms;
        let second = value - (1.0 - 2.0 * s) * first / y;
        ThetaJet {
            value,
            first,
            second,
        }
    }

    /// `∫₀^∞ y^{1-2s}(θ'² + θ²) dy` by the two weighted rules with `n` nodes.
    pub fn energy_integral_with(&self, n: usize) -> f64 {
        let s = self.s;
        let value_rule = HalfLineRule::new(1.0 - 2.0 * s, n, PROFILE_SCALE);
        let flux_rule = HalfLineRule::new(2.0 * s - 1.0, n, PROFILE_SCALE);
        let vals = value_rule.integrate(|y| self.jet(y).value.powi(2));
        let flux = flux_rule.integrate(|y| self.flux(y).powi(2));
        vals + flux
    }

    /// The weighted profile energy, checked against a rule with twice the
    /// nodes. Cached after the first call.
    pub fn energy_integral(&self) -> Result<f64, BesselError> {
        self.energy_integral
            .get_or_init(|| {
                let coarse = self.energy_integral_with(DEFAULT_NODES);
                let fine = self.energy_integral_with(2 * DEFAULT_NODES);
                if (coarse - fine).abs() > 1e-6 * fine.abs() {
                    Err(BesselError::QuadratureUnconverged { coarse, fine })
                } else {
                    Ok(fine)
                }
            })
            .clone()
    }

    /// Extrapolates `-y^{1-2s}θ'(y)` to `y = 0` from a decreasing list.
    pub fn conormal_limit_check(&self, y_list: &[f64]) -> Result<f64, BesselError> {
        for &y in y_list {
            check(y)?;
        }
        let gs: Vec<f64> = y_list.iter().map(|&y| -self.flux(y)).collect();
        limit_with_cauchy_check(self.s, y_list, &gs)
    }

    /// Largest sampled `θ(y)` and `-y^{1-2s}θ'(y)`: witnesses for the
    /// profile bounds, not certified constants.
    pub fn bound_witnesses(&self, samples: &[f64]) -> (f64, f64) {
        samples.iter().fold((0.0, 0.0), |(a, b), &y| {
            (a.max(self.jet(y).value), b.max(-self.flux(y)))
        })
    }
}

fn check(y: f64) -> Result<(), BesselError> {
    if y > 0.0 && y.is_finite() {
        Ok(())
    } else {
        Err(BesselError::DomainError(y))
    }
}

/// Geometric sample points `y₀·2^{-j}` for limit extrapolation.
pub fn limit_points(y0: f64, count: usize) -> Vec<f64> {
    (0..count).map(|j| y0 * 0.5f64.powi(j as i32)).collect()
}

/// Richardson limit of `g(y)` at `y = 0` under the profile expansion,
/// rejected when dropping the coarsest sample moves it noticeably.
pub fn limit_with_cauchy_check(s: f64, ys: &[f64], gs: &[f64]) -> Result<f64, BesselError> {
    if ys.is_empty() {
        return Err(BesselError::DomainError(f64::NAN));
    }
    let exps = profile_exponents(s, ys.len());
    let full = extrapolate_to_zero(ys, gs, &exps).ok_or(BesselError::DomainError(ys[0]))?;
    if ys.len() < 3 {
        return Ok(full);
    }
    let reduced =
        extrapolate_to_zero(&ys[1..], &gs[1..], &exps).ok_or(BesselError::DomainError(ys[1]))?;
    let scale = gs.iter().fold(full.abs(), |a, g| a.max(g.abs()));
    if (full - reduced).abs() > 1e-4 * scale.max(f64::MIN_POSITIVE) {
        return Err(BesselError::ExtrapolationDiverged { full, reduced });
    }
    Ok(full)
}
