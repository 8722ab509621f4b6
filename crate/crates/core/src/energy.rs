//! The reduced functional
//! `I_m(u) = ½Σ[(ω²|k|²+m²)^s - m^{2s}]|c_k|² - ∫F(x,u)`
//! on trace spectra, its gradients and the coercivity ratio on zero-mean data.

use crate::nonlinearity::NonlinearitySpec;
use crate::spectral::{FracParams, Spectrum, TorusGrid};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnergyError {
    #[error("domain error: {0}")]
    DomainError(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    L2,
    /// Riesz representative for `Σ(ω²|k|²+m²)^s|c_k|²`.
    X,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub value: f64,
    pub quad: f64,
    pub nl: f64,
    /// Dual (`H^{-s}`) norm of the L² gradient.
    pub grad_norm: f64,
}

/// Tabulated functional for one `(grid, s, m, f)`.
#[derive(Debug, Clone)]
pub struct Functional {
    params: FracParams,
    spec: NonlinearitySpec,
    shifted: Vec<f64>,
    riesz: Vec<f64>,
}

impl Functional {
    pub fn new(params: FracParams, spec: NonlinearitySpec) -> Self {
        let sym = params.symbols(spec.grid());
        let riesz = dual_weights_from(&sym.bessel);
        Self {
            params,
            spec,
            shifted: sym.shifted,
            riesz,
        }
    }

    pub fn params(&self) -> &FracParams {
        &self.params
    }

    pub fn spec(&self) -> &NonlinearitySpec {
        &self.spec
    }

    pub fn grid(&self) -> &TorusGrid {
        self.spec.grid()
    }

    /// Shifted multiplier table.
    pub fn shifted_symbol(&self) -> &[f64] {
        &self.shifted
    }

    /// `½Σ[(ω²|k|²+m²)^s - m^{2s}]|c_k|²`.
    pub fn quad(&self, u: &Spectrum) -> f64 {
        0.5 * u.weighted_norm_sq(&self.shifted)
    }

    pub fn value(&self, u: &Spectrum) -> f64 {
        self.quad(u) - self.spec.energy_of_spectrum(u)
    }

    /// Value and L² gradient `R(u) = shifted·c - f(·,u)^`.
    pub fn value_and_residual(&self, u: &Spectrum) -> (f64, Spectrum) {
        let (nl, f) = self.spec.energy_and_gradient(u);
        let value = self.quad(u) - nl;
        (value, u.mul_weights(&self.shifted).lincomb(1.0, &f, -1.0))
    }

    pub fn residual(&self, u: &Spectrum) -> Spectrum {
        self.value_and_residual(u).1
    }

    pub fn gradient(&self, u: &Spectrum, metric: Metric) -> Spectrum {
        let r = self.residual(u);
        match metric {
            Metric::L2 => r,
            Metric::X => r.mul_weights(&self.riesz),
        }
    }

    /// Maps an L² gradient to the X metric.
    pub fn to_x_metric(&self, r: &Spectrum) -> Spectrum {
        r.mul_weights(&self.riesz)
    }

    /// `sqrt(Σ|R_k|²/(ω²|k|²+m²)^s)`, with weight 1 on a vanishing zero mode.
    pub fn dual_norm(&self, r: &Spectrum) -> f64 {
        r.weighted_norm_sq(&self.riesz).sqrt()
    }

    pub fn evaluate(&self, u: &Spectrum) -> EnergyReport {
        let (nl, f) = self.spec.energy_and_gradient(u);
        let quad = self.quad(u);
        let r = u.mul_weights(&self.shifted).lincomb(1.0, &f, -1.0);
        EnergyReport {
            value: quad - nl,
            quad,
            nl,
            grad_norm: self.dual_norm(&r),
        }
    }
}

fn dual_weights_from(bessel: &[f64]) -> Vec<f64> {
    bessel
        .iter()
        .map(|&b| if b > 0.0 { 1.0 / b } else { 1.0 })
        .collect()
}

/// Dual-norm weights `1/(ω²|k|²+m²)^s` (1 on a vanishing zero mode).
pub fn dual_weights(grid: &TorusGrid, p: &FracParams) -> Vec<f64> {
    dual_weights_from(&p.symbols(grid).bessel)
}

pub fn evaluate(u: &Spectrum, p: &FracParams, spec: &NonlinearitySpec) -> EnergyReport {
    Functional::new(*p, spec.clone()).evaluate(u)
}

pub fn gradient(u: &Spectrum, p: &FracParams, spec: &NonlinearitySpec, metric: Metric) -> Spectrum {
    Functional::new(*p, spec.clone()).gradient(u, metric)
}

/// `1 - m^{2s}/(ω²+m²)^s`, the smallest ratio `quad/‖u‖²` over `|k| >= 1`.
pub fn coercivity_constant(grid: &TorusGrid, p: &FracParams) -> f64 {
    1.0 - p.mass_symbol() / p.bessel_symbol(grid.omega(), 1.0)
}

/// `Σ shifted|c_k|² / Σ bessel|c_k|²` on zero-mean data.
pub fn quadratic_gap(u: &Spectrum, p: &FracParams) -> Result<f64, EnergyError> {
    let sym = p.symbols(u.grid());
    let den = u.weighted_norm_sq(&sym.bessel);
    if den == 0.0 || u.norm_sq() == 0.0 {
        return Err(EnergyError::DomainError("zero function".into()));
    }
    if u.coeffs()[0].norm() > 1e-12 * u.l2_norm() {
        return Err(EnergyError::DomainError(format!(
            "nonzero mean coefficient {}",
            u.mean_coeff()
        )));
    }
    Ok(u.weighted_norm_sq(&sym.shifted) / den)
}
