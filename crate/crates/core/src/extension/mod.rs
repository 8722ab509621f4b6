//! Extensions of periodic traces to the half-cylinder `(0,T)^N × (0,∞)`.
//!
//! Mode `k` of a trace extends as `c_k θ(λ_k y)` with
//! `λ_k = sqrt(ω²|k|²+m²)`, which solves
//! `-div(y^{1-2s}∇v) + m² y^{1-2s} v = 0` and has weighted energy
//! `κ_s λ_k^{2s} |c_k|²`. [`ExtensionField`] keeps this analytic form;
//! [`CylinderFunction`] holds sampled competitors on quadrature nodes.

mod cylinder;

pub use cylinder::{
    ground_gap, sharp_trace_gap, CylinderFunction, ModalCylinder, ProfileKind, DEFAULT_CYLINDER_NODES,
};

use crate::bessel::{
    extrapolate_to_zero, profile_exponents, BesselError, ThetaProfile,
};
use crate::spectral::{hs_norm, inverse_transform_unchecked, Field, FracParams, SpectralError, Spectrum};
use num_complex::Complex64;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtensionError {
    #[error("zero mode {mean:e} has no decaying extension at m = 0")]
    ZeroModeNoDecay { mean: f64 },
    #[error("quadrature did not settle: {coarse} vs {fine}")]
    QuadratureUnconverged { coarse: f64, fine: f64 },
    #[error("conormal limit of mode {mode} is not Cauchy: {full} vs {reduced}")]
    ExtrapolationDiverged { mode: usize, full: f64, reduced: f64 },
    #[error("domain error: {0}")]
    DomainError(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("malformed cylinder data: {0}")]
    Format(String),
}

impl From<BesselError> for ExtensionError {
    fn from(e: BesselError) -> Self {
        match e {
            BesselError::QuadratureUnconverged { coarse, fine } => {
                Self::QuadratureUnconverged { coarse, fine }
            }
            BesselError::ExtrapolationDiverged { full, reduced } => Self::ExtrapolationDiverged {
                mode: usize::MAX,
                full,
                reduced,
            },
            BesselError::DomainError(x) => Self::DomainError(format!("profile argument {x}")),
        }
    }
}

/// `sqrt(ω²|k|²+m²)` per mode.
pub fn mode_rates(grid: &crate::spectral::TorusGrid, p: &FracParams) -> Vec<f64> {
    let w = grid.omega();
    (0..grid.len())
        .map(|j| (w * w * grid.k_squared(j) + p.m() * p.m()).sqrt())
        .collect()
}

/// The minimal-energy extension of a trace, kept in modal form.
#[derive(Debug, Clone)]
pub struct ExtensionField {
    base: Spectrum,
    params: FracParams,
    profile: Arc<ThetaProfile>,
    rates: Vec<f64>,
}

/// Builds the extension of `u`. At `m = 0` the trace must have zero mean.
pub fn extend(u: &Spectrum, p: &FracParams) -> Result<ExtensionField, ExtensionError> {
    let profile = Arc::new(ThetaProfile::new(p.s())?);
    extend_with(u, p, profile)
}

/// As [`extend`], sharing an already built profile.
pub fn extend_with(
    u: &Spectrum,
    p: &FracParams,
    profile: Arc<ThetaProfile>,
) -> Result<ExtensionField, ExtensionError> {
    if profile.s() != p.s() {
        return Err(ExtensionError::DomainError("profile order differs from s".into()));
    }
    if p.m() == 0.0 && u.coeffs()[0].norm() > 1e-12 * u.l2_norm() {
        return Err(ExtensionError::ZeroModeNoDecay {
            mean: u.coeffs()[0].re,
        });
    }
    Ok(ExtensionField {
        base: u.clone(),
        params: *p,
        rates: mode_rates(u.grid(), p),
        profile,
    })
}

impl ExtensionField {
    pub fn trace(&self) -> &Spectrum {
        &self.base
    }

    pub fn params(&self) -> &FracParams {
        &self.params
    }

    pub fn profile(&self) -> &ThetaProfile {
        &self.profile
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    /// `θ(λ_k y)`; the constant profile for a vanishing rate.
    pub fn mode_profile(&self, k: usize, y: f64) -> f64 {
        let l = self.rates[k];
        if y <= 0.0 || l == 0.0 {
            1.0
        } else {
            self.profile.jet(l * y).value
        }
    }

    /// `y^{1-2s} ∂_y θ(λ_k y)`.
    pub fn mode_flux(&self, k: usize, y: f64) -> f64 {
        let l = self.rates[k];
        if l == 0.0 {
            0.0
        } else {
            l.powf(2.0 * self.params.s()) * self.profile.flux(l * y)
        }
    }

    /// Spectrum of the horizontal slice at height `y >= 0`.
    pub fn slice(&self, y: f64) -> Spectrum {
        let coeffs = self
            .base
            .coeffs()
            .iter()
            .enumerate()
            .map(|(k, c)| c * self.mode_profile(k, y))
            .collect();
        Spectrum::new(*self.base.grid(), coeffs).expect("finite slice")
    }

    /// Samples of the slice at height `y` on the grid.
    pub fn row(&self, y: f64) -> Field {
        inverse_transform_unchecked(&self.slice(y))
    }

    /// Point evaluation `Σ c_k θ(λ_k y) e^{iωk·x} / T^{N/2}`.
    pub fn value(&self, x: [f64; 3], y: f64) -> f64 {
        let g = self.base.grid();
        let w = g.omega();
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, c) in self.base.coeffs().iter().enumerate() {
            if c.norm_sqr() == 0.0 {
                continue;
            }
            let kv = g.wavevector(k);
            let phase = w * (kv[0] as f64 * x[0] + kv[1] as f64 * x[1] + kv[2] as f64 * x[2]);
            acc += c * self.mode_profile(k, y) * Complex64::from_polar(1.0, phase);
        }
        acc.re / g.period().powf(g.dim() as f64 / 2.0)
    }

    /// Weighted Dirichlet energy `∬ y^{1-2s}(|∇v|² + m²v²)`, from the
    /// numerically integrated profile energy times `Σ λ_k^{2s}|c_k|²`.
    pub fn energy(&self) -> Result<f64, ExtensionError> {
        let unit = self.profile.energy_integral()?;
        Ok(unit * hs_norm(&self.base, &self.params).powi(2))
    }

    /// L² norm in `x` of the interior residual
    /// `-div(y^{1-2s}∇v) + m² y^{1-2s} v` at height `y`, mode by mode.
    pub fn pde_residual(&self, y: f64) -> Result<f64, ExtensionError> {
        let s = self.params.s();
        let mut acc = 0.0;
        for (k, c) in self.base.coeffs().iter().enumerate() {
            let l = self.rates[k];
            if l == 0.0 || c.norm_sqr() == 0.0 {
                continue;
            }
            let r = l * l * y.powf(1.0 - 2.0 * s) * self.profile.ode_residual(l * y)?;
            acc += c.norm_sqr() * r * r;
        }
        Ok(acc.sqrt())
    }

    /// Samples the extension on weighted rules with `n` nodes each.
    pub fn sample(&self, n: usize) -> CylinderFunction {
        ModalCylinder::exact(self).sample(n)
    }
}

/// `-lim_{y→0} y^{1-2s}∂_y v` mode by mode, by Richardson extrapolation.
///
/// Mode `k` is sampled at `y_i·min(1, 1/λ_k)`, i.e. the heights are read in
/// units of the mode's own decay length once it is shorter than one. Modes
/// carrying less than `1e-8` of the squared trace norm are extrapolated
/// without the Cauchy check.
pub fn conormal_derivative(v: &ExtensionField, y_list: &[f64]) -> Result<Spectrum, ExtensionError> {
    if y_list.is_empty() || y_list.iter().any(|&y| !(y > 0.0)) {
        return Err(ExtensionError::DomainError("heights must be positive".into()));
    }
    let s = v.params.s();
    let exps = profile_exponents(s, y_list.len());
    let total = v.base.norm_sq();
    let mut out = Vec::with_capacity(v.base.coeffs().len());
    let mut cache: Vec<(f64, f64)> = Vec::new();
    for (k, c) in v.base.coeffs().iter().enumerate() {
        let l = v.rates[k];
        if l == 0.0 || c.norm_sqr() == 0.0 {
            out.push(Complex64::new(0.0, 0.0));
            continue;
        }
        let factor = match cache.iter().find(|(r, _)| *r == l) {
            Some((_, f)) => *f,
            None => {
                let shrink = (1.0 / l).min(1.0);
                let ys: Vec<f64> = y_list.iter().map(|y| y * shrink).collect();
                let gs: Vec<f64> = ys.iter().map(|&y| -v.mode_flux(k, y)).collect();
                let full = extrapolate_to_zero(&ys, &gs, &exps)
                    .ok_or_else(|| ExtensionError::DomainError("singular extrapolation".into()))?;
                if ys.len() >= 3 && c.norm_sqr() >= 1e-8 * total {
                    let reduced = extrapolate_to_zero(&ys[1..], &gs[1..], &exps).ok_or_else(|| {
                        ExtensionError::DomainError("singular extrapolation".into())
                    })?;
                    if (full - reduced).abs() > 1e-4 * full.abs() {
                        return Err(ExtensionError::ExtrapolationDiverged {
                            mode: k,
                            full,
                            reduced,
                        });
                    }
                }
                cache.push((l, full));
                full
            }
        };
        out.push(c * factor);
    }
    Ok(Spectrum::new(*v.base.grid(), out)?)
}
