//! Periodic grids, real fields, their Fourier coefficients, and the
//! multiplier operators `(-Δ+m²)^s` and `(-Δ+m²)^s - m^{2s}`.
//!
//! Coefficients use the continuum normalization
//! `c_k = T^{-N/2} ∫ u(x) e^{-iωk·x} dx`, so a spectrum does not depend on
//! the grid it was sampled on. Modes are stored in FFT order: along each
//! axis index `j` carries wavenumber `j` for `j <= n/2` and `j - n` above.

mod dealias;
mod fft;
mod io;
mod ops;

pub use dealias::{pad_spectrum, padded_len, truncate_spectrum};
pub use io::{read_field, read_spectrum, write_field, write_spectrum, GridJson, SpectralJson};
pub use ops::{
    apply_bessel_operator, apply_shifted_operator, hs_norm, lq_norm, project_zero_mean,
    solve_linear,
};

use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

/// Relative Hermitian defect above which an inverse transform is refused.
pub const SYMMETRY_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("spectrum is not Hermitian (relative defect {defect:e})")]
    SymmetryViolation { defect: f64 },
    #[error("zero mode {mean:e} cannot be inverted by a vanishing multiplier")]
    SingularMode { mean: f64 },
    #[error("L^q exponent must be >= 1, got {0}")]
    BadExponent(f64),
    #[error("grid mismatch")]
    GridMismatch,
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("malformed spectral JSON: {0}")]
    Format(String),
}

/// Uniform grid on the torus `[0,T)^N` with `n` points per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusGrid {
    dim: usize,
    period: f64,
    n: usize,
}

impl TorusGrid {
    pub fn new(dim: usize, period: f64, n: usize) -> Result<Self, SpectralError> {
        if !(1..=3).contains(&dim) {
            return Err(SpectralError::InvalidGrid(format!(
                "dimension must be 1, 2 or 3, got {dim}"
            )));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(SpectralError::InvalidGrid(format!(
                "period must be positive, got {period}"
            )));
        }
        if n < 4 || n % 2 != 0 {
            return Err(SpectralError::InvalidGrid(format!(
                "points per axis must be even and >= 4, got {n}"
            )));
        }
        Ok(Self { dim, period, n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Base frequency `2π/T`.
    pub fn omega(&self) -> f64 {
        2.0 * PI / self.period
    }

    /// Total number of samples `n^N`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Trapezoid weight `(T/n)^N` of a single sample.
    pub fn cell_volume(&self) -> f64 {
        (self.period / self.n as f64).powi(self.dim as i32)
    }

    /// Same torus sampled with `n` points per axis.
    pub fn with_points(&self, n: usize) -> Result<Self, SpectralError> {
        Self::new(self.dim, self.period, n)
    }

    /// Per-axis FFT indices of a flat index (axis 0 slowest).
    pub fn axis_indices(&self, flat: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        let mut rem = flat;
        for a in (0..self.dim).rev() {
            out[a] = rem % self.n;
            rem /= self.n;
        }
        out
    }

    pub fn flat_index(&self, idx: [usize; 3]) -> usize {
        let mut flat = 0;
        for a in 0..self.dim {
            flat = flat * self.n + idx[a];
        }
        flat
    }

    /// Signed wavenumber of a flat index; unused axes are zero.
    pub fn wavevector(&self, flat: usize) -> [i64; 3] {
        let idx = self.axis_indices(flat);
        let mut k = [0i64; 3];
        for a in 0..self.dim {
            k[a] = signed_wavenumber(idx[a], self.n);
        }
        k
    }

    pub fn k_squared(&self, flat: usize) -> f64 {
        let k = self.wavevector(flat);
        (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64
    }

    /// Flat index of the mode `-k`.
    pub fn partner(&self, flat: usize) -> usize {
        let idx = self.axis_indices(flat);
        let mut p = [0usize; 3];
        for a in 0..self.dim {
            p[a] = (self.n - idx[a]) % self.n;
        }
        self.flat_index(p)
    }

    /// Flat index of a signed wavevector, if it is retained on this grid.
    pub fn index_of(&self, k: [i64; 3]) -> Option<usize> {
        let half = (self.n / 2) as i64;
        let mut idx = [0usize; 3];
        for a in 0..self.dim {
            if k[a] <= -half || k[a] > half {
                return None;
            }
            idx[a] = k[a].rem_euclid(self.n as i64) as usize;
        }
        for kk in k.iter().skip(self.dim) {
            if *kk != 0 {
                return None;
            }
        }
        Some(self.flat_index(idx))
    }

    /// Sample point coordinates `x_j = jT/n`.
    pub fn point(&self, flat: usize) -> [f64; 3] {
        let idx = self.axis_indices(flat);
        let h = self.period / self.n as f64;
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = idx[a] as f64 * h;
        }
        x
    }
}

pub(crate) fn signed_wavenumber(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Fractional order `s` and mass `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracParams {
    s: f64,
    m: f64,
}

impl FracParams {
    pub fn new(s: f64, m: f64) -> Result<Self, SpectralError> {
        if !(s > 0.0 && s < 1.0) {
            return Err(SpectralError::InvalidParams(format!(
                "s must lie in (0,1), got {s}"
            )));
        }
        if !(m.is_finite() && m >= 0.0) {
            return Err(SpectralError::InvalidParams(format!(
                "m must be finite and >= 0, got {m}"
            )));
        }
        Ok(Self { s, m })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn with_mass(&self, m: f64) -> Result<Self, SpectralError> {
        Self::new(self.s, m)
    }

    /// Rejects `N < 2s`. The borderline `N = 2s` is accepted.
    pub fn check_dimension(&self, grid: &TorusGrid) -> Result<(), SpectralError> {
        if (grid.dim() as f64) < 2.0 * self.s {
            return Err(SpectralError::InvalidParams(format!(
                "dimension {} is below 2s = {}",
                grid.dim(),
                2.0 * self.s
            )));
        }
        Ok(())
    }

    /// Critical exponent `2N/(N-2s)`, `None` when it is infinite (`N = 2s`).
    pub fn critical_exponent(&self, grid: &TorusGrid) -> Result<Option<f64>, SpectralError> {
        self.check_dimension(grid)?;
        let n = grid.dim() as f64;
        let gap = n - 2.0 * self.s;
        if gap.abs() < 1e-14 {
            Ok(None)
        } else {
            Ok(Some(2.0 * n / gap))
        }
    }

    /// `m^{2s}`, the symbol of the zero mode.
    pub fn mass_symbol(&self) -> f64 {
        self.m.powf(2.0 * self.s)
    }

    /// `(ω²|k|²+m²)^s` for a squared wavenumber.
    pub fn bessel_symbol(&self, omega: f64, k_sq: f64) -> f64 {
        (omega * omega * k_sq + self.m * self.m).powf(self.s)
    }

    /// Per-mode symbols on a grid.
    pub fn symbols(&self, grid: &TorusGrid) -> Symbols {
        let omega = grid.omega();
        let ms = self.mass_symbol();
        let bessel: Vec<f64> = (0..grid.len())
            .map(|j| self.bessel_symbol(omega, grid.k_squared(j)))
            .collect();
        let mut shifted: Vec<f64> = bessel.iter().map(|b| b - ms).collect();
        shifted[0] = 0.0;
        Symbols { bessel, shifted }
    }
}

/// Tabulated multipliers in FFT order.
#[derive(Debug, Clone)]
pub struct Symbols {
    pub bessel: Vec<f64>,
    pub shifted: Vec<f64>,
}

/// Real samples on a torus grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub(crate) grid: TorusGrid,
    pub(crate) values: Vec<f64>,
}

impl Field {
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Result<Self, SpectralError> {
        if values.len() != grid.len() {
            return Err(SpectralError::GridMismatch);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(SpectralError::NonFinite(i));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    /// Samples `g(x)` at every grid point.
    pub fn from_fn(grid: TorusGrid, g: impl Fn([f64; 3]) -> f64) -> Result<Self, SpectralError> {
        let values = (0..grid.len()).map(|j| g(grid.point(j))).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Trapezoid integral over the torus.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }
}

/// Fourier coefficients of a real field in FFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub(crate) grid: TorusGrid,
    pub(crate) coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: TorusGrid, coeffs: Vec<Complex64>) -> Result<Self, SpectralError> {
        if coeffs.len() != grid.len() {
            return Err(SpectralError::GridMismatch);
        }
        if let Some(i) = coeffs.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(SpectralError::NonFinite(i));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Real cosine/sine mode `amp·cos(ωk·x)` (`sine = false`) or
    /// `amp·sin(ωk·x)` (`sine = true`).
    pub fn trig_mode(grid: TorusGrid, k: [i64; 3], amp: f64, sine: bool) -> Option<Self> {
        let plus = grid.index_of(k)?;
        let minus = grid.index_of([-k[0], -k[1], -k[2]]);
        let mut out = Self::zeros(grid);
        let scale = grid.period().powf(grid.dim() as f64 / 2.0);
        if plus == minus.unwrap_or(usize::MAX) {
            if sine {
                return Some(out);
            }
            out.coeffs[plus] = Complex64::new(amp * scale, 0.0);
            return Some(out);
        }
        match minus {
            Some(minus) => {
                let c = if sine {
                    Complex64::new(0.0, -0.5 * amp * scale)
                } else {
                    Complex64::new(0.5 * amp * scale, 0.0)
                };
                out.coeffs[plus] = c;
                out.coeffs[minus] = c.conj();
            }
            None => {
                // `k` sits on the Nyquist face: the sampled mode is a cosine.
                if !sine {
                    out.coeffs[plus] = Complex64::new(amp * scale, 0.0);
                }
            }
        }
        Some(out)
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Zero-mode coefficient `c_0`.
    pub fn mean_coeff(&self) -> f64 {
        self.coeffs[0].re
    }

    /// `Σ|c_k|²`, equal to the squared L² norm by Parseval.
    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Real L² inner product `Re Σ conj(a_k) b_k`.
    pub fn dot(&self, other: &Spectrum) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    /// `Σ w_k |c_k|²`.
    pub fn weighted_norm_sq(&self, weights: &[f64]) -> f64 {
        self.coeffs
            .iter()
            .zip(weights)
            .map(|(c, w)| w * c.norm_sqr())
            .sum()
    }

    pub fn scaled(&self, a: f64) -> Spectrum {
        Spectrum {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }

    /// `a·self + b·other`.
    pub fn lincomb(&self, a: f64, other: &Spectrum, b: f64) -> Spectrum {
        Spectrum {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(x, y)| x * a + y * b)
                .collect(),
        }
    }

    /// Multiplies mode `k` by `w[k]`.
    pub fn mul_weights(&self, w: &[f64]) -> Spectrum {
        Spectrum {
            grid: self.grid,
            coeffs: self.coeffs.iter().zip(w).map(|(c, w)| c * *w).collect(),
        }
    }

    /// Largest `|c_k - conj(c_{-k})|` relative to the largest coefficient.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for j in 0..self.coeffs.len() {
            let p = self.grid.partner(j);
            worst = worst.max((self.coeffs[j] - self.coeffs[p].conj()).norm());
        }
        worst / scale
    }

    /// Projects onto Hermitian spectra by averaging each mode with its partner.
    pub fn symmetrized(&self) -> Spectrum {
        let mut out = self.coeffs.clone();
        for (j, o) in out.iter_mut().enumerate() {
            let p = self.grid.partner(j);
            *o = 0.5 * (self.coeffs[j] + self.coeffs[p].conj());
        }
        Spectrum {
            grid: self.grid,
            coeffs: out,
        }
    }

    /// Shifts the field by `h` grid cells along `axis`.
    pub fn translated(&self, axis: usize, cells: f64) -> Spectrum {
        let n = self.grid.n() as f64;
        let mut out = self.coeffs.clone();
        for (j, c) in out.iter_mut().enumerate() {
            let k = self.grid.wavevector(j)[axis];
            if 2 * k.unsigned_abs() as usize == self.grid.n() {
                // The Nyquist mode cannot be shifted by a fraction of a cell
                // while staying real; its cosine part is shifted instead.
                let phase = (PI * cells).cos();
                *c *= phase;
                continue;
            }
            let phase = -2.0 * PI * k as f64 * cells / n;
            *c *= Complex64::from_polar(1.0, phase);
        }
        Spectrum {
            grid: self.grid,
            coeffs: out,
        }
    }
}

/// `c_k = T^{N/2}/n^N · DFT(u)_k`.
pub fn forward_transform(f: &Field) -> Spectrum {
    let grid = f.grid;
    let mut data: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft::transform_nd(&mut data, grid.n(), grid.dim(), false);
    let scale = grid.period().powf(grid.dim() as f64 / 2.0) / grid.len() as f64;
    for c in &mut data {
        *c *= scale;
    }
    Spectrum { grid, coeffs: data }
}

/// `u_j = T^{-N/2} Σ c_k e^{iωk·x_j}`; refuses non-Hermitian input.
pub fn inverse_transform(s: &Spectrum) -> Result<Field, SpectralError> {
    let defect = s.hermitian_defect();
    if defect > SYMMETRY_TOL {
        return Err(SpectralError::SymmetryViolation { defect });
    }
    Ok(inverse_transform_unchecked(s))
}

pub(crate) fn inverse_transform_unchecked(s: &Spectrum) -> Field {
    let grid = s.grid;
    let mut data = s.coeffs.clone();
    fft::transform_nd(&mut data, grid.n(), grid.dim(), true);
    let scale = grid.period().powf(-(grid.dim() as f64) / 2.0);
    Field {
        grid,
        values: data.iter().map(|c| c.re * scale).collect(),
    }
}

/// Random real band-limited spectrum: modes with `max|k_i| <= band` get
/// uniform random coefficients scaled by `(1+|k|²)^{-decay/2}`.
pub fn random_spectrum<R: rand::Rng + ?Sized>(
    grid: &TorusGrid,
    band: usize,
    decay: f64,
    rng: &mut R,
) -> Spectrum {
    let mut out = Spectrum::zeros(*grid);
    for j in 0..grid.len() {
        let partner = grid.partner(j);
        if partner < j {
            continue;
        }
        let k = grid.wavevector(j);
        if k.iter().any(|&ki| ki.unsigned_abs() as usize > band) {
            continue;
        }
        let amp = (1.0 + grid.k_squared(j)).powf(-0.5 * decay);
        let re = rng.gen_range(-1.0..1.0) * amp;
        if partner == j {
            out.coeffs[j] = Complex64::new(re, 0.0);
        } else {
            let c = Complex64::new(re, rng.gen_range(-1.0..1.0) * amp);
            out.coeffs[j] = c;
            out.coeffs[partner] = c.conj();
        }
    }
    out
}
