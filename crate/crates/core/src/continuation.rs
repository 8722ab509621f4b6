//! Continuation of linking solutions as `m ↓ 0`, extraction of a solution of
//! `(-Δ)^s u = f(x,u)`, and integrability/regularity diagnostics.

use crate::energy::Functional;
use crate::linking::{
    minimax_search_with, refine, LinkingConfig, LinkingError, LinkingProblem, SolverStatus,
};
use crate::nonlinearity::NonlinearitySpec;
use crate::spectral::{
    forward_transform, hs_norm, inverse_transform_unchecked, lq_norm, project_zero_mean,
    random_spectrum, Field, FracParams, SpectralError, Spectrum, TorusGrid,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContinuationError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("limit collapsed to the trivial solution (norm {norm})")]
    LimitCollapsed { norm: f64 },
    #[error("branch is not Cauchy: limit moved {observed}, trend predicts {predicted}")]
    NotCauchy { observed: f64, predicted: f64 },
    #[error("spectrum too flat for a regularity estimate: top band holds {fraction} of the energy")]
    InsufficientDecay { fraction: f64 },
    #[error(transparent)]
    Linking(#[from] LinkingError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevEstimate {
    /// Lebesgue exponent of the estimate.
    pub exponent: f64,
    pub c_sharp: f64,
    /// `1/(2·c_sharp²)`.
    pub m0: f64,
}

/// Exponent used for the Sobolev estimate: `2N/(N-2s)`, or `p+1` when that
/// is infinite.
pub fn sobolev_exponent(grid: &TorusGrid, frac: &FracParams, p: f64) -> Result<f64, SpectralError> {
    Ok(frac.critical_exponent(grid)?.unwrap_or(p + 1.0))
}

/// Largest `|u|_{L^q} / (Σ_{k≠0} (ω|k|)^{2s}|c_k|²)^{1/2}` found by projected
/// ascent over zero-mean spectra from ten seeded starts and a bump.
pub fn estimate_sobolev_constant(grid: &TorusGrid, frac: &FracParams, q: f64, seed: u64) -> SobolevEstimate {
    let massless = frac.with_mass(0.0).expect("valid s");
    let weights = massless.symbols(grid).bessel;
    let seminorm = |u: &Spectrum| u.weighted_norm_sq(&weights).sqrt();
    let normalize = |u: &Spectrum| u.scaled(1.0 / seminorm(u));
    let objective = |u: &Spectrum| {
        let f = inverse_transform_unchecked(u);
        f.values().iter().map(|v| v.abs().powf(q)).sum::<f64>() * grid.cell_volume()
    };
    let riesz: Vec<f64> = weights.iter().map(|&w| if w > 0.0 { 1.0 / w } else { 0.0 }).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let band = (grid.n() / 4).max(2);
    let mut starts: Vec<Spectrum> = (0..10)
        .map(|_| project_zero_mean(&random_spectrum(grid, band, 1.0, &mut rng)))
        .collect();
    let w = grid.omega();
    let d = grid.dim();
    let bump = Field::from_fn(*grid, |x| (0..d).map(|i| (4.0 * ((w * x[i]).cos() - 1.0)).exp()).product())
        .expect("finite");
    starts.push(project_zero_mean(&forward_transform(&bump)));

    let best = starts
        .par_iter()
        .filter(|s| seminorm(s) > 0.0)
        .map(|s| {
            let mut u = normalize(s);
            let mut val = objective(&u);
            let mut tau = 1.0;
            for _ in 0..600 {
                let f = inverse_transform_unchecked(&u);
                let g: Vec<f64> = f.values().iter().map(|v| q * v.abs().powf(q - 2.0) * v).collect();
                let gs = forward_transform(&Field::new(*grid, g).expect("finite")).mul_weights(&riesz);
                let along: f64 = gs
                    .coeffs()
                    .iter()
                    .zip(u.coeffs())
                    .zip(&weights)
                    .map(|((a, b), w)| w * (a.re * b.re + a.im * b.im))
                    .sum();
                let tangent = gs.lincomb(1.0, &u, -along);
                let t2 = tangent.weighted_norm_sq(&weights);
                if t2 <= 1e-26 * val * val {
                    break;
                }
                let mut accepted = None;
                for _ in 0..40 {
                    let trial = normalize(&u.lincomb(1.0, &tangent, tau));
                    let tv = objective(&trial);
                    if tv >= val + 1e-4 * tau * t2 {
                        accepted = Some((trial, tv));
                        break;
                    }
                    tau *= 0.5;
                }
                let Some((nu, nv)) = accepted else { break };
                u = nu;
                val = nv;
                tau *= 2.0;
            }
            val.powf(1.0 / q)
        })
        .reduce(|| 0.0, f64::max);
    SobolevEstimate {
        exponent: q,
        c_sharp: best,
        m0: 1.0 / (2.0 * best * best),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecordStatus {
    Converged,
    MaxIters,
    NoNontrivialSolution,
    Failed,
}

impl From<SolverStatus> for RecordStatus {
    fn from(s: SolverStatus) -> Self {
        match s {
            SolverStatus::Converged => Self::Converged,
            SolverStatus::MaxIters => Self::MaxIters,
            SolverStatus::NoNontrivialSolution => Self::NoNontrivialSolution,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ContinuationRecord {
    pub m: f64,
    pub alpha: f64,
    /// H^s norm with unit mass.
    pub hs_norm_t: f64,
    pub l2_norm: f64,
    pub residual: f64,
    pub status: RecordStatus,
    /// Ridge lower bound `ρ̂` at this mass.
    pub rho: f64,
    /// Sampled maximum over the linking set at this mass.
    pub delta_hat: f64,
    pub solution: Option<Spectrum>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub m: f64,
    pub alpha: f64,
    pub hs_norm_t: f64,
    pub l2_norm: f64,
    pub residual: f64,
    pub status: RecordStatus,
}

impl ContinuationRecord {
    pub fn csv_row(&self) -> CsvRow {
        CsvRow {
            m: self.m,
            alpha: self.alpha,
            hs_norm_t: self.hs_norm_t,
            l2_norm: self.l2_norm,
            residual: self.residual,
            status: self.status,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Sweep {
    pub records: Vec<ContinuationRecord>,
    /// `min ρ̂` over converged records.
    pub lambda_hat: f64,
    /// `max δ̂` over converged records.
    pub delta_hat: f64,
    pub max_hs_norm: f64,
    pub max_l2_norm: f64,
    /// Every converged `α_m` lies in `[λ̂, δ̂]`.
    pub envelope_ok: bool,
    /// Last-to-first ratio of the converged H^s norms is below 10.
    pub bounded: bool,
}

impl Sweep {
    pub fn converged(&self) -> impl Iterator<Item = &ContinuationRecord> {
        self.records.iter().filter(|r| r.status == RecordStatus::Converged)
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.records {
            w.serialize(r.csv_row())?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn read_sweep_csv<R: std::io::Read>(input: R) -> Result<Vec<CsvRow>, csv::Error> {
    csv::Reader::from_reader(input).deserialize().collect()
}

/// Solves at each mass of a decreasing list in `(0, m0)`, warm-starting each
/// solve from the previous converged solution.
pub fn sweep_m(
    m_list: &[f64],
    p_base: &FracParams,
    spec: &NonlinearitySpec,
    cfg: &LinkingConfig,
    m0: f64,
) -> Result<Sweep, ContinuationError> {
    for (i, &m) in m_list.iter().enumerate() {
        if !(m > 0.0 && m < m0) {
            return Err(ContinuationError::Precondition(format!(
                "m = {m} is outside (0, m0 = {m0})"
            )));
        }
        if i > 0 && m >= m_list[i - 1] {
            return Err(ContinuationError::Precondition("m_list must be strictly decreasing".into()));
        }
    }
    let unit = p_base.with_mass(1.0)?;
    let mut records = Vec::with_capacity(m_list.len());
    let mut warm: Option<Spectrum> = None;
    for &m in m_list {
        let frac = p_base.with_mass(m)?;
        let prob = LinkingProblem::new(frac, spec.clone());
        match minimax_search_with(&prob, cfg, warm.as_ref()) {
            Ok(state) => {
                let mut u = state.iterate;
                if let Some(prev) = &warm {
                    if u.dot(prev) < 0.0 {
                        u = u.scaled(-1.0);
                    }
                }
                let fun = prob.functional();
                let status = RecordStatus::from(state.status);
                if status == RecordStatus::Converged {
                    warm = Some(u.clone());
                }
                records.push(ContinuationRecord {
                    m,
                    alpha: state.level,
                    hs_norm_t: hs_norm(&u, &unit),
                    l2_norm: u.l2_norm(),
                    residual: fun.dual_norm(&fun.residual(&u)),
                    status,
                    rho: state.ridge.rho,
                    delta_hat: state.delta_hat,
                    solution: Some(u),
                    error: None,
                });
            }
            Err(e) => records.push(ContinuationRecord {
                m,
                alpha: f64::NAN,
                hs_norm_t: f64::NAN,
                l2_norm: f64::NAN,
                residual: f64::NAN,
                status: RecordStatus::Failed,
                rho: f64::NAN,
                delta_hat: f64::NAN,
                solution: None,
                error: Some(e.to_string()),
            }),
        }
    }
    let conv: Vec<&ContinuationRecord> = records.iter().filter(|r| r.status == RecordStatus::Converged).collect();
    let lambda_hat = conv.iter().map(|r| r.rho).fold(f64::INFINITY, f64::min);
    let delta_hat = conv.iter().map(|r| r.delta_hat).fold(f64::NEG_INFINITY, f64::max);
    let max_hs_norm = conv.iter().map(|r| r.hs_norm_t).fold(0.0, f64::max);
    let max_l2_norm = conv.iter().map(|r| r.l2_norm).fold(0.0, f64::max);
    let envelope_ok = conv.iter().all(|r| r.alpha >= lambda_hat && r.alpha <= delta_hat);
    let bounded = match (conv.first(), conv.last()) {
        (Some(a), Some(b)) => b.hs_norm_t / a.hs_norm_t < 10.0,
        _ => true,
    };
    Ok(Sweep {
        records,
        lambda_hat,
        delta_hat,
        max_hs_norm,
        max_l2_norm,
        envelope_ok,
        bounded,
    })
}

#[derive(Debug, Clone)]
pub struct Limit {
    pub solution: Spectrum,
    /// Dual-norm residual of the massless equation.
    pub residual: f64,
    pub level: f64,
    /// `∫ f(x,u)u`.
    pub f_u_integral: f64,
    pub hs_norm: f64,
    /// `level ∈ [λ̂, δ̂]` of the sweep.
    pub in_envelope: bool,
}

/// Newton refinement of the smallest-mass solution for the massless equation.
pub fn extract_limit(
    sweep: &Sweep,
    p_base: &FracParams,
    spec: &NonlinearitySpec,
    tol: f64,
) -> Result<Limit, ContinuationError> {
    if sweep.records.len() < 2 {
        return Err(ContinuationError::Precondition("at least two sweep records are required".into()));
    }
    let conv: Vec<&ContinuationRecord> = sweep.converged().collect();
    if conv.len() < 2 {
        if spec.is_zero_probe() || sweep.records.iter().all(|r| r.status == RecordStatus::NoNontrivialSolution) {
            let norm = sweep
                .records
                .iter()
                .filter_map(|r| r.solution.as_ref().map(|u| u.l2_norm()))
                .fold(0.0, f64::max);
            return Err(ContinuationError::LimitCollapsed { norm });
        }
        return Err(ContinuationError::Precondition("at least two converged records are required".into()));
    }
    let massless = p_base.with_mass(0.0)?;
    let unit = p_base.with_mass(1.0)?;
    let fun = Functional::new(massless, spec.clone());
    let last = conv[conv.len() - 1];
    let prev = conv[conv.len() - 2];
    let u_last = last.solution.as_ref().expect("converged record has a solution");
    let u_prev = prev.solution.as_ref().expect("converged record has a solution");

    let refined = refine(&fun, u_last, 0.01 * tol)?;
    let u = refined.solution;
    let norm = hs_norm(&u, &unit);
    if norm < 1e-6 {
        return Err(ContinuationError::LimitCollapsed { norm });
    }
    let step = hs_norm(&u_last.lincomb(1.0, u_prev, -1.0), &unit);
    let predicted = step * last.m / (prev.m - last.m);
    let observed = hs_norm(&u.lincomb(1.0, u_last, -1.0), &unit);
    if observed > 10.0 * predicted.max(1e-8) {
        return Err(ContinuationError::NotCauchy { observed, predicted });
    }
    let report = fun.evaluate(&u);
    let f_u_integral = spec.f_u_integral(&u);
    Ok(Limit {
        residual: report.grad_norm,
        level: report.value,
        f_u_integral,
        hs_norm: norm,
        in_envelope: report.value >= sweep.lambda_hat && report.value <= sweep.delta_hat,
        solution: u,
    })
}

/// `q_k = 2(N/(N-2s))^k`, `k = 0..count`; `None` when `N = 2s`.
pub fn moser_ladder(dim: usize, s: f64, count: usize) -> Option<Vec<f64>> {
    let n = dim as f64;
    let gap = n - 2.0 * s;
    if gap <= 1e-14 {
        return None;
    }
    Some((0..count).map(|k| 2.0 * (n / gap).powi(k as i32)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapRow {
    pub q: f64,
    pub norm: f64,
    /// `q` is a rung of the ladder.
    pub on_ladder: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bootstrap {
    pub rows: Vec<BootstrapRow>,
    /// Largest ratio of consecutive norms.
    pub max_growth: f64,
}

/// `|u|_{L^q}` for each `q`, flagged against the ladder for `(N, s)`.
pub fn bootstrap_diagnostic(u: &Spectrum, s: f64, q_list: &[f64]) -> Result<Bootstrap, ContinuationError> {
    if let Some(q) = q_list.iter().find(|q| !(**q >= 2.0 && q.is_finite())) {
        return Err(ContinuationError::Precondition(format!("exponent {q} is outside [2, ∞)")));
    }
    let field = inverse_transform_unchecked(u);
    let ladder = moser_ladder(u.grid().dim(), s, 12).unwrap_or_default();
    let mut rows = Vec::with_capacity(q_list.len());
    for &q in q_list {
        rows.push(BootstrapRow {
            q,
            norm: lq_norm(&field, q)?,
            on_ladder: ladder.iter().any(|l| (l - q).abs() <= 1e-12 * q),
        });
    }
    let max_growth = rows
        .windows(2)
        .filter(|w| w[0].norm > 0.0)
        .map(|w| w[1].norm / w[0].norm)
        .fold(0.0, f64::max);
    Ok(Bootstrap { rows, max_growth })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderProxy {
    /// Modulus-of-continuity exponent, capped at 0.999.
    pub alpha: f64,
    /// `α` from `|c_k| ~ |k|^{-(α+N/2)}` over the top half of the band.
    pub spectral_alpha: Option<f64>,
    pub top_band_fraction: f64,
}

fn slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Hölder exponent proxy of a trace from its discrete modulus of continuity.
pub fn holder_proxy(u: &Spectrum) -> Result<HolderProxy, ContinuationError> {
    let grid = *u.grid();
    let n = grid.n();
    let total = project_zero_mean(u).norm_sq();
    if total == 0.0 {
        return Err(ContinuationError::Precondition("holder proxy needs a nonconstant field".into()));
    }
    let mut top = 0.0;
    let mut shells = vec![(0.0, 0usize); n];
    for (j, c) in u.coeffs().iter().enumerate() {
        let k = grid.wavevector(j);
        let kmax = k.iter().map(|x| x.unsigned_abs() as usize).max().unwrap_or(0);
        if kmax > n / 4 {
            top += c.norm_sqr();
        }
        let kn = grid.k_squared(j).sqrt().round() as usize;
        if kn > 0 && kn < n {
            shells[kn].0 += c.norm_sqr();
            shells[kn].1 += 1;
        }
    }
    let fraction = top / total;
    if fraction > 0.1 {
        return Err(ContinuationError::InsufficientDecay { fraction });
    }

    let (mut lx, mut ly) = (Vec::new(), Vec::new());
    for (k, &(e, count)) in shells.iter().enumerate().take(n / 2).skip(n / 4 + 1) {
        if count > 0 && e > 0.0 {
            lx.push((k as f64).ln());
            ly.push(0.5 * (e / count as f64).ln());
        }
    }
    let spectral_alpha = slope(&lx, &ly).map(|b| -b - grid.dim() as f64 / 2.0);

    let field = inverse_transform_unchecked(u);
    let vals = field.values();
    let dx = grid.period() / n as f64;
    let jmax = (n / 16).max(3);
    let (mut hx, mut wy) = (Vec::new(), Vec::new());
    for j in 2..=jmax {
        let mut modulus: f64 = 0.0;
        for axis in 0..grid.dim() {
            for (flat, v) in vals.iter().enumerate() {
                let mut idx = grid.axis_indices(flat);
                idx[axis] = (idx[axis] + j) % n;
                modulus = modulus.max((vals[grid.flat_index(idx)] - v).abs());
            }
        }
        if modulus > 0.0 {
            hx.push((j as f64 * dx).ln());
            wy.push(modulus.ln());
        }
    }
    let alpha = slope(&hx, &wy).unwrap_or(0.0).clamp(0.0, 0.999);
    Ok(HolderProxy {
        alpha,
        spectral_alpha,
        top_band_fraction: fraction,
    })
}

/// Synthetic field `Σ_{k>=1} k^{-1}(a_k cos kωx + b_k sin kωx)` with random
/// unit phases; its modulus of continuity scales like `h^{1/2}`.
pub fn rough_field(grid: &TorusGrid, seed: u64) -> Spectrum {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![num_complex::Complex64::new(0.0, 0.0); grid.len()];
    for j in 0..grid.len() {
        let p = grid.partner(j);
        let k2 = grid.k_squared(j);
        if p <= j || k2 == 0.0 {
            continue;
        }
        let phase: f64 = rand::Rng::gen_range(&mut rng, 0.0..std::f64::consts::TAU);
        let c = num_complex::Complex64::from_polar(1.0 / k2.sqrt(), phase);
        out[j] = c;
        out[p] = c.conj();
    }
    Spectrum::new(*grid, out).expect("finite")
}
