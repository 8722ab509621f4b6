//! Batch front end: configuration parsing, the four run modes, and the
//! files they write.
//!
//! Exit codes: 0 success, 1 I/O, 2 parse or validation, 3 solver,
//! 4 verification failure.

pub mod verify;

use crate::continuation::{
    bootstrap_diagnostic, estimate_sobolev_constant, extract_limit, holder_proxy, moser_ladder,
    sobolev_exponent, sweep_m, Bootstrap, HolderProxy, Limit, SobolevEstimate, Sweep,
};
use crate::energy::{EnergyReport, Functional};
use crate::extension::{extend, DEFAULT_CYLINDER_NODES};
use crate::linking::{minimax_search, LinkingConfig, SolverState, SolverStatus};
use crate::nonlinearity::{NonlinearityError, NonlinearityKind, NonlinearitySpec};
use crate::spectral::{
    hs_norm, read_field, read_spectrum, write_spectrum, Field, FracParams, GridJson, Spectrum, TorusGrid,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid configuration at {path}: {message}")]
    Validation { path: String, message: String },
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Io { .. } => 1,
            Self::Parse { .. } | Self::Validation { .. } => 2,
            Self::Solver(_) => 3,
            Self::Verification(_) => 4,
        }
    }
}

fn invalid(path: &str, message: impl Display) -> CliError {
    CliError::Validation {
        path: path.into(),
        message: message.to_string(),
    }
}

fn io_err(path: &Path, e: impl Display) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Verify,
    Solve,
    Sweep,
    Diagnose,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        serde_json::from_value(Value::String(s.into())).map_err(|_| format!("unknown mode {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FracJson {
    pub s: f64,
    pub m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindJson {
    PurePower,
    ModulatedPower,
    ZeroProbe,
}

/// Coefficient `a(x)`: a path to a field file or the grid values inline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldRef {
    Path(String),
    Values(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearityJson {
    pub kind: KindJson,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(default)]
    pub r0: Option<f64>,
    #[serde(default)]
    pub a: Option<FieldRef>,
}

/// The configuration document as written on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub grid: GridJson,
    pub frac: FracJson,
    pub nonlinearity: NonlinearityJson,
    #[serde(default)]
    pub solver: LinkingConfig,
    pub mode: Mode,
    #[serde(default)]
    pub m_list: Option<Vec<f64>>,
    #[serde(default)]
    pub output_dir: Option<String>,
    /// Overrides `solver.seed`.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Solution file read by `diagnose`.
    #[serde(default)]
    pub solution: Option<String>,
    /// Lebesgue exponents for the bootstrap diagnostic.
    #[serde(default)]
    pub q_list: Option<Vec<f64>>,
}

/// A validated configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub grid: TorusGrid,
    pub frac: FracParams,
    pub spec: NonlinearitySpec,
    pub solver: LinkingConfig,
    pub mode: Mode,
    pub m_list: Option<Vec<f64>>,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub solution: Option<PathBuf>,
    pub q_list: Option<Vec<f64>>,
    /// Sobolev estimate, computed for sweep mode.
    pub sobolev: Option<SobolevEstimate>,
}

/// Parses and validates a configuration; relative paths resolve against the
/// working directory.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    parse_config_in(text, Path::new("."))
}

/// As [`parse_config`], resolving relative paths against `base`.
pub fn parse_config_in(text: &str, base: &Path) -> Result<RunConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: ConfigDocument = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Parse {
            path: if path.is_empty() { ".".into() } else { path },
            message: e.into_inner().to_string(),
        }
    })?;
    validate(doc, base)
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn positive_finite(path: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(path, format!("{v} must be positive and finite")))
    }
}

fn build_spec(
    nl: &NonlinearityJson,
    grid: &TorusGrid,
    frac: &FracParams,
    base: &Path,
) -> Result<NonlinearitySpec, CliError> {
    if nl.kind == KindJson::ZeroProbe {
        if nl.a.is_some() {
            return Err(invalid("nonlinearity.a", "zero_probe takes no coefficient"));
        }
        return Ok(NonlinearitySpec::zero_probe(grid));
    }
    let p = nl.p.ok_or_else(|| invalid("nonlinearity.p", "missing growth exponent"))?;
    let kind = match (&nl.kind, &nl.a) {
        (KindJson::PurePower, None) => NonlinearityKind::PurePower,
        (KindJson::PurePower, Some(_)) => {
            return Err(invalid("nonlinearity.a", "pure_power takes no coefficient"))
        }
        (KindJson::ModulatedPower, None) => {
            return Err(invalid("nonlinearity.a", "modulated_power needs a coefficient"))
        }
        (KindJson::ModulatedPower, Some(r)) => {
            let a = load_coefficient(r, grid, base)?;
            if !(a.min() > 0.0) {
                return Err(invalid(
                    "nonlinearity.a",
                    format!("(f6) requires a(x) > 0; minimum is {}", a.min()),
                ));
            }
            NonlinearityKind::ModulatedPower { a }
        }
        (KindJson::ZeroProbe, _) => unreachable!(),
    };
    let spec = NonlinearitySpec::new(kind, p, grid, frac).map_err(|e| match e {
        NonlinearityError::InvalidExponent { .. } => invalid("nonlinearity.p", format!("(f4) {e}")),
        NonlinearityError::GridMismatch => invalid("nonlinearity.a", e),
        other => invalid("nonlinearity", other),
    })?;
    let mu = nl.mu.unwrap_or(spec.mu());
    let r0 = nl.r0.unwrap_or(spec.r0());
    spec.with_ar(mu, r0).map_err(|e| match e {
        NonlinearityError::InvalidMu { .. } => invalid("nonlinearity.mu", format!("(f5) {e}")),
        NonlinearityError::InvalidThreshold(_) => invalid("nonlinearity.r0", e),
        other => invalid("nonlinearity", other),
    })
}

fn load_coefficient(r: &FieldRef, grid: &TorusGrid, base: &Path) -> Result<Field, CliError> {
    let field = match r {
        FieldRef::Values(v) => {
            if v.len() != grid.len() {
                return Err(invalid(
                    "nonlinearity.a",
                    format!("expected {} values, got {}", grid.len(), v.len()),
                ));
            }
            Field::new(*grid, v.clone()).map_err(|e| invalid("nonlinearity.a", e))?
        }
        FieldRef::Path(p) => {
            let path = resolve(base, p);
            let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
            let v: Value = serde_json::from_str(&text).map_err(|e| invalid("nonlinearity.a", e))?;
            read_field(&v).map_err(|e| invalid("nonlinearity.a", e))?
        }
    };
    if field.grid() != grid {
        return Err(invalid("nonlinearity.a", "coefficient grid differs from the config grid"));
    }
    Ok(field)
}

fn validate(doc: ConfigDocument, base: &Path) -> Result<RunConfig, CliError> {
    let grid = doc.grid.to_grid().map_err(|e| invalid("grid", e))?;
    let frac = FracParams::new(doc.frac.s, doc.frac.m).map_err(|e| {
        let path = if doc.frac.s > 0.0 && doc.frac.s < 1.0 { "frac.m" } else { "frac.s" };
        invalid(path, e)
    })?;
    frac.check_dimension(&grid).map_err(|e| invalid("frac.s", e))?;
    let spec = build_spec(&doc.nonlinearity, &grid, &frac, base)?;
    let mut solver = doc.solver;
    if let Some(seed) = doc.seed {
        solver.seed = seed;
    }
    solver.validate().map_err(|e| invalid("solver", e))?;

    let mut sobolev = None;
    match doc.mode {
        Mode::Sweep => {
            let list = doc.m_list.as_ref().ok_or_else(|| invalid("m_list", "sweep mode needs m_list"))?;
            if list.len() < 2 {
                return Err(invalid("m_list", "at least two masses are required"));
            }
            for (i, &m) in list.iter().enumerate() {
                positive_finite(&format!("m_list[{i}]"), m)?;
                if i > 0 && m >= list[i - 1] {
                    return Err(invalid(&format!("m_list[{i}]"), "masses must strictly decrease"));
                }
            }
            let q = sobolev_exponent(&grid, &frac, spec.p()).map_err(|e| invalid("frac", e))?;
            let est = estimate_sobolev_constant(&grid, &frac, q, solver.seed);
            if let Some(i) = list.iter().position(|&m| m >= est.m0) {
                return Err(invalid(
                    &format!("m_list[{i}]"),
                    format!("m = {} is not below m0 = {:.6}", list[i], est.m0),
                ));
            }
            sobolev = Some(est);
        }
        Mode::Diagnose => {
            if doc.solution.is_none() && doc.output_dir.is_none() {
                return Err(invalid("solution", "diagnose needs a solution file"));
            }
        }
        Mode::Verify | Mode::Solve => {}
    }
    if let Some(qs) = &doc.q_list {
        for (i, &q) in qs.iter().enumerate() {
            if !(q >= 2.0 && q.is_finite()) {
                return Err(invalid(&format!("q_list[{i}]"), format!("{q} is outside [2, ∞)")));
            }
        }
    }
    Ok(RunConfig {
        grid,
        frac,
        spec,
        solver: solver.clone(),
        mode: doc.mode,
        m_list: doc.m_list,
        output_dir: resolve(base, doc.output_dir.as_deref().unwrap_or(".")),
        seed: doc.seed.unwrap_or(solver.seed),
        solution: doc.solution.map(|s| resolve(base, &s)),
        q_list: doc.q_list,
        sobolev,
    })
}

/// Command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    pub solver_trace: bool,
    pub dump_extension: bool,
}

/// Summary returned to the binary.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub lines: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: SolverStatus,
    pub level: f64,
    pub energy: EnergyReport,
    /// `H^{-s}` norm of the residual.
    pub residual: f64,
    pub hs_norm: f64,
    pub rho: f64,
    pub eta: f64,
    pub delta_hat: f64,
    #[serde(rename = "R")]
    pub r_cap: f64,
    #[serde(rename = "R_prime")]
    pub r_prime: f64,
    pub deform_sweeps: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitReport {
    pub residual: f64,
    pub level: f64,
    pub f_u_integral: f64,
    pub hs_norm: f64,
    pub in_envelope: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepReport {
    pub sobolev: SobolevEstimate,
    pub lambda_hat: f64,
    pub delta_hat: f64,
    pub max_hs_norm: f64,
    pub max_l2_norm: f64,
    pub envelope_ok: bool,
    pub bounded: bool,
    pub alpha_ratio: Option<f64>,
    pub limit: Option<LimitReport>,
    pub limit_error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnoseReport {
    pub source: String,
    pub bootstrap: Bootstrap,
    pub holder: Option<HolderProxy>,
    pub holder_error: Option<String>,
}

struct Writer {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Writer {
    fn new(dir: PathBuf) -> Result<Self, CliError> {
        fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
        Ok(Self { dir, files: Vec::new() })
    }

    fn bytes(&mut self, name: &str, data: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, data).map_err(|e| io_err(&path, e))?;
        self.files.push(path);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, v: &T) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(v).expect("artifact serializes");
        self.bytes(name, text.as_bytes())
    }

    fn csv(&mut self, name: &str, fill: impl FnOnce(&mut Vec<u8>) -> Result<(), csv::Error>) -> Result<(), CliError> {
        let mut buf = Vec::new();
        fill(&mut buf).map_err(|e| io_err(&self.dir.join(name), e))?;
        self.bytes(name, &buf)
    }
}

/// Runs the configured mode and writes its artifacts.
pub fn run(cfg: &RunConfig, opts: &RunOptions) -> Result<RunSummary, CliError> {
    let mut cfg = cfg.clone();
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
        cfg.solver.seed = seed;
    }
    let dir = opts.output.clone().unwrap_or_else(|| cfg.output_dir.clone());
    let mut out = Writer::new(dir)?;
    let mut lines = Vec::new();
    let result = match cfg.mode {
        Mode::Verify => run_verify(&cfg, &mut out, &mut lines),
        Mode::Solve => run_solve(&cfg, opts, &mut out, &mut lines),
        Mode::Sweep => run_sweep(&cfg, &mut out, &mut lines),
        Mode::Diagnose => run_diagnose(&cfg, &mut out, &mut lines),
    };
    result.map(|()| RunSummary {
        files: out.files,
        lines,
    })
}

fn run_verify(cfg: &RunConfig, out: &mut Writer, lines: &mut Vec<String>) -> Result<(), CliError> {
    let report = verify::run_verify(cfg);
    for p in &report.properties {
        lines.push(format!(
            "{} {}::{} value={:.3e} tol={:.1e}",
            if p.passed { "PASS" } else { "FAIL" },
            p.module,
            p.name,
            p.value,
            p.tolerance
        ));
    }
    out.json("verify_report.json", &report)?;
    let failed = report.properties.iter().filter(|p| !p.passed).count();
    if failed > 0 {
        return Err(CliError::Verification(format!(
            "{failed} of {} properties failed",
            report.properties.len()
        )));
    }
    Ok(())
}

fn solve_report(state: &SolverState, fun: &Functional, seed: u64) -> SolveReport {
    let energy = fun.evaluate(&state.iterate);
    SolveReport {
        status: state.status,
        level: state.level,
        residual: energy.grad_norm,
        energy,
        hs_norm: hs_norm(&state.iterate, fun.params()),
        rho: state.ridge.rho,
        eta: state.ridge.eta,
        delta_hat: state.delta_hat,
        r_cap: state.r_cap,
        r_prime: state.r_prime,
        deform_sweeps: state.history.len(),
        seed,
    }
}

fn run_solve(cfg: &RunConfig, opts: &RunOptions, out: &mut Writer, lines: &mut Vec<String>) -> Result<(), CliError> {
    let state = minimax_search(&cfg.frac, &cfg.spec, &cfg.solver).map_err(|e| CliError::Solver(e.to_string()))?;
    let fun = Functional::new(cfg.frac, cfg.spec.clone());
    let report = solve_report(&state, &fun, cfg.solver.seed);
    out.json("solution.json", &write_spectrum(&state.iterate))?;
    out.json("energy.json", &report)?;
    if opts.solver_trace {
        out.csv("solver_trace.csv", |b| state.write_trace_csv(b))?;
    }
    if opts.dump_extension {
        match extend(&state.iterate, &cfg.frac) {
            Ok(ext) => out.json("extension.json", &ext.sample(DEFAULT_CYLINDER_NODES).to_json())?,
            Err(e) => lines.push(format!("extension skipped: {e}")),
        }
    }
    lines.push(format!("status   {:?}", report.status));
    lines.push(format!("level    {:.12}", report.level));
    lines.push(format!("ridge    {:.6} (eta = {:.6})", report.rho, report.eta));
    lines.push(format!("residual {:.3e}", report.residual));
    lines.push(format!("H^s norm {:.6}", report.hs_norm));
    match state.status {
        SolverStatus::Converged => Ok(()),
        other => Err(CliError::Solver(format!("solver ended with status {other:?}"))),
    }
}

fn format_mass(m: f64) -> String {
    format!("{m}")
}

fn run_sweep(cfg: &RunConfig, out: &mut Writer, lines: &mut Vec<String>) -> Result<(), CliError> {
    let list = cfg.m_list.as_ref().expect("validated sweep has m_list");
    let sobolev = match cfg.sobolev {
        Some(s) => s,
        None => {
            let q = sobolev_exponent(&cfg.grid, &cfg.frac, cfg.spec.p()).map_err(|e| invalid("frac", e))?;
            estimate_sobolev_constant(&cfg.grid, &cfg.frac, q, cfg.solver.seed)
        }
    };
    let sweep: Sweep =
        sweep_m(list, &cfg.frac, &cfg.spec, &cfg.solver, sobolev.m0).map_err(|e| CliError::Solver(e.to_string()))?;
    out.csv("sweep.csv", |b| sweep.write_csv(b))?;
    for r in &sweep.records {
        if let Some(u) = &r.solution {
            out.json(&format!("sol_m{}.json", format_mass(r.m)), &write_spectrum(u))?;
        }
        lines.push(format!(
            "m = {:<8} {:?}  alpha = {:.8}  |u|_Hs = {:.6}  residual = {:.2e}",
            r.m, r.status, r.alpha, r.hs_norm_t, r.residual
        ));
    }
    let alphas: Vec<f64> = sweep.converged().map(|r| r.alpha).collect();
    let alpha_ratio = (!alphas.is_empty() && alphas.iter().all(|a| *a > 0.0)).then(|| {
        alphas.iter().cloned().fold(0.0, f64::max) / alphas.iter().cloned().fold(f64::INFINITY, f64::min)
    });
    let limit: Result<Limit, _> = extract_limit(&sweep, &cfg.frac, &cfg.spec, cfg.solver.ps_tol);
    let (limit_report, limit_error) = match &limit {
        Ok(l) => {
            out.json("limit.json", &write_spectrum(&l.solution))?;
            lines.push(format!(
                "limit    level = {:.8}  residual = {:.2e}  ∫f(u)u = {:.6}",
                l.level, l.residual, l.f_u_integral
            ));
            (
                Some(LimitReport {
                    residual: l.residual,
                    level: l.level,
                    f_u_integral: l.f_u_integral,
                    hs_norm: l.hs_norm,
                    in_envelope: l.in_envelope,
                }),
                None,
            )
        }
        Err(e) => (None, Some(e.to_string())),
    };
    out.json(
        "sweep_report.json",
        &SweepReport {
            sobolev,
            lambda_hat: sweep.lambda_hat,
            delta_hat: sweep.delta_hat,
            max_hs_norm: sweep.max_hs_norm,
            max_l2_norm: sweep.max_l2_norm,
            envelope_ok: sweep.envelope_ok,
            bounded: sweep.bounded,
            alpha_ratio,
            limit: limit_report,
            limit_error: limit_error.clone(),
        },
    )?;
    if let Some(e) = limit_error {
        return Err(CliError::Solver(e));
    }
    if sweep.converged().count() != sweep.records.len() {
        return Err(CliError::Solver("not every mass converged".into()));
    }
    Ok(())
}

fn default_q_list(dim: usize, s: f64) -> Vec<f64> {
    moser_ladder(dim, s, 6).unwrap_or_else(|| vec![2.0, 4.0, 8.0, 16.0, 32.0, 64.0])
}

fn run_diagnose(cfg: &RunConfig, out: &mut Writer, lines: &mut Vec<String>) -> Result<(), CliError> {
    let path = cfg
        .solution
        .clone()
        .unwrap_or_else(|| cfg.output_dir.join("solution.json"));
    let u = read_solution(&path)?;
    if u.grid() != &cfg.grid {
        return Err(invalid("solution", "solution grid differs from the config grid"));
    }
    let q_list = cfg
        .q_list
        .clone()
        .unwrap_or_else(|| default_q_list(cfg.grid.dim(), cfg.frac.s()));
    let bootstrap = bootstrap_diagnostic(&u, cfg.frac.s(), &q_list).map_err(|e| invalid("q_list", e))?;
    for r in &bootstrap.rows {
        lines.push(format!("|u|_L{:<8.4} = {:.8}{}", r.q, r.norm, if r.on_ladder { "  (ladder)" } else { "" }));
    }
    let (holder, holder_error) = match holder_proxy(&u) {
        Ok(h) => {
            lines.push(format!("holder   alpha = {:.4}  spectral = {:?}", h.alpha, h.spectral_alpha));
            (Some(h), None)
        }
        Err(e) => {
            lines.push(format!("holder   {e}"));
            (None, Some(e.to_string()))
        }
    };
    out.json(
        "diagnose.json",
        &DiagnoseReport {
            source: path.display().to_string(),
            bootstrap,
            holder,
            holder_error,
        },
    )
}

/// Reads a spectrum or field file written by the solver.
pub fn read_solution(path: &Path) -> Result<Spectrum, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let parsed = match v.get("kind").and_then(Value::as_str) {
        Some("field") => read_field(&v).map(|f| crate::spectral::forward_transform(&f)),
        _ => read_spectrum(&v),
    };
    parsed.map_err(|e| CliError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
