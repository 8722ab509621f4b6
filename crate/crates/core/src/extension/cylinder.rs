use super::{mode_rates, ExtensionError, ExtensionField};
use crate::bessel::{extrapolate_to_zero, ThetaProfile};
use crate::quadrature::HalfLineRule;
use crate::spectral::GridJson;
use crate::spectral::{
    forward_transform, hs_norm, inverse_transform_unchecked, Field, FracParams, Spectrum, TorusGrid,
};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::sync::Arc;

/// Node count of each weighted rule when sampling cylinder functions.
pub const DEFAULT_CYLINDER_NODES: usize = 192;

/// A function on the half-cylinder sampled on two weighted rules: values
/// on a `y^{1-2s}` rule and the flux `y^{1-2s}∂_y v` on a `y^{2s-1}` rule.
/// Both arrays are row-major with the grid point as the slow index.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderFunction {
    grid: TorusGrid,
    s: f64,
    value_rule: HalfLineRule,
    values: Vec<f64>,
    flux_rule: HalfLineRule,
    flux: Vec<f64>,
}

impl CylinderFunction {
    pub fn new(
        grid: TorusGrid,
        s: f64,
        value_rule: HalfLineRule,
        values: Vec<f64>,
        flux_rule: HalfLineRule,
        flux: Vec<f64>,
    ) -> Result<Self, ExtensionError> {
        let bad = |m: &str| Err(ExtensionError::Format(m.to_string()));
        if !(s > 0.0 && s < 1.0) {
            return bad("s must lie in (0,1)");
        }
        if (value_rule.gamma - (1.0 - 2.0 * s)).abs() > 1e-12
            || (flux_rule.gamma - (2.0 * s - 1.0)).abs() > 1e-12
        {
            return bad("rule exponents do not match s");
        }
        for rule in [&value_rule, &flux_rule] {
            if rule.nodes.len() < 3 || rule.nodes.len() != rule.weights.len() {
                return bad("each rule needs at least three nodes with weights");
            }
            if rule.nodes.windows(2).any(|w| !(w[0] < w[1])) || rule.nodes[0] <= 0.0 {
                return bad("nodes must be positive and strictly increasing");
            }
            if rule.weights.iter().any(|w| !(*w > 0.0)) {
                return bad("weights must be positive");
            }
        }
        if values.len() != grid.len() * value_rule.len() || flux.len() != grid.len() * flux_rule.len()
        {
            return bad("sample arrays do not match grid × nodes");
        }
        if values.iter().chain(&flux).any(|v| !v.is_finite()) {
            return bad("non-finite sample");
        }
        Ok(Self {
            grid,
            s,
            value_rule,
            values,
            flux_rule,
            flux,
        })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn y_nodes(&self) -> &[f64] {
        &self.value_rule.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.value_rule.weights
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn flux_rule(&self) -> &HalfLineRule {
        &self.flux_rule
    }

    pub fn flux(&self) -> &[f64] {
        &self.flux
    }

    /// Samples of `v(·, y_i)` at value node `i`.
    pub fn value_row(&self, i: usize) -> Field {
        let ny = self.value_rule.len();
        let vals = (0..self.grid.len()).map(|j| self.values[j * ny + i]).collect();
        Field::new(self.grid, vals).expect("finite row")
    }

    /// `∬ y^{1-2s}(|∇_x v|² + m²v² + (∂_y v)²)`; the horizontal part uses
    /// Parseval on each value row.
    pub fn energy(&self, p: &FracParams) -> f64 {
        let w = self.grid.omega();
        let mass = p.m() * p.m();
        let sym: Vec<f64> = (0..self.grid.len())
            .map(|k| w * w * self.grid.k_squared(k) + mass)
            .collect();
        let mut horizontal = 0.0;
        for (i, wi) in self.value_rule.weights.iter().enumerate() {
            let row = forward_transform(&self.value_row(i));
            horizontal += wi * row.weighted_norm_sq(&sym);
        }
        let nf = self.flux_rule.len();
        let mut vertical = 0.0;
        for j in 0..self.grid.len() {
            for (i, wi) in self.flux_rule.weights.iter().enumerate() {
                vertical += wi * self.flux[j * nf + i].powi(2);
            }
        }
        horizontal + vertical * self.grid.cell_volume()
    }

    /// Trace at `y = 0`, extrapolated from the three lowest value nodes
    /// under the model `v₀ + a·y^{2s} + b·y²` (the leading terms of every
    /// Bessel-profile mode).
    pub fn trace(&self) -> Spectrum {
        let ys = &self.value_rule.nodes[..3];
        let exps = [2.0 * self.s, 2.0];
        let ny = self.value_rule.len();
        let vals: Vec<f64> = (0..self.grid.len())
            .map(|j| {
                let row = &self.values[j * ny..j * ny + 3];
                extrapolate_to_zero(ys, row, &exps).expect("distinct nodes")
            })
            .collect();
        forward_transform(&Field::new(self.grid, vals).expect("finite trace"))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(CylinderJson {
            grid: (&self.grid).into(),
            s: self.s,
            scale: self.value_rule.scale,
            y_nodes: self.value_rule.nodes.clone(),
            weights: self.value_rule.weights.clone(),
            values: self.values.clone(),
            flux_nodes: self.flux_rule.nodes.clone(),
            flux_weights: self.flux_rule.weights.clone(),
            flux: self.flux.clone(),
        })
        .expect("cylinder serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, ExtensionError> {
        let doc: CylinderJson =
            serde_json::from_value(v.clone()).map_err(|e| ExtensionError::Format(e.to_string()))?;
        let grid = doc.grid.to_grid()?;
        let value_rule = HalfLineRule {
            gamma: 1.0 - 2.0 * doc.s,
            scale: doc.scale,
            nodes: doc.y_nodes,
            weights: doc.weights,
        };
        let flux_rule = HalfLineRule {
            gamma: 2.0 * doc.s - 1.0,
            scale: doc.scale,
            nodes: doc.flux_nodes,
            weights: doc.flux_weights,
        };
        Self::new(grid, doc.s, value_rule, doc.values, flux_rule, doc.flux)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CylinderJson {
    grid: GridJson,
    s: f64,
    scale: f64,
    y_nodes: Vec<f64>,
    weights: Vec<f64>,
    values: Vec<f64>,
    flux_nodes: Vec<f64>,
    flux_weights: Vec<f64>,
    flux: Vec<f64>,
}

/// Vertical profile attached to one Fourier mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileKind {
    /// `θ(a λ_k y)`; `a = 1` is the minimal-energy extension.
    Theta { scale: f64 },
    /// `e^{-r λ_k y}`.
    Exponential { rate: f64 },
}

impl ProfileKind {
    fn speed(&self) -> f64 {
        match *self {
            ProfileKind::Theta { scale } => scale,
            ProfileKind::Exponential { rate } => rate,
        }
    }
}

/// Cylinder functions of the form `Σ c_k φ_k(y) e^{iωk·x}` with
/// per-mode profiles; these generate exact extensions and competitors.
#[derive(Debug, Clone)]
pub struct ModalCylinder {
    base: Spectrum,
    params: FracParams,
    profile: Arc<ThetaProfile>,
    kinds: Vec<ProfileKind>,
    rates: Vec<f64>,
}

impl ModalCylinder {
    /// The sampled form of an extension.
    pub fn exact(ext: &ExtensionField) -> Self {
        Self {
            base: ext.trace().clone(),
            params: *ext.params(),
            profile: Arc::new(ext.profile().clone()),
            kinds: vec![ProfileKind::Theta { scale: 1.0 }; ext.trace().coeffs().len()],
            rates: ext.rates().to_vec(),
        }
    }

    pub fn uniform(base: &Spectrum, p: &FracParams, kind: ProfileKind) -> Result<Self, ExtensionError> {
        Self::per_mode(base, p, vec![kind; base.coeffs().len()])
    }

    /// Per-mode profiles; mode `-k` takes the profile of `k` so the function
    /// stays real.
    pub fn per_mode(
        base: &Spectrum,
        p: &FracParams,
        mut kinds: Vec<ProfileKind>,
    ) -> Result<Self, ExtensionError> {
        let g = base.grid();
        if kinds.len() != g.len() {
            return Err(ExtensionError::Format("one profile per mode required".into()));
        }
        if kinds.iter().any(|k| !(k.speed() > 0.0)) {
            return Err(ExtensionError::DomainError("profile speeds must be positive".into()));
        }
        for j in 0..g.len() {
            let q = g.partner(j);
            if q < j {
                kinds[j] = kinds[q];
            }
        }
        Ok(Self {
            base: base.clone(),
            params: *p,
            profile: Arc::new(ThetaProfile::new(p.s())?),
            kinds,
            rates: mode_rates(g, p),
        })
    }

    fn phi(&self, k: usize, y: f64) -> (f64, f64) {
        let l = self.rates[k];
        if l == 0.0 {
            return (1.0, 0.0);
        }
        let s = self.params.s();
        match self.kinds[k] {
            ProfileKind::Theta { scale } => {
                let r = scale * l;
                (self.profile.jet(r * y).value, r.powf(2.0 * s) * self.profile.flux(r * y))
            }
            ProfileKind::Exponential { rate } => {
                let r = rate * l;
                let e = (-r * y).exp();
                (e, -r * y.powf(1.0 - 2.0 * s) * e)
            }
        }
    }

    /// Slowest decay rate over active modes.
    fn slowest(&self) -> f64 {
        self.base
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(k, c)| c.norm_sqr() > 0.0 && self.rates[*k] > 0.0)
            .map(|(k, _)| self.rates[k] * self.kinds[k].speed())
            .fold(f64::INFINITY, f64::min)
    }

    /// Samples on rules with `n` nodes each, scaled to the slowest mode.
    pub fn sample(&self, n: usize) -> CylinderFunction {
        let s = self.params.s();
        let slow = self.slowest();
        let scale = if slow.is_finite() { 4.0 / slow } else { 1.0 };
        let value_rule = HalfLineRule::new(1.0 - 2.0 * s, n, scale);
        let flux_rule = HalfLineRule::new(2.0 * s - 1.0, n, scale);
        let values = self.tabulate(&value_rule.nodes, |k, y| self.phi(k, y).0);
        let flux = self.tabulate(&flux_rule.nodes, |k, y| self.phi(k, y).1);
        CylinderFunction::new(*self.base.grid(), s, value_rule, values, flux_rule, flux)
            .expect("sampled cylinder is well formed")
    }

    fn tabulate(&self, nodes: &[f64], prof: impl Fn(usize, f64) -> f64) -> Vec<f64> {
        let g = *self.base.grid();
        let ny = nodes.len();
        let mut out = vec![0.0; g.len() * ny];
        for (i, &y) in nodes.iter().enumerate() {
            let coeffs = self
                .base
                .coeffs()
                .iter()
                .enumerate()
                .map(|(k, c)| c * prof(k, y))
                .collect();
            let row = inverse_transform_unchecked(&Spectrum::new(g, coeffs).expect("finite"));
            for (j, v) in row.values().iter().enumerate() {
                out[j * ny + i] = *v;
            }
        }
        out
    }

    /// Samples with `n` and `2n` nodes and returns the finer sample once
    /// both energies agree to `1e-6` relative.
    pub fn sample_converged(&self, n: usize) -> Result<CylinderFunction, ExtensionError> {
        let coarse = self.sample(n);
        let fine = self.sample(2 * n);
        let (ec, ef) = (coarse.energy(&self.params), fine.energy(&self.params));
        if (ec - ef).abs() > 1e-6 * ef.abs().max(f64::MIN_POSITIVE) {
            return Err(ExtensionError::QuadratureUnconverged { coarse: ec, fine: ef });
        }
        Ok(fine)
    }

    /// Closed-form energy, mode by mode, from `κ_s` and Gamma integrals.
    pub fn analytic_energy(&self) -> f64 {
        let s = self.params.s();
        let kappa = self.profile.kappa();
        self.base
            .coeffs()
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let l = self.rates[k];
                if l == 0.0 {
                    return 0.0;
                }
                let per = match self.kinds[k] {
                    ProfileKind::Theta { scale } => {
                        kappa * scale.powf(2.0 * s - 2.0) * (s + scale * scale * (1.0 - s))
                    }
                    ProfileKind::Exponential { rate } => {
                        (1.0 + rate * rate) * gamma(2.0 - 2.0 * s) * (2.0 * rate).powf(2.0 * s - 2.0)
                    }
                };
                c.norm_sqr() * l.powf(2.0 * s) * per
            })
            .sum()
    }
}

fn check_order(v: &CylinderFunction, p: &FracParams) -> Result<(), ExtensionError> {
    if (v.s - p.s()).abs() > 1e-15 {
        return Err(ExtensionError::DomainError("cylinder order differs from s".into()));
    }
    Ok(())
}

/// `‖v‖² - κ_s |Tr v|²_{H^s}`: nonnegative, zero exactly on extensions.
pub fn sharp_trace_gap(v: &CylinderFunction, p: &FracParams) -> Result<f64, ExtensionError> {
    check_order(v, p)?;
    let kappa = crate::bessel::kappa(p.s())?;
    Ok(v.energy(p) - kappa * hs_norm(&v.trace(), p).powi(2))
}

/// `‖v‖² - κ_s m^{2s} |Tr v|²_{L²}`: nonnegative, zero exactly on
/// multiples of `θ(my)`.
pub fn ground_gap(v: &CylinderFunction, p: &FracParams) -> Result<f64, ExtensionError> {
    if p.m() == 0.0 {
        return Err(ExtensionError::DomainError("ground gap needs m > 0".into()));
    }
    check_order(v, p)?;
    let kappa = crate::bessel::kappa(p.s())?;
    Ok(v.energy(p) - kappa * p.mass_symbol() * v.trace().norm_sq())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::kappa;
    use crate::extension::extend;
    use std::f64::consts::PI;

    fn grid() -> TorusGrid {
        TorusGrid::new(1, 2.0 * PI, 16).unwrap()
    }

    fn mixed() -> Spectrum {
        forward_transform(
            &Field::from_fn(grid(), |x| 0.4 + x[0].sin() - 0.3 * (2.0 * x[0]).cos() + 0.1 * (3.0 * x[0]).sin())
                .unwrap(),
        )
    }

    #[test]
    fn sampled_extension_energy_and_gap() {
        for s in [0.25, 0.5, 0.75] {
            let p = FracParams::new(s, 1.0).unwrap();
            let v = extend(&mixed(), &p).unwrap();
            let cyl = ModalCylinder::exact(&v).sample_converged(DEFAULT_CYLINDER_NODES).unwrap();
            let e = cyl.energy(&p);
            let want = kappa(s).unwrap() * hs_norm(&mixed(), &p).powi(2);
            assert!((e / want - 1.0).abs() < 1e-8, "s={s}: {e} vs {want}");
            let gap = sharp_trace_gap(&cyl, &p).unwrap();
            assert!(gap.abs() < 1e-6 * e, "s={s}: gap {gap}");
        }
    }

    #[test]
    fn wrong_decay_has_positive_gap() {
        let p = FracParams::new(0.5, 0.0).unwrap();
        let u = crate::spectral::project_zero_mean(&mixed());
        let c = ModalCylinder::uniform(&u, &p, ProfileKind::Exponential { rate: 2.0 }).unwrap();
        let cyl = c.sample(DEFAULT_CYLINDER_NODES);
        assert!((cyl.energy(&p) / c.analytic_energy() - 1.0).abs() < 1e-9);
        let gap = sharp_trace_gap(&cyl, &p).unwrap();
        assert!((gap / (0.25 * hs_norm(&u, &p).powi(2)) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn ground_gap_cases() {
        let p = FracParams::new(0.3, 0.8).unwrap();
        let g = grid();
        let five = forward_transform(&Field::new(g, vec![5.0; 16]).unwrap());
        let v = extend(&five, &p).unwrap();
        let cyl = ModalCylinder::exact(&v).sample(DEFAULT_CYLINDER_NODES);
        let gg = ground_gap(&cyl, &p).unwrap();
        assert!(gg.abs() < 1e-6 * cyl.energy(&p), "{gg}");

        let cosx = forward_transform(&Field::from_fn(g, |x| x[0].cos()).unwrap());
        let cyl = ModalCylinder::exact(&extend(&cosx, &p).unwrap()).sample(DEFAULT_CYLINDER_NODES);
        let want = kappa(0.3).unwrap() * ((1.0 + 0.64f64).powf(0.3) - 0.8f64.powf(0.6)) * PI;
        let gg = ground_gap(&cyl, &p).unwrap();
        assert!((gg / want - 1.0).abs() < 1e-6, "{gg} vs {want}");

        let p0 = FracParams::new(0.3, 0.0).unwrap();
        assert!(matches!(ground_gap(&cyl, &p0), Err(ExtensionError::DomainError(_))));
    }

    #[test]
    fn zero_function_has_zero_gaps() {
        let p = FracParams::new(0.4, 1.0).unwrap();
        let c = ModalCylinder::uniform(&Spectrum::zeros(grid()), &p, ProfileKind::Theta { scale: 1.0 }).unwrap();
        let cyl = c.sample(16);
        assert_eq!(cyl.energy(&p), 0.0);
        assert_eq!(sharp_trace_gap(&cyl, &p).unwrap(), 0.0);
    }

    #[test]
    fn json_roundtrip() {
        let p = FracParams::new(0.3, 1.0).unwrap();
        let cyl = ModalCylinder::exact(&extend(&mixed(), &p).unwrap()).sample(12);
        let text = serde_json::to_string(&cyl.to_json()).unwrap();
        let back = CylinderFunction::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, cyl);
    }
}
