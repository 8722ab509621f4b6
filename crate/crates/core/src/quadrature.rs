//! Gauss–Jacobi rules and weighted half-line quadrature for
//! `∫₀^∞ y^γ g(y) dy` with `γ > -1` and exponentially decaying `g`.

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::gamma::ln_gamma;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

type Rule = Arc<(Vec<f64>, Vec<f64>)>;
type RuleCache = Mutex<HashMap<(usize, u64, u64), Rule>>;

/// [`gauss_jacobi`] memoized on `(n, α, β)`.
pub fn gauss_jacobi_cached(n: usize, alpha: f64, beta: f64) -> Rule {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    let key = (n, alpha.to_bits(), beta.to_bits());
    let cache = CACHE.get_or_init(Default::default);
    if let Some(rule) = cache.lock().expect("rule cache").get(&key) {
        return rule.clone();
    }
    let rule = Arc::new(gauss_jacobi(n, alpha, beta));
    cache.lock().expect("rule cache").insert(key, rule.clone());
    rule
}

/// Nodes and weights on `[-1, 1]` for the weight `(1-x)^α (1+x)^β`,
/// computed by Golub–Welsch.
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1 && alpha > -1.0 && beta > -1.0);
    let ab = alpha + beta;
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let diag = if k == 0 {
            (beta - alpha) / (ab + 2.0)
        } else {
            (beta * beta - alpha * alpha) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
        };
        jac[(k, k)] = diag;
        if k + 1 < n {
            let j = kf + 1.0;
            let num = 4.0 * j * (j + alpha) * (j + beta) * (j + ab);
            let den = (2.0 * j + ab).powi(2) * (2.0 * j + ab + 1.0) * (2.0 * j + ab - 1.0);
            let off = (num / den).sqrt();
            jac[(k, k + 1)] = off;
            jac[(k + 1, k)] = off;
        }
    }
    let ln_mu0 = (ab + 1.0) * std::f64::consts::LN_2 + ln_gamma(alpha + 1.0) + ln_gamma(beta + 1.0)
        - ln_gamma(ab + 2.0);
    let mu0 = ln_mu0.exp();
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Rule for `∫₀^∞ y^γ g(y) dy ≈ Σ wᵢ g(yᵢ)`.
///
/// Built from the map `y = -L·ln(1-t)` and Gauss–Jacobi on `[0,1]` with
/// weight `t^γ`; the smooth factor `(y/t)^γ·dy/dt` is folded into the weights.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfLineRule {
    pub gamma: f64,
    pub scale: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl HalfLineRule {
    pub fn new(gamma: f64, n: usize, scale: f64) -> Self {
        let rule = gauss_jacobi_cached(n, 0.0, gamma);
        let (x, w) = (&rule.0, &rule.1);
        let norm = 2f64.powf(-gamma - 1.0);
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for (xi, wi) in x.iter().zip(w) {
            let t = 0.5 * (1.0 + xi);
            let one_minus = 0.5 * (1.0 - xi);
            let y = -scale * (-t).ln_1p();
            let ratio = if t < 1e-8 { scale * (1.0 + 0.5 * t) } else { y / t };
            nodes.push(y);
            weights.push(norm * wi * ratio.powf(gamma) * scale / one_minus);
        }
        Self {
            gamma,
            scale,
            nodes,
            weights,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(y, w)| w * g(*y))
            .sum()
    }
}
