use nalgebra::{DMatrix, DVector};

/// Extrapolates `g(y) → L` as `y → 0` under the model
/// `g(y) = L + Σ a_j y^{p_j}`, using as many exponents as the data allow
/// (one fewer than the number of samples). Returns `None` when the system
/// is singular.
pub fn extrapolate_to_zero(ys: &[f64], gs: &[f64], exponents: &[f64]) -> Option<f64> {
    let n = ys.len();
    assert_eq!(n, gs.len());
    if n == 0 {
        return None;
    }
    let terms = (n - 1).min(exponents.len());
    let scale = ys.iter().fold(0.0, |a: f64, y| a.max(y.abs()));
    let mut a = DMatrix::<f64>::zeros(n, terms + 1);
    for i in 0..n {
        a[(i, 0)] = 1.0;
        let r = ys[i] / scale;
        for j in 0..terms {
            a[(i, j + 1)] = r.powf(exponents[j]);
        }
    }
    let b = DVector::from_column_slice(gs);
    let sol = if terms + 1 == n {
        a.lu().solve(&b)?
    } else {
        a.svd(true, true).solve(&b, 1e-14).ok()?
    };
    Some(sol[0])
}

/// Correction exponents `{2-2s+2j} ∪ {2+2j}` of the small-`y` expansion of
/// weighted Bessel-profile quantities, sorted and deduplicated.
pub fn profile_exponents(s: f64, count: usize) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for j in 0..count {
        out.push(2.0 - 2.0 * s + 2.0 * j as f64);
        out.push(2.0 + 2.0 * j as f64);
    }
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    out.truncate(count);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_limit_of_exact_model() {
        let ys = [0.4, 0.2, 0.1, 0.05];
        let g = |y: f64| 3.0 - 2.0 * y.powf(1.5) + 0.7 * y * y + y.powf(3.5);
        let gs: Vec<f64> = ys.iter().map(|&y| g(y)).collect();
        let l = extrapolate_to_zero(&ys, &gs, &profile_exponents(0.25, 3)).unwrap();
        assert!((l - 3.0).abs() < 1e-12);
    }

    #[test]
    fn exponents_are_deduplicated_at_half() {
        assert_eq!(profile_exponents(0.5, 4), vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(profile_exponents(0.25, 3), vec![1.5, 2.0, 3.5]);
    }
}
