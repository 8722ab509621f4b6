use std::f64::consts::PI;

/// `(K_s(x), K_{1-s}(x))` for `0 < s < 1` and `x >= 2`, by Steed's
/// continued fraction for `K_μ`, `K_{μ+1}` with `|μ| <= 1/2`.
pub(crate) fn bessel_k_pair(s: f64, x: f64) -> (f64, f64) {
    debug_assert!(x >= 2.0 - 1e-12);
    let mu = if s <= 0.5 { -s } else { s - 1.0 };
    let (k_mu, k_mu1) = steed(mu, x);
    if s <= 0.5 {
        // K_{-s} = K_s, K_{1-s}.
        (k_mu, k_mu1)
    } else {
        // K_{s-1} = K_{1-s}, K_s.
        (k_mu1, k_mu)
    }
}

fn steed(mu: f64, x: f64) -> (f64, f64) {
    const EPS: f64 = 1e-16;
    let a1 = 0.25 - mu * mu;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut sum = 1.0 + q * delh;
    for i in 1..10_000 {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        sum += dels;
        if (dels / sum).abs() < EPS {
            break;
        }
    }
    h *= a1;
    let k_mu = (PI / (2.0 * x)).sqrt() * (-x).exp() / sum;
    let k_mu1 = k_mu * (mu + x + 0.5 - h) / x;
    (k_mu, k_mu1)
}
