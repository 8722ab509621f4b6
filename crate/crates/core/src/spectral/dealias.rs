use super::{Spectrum, TorusGrid};
use num_complex::Complex64;

/// Padded points per axis for products of degree `p`: `ceil((p+1)/2·n)`
/// for integer `p`, the 3/2 rule otherwise; always even and `>= n`.
pub fn padded_len(n: usize, p: f64) -> usize {
    let raw = if (p - p.round()).abs() < 1e-12 {
        ((p.round() + 1.0) * n as f64 / 2.0).ceil() as usize
    } else {
        (3 * n).div_ceil(2)
    };
    let raw = raw.max(n);
    raw + raw % 2
}

fn images(grid: &TorusGrid, j: usize) -> (Vec<[i64; 3]>, f64) {
    let k = grid.wavevector(j);
    let half = (grid.n() / 2) as i64;
    let mut out = vec![k];
    for a in 0..grid.dim() {
        if k[a] == half {
            let extra: Vec<[i64; 3]> = out
                .iter()
                .map(|v| {
                    let mut w = *v;
                    w[a] = -half;
                    w
                })
                .collect();
            out.extend(extra);
        }
    }
    let weight = 1.0 / out.len() as f64;
    (out, weight)
}

/// Re-expresses a spectrum on a finer grid with `m` points per axis. Each
/// Nyquist coefficient is split evenly between `±n/2`, so the padded field
/// is the real trigonometric interpolant of the original samples.
pub fn pad_spectrum(u: &Spectrum, m: usize) -> Spectrum {
    let grid = u.grid;
    assert!(m >= grid.n(), "padding cannot shrink the grid");
    if m == grid.n() {
        return u.clone();
    }
    let fine = grid.with_points(m).expect("padded grid is valid");
    let mut out = vec![Complex64::new(0.0, 0.0); fine.len()];
    for (j, c) in u.coeffs.iter().enumerate() {
        let (targets, w) = images(&grid, j);
        for k in targets {
            out[fine.index_of(k).expect("retained on the fine grid")] += c * w;
        }
    }
    Spectrum {
        grid: fine,
        coeffs: out,
    }
}

/// Adjoint of [`pad_spectrum`]: keeps the coarse band and averages the
/// `±n/2` images back into each Nyquist slot.
pub fn truncate_spectrum(v: &Spectrum, coarse: &TorusGrid) -> Spectrum {
    if v.grid.n() == coarse.n() {
        return v.clone();
    }
    let mut out = vec![Complex64::new(0.0, 0.0); coarse.len()];
    for (j, o) in out.iter_mut().enumerate() {
        let (targets, w) = images(coarse, j);
        for k in targets {
            *o += v.coeffs[v.grid.index_of(k).expect("retained on the fine grid")] * w;
        }
    }
    Spectrum {
        grid: *coarse,
        coeffs: out,
    }
}
