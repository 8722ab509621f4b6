use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::sync::Arc;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// Unnormalized N-dimensional DFT over a row-major `n^dim` array.
pub(crate) fn transform_nd(data: &mut [Complex64], n: usize, dim: usize, inverse: bool) {
    let fft = plan(n, inverse);
    let total = data.len();
    // Last axis is contiguous.
    fft.process(data);
    if dim == 1 {
        return;
    }
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..dim - 1 {
        let stride = n.pow((dim - 1 - axis) as u32);
        let block = stride * n;
        for start in (0..total).step_by(block) {
            for offset in 0..stride {
                let base = start + offset;
                for (i, l) in line.iter_mut().enumerate() {
                    *l = data[base + i * stride];
                }
                fft.process(&mut line);
                for (i, l) in line.iter().enumerate() {
                    data[base + i * stride] = *l;
                }
            }
        }
    }
}
