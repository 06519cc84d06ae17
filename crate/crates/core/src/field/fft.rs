//! Multi-dimensional complex FFTs over row-major lattices, built on
//! `rustfft` one axis at a time.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(len, direction))
}

/// In-place unnormalized transform of a row-major array of shape `shape`.
///
/// `Forward` computes `sum_x f(x) e^{-2 pi i k x / n}`, `Inverse` the same
/// with a positive exponent. No scaling is applied in either direction.
pub(crate) fn transform(shape: &[usize], data: &mut [Complex64], direction: FftDirection) {
    debug_assert_eq!(shape.iter().product::<usize>(), data.len());
    let mut scratch = Vec::new();
    let mut lines = Vec::new();
    for axis in 0..shape.len() {
        let n = shape[axis];
        let fft = plan(n, direction);
        let need = fft.get_inplace_scratch_len();
        if scratch.len() < need {
            scratch.resize(need, Complex64::default());
        }
        let inner: usize = shape[axis + 1..].iter().product();
        if inner == 1 {
            fft.process_with_scratch(data, &mut scratch[..need]);
            continue;
        }
        // Gather each (n x inner) slab into `inner` contiguous lines.
        let slab = n * inner;
        lines.resize(slab, Complex64::default());
        for block in data.chunks_exact_mut(slab) {
            for i in 0..n {
                let row = &block[i * inner..(i + 1) * inner];
                for (j, v) in row.iter().enumerate() {
                    lines[j * n + i] = *v;
                }
            }
            fft.process_with_scratch(&mut lines, &mut scratch[..need]);
            for i in 0..n {
                let row = &mut block[i * inner..(i + 1) * inner];
                for (j, v) in row.iter_mut().enumerate() {
                    *v = lines[j * n + i];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn naive(shape: &[usize], data: &[Complex64], sign: f64) -> Vec<Complex64> {
        let total = data.len();
        let unravel = |mut f: usize| {
            let mut idx = vec![0; shape.len()];
            for a in (0..shape.len()).rev() {
                idx[a] = f % shape[a];
                f /= shape[a];
            }
            idx
        };
        (0..total)
            .map(|k| {
                let kk = unravel(k);
                (0..total)
                    .map(|x| {
                        let xx = unravel(x);
                        let phase: f64 = (0..shape.len())
                            .map(|a| (kk[a] * xx[a]) as f64 / shape[a] as f64)
                            .sum();
                        data[x] * Complex64::from_polar(1.0, sign * 2.0 * PI * phase)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft_3d() {
        let shape = [4, 6, 2];
        let data: Vec<Complex64> = (0..48)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()))
            .collect();
        for (dir, sign) in [(FftDirection::Forward, -1.0), (FftDirection::Inverse, 1.0)] {
            let mut fast = data.clone();
            transform(&shape, &mut fast, dir);
            let slow = naive(&shape, &data, sign);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }
}
