//! Raw (unnormalized) 3D FFT over row-major `[x][y][z]` data, parallelized
//! with rayon. Everything here is deterministic: each 1D line is transformed
//! independently and written back to its own disjoint slice, so thread
//! scheduling never changes the output bits.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

type PlanKey = (usize, bool);

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<Mutex<HashMap<PlanKey, Arc<dyn Fft<f64>>>>> = OnceLock::new();
    let mut plans = PLANS.get_or_init(|| Mutex::new(HashMap::new())).lock().unwrap();
    plans
        .entry((n, inverse))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

/// Unnormalized 3D DFT in place. `inverse = false` applies the kernel
/// `exp(-2 pi i jk/N)` along each axis, `inverse = true` its conjugate.
/// No 1/N^3 factor is applied in either direction.
pub fn fft3_raw(values: &mut [Complex64], n: usize, inverse: bool) {
    assert_eq!(values.len(), n * n * n);
    let fft = plan(n, inverse);
    let scratch_len = fft.get_inplace_scratch_len();

    // z axis: lines are contiguous.
    values.par_chunks_mut(n).for_each_init(
        || vec![Complex64::default(); scratch_len],
        |scratch, line| fft.process_with_scratch(line, scratch),
    );

    // y axis: within each x slab (n*n contiguous values), lines stride n.
    values.par_chunks_mut(n * n).for_each_init(
        || {
            (
                vec![Complex64::default(); n],
                vec![Complex64::default(); scratch_len],
            )
        },
        |(line, scratch), slab| {
            for iz in 0..n {
                for iy in 0..n {
                    line[iy] = slab[iy * n + iz];
                }
                fft.process_with_scratch(line, scratch);
                for iy in 0..n {
                    slab[iy * n + iz] = line[iy];
                }
            }
        },
    );

    // x axis: lines stride n*n. Work on one yz row (fixed iy) at a time so
    // par_chunks still hands out disjoint slices; gather across slabs via
    // raw pointer arithmetic kept inside this function.
    let base = values.as_mut_ptr() as usize;
    (0..n).into_par_iter().for_each_init(
        || {
            (
                vec![Complex64::default(); n],
                vec![Complex64::default(); scratch_len],
            )
        },
        |(line, scratch), iy| {
            let ptr = base as *mut Complex64;
            for iz in 0..n {
                unsafe {
                    for ix in 0..n {
                        line[ix] = *ptr.add((ix * n + iy) * n + iz);
                    }
                    fft.process_with_scratch(line, scratch);
                    for ix in 0..n {
                        *ptr.add((ix * n + iy) * n + iz) = line[ix];
                    }
                }
            }
        },
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dft3_reference(values: &[Complex64], n: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); n * n * n];
        let w = -2.0 * std::f64::consts::PI / n as f64;
        for kx in 0..n {
            for ky in 0..n {
                for kz in 0..n {
                    let mut acc = Complex64::default();
                    for jx in 0..n {
                        for jy in 0..n {
                            for jz in 0..n {
                                let phase = w * (kx * jx + ky * jy + kz * jz) as f64;
                                acc += values[(jx * n + jy) * n + jz]
                                    * Complex64::from_polar(1.0, phase);
                            }
                        }
                    }
                    out[(kx * n + ky) * n + kz] = acc;
                }
            }
        }
        out
    }

    #[test]
    fn matches_naive_dft_on_small_cube() {
        let n = 4;
        let mut values: Vec<Complex64> = (0..n * n * n)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let reference = dft3_reference(&values, n);
        fft3_raw(&mut values, n, false);
        for (a, b) in values.iter().zip(reference.iter()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn forward_inverse_roundtrip() {
        let n = 8;
        let original: Vec<Complex64> = (0..n * n * n)
            .map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.7).cos()))
            .collect();
        let mut values = original.clone();
        fft3_raw(&mut values, n, false);
        fft3_raw(&mut values, n, true);
        let scale = 1.0 / (n * n * n) as f64;
        for (a, b) in values.iter().zip(original.iter()) {
            assert!((a * scale - b).norm() < 1e-12);
        }
    }
}
