//! Unitary Fourier transform pair, spectral multipliers, fractional
//! derivatives |D|^s and the spectral gradient with its radial/tangential
//! split.
//!
//! Convention: the forward transform approximates
//! `u_hat(xi) = (2 pi)^(-3/2) Int u(x) exp(-i xi . x) dx`,
//! so Plancherel holds without stray 2 pi factors. On the cell-centered grid
//! this is a raw DFT decorated with per-axis phases `exp(-i xi_k x_0)`,
//! `x_0 = -L + h/2`, and the measure factor `h^3 (2 pi)^(-3/2)`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fft::fft3_raw;
use crate::grid::{Field, Grid, Space};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

fn axis_phases(grid: &Grid) -> Vec<Complex64> {
    let x0 = -grid.box_half_width() + grid.spacing() / 2.0;
    (0..grid.points_per_axis())
        .map(|k| Complex64::from_polar(1.0, -grid.frequency(k) * x0))
        .collect()
}

/// Unitary transform between the position and frequency sides. Forward then
/// inverse is the identity to machine precision, and the L^2 norm is
/// preserved exactly (Plancherel holds on the discrete lattice).
pub fn transform_pair(field: &Field, direction: Direction) -> Result<Field> {
    let grid = field.grid;
    let n = grid.points_per_axis();
    let phases = axis_phases(&grid);
    let two_pi_pow = (2.0 * std::f64::consts::PI).powf(1.5);

    match direction {
        Direction::Forward => {
            if field.space != Space::Position {
                return Err(Error::Grid("forward transform expects a position-space field".into()));
            }
            let mut values = field.values.clone();
            fft3_raw(&mut values, n, false);
            let scale = grid.cell_volume() / two_pi_pow;
            par_mode_map(&mut values, n, |kx, ky, kz, v| {
                *v *= scale * phases[kx] * phases[ky] * phases[kz];
            });
            Ok(Field {
                grid,
                time: field.time,
                space: Space::Frequency,
                values,
            })
        }
        Direction::Inverse => {
            if field.space != Space::Frequency {
                return Err(Error::Grid("inverse transform expects a frequency-space field".into()));
            }
            let mut values = field.values.clone();
            let scale = grid.freq_cell_volume() / two_pi_pow;
            par_mode_map(&mut values, n, |kx, ky, kz, v| {
                *v *= scale * (phases[kx] * phases[ky] * phases[kz]).conj();
            });
            fft3_raw(&mut values, n, true);
            Ok(Field {
                grid,
                time: field.time,
                space: Space::Position,
                values,
            })
        }
    }
}

/// Apply `f(kx, ky, kz, value)` over all modes in parallel, chunked by x slab.
fn par_mode_map(
    values: &mut [Complex64],
    n: usize,
    f: impl Fn(usize, usize, usize, &mut Complex64) + Sync,
) {
    values
        .par_chunks_mut(n * n)
        .enumerate()
        .for_each(|(kx, slab)| {
            for ky in 0..n {
                for kz in 0..n {
                    f(kx, ky, kz, &mut slab[ky * n + kz]);
                }
            }
        });
}

/// Apply a spectral multiplier `m(xi)` to a position-space field:
/// raw DFT, multiply, raw inverse DFT, divide by N^3. The unitary phases
/// cancel, so this is the fast path used by the solver and the norms.
pub fn apply_multiplier(field: &Field, m: impl Fn([f64; 3]) -> Complex64 + Sync) -> Result<Field> {
    field.require_position()?;
    let grid = field.grid;
    let n = grid.points_per_axis();
    let freqs = grid.frequencies();
    let mut values = field.values.clone();
    fft3_raw(&mut values, n, false);
    let scale = 1.0 / grid.len() as f64;
    par_mode_map(&mut values, n, |kx, ky, kz, v| {
        *v *= m([freqs[kx], freqs[ky], freqs[kz]]) * scale;
    });
    fft3_raw(&mut values, n, true);
    Ok(Field {
        grid,
        time: field.time,
        space: Space::Position,
        values,
    })
}

/// Fractional derivative |D|^s, the Fourier multiplier |xi|^s with zero
/// weight on the zero mode. `s = 0` is the identity; `0 <= s <= 2`.
pub fn fractional_derivative(field: &Field, s: f64) -> Result<Field> {
    if !(0.0..=2.0).contains(&s) {
        return Err(Error::parameter("s", format!("|D|^s requires 0 <= s <= 2, got {s}")));
    }
    if s == 0.0 {
        let mut out = field.clone();
        out.require_position()?;
        out.space = Space::Position;
        return Ok(out);
    }
    apply_multiplier(field, |xi| {
        let k2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        Complex64::new(if k2 == 0.0 { 0.0 } else { k2.powf(s / 2.0) }, 0.0)
    })
}

/// Spectral gradient: one forward DFT, three inverse DFTs. The Nyquist mode
/// is zeroed in the odd multiplier i xi (it has no conjugate partner on the
/// even lattice, and keeping it would give real fields spurious imaginary
/// gradients).
pub fn gradient(field: &Field) -> Result<[Field; 3]> {
    field.require_position()?;
    let grid = field.grid;
    let n = grid.points_per_axis();
    let mut freqs = grid.frequencies();
    freqs[n / 2] = 0.0;
    let mut spectrum = field.values.clone();
    fft3_raw(&mut spectrum, n, false);
    let scale = 1.0 / grid.len() as f64;

    let component = |axis: usize| -> Field {
        let mut values = spectrum.clone();
        par_mode_map(&mut values, n, |kx, ky, kz, v| {
            let xi = freqs[[kx, ky, kz][axis]];
            *v *= Complex64::new(0.0, xi * scale);
        });
        fft3_raw(&mut values, n, true);
        Field {
            grid,
            time: field.time,
            space: Space::Position,
            values,
        }
    };
    Ok([component(0), component(1), component(2)])
}

/// Pointwise split of |grad u|^2 into radial and tangential parts.
#[derive(Debug, Clone)]
pub struct GradientSplit {
    /// |d_{|x|} u|^2 per cell.
    pub radial_sq: Vec<f64>,
    /// |grad_tau u|^2 per cell.
    pub tangential_sq: Vec<f64>,
    /// |grad u|^2 per cell.
    pub gradient_sq: Vec<f64>,
}

/// Pointwise kernel of the split: given the coordinates of a point and the
/// gradient vector there, return (|radial|^2, |tangential|^2). At the origin
/// the radial direction is undefined; the radial part is assigned 0 and the
/// whole |grad u|^2 counts as tangential.
pub fn radial_tangential_split(x: [f64; 3], grad: [Complex64; 3]) -> (f64, f64) {
    let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    let grad_sq = grad.iter().map(|g| g.norm_sqr()).sum::<f64>();
    if r2 == 0.0 {
        return (0.0, grad_sq);
    }
    let r = r2.sqrt();
    let radial = (grad[0] * x[0] + grad[1] * x[1] + grad[2] * x[2]) / r;
    let radial_sq = radial.norm_sqr();
    // Cauchy-Schwarz guarantees radial_sq <= grad_sq; clamp the roundoff.
    (radial_sq, (grad_sq - radial_sq).max(0.0))
}

/// Compute |d_{|x|} u|^2 and |grad_tau u|^2 pointwise from the spectral
/// gradient. Their sum reproduces |grad u|^2 exactly by construction; see
/// [`radial_tangential_split`] for the origin convention (the cell-centered
/// grid never samples the origin itself).
pub fn gradient_split(field: &Field) -> Result<GradientSplit> {
    let [gx, gy, gz] = gradient(field)?;
    let grid = field.grid;
    let len = grid.len();
    let mut radial_sq = vec![0.0; len];
    let mut tangential_sq = vec![0.0; len];
    let mut gradient_sq = vec![0.0; len];
    for idx in 0..len {
        let x = grid.position(idx);
        let g = [gx.values[idx], gy.values[idx], gz.values[idx]];
        let (r, t) = radial_tangential_split(x, g);
        radial_sq[idx] = r;
        tangential_sq[idx] = t;
        gradient_sq[idx] = r + t;
    }
    Ok(GradientSplit {
        radial_sq,
        tangential_sq,
        gradient_sq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn gaussian_field(grid: Grid, alpha: f64) -> Field {
        Field::from_fn(grid, 0.0, |[x, y, z]| {
            Complex64::new((-alpha * (x * x + y * y + z * z)).exp(), 0.0)
        })
    }

    #[test]
    fn constant_field_transforms_to_zero_mode() {
        let grid = Grid::new(3, 10.0, 16).unwrap();
        let field = Field::from_fn(grid, 0.0, |_| Complex64::new(1.0, 0.0));
        let hat = transform_pair(&field, Direction::Forward).unwrap();
        let zero_mode = hat.values[0].norm();
        let rest: f64 = hat.values[1..].iter().map(|v| v.norm()).sum();
        assert!(zero_mode > 0.0);
        assert!(rest < 1e-10 * zero_mode);
    }

    #[test]
    fn gaussian_is_its_own_transform() {
        // exp(-|x|^2/2) -> exp(-|xi|^2/2) under the unitary convention.
        let grid = Grid::new(3, 10.0, 64).unwrap();
        let field = gaussian_field(grid, 0.5);
        let hat = transform_pair(&field, Direction::Forward).unwrap();
        let mut worst = 0.0_f64;
        let n = grid.points_per_axis();
        for kx in 0..n {
            for ky in 0..n {
                for kz in 0..n {
                    let xi2 = grid.frequency(kx).powi(2)
                        + grid.frequency(ky).powi(2)
                        + grid.frequency(kz).powi(2);
                    let expected = (-xi2 / 2.0).exp();
                    let got = hat.values[(kx * n + ky) * n + kz];
                    worst = worst.max((got - expected).norm());
                }
            }
        }
        assert!(worst < 1e-8, "worst deviation {worst}");
    }

    #[test]
    fn roundtrip_is_identity() {
        let grid = Grid::new(3, 5.0, 16).unwrap();
        let field = Field::from_fn(grid, 0.3, |[x, y, z]| {
            Complex64::new((x * y).sin(), (z - x).cos())
        });
        let hat = transform_pair(&field, Direction::Forward).unwrap();
        let back = transform_pair(&hat, Direction::Inverse).unwrap();
        let norm: f64 = field.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let err: f64 = field
            .values
            .iter()
            .zip(back.values.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(err < 1e-12 * norm);
        assert_eq!(back.space, Space::Position);
    }

    #[test]
    fn plancherel_preserves_mass() {
        let grid = Grid::new(3, 5.0, 16).unwrap();
        let field = Field::from_fn(grid, 0.0, |[x, y, z]| {
            Complex64::new((3.0 * x).sin() * y, (z * z).cos())
        });
        let hat = transform_pair(&field, Direction::Forward).unwrap();
        let rel = (field.mass() - hat.mass()).abs() / field.mass();
        assert!(rel < 1e-12);
    }

    #[test]
    fn plane_wave_is_multiplier_eigenfunction() {
        let grid = Grid::new(3, 10.0, 16).unwrap();
        // Pick an exact lattice frequency so the plane wave is periodic.
        let xi0 = [grid.frequency(2), grid.frequency(1), 0.0];
        let field = Field::from_fn(grid, 0.0, |[x, y, z]| {
            Complex64::from_polar(1.0, xi0[0] * x + xi0[1] * y + xi0[2] * z)
        });
        let s = 0.7;
        let out = fractional_derivative(&field, s).unwrap();
        let k = (xi0[0] * xi0[0] + xi0[1] * xi0[1]).sqrt();
        let expected = k.powf(s);
        for (a, b) in out.values.iter().zip(field.values.iter()) {
            assert!((a - expected * b).norm() < 1e-10);
        }
    }

    #[test]
    fn fractional_derivative_edge_cases() {
        let grid = Grid::new(3, 5.0, 16).unwrap();
        let field = gaussian_field(grid, 0.5);
        // s = 0 is the identity
        let id = fractional_derivative(&field, 0.0).unwrap();
        for (a, b) in id.values.iter().zip(field.values.iter()) {
            assert_eq!(a, b);
        }
        // s = 2 matches -Laplacian applied spectrally
        let d2 = fractional_derivative(&field, 2.0).unwrap();
        let lap = apply_multiplier(&field, |xi| {
            Complex64::new(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2], 0.0)
        })
        .unwrap();
        for (a, b) in d2.values.iter().zip(lap.values.iter()) {
            assert!((a - b).norm() < 1e-10);
        }
        // out of range
        assert!(fractional_derivative(&field, 2.3).is_err());
        assert!(fractional_derivative(&field, -0.1).is_err());
    }

    #[test]
    fn composition_of_fractional_derivatives() {
        let grid = Grid::new(3, 5.0, 16).unwrap();
        let field = gaussian_field(grid, 0.8);
        let (a, b) = (0.6, 0.9);
        let lhs = fractional_derivative(&fractional_derivative(&field, a).unwrap(), b).unwrap();
        let rhs = fractional_derivative(&field, a + b).unwrap();
        let scale: f64 = rhs.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let err: f64 = lhs
            .values
            .iter()
            .zip(rhs.values.iter())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(err < 1e-10 * scale);
    }

    #[test]
    fn radial_field_has_no_tangential_gradient() {
        let grid = Grid::new(3, 10.0, 48).unwrap();
        let field = gaussian_field(grid, 1.0);
        let split = gradient_split(&field).unwrap();
        let worst = split
            .tangential_sq
            .iter()
            .cloned()
            .fold(0.0_f64, f64::max);
        assert!(worst < 1e-10, "worst tangential density {worst}");
    }

    #[test]
    fn axis_points_of_linear_field_are_purely_radial() {
        // On the x1 axis the gradient of u = x1 points along x-hat, so the
        // tangential part vanishes identically.
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        for a in [0.5, 1.0, 3.7] {
            let (radial, tangential) = radial_tangential_split([a, 0.0, 0.0], [one, zero, zero]);
            assert!((radial - 1.0).abs() < 1e-12);
            assert!(tangential < 1e-12);
        }
        // Off the axis the split follows the geometry exactly.
        let (radial, tangential) = radial_tangential_split([3.0, 4.0, 0.0], [one, zero, zero]);
        assert!((radial - 9.0 / 25.0).abs() < 1e-12);
        assert!((tangential - 16.0 / 25.0).abs() < 1e-12);
    }

    #[test]
    fn pythagoras_against_independent_gradient_norm() {
        let grid = Grid::new(3, 5.0, 16).unwrap();
        let field = Field::from_fn(grid, 0.0, |[x, y, z]| {
            Complex64::new((x + 0.3 * y).sin(), (y * z * 0.2).cos())
        });
        let split = gradient_split(&field).unwrap();
        // Recompute |grad u|^2 from the components directly.
        let [gx, gy, gz] = gradient(&field).unwrap();
        for idx in 0..grid.len() {
            let independent =
                gx.values[idx].norm_sqr() + gy.values[idx].norm_sqr() + gz.values[idx].norm_sqr();
            let sum = split.radial_sq[idx] + split.tangential_sq[idx];
            assert!((sum - independent).abs() <= 1e-10 * independent.max(1.0));
        }
    }
}
