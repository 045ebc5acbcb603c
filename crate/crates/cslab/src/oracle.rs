//! Closed-form free evolution of Gaussian wave packets.
//!
//! This is the independent oracle the split-step solver is checked against:
//! it never touches the FFT path. Everything factorizes per axis. With
//! `alpha = 1/(2 sigma^2)` the initial packet is
//! `u0(x) = A prod_i exp(-alpha (x_i - c_i)^2 + i v_i (x_i - c_i))`,
//! and the free flow multiplies the Fourier transform by
//! `exp(-i sigma_k |xi|^2 t)` (sigma_k = -1 for the `MinusLaplacian`
//! convention, +1 for `PlusLaplacian`... see below). Carrying out the 1D
//! Gaussian integral exactly:
//!
//! `u_axis(t, x) = (1/2) (alpha a)^{-1/2} exp(b^2/(4a) - v^2/(4 alpha))`
//!
//! with `a = 1/(4 alpha) + i t` for `PlusLaplacian` (`i du/dt + Lap u = 0`),
//! `a = 1/(4 alpha) - i t` for `MinusLaplacian` (`i du/dt - Lap u = 0`),
//! and `b = v/(2 alpha) + i (x - c)`.

use num_complex::Complex64;

use crate::equation::{EquationSpec, KineticSign};
use crate::error::Result;
use crate::evolution::{DiagnosticRow, Trajectory};
use crate::grid::{Field, Grid};

/// A Gaussian wave packet `A exp(-|x-c|^2/(2 sigma^2) + i v.(x-c))`.
#[derive(Debug, Clone, Copy)]
pub struct GaussianPacket {
    pub width: f64,
    pub center: [f64; 3],
    pub momentum: [f64; 3],
    pub amplitude: Complex64,
}

impl GaussianPacket {
    pub fn centered(width: f64) -> GaussianPacket {
        GaussianPacket {
            width,
            center: [0.0; 3],
            momentum: [0.0; 3],
            amplitude: Complex64::new(1.0, 0.0),
        }
    }

    fn alpha(&self) -> f64 {
        1.0 / (2.0 * self.width * self.width)
    }

    /// Exact mass |A|^2 (pi)^{3/2} sigma^3 of the continuum packet.
    pub fn mass(&self) -> f64 {
        self.amplitude.norm_sqr() * std::f64::consts::PI.powf(1.5) * self.width.powi(3)
    }

    /// Rescale the amplitude so the continuum mass equals `target`.
    pub fn with_mass(mut self, target: f64) -> GaussianPacket {
        let current = self.mass();
        if current > 0.0 {
            self.amplitude *= (target / current).sqrt();
        }
        self
    }

    /// Closed-form value of the free evolution at time t and point x.
    pub fn value_at(&self, x: [f64; 3], t: f64, kinetic_sign: KineticSign) -> Complex64 {
        let alpha = self.alpha();
        // MinusLaplacian: u_hat(t) = exp(+i |xi|^2 t) u_hat(0) -> a = 1/(4a) - i t
        let a = match kinetic_sign {
            KineticSign::MinusLaplacian => Complex64::new(1.0 / (4.0 * alpha), -t),
            KineticSign::PlusLaplacian => Complex64::new(1.0 / (4.0 * alpha), t),
        };
        let mut out = self.amplitude;
        for axis in 0..3 {
            let w = x[axis] - self.center[axis];
            let v = self.momentum[axis];
            let b = Complex64::new(v / (2.0 * alpha), w);
            let factor = 0.5 * (alpha * a).sqrt().inv()
                * (b * b / (4.0 * a) - v * v / (4.0 * alpha)).exp();
            out *= factor;
        }
        out
    }

    /// Sample the packet at t = 0.
    pub fn sample(&self, grid: Grid) -> Field {
        self.evolved(grid, 0.0, KineticSign::PlusLaplacian)
    }

    /// Sample the exact free evolution on a grid at time t. The samples are
    /// values of the R^3 solution, so there is no periodic wrap-around; only
    /// the box truncation of the tails is visible to grid quadrature.
    pub fn evolved(&self, grid: Grid, t: f64, kinetic_sign: KineticSign) -> Field {
        let mut field = Field::from_fn(grid, t, |x| self.value_at(x, t, kinetic_sign));
        field.time = t;
        field
    }

    /// Exact-free trajectory: snapshots of the closed form at the given
    /// times. Diagnostics carry the grid mass per snapshot.
    pub fn oracle_trajectory(
        &self,
        grid: Grid,
        times: &[f64],
        kinetic_sign: KineticSign,
    ) -> Result<Trajectory> {
        let spec = EquationSpec::free(kinetic_sign);
        let mut snapshots = Vec::with_capacity(times.len());
        let mut diagnostics = Vec::with_capacity(times.len());
        for &t in times {
            let snap = self.evolved(grid, t, kinetic_sign);
            diagnostics.push(DiagnosticRow {
                time: t,
                mass: snap.mass(),
                energy: None,
            });
            snapshots.push(snap);
        }
        Ok(Trajectory {
            spec,
            snapshots,
            diagnostics,
            aborted: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::{compute_norm, NormKind};

    #[test]
    fn closed_form_at_time_zero_is_the_packet() {
        let packet = GaussianPacket {
            width: 1.3,
            center: [0.5, -0.25, 0.0],
            momentum: [1.0, 0.0, -0.5],
            amplitude: Complex64::new(0.8, 0.1),
        };
        let alpha = 1.0 / (2.0 * 1.3_f64.powi(2));
        for sign in [KineticSign::MinusLaplacian, KineticSign::PlusLaplacian] {
            for x in [[0.0, 0.0, 0.0], [1.0, 2.0, -0.5], [0.5, -0.25, 0.0]] {
                let got = packet.value_at(x, 0.0, sign);
                let mut expected = packet.amplitude;
                for axis in 0..3 {
                    let w = x[axis] - packet.center[axis];
                    expected *= Complex64::new(-alpha * w * w, packet.momentum[axis] * w).exp();
                }
                assert!((got - expected).norm() < 1e-13, "mismatch at {x:?}");
            }
        }
    }

    #[test]
    fn free_flow_preserves_l2_mass() {
        let grid = Grid::new(3, 15.0, 48).unwrap();
        let packet = GaussianPacket::centered(1.0);
        let m0 = packet.sample(grid).mass();
        for t in [0.5, 1.0, 2.0] {
            let m = packet.evolved(grid, t, KineticSign::PlusLaplacian).mass();
            assert!(
                (m - m0).abs() < 1e-6 * m0,
                "grid mass drifted at t = {t}: {m} vs {m0}"
            );
        }
    }

    #[test]
    fn packet_mass_normalization() {
        let packet = GaussianPacket::centered(0.8).with_mass(0.05);
        assert!((packet.mass() - 0.05).abs() < 1e-14);
        let grid = Grid::new(3, 10.0, 48).unwrap();
        let grid_mass = compute_norm(&packet.sample(grid), NormKind::L2)
            .unwrap()
            .powi(2);
        assert!((grid_mass - 0.05).abs() < 1e-8);
    }

    #[test]
    fn spreading_gaussian_matches_reference_width() {
        // |u(t)|^2 of a width-sigma packet spreads with per-axis variance
        // (sigma^2 + 4 t^2 / sigma^2)/2; check the second moment at t = 1.
        let grid = Grid::new(3, 15.0, 64).unwrap();
        let packet = GaussianPacket::centered(1.0);
        let t = 1.0;
        let u = packet.evolved(grid, t, KineticSign::PlusLaplacian);
        let num = compute_norm(&u, NormKind::WeightedL2(2.0)).unwrap().powi(2);
        let mass = u.mass();
        let variance = num / mass; // E|x|^2 = 3 * per-axis variance
        let expected = 3.0 * (1.0 + 4.0 * t * t) / 2.0;
        assert!(
            (variance - expected).abs() < 1e-4 * expected,
            "variance {variance} vs {expected}"
        );
    }
}
