//! The norms used by the estimates: L^2, homogeneous Sobolev, weighted L^2,
//! spatial L^p and mixed space-time norms.

use crate::error::{Error, Result};
use crate::fft::fft3_raw;
use crate::grid::{Field, Space};

/// Which norm to compute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    /// L^2 norm (quadrature on the position side, Plancherel measure on the
    /// frequency side).
    L2,
    /// Homogeneous Sobolev norm of order `s` in [0, 2]:
    /// `(Int |xi|^{2s} |u_hat|^2 dxi)^(1/2)` with zero weight at xi = 0.
    HdotS(f64),
    /// Weighted L^2 norm `(Int |x|^k |u|^2 dx)^(1/2)` with k in {1, 2}.
    WeightedL2(f64),
    /// Spatial L^p norm, p >= 1.
    LpSpatial(f64),
}

impl NormKind {
    fn validate(&self) -> Result<()> {
        match self {
            NormKind::L2 => Ok(()),
            NormKind::HdotS(s) => {
                if (0.0..=2.0).contains(s) {
                    Ok(())
                } else {
                    Err(Error::parameter("s", format!("HdotS order must be in [0,2], got {s}")))
                }
            }
            NormKind::WeightedL2(k) => {
                if *k == 1.0 || *k == 2.0 {
                    Ok(())
                } else {
                    Err(Error::parameter("k", format!("weighted L2 power must be 1 or 2, got {k}")))
                }
            }
            NormKind::LpSpatial(p) => {
                if *p >= 1.0 {
                    Ok(())
                } else {
                    Err(Error::parameter("p", format!("Lp requires p >= 1, got {p}")))
                }
            }
        }
    }
}

/// Compute a norm of a field. Homogeneous Sobolev norms of position-space
/// fields go through the raw DFT (the unitary phase factors are unimodular
/// and drop out of |u_hat|).
pub fn compute_norm(field: &Field, kind: NormKind) -> Result<f64> {
    kind.validate()?;
    let grid = field.grid;
    match kind {
        NormKind::L2 => Ok(field.mass().sqrt()),
        NormKind::HdotS(s) => {
            if s == 0.0 {
                return Ok(field.mass().sqrt());
            }
            let n = grid.points_per_axis();
            let freqs = grid.frequencies();
            let accumulate = |spectrum: &[num_complex::Complex64], weight: f64| -> f64 {
                let mut total = 0.0;
                for kx in 0..n {
                    let fx2 = freqs[kx] * freqs[kx];
                    for ky in 0..n {
                        let fxy2 = fx2 + freqs[ky] * freqs[ky];
                        let row = (kx * n + ky) * n;
                        for kz in 0..n {
                            let k2 = fxy2 + freqs[kz] * freqs[kz];
                            if k2 > 0.0 {
                                total += k2.powf(s) * spectrum[row + kz].norm_sqr();
                            }
                        }
                    }
                }
                total * weight
            };
            match field.space {
                Space::Position => {
                    let mut spectrum = field.values.clone();
                    fft3_raw(&mut spectrum, n, false);
                    // |u_hat|^2 dxi = (h^3/(2 pi)^{3/2})^2 (pi/L)^3 |raw|^2 = h^3/N^3 |raw|^2
                    let weight = grid.cell_volume() / grid.len() as f64;
                    Ok(accumulate(&spectrum, weight).sqrt())
                }
                Space::Frequency => Ok(accumulate(&field.values, grid.freq_cell_volume()).sqrt()),
            }
        }
        NormKind::WeightedL2(k) => {
            field.require_position()?;
            let mut total = 0.0;
            for (idx, v) in field.values.iter().enumerate() {
                let r = grid.radius(idx);
                let w = if k == 1.0 { r } else { r * r };
                total += w * v.norm_sqr();
            }
            Ok((total * grid.cell_volume()).sqrt())
        }
        NormKind::LpSpatial(p) => {
            field.require_position()?;
            if p == 2.0 {
                return Ok(field.mass().sqrt());
            }
            let total: f64 = field.values.iter().map(|v| v.norm().powf(p)).sum();
            Ok((total * grid.cell_volume()).powf(1.0 / p))
        }
    }
}

/// Mixed space-time norm over a snapshot sequence: trapezoid in time of
/// `||u(t)||_{L^q}^p`, then the p-th root. `p_time = f64::INFINITY` takes the
/// max over snapshots instead (and tolerates a single snapshot).
pub fn spacetime_norm(snapshots: &[Field], p_time: f64, q_space: f64) -> Result<f64> {
    if q_space < 1.0 {
        return Err(Error::parameter("q_space", "requires q >= 1"));
    }
    if p_time.is_infinite() {
        let mut worst = 0.0_f64;
        for snap in snapshots {
            worst = worst.max(compute_norm(snap, NormKind::LpSpatial(q_space))?);
        }
        return Ok(worst);
    }
    if p_time < 1.0 {
        return Err(Error::parameter("p_time", "requires p >= 1 or infinity"));
    }
    if snapshots.len() < 2 {
        return Err(Error::Config(
            "spacetime_norm needs at least 2 snapshots for finite p".into(),
        ));
    }
    for pair in snapshots.windows(2) {
        if !(pair[1].time > pair[0].time) && !(pair[1].time < pair[0].time) {
            return Err(Error::Config("snapshot times must be strictly monotone".into()));
        }
    }
    let mut integral = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for snap in snapshots {
        let val = compute_norm(snap, NormKind::LpSpatial(q_space))?.powf(p_time);
        if let Some((t0, v0)) = prev {
            integral += 0.5 * (v0 + val) * (snap.time - t0).abs();
        }
        prev = Some((snap.time, val));
    }
    Ok(integral.powf(1.0 / p_time))
}
