//! Integral functionals of the estimates: the smoothing profile S(R), the
//! Morawetz multiplier identity and its residual, the hessian quadratic
//! form with radial/tangential split, flux and uniqueness functionals,
//! weighted mass near the origin, truncation integrals and Strichartz
//! monitors.
//!
//! Time integrals are trapezoid sums over trajectory snapshots; space
//! integrals are cell quadrature with sharp cutoffs.

use rayon::prelude::*;

use crate::equation::{sample_potential, AngularPotential, EquationSpec, PotentialField};
use crate::error::{Error, Result};
use crate::evolution::Trajectory;
use crate::fft::fft3_raw;
use crate::grid::{Field, Grid};
use crate::norms::{compute_norm, spacetime_norm, NormKind};
use crate::spectral::{gradient, gradient_split};
use crate::test_functions::{RadialProfile, ScaledProfile};

/// The local-smoothing profile S(R) = (1/R) Int_0^T Int_{|x|<R} |grad u|^2.
#[derive(Debug, Clone)]
pub struct SmoothingProfile {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub horizon: f64,
    pub sup_value: f64,
    /// ||f||^2 in the homogeneous half-derivative norm, the reference size.
    pub hdot_half_sq: f64,
    pub ratio_sup: f64,
    /// Radii beyond the 0.8 L validity cap (still computed, flagged here).
    pub flagged_radii: Vec<f64>,
}

impl SmoothingProfile {
    /// S at the largest unflagged radius.
    pub fn at_largest_valid_radius(&self) -> Option<(f64, f64)> {
        self.radii
            .iter()
            .zip(self.values.iter())
            .filter(|(r, _)| !self.flagged_radii.contains(r))
            .last()
            .map(|(r, v)| (*r, *v))
    }
}

fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (v[0] + v[1]) * (t[1] - t[0]).abs())
        .sum()
}

fn require_snapshots(traj: &Trajectory, least: usize, what: &str) -> Result<()> {
    if traj.snapshots.len() < least {
        return Err(Error::Config(format!(
            "{what} needs at least {least} snapshots, got {}",
            traj.snapshots.len()
        )));
    }
    Ok(())
}

/// Tabulate a pointwise weight over the grid, averaging over a 6^3 subcell
/// lattice wherever the cell either straddles one of the given interface
/// radii or sits inside the cusp region `r < cusp_below`. Sharp-interface
/// weights (characteristic functions, clamp kinks) would otherwise dominate
/// the quadrature error of the identities.
fn averaged_weight_table(
    grid: Grid,
    interfaces: &[f64],
    cusp_below: f64,
    eval: impl Fn([f64; 3]) -> f64 + Sync,
) -> Vec<f64> {
    const M: usize = 6;
    let h = grid.spacing();
    let reach = 0.5 * (3.0_f64).sqrt() * h;
    (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let pos = grid.position(idx);
            let r = grid.radius(idx);
            let near_interface = interfaces.iter().any(|&rj| (r - rj).abs() <= reach);
            if !near_interface && r >= cusp_below {
                return eval(pos);
            }
            let mut acc = 0.0;
            for sx in 0..M {
                let ox = ((sx as f64 + 0.5) / M as f64 - 0.5) * h;
                for sy in 0..M {
                    let oy = ((sy as f64 + 0.5) / M as f64 - 0.5) * h;
                    for sz in 0..M {
                        let oz = ((sz as f64 + 0.5) / M as f64 - 0.5) * h;
                        acc += eval([pos[0] + ox, pos[1] + oy, pos[2] + oz]);
                    }
                }
            }
            acc / (M * M * M) as f64
        })
        .collect()
}

/// Exact integrals of the trigonometric interpolant of a real density `w`
/// over centered balls: one FFT, then per mode the closed-form ball factor
/// `Int_{B_R} e^(i xi.x) dx = 4 pi (sin(kR) - kR cos(kR))/k^3`. This removes
/// the O(h^2) sharp-cutoff error entirely (up to aliasing of `w`), at the
/// price of assuming the ball fits inside the box.
pub fn spectral_ball_integrals(grid: Grid, w: &[f64], radii: &[f64]) -> Vec<f64> {
    assert_eq!(w.len(), grid.len());
    for &r in radii {
        assert!(
            r > 0.0 && r <= grid.box_half_width(),
            "ball radius {r} outside (0, L]"
        );
    }
    let n = grid.points_per_axis();
    let mut spectrum: Vec<num_complex::Complex64> = w
        .iter()
        .map(|&v| num_complex::Complex64::new(v, 0.0))
        .collect();
    fft3_raw(&mut spectrum, n, false);
    let x0 = -grid.box_half_width() + grid.spacing() / 2.0;
    let phases: Vec<num_complex::Complex64> = (0..n)
        .map(|k| num_complex::Complex64::from_polar(1.0, -grid.frequency(k) * x0))
        .collect();
    let freqs = grid.frequencies();
    let norm = 1.0 / grid.len() as f64;

    let mut out = vec![0.0; radii.len()];
    for kx in 0..n {
        let fx2 = freqs[kx] * freqs[kx];
        for ky in 0..n {
            let fxy2 = fx2 + freqs[ky] * freqs[ky];
            let pxy = phases[kx] * phases[ky];
            let row = (kx * n + ky) * n;
            for kz in 0..n {
                let k2 = fxy2 + freqs[kz] * freqs[kz];
                let coeff = spectrum[row + kz] * pxy * phases[kz] * norm;
                let k = k2.sqrt();
                for (j, &radius) in radii.iter().enumerate() {
                    let ball = if k2 == 0.0 {
                        4.0 * std::f64::consts::PI / 3.0 * radius.powi(3)
                    } else {
                        let kr = k * radius;
                        4.0 * std::f64::consts::PI * (kr.sin() - kr * kr.cos()) / (k2 * k)
                    };
                    out[j] += (coeff * ball).re;
                }
            }
        }
    }
    out
}

/// Assign each cell the index of the smallest ladder radius containing it,
/// or `radii.len()` when outside all of them.
fn radius_bins(grid: Grid, radii: &[f64]) -> Vec<u32> {
    (0..grid.len())
        .map(|idx| {
            let r = grid.radius(idx);
            radii.iter().position(|&bound| r < bound).unwrap_or(radii.len()) as u32
        })
        .collect()
}

/// Compute S(R) over the radius ladder from a trajectory, against the
/// half-derivative size of the initial datum `f`. Radii are required to be
/// increasing; entries beyond 0.8 L are flagged but still reported.
pub fn smoothing_profile(
    traj: &Trajectory,
    radii: &[f64],
    f: &Field,
) -> Result<SmoothingProfile> {
    require_snapshots(traj, 2, "smoothing_profile")?;
    if radii.is_empty() || !radii.windows(2).all(|w| w[0] < w[1]) || radii[0] <= 0.0 {
        return Err(Error::parameter("radii", "ladder must be positive and increasing"));
    }
    let grid = traj.initial().grid;
    let bins = radius_bins(grid, radii);
    let cell = grid.cell_volume();

    // per snapshot: cumulative |grad u|^2 mass inside each ladder ball
    let per_snapshot: Vec<Vec<f64>> = traj
        .snapshots
        .par_iter()
        .map(|snap| {
            let grad = gradient(snap).expect("snapshot is position-space");
            let mut bin_sums = vec![0.0_f64; radii.len() + 1];
            for idx in 0..grid.len() {
                let g2 = grad[0].values[idx].norm_sqr()
                    + grad[1].values[idx].norm_sqr()
                    + grad[2].values[idx].norm_sqr();
                bin_sums[bins[idx] as usize] += g2;
            }
            let mut cumulative = vec![0.0_f64; radii.len()];
            let mut acc = 0.0;
            for (j, c) in cumulative.iter_mut().enumerate() {
                acc += bin_sums[j];
                *c = acc * cell;
            }
            cumulative
        })
        .collect();

    let times: Vec<f64> = traj.snapshots.iter().map(|s| s.time).collect();
    let horizon = (times.last().unwrap() - times.first().unwrap()).abs();
    let mut values = Vec::with_capacity(radii.len());
    for (j, &radius) in radii.iter().enumerate() {
        let series: Vec<f64> = per_snapshot.iter().map(|row| row[j]).collect();
        values.push(trapezoid(&times, &series) / radius);
    }
    let cap = 0.8 * grid.box_half_width();
    let flagged_radii: Vec<f64> = radii.iter().copied().filter(|&r| r > cap).collect();
    let sup_value = values.iter().cloned().fold(0.0, f64::max);
    let hdot_half_sq = compute_norm(f, NormKind::HdotS(0.5))?.powi(2);
    let ratio_sup = if hdot_half_sq > 0.0 {
        sup_value / hdot_half_sq
    } else {
        0.0
    };
    Ok(SmoothingProfile {
        radii: radii.to_vec(),
        values,
        horizon,
        sup_value,
        hdot_half_sq,
        ratio_sup,
        flagged_radii,
    })
}

/// Pointwise density of the hessian quadratic form for a radial multiplier:
/// `grad u* D^2 psi grad u = psi''(r) |d_r u|^2 + (psi'(r)/r) |grad_tau u|^2`
/// with psi = phi_{R_scale}. Nonnegative wherever phi' and phi'' are.
pub fn hessian_quadratic_form(
    u: &Field,
    profile: &dyn RadialProfile,
    r_scale: f64,
) -> Result<Vec<f64>> {
    let scaled = ScaledProfile::new(profile, r_scale);
    let split = gradient_split(u)?;
    let grid = u.grid;
    let mut density = vec![0.0_f64; grid.len()];
    for idx in 0..grid.len() {
        let r = grid.radius(idx);
        let psi2 = scaled.phi_second(r);
        let psi1_over_r = if r > 0.0 {
            scaled.phi_prime(r) / r
        } else {
            scaled.phi_second(0.0)
        };
        density[idx] = psi2 * split.radial_sq[idx] + psi1_over_r * split.tangential_sq[idx];
    }
    Ok(density)
}

/// All terms of the multiplier identity for one trajectory and one rescaled
/// multiplier. For the MinusLaplacian convention:
///
/// `Int_0^T Int [grad u* D^2 psi grad u - 1/4 |u|^2 Lap^2 psi
///   + |u|^2 (W/|x|^3) psi' + s lambda/(n+2) |u|^{2+4/n} Lap psi] dx dt
///  = -1/2 Im Int u*(T) grad u(T).grad psi + 1/2 Im Int f* grad f.grad psi`
///
/// with the potential weight taken from the *sampled* (clamped) potential so
/// the identity matches the discrete flow. The PlusLaplacian convention
/// flips the sign of both boundary terms.
#[derive(Debug, Clone, Copy)]
pub struct MorawetzReading {
    pub lhs_hessian: f64,
    pub lhs_bilap: f64,
    pub lhs_potential: f64,
    pub lhs_nonlinear: f64,
    pub rhs_boundary_t: f64,
    pub rhs_boundary_0: f64,
    pub residual: f64,
    pub relative_residual: f64,
}

impl MorawetzReading {
    pub fn lhs_total(&self) -> f64 {
        self.lhs_hessian + self.lhs_bilap + self.lhs_potential + self.lhs_nonlinear
    }

    pub fn rhs_total(&self) -> f64 {
        self.rhs_boundary_t + self.rhs_boundary_0
    }
}

/// Evaluate the multiplier identity for several (profile, R) pairs in one
/// pass over the snapshots (the gradient work is shared).
pub fn morawetz_residuals(
    traj: &Trajectory,
    multipliers: &[(&(dyn RadialProfile + Sync), f64)],
    spec: &EquationSpec,
) -> Result<Vec<MorawetzReading>> {
    require_snapshots(traj, 2, "morawetz_residuals")?;
    let grid = traj.initial().grid;
    let cell = grid.cell_volume();
    let potential = match &spec.potential {
        Some(p) => Some((sample_potential(grid, p)?, *p)),
        None => None,
    };
    let s_lambda = spec.nonlinearity.sign() * spec.coupling;
    let sigma = spec.kinetic_sign.sigma();

    // Per-cell multiplier tables, one set per (profile, R).
    struct Tables {
        psi2: Vec<f64>,
        psi1_over_r: Vec<f64>,
        psi1: Vec<f64>,
        bilap: Vec<f64>,
        lap: Vec<f64>,
        potential_weight: Vec<f64>,
    }
    let tables: Vec<Tables> = multipliers
        .iter()
        .map(|(profile, r_scale)| {
            let scaled = ScaledProfile::new(*profile, *r_scale);
            let len = grid.len();
            let mut t = Tables {
                psi2: vec![0.0; len],
                psi1_over_r: vec![0.0; len],
                psi1: vec![0.0; len],
                bilap: Vec::new(),
                lap: vec![0.0; len],
                potential_weight: Vec::new(),
            };
            for idx in 0..len {
                let r = grid.radius(idx);
                t.psi2[idx] = scaled.phi_second(r);
                t.psi1[idx] = scaled.phi_prime(r);
                t.psi1_over_r[idx] = if r > 0.0 {
                    t.psi1[idx] / r
                } else {
                    scaled.phi_second(0.0)
                };
                t.lap[idx] = scaled.laplacian(r);
            }
            // The bilaplacian of the appendix families is a sharp
            // characteristic source. Pure ball sources are integrated
            // spectrally in the snapshot loop; anything else falls back to
            // the averaged table.
            if scaled.ball_source().is_none() {
                let jumps = scaled.jump_radii();
                t.bilap = averaged_weight_table(grid, &jumps, 0.0, |p| {
                    scaled.bilaplacian((p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt())
                });
            } else {
                t.bilap = Vec::new();
            }
            if let Some((v, pot)) = &potential {
                // -1/2 |u|^2 dV/dr psi' with the clamped dV/dr; the weight has
                // a kink at the clamp radius and strong 1/r^3 curvature, so
                // the whole near region is cell-averaged.
                let eps = v.epsilon;
                let cusp = (eps + 2.0 * grid.spacing()).max(3.0);
                t.potential_weight = averaged_weight_table(grid, &[eps], cusp, |p| {
                    let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                    if r <= eps {
                        0.0
                    } else {
                        pot.w_theta(p) / (r * r * r) * scaled.phi_prime(r)
                    }
                });
            } else {
                t.potential_weight = vec![0.0; len];
            }
            t
        })
        .collect();

    // Ball-source bilaplacians handled spectrally, shared per snapshot.
    let ball_sources: Vec<Option<(f64, f64)>> = multipliers
        .iter()
        .map(|(profile, r_scale)| ScaledProfile::new(*profile, *r_scale).ball_source())
        .collect();
    let ball_radii: Vec<f64> = ball_sources.iter().flatten().map(|(r, _)| *r).collect();

    // Per snapshot and per multiplier: the LHS integrand pieces and the flux.
    struct SnapshotTerms {
        hessian: f64,
        bilap: f64,
        potential: f64,
        nonlinear: f64,
        flux: f64,
    }
    let per_snapshot: Vec<Vec<SnapshotTerms>> = traj
        .snapshots
        .par_iter()
        .map(|snap| {
            let grad = gradient(snap).expect("snapshot is position-space");
            let ball_masses = if ball_radii.is_empty() {
                Vec::new()
            } else {
                let w: Vec<f64> = snap.values.iter().map(|v| v.norm_sqr()).collect();
                spectral_ball_integrals(grid, &w, &ball_radii)
            };
            let mut ball_cursor = 0;
            tables
                .iter()
                .zip(ball_sources.iter())
                .map(|(t, ball)| {
                    let mut hessian = 0.0;
                    let mut bilap = 0.0;
                    let mut potential_term = 0.0;
                    let mut nonlinear = 0.0;
                    let mut flux = 0.0;
                    for idx in 0..grid.len() {
                        let pos = grid.position(idx);
                        let r = grid.radius(idx);
                        let uv = snap.values[idx];
                        let u2 = uv.norm_sqr();
                        let gx = grad[0].values[idx];
                        let gy = grad[1].values[idx];
                        let gz = grad[2].values[idx];
                        let grad_sq = gx.norm_sqr() + gy.norm_sqr() + gz.norm_sqr();
                        // radial derivative of u at the cell
                        let radial = if r > 0.0 {
                            (gx * pos[0] + gy * pos[1] + gz * pos[2]) / r
                        } else {
                            num_complex::Complex64::new(0.0, 0.0)
                        };
                        let radial_sq = radial.norm_sqr().min(grad_sq);
                        let tangential_sq = grad_sq - radial_sq;
                        hessian += t.psi2[idx] * radial_sq + t.psi1_over_r[idx] * tangential_sq;
                        if ball.is_none() {
                            bilap += u2 * t.bilap[idx];
                        }
                        potential_term += u2 * t.potential_weight[idx];
                        if s_lambda != 0.0 {
                            nonlinear += u2.powf(5.0 / 3.0) * t.lap[idx];
                        }
                        // Im(u* d_r u) psi'
                        flux += (uv.conj() * radial).im * t.psi1[idx];
                    }
                    let bilap_term = match ball {
                        Some((_, value)) => {
                            let mass = ball_masses[ball_cursor];
                            ball_cursor += 1;
                            -0.25 * value * mass
                        }
                        None => -0.25 * bilap * cell,
                    };
                    SnapshotTerms {
                        hessian: hessian * cell,
                        bilap: bilap_term,
                        potential: potential_term * cell,
                        nonlinear: s_lambda / 5.0 * nonlinear * cell,
                        flux: flux * cell,
                    }
                })
                .collect()
        })
        .collect();

    let times: Vec<f64> = traj.snapshots.iter().map(|s| s.time).collect();
    let mut readings = Vec::with_capacity(multipliers.len());
    for m in 0..multipliers.len() {
        let collect = |f: &dyn Fn(&SnapshotTerms) -> f64| -> Vec<f64> {
            per_snapshot.iter().map(|row| f(&row[m])).collect()
        };
        let lhs_hessian = trapezoid(&times, &collect(&|t| t.hessian));
        let lhs_bilap = trapezoid(&times, &collect(&|t| t.bilap));
        let lhs_potential = trapezoid(&times, &collect(&|t| t.potential));
        let lhs_nonlinear = trapezoid(&times, &collect(&|t| t.nonlinear));
        let flux_first = per_snapshot.first().unwrap()[m].flux;
        let flux_last = per_snapshot.last().unwrap()[m].flux;
        let rhs_boundary_t = -sigma * 0.5 * flux_last;
        let rhs_boundary_0 = sigma * 0.5 * flux_first;
        let lhs = lhs_hessian + lhs_bilap + lhs_potential + lhs_nonlinear;
        let rhs = rhs_boundary_t + rhs_boundary_0;
        let residual = (lhs - rhs).abs();
        let relative_residual = if rhs.abs() > 0.0 {
            residual / rhs.abs()
        } else {
            residual
        };
        readings.push(MorawetzReading {
            lhs_hessian,
            lhs_bilap,
            lhs_potential,
            lhs_nonlinear,
            rhs_boundary_t,
            rhs_boundary_0,
            residual,
            relative_residual,
        });
    }
    Ok(readings)
}

/// Single-multiplier wrapper around [`morawetz_residuals`].
pub fn morawetz_residual(
    traj: &Trajectory,
    profile: &(dyn RadialProfile + Sync),
    r_scale: f64,
    spec: &EquationSpec,
) -> Result<MorawetzReading> {
    Ok(morawetz_residuals(traj, &[(profile, r_scale)], spec)?.remove(0))
}

/// Boundary flux `Im Int u* grad u . grad phi_R dx`; bounded by a constant
/// multiple of ||f||^2 in the half-derivative norm uniformly in R.
pub fn flux_functional(u: &Field, profile: &dyn RadialProfile, r_scale: f64) -> Result<f64> {
    let scaled = ScaledProfile::new(profile, r_scale);
    let grad = gradient(u)?;
    let grid = u.grid;
    let mut acc = 0.0;
    for idx in 0..grid.len() {
        let pos = grid.position(idx);
        let r = grid.radius(idx);
        if r == 0.0 {
            continue;
        }
        let radial = (grad[0].values[idx] * pos[0]
            + grad[1].values[idx] * pos[1]
            + grad[2].values[idx] * pos[2])
            / r;
        acc += (u.values[idx].conj() * radial).im * scaled.phi_prime(r);
    }
    Ok(acc * grid.cell_volume())
}

/// The uniqueness functional M(t) = (1/t) Int |x| |u(t)|^2 dx.
pub fn uniqueness_functional(u: &Field, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::parameter("t", "uniqueness functional needs t > 0"));
    }
    Ok(compute_norm(u, NormKind::WeightedL2(1.0))?.powi(2) / t)
}

/// Space-time mass of the potential interaction inside the unit cylinder:
/// `Int_0^T Int_{|x|<1} (|u|^2/|x|^2) W dx dt`, with the same clamp as the
/// sampled potential.
pub fn weighted_mass_near_origin(traj: &Trajectory, pot: &AngularPotential) -> Result<f64> {
    require_snapshots(traj, 2, "weighted_mass_near_origin")?;
    let grid = traj.initial().grid;
    let v: PotentialField = sample_potential(grid, pot)?;
    let inside: Vec<usize> = (0..grid.len()).filter(|&i| grid.radius(i) < 1.0).collect();
    let series: Vec<f64> = traj
        .snapshots
        .iter()
        .map(|snap| {
            inside
                .iter()
                .map(|&i| v.values[i] * snap.values[i].norm_sqr())
                .sum::<f64>()
                * grid.cell_volume()
        })
        .collect();
    let times: Vec<f64> = traj.snapshots.iter().map(|s| s.time).collect();
    Ok(trapezoid(&times, &series))
}

/// Mixed-norm Strichartz monitors at n = 3: `||u||_{L^2_t L^6_x}` and the
/// diagonal `||u||_{L^{10/3}_{t,x}}`, both over the snapshot sequence.
pub fn strichartz_monitor(traj: &Trajectory) -> Result<(f64, f64)> {
    let l_mixed = spacetime_norm(&traj.snapshots, 2.0, 6.0)?;
    let l_diag = spacetime_norm(&traj.snapshots, 10.0 / 3.0, 10.0 / 3.0)?;
    Ok((l_mixed, l_diag))
}

/// Truncation integrals of the vanishing lemmas, all with phi_R = R phi(./R):
/// the bilaplacian mass `Int Int |u|^2 |Lap^2 phi_R|`, the potential flux
/// `Int Int (|u|^2/|x|^3) W |phi_R'|` (clamped like the sampled potential)
/// and the nonlinear term `Int Int |u|^{2+4/n} |Lap phi_R|`.
#[derive(Debug, Clone, Copy)]
pub struct TruncationReading {
    pub r_scale: f64,
    pub bilaplacian_mass: f64,
    pub potential_flux: Option<f64>,
    pub nonlinear_mass: Option<f64>,
}

pub fn truncation_integrals(
    traj: &Trajectory,
    profile: &(dyn RadialProfile + Sync),
    r_scale: f64,
    pot: Option<&AngularPotential>,
    include_nonlinear: bool,
) -> Result<TruncationReading> {
    require_snapshots(traj, 2, "truncation_integrals")?;
    let grid = traj.initial().grid;
    let cell = grid.cell_volume();
    let scaled = ScaledProfile::new(profile, r_scale);
    let len = grid.len();
    let jumps = scaled.jump_radii();
    let abs_bilap = averaged_weight_table(grid, &jumps, 0.0, |p| {
        scaled
            .bilaplacian((p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt())
            .abs()
    });
    let mut abs_lap = vec![0.0_f64; len];
    for idx in 0..len {
        abs_lap[idx] = scaled.laplacian(grid.radius(idx)).abs();
    }
    let pot_weight = match pot {
        Some(p) => {
            let eps = p.regularization_radius;
            averaged_weight_table(grid, &[eps], eps + 2.0 * grid.spacing(), |q| {
                let r = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt();
                let rc = r.max(eps);
                p.w_theta(q) / (rc * rc * rc) * scaled.phi_prime(r).abs()
            })
        }
        None => vec![0.0_f64; len],
    };

    let times: Vec<f64> = traj.snapshots.iter().map(|s| s.time).collect();
    let series: Vec<[f64; 3]> = traj
        .snapshots
        .par_iter()
        .map(|snap| {
            let mut bilap = 0.0;
            let mut potential = 0.0;
            let mut nonlinear = 0.0;
            for idx in 0..len {
                let u2 = snap.values[idx].norm_sqr();
                bilap += u2 * abs_bilap[idx];
                if pot.is_some() {
                    potential += u2 * pot_weight[idx];
                }
                if include_nonlinear {
                    nonlinear += u2.powf(5.0 / 3.0) * abs_lap[idx];
                }
            }
            [bilap * cell, potential * cell, nonlinear * cell]
        })
        .collect();

    let column = |k: usize| -> Vec<f64> { series.iter().map(|row| row[k]).collect() };
    Ok(TruncationReading {
        r_scale,
        bilaplacian_mass: trapezoid(&times, &column(0)),
        potential_flux: pot.map(|_| trapezoid(&times, &column(1))),
        nonlinear_mass: include_nonlinear.then(|| trapezoid(&times, &column(2))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equation::KineticSign;
    use crate::grid::Space;
    use crate::oracle::GaussianPacket;
    use crate::test_functions::{build_phi_n3, QuadraticProfile, ZeroProfile};
    use num_complex::Complex64;

    fn zero_trajectory(grid: Grid) -> Trajectory {
        let mut a = Field::zeros(grid, 0.0);
        a.time = 0.0;
        let mut b = Field::zeros(grid, 1.0);
        b.time = 1.0;
        Trajectory {
            spec: EquationSpec::free(KineticSign::MinusLaplacian),
            snapshots: vec![a, b],
            diagnostics: vec![],
            aborted: None,
        }
    }

    #[test]
    fn smoothing_profile_zero_trajectory() {
        let grid = Grid::new(3, 10.0, 16).unwrap();
        let traj = zero_trajectory(grid);
        let f = Field::zeros(grid, 0.0);
        let profile = smoothing_profile(&traj, &[1.0, 2.0, 4.0], &f).unwrap();
        assert!(profile.values.iter().all(|&v| v == 0.0));
        assert_eq!(profile.sup_value, 0.0);
    }

    #[test]
    fn ball_gradient_mass_is_nondecreasing_in_radius() {
        let grid = Grid::new(3, 10.0, 32).unwrap();
        let packet = GaussianPacket::centered(1.0);
        let times: Vec<f64> = (0..=8).map(|k| k as f64 * 0.25).collect();
        let traj = packet
            .oracle_trajectory(grid, &times, KineticSign::MinusLaplacian)
            .unwrap();
        let f = packet.sample(grid);
        let profile = smoothing_profile(&traj, &[1.0, 2.0, 4.0, 9.0], &f).unwrap();
        // R S(R) = the ball integral is nondecreasing in R
        let ball: Vec<f64> = profile
            .radii
            .iter()
            .zip(profile.values.iter())
            .map(|(r, v)| r * v)
            .collect();
        assert!(ball.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        assert!(profile.ratio_sup > 0.0);
        // 9 exceeds the 0.8 L = 8 validity cap
        assert!(profile.flagged_radii.contains(&9.0));
        assert!(!profile.flagged_radii.contains(&4.0));
    }

    #[test]
    fn hessian_form_with_identity_multiplier_is_gradient_density() {
        let grid = Grid::new(3, 8.0, 24).unwrap();
        let u = Field::from_fn(grid, 0.0, |[x, y, z]| {
            Complex64::new((x * 0.7).sin() * (-0.2 * (y * y + z * z)).exp(), 0.3 * x * z.cos())
        });
        let quad = QuadraticProfile { dim: 3 };
        let density = hessian_quadratic_form(&u, &quad, 1.0).unwrap();
        let split = gradient_split(&u).unwrap();
        for idx in 0..grid.len() {
            let expected = split.gradient_sq[idx];
            assert!(
                (density[idx] - expected).abs() <= 1e-10 * expected.max(1.0),
                "density mismatch at {idx}"
            );
        }
    }

    #[test]
    fn hessian_form_for_radial_data_has_no_tangential_part() {
        let grid = Grid::new(3, 10.0, 48).unwrap();
        let u = Field::from_fn(grid, 0.0, |[x, y, z]| {
            Complex64::new((-(x * x + y * y + z * z) / 2.0).exp(), 0.0)
        });
        let tf = build_phi_n3();
        // density must equal phi''(r/R)/R * |d_r u|^2 pointwise
        let density = hessian_quadratic_form(&u, &tf, 2.0).unwrap();
        let split = gradient_split(&u).unwrap();
        for idx in 0..grid.len() {
            let r = grid.radius(idx);
            let expected = tf.phi_second(r / 2.0) / 2.0 * split.radial_sq[idx];
            assert!((density[idx] - expected).abs() < 1e-8 * expected.abs().max(1e-3));
        }
        // and nonnegative for the appendix family
        assert!(density.iter().all(|&d| d >= -1e-14));
    }

    #[test]
    fn zero_multiplier_kills_every_morawetz_term() {
        let grid = Grid::new(3, 8.0, 16).unwrap();
        let packet = GaussianPacket::centered(1.0);
        let times: Vec<f64> = (0..=4).map(|k| k as f64 * 0.25).collect();
        let traj = packet
            .oracle_trajectory(grid, &times, KineticSign::MinusLaplacian)
            .unwrap();
        let spec = EquationSpec::free(KineticSign::MinusLaplacian);
        let zero = ZeroProfile { dim: 3 };
        let reading = morawetz_residual(&traj, &zero, 1.0, &spec).unwrap();
        assert_eq!(reading.lhs_total(), 0.0);
        assert_eq!(reading.rhs_total(), 0.0);
        assert_eq!(reading.residual, 0.0);
    }

    #[test]
    fn flux_of_real_field_vanishes() {
        // grid-periodic real field: the flux is Im of a real quadratic form,
        // so only spectral-differentiation roundoff survives
        let grid = Grid::new(3, 8.0, 24).unwrap();
        let l = grid.box_half_width();
        let u = Field::from_fn(grid, 0.0, |[x, y, z]| {
            Complex64::new(
                (-(x * x + y * y + z * z) / 2.0).exp()
                    * (1.0 + 0.1 * (std::f64::consts::PI * x / l).sin()),
                0.0,
            )
        });
        let tf = build_phi_n3();
        let flux = flux_functional(&u, &tf, 2.0).unwrap();
        // compare against the size of the same sum without the Im
        let grad = gradient(&u).unwrap();
        let mut bound = 0.0;
        for idx in 0..grid.len() {
            let pos = grid.position(idx);
            let r = grid.radius(idx);
            let radial = (grad[0].values[idx] * pos[0]
                + grad[1].values[idx] * pos[1]
                + grad[2].values[idx] * pos[2])
                / r;
            bound += (u.values[idx].conj() * radial).norm() * tf.phi_prime(r / 2.0).abs();
        }
        bound *= grid.cell_volume();
        assert!(flux.abs() < 1e-11 * bound, "flux {flux} vs bound {bound}");
        // zero field
        let z = Field::zeros(grid, 0.0);
        assert_eq!(flux_functional(&z, &tf, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn uniqueness_functional_scaling_and_zero() {
        let grid = Grid::new(3, 8.0, 24).unwrap();
        let z = Field::zeros(grid, 1.0);
        assert_eq!(uniqueness_functional(&z, 1.0).unwrap(), 0.0);
        let u = GaussianPacket::centered(1.0).sample(grid);
        let mut doubled = u.clone();
        for v in doubled.values.iter_mut() {
            *v *= 2.0;
        }
        let m1 = uniqueness_functional(&u, 2.0).unwrap();
        let m2 = uniqueness_functional(&doubled, 2.0).unwrap();
        assert!((m2 - 4.0 * m1).abs() < 1e-10 * m2);
        assert!(uniqueness_functional(&u, 0.0).is_err());
    }

    #[test]
    fn weighted_mass_vanishes_without_field_or_potential() {
        let grid = Grid::new(3, 8.0, 24).unwrap();
        let traj = zero_trajectory(grid);
        let pot = AngularPotential::constant(1.0, 2.0 * grid.spacing()).unwrap();
        assert_eq!(weighted_mass_near_origin(&traj, &pot).unwrap(), 0.0);
        let packet = GaussianPacket::centered(1.0);
        let times = [0.0, 0.5, 1.0];
        let traj = packet
            .oracle_trajectory(grid, &times, KineticSign::MinusLaplacian)
            .unwrap();
        let w0 = AngularPotential::constant(0.0, 2.0 * grid.spacing()).unwrap();
        assert_eq!(weighted_mass_near_origin(&traj, &w0).unwrap(), 0.0);
        assert!(weighted_mass_near_origin(&traj, &pot).unwrap() > 0.0);
    }

    #[test]
    fn strichartz_monitors_scale_linearly() {
        let grid = Grid::new(3, 10.0, 24).unwrap();
        let packet = GaussianPacket::centered(1.0);
        let times: Vec<f64> = (0..=6).map(|k| k as f64 * 0.2).collect();
        let traj = packet
            .oracle_trajectory(grid, &times, KineticSign::MinusLaplacian)
            .unwrap();
        let scaled_packet = GaussianPacket {
            amplitude: Complex64::new(0.35, 0.0),
            ..GaussianPacket::centered(1.0)
        };
        let traj_scaled = scaled_packet
            .oracle_trajectory(grid, &times, KineticSign::MinusLaplacian)
            .unwrap();
        let (a_mixed, a_diag) = strichartz_monitor(&traj).unwrap();
        let (b_mixed, b_diag) = strichartz_monitor(&traj_scaled).unwrap();
        assert!((b_mixed - 0.35 * a_mixed).abs() < 1e-8 * a_mixed);
        assert!((b_diag - 0.35 * a_diag).abs() < 1e-8 * a_diag);
        // zero trajectory maps to (0, 0)
        let (z_mixed, z_diag) = strichartz_monitor(&zero_trajectory(grid)).unwrap();
        assert_eq!((z_mixed, z_diag), (0.0, 0.0));
    }

    #[test]
    fn frequency_side_fields_are_rejected() {
        let grid = Grid::new(3, 8.0, 16).unwrap();
        let mut f = Field::zeros(grid, 0.0);
        f.space = Space::Frequency;
        assert!(uniqueness_functional(&f, 1.0).is_err());
    }
}
