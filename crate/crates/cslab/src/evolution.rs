//! Strang split-step evolution with an exact spectral kinetic step.
//!
//! One step of size dt applies, with sigma the kinetic sign factor:
//!
//! 1. half phase: `u <- u exp(i sigma (V + s lambda |u|^{4/3}) dt/2)`,
//! 2. full kinetic step: `u_hat <- exp(i sigma |xi|^2 dt) u_hat`,
//! 3. half phase again.
//!
//! Every substep is exactly unitary (the nonlinear phase leaves |u|
//! invariant pointwise), so mass is conserved to roundoff per step and the
//! scheme is time-reversible. For the free equation the splitting
//! degenerates to the exact Fourier propagator.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::equation::{EquationSpec, KineticSign, PotentialField, sample_potential};
use crate::error::{Error, Result};
use crate::fft::fft3_raw;
use crate::grid::Field;

/// Per-step diagnostic record.
#[derive(Debug, Clone, Copy)]
pub struct DiagnosticRow {
    pub time: f64,
    pub mass: f64,
    /// Discrete energy Int(|grad u|^2 + V |u|^2 + s (3 lambda/5) |u|^{10/3});
    /// omitted when energy recording is switched off for throughput.
    pub energy: Option<f64>,
}

/// Set when a run aborted on non-finite values (focusing blow-up policy:
/// abort and flag, never panic).
#[derive(Debug, Clone, Copy)]
pub struct BlowupInfo {
    pub time: f64,
    pub step: usize,
}

/// Time-ordered snapshots plus dense diagnostic series for one run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub spec: EquationSpec,
    pub snapshots: Vec<Field>,
    pub diagnostics: Vec<DiagnosticRow>,
    pub aborted: Option<BlowupInfo>,
}

impl Trajectory {
    pub fn initial(&self) -> &Field {
        self.snapshots.first().expect("trajectory holds at least one snapshot")
    }

    pub fn last(&self) -> &Field {
        self.snapshots.last().expect("trajectory holds at least one snapshot")
    }

    /// Largest fraction of mass found beyond |x| > shell_radius over all
    /// snapshots (the outer-shell box-validity gate).
    pub fn max_shell_fraction(&self, shell_radius: f64) -> f64 {
        self.snapshots
            .iter()
            .map(|s| s.mass_fraction_outside(shell_radius))
            .fold(0.0, f64::max)
    }

    pub fn mass_drift(&self) -> f64 {
        let m0 = self.diagnostics.first().map(|d| d.mass).unwrap_or(0.0);
        if m0 == 0.0 {
            return 0.0;
        }
        self.diagnostics
            .iter()
            .map(|d| (d.mass - m0).abs() / m0)
            .fold(0.0, f64::max)
    }

    /// Relative spread of the recorded energies, max |E(t) - E(0)| / |E(0)|.
    pub fn energy_drift(&self) -> Option<f64> {
        let e0 = self.diagnostics.first().and_then(|d| d.energy)?;
        if e0 == 0.0 {
            return None;
        }
        let mut worst = 0.0_f64;
        for d in &self.diagnostics {
            worst = worst.max((d.energy? - e0).abs() / e0.abs());
        }
        Some(worst)
    }
}

/// Exact free propagator: multiplier `exp(i sigma |xi|^2 dt)` with
/// sigma = +1 for `MinusLaplacian` (i du/dt = Lap u) and -1 for
/// `PlusLaplacian`. Exactly unitary for any dt of either sign.
pub fn free_propagate(field: &Field, dt: f64, kinetic_sign: KineticSign) -> Result<Field> {
    field.require_position()?;
    let mut out = field.clone();
    kinetic_step(&mut out, dt, kinetic_sign);
    out.time = field.time + dt;
    Ok(out)
}

fn kinetic_step(field: &mut Field, dt: f64, kinetic_sign: KineticSign) {
    let grid = field.grid;
    let n = grid.points_per_axis();
    let sigma = kinetic_sign.sigma();
    let freqs = grid.frequencies();
    fft3_raw(&mut field.values, n, false);
    let scale = 1.0 / grid.len() as f64;
    field
        .values
        .par_chunks_mut(n * n)
        .enumerate()
        .for_each(|(kx, slab)| {
            let fx2 = freqs[kx] * freqs[kx];
            for ky in 0..n {
                let fxy2 = fx2 + freqs[ky] * freqs[ky];
                for kz in 0..n {
                    let k2 = fxy2 + freqs[kz] * freqs[kz];
                    slab[ky * n + kz] *= Complex64::from_polar(scale, sigma * k2 * dt);
                }
            }
        });
    fft3_raw(&mut field.values, n, true);
}

/// Half-step multiplicative phase from potential and nonlinearity. |u| is
/// invariant along this substep flow, so the rotation is exact.
fn phase_step(field: &mut Field, dt: f64, spec: &EquationSpec, potential: Option<&PotentialField>) {
    let sigma = spec.kinetic_sign.sigma();
    let s_lambda = spec.nonlinearity.sign() * spec.coupling;
    match (potential, s_lambda != 0.0) {
        (None, false) => {}
        (Some(v), false) => {
            field
                .values
                .par_iter_mut()
                .zip(v.values.par_iter())
                .for_each(|(u, &vv)| {
                    *u *= Complex64::from_polar(1.0, sigma * vv * dt);
                });
        }
        (None, true) => {
            let half_exponent = EquationSpec::EXPONENT / 2.0;
            field.values.par_iter_mut().for_each(|u| {
                let amp = u.norm_sqr().powf(half_exponent); // |u|^{4/3}
                *u *= Complex64::from_polar(1.0, sigma * s_lambda * amp * dt);
            });
        }
        (Some(v), true) => {
            let half_exponent = EquationSpec::EXPONENT / 2.0;
            field
                .values
                .par_iter_mut()
                .zip(v.values.par_iter())
                .for_each(|(u, &vv)| {
                    let amp = u.norm_sqr().powf(half_exponent);
                    *u *= Complex64::from_polar(1.0, sigma * (vv + s_lambda * amp) * dt);
                });
        }
    }
}

/// One Strang step. `potential` must be present exactly when the spec has
/// one (and sampled on the same grid).
pub fn strang_step(
    field: &Field,
    dt: f64,
    spec: &EquationSpec,
    potential: Option<&PotentialField>,
) -> Result<Field> {
    field.require_position()?;
    if spec.potential.is_some() != potential.is_some() {
        return Err(Error::Config(
            "potential field must be supplied iff the spec has a potential".into(),
        ));
    }
    let mut out = field.clone();
    phase_step(&mut out, dt / 2.0, spec, potential);
    kinetic_step(&mut out, dt, spec.kinetic_sign);
    phase_step(&mut out, dt / 2.0, spec, potential);
    out.time = field.time + dt;
    Ok(out)
}

/// Discrete energy Int(|grad u|^2 + V |u|^2 + s (lambda n/(n+2)) |u|^{2+4/n})
/// at n = 3. The gradient part is summed in frequency space; the rest is
/// cell quadrature.
pub fn discrete_energy(
    field: &Field,
    spec: &EquationSpec,
    potential: Option<&PotentialField>,
) -> f64 {
    let grid = field.grid;
    let n = grid.points_per_axis();
    let freqs = grid.frequencies();
    let mut spectrum = field.values.clone();
    fft3_raw(&mut spectrum, n, false);
    let mut kinetic = 0.0;
    for kx in 0..n {
        let fx2 = freqs[kx] * freqs[kx];
        for ky in 0..n {
            let fxy2 = fx2 + freqs[ky] * freqs[ky];
            let row = (kx * n + ky) * n;
            for kz in 0..n {
                let k2 = fxy2 + freqs[kz] * freqs[kz];
                kinetic += k2 * spectrum[row + kz].norm_sqr();
            }
        }
    }
    // |u_hat|^2 dxi accumulates to h^3/N^3 per raw-DFT mode
    kinetic *= grid.cell_volume() / grid.len() as f64;

    let mut potential_term = 0.0;
    if let Some(v) = potential {
        for (u, &vv) in field.values.iter().zip(v.values.iter()) {
            potential_term += vv * u.norm_sqr();
        }
        potential_term *= grid.cell_volume();
    }

    let s_lambda = spec.nonlinearity.sign() * spec.coupling;
    let mut nonlinear_term = 0.0;
    if s_lambda != 0.0 {
        for u in &field.values {
            nonlinear_term += u.norm_sqr().powf(5.0 / 3.0); // |u|^{10/3}
        }
        nonlinear_term *= s_lambda * (3.0 / 5.0) * grid.cell_volume();
    }

    kinetic + potential_term + nonlinear_term
}

/// Evolution controls beyond the equation itself.
#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions {
    /// Record the discrete energy in the per-step diagnostics. Costs one
    /// extra forward transform per step when the phase substep is active.
    pub record_energy: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions { record_energy: true }
    }
}

/// Evolve `f` from t0 to t1 (either direction) with steps of size ~dt,
/// storing snapshots at the requested times (nearest-step placement, actual
/// times recorded) and per-step diagnostics. Non-finite values abort the run
/// with the last valid state as final snapshot and a blow-up flag.
pub fn evolve(
    f: &Field,
    t0: f64,
    t1: f64,
    dt: f64,
    spec: &EquationSpec,
    snapshot_times: &[f64],
    options: EvolveOptions,
) -> Result<Trajectory> {
    f.require_position()?;
    if !(dt > 0.0) {
        return Err(Error::parameter("dt", "step size must be positive"));
    }
    if t0 == t1 {
        return Err(Error::parameter("t1", "empty time interval"));
    }
    let (lo, hi) = (t0.min(t1), t0.max(t1));
    for &t in snapshot_times {
        if t < lo - 1e-12 || t > hi + 1e-12 {
            return Err(Error::parameter(
                "snapshot_times",
                format!("time {t} outside [{lo}, {hi}]"),
            ));
        }
    }
    let span = t1 - t0;
    let steps = (span.abs() / dt).round().max(1.0) as usize;
    let dt_actual = span / steps as f64;

    let potential = match &spec.potential {
        Some(p) => Some(sample_potential(f.grid, p)?),
        None => None,
    };

    // map snapshot times to step indices
    let mut snap_steps: Vec<usize> = snapshot_times
        .iter()
        .map(|&t| (((t - t0) / dt_actual).round() as i64).clamp(0, steps as i64) as usize)
        .collect();
    snap_steps.sort_unstable();
    snap_steps.dedup();

    let record = |field: &Field, diagnostics: &mut Vec<DiagnosticRow>| {
        let energy = options
            .record_energy
            .then(|| discrete_energy(field, spec, potential.as_ref()));
        diagnostics.push(DiagnosticRow {
            time: field.time,
            mass: field.mass(),
            energy,
        });
    };

    let mut state = f.clone();
    state.time = t0;
    let mut snapshots = Vec::with_capacity(snap_steps.len().max(1));
    let mut diagnostics = Vec::with_capacity(steps + 1);
    record(&state, &mut diagnostics);
    if snap_steps.first() == Some(&0) {
        snapshots.push(state.clone());
        snap_steps.remove(0);
    }

    let mut aborted = None;
    for step in 1..=steps {
        let next = strang_step(&state, dt_actual, spec, potential.as_ref())?;
        if !next.is_finite() {
            aborted = Some(BlowupInfo {
                time: state.time,
                step,
            });
            break;
        }
        state = next;
        state.time = t0 + step as f64 * dt_actual;
        record(&state, &mut diagnostics);
        if snap_steps.first() == Some(&step) {
            snapshots.push(state.clone());
            snap_steps.remove(0);
        }
    }
    if aborted.is_some() || snapshots.is_empty() {
        // keep the last valid state so downstream reporting has an anchor
        snapshots.push(state);
    }

    Ok(Trajectory {
        spec: *spec,
        snapshots,
        diagnostics,
        aborted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equation::{AngularPotential, Nonlinearity};
    use crate::grid::Grid;
    use crate::norms::{compute_norm, NormKind};

    fn gaussian(grid: Grid, alpha: f64, amp: f64) -> Field {
        Field::from_fn(grid, 0.0, |[x, y, z]| {
            Complex64::new(amp * (-alpha * (x * x + y * y + z * z)).exp(), 0.0)
        })
    }

    #[test]
    fn constant_field_is_fixed_by_free_propagator() {
        let grid = Grid::new(3, 5.0, 16).unwrap();
        let field = Field::from_fn(grid, 0.0, |_| Complex64::new(0.7, -0.2));
        for sign in [KineticSign::MinusLaplacian, KineticSign::PlusLaplacian] {
            let out = free_propagate(&field, 0.37, sign).unwrap();
            for (a, b) in out.values.iter().zip(field.values.iter()) {
                assert!((a - b).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn plane_wave_picks_up_exact_phase() {
        let grid = Grid::new(3, 5.0, 16).unwrap();
        let xi = [grid.frequency(3), grid.frequency(1), grid.frequency(2)];
        let field = Field::from_fn(grid, 0.0, |[x, y, z]| {
            Complex64::from_polar(1.0, xi[0] * x + xi[1] * y + xi[2] * z)
        });
        let dt = 0.21;
        let k2 = xi.iter().map(|v| v * v).sum::<f64>();
        let out = free_propagate(&field, dt, KineticSign::PlusLaplacian).unwrap();
        let expected = Complex64::from_polar(1.0, -k2 * dt);
        for (a, b) in out.values.iter().zip(field.values.iter()) {
            assert!((a - expected * b).norm() < 1e-12);
        }
    }

    #[test]
    fn free_spec_strang_step_degenerates_to_free_propagator() {
        let grid = Grid::new(3, 5.0, 16).unwrap();
        let field = gaussian(grid, 0.5, 1.0);
        let spec = EquationSpec::free(KineticSign::MinusLaplacian);
        let a = strang_step(&field, 0.05, &spec, None).unwrap();
        let b = free_propagate(&field, 0.05, KineticSign::MinusLaplacian).unwrap();
        for (x, y) in a.values.iter().zip(b.values.iter()) {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn single_step_preserves_mass_to_roundoff() {
        let grid = Grid::new(3, 8.0, 24).unwrap();
        let pot = AngularPotential::constant(1.0, 2.0 * grid.spacing()).unwrap();
        let spec = EquationSpec::new(
            KineticSign::MinusLaplacian,
            Some(pot),
            Nonlinearity::Defocusing,
            1.0,
        )
        .unwrap();
        let v = sample_potential(grid, &pot).unwrap();
        let field = gaussian(grid, 0.5, 0.1);
        let out = strang_step(&field, 1e-3, &spec, Some(&v)).unwrap();
        let m0 = field.mass();
        let m1 = out.mass();
        assert!((m1 - m0).abs() < 1e-12 * m0);
    }

    #[test]
    fn strang_local_defect_scales_cubically() {
        // two steps of dt/2 vs one step of dt against a dt -> 0 proxy:
        // the defect between the dt and dt/2 flows drops ~8x per halving
        let grid = Grid::new(3, 8.0, 24).unwrap();
        let pot = AngularPotential::constant(1.0, 2.0 * grid.spacing()).unwrap();
        let spec = EquationSpec::linear(KineticSign::MinusLaplacian, pot);
        let v = sample_potential(grid, &pot).unwrap();
        let field = gaussian(grid, 0.5, 1.0);

        let defect = |dt: f64| -> f64 {
            let one = strang_step(&field, dt, &spec, Some(&v)).unwrap();
            let half = strang_step(&field, dt / 2.0, &spec, Some(&v)).unwrap();
            let two = strang_step(&half, dt / 2.0, &spec, Some(&v)).unwrap();
            let num: f64 = one
                .values
                .iter()
                .zip(two.values.iter())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            num
        };
        let d1 = defect(0.08);
        let d2 = defect(0.04);
        let ratio = d1 / d2;
        assert!(
            (ratio - 8.0).abs() < 0.25 * 8.0,
            "local defect ratio {ratio} not within 25% of 8"
        );
    }

    #[test]
    fn evolve_zero_data_stays_zero() {
        let grid = Grid::new(3, 5.0, 16).unwrap();
        let f = Field::zeros(grid, 0.0);
        let spec = EquationSpec::free(KineticSign::MinusLaplacian);
        let traj = evolve(&f, 0.0, 0.1, 0.01, &spec, &[0.0, 0.05, 0.1], EvolveOptions::default())
            .unwrap();
        assert_eq!(traj.snapshots.len(), 3);
        for s in &traj.snapshots {
            assert!(compute_norm(s, NormKind::L2).unwrap() == 0.0);
        }
        assert!(traj.aborted.is_none());
    }

    #[test]
    fn evolve_is_time_reversible() {
        let grid = Grid::new(3, 8.0, 24).unwrap();
        let pot = AngularPotential::constant(1.0, 2.0 * grid.spacing()).unwrap();
        let spec = EquationSpec::linear(KineticSign::MinusLaplacian, pot);
        let f = gaussian(grid, 0.5, 1.0);
        let fwd = evolve(&f, 0.0, 0.25, 5e-3, &spec, &[0.25], EvolveOptions::default()).unwrap();
        let back = evolve(
            fwd.last(),
            0.25,
            0.0,
            5e-3,
            &spec,
            &[0.0],
            EvolveOptions::default(),
        )
        .unwrap();
        let l2 = compute_norm(&f, NormKind::L2).unwrap();
        let err: f64 = back
            .last()
            .values
            .iter()
            .zip(f.values.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
            * grid.cell_volume().sqrt();
        assert!(err < 1e-8 * l2, "reversibility error {err}");
    }

    #[test]
    fn focusing_blowup_aborts_with_flag() {
        // Absurdly large focusing coupling and step: the phase rotation
        // stays finite, but |u|^{4/3} overflow is emulated with huge data.
        let grid = Grid::new(3, 5.0, 16).unwrap();
        let spec =
            EquationSpec::new(KineticSign::MinusLaplacian, None, Nonlinearity::Focusing, 1.0)
                .unwrap();
        let f = gaussian(grid, 0.5, 1e160);
        // |u|^2 overflows to inf -> phase NaN -> abort flag
        let traj = evolve(&f, 0.0, 0.1, 0.05, &spec, &[0.1], EvolveOptions { record_energy: false })
            .unwrap();
        assert!(traj.aborted.is_some());
        assert!(!traj.snapshots.is_empty());
    }
}
