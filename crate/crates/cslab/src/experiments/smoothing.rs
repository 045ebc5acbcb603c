//! Two-sided local smoothing over a Gaussian data family, the liminf
//! lower-bound surrogate, the multiplier-identity residual study and the
//! vanishing truncation integrals for the linear equations.
//!
//! The W = 0 block evaluates trajectories through the closed-form free
//! propagator (no periodic wrap, long horizons are exact); the W = 1 block
//! steps the clamped potential flow with per-member horizons chosen so the
//! base window stays box-valid. Doubling studies: horizon doubling per
//! member and resolution doubling (spatial for the closed-form block, time
//! step for the stepped block).

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use crate::config::RunConfig;
use crate::equation::{AngularPotential, EquationSpec, KineticSign};
use crate::error::Result;
use crate::evolution::{evolve, EvolveOptions};
use crate::functionals::{
    flux_functional, morawetz_residuals, smoothing_profile, truncation_integrals, SmoothingProfile,
};
use crate::grid::Grid;
use crate::norms::{compute_norm, NormKind};
use crate::oracle::GaussianPacket;
use crate::report::{AssertionResult, Comparator, ScenarioReport, SweepTable};
use crate::test_functions::{build_bump_phi, build_phi_n3};

use super::{gate_trajectory, sweep_row, uniform_times, SHELL_GATE_FRACTION};

/// Interval width bound: the family's sup-ratios stay within this factor.
const INTERVAL_FACTOR: f64 = 50.0;
/// Stability of the interval endpoints under doubling studies.
const STABILITY_TOL: f64 = 0.10;
/// Identity residual bounds: default and time-refined resolution.
const MORAWETZ_TOL_BASE: f64 = 2e-2;
const MORAWETZ_TOL_REFINED: f64 = 5e-3;
/// Window for the 4x residual reduction under dt halving, and the floor
/// below which the residual counts as converged past measurability.
const MORAWETZ_RATIO_WINDOW: (f64, f64) = (3.0, 5.0);
const MORAWETZ_MEASURABILITY_FLOOR: f64 = 5e-4;
/// Flux-bound stability under resolution doubling.
const FLUX_STABILITY_TOL: f64 = 0.15;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum PotentialBlock {
    W0,
    W1,
}

impl PotentialBlock {
    fn label(&self) -> &'static str {
        match self {
            PotentialBlock::W0 => "W0",
            PotentialBlock::W1 => "W1",
        }
    }
}

/// Family parameter sets (width, momentum, offset, base horizon). The
/// stepped W = 1 block trims the widest/fastest members so their base
/// windows stay box-valid; the closed-form block exercises the full spans.
fn family_parameters(block: PotentialBlock) -> Vec<(f64, [f64; 3], [f64; 3], f64)> {
    match block {
        PotentialBlock::W0 => vec![
            (1.0, [0.0, 0.0, 0.0], [0.0, 0.0, 0.0], 6.0),
            (0.5, [0.0, 0.0, 0.0], [0.0, 0.0, 0.0], 6.0),
            (2.0, [0.0, 0.0, 0.0], [0.0, 0.0, 0.0], 8.0),
            (1.0, [1.5, 0.0, 0.0], [0.0, 0.0, 0.0], 6.0),
            (1.0, [0.0, 0.0, 3.0], [0.0, 0.0, 0.0], 6.0),
            (1.0, [0.0, 0.0, 0.0], [2.0, 0.0, 0.0], 6.0),
            (1.5, [0.0, 1.0, 0.0], [0.0, -1.0, 0.0], 7.0),
            (0.75, [0.8, 0.8, 0.0], [1.0, 0.0, 0.0], 6.0),
        ],
        PotentialBlock::W1 => vec![
            (1.0, [0.0, 0.0, 0.0], [0.0, 0.0, 0.0], 1.6),
            (0.5, [0.0, 0.0, 0.0], [0.0, 0.0, 0.0], 1.0),
            (1.5, [0.0, 0.0, 0.0], [0.0, 0.0, 0.0], 2.0),
            (1.0, [1.5, 0.0, 0.0], [0.0, 0.0, 0.0], 1.4),
            (1.0, [0.0, 0.0, 2.5], [0.0, 0.0, 0.0], 1.2),
            (1.0, [0.0, 0.0, 0.0], [2.0, 0.0, 0.0], 1.4),
            (1.5, [0.0, 1.0, 0.0], [0.0, -1.0, 0.0], 1.8),
            (0.75, [0.8, 0.8, 0.0], [1.0, 0.0, 0.0], 1.2),
        ],
    }
}

pub(crate) struct MemberStudy {
    pub id: usize,
    pub hdot_half_sq: f64,
    pub horizon: f64,
    pub base: SmoothingProfile,
    pub doubled_t: SmoothingProfile,
    pub doubled_res: SmoothingProfile,
    /// max over time samples and ladder radii of |flux| / ||f||^2_{H.5},
    /// at base and doubled resolution.
    pub flux_ratio_base: f64,
    pub flux_ratio_res: f64,
    /// max outer-shell mass fraction over the base window (stepped block).
    pub shell_base: f64,
    pub aborted: bool,
}

pub(crate) struct FamilyStudy {
    pub block: PotentialBlock,
    pub members: Vec<MemberStudy>,
    pub notes: Vec<String>,
}

impl FamilyStudy {
    fn endpoints(&self, pick: impl Fn(&MemberStudy) -> f64) -> (f64, f64) {
        let values: Vec<f64> = self.members.iter().map(pick).collect();
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(0.0_f64, f64::max);
        (lo, hi)
    }
}

const RADIUS_LADDER: [f64; 3] = [1.0, 2.0, 4.0];

fn study_grid(block: PotentialBlock, doubled_space: bool) -> Result<Grid> {
    match block {
        PotentialBlock::W0 => Grid::new(3, 16.0, if doubled_space { 128 } else { 64 }),
        PotentialBlock::W1 => Grid::new(3, 16.0, 80),
    }
}

fn member_study_w0(
    id: usize,
    packet: GaussianPacket,
    horizon: f64,
) -> Result<MemberStudy> {
    let grid = study_grid(PotentialBlock::W0, false)?;
    let f = packet.sample(grid);
    let hdot_half_sq = compute_norm(&f, NormKind::HdotS(0.5))?.powi(2);
    let sign = KineticSign::MinusLaplacian;

    let profile_for = |grid: Grid, horizon: f64, samples: usize| -> Result<SmoothingProfile> {
        let times = uniform_times(horizon, samples);
        let traj = packet.oracle_trajectory(grid, &times, sign)?;
        let f_local = packet.sample(grid);
        smoothing_profile(&traj, &RADIUS_LADDER, &f_local)
    };
    let base = profile_for(grid, horizon, 65)?;
    let doubled_t = profile_for(grid, 2.0 * horizon, 129)?;
    let doubled_res = profile_for(study_grid(PotentialBlock::W0, true)?, horizon, 65)?;

    // flux sweep over time samples and the ladder
    let tf = build_phi_n3();
    let flux_ratio = |grid: Grid| -> Result<f64> {
        let mut worst = 0.0_f64;
        for t in [0.0, horizon / 2.0, horizon] {
            let u = packet.evolved(grid, t, sign);
            for r in [1.0, 2.0, 4.0, 8.0] {
                worst = worst.max(flux_functional(&u, &tf, r)?.abs() / hdot_half_sq);
            }
        }
        Ok(worst)
    };
    let flux_ratio_base = flux_ratio(grid)?;
    let flux_ratio_res = flux_ratio(study_grid(PotentialBlock::W0, true)?)?;

    Ok(MemberStudy {
        id,
        hdot_half_sq,
        horizon,
        base,
        doubled_t,
        doubled_res,
        flux_ratio_base,
        flux_ratio_res,
        shell_base: 0.0,
        aborted: false,
    })
}

fn member_study_w1(
    id: usize,
    packet: GaussianPacket,
    horizon: f64,
    dt: f64,
) -> Result<MemberStudy> {
    let grid = study_grid(PotentialBlock::W1, false)?;
    let eps = 2.0 * grid.spacing();
    let spec = EquationSpec::linear(
        KineticSign::MinusLaplacian,
        AngularPotential::constant(1.0, eps)?,
    );
    let f = packet.sample(grid);
    let hdot_half_sq = compute_norm(&f, NormKind::HdotS(0.5))?.powi(2);

    let run = |horizon: f64, dt: f64, samples: usize| -> Result<(SmoothingProfile, f64, bool)> {
        let times = uniform_times(horizon, samples);
        let traj = evolve(
            &f,
            0.0,
            horizon,
            dt,
            &spec,
            &times,
            EvolveOptions { record_energy: false },
        )?;
        let shell = traj.max_shell_fraction(0.8 * grid.box_half_width());
        let aborted = traj.aborted.is_some();
        let profile = smoothing_profile(&traj, &RADIUS_LADDER, &f)?;
        Ok((profile, shell, aborted))
    };
    let (base, shell_base, aborted_base) = run(horizon, dt, 33)?;
    let (doubled_t, _, aborted_t) = run(2.0 * horizon, dt, 65)?;
    let (doubled_res, _, aborted_res) = run(horizon, dt / 2.0, 65)?;

    // flux sweep at three times of the base window, both resolutions
    let tf = build_phi_n3();
    let flux_ratio_for = |dt: f64| -> Result<f64> {
        let times = [0.0, horizon / 2.0, horizon];
        let traj = evolve(
            &f,
            0.0,
            horizon,
            dt,
            &spec,
            &times,
            EvolveOptions { record_energy: false },
        )?;
        let mut worst = 0.0_f64;
        for snap in &traj.snapshots {
            for r in [1.0, 2.0, 4.0, 8.0] {
                worst = worst.max(flux_functional(snap, &tf, r)?.abs() / hdot_half_sq);
            }
        }
        Ok(worst)
    };
    let flux_ratio_base = flux_ratio_for(dt)?;
    let flux_ratio_res = flux_ratio_for(dt / 2.0)?;

    Ok(MemberStudy {
        id,
        hdot_half_sq,
        horizon,
        base,
        doubled_t,
        doubled_res,
        flux_ratio_base,
        flux_ratio_res,
        shell_base,
        aborted: aborted_base || aborted_t || aborted_res,
    })
}

/// Compute (or fetch) the family study for one potential block. Both
/// smoothing scenarios consume the same studies; a process-level memo keeps
/// the acceptance run from stepping every trajectory twice.
pub(crate) fn family_study(block: PotentialBlock, dt: f64) -> Result<Arc<FamilyStudy>> {
    static CACHE: OnceLock<Mutex<BTreeMap<String, Arc<FamilyStudy>>>> = OnceLock::new();
    let key = format!("{}:{dt:e}", block.label());
    {
        let cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new())).lock().unwrap();
        if let Some(hit) = cache.get(&key) {
            return Ok(hit.clone());
        }
    }
    let parameters = family_parameters(block);
    let members: Vec<MemberStudy> = parameters
        .par_iter()
        .enumerate()
        .map(|(id, (width, momentum, offset, horizon))| {
            let packet = GaussianPacket {
                width: *width,
                center: *offset,
                momentum: *momentum,
                amplitude: num_complex::Complex64::new(1.0, 0.0),
            };
            match block {
                PotentialBlock::W0 => member_study_w0(id, packet, *horizon),
                PotentialBlock::W1 => member_study_w1(id, packet, *horizon, dt),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut notes = Vec::new();
    if block == PotentialBlock::W0 {
        notes.push(
            "W0 trajectories are closed-form samples of the R^3 flow; the outer-shell gate does \
             not apply and long horizons carry no wrap error"
                .to_string(),
        );
    } else {
        notes.push(
            "W1 horizon-doubling columns run past the box-valid window; wrap contamination is \
             exactly what the stability column measures"
                .to_string(),
        );
    }
    let study = Arc::new(FamilyStudy {
        block,
        members,
        notes,
    });
    let mut cache = CACHE.get_or_init(|| Mutex::new(BTreeMap::new())).lock().unwrap();
    Ok(cache.entry(key).or_insert(study).clone())
}

fn push_family_assertions(
    report: &mut ScenarioReport,
    study: &FamilyStudy,
    rows: &mut Vec<crate::report::SweepRow>,
) {
    let label = study.block.label();
    for note in &study.notes {
        report.notes.push(note.clone());
    }
    for member in &study.members {
        if member.aborted {
            report
                .validity
                .invalidate(format!("{label} member {}: solver aborted", member.id));
        }
        rows.push(sweep_row(
            "smoothing",
            &format!("{label}_m{}", member.id),
            member.horizon,
            member.base.ratio_sup,
            member.hdot_half_sq,
            "ratio_sup_at_base_horizon",
        ));
        if study.block == PotentialBlock::W1 && member.shell_base > SHELL_GATE_FRACTION {
            report.validity.invalidate(format!(
                "{label} member {}: shell fraction {:.2e} over the base window",
                member.id, member.shell_base
            ));
        }
        for (tag, profile) in [
            ("base", &member.base),
            ("doubled_T", &member.doubled_t),
            ("doubled_res", &member.doubled_res),
        ] {
            for (radius, value) in profile.radii.iter().zip(profile.values.iter()) {
                rows.push(sweep_row(
                    "smoothing",
                    &format!("{label}_m{}", member.id),
                    *radius,
                    *value,
                    member.hdot_half_sq,
                    tag,
                ));
            }
        }
    }

    let (r_min, r_max) = study.endpoints(|m| m.base.ratio_sup);
    report.push_assertion(
        AssertionResult::le(format!("{label}_interval_factor"), r_max / r_min, INTERVAL_FACTOR)
            .with_detail(format!("ratio_sup interval [{r_min:.4e}, {r_max:.4e}]")),
    );
    let picks: [(&str, fn(&MemberStudy) -> f64); 2] = [
        ("T_doubling", |m| m.doubled_t.ratio_sup),
        ("res_doubling", |m| m.doubled_res.ratio_sup),
    ];
    for (tag, pick) in picks {
        let (lo, hi) = study.endpoints(pick);
        let drift = ((lo - r_min).abs() / r_min).max((hi - r_max).abs() / r_max);
        report.push_assertion(
            AssertionResult::le(format!("{label}_interval_stability_{tag}"), drift, STABILITY_TOL)
                .with_detail(format!("interval moved to [{lo:.4e}, {hi:.4e}]")),
        );
    }

    // flux bound: finite, stable under resolution doubling; the family
    // spread factor is reported
    let mut worst_stability = 0.0_f64;
    let mut flux_lo = f64::INFINITY;
    let mut flux_hi = 0.0_f64;
    for member in &study.members {
        let stability =
            (member.flux_ratio_res - member.flux_ratio_base).abs() / member.flux_ratio_base;
        worst_stability = worst_stability.max(stability);
        flux_lo = flux_lo.min(member.flux_ratio_base);
        flux_hi = flux_hi.max(member.flux_ratio_base);
    }
    report.push_assertion(
        AssertionResult::le(format!("{label}_flux_bound_stability"), worst_stability, FLUX_STABILITY_TOL)
            .with_detail("max member drift of max |flux|/||f||^2 under resolution doubling"),
    );
    report.push_assertion(AssertionResult::reported(
        format!("{label}_flux_ratio_spread_factor"),
        flux_hi / flux_lo,
    ));
}

/// The multiplier-identity study shared by the linear and NLS scenarios:
/// residuals at default and refined time resolution for the appendix
/// profile at R in {1, 2, 4}, plus the 4x-reduction check with a
/// measurability floor (residuals already below the floor count as
/// converged; scaling below quadrature noise is not observable).
pub(crate) fn morawetz_study(
    report: &mut ScenarioReport,
    rows: &mut Vec<crate::report::SweepRow>,
    label: &str,
    spec: &EquationSpec,
    packet: GaussianPacket,
) -> Result<()> {
    let grid = Grid::new(3, 12.0, 96)?;
    let f = packet.sample(grid);
    let tf = build_phi_n3();
    let dt_base = 5e-3;

    let mut residuals: Vec<Vec<f64>> = Vec::new();
    for (tag, dt, samples) in [("base", dt_base, 41_usize), ("refined", dt_base / 2.0, 81)] {
        let times = uniform_times(1.0, samples);
        let traj = evolve(
            &f,
            0.0,
            1.0,
            dt,
            spec,
            &times,
            EvolveOptions { record_energy: false },
        )?;
        if !gate_trajectory(report, &traj, &format!("morawetz_{label}_{tag}")) {
            return Ok(());
        }
        let readings = morawetz_residuals(
            &traj,
            &[(&tf, RADIUS_LADDER[0]), (&tf, RADIUS_LADDER[1]), (&tf, RADIUS_LADDER[2])],
            spec,
        )?;
        let rels: Vec<f64> = readings.iter().map(|r| r.relative_residual).collect();
        let tol = if tag == "base" {
            MORAWETZ_TOL_BASE
        } else {
            MORAWETZ_TOL_REFINED
        };
        for (radius, reading) in RADIUS_LADDER.iter().zip(readings.iter()) {
            report.push_assertion(
                AssertionResult::le(
                    format!("morawetz_{label}_R{radius}_{tag}"),
                    reading.relative_residual,
                    tol,
                )
                .with_detail(format!(
                    "lhs = {:.6e}, rhs = {:.6e}",
                    reading.lhs_total(),
                    reading.rhs_total()
                )),
            );
            rows.push(sweep_row(
                "morawetz",
                label,
                *radius,
                reading.relative_residual,
                1.0,
                tag,
            ));
        }
        residuals.push(rels);
    }

    for (j, radius) in RADIUS_LADDER.iter().enumerate() {
        let base = residuals[0][j];
        let refined = residuals[1][j];
        let ratio = if refined > 0.0 { base / refined } else { f64::INFINITY };
        let in_window = ratio >= MORAWETZ_RATIO_WINDOW.0 && ratio <= MORAWETZ_RATIO_WINDOW.1;
        let converged = refined <= MORAWETZ_MEASURABILITY_FLOOR;
        report.push_assertion(crate::report::AssertionResult {
            name: format!("morawetz_{label}_R{radius}_dt_scaling"),
            measured: ratio,
            threshold: MORAWETZ_RATIO_WINDOW.1,
            comparator: Comparator::Le,
            passed: in_window || converged,
            detail: format!(
                "residual {base:.3e} -> {refined:.3e}; 4x window [{}, {}] or refined residual \
                 below the {MORAWETZ_MEASURABILITY_FLOOR:.0e} measurability floor",
                MORAWETZ_RATIO_WINDOW.0, MORAWETZ_RATIO_WINDOW.1
            ),
        });
    }
    Ok(())
}

/// thmSL_bounds: the two-sided smoothing study over the family for both
/// potentials plus the multiplier identity for the linear specs.
pub fn run_bounds(config: &RunConfig) -> Result<ScenarioReport> {
    let mut report = ScenarioReport::new(config.scenario.as_str());
    let mut rows = Vec::new();
    let dt = 2.5e-3;

    let packet = GaussianPacket::centered(1.0);
    morawetz_study(
        &mut report,
        &mut rows,
        "free",
        &EquationSpec::free(KineticSign::MinusLaplacian),
        packet,
    )?;
    let grid96 = Grid::new(3, 12.0, 96)?;
    let potential_spec = EquationSpec::linear(
        KineticSign::MinusLaplacian,
        AngularPotential::constant(1.0, 2.0 * grid96.spacing())?,
    );
    morawetz_study(&mut report, &mut rows, "potential", &potential_spec, packet)?;

    for block in [PotentialBlock::W0, PotentialBlock::W1] {
        let study = family_study(block, dt)?;
        push_family_assertions(&mut report, &study, &mut rows);
    }

    report.push_sweep(SweepTable {
        name: "smoothing_and_identity".into(),
        rows,
    });
    Ok(report)
}

/// thmUCSL_lower: the per-member lower bound S(R_max) >= (r_min/2) ||f||^2
/// and the vanishing truncation integrals with the rescaled bump profile.
pub fn run_lower(config: &RunConfig) -> Result<ScenarioReport> {
    let mut report = ScenarioReport::new(config.scenario.as_str());
    let mut rows = Vec::new();
    let dt = 2.5e-3;

    for block in [PotentialBlock::W0, PotentialBlock::W1] {
        let study = family_study(block, dt)?;
        let label = study.block.label();
        let (r_min, _) = study.endpoints(|m| m.base.ratio_sup);
        for member in &study.members {
            let Some((radius, value)) = member.base.at_largest_valid_radius() else {
                report
                    .validity
                    .invalidate(format!("{label} member {} has no valid radius", member.id));
                continue;
            };
            let floor = 0.5 * r_min * member.hdot_half_sq;
            report.push_assertion(
                AssertionResult::ge(
                    format!("{label}_lower_bound_m{}", member.id),
                    value,
                    floor,
                )
                .with_detail(format!("S({radius}) against (r_min/2) ||f||^2 = {floor:.4e}")),
            );
            rows.push(sweep_row(
                "lower_bound",
                &format!("{label}_m{}", member.id),
                radius,
                value,
                floor,
                "base",
            ));
        }
    }

    // truncation integrals (bump profile, plateau a = 1/2): the bilaplacian
    // and potential terms must fall below half their R = 2 value by R = 8
    let grid = Grid::new(3, 13.5, 72)?;
    let eps = 2.0 * grid.spacing();
    let pot = AngularPotential::constant(1.0, eps)?;
    let spec = EquationSpec::linear(KineticSign::MinusLaplacian, pot);
    let packet = GaussianPacket::centered(1.0);
    let f = packet.sample(grid);
    let times = uniform_times(1.2, 33);
    let traj = evolve(
        &f,
        0.0,
        1.2,
        2e-3,
        &spec,
        &times,
        EvolveOptions { record_energy: false },
    )?;
    if gate_trajectory(&mut report, &traj, "truncation_run") {
        let bump = build_bump_phi(3, 0.5)?;
        let mut bilap = Vec::new();
        let mut potential = Vec::new();
        for r in [2.0, 4.0, 8.0] {
            let reading = truncation_integrals(&traj, &bump, r, Some(&pot), false)?;
            bilap.push(reading.bilaplacian_mass);
            potential.push(reading.potential_flux.unwrap());
            rows.push(sweep_row("truncation", "bilaplacian", r, reading.bilaplacian_mass, bilap[0], "base"));
            rows.push(sweep_row("truncation", "potential", r, reading.potential_flux.unwrap(), potential[0], "base"));
        }
        report.push_assertion(
            AssertionResult::le("truncation_bilaplacian_halving", bilap[2] / bilap[0], 0.5)
                .with_detail(format!("ladder {bilap:?}")),
        );
        report.push_assertion(
            AssertionResult::le("truncation_potential_halving", potential[2] / potential[0], 0.5)
                .with_detail(format!("ladder {potential:?}")),
        );
        let monotone = bilap.windows(2).all(|w| w[1] <= w[0] * 1.05)
            && potential.windows(2).all(|w| w[1] <= w[0] * 1.05);
        report.push_assertion(AssertionResult::ge(
            "truncation_monotone_decrease",
            if monotone { 1.0 } else { 0.0 },
            1.0,
        ));
    }

    // weighted mass in the unit cylinder saturates in T: dispersion empties
    // the ball, so doubling the horizon moves the integral by little
    let sat_grid = Grid::new(3, 16.0, 64)?;
    let sat_packet = GaussianPacket::centered(1.0);
    let sat_pot = AngularPotential::constant(1.0, 2.0 * sat_grid.spacing())?;
    let value_at = |horizon: f64| -> Result<f64> {
        let times = uniform_times(horizon, 65);
        let traj = sat_packet.oracle_trajectory(sat_grid, &times, KineticSign::MinusLaplacian)?;
        crate::functionals::weighted_mass_near_origin(&traj, &sat_pot)
    };
    let at_2 = value_at(2.0)?;
    let at_4 = value_at(4.0)?;
    report.push_assertion(
        AssertionResult::le("weighted_mass_saturation", (at_4 / at_2 - 1.0).abs(), 0.10)
            .with_detail(format!("unit-cylinder mass {at_2:.6e} at T = 2 vs {at_4:.6e} at T = 4")),
    );
    rows.push(sweep_row("truncation", "weighted_mass", 2.0, at_2, at_2, "saturation"));
    rows.push(sweep_row("truncation", "weighted_mass", 4.0, at_4, at_2, "saturation"));

    report.push_sweep(SweepTable {
        name: "lower_and_truncation".into(),
        rows,
    });
    Ok(report)
}
