//! Radiation-profile scenarios: extraction down the conjugated backward
//! flow with its Cauchy record, the charge chain, the half-derivative
//! inequality, the unit-time spectral identity, the asymptotic L^2
//! approximation, and the weighted-mass uniqueness functionals.

use crate::config::RunConfig;
use crate::conformal::{asymptotic_l2_gap, extract_radiation_profile, RadiationOptions};
use crate::equation::{AngularPotential, EquationSpec, KineticSign, Nonlinearity};
use crate::error::Result;
use crate::evolution::{evolve, EvolveOptions};
use crate::functionals::{flux_functional, smoothing_profile, uniqueness_functional};
use crate::grid::{Field, Grid};
use crate::norms::{compute_norm, NormKind};
use crate::oracle::GaussianPacket;
use crate::report::{AssertionResult, ScenarioReport, SweepTable};
use crate::test_functions::{build_bump_phi, build_phi_n3, CappedQuadratic, RadialProfile};

use super::{sweep_row, uniform_times, SHELL_GATE_FRACTION};

/// Consecutive Cauchy gaps must roughly halve: ratio within a factor 3 of 1/2.
const GAP_RATIO_WINDOW: (f64, f64) = (1.0 / 6.0, 1.5);
/// Charge chain ||g|| = ||f|| relative tolerance.
const CHARGE_TOL: f64 = 1e-4;
/// Numerical slack on the half-derivative inequality.
const DOT_SLACK: f64 = 1.02;
/// Unit-time identity residual bound and its clamp-refinement stability.
const SPECT_TOL: f64 = 2e-2;
/// Agreement between the stepped and exact extraction routes (free case).
const ROUTE_AGREEMENT_TOL: f64 = 1e-6;
/// Weighted-mass functional convergence to the g moment.
const UNIQUENESS_TOL: f64 = 5e-2;
/// Zero data must give identically vanishing functionals.
const ZERO_TOL: f64 = 1e-12;
/// Flux lower-bound margin for the sampled multiplier family.
const FLUX_MARGIN: f64 = 0.75;

const DELTA_LADDER: [f64; 4] = [0.5, 0.25, 0.125, 0.0625];

fn l2_relative_distance(a: &Field, b: &Field) -> f64 {
    let num: f64 = a
        .values
        .iter()
        .zip(b.values.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let den: f64 = a.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

fn gap_assertions(
    report: &mut ScenarioReport,
    rows: &mut Vec<crate::report::SweepRow>,
    label: &str,
    profile: &crate::conformal::RadiationProfile,
) {
    let mut worst_lo = f64::INFINITY;
    let mut worst_hi = 0.0_f64;
    for window in profile.cauchy_gaps.windows(2) {
        let ratio = window[1].1 / window[0].1;
        worst_lo = worst_lo.min(ratio);
        worst_hi = worst_hi.max(ratio);
    }
    for (delta, gap) in &profile.cauchy_gaps {
        rows.push(sweep_row("radiation", label, *delta, *gap, 1.0, "cauchy_gap"));
    }
    report.push_assertion(
        AssertionResult::ge(format!("{label}_gap_ratio_floor"), worst_lo, GAP_RATIO_WINDOW.0)
            .with_detail("smallest consecutive Cauchy-gap ratio down the delta ladder"),
    );
    report.push_assertion(AssertionResult::le(
        format!("{label}_gap_ratio_ceiling"),
        worst_hi,
        GAP_RATIO_WINDOW.1,
    ));
}

/// radiation_linear: the free and inverse-square-potential extractions.
pub fn run_linear(config: &RunConfig) -> Result<ScenarioReport> {
    let mut report = ScenarioReport::new(config.scenario.as_str());
    let mut rows = Vec::new();
    let ladder: Vec<f64> = config
        .numerics
        .delta_ladder
        .clone()
        .unwrap_or_else(|| DELTA_LADDER.to_vec());
    let dt = config.numerics.dt;

    // ---- free case ----
    let grid = Grid::new(3, 12.0, 64)?;
    let packet = GaussianPacket::centered(1.0);
    let f = packet.sample(grid);
    let spec = EquationSpec::free(KineticSign::MinusLaplacian);
    let options = RadiationOptions {
        dt,
        ..RadiationOptions::default()
    };
    let profile = extract_radiation_profile(&f, &spec, &ladder, options)?;
    gap_assertions(&mut report, &mut rows, "free", &profile);

    let nf = compute_norm(&f, NormKind::L2)?;
    let ng = compute_norm(&profile.g, NormKind::L2)?;
    report.push_assertion(AssertionResult::le(
        "free_charge_chain",
        (nf - ng).abs() / nf,
        CHARGE_TOL,
    ));

    let inequality = crate::conformal::radiation_inequality_check(&f, &profile.g)?;
    report.push_assertion(
        AssertionResult::le("free_half_derivative_bound", inequality.lhs, inequality.rhs * DOT_SLACK)
            .with_detail(format!("measured ratio lhs/rhs = {:.6}", inequality.ratio)),
    );
    rows.push(sweep_row("radiation", "free", 0.0, inequality.lhs, inequality.rhs, "dot_inequality"));

    let spect = crate::conformal::spect_identity(&profile.u1, &spec, &profile.g)?;
    report.push_assertion(AssertionResult::le(
        "free_unit_time_identity",
        spect.relative_residual,
        SPECT_TOL,
    ));

    // stepped route agrees with the exact Fourier route
    let stepped = extract_radiation_profile(
        &f,
        &spec,
        &ladder,
        RadiationOptions {
            dt,
            force_timestepped: true,
            ..RadiationOptions::default()
        },
    )?;
    report.push_assertion(AssertionResult::le(
        "free_route_agreement",
        l2_relative_distance(&profile.g, &stepped.g),
        ROUTE_AGREEMENT_TOL,
    ));

    // zero data gives the zero profile
    let zero = Field::zeros(grid, 0.0);
    let zero_profile = extract_radiation_profile(&zero, &spec, &ladder, options)?;
    report.push_assertion(AssertionResult::le(
        "zero_data_zero_profile",
        compute_norm(&zero_profile.g, NormKind::L2)?,
        ZERO_TOL,
    ));

    // asymptotic approximation by the rescaled profile decays in t
    let wide_grid = Grid::new(3, 20.0, 96)?;
    let wide_packet = GaussianPacket::centered(1.25);
    let wide_f = wide_packet.sample(wide_grid);
    let wide_profile = extract_radiation_profile(&wide_f, &spec, &ladder, options)?;
    let mut previous = f64::INFINITY;
    let mut monotone = true;
    for t in [1.5, 2.0, 3.0] {
        let u_t = wide_packet.evolved(wide_grid, t, KineticSign::MinusLaplacian);
        let gap = asymptotic_l2_gap(&u_t, t, &wide_profile.g)?;
        monotone &= gap.gap < previous;
        previous = gap.gap;
        rows.push(sweep_row("radiation", "free_wide", t, gap.gap, nf, "asymptotic_gap"));
        if gap.flagged {
            report
                .notes
                .push(format!("asymptotic gap at t = {t} flagged: g window beyond box validity"));
        }
    }
    report.push_assertion(AssertionResult::ge(
        "free_asymptotic_gap_monotone",
        if monotone { 1.0 } else { 0.0 },
        1.0,
    ));

    // ---- potential case, with clamp refinement ----
    let pot_grid = Grid::new(3, 13.5, 72)?;
    let pot_packet = GaussianPacket {
        center: [2.0, 0.0, 0.0],
        ..GaussianPacket::centered(0.9)
    };
    let pot_f = pot_packet.sample(pot_grid);
    let mut spect_residuals = Vec::new();
    for (tag, eps_cells) in [("eps2h", 2.0), ("eps3h", 3.0)] {
        let eps = eps_cells * pot_grid.spacing();
        let pot = AngularPotential::constant(1.0, eps)?;
        let pot_spec = EquationSpec::linear(KineticSign::MinusLaplacian, pot);
        let profile = extract_radiation_profile(&pot_f, &pot_spec, &ladder, options)?;
        if tag == "eps2h" {
            gap_assertions(&mut report, &mut rows, "potential", &profile);
            let nf = compute_norm(&pot_f, NormKind::L2)?;
            let ng = compute_norm(&profile.g, NormKind::L2)?;
            report.push_assertion(AssertionResult::le(
                "potential_charge_chain",
                (nf - ng).abs() / nf,
                CHARGE_TOL,
            ));
            let inequality = crate::conformal::radiation_inequality_check(&pot_f, &profile.g)?;
            report.push_assertion(
                AssertionResult::le(
                    "potential_half_derivative_bound",
                    inequality.lhs,
                    inequality.rhs * DOT_SLACK,
                )
                .with_detail(format!("measured ratio lhs/rhs = {:.6}", inequality.ratio)),
            );
        }
        let pot_spec_for_spect = EquationSpec::linear(
            KineticSign::MinusLaplacian,
            AngularPotential::constant(1.0, eps)?,
        );
        let spect = crate::conformal::spect_identity(&profile.u1, &pot_spec_for_spect, &profile.g)?;
        spect_residuals.push(spect.relative_residual);
        report.push_assertion(AssertionResult::le(
            format!("potential_unit_time_identity_{tag}"),
            spect.relative_residual,
            SPECT_TOL,
        ));
        rows.push(sweep_row("radiation", "potential", eps, spect.relative_residual, 1.0, "spect_residual"));
    }
    report.push_assertion(
        AssertionResult::le(
            "potential_unit_time_identity_eps_stability",
            (spect_residuals[0] - spect_residuals[1]).abs(),
            SPECT_TOL,
        )
        .with_detail("clamp-refinement drift of the identity residual"),
    );

    report.push_sweep(SweepTable {
        name: "radiation_linear".into(),
        rows,
    });
    Ok(report)
}

/// radiation_nls: the nonlinear extraction, the measured half-derivative
/// constant, and the flux lower bound sampled over a multiplier family.
pub fn run_nls(config: &RunConfig) -> Result<ScenarioReport> {
    let mut report = ScenarioReport::new(config.scenario.as_str());
    let mut rows = Vec::new();
    let ladder: Vec<f64> = config
        .numerics
        .delta_ladder
        .clone()
        .unwrap_or_else(|| DELTA_LADDER.to_vec());
    let dt = config.numerics.dt;

    let grid = Grid::new(3, 13.5, 72)?;
    let packet = GaussianPacket::centered(1.0).with_mass(0.05);
    let f = packet.sample(grid);
    let spec = EquationSpec::nls(KineticSign::MinusLaplacian, Nonlinearity::Defocusing)?;
    let options = RadiationOptions {
        dt,
        ..RadiationOptions::default()
    };
    let profile = extract_radiation_profile(&f, &spec, &ladder, options)?;
    gap_assertions(&mut report, &mut rows, "nls", &profile);

    let nf = compute_norm(&f, NormKind::L2)?;
    let ng = compute_norm(&profile.g, NormKind::L2)?;
    report.push_assertion(AssertionResult::le(
        "nls_charge_chain",
        (nf - ng).abs() / nf,
        CHARGE_TOL,
    ));

    // the half-derivative bound holds with a measured constant; the constant
    // is reported, never asserted
    let inequality = crate::conformal::radiation_inequality_check(&f, &profile.g)?;
    report.push_assertion(AssertionResult::reported(
        "nls_half_derivative_constant",
        inequality.lhs / (2.0 * inequality.rhs),
    ));
    rows.push(sweep_row("radiation", "nls", 0.0, inequality.lhs, inequality.rhs, "dot_inequality"));

    // flux lower bound over the sampled multiplier family: the limsup
    // surrogate max_t (-Im Int u* grad u . grad psi) must reach a margin of
    // (1/2) psi'(inf) Int |x| |g|^2
    let g_moment = compute_norm(&profile.g, NormKind::WeightedL2(1.0))?.powi(2);
    let sample_times = [1.0, 1.5];
    let traj = evolve(
        &f,
        0.0,
        1.5,
        dt,
        &spec,
        &sample_times,
        EvolveOptions { record_energy: false },
    )?;
    if super::gate_trajectory(&mut report, &traj, "nls_flux_run") {
        let bump_half = build_bump_phi(3, 0.5)?;
        let bump_one = build_bump_phi(3, 1.0)?;
        let bump_two = build_bump_phi(3, 2.0)?;
        let appendix = build_phi_n3();
        let capped = CappedQuadratic { dim: 3, cap: 2.0 };
        let family: Vec<(&str, &(dyn RadialProfile + Sync))> = vec![
            ("appendix_n3", &appendix),
            ("bump_a0.5", &bump_half),
            ("bump_a1", &bump_one),
            ("bump_a2", &bump_two),
            ("capped_r2_over_2", &capped),
        ];
        for (name, psi) in family {
            let rhs = 0.5 * psi.phi_prime_at_infinity() * g_moment;
            let mut best = f64::NEG_INFINITY;
            for snap in &traj.snapshots {
                let flux = -flux_functional(snap, psi, 1.0)?;
                best = best.max(flux);
            }
            report.push_assertion(
                AssertionResult::ge(format!("nls_flux_bound_{name}"), best, FLUX_MARGIN * rhs)
                    .with_detail(format!(
                        "limsup surrogate {best:.6e} against (1/2) psi'(inf) moment = {rhs:.6e}"
                    )),
            );
            rows.push(sweep_row("radiation", name, 0.0, best, rhs, "flux_bound"));
        }
    }

    report.push_sweep(SweepTable {
        name: "radiation_nls".into(),
        rows,
    });
    Ok(report)
}

/// thm_uniqueSL: the weighted-mass functional M(t) converges to the first
/// moment of |g|^2, and zero data yields identically zero functionals.
pub fn run_unique_linear(config: &RunConfig) -> Result<ScenarioReport> {
    let mut report = ScenarioReport::new(config.scenario.as_str());
    let mut rows = Vec::new();

    let grid = Grid::new(3, 20.0, 96)?;
    let packet = GaussianPacket::centered(1.0);
    let f = packet.sample(grid);
    let spec = EquationSpec::free(KineticSign::MinusLaplacian);
    let profile = extract_radiation_profile(
        &f,
        &spec,
        &DELTA_LADDER,
        RadiationOptions::default(),
    )?;
    let g_moment = compute_norm(&profile.g, NormKind::WeightedL2(1.0))?.powi(2);

    let mut best: Option<(f64, f64)> = None;
    for t in [0.6, 1.2, 1.8, 2.4] {
        let u_t = packet.evolved(grid, t, KineticSign::MinusLaplacian);
        let shell = u_t.mass_fraction_outside(0.8 * grid.box_half_width());
        let m = uniqueness_functional(&u_t, t)?;
        rows.push(sweep_row("uniqueness", "free", t, m, g_moment, if shell <= SHELL_GATE_FRACTION { "valid" } else { "beyond_box" }));
        if shell <= SHELL_GATE_FRACTION {
            best = Some((t, m));
        }
    }
    let Some((t_star, m_star)) = best else {
        report.validity.invalidate("no box-valid sample time for M(t)");
        return Ok(report);
    };
    report.push_assertion(
        AssertionResult::le(
            "weighted_mass_converges_to_g_moment",
            (m_star / g_moment - 1.0).abs(),
            UNIQUENESS_TOL,
        )
        .with_detail(format!(
            "M({t_star}) = {m_star:.6e} against Int |x||g|^2 = {g_moment:.6e} at the largest box-valid time"
        )),
    );

    // zero data: every functional vanishes identically
    let zero = Field::zeros(grid, 0.0);
    let m_zero = uniqueness_functional(&Field { time: 1.0, ..zero.clone() }, 1.0)?;
    let tf = build_phi_n3();
    let flux_zero = flux_functional(&zero, &tf, 2.0)?.abs();
    let times = uniform_times(1.0, 5);
    let zero_traj = packet_zero_trajectory(&zero, &times);
    let smoothing_zero = smoothing_profile(&zero_traj, &[1.0, 2.0, 4.0], &zero)?
        .sup_value;
    report.push_assertion(AssertionResult::le(
        "zero_data_functionals_vanish",
        m_zero.max(flux_zero).max(smoothing_zero),
        ZERO_TOL,
    ));

    report.push_sweep(SweepTable {
        name: "uniqueness_linear".into(),
        rows,
    });
    Ok(report)
}

fn packet_zero_trajectory(zero: &Field, times: &[f64]) -> crate::evolution::Trajectory {
    let mut snapshots = Vec::new();
    for &t in times {
        let mut s = zero.clone();
        s.time = t;
        snapshots.push(s);
    }
    crate::evolution::Trajectory {
        spec: EquationSpec::free(KineticSign::MinusLaplacian),
        snapshots,
        diagnostics: Vec::new(),
        aborted: None,
    }
}

/// thm_uniqueSN: small nonzero data keep M(t) bounded below by a positive
/// value; zero data vanish identically.
pub fn run_unique_nls(config: &RunConfig) -> Result<ScenarioReport> {
    let mut report = ScenarioReport::new(config.scenario.as_str());
    let mut rows = Vec::new();
    let dt = config.numerics.dt;

    let grid = Grid::new(3, 13.5, 72)?;
    let packet = GaussianPacket::centered(1.0).with_mass(0.05);
    let f = packet.sample(grid);
    let spec = EquationSpec::nls(KineticSign::MinusLaplacian, Nonlinearity::Defocusing)?;
    let sample_times = [0.75, 1.0, 1.25, 1.5];
    let traj = evolve(
        &f,
        0.0,
        1.5,
        dt,
        &spec,
        &sample_times,
        EvolveOptions { record_energy: false },
    )?;
    if super::gate_trajectory(&mut report, &traj, "nls_uniqueness_run") {
        let mut floor = f64::INFINITY;
        for snap in &traj.snapshots {
            let m = uniqueness_functional(snap, snap.time)?;
            floor = floor.min(m);
            rows.push(sweep_row("uniqueness", "nls", snap.time, m, 1.0, "weighted_mass"));
        }
        report.push_assertion(
            AssertionResult::ge("nls_weighted_mass_positive_floor", floor, 1e-8)
                .with_detail("min over sampled times of M(t) for small nonzero data"),
        );
        report.push_assertion(AssertionResult::reported("nls_weighted_mass_floor_value", floor));

        // contrapositive consistency: the extracted g is nonzero as well
        let profile = extract_radiation_profile(
            &f,
            &spec,
            &DELTA_LADDER,
            RadiationOptions {
                dt,
                ..RadiationOptions::default()
            },
        )?;
        let g_moment = compute_norm(&profile.g, NormKind::WeightedL2(1.0))?.powi(2);
        report.push_assertion(AssertionResult::ge(
            "nls_radiation_moment_positive",
            g_moment,
            1e-8,
        ));
        rows.push(sweep_row("uniqueness", "nls", 0.0, g_moment, 1.0, "g_moment"));
    }

    // zero data
    let zero = Field::zeros(grid, 0.0);
    let m_zero = uniqueness_functional(&Field { time: 1.0, ..zero }, 1.0)?;
    report.push_assertion(AssertionResult::le("nls_zero_data_vanishes", m_zero, ZERO_TOL));

    report.push_sweep(SweepTable {
        name: "uniqueness_nls".into(),
        rows,
    });
    Ok(report)
}
