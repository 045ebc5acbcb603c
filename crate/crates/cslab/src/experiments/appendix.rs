//! Self-check of the closed-form radial multiplier construction: printed
//! values, interface continuity, admissible-eta intervals by exact rational
//! arithmetic, the quadrature oracle for the defining ODE, the independent
//! bilaplacian route, rescaling invariance, and the bump profile structure.

use num_rational::Ratio;

use crate::config::RunConfig;
use crate::error::Result;
use crate::report::{AssertionResult, ScenarioReport};
use crate::test_functions::{
    admissible_eta_interval, bilaplacian_via_numeric_differentiation, build_bump_phi,
    build_phi_default, build_phi_n3, verify_properties, OdeOracle, RadialProfile,
    ScaledProfile,
};

use super::sweep_row;

const EXACT_TOL: f64 = 1e-12;
const ORACLE_TOL: f64 = 1e-8;

pub fn run(config: &RunConfig) -> Result<ScenarioReport> {
    let mut report = ScenarioReport::new(config.scenario.as_str());

    // printed n = 3 values
    let n3 = build_phi_n3();
    let printed = [
        ("phi_prime_at_1", n3.phi_prime(1.0), 2.0 / 15.0),
        ("phi_second_at_0", n3.phi_second(0.0), 1.0 / 6.0),
        ("phi_second_at_1", n3.phi_second(1.0), 1.0 / 15.0),
        ("phi_second_at_2", n3.phi_second(2.0), 1.0 / 120.0),
        ("phi_prime_at_infinity", n3.phi_prime_at_infinity(), 1.0 / 6.0),
    ];
    let worst_printed = printed
        .iter()
        .map(|(_, got, want)| (got - want).abs())
        .fold(0.0_f64, f64::max);
    report.push_assertion(
        AssertionResult::le("n3_printed_values", worst_printed, EXACT_TOL).with_detail(
            "max |deviation| over phi'(1), phi''(0), phi''(1), phi''(2), phi'(inf)",
        ),
    );

    // property report for every built dimension; interface continuity
    let sample_radii: Vec<f64> = (1..=70).map(|i| 0.05 * 1.13_f64.powi(i)).collect();
    let mut rows = Vec::new();
    for n in 3..=8 {
        let tf = build_phi_default(n)?;
        let properties = verify_properties(&tf, &sample_radii);
        report.push_assertion(
            AssertionResult::ge(
                format!("properties_pass_n{n}"),
                if properties.all_passed { 1.0 } else { 0.0 },
                1.0,
            )
            .with_detail(
                properties
                    .checks
                    .iter()
                    .filter(|c| !c.passed)
                    .map(|c| c.name.clone())
                    .collect::<Vec<_>>()
                    .join(","),
            ),
        );
        let jump_prime = (tf.phi_prime(1.0 - 1e-13) - tf.phi_prime(1.0 + 1e-13)).abs();
        let jump_second = (tf.phi_second(1.0 - 1e-13) - tf.phi_second(1.0 + 1e-13)).abs();
        report.push_assertion(
            AssertionResult::le(format!("interface_continuity_n{n}"), jump_prime.max(jump_second), EXACT_TOL),
        );
        rows.push(sweep_row(
            "appendix_selfcheck",
            &format!("n{n}"),
            n as f64,
            tf.lambda(),
            1.0,
            "lambda",
        ));
        rows.push(sweep_row(
            "appendix_selfcheck",
            &format!("n{n}"),
            n as f64,
            tf.phi_prime_at_infinity(),
            1.0,
            "phi_prime_infinity",
        ));
    }

    // admissible-eta intervals: exact anchors and nonemptiness
    let (lo4, hi4) = admissible_eta_interval(4)?;
    let (lo5, hi5) = admissible_eta_interval(5)?;
    let anchors_exact = lo4 == Ratio::new(1, 4)
        && hi4 == Ratio::new(1, 2)
        && lo5 == Ratio::new(2, 5)
        && hi5 == Ratio::new(4, 7);
    report.push_assertion(AssertionResult::ge(
        "eta_interval_anchors_exact",
        if anchors_exact { 1.0 } else { 0.0 },
        1.0,
    ));
    let mut nonempty = true;
    for n in 4..=20 {
        let (lo, hi) = admissible_eta_interval(n)?;
        nonempty &= lo < hi && lo > Ratio::new(0, 1);
        rows.push(sweep_row(
            "appendix_selfcheck",
            &format!("n{n}"),
            n as f64,
            *hi.numer() as f64 / *hi.denom() as f64 - *lo.numer() as f64 / *lo.denom() as f64,
            1.0,
            "eta_interval_width",
        ));
    }
    report.push_assertion(AssertionResult::ge(
        "eta_intervals_nonempty_4_to_20",
        if nonempty { 1.0 } else { 0.0 },
        1.0,
    ));

    // quadrature oracle of the defining ODE against the closed forms
    let oracle_radii: Vec<f64> = (0..=40).map(|i| i as f64 * 0.25).collect();
    let mut worst_oracle = 0.0_f64;
    for (n, eta) in [(3_usize, 0.0), (4, 0.375)] {
        let tf = if n == 3 {
            build_phi_n3()
        } else {
            crate::test_functions::build_phi_general(n, eta)?
        };
        let oracle = OdeOracle::new(n, eta, tf.lambda(), 10.0);
        for &r in &oracle_radii {
            worst_oracle = worst_oracle.max((oracle.phi_prime(r) - tf.phi_prime(r)).abs());
        }
    }
    report.push_assertion(
        AssertionResult::le("ode_quadrature_oracle", worst_oracle, ORACLE_TOL)
            .with_detail("max |phi'_oracle - phi'_closed| over r in [0, 10], n in {3, 4}"),
    );

    // independent bilaplacian route away from the r = 1 interface
    let mut worst_residual = 0.0_f64;
    for n in [3, 4] {
        let tf = build_phi_default(n)?;
        for &r in &sample_radii {
            if r > 20.0 || (r - 1.0).abs() < 2e-3 {
                continue;
            }
            let numeric = bilaplacian_via_numeric_differentiation(&tf, r);
            worst_residual = worst_residual.max((numeric - tf.bilaplacian(r)).abs());
        }
    }
    report.push_assertion(
        AssertionResult::le("nested_radial_operator_residual", worst_residual, ORACLE_TOL)
            .with_detail("numeric Lap^2 phi vs -h_eta on [0.05, 20] minus the interface"),
    );

    // rescaling preserves the slope at infinity exactly
    let mut scale_dev = 0.0_f64;
    for scale in [0.5, 1.0, 2.0, 10.0] {
        let scaled = ScaledProfile::new(&n3, scale);
        scale_dev = scale_dev.max((scaled.phi_prime_at_infinity() - n3.phi_prime_at_infinity()).abs());
    }
    report.push_assertion(AssertionResult::le("rescaling_slope_invariance", scale_dev, 0.0));

    // bump profiles: cutoff structure and slope limit inside (a, 2a)
    let mut bump_ok = true;
    for support in [0.5, 1.0, 2.0] {
        let bump = build_bump_phi(3, support)?;
        bump_ok &= bump.phi_second(0.5 * support) == 1.0;
        bump_ok &= bump.phi_second(2.5 * support) == 0.0;
        let pinf = bump.phi_prime_at_infinity();
        bump_ok &= pinf > support && pinf < 2.0 * support;
        rows.push(sweep_row(
            "appendix_selfcheck",
            &format!("bump_a={support}"),
            support,
            pinf,
            support,
            "bump_slope_limit",
        ));
    }
    report.push_assertion(AssertionResult::ge(
        "bump_cutoff_structure",
        if bump_ok { 1.0 } else { 0.0 },
        1.0,
    ));

    report.push_sweep(crate::report::SweepTable {
        name: "profiles".into(),
        rows,
    });
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ScenarioName;

    #[test]
    fn appendix_selfcheck_passes() {
        let config = RunConfig::minimal(ScenarioName::AppendixSelfcheck);
        let report = run(&config).unwrap();
        assert!(report.validity.valid);
        for a in &report.assertions {
            assert!(a.passed, "assertion {} failed: {} vs {}", a.name, a.measured, a.threshold);
        }
    }
}
