//! The closed-form radial multiplier profiles: printed values, the
//! admissible-eta intervals, the property report, and the independent
//! quadrature oracle for the defining ODE `-Lap^2 phi = h_eta`.
//!
//! Run with `cargo run --release --example appendix_phi`.

use cslab::test_functions::{
    admissible_eta_interval, build_phi_default, build_phi_n3, verify_properties, OdeOracle,
    RadialProfile,
};

fn main() -> cslab::Result<()> {
    let n3 = build_phi_n3();
    println!("n = 3 profile (lambda = 1/6, eta = 0):");
    println!("  phi'(1)   = {:.12}  (2/15 = {:.12})", n3.phi_prime(1.0), 2.0 / 15.0);
    println!("  phi''(0)  = {:.12}  (1/6)", n3.phi_second(0.0));
    println!("  phi''(1)  = {:.12}  (1/15)", n3.phi_second(1.0));
    println!("  phi''(2)  = {:.12}  (1/120)", n3.phi_second(2.0));
    println!("  phi'(inf) = {:.12}  (1/6)", n3.phi_prime_at_infinity());

    println!("\nadmissible eta intervals (exact rationals):");
    for n in 4..=10 {
        let (lo, hi) = admissible_eta_interval(n)?;
        println!("  n = {n:>2}: ({lo}, {hi})");
    }

    println!("\nproperty report over a geometric radius ladder:");
    let radii: Vec<f64> = (1..=70).map(|i| 0.05 * 1.13_f64.powi(i)).collect();
    for n in [3, 4, 6] {
        let profile = build_phi_default(n)?;
        let report = verify_properties(&profile, &radii);
        println!(
            "  n = {n}: all passed = {}, max phi' = {:.6}, |Lap phi| (1+r) <= {:.4}",
            report.all_passed, report.measured_slope_bound, report.laplacian_decay_constant
        );
    }

    println!("\nquadrature oracle of the radial ODE vs the closed forms:");
    for (n, eta) in [(3_usize, 0.0), (4, 0.375)] {
        let profile = build_phi_default(n)?;
        let oracle = OdeOracle::new(n, eta, profile.lambda(), 10.0);
        let mut worst = 0.0_f64;
        for k in 0..=40 {
            let r = k as f64 * 0.25;
            worst = worst.max((oracle.phi_prime(r) - profile.phi_prime(r)).abs());
        }
        println!("  n = {n}: max |phi'_oracle - phi'_closed| on [0, 10] = {worst:.3e}");
    }
    Ok(())
}
