//! The multiplier identity: pairing the equation with
//! `grad u* . grad psi + (1/2) u* Lap psi` and integrating over a strip
//! balances the hessian form, the bilaplacian mass, the potential/nonlinear
//! terms and two boundary fluxes. The residual measured here is the
//! discretization defect of that identity for the rescaled closed-form
//! multiplier.
//!
//! Run with `cargo run --release --example morawetz_identity`.

use cslab::equation::{AngularPotential, EquationSpec, KineticSign, Nonlinearity};
use cslab::evolution::{evolve, EvolveOptions};
use cslab::functionals::morawetz_residuals;
use cslab::grid::Grid;
use cslab::oracle::GaussianPacket;
use cslab::test_functions::build_phi_n3;

fn main() -> cslab::Result<()> {
    let grid = Grid::new(3, 12.0, 48)?;
    let eps = 2.0 * grid.spacing();
    let packet = GaussianPacket::centered(1.0);
    let tf = build_phi_n3();

    let specs = [
        ("free", EquationSpec::free(KineticSign::MinusLaplacian), 1.0),
        (
            "potential W=1",
            EquationSpec::linear(
                KineticSign::MinusLaplacian,
                AngularPotential::constant(1.0, eps)?,
            ),
            1.0,
        ),
        (
            "defocusing NLS",
            EquationSpec::new(KineticSign::MinusLaplacian, None, Nonlinearity::Defocusing, 1.0)?,
            0.05,
        ),
    ];
    for (name, spec, mass) in specs {
        let packet = if mass < 1.0 { packet.with_mass(mass) } else { packet };
        let f = packet.sample(grid);
        let times: Vec<f64> = (0..=64).map(|k| k as f64 / 64.0).collect();
        let traj = evolve(&f, 0.0, 1.0, 2e-3, &spec, &times, EvolveOptions { record_energy: false })?;
        let readings = morawetz_residuals(&traj, &[(&tf, 1.0), (&tf, 2.0), (&tf, 4.0)], &spec)?;
        println!("{name}:");
        for (r, reading) in [1.0, 2.0, 4.0].iter().zip(readings.iter()) {
            println!(
                "  R = {r}: lhs = {:+.6e}, rhs = {:+.6e}, residual/|rhs| = {:.3e}",
                reading.lhs_total(),
                reading.rhs_total(),
                reading.relative_residual
            );
        }
    }
    Ok(())
}
