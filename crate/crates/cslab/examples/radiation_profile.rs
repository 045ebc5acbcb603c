//! Radiation-profile extraction: evolve to unit time, apply the conformal
//! factor, run the conjugated equation backward down a delta ladder, and
//! check the charge chain, the Cauchy record, the half-derivative
//! inequality and the unit-time spectral identity.
//!
//! Run with `cargo run --release --example radiation_profile`.

use cslab::conformal::{
    extract_radiation_profile, radiation_inequality_check, spect_identity, RadiationOptions,
};
use cslab::equation::{AngularPotential, EquationSpec, KineticSign};
use cslab::grid::Grid;
use cslab::norms::{compute_norm, NormKind};
use cslab::oracle::GaussianPacket;

fn main() -> cslab::Result<()> {
    let grid = Grid::new(3, 12.0, 48)?;
    let packet = GaussianPacket {
        center: [2.0, 0.0, 0.0],
        ..GaussianPacket::centered(0.9)
    };
    let f = packet.sample(grid);
    let ladder = [0.5, 0.25, 0.125, 0.0625];

    let eps = 2.0 * grid.spacing();
    let specs = [
        ("free", EquationSpec::free(KineticSign::MinusLaplacian)),
        (
            "potential W=1",
            EquationSpec::linear(
                KineticSign::MinusLaplacian,
                AngularPotential::constant(1.0, eps)?,
            ),
        ),
    ];
    for (name, spec) in specs {
        let profile = extract_radiation_profile(&f, &spec, &ladder, RadiationOptions::default())?;
        println!("{name} (method {:?}):", profile.method);
        println!("  Cauchy gaps down the ladder:");
        for (delta, gap) in &profile.cauchy_gaps {
            println!("    delta = {delta:.4}: ||u~(delta) - u~(delta/2)|| = {gap:.4e}");
        }
        let nf = compute_norm(&f, NormKind::L2)?;
        let ng = compute_norm(&profile.g, NormKind::L2)?;
        println!("  charge chain |1 - ||g||/||f||| = {:.3e}", (ng / nf - 1.0).abs());
        let dot = radiation_inequality_check(&f, &profile.g)?;
        println!(
            "  half-derivative bound: lhs = {:.6e} <= {:.6e} (ratio {:.4})",
            dot.lhs, dot.rhs, dot.ratio
        );
        let spect = spect_identity(&profile.u1, &spec, &profile.g)?;
        println!(
            "  unit-time identity: 4||grad u(1)||^2 + 4 Int V|u(1)|^2 = {:.6e} vs ||g||^2_w = {:.6e} (residual {:.3e})",
            spect.lhs, spect.rhs, spect.relative_residual
        );
    }
    Ok(())
}
