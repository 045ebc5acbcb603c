//! Split-step solver against the closed-form free Gaussian evolution, plus
//! the second-order self-convergence of the splitting when a potential is
//! switched on (the free kinetic step is exact, so the free error is pure
//! spatial truncation and does not move with dt).
//!
//! Run with `cargo run --release --example free_gaussian_vs_solver`.

use cslab::equation::{AngularPotential, EquationSpec, KineticSign};
use cslab::evolution::{evolve, EvolveOptions};
use cslab::grid::Grid;
use cslab::oracle::GaussianPacket;

fn rel_l2(a: &cslab::Field, b: &cslab::Field) -> f64 {
    let num: f64 = a
        .values
        .iter()
        .zip(b.values.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let den: f64 = b.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    num / den
}

fn main() -> cslab::Result<()> {
    let grid = Grid::new(3, 15.0, 64)?;
    let packet = GaussianPacket::centered(1.0);
    let f = packet.sample(grid);

    println!("free Gaussian, solver vs closed form at T = 1 (L = 15, N = 64):");
    let spec = EquationSpec::free(KineticSign::MinusLaplacian);
    for dt in [4e-3, 2e-3, 1e-3] {
        let traj = evolve(&f, 0.0, 1.0, dt, &spec, &[1.0], EvolveOptions { record_energy: false })?;
        let exact = packet.evolved(grid, 1.0, KineticSign::MinusLaplacian);
        println!("  dt = {dt:.0e}: relative L2 error = {:.3e}", rel_l2(traj.last(), &exact));
    }

    println!("\nsplitting self-convergence with the inverse-square potential on:");
    let pot = AngularPotential::constant(1.0, 2.0 * grid.spacing())?;
    let spec = EquationSpec::linear(KineticSign::MinusLaplacian, pot);
    let mut finals = Vec::new();
    for dt in [4e-3, 2e-3, 1e-3] {
        let traj = evolve(&f, 0.0, 1.0, dt, &spec, &[1.0], EvolveOptions { record_energy: false })?;
        finals.push(traj.last().clone());
    }
    let d1 = rel_l2(&finals[0], &finals[1]);
    let d2 = rel_l2(&finals[1], &finals[2]);
    println!("  ||u(4e-3) - u(2e-3)|| = {d1:.3e}");
    println!("  ||u(2e-3) - u(1e-3)|| = {d2:.3e}");
    println!("  ratio = {:.2} (4 = clean second order)", d1 / d2);
    Ok(())
}
