//! The local-smoothing profile S(R) = (1/R) Int_0^T Int_{|x|<R} |grad u|^2
//! against the half-derivative size of the data, for a small Gaussian
//! family under the free flow (closed-form trajectories, so the horizon can
//! be long without periodic wrap).
//!
//! Run with `cargo run --release --example local_smoothing`.

use cslab::equation::KineticSign;
use cslab::functionals::smoothing_profile;
use cslab::grid::Grid;
use cslab::oracle::GaussianPacket;

fn main() -> cslab::Result<()> {
    let grid = Grid::new(3, 16.0, 64)?;
    let radii = [1.0, 2.0, 4.0];
    let members = [
        ("width 1.0", GaussianPacket::centered(1.0)),
        ("width 0.5", GaussianPacket::centered(0.5)),
        ("width 2.0", GaussianPacket::centered(2.0)),
        (
            "momentum 1.5",
            GaussianPacket {
                momentum: [1.5, 0.0, 0.0],
                ..GaussianPacket::centered(1.0)
            },
        ),
    ];
    println!("S(R)/||f||^2 over R = {radii:?} (T = 6, closed-form free flow):");
    let times: Vec<f64> = (0..=64).map(|k| 6.0 * k as f64 / 64.0).collect();
    let mut ratio_sups = Vec::new();
    for (name, packet) in &members {
        let traj = packet.oracle_trajectory(grid, &times, KineticSign::MinusLaplacian)?;
        let f = packet.sample(grid);
        let profile = smoothing_profile(&traj, &radii, &f)?;
        let ratios: Vec<String> = profile
            .values
            .iter()
            .map(|v| format!("{:.4}", v / profile.hdot_half_sq))
            .collect();
        println!("  {name:<13} [{}]  sup ratio = {:.4}", ratios.join(", "), profile.ratio_sup);
        ratio_sups.push(profile.ratio_sup);
    }
    let lo = ratio_sups.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratio_sups.iter().cloned().fold(0.0_f64, f64::max);
    println!("two-sided interval: [{lo:.4}, {hi:.4}], factor {:.2}", hi / lo);
    Ok(())
}
