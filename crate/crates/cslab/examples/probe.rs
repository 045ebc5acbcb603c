use cslab::equation::{EquationSpec, KineticSign, Nonlinearity};
use cslab::evolution::{evolve, EvolveOptions};
use cslab::grid::Grid;
use cslab::norms::{compute_norm, NormKind};
use cslab::oracle::GaussianPacket;
use cslab::spectral::gradient;
use num_complex::Complex64;

fn main() {
    let spec = EquationSpec::new(KineticSign::MinusLaplacian, None, Nonlinearity::Defocusing, 1.0).unwrap();
    let grid = Grid::new(3, 12.0, 64).unwrap();
    let packet = GaussianPacket::centered(1.0).with_mass(0.05);
    let f = packet.sample(grid);
    let snaps: Vec<f64> = (0..=8).map(|k| k as f64 / 8.0).collect();
    let traj = evolve(&f, 0.0, 1.0, 1e-3, &spec, &snaps, EvolveOptions { record_energy: false }).unwrap();
    let ref0 = compute_norm(&f, NormKind::WeightedL2(2.0)).unwrap().powi(2);
    for coeff in [1.2, 2.4] {
        let mut lo = f64::INFINITY; let mut hi = f64::NEG_INFINITY;
        for s in &traj.snapshots {
            let t = s.time;
            let grad = gradient(s).unwrap();
            let two_it = Complex64::new(0.0, -2.0 * t);
            let mut dilation = 0.0;
            for idx in 0..grid.len() {
                let pos = grid.position(idx);
                for axis in 0..3 {
                    let term = s.values[idx] * pos[axis] + two_it * grad[axis].values[idx];
                    dilation += term.norm_sqr();
                }
            }
            dilation *= grid.cell_volume();
            let mut nl = 0.0;
            for v in &s.values { nl += v.norm_sqr().powf(5.0 / 3.0); }
            nl *= coeff * t * t * grid.cell_volume();
            let total = dilation + nl;
            lo = lo.min(total); hi = hi.max(total);
        }
        println!("coeff {coeff}: relative spread {:.3e}", (hi - lo) / ref0);
    }
}
