//! Gauss-Legendre quadrature for the radial integrals. Nodes and weights are
//! generated at runtime by Newton iteration on the Legendre recurrence, so no
//! tabulated constants enter the build.

use std::sync::OnceLock;

/// Legendre polynomial value and derivative at `x`.
fn legendre(order: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=order {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = order as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

const ORDER: usize = 20;

fn nodes_and_weights() -> &'static (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    CACHE.get_or_init(|| {
        let mut nodes = vec![0.0; ORDER];
        let mut weights = vec![0.0; ORDER];
        for i in 0..ORDER {
            // Chebyshev initial guess, then Newton.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (ORDER as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre(ORDER, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre(ORDER, x);
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

/// Integrate `f` over one panel [a, b] with 20-point Gauss-Legendre.
fn panel(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> f64 {
    let (nodes, weights) = nodes_and_weights();
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights.iter()) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Integrate a piecewise-smooth `f` over [a, b], splitting at the supplied
/// breakpoints and subdividing each smooth segment into panels of width at
/// most `max_panel`.
pub fn integrate(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    max_panel: f64,
) -> f64 {
    if a == b {
        return 0.0;
    }
    assert!(b > a, "integration range must be ordered");
    let mut cuts = vec![a];
    for &c in breakpoints {
        if c > a && c < b {
            cuts.push(c);
        }
    }
    cuts.push(b);
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());

    let mut total = 0.0;
    for seg in cuts.windows(2) {
        let (lo, hi) = (seg[0], seg[1]);
        let panels = ((hi - lo) / max_panel).ceil().max(1.0) as usize;
        let width = (hi - lo) / panels as f64;
        for p in 0..panels {
            let pa = lo + p as f64 * width;
            total += panel(&mut f, pa, pa + width);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        // GL-20 is exact through degree 39.
        let val = integrate(|x| x.powi(7) - 3.0 * x.powi(2) + 1.0, 0.0, 2.0, &[], 2.0);
        let exact = 2.0_f64.powi(8) / 8.0 - 2.0_f64.powi(3) + 2.0;
        assert!((val - exact).abs() < 1e-12);
    }

    #[test]
    fn splits_at_breakpoints() {
        // |x - 1| has a kink; splitting makes each side polynomial.
        let val = integrate(|x| (x - 1.0).abs(), 0.0, 2.0, &[1.0], 0.5);
        assert!((val - 1.0).abs() < 1e-13);
    }

    #[test]
    fn smooth_transcendental() {
        let val = integrate(|x| (-x * x).exp(), 0.0, 10.0, &[], 0.5);
        let exact = std::f64::consts::PI.sqrt() / 2.0;
        assert!((val - exact).abs() < 1e-12);
    }
}
