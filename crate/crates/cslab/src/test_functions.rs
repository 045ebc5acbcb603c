//! Radial multiplier profiles phi with exact derivative evaluators.
//!
//! Two families solve `-Lap^2 phi = h_eta` with the source
//! `h_eta(r) = 1 for r < 1, eta/r^3 for r > 1`:
//!
//! - `build_phi_n3`: the explicit n = 3 construction with eta = 0 and
//!   lambda = 1/6,
//! - `build_phi_general`: the printed inner/outer formulas for n >= 4 with
//!   lambda pinned by the linear-term cancellation and eta restricted to the
//!   open admissibility interval.
//!
//! A third family, `build_bump_phi`, integrates a smooth compactly supported
//! bump twice: phi'' = h, phi' = H, phi'(inf) = Int h. All families support
//! the rescaling `phi_R = R phi(x/R)` through [`ScaledProfile`].
//!
//! Radial calculus used throughout (n = dim):
//! `Lap phi = phi'' + (n-1) phi'/r`,
//! `Lap^2 phi = phi'''' + 2(n-1) phi'''/r + (n-1)(n-3)(phi''/r^2 - phi'/r^3)`.

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::integrate;

/// Evaluators shared by every radial multiplier profile. All radii are >= 0;
/// at r = 0 the evaluators return the radial limits.
pub trait RadialProfile {
    fn dim(&self) -> usize;
    fn phi_prime(&self, r: f64) -> f64;
    fn phi_second(&self, r: f64) -> f64;
    fn laplacian(&self, r: f64) -> f64;
    fn bilaplacian(&self, r: f64) -> f64;
    fn phi_prime_at_infinity(&self) -> f64;
    /// Radii where the bilaplacian jumps; cell quadratures average over
    /// cells straddling these interfaces instead of sampling the center.
    fn jump_radii(&self) -> Vec<f64> {
        Vec::new()
    }
    /// Present when the bilaplacian is a pure ball source
    /// `value * chi_{r < radius}`; integrals against it can then be taken
    /// spectrally (the trigonometric interpolant integrates exactly against
    /// a ball).
    fn ball_source(&self) -> Option<(f64, f64)> {
        None
    }
}

/// Which construction a [`TestFunction`] came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    AppendixN3,
    AppendixGeneral { eta: f64 },
    Bump { h_support: f64 },
}

/// Piecewise source h_eta(r): 1 inside the unit ball, eta/r^3 outside. At
/// r = 1 the limit from below applies.
#[derive(Debug, Clone, Copy)]
pub struct SourceProfile {
    pub eta: f64,
}

impl SourceProfile {
    pub fn new(eta: f64) -> Result<SourceProfile> {
        if eta < 0.0 {
            return Err(Error::parameter("eta", "source requires eta >= 0"));
        }
        Ok(SourceProfile { eta })
    }

    pub fn eval(&self, r: f64) -> f64 {
        if r <= 1.0 {
            1.0
        } else {
            self.eta / (r * r * r)
        }
    }
}

/// A radial multiplier profile with closed-form (or quadrature-backed)
/// derivative evaluators.
#[derive(Debug, Clone)]
pub struct TestFunction {
    dim: usize,
    family: Family,
    /// phi''(0); equals the integration constant lambda for the appendix
    /// families.
    lambda: f64,
    phi_prime_at_infinity: f64,
    /// Outer-formula coefficients for the general family:
    /// phi'(r) = phi'(inf) - b r^{3-n} - d r^{1-n}.
    outer_b: f64,
    outer_d: f64,
    /// Cumulative bump integral H(s) = Int_0^s exp(1 - 1/(1-t^2)) dt tabulated
    /// on [0, 1] for the bump family.
    bump_table: Vec<f64>,
}

/// Standard smooth bump on the transition variable s in [0, 1]; identically 1
/// at s = 0 and 0 at s = 1 with all derivatives vanishing at both ends.
fn bump_kernel(s: f64) -> f64 {
    if s <= 0.0 {
        1.0
    } else if s >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

fn bump_kernel_d1(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        0.0
    } else {
        let q = 1.0 - s * s;
        bump_kernel(s) * (-2.0 * s / (q * q))
    }
}

fn bump_kernel_d2(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        0.0
    } else {
        let q = 1.0 - s * s;
        let g = -2.0 * s / (q * q);
        bump_kernel(s) * (g * g - 2.0 / (q * q) - 8.0 * s * s / (q * q * q))
    }
}

const BUMP_TABLE_LEN: usize = 1025;

fn bump_cumulative_table() -> Vec<f64> {
    let mut table = vec![0.0; BUMP_TABLE_LEN];
    let ds = 1.0 / (BUMP_TABLE_LEN - 1) as f64;
    for i in 1..BUMP_TABLE_LEN {
        let a = (i - 1) as f64 * ds;
        table[i] = table[i - 1] + integrate(bump_kernel, a, a + ds, &[], ds);
    }
    table
}

/// Interpolate the cumulative bump integral with cubic Hermite segments
/// (the integrand itself supplies exact endpoint slopes).
fn bump_cumulative(table: &[f64], s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return table[BUMP_TABLE_LEN - 1];
    }
    let ds = 1.0 / (BUMP_TABLE_LEN - 1) as f64;
    let cell = ((s / ds) as usize).min(BUMP_TABLE_LEN - 2);
    let t = (s - cell as f64 * ds) / ds;
    let (y0, y1) = (table[cell], table[cell + 1]);
    let (m0, m1) = (
        bump_kernel(cell as f64 * ds) * ds,
        bump_kernel((cell + 1) as f64 * ds) * ds,
    );
    let t2 = t * t;
    let t3 = t2 * t;
    y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
        + m0 * (t3 - 2.0 * t2 + t)
        + y1 * (-2.0 * t3 + 3.0 * t2)
        + m1 * (t3 - t2)
}

/// The explicit n = 3 profile: eta = 0, lambda = 1/6, with
/// `phi'(r) = r/6 - r^3/30` inside and `phi'(r) = 1/6 - 1/(30 r^2)` outside
/// the unit ball.
pub fn build_phi_n3() -> TestFunction {
    TestFunction {
        dim: 3,
        family: Family::AppendixN3,
        lambda: 1.0 / 6.0,
        phi_prime_at_infinity: 1.0 / 6.0,
        outer_b: 0.0,
        outer_d: 1.0 / 30.0,
        bump_table: Vec::new(),
    }
}

/// Open interval of admissible eta for the general construction, evaluated
/// in exact rational arithmetic:
/// `max{(n-3)/n, (-2n^2+8n-6)/(n^3-2n^2-5n+6)} < eta <
///  (n^3-6n^2+11n-6)/((n-2)(n+2)(n-3))`.
pub fn admissible_eta_interval(n: i64) -> Result<(Ratio<i64>, Ratio<i64>)> {
    if n < 4 {
        return Err(Error::parameter(
            "n",
            "admissibility interval requires n >= 4",
        ));
    }
    let lo_a = Ratio::new(n - 3, n);
    let lo_b = Ratio::new(-2 * n * n + 8 * n - 6, n * n * n - 2 * n * n - 5 * n + 6);
    let lo = lo_a.max(lo_b);
    let hi = Ratio::new(
        n * n * n - 6 * n * n + 11 * n - 6,
        (n - 2) * (n + 2) * (n - 3),
    );
    if lo >= hi {
        return Err(Error::Config(format!(
            "empty admissibility interval for n = {n}: lo = {lo} >= hi = {hi}"
        )));
    }
    Ok((lo, hi))
}

/// Integration constant pinned by cancelling the linear term of the outer
/// formula: `lambda = ((1+2 eta) n - (3+6 eta)) / (2 n (n-2)(n-3))`.
pub fn lambda_general(n: usize, eta: f64) -> f64 {
    let nf = n as f64;
    ((1.0 + 2.0 * eta) * nf - (3.0 + 6.0 * eta)) / (2.0 * nf * (nf - 2.0) * (nf - 3.0))
}

/// General construction for n >= 4 with eta strictly inside the admissible
/// interval. The printed case split labels this "n > 4" but verifies its
/// conditions for every n >= 4, which is what this builder accepts.
pub fn build_phi_general(n: usize, eta: f64) -> Result<TestFunction> {
    if n < 4 {
        return Err(Error::parameter(
            "n",
            "general construction requires n >= 4 (use build_phi_n3 for n = 3)",
        ));
    }
    let (lo, hi) = admissible_eta_interval(n as i64)?;
    let (lo_f, hi_f) = (ratio_to_f64(lo), ratio_to_f64(hi));
    if !(eta > lo_f) {
        return Err(Error::parameter(
            "eta",
            format!("eta = {eta} must exceed the lower admissibility bound {lo} = {lo_f}"),
        ));
    }
    if !(eta < hi_f) {
        return Err(Error::parameter(
            "eta",
            format!("eta = {eta} must stay below the upper admissibility bound {hi} = {hi_f}"),
        ));
    }
    let nf = n as f64;
    let lambda = lambda_general(n, eta);
    let phi_inf = eta / ((nf - 1.0) * (nf - 3.0));
    let outer_b = (eta * nf - nf + 3.0) / (2.0 * nf * (nf - 2.0) * (nf - 3.0));
    let outer_d = ((1.0 - eta) * nf.powi(4) + (3.0 * eta - 6.0) * nf.powi(3)
        + (11.0 + 4.0 * eta) * nf.powi(2)
        - (12.0 * eta + 6.0) * nf)
        / (2.0 * nf * nf * (nf - 1.0) * (nf - 2.0) * (nf - 3.0) * (nf + 2.0));
    Ok(TestFunction {
        dim: n,
        family: Family::AppendixGeneral { eta },
        lambda,
        phi_prime_at_infinity: phi_inf,
        outer_b,
        outer_d,
        bump_table: Vec::new(),
    })
}

/// General construction with the default eta: the midpoint of the admissible
/// interval, which maximizes the margin on every strict inequality.
pub fn build_phi_default(n: usize) -> Result<TestFunction> {
    if n == 3 {
        return Ok(build_phi_n3());
    }
    let (lo, hi) = admissible_eta_interval(n as i64)?;
    let mid = (ratio_to_f64(lo) + ratio_to_f64(hi)) / 2.0;
    build_phi_general(n, mid)
}

fn ratio_to_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Bump-based profile in dimension `dim`: phi'' = h with h identically 1 on
/// [0, a], a smooth cutoff on [a, 2a] and 0 beyond, a = `h_support`.
/// phi' = H(r) = Int_0^r h, and phi'(inf) = Int_0^inf h lies in (a, 2a).
pub fn build_bump_phi(dim: usize, h_support: f64) -> Result<TestFunction> {
    if !(h_support > 0.0) {
        return Err(Error::parameter("h_support", "bump support must be positive"));
    }
    if dim < 3 {
        return Err(Error::parameter("dim", "profiles require n >= 3"));
    }
    let table = bump_cumulative_table();
    let tail = table[BUMP_TABLE_LEN - 1]; // Int_0^1 of the transition kernel
    Ok(TestFunction {
        dim,
        family: Family::Bump { h_support },
        lambda: 1.0,
        phi_prime_at_infinity: h_support * (1.0 + tail),
        outer_b: 0.0,
        outer_d: 0.0,
        bump_table: table,
    })
}

impl TestFunction {
    pub fn family(&self) -> Family {
        self.family
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// phi itself by quadrature of phi' with phi(0) = 0. Only the derivatives
    /// enter the identities; the value is used by the property report.
    pub fn phi(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let breaks: Vec<f64> = match self.family {
            Family::Bump { h_support } => vec![h_support, 2.0 * h_support],
            _ => vec![1.0],
        };
        integrate(|s| self.phi_prime(s), 0.0, r, &breaks, 0.25)
    }

    fn h_eta(&self) -> SourceProfile {
        match self.family {
            Family::AppendixN3 => SourceProfile { eta: 0.0 },
            Family::AppendixGeneral { eta } => SourceProfile { eta },
            Family::Bump { .. } => unreachable!("bump profiles have no h_eta source"),
        }
    }
}

impl RadialProfile for TestFunction {
    fn dim(&self) -> usize {
        self.dim
    }

    fn phi_prime(&self, r: f64) -> f64 {
        let nf = self.dim as f64;
        match self.family {
            Family::AppendixN3 => {
                if r <= 1.0 {
                    r / 6.0 - r * r * r / 30.0
                } else {
                    1.0 / 6.0 - 1.0 / (30.0 * r * r)
                }
            }
            Family::AppendixGeneral { .. } => {
                if r <= 1.0 {
                    self.lambda * r - r * r * r / (2.0 * nf * (nf + 2.0))
                } else {
                    self.phi_prime_at_infinity
                        - self.outer_b * r.powi(3 - self.dim as i32)
                        - self.outer_d * r.powi(1 - self.dim as i32)
                }
            }
            Family::Bump { h_support } => {
                if r <= h_support {
                    r
                } else {
                    let s = (r - h_support) / h_support;
                    h_support * (1.0 + bump_cumulative(&self.bump_table, s))
                }
            }
        }
    }

    fn phi_second(&self, r: f64) -> f64 {
        let nf = self.dim as f64;
        match self.family {
            Family::AppendixN3 => {
                if r <= 1.0 {
                    1.0 / 6.0 - r * r / 10.0
                } else {
                    1.0 / (15.0 * r * r * r)
                }
            }
            Family::AppendixGeneral { .. } => {
                if r <= 1.0 {
                    self.lambda - 3.0 * r * r / (2.0 * nf * (nf + 2.0))
                } else {
                    (nf - 3.0) * self.outer_b * r.powi(2 - self.dim as i32)
                        + (nf - 1.0) * self.outer_d * r.powi(-(self.dim as i32))
                }
            }
            Family::Bump { h_support } => bump_kernel((r - h_support) / h_support),
        }
    }

    fn laplacian(&self, r: f64) -> f64 {
        let nf = self.dim as f64;
        if r == 0.0 {
            // phi'/r -> phi''(0)
            return nf * self.phi_second(0.0);
        }
        self.phi_second(r) + (nf - 1.0) * self.phi_prime(r) / r
    }

    fn bilaplacian(&self, r: f64) -> f64 {
        match self.family {
            Family::AppendixN3 | Family::AppendixGeneral { .. } => {
                // -Lap^2 phi = h_eta by construction; at r = 0 and at the
                // r = 1 interface the limit from below applies.
                -self.h_eta().eval(r.max(0.0))
            }
            Family::Bump { h_support } => {
                let nf = self.dim as f64;
                let a = h_support;
                if r <= a {
                    // plateau: phi'''' = phi''' = 0 and phi''/r^2 = phi'/r^3
                    0.0
                } else {
                    let s = (r - a) / a;
                    let h = bump_kernel(s);
                    let h1 = bump_kernel_d1(s) / a;
                    let h2 = bump_kernel_d2(s) / (a * a);
                    h2 + 2.0 * (nf - 1.0) * h1 / r
                        + (nf - 1.0) * (nf - 3.0)
                            * (h / (r * r) - self.phi_prime(r) / (r * r * r))
                }
            }
        }
    }

    fn phi_prime_at_infinity(&self) -> f64 {
        self.phi_prime_at_infinity
    }

    fn jump_radii(&self) -> Vec<f64> {
        match self.family {
            // h_eta jumps across the unit sphere
            Family::AppendixN3 | Family::AppendixGeneral { .. } => vec![1.0],
            Family::Bump { .. } => Vec::new(),
        }
    }

    fn ball_source(&self) -> Option<(f64, f64)> {
        match self.family {
            // eta = 0: Lap^2 phi = -chi_{r<1} exactly
            Family::AppendixN3 => Some((1.0, -1.0)),
            _ => None,
        }
    }
}

/// Exact bilaplacian evaluator; for the appendix families this is `-h_eta(r)`
/// in closed form, with the limit value -1 at r = 0.
pub fn eval_bilaplacian(tf: &TestFunction, r: f64) -> f64 {
    tf.bilaplacian(r)
}

/// The rescaled profile `phi_R = R phi(x/R)` with derivatives obtained by the
/// chain rule: `phi_R'(r) = phi'(r/R)`, `phi_R''(r) = phi''(r/R)/R`,
/// `Lap phi_R(r) = Lap phi(r/R)/R`, `Lap^2 phi_R(r) = Lap^2 phi(r/R)/R^3`.
/// phi_R'(inf) = phi'(inf) for every R.
#[derive(Clone, Copy)]
pub struct ScaledProfile<'a, P: RadialProfile + ?Sized> {
    pub profile: &'a P,
    pub scale: f64,
}

impl<'a, P: RadialProfile + ?Sized> ScaledProfile<'a, P> {
    pub fn new(profile: &'a P, scale: f64) -> ScaledProfile<'a, P> {
        assert!(scale > 0.0, "rescaling requires R > 0");
        ScaledProfile { profile, scale }
    }
}

impl<P: RadialProfile + ?Sized> RadialProfile for ScaledProfile<'_, P> {
    fn dim(&self) -> usize {
        self.profile.dim()
    }
    fn phi_prime(&self, r: f64) -> f64 {
        self.profile.phi_prime(r / self.scale)
    }
    fn phi_second(&self, r: f64) -> f64 {
        self.profile.phi_second(r / self.scale) / self.scale
    }
    fn laplacian(&self, r: f64) -> f64 {
        self.profile.laplacian(r / self.scale) / self.scale
    }
    fn bilaplacian(&self, r: f64) -> f64 {
        self.profile.bilaplacian(r / self.scale) / self.scale.powi(3)
    }
    fn phi_prime_at_infinity(&self) -> f64 {
        self.profile.phi_prime_at_infinity()
    }
    fn jump_radii(&self) -> Vec<f64> {
        self.profile
            .jump_radii()
            .into_iter()
            .map(|r| r * self.scale)
            .collect()
    }
    fn ball_source(&self) -> Option<(f64, f64)> {
        self.profile
            .ball_source()
            .map(|(r, v)| (r * self.scale, v / self.scale.powi(3)))
    }
}

/// Scaled derivative bundle at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledDerivatives {
    pub phi_prime: f64,
    pub phi_second: f64,
    pub laplacian: f64,
    pub bilaplacian: f64,
}

/// Evaluate the derivatives of `phi_R = R phi(x/R)` at radius `r`.
pub fn rescale(tf: &TestFunction, scale: f64, r: f64) -> ScaledDerivatives {
    let scaled = ScaledProfile::new(tf, scale);
    ScaledDerivatives {
        phi_prime: scaled.phi_prime(r),
        phi_second: scaled.phi_second(r),
        laplacian: scaled.laplacian(r),
        bilaplacian: scaled.bilaplacian(r),
    }
}

/// The surrogate phi(r) = r^2/2: identity hessian, Lap phi = n, Lap^2 phi = 0.
#[derive(Debug, Clone, Copy)]
pub struct QuadraticProfile {
    pub dim: usize,
}

impl RadialProfile for QuadraticProfile {
    fn dim(&self) -> usize {
        self.dim
    }
    fn phi_prime(&self, r: f64) -> f64 {
        r
    }
    fn phi_second(&self, _r: f64) -> f64 {
        1.0
    }
    fn laplacian(&self, _r: f64) -> f64 {
        self.dim as f64
    }
    fn bilaplacian(&self, _r: f64) -> f64 {
        0.0
    }
    fn phi_prime_at_infinity(&self) -> f64 {
        f64::INFINITY
    }
}

/// phi(r) = r^2/2 capped at slope `cap`: phi' = min(r, cap). A legitimate
/// multiplier for the radiation estimates (phi' >= 0 with a finite limit at
/// infinity); the distributional part at r = cap is ignored by the sampled
/// evaluators.
#[derive(Debug, Clone, Copy)]
pub struct CappedQuadratic {
    pub dim: usize,
    pub cap: f64,
}

impl RadialProfile for CappedQuadratic {
    fn dim(&self) -> usize {
        self.dim
    }
    fn phi_prime(&self, r: f64) -> f64 {
        r.min(self.cap)
    }
    fn phi_second(&self, r: f64) -> f64 {
        if r <= self.cap {
            1.0
        } else {
            0.0
        }
    }
    fn laplacian(&self, r: f64) -> f64 {
        let nf = self.dim as f64;
        if r == 0.0 {
            return nf;
        }
        self.phi_second(r) + (nf - 1.0) * self.phi_prime(r) / r
    }
    fn bilaplacian(&self, r: f64) -> f64 {
        let nf = self.dim as f64;
        if r <= self.cap {
            0.0
        } else {
            (nf - 1.0) * (3.0 - nf) * self.cap / (r * r * r)
        }
    }
    fn phi_prime_at_infinity(&self) -> f64 {
        self.cap
    }
    fn jump_radii(&self) -> Vec<f64> {
        vec![self.cap]
    }
}

/// The zero multiplier; every term of every identity vanishes with it.
#[derive(Debug, Clone, Copy)]
pub struct ZeroProfile {
    pub dim: usize,
}

impl RadialProfile for ZeroProfile {
    fn dim(&self) -> usize {
        self.dim
    }
    fn phi_prime(&self, _r: f64) -> f64 {
        0.0
    }
    fn phi_second(&self, _r: f64) -> f64 {
        0.0
    }
    fn laplacian(&self, _r: f64) -> f64 {
        0.0
    }
    fn bilaplacian(&self, _r: f64) -> f64 {
        0.0
    }
    fn phi_prime_at_infinity(&self) -> f64 {
        0.0
    }
}

/// One property check of the report.
#[derive(Debug, Clone, Serialize)]
pub struct PropertyCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Verification report for the profile properties: vanishing at the origin,
/// non-positive bilaplacian, positive radial derivatives off the origin,
/// bounded slope and r phi'', a finite positive slope at infinity, and the
/// fitted constant of |Lap phi| <= C/(1+r).
#[derive(Debug, Clone, Serialize)]
pub struct PropertyReport {
    pub checks: Vec<PropertyCheck>,
    pub all_passed: bool,
    pub measured_slope_bound: f64,
    pub measured_r_phi_second_bound: f64,
    pub laplacian_decay_constant: f64,
}

/// Check the profile properties over the sample radii (positive, sorted).
/// Failures are report entries, never errors.
pub fn verify_properties(profile: &dyn RadialProfile, sample_radii: &[f64]) -> PropertyReport {
    assert!(!sample_radii.is_empty(), "need at least one sample radius");
    assert!(
        sample_radii.windows(2).all(|w| w[0] < w[1]) && sample_radii[0] > 0.0,
        "sample radii must be positive and sorted"
    );

    let mut checks = Vec::new();
    let tol = 1e-12;

    let p0 = profile.phi_prime(0.0);
    let s0 = profile.phi_second(0.0);
    checks.push(PropertyCheck {
        name: "origin".into(),
        passed: p0.abs() <= tol && s0 > 0.0,
        detail: format!("phi'(0) = {p0}, phi''(0) = {s0}"),
    });

    let worst_bilap = sample_radii
        .iter()
        .map(|&r| profile.bilaplacian(r))
        .fold(f64::NEG_INFINITY, f64::max);
    checks.push(PropertyCheck {
        name: "bilaplacian_nonpositive".into(),
        passed: worst_bilap <= tol,
        detail: format!("max Lap^2 phi over samples = {worst_bilap}"),
    });

    let min_prime = sample_radii
        .iter()
        .map(|&r| profile.phi_prime(r))
        .fold(f64::INFINITY, f64::min);
    let min_second = sample_radii
        .iter()
        .map(|&r| profile.phi_second(r))
        .fold(f64::INFINITY, f64::min);
    checks.push(PropertyCheck {
        name: "radial_derivatives_positive".into(),
        passed: min_prime > 0.0 && min_second > 0.0,
        detail: format!("min phi' = {min_prime}, min phi'' = {min_second}"),
    });

    let slope_bound = sample_radii
        .iter()
        .map(|&r| profile.phi_prime(r).abs())
        .fold(0.0_f64, f64::max);
    let r_phi2_bound = sample_radii
        .iter()
        .map(|&r| (r * profile.phi_second(r)).abs())
        .fold(0.0_f64, f64::max);
    checks.push(PropertyCheck {
        name: "bounded_slope_and_r_phi_second".into(),
        passed: slope_bound.is_finite() && r_phi2_bound.is_finite(),
        detail: format!("max phi' = {slope_bound}, max r phi'' = {r_phi2_bound}"),
    });

    let pinf = profile.phi_prime_at_infinity();
    checks.push(PropertyCheck {
        name: "slope_limit_positive_finite".into(),
        passed: pinf.is_finite() && pinf > 0.0,
        detail: format!("phi'(inf) = {pinf}"),
    });

    let lap_const = sample_radii
        .iter()
        .map(|&r| profile.laplacian(r).abs() * (1.0 + r))
        .fold(0.0_f64, f64::max);
    checks.push(PropertyCheck {
        name: "laplacian_decay".into(),
        passed: lap_const.is_finite(),
        detail: format!("fitted C with |Lap phi| <= C/(1+r): {lap_const}"),
    });

    let all_passed = checks.iter().all(|c| c.passed);
    PropertyReport {
        checks,
        all_passed,
        measured_slope_bound: slope_bound,
        measured_r_phi_second_bound: r_phi2_bound,
        laplacian_decay_constant: lap_const,
    }
}

/// Quadrature oracle for the defining radial ODE:
/// `phi'(r) = lambda r - r^{1-n} Int_0^r u^{n-1} Int_0^u s^{1-n}
/// Int_0^s t^{n-1} h_eta(t) dt ds du`.
///
/// The three nested integrals are tabulated cumulatively on a panel grid
/// aligned with the r = 1 interface (Gauss-Legendre per panel, partial
/// panels integrated on demand), fully independent of the printed closed
/// forms it is used to check.
pub struct OdeOracle {
    n: usize,
    lambda: f64,
    panel_width: f64,
    /// cumulative Int_0^{e_j} u^{n-1} I2(u) du at the panel ends e_j
    level3: Vec<f64>,
    /// cumulative I2 and I1 at the panel ends, for partial-panel evaluation
    level2: Vec<f64>,
    level1: Vec<f64>,
    eta: f64,
}

impl OdeOracle {
    pub fn new(n: usize, eta: f64, lambda: f64, r_max: f64) -> OdeOracle {
        assert!(n >= 3);
        let panel_width = 0.05; // divides the unit interface exactly
        let panels = (r_max / panel_width).ceil() as usize + 1;
        let nf = n as f64;
        let h = move |t: f64| if t <= 1.0 { 1.0 } else { eta / (t * t * t) };

        let mut level1 = vec![0.0; panels + 1];
        for j in 1..=panels {
            let a = (j - 1) as f64 * panel_width;
            let b = j as f64 * panel_width;
            level1[j] =
                level1[j - 1] + integrate(|t| t.powf(nf - 1.0) * h(t), a, b, &[], panel_width);
        }
        let i1 = |s: f64, level1: &[f64]| -> f64 {
            let j = (s / panel_width).floor() as usize;
            let j = j.min(panels - 1);
            let base = j as f64 * panel_width;
            level1[j] + integrate(|t| t.powf(nf - 1.0) * h(t), base, s, &[], panel_width)
        };

        let mut level2 = vec![0.0; panels + 1];
        let g2 = |s: f64, level1: &[f64]| -> f64 {
            if s == 0.0 {
                0.0
            } else {
                s.powf(1.0 - nf) * i1(s, level1)
            }
        };
        for j in 1..=panels {
            let a = (j - 1) as f64 * panel_width;
            let b = j as f64 * panel_width;
            level2[j] = level2[j - 1] + integrate(|s| g2(s, &level1), a, b, &[], panel_width);
        }
        let i2 = |u: f64, level1: &[f64], level2: &[f64]| -> f64 {
            let j = ((u / panel_width).floor() as usize).min(panels - 1);
            let base = j as f64 * panel_width;
            level2[j] + integrate(|s| g2(s, level1), base, u, &[], panel_width)
        };

        let mut level3 = vec![0.0; panels + 1];
        for j in 1..=panels {
            let a = (j - 1) as f64 * panel_width;
            let b = j as f64 * panel_width;
            level3[j] = level3[j - 1]
                + integrate(
                    |u| u.powf(nf - 1.0) * i2(u, &level1, &level2),
                    a,
                    b,
                    &[],
                    panel_width,
                );
        }
        OdeOracle {
            n,
            lambda,
            panel_width,
            level3,
            level2,
            level1,
            eta,
        }
    }

    pub fn phi_prime(&self, r: f64) -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        let nf = self.n as f64;
        let panels = self.level3.len() - 1;
        let eta = self.eta;
        let h = move |t: f64| if t <= 1.0 { 1.0 } else { eta / (t * t * t) };
        let i1 = |s: f64| -> f64 {
            let j = ((s / self.panel_width).floor() as usize).min(panels - 1);
            let base = j as f64 * self.panel_width;
            self.level1[j] + integrate(|t| t.powf(nf - 1.0) * h(t), base, s, &[], self.panel_width)
        };
        let g2 = |s: f64| -> f64 {
            if s == 0.0 {
                0.0
            } else {
                s.powf(1.0 - nf) * i1(s)
            }
        };
        let i2 = |u: f64| -> f64 {
            let j = ((u / self.panel_width).floor() as usize).min(panels - 1);
            let base = j as f64 * self.panel_width;
            self.level2[j] + integrate(g2, base, u, &[], self.panel_width)
        };
        let j = ((r / self.panel_width).floor() as usize).min(panels - 1);
        let base = j as f64 * self.panel_width;
        let i3 = self.level3[j]
            + integrate(|u| u.powf(nf - 1.0) * i2(u), base, r, &[], self.panel_width);
        self.lambda * r - r.powf(1.0 - nf) * i3
    }
}

/// One-shot wrapper around [`OdeOracle`] for single evaluations.
pub fn phi_prime_ode_oracle(n: usize, eta: f64, lambda: f64, r: f64) -> f64 {
    OdeOracle::new(n, eta, lambda, r.max(1.0)).phi_prime(r)
}

/// Independent bilaplacian route: apply the radial operator
/// `(Lap phi)'' + (n-1)(Lap phi)'/r` to the closed-form Lap phi with
/// 4th-order finite differences. Used to confirm `-Lap^2 phi = h_eta` away
/// from the r = 1 interface.
pub fn bilaplacian_via_numeric_differentiation(profile: &dyn RadialProfile, r: f64) -> f64 {
    let nf = profile.dim() as f64;
    // Step floor keeps the eps/h^2 roundoff of the second difference below
    // 1e-8 while the stencil reach 2h stays clear of the r = 1 interface for
    // radii outside its 2e-3 neighborhood.
    let h = (5e-4 * r).max(2.5e-4);
    let f = |x: f64| profile.laplacian(x);
    let d1 = (-f(r + 2.0 * h) + 8.0 * f(r + h) - 8.0 * f(r - h) + f(r - 2.0 * h)) / (12.0 * h);
    let d2 =
        (-f(r + 2.0 * h) + 16.0 * f(r + h) - 30.0 * f(r) + 16.0 * f(r - h) - f(r - 2.0 * h))
            / (12.0 * h * h);
    d2 + (nf - 1.0) * d1 / r
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXACT: f64 = 1e-12;

    #[test]
    fn n3_printed_values() {
        let tf = build_phi_n3();
        assert!((tf.phi_prime(1.0) - 2.0 / 15.0).abs() < EXACT);
        assert!((tf.phi_second(0.0) - 1.0 / 6.0).abs() < EXACT);
        assert!((tf.phi_second(1.0) - 1.0 / 15.0).abs() < EXACT);
        assert!((tf.phi_second(2.0) - 1.0 / 120.0).abs() < EXACT);
        assert!((tf.phi_prime_at_infinity() - 1.0 / 6.0).abs() < EXACT);
        assert!((tf.lambda() - 1.0 / 6.0).abs() < EXACT);
    }

    #[test]
    fn n3_continuity_at_interface() {
        let tf = build_phi_n3();
        let below = 1.0 - 1e-13;
        let above = 1.0 + 1e-13;
        assert!((tf.phi_prime(below) - tf.phi_prime(above)).abs() < 1e-12);
        assert!((tf.phi_second(below) - tf.phi_second(above)).abs() < 1e-12);
    }

    #[test]
    fn general_lambda_and_continuity() {
        // exact rational substitution: ((1 + 3/4) 4 - (3 + 9/4)) / 16 = 0.109375
        let tf = build_phi_general(4, 0.375).unwrap();
        assert!((tf.lambda() - 0.109375).abs() < EXACT);
        for n in 4..=8 {
            let tf = build_phi_default(n).unwrap();
            let below = tf.phi_prime(1.0 - 1e-13);
            let above = tf.phi_prime(1.0 + 1e-13);
            assert!((below - above).abs() < 1e-12, "phi' jump at n = {n}");
            let below2 = tf.phi_second(1.0 - 1e-13);
            let above2 = tf.phi_second(1.0 + 1e-13);
            assert!((below2 - above2).abs() < 1e-12, "phi'' jump at n = {n}");
        }
    }

    #[test]
    fn general_second_derivative_positive_on_samples() {
        let tf = build_phi_general(4, 0.375).unwrap();
        for r in [0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
            assert!(tf.phi_second(r) > 0.0, "phi''({r}) <= 0");
        }
    }

    #[test]
    fn eta_outside_interval_is_rejected() {
        let err = build_phi_general(4, 0.6).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("upper"), "unexpected message: {msg}");
        let err = build_phi_general(4, 0.25).unwrap_err();
        assert!(err.to_string().contains("lower"));
    }

    #[test]
    fn admissible_intervals_match_exact_rationals() {
        let (lo, hi) = admissible_eta_interval(4).unwrap();
        assert_eq!(lo, Ratio::new(1, 4));
        assert_eq!(hi, Ratio::new(1, 2));
        let (lo, hi) = admissible_eta_interval(5).unwrap();
        assert_eq!(lo, Ratio::new(2, 5));
        assert_eq!(hi, Ratio::new(4, 7));
        let (lo, hi) = admissible_eta_interval(10).unwrap();
        assert_eq!(lo, Ratio::new(7, 10));
        assert_eq!(hi, Ratio::new(3, 4));
    }

    #[test]
    fn admissible_intervals_nonempty_through_n_20() {
        for n in 4..=20 {
            let (lo, hi) = admissible_eta_interval(n).unwrap();
            assert!(lo < hi, "empty interval at n = {n}");
            assert!(lo > Ratio::new(0, 1));
        }
        assert!(admissible_eta_interval(3).is_err());
    }

    #[test]
    fn bilaplacian_closed_forms() {
        let n3 = build_phi_n3();
        assert_eq!(eval_bilaplacian(&n3, 0.5), -1.0);
        assert_eq!(eval_bilaplacian(&n3, 2.0), 0.0);
        assert_eq!(eval_bilaplacian(&n3, 0.0), -1.0);
        let g = build_phi_general(4, 0.375).unwrap();
        assert!((eval_bilaplacian(&g, 2.0) - (-0.046875)).abs() < EXACT);
    }

    #[test]
    fn rescaling_follows_chain_rule() {
        let tf = build_phi_n3();
        let unscaled = rescale(&tf, 1.0, 0.7);
        assert_eq!(unscaled.phi_prime, tf.phi_prime(0.7));
        assert_eq!(unscaled.bilaplacian, tf.bilaplacian(0.7));
        let d = rescale(&tf, 2.0, 2.0);
        assert!((d.phi_prime - 2.0 / 15.0).abs() < EXACT);
        assert!((d.bilaplacian - (-1.0 / 8.0)).abs() < EXACT);
        // phi'(inf) is scale invariant
        for scale in [0.5, 1.0, 2.0, 10.0] {
            let s = ScaledProfile::new(&tf, scale);
            assert_eq!(s.phi_prime_at_infinity(), tf.phi_prime_at_infinity());
        }
    }

    #[test]
    fn bump_matches_cutoff_structure() {
        let a = 1.0;
        let tf = build_bump_phi(3, a).unwrap();
        assert_eq!(tf.phi_second(0.5), 1.0);
        assert_eq!(tf.phi_second(a), 1.0);
        assert_eq!(tf.phi_second(2.0 * a), 0.0);
        assert_eq!(tf.phi_second(3.0), 0.0);
        let pinf = tf.phi_prime_at_infinity();
        assert!(pinf > a && pinf < 2.0 * a, "phi'(inf) = {pinf}");
        // quadrature cross-check of phi'(inf)
        let by_quadrature = integrate(|r| tf.phi_second(r), 0.0, 2.0 * a, &[a], 0.05);
        assert!((pinf - by_quadrature).abs() < 1e-9);
        // H is continuous and increasing through the transition
        let mut prev = tf.phi_prime(0.9);
        for i in 1..=40 {
            let r = 0.9 + 0.04 * i as f64;
            let cur = tf.phi_prime(r);
            assert!(cur >= prev - 1e-12);
            prev = cur;
        }
        // plateau bilaplacian vanishes in n = 3
        assert_eq!(tf.bilaplacian(0.5), 0.0);
    }

    #[test]
    fn ode_oracle_reproduces_closed_forms() {
        // Light version of the acceptance check: a handful of radii.
        let n3 = build_phi_n3();
        let oracle3 = OdeOracle::new(3, 0.0, n3.lambda(), 8.0);
        for r in [0.25, 0.75, 1.5, 3.0, 7.0] {
            assert!(
                (oracle3.phi_prime(r) - n3.phi_prime(r)).abs() < 1e-8,
                "n=3 mismatch at r = {r}"
            );
        }
        let g = build_phi_general(4, 0.375).unwrap();
        let oracle4 = OdeOracle::new(4, 0.375, g.lambda(), 8.0);
        for r in [0.25, 0.75, 1.5, 3.0, 7.0] {
            assert!(
                (oracle4.phi_prime(r) - g.phi_prime(r)).abs() < 1e-8,
                "n=4 mismatch at r = {r}"
            );
        }
        // the one-shot wrapper agrees
        assert!((phi_prime_ode_oracle(3, 0.0, n3.lambda(), 1.5) - n3.phi_prime(1.5)).abs() < 1e-8);
    }

    #[test]
    fn numeric_bilaplacian_recovers_source() {
        let n3 = build_phi_n3();
        let g = build_phi_default(4).unwrap();
        for r in [0.05, 0.4, 0.9, 1.1, 2.5, 8.0, 20.0] {
            let numeric = bilaplacian_via_numeric_differentiation(&n3, r);
            assert!(
                (numeric - n3.bilaplacian(r)).abs() < 1e-8,
                "n=3 residual at r = {r}: {numeric} vs {}",
                n3.bilaplacian(r)
            );
            let numeric = bilaplacian_via_numeric_differentiation(&g, r);
            assert!(
                (numeric - g.bilaplacian(r)).abs() < 1e-8,
                "n=4 residual at r = {r}"
            );
        }
    }

    #[test]
    fn property_report_passes_for_appendix_families() {
        let radii: Vec<f64> = (1..=60).map(|i| 0.05 * 1.13_f64.powi(i)).collect();
        let n3 = build_phi_n3();
        assert!(verify_properties(&n3, &radii).all_passed);
        let g = build_phi_general(4, 0.375).unwrap();
        assert!(verify_properties(&g, &radii).all_passed);
    }

    #[test]
    fn corrupted_profile_fails_positivity() {
        struct Corrupted(TestFunction);
        impl RadialProfile for Corrupted {
            fn dim(&self) -> usize {
                self.0.dim()
            }
            fn phi_prime(&self, r: f64) -> f64 {
                self.0.phi_prime(r)
            }
            fn phi_second(&self, r: f64) -> f64 {
                if (r - 2.0).abs() < 0.01 {
                    -1.0
                } else {
                    self.0.phi_second(r)
                }
            }
            fn laplacian(&self, r: f64) -> f64 {
                self.0.laplacian(r)
            }
            fn bilaplacian(&self, r: f64) -> f64 {
                self.0.bilaplacian(r)
            }
            fn phi_prime_at_infinity(&self) -> f64 {
                self.0.phi_prime_at_infinity()
            }
        }
        let bad = Corrupted(build_phi_n3());
        let report = verify_properties(&bad, &[0.5, 1.0, 2.0, 4.0]);
        assert!(!report.all_passed);
        let positivity = report
            .checks
            .iter()
            .find(|c| c.name == "radial_derivatives_positive")
            .unwrap();
        assert!(!positivity.passed);
    }

    #[test]
    fn capped_quadratic_profile() {
        let p = CappedQuadratic { dim: 3, cap: 2.0 };
        assert_eq!(p.phi_prime(1.0), 1.0);
        assert_eq!(p.phi_prime(5.0), 2.0);
        assert_eq!(p.phi_second(1.0), 1.0);
        assert_eq!(p.phi_second(3.0), 0.0);
        assert_eq!(p.bilaplacian(5.0), 0.0); // (n-1)(3-n) = 0 in n = 3
        assert_eq!(p.phi_prime_at_infinity(), 2.0);
    }
}
