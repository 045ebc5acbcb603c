//! Equation specifications for the general class
//!
//! `i du/dt - Lap u + |x|^{-2} W(x/|x|) u + s lambda u |u|^{4/n} = 0`
//!
//! (kinetic sign `MinusLaplacian`) and its conformally conjugated partner
//!
//! `i du/dt + Lap u - |x|^{-2} W(x/|x|) u - s lambda u |u|^{4/n} = 0`
//!
//! (kinetic sign `PlusLaplacian`), with `s = +1` defocusing, `s = -1`
//! focusing, and n = 3 for all gridded evolution. Both sign conventions are
//! first-class because the conformal transform swaps them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Sign of the kinetic term as written above.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KineticSign {
    MinusLaplacian,
    PlusLaplacian,
}

impl KineticSign {
    /// sigma = +1 for `MinusLaplacian`, -1 for `PlusLaplacian`. The exact
    /// substeps are `u_hat <- exp(i sigma |xi|^2 dt) u_hat` and
    /// `u <- u exp(i sigma (V + s lambda |u|^{4/n}) dt)`.
    pub fn sigma(&self) -> f64 {
        match self {
            KineticSign::MinusLaplacian => 1.0,
            KineticSign::PlusLaplacian => -1.0,
        }
    }

    pub fn flipped(&self) -> KineticSign {
        match self {
            KineticSign::MinusLaplacian => KineticSign::PlusLaplacian,
            KineticSign::PlusLaplacian => KineticSign::MinusLaplacian,
        }
    }
}

/// Sign of the critical nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Nonlinearity {
    None,
    Defocusing,
    Focusing,
}

impl Nonlinearity {
    /// s = +1 defocusing, -1 focusing, 0 absent.
    pub fn sign(&self) -> f64 {
        match self {
            Nonlinearity::None => 0.0,
            Nonlinearity::Defocusing => 1.0,
            Nonlinearity::Focusing => -1.0,
        }
    }
}

/// Angular factor W of the inverse-square potential. W is bounded,
/// measurable and non-negative on the sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngularKind {
    /// W identically c >= 0.
    Constant { c: f64 },
    /// W(theta) = a + b (x_1/|x|)^2 with a, b >= 0.
    Axial { a: f64, b: f64 },
}

/// The potential |x|^{-2} W(x/|x|), regularized by clamping |x| at epsilon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularPotential {
    pub kind: AngularKind,
    /// Clamp radius; must be at least one grid spacing when sampled.
    pub regularization_radius: f64,
}

impl AngularPotential {
    pub fn constant(c: f64, regularization_radius: f64) -> Result<AngularPotential> {
        if c < 0.0 {
            return Err(Error::parameter("c", "W must be non-negative"));
        }
        Ok(AngularPotential {
            kind: AngularKind::Constant { c },
            regularization_radius,
        })
    }

    pub fn axial(a: f64, b: f64, regularization_radius: f64) -> Result<AngularPotential> {
        if a < 0.0 || b < 0.0 {
            return Err(Error::parameter("a/b", "axial weights must be non-negative"));
        }
        Ok(AngularPotential {
            kind: AngularKind::Axial { a, b },
            regularization_radius,
        })
    }

    /// W evaluated at the direction of x (x must be nonzero).
    pub fn w_theta(&self, x: [f64; 3]) -> f64 {
        match self.kind {
            AngularKind::Constant { c } => c,
            AngularKind::Axial { a, b } => {
                let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
                if r2 == 0.0 {
                    a
                } else {
                    a + b * x[0] * x[0] / r2
                }
            }
        }
    }

    pub fn sup_w(&self) -> f64 {
        match self.kind {
            AngularKind::Constant { c } => c,
            AngularKind::Axial { a, b } => a + b,
        }
    }
}

/// The sampled potential V(x) = W(x/|x|) / max(|x|^2, eps^2).
#[derive(Debug, Clone)]
pub struct PotentialField {
    pub grid: Grid,
    pub epsilon: f64,
    pub values: Vec<f64>,
}

/// Sample the regularized potential on a grid. Requires eps >= one grid
/// spacing; the cell-centered grid guarantees no sample sits at the origin.
pub fn sample_potential(grid: Grid, pot: &AngularPotential) -> Result<PotentialField> {
    let eps = pot.regularization_radius;
    if eps < grid.spacing() {
        return Err(Error::parameter(
            "regularization_radius",
            format!(
                "epsilon = {eps} must be at least one grid spacing = {}",
                grid.spacing()
            ),
        ));
    }
    let values = (0..grid.len())
        .map(|idx| {
            let x = grid.position(idx);
            let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
            pot.w_theta(x) / r2.max(eps * eps)
        })
        .collect();
    Ok(PotentialField {
        grid,
        epsilon: eps,
        values,
    })
}

impl PotentialField {
    /// Radial derivative of the sampled potential at the cell, i.e.
    /// dV/dr = -2 W / r^3 outside the clamp radius and 0 inside it. This is
    /// the weight the multiplier identity pairs with phi' for the *discrete*
    /// flow, so identity residuals stay free of regularization bias.
    pub fn radial_derivative(&self, pot: &AngularPotential, idx: usize) -> f64 {
        let x = self.grid.position(idx);
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        if r <= self.epsilon {
            0.0
        } else {
            -2.0 * pot.w_theta(x) / (r * r * r)
        }
    }
}

/// Which equation of the class is evolved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquationSpec {
    pub kinetic_sign: KineticSign,
    pub potential: Option<AngularPotential>,
    pub nonlinearity: Nonlinearity,
    /// Coupling lambda >= 0; zero exactly when the nonlinearity is absent.
    pub coupling: f64,
}

impl EquationSpec {
    /// Critical exponent 4/n at n = 3; the nonlinear term is u |u|^{4/3}.
    pub const EXPONENT: f64 = 4.0 / 3.0;

    pub fn new(
        kinetic_sign: KineticSign,
        potential: Option<AngularPotential>,
        nonlinearity: Nonlinearity,
        coupling: f64,
    ) -> Result<EquationSpec> {
        if coupling < 0.0 {
            return Err(Error::parameter("coupling", "lambda must be >= 0"));
        }
        let has_nl = nonlinearity != Nonlinearity::None;
        if has_nl != (coupling > 0.0) {
            return Err(Error::parameter(
                "coupling",
                "lambda = 0 iff the nonlinearity is absent",
            ));
        }
        Ok(EquationSpec {
            kinetic_sign,
            potential,
            nonlinearity,
            coupling,
        })
    }

    /// Free Schrödinger equation with the given sign convention.
    pub fn free(kinetic_sign: KineticSign) -> EquationSpec {
        EquationSpec {
            kinetic_sign,
            potential: None,
            nonlinearity: Nonlinearity::None,
            coupling: 0.0,
        }
    }

    /// Linear equation with an inverse-square angular potential.
    pub fn linear(kinetic_sign: KineticSign, potential: AngularPotential) -> EquationSpec {
        EquationSpec {
            kinetic_sign,
            potential: Some(potential),
            nonlinearity: Nonlinearity::None,
            coupling: 0.0,
        }
    }

    /// L^2-critical NLS with unit coupling.
    pub fn nls(kinetic_sign: KineticSign, nonlinearity: Nonlinearity) -> Result<EquationSpec> {
        EquationSpec::new(kinetic_sign, None, nonlinearity, 1.0)
    }

    /// The equation satisfied by the conformal transform of a solution:
    /// same potential, same nonlinearity data, flipped kinetic sign.
    pub fn conjugate(&self) -> EquationSpec {
        EquationSpec {
            kinetic_sign: self.kinetic_sign.flipped(),
            ..*self
        }
    }

    pub fn is_free(&self) -> bool {
        self.potential.is_none() && self.nonlinearity == Nonlinearity::None
    }

    pub fn is_linear(&self) -> bool {
        self.nonlinearity == Nonlinearity::None
    }

    /// Short human-readable tag used in reports.
    pub fn tag(&self) -> String {
        let kin = match self.kinetic_sign {
            KineticSign::MinusLaplacian => "minus_laplacian",
            KineticSign::PlusLaplacian => "plus_laplacian",
        };
        let pot = match self.potential {
            None => "free".to_string(),
            Some(p) => match p.kind {
                AngularKind::Constant { c } => format!("W=const({c})"),
                AngularKind::Axial { a, b } => format!("W=axial({a},{b})"),
            },
        };
        let nl = match self.nonlinearity {
            Nonlinearity::None => "linear".to_string(),
            Nonlinearity::Defocusing => format!("defocusing(lambda={})", self.coupling),
            Nonlinearity::Focusing => format!("focusing(lambda={})", self.coupling),
        };
        format!("{kin}/{pot}/{nl}")
    }
}
