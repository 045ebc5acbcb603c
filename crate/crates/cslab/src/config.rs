//! JSON run configuration: scenario selection, equation block, numerics
//! block, data family and output controls. Unknown keys are rejected with
//! the offending field named; invariant violations name the field path.
//!
//! Documented defaults: `dt = 1e-3`, `epsilon_spacings = 2` (the clamp
//! radius in units of the grid spacing), `seed = 0`. Every other parameter
//! falls back to the running scenario's built-in configuration when absent.

use serde::{Deserialize, Serialize};

use crate::equation::{AngularPotential, EquationSpec, KineticSign, Nonlinearity};
use crate::error::{Error, Result};

/// The nine scenario names. Serialized names match the report files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScenarioName {
    #[serde(rename = "appendix_selfcheck")]
    AppendixSelfcheck,
    #[serde(rename = "conservation_suite")]
    ConservationSuite,
    #[serde(rename = "thmSL_bounds")]
    ThmSlBounds,
    #[serde(rename = "thmUCSL_lower")]
    ThmUcslLower,
    #[serde(rename = "thm_uniqueSL")]
    ThmUniqueSl,
    #[serde(rename = "radiation_linear")]
    RadiationLinear,
    #[serde(rename = "thmSN_bounds")]
    ThmSnBounds,
    #[serde(rename = "radiation_nls")]
    RadiationNls,
    #[serde(rename = "thm_uniqueSN")]
    ThmUniqueSn,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 9] = [
        ScenarioName::AppendixSelfcheck,
        ScenarioName::ConservationSuite,
        ScenarioName::ThmSlBounds,
        ScenarioName::ThmUcslLower,
        ScenarioName::ThmUniqueSl,
        ScenarioName::RadiationLinear,
        ScenarioName::ThmSnBounds,
        ScenarioName::RadiationNls,
        ScenarioName::ThmUniqueSn,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioName::AppendixSelfcheck => "appendix_selfcheck",
            ScenarioName::ConservationSuite => "conservation_suite",
            ScenarioName::ThmSlBounds => "thmSL_bounds",
            ScenarioName::ThmUcslLower => "thmUCSL_lower",
            ScenarioName::ThmUniqueSl => "thm_uniqueSL",
            ScenarioName::RadiationLinear => "radiation_linear",
            ScenarioName::ThmSnBounds => "thmSN_bounds",
            ScenarioName::RadiationNls => "radiation_nls",
            ScenarioName::ThmUniqueSn => "thm_uniqueSN",
        }
    }
}

/// Potential block of the equation configuration.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum PotentialConfig {
    Constant { c: f64 },
    Axial { a: f64, b: f64 },
}

/// Equation block: sign conventions, potential, nonlinearity and coupling.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationConfig {
    #[serde(default = "default_kinetic_sign")]
    pub kinetic_sign: KineticSign,
    #[serde(default)]
    pub potential: Option<PotentialConfig>,
    #[serde(default = "default_nonlinearity")]
    pub nonlinearity: Nonlinearity,
    #[serde(default)]
    pub coupling: f64,
}

fn default_kinetic_sign() -> KineticSign {
    KineticSign::MinusLaplacian
}

fn default_nonlinearity() -> Nonlinearity {
    Nonlinearity::None
}

impl EquationConfig {
    /// Resolve against a grid spacing (the clamp radius is specified in
    /// spacing units in the numerics block).
    pub fn resolve(&self, epsilon: f64) -> Result<EquationSpec> {
        let potential = match self.potential {
            None => None,
            Some(PotentialConfig::Constant { c }) => Some(AngularPotential::constant(c, epsilon)?),
            Some(PotentialConfig::Axial { a, b }) => Some(AngularPotential::axial(a, b, epsilon)?),
        };
        EquationSpec::new(self.kinetic_sign, potential, self.nonlinearity, self.coupling)
    }
}

/// Numerics block. Absent fields default to the scenario's built-ins.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    pub box_half_width: Option<f64>,
    pub points_per_axis: Option<usize>,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub horizon: Option<f64>,
    pub snapshot_count: Option<usize>,
    #[serde(default)]
    pub radius_ladder: Option<Vec<f64>>,
    #[serde(default)]
    pub delta_ladder: Option<Vec<f64>>,
    #[serde(default = "default_epsilon_spacings")]
    pub epsilon_spacings: f64,
}

pub fn default_dt() -> f64 {
    1e-3
}

pub fn default_epsilon_spacings() -> f64 {
    2.0
}

impl Default for NumericsConfig {
    fn default() -> Self {
        NumericsConfig {
            box_half_width: None,
            points_per_axis: None,
            dt: default_dt(),
            horizon: None,
            snapshot_count: None,
            radius_ladder: None,
            delta_ladder: None,
            epsilon_spacings: default_epsilon_spacings(),
        }
    }
}

/// Family block: either an explicit Gaussian sweep with parallel parameter
/// lists, or a single packet.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case", tag = "kind")]
pub enum FamilyConfig {
    GaussianSweep {
        widths: Vec<f64>,
        momenta: Vec<[f64; 3]>,
        offsets: Vec<[f64; 3]>,
        /// When present, every member is rescaled to at most this mass.
        #[serde(default)]
        mass_budget: Option<f64>,
    },
    Single {
        width: f64,
        #[serde(default)]
        momentum: [f64; 3],
        #[serde(default)]
        offset: [f64; 3],
        #[serde(default)]
        mass: Option<f64>,
    },
}

/// One full run configuration document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioName,
    #[serde(default)]
    pub equation: Option<EquationConfig>,
    #[serde(default)]
    pub numerics: NumericsConfig,
    #[serde(default)]
    pub family: Option<FamilyConfig>,
    #[serde(default)]
    pub output_dir: Option<std::path::PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

/// Parse and validate a JSON configuration document.
pub fn parse_config(document: &str) -> Result<RunConfig> {
    let config: RunConfig =
        serde_json::from_str(document).map_err(|e| Error::Config(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

impl RunConfig {
    pub fn minimal(scenario: ScenarioName) -> RunConfig {
        RunConfig {
            scenario,
            equation: None,
            numerics: NumericsConfig::default(),
            family: None,
            output_dir: None,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = &self.numerics;
        if let Some(points) = n.points_per_axis {
            if points % 2 != 0 {
                return Err(Error::Config(format!(
                    "numerics.points_per_axis must be even, got {points}"
                )));
            }
            if points < 8 {
                return Err(Error::Config(format!(
                    "numerics.points_per_axis must be >= 8, got {points}"
                )));
            }
        }
        if let Some(l) = n.box_half_width {
            if !(l > 0.0) {
                return Err(Error::Config(format!(
                    "numerics.box_half_width must be positive, got {l}"
                )));
            }
        }
        if !(n.dt > 0.0) {
            return Err(Error::Config(format!("numerics.dt must be positive, got {}", n.dt)));
        }
        if let Some(t) = n.horizon {
            if !(t > 0.0) {
                return Err(Error::Config(format!(
                    "numerics.horizon must be positive, got {t}"
                )));
            }
        }
        if let Some(c) = n.snapshot_count {
            if c < 2 {
                return Err(Error::Config(format!(
                    "numerics.snapshot_count must be >= 2, got {c}"
                )));
            }
        }
        if !(n.epsilon_spacings >= 1.0) {
            return Err(Error::Config(format!(
                "numerics.epsilon_spacings must be >= 1, got {}",
                n.epsilon_spacings
            )));
        }
        if let Some(ladder) = &n.radius_ladder {
            if ladder.is_empty() || !ladder.windows(2).all(|w| w[0] < w[1]) || ladder[0] <= 0.0 {
                return Err(Error::Config(
                    "numerics.radius_ladder must be positive and increasing".into(),
                ));
            }
        }
        if let Some(ladder) = &n.delta_ladder {
            if ladder.is_empty()
                || !ladder.windows(2).all(|w| w[0] > w[1])
                || *ladder.last().unwrap() <= 0.0
                || ladder[0] > 1.0
            {
                return Err(Error::Config(
                    "numerics.delta_ladder must be decreasing within (0, 1]".into(),
                ));
            }
        }
        if let Some(eq) = &self.equation {
            if eq.coupling < 0.0 {
                return Err(Error::Config(format!(
                    "equation.coupling must be >= 0, got {}",
                    eq.coupling
                )));
            }
            let has_nl = eq.nonlinearity != Nonlinearity::None;
            if has_nl != (eq.coupling > 0.0) {
                return Err(Error::Config(
                    "equation.coupling must be positive iff a nonlinearity is selected".into(),
                ));
            }
            if let Some(PotentialConfig::Constant { c }) = eq.potential {
                if c < 0.0 {
                    return Err(Error::Config(format!(
                        "equation.potential.c must be >= 0, got {c}"
                    )));
                }
            }
            if let Some(PotentialConfig::Axial { a, b }) = eq.potential {
                if a < 0.0 || b < 0.0 {
                    return Err(Error::Config(format!(
                        "equation.potential axial weights must be >= 0, got a = {a}, b = {b}"
                    )));
                }
            }
        }
        if let Some(family) = &self.family {
            match family {
                FamilyConfig::GaussianSweep {
                    widths,
                    momenta,
                    offsets,
                    mass_budget,
                } => {
                    if widths.is_empty()
                        || widths.len() != momenta.len()
                        || widths.len() != offsets.len()
                    {
                        return Err(Error::Config(
                            "family.widths/momenta/offsets must be equal-length and non-empty"
                                .into(),
                        ));
                    }
                    if widths.iter().any(|w| !(w > &0.0)) {
                        return Err(Error::Config("family.widths must be positive".into()));
                    }
                    if let Some(m) = mass_budget {
                        if !(m > &0.0) {
                            return Err(Error::Config(
                                "family.mass_budget must be positive when present".into(),
                            ));
                        }
                    }
                }
                FamilyConfig::Single { width, mass, .. } => {
                    if !(width > &0.0) {
                        return Err(Error::Config("family.width must be positive".into()));
                    }
                    if let Some(m) = mass {
                        if !(m > &0.0) {
                            return Err(Error::Config("family.mass must be positive".into()));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}
