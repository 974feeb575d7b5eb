//! Closed-form separability criteria.
//!
//! Every criterion returns a [`Verdict`] whose margin is normalized so that a
//! non-negative value means the criterion is satisfied and a negative value
//! certifies entanglement.

mod multimode;
mod werner_wolf;

pub use multimode::{
    biseparability_certificate, ghz_full_sep, multimode_symmetric_full_sep, three_mode_biseparable,
    BiseparabilityCertificate, SymmetricMultimodeParams, BISEP_LARGE_C_BOUND, BISEP_THRESHOLD,
};
pub use werner_wolf::{
    refined_ww_check, refined_ww_check_multi, refined_ww_search, werner_wolf_2x2, ww_pair_exists, RefinedCertificate,
    WernerWolf2x2Params, GRID_HI_EXP, GRID_LO_EXP, GRID_POINTS,
};

use serde::{Deserialize, Serialize};

use crate::symplectic::StandardForm;

/// Margins below `-ENTANGLED_TOL` are classified as entangled.
pub const ENTANGLED_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Entangled,
    CriterionSatisfied,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionId {
    Simon,
    SymmetricTwoMode,
    SqueezedThermal,
    WernerWolf2x2,
    MultimodeSymmetric,
    GhzFullSeparability,
    ThreeModeBiseparable,
    CauchySchwarz,
    WitnessRatio,
}

impl CriterionId {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Simon => "simon",
            Self::SymmetricTwoMode => "symmetric_two_mode",
            Self::SqueezedThermal => "squeezed_thermal",
            Self::WernerWolf2x2 => "werner_wolf_2x2",
            Self::MultimodeSymmetric => "multimode_symmetric",
            Self::GhzFullSeparability => "ghz_full_separability",
            Self::ThreeModeBiseparable => "three_mode_biseparable",
            Self::CauchySchwarz => "cauchy_schwarz",
            Self::WitnessRatio => "witness_ratio",
        }
    }
}

impl std::fmt::Display for CriterionId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub criterion: CriterionId,
    pub margin: f64,
    pub classification: Classification,
}

impl Verdict {
    pub fn new(criterion: CriterionId, margin: f64) -> Self {
        let classification =
            if margin < -ENTANGLED_TOL { Classification::Entangled } else { Classification::CriterionSatisfied };
        Self { criterion, margin, classification }
    }

    pub fn is_entangled(&self) -> bool {
        self.classification == Classification::Entangled
    }
}

/// `(ab - c1^2)(ab - c2^2) - 2|c1 c2| - a^2 - b^2 + 1`.
pub fn simon_criterion(sf: &StandardForm) -> Verdict {
    let StandardForm { a, b, c1, c2 } = *sf;
    let ab = a * b;
    let margin = (ab - c1 * c1) * (ab - c2 * c2) - 2.0 * (c1 * c2).abs() - a * a - b * b + 1.0;
    Verdict::new(CriterionId::Simon, margin)
}

/// Symmetric two-mode state with `A = B = a I`: `(a - c1)(a - c2) >= 1`.
pub fn symmetric_two_mode(a: f64, c1: f64, c2: f64) -> Verdict {
    Verdict::new(CriterionId::SymmetricTwoMode, (a - c1) * (a - c2) - 1.0)
}

/// Two-mode squeezed thermal state: `(a - 1)(b - 1) >= c^2`.
pub fn squeezed_thermal(a: f64, b: f64, c: f64) -> Verdict {
    Verdict::new(CriterionId::SqueezedThermal, (a - 1.0) * (b - 1.0) - c * c)
}

/// Upper bound from the Cauchy-Schwarz estimate of the product-state mean:
/// `(sqrt(ab) - c1)(sqrt(ab) - c2) >= 1`.
pub fn cauchy_schwarz_bound(sf: &StandardForm) -> Verdict {
    let g = (sf.a * sf.b).sqrt();
    Verdict::new(CriterionId::CauchySchwarz, (g - sf.c1) * (g - sf.c2) - 1.0)
}
