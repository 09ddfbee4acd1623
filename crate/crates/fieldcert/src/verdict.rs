//! Certificate verdicts shared by the criteria modules.

use crate::math::Vec2;
use serde::{Deserialize, Serialize};

/// Which check produced a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriterionId {
    /// Pointwise field magnitude at the body surface (C1).
    SurfaceField,
    /// Per-phase average field bound (C2).
    PhaseAverageField,
    /// Dissipated power budget (C3).
    DissipationBudget,
    /// Per-phase field energy recovered from conductivity perturbations (C4).
    PerturbedEnergy,
    /// Two-boundary-condition splitting feasibility in three free variables.
    SplitFeasibility3d,
    /// Two-boundary-condition feasibility tightened by null Lagrangians.
    SplitFeasibility2d,
    /// Complex-conductivity ellipse feasibility.
    EllipseFeasibility,
    /// Complex-conductivity ellipse feasibility tightened by null Lagrangians.
    EllipseFeasibilityTightened,
    /// Two-dimensional Von Mises / Tresca yield compatibility.
    ElasticYield,
}

/// Location or phase blamed by a violated criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Witness {
    Phase(u8),
    BoundarySample { index: usize, position: Vec2 },
    Inequality(String),
}

/// Outcome of one criterion check. `violated` iff `margin < 0`; a nonnegative
/// margin is the slack left before the criterion would fire.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionVerdict {
    pub criterion: CriterionId,
    pub violated: bool,
    pub margin: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl CriterionVerdict {
    pub fn from_margin(criterion: CriterionId, margin: f64) -> Self {
        CriterionVerdict {
            criterion,
            violated: margin < 0.0,
            margin,
            witness: None,
        }
    }

    pub fn with_witness(mut self, witness: Witness) -> Self {
        self.witness = Some(witness);
        self
    }
}
