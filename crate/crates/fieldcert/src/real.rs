//! Breakdown criteria for real conductivity with a single boundary condition:
//! the pointwise surface check, per-phase average-field and power-budget
//! bounds, and the perturbation-based per-phase energy bound.

use crate::boundary::{BoundaryDataset, MomentSet};
use crate::error::{Error, Result};
use crate::math::Vec2;
use crate::verdict::{CriterionId, CriterionVerdict, Witness};
use serde::{Deserialize, Serialize};

/// Per-phase conductivities, breakdown thresholds, and volume fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConductivityPair {
    pub sigma: [f64; 2],
    /// Breakdown field thresholds c per phase.
    pub c: [f64; 2],
    pub f: [f64; 2],
}

impl ConductivityPair {
    pub fn new(sigma: [f64; 2], c: [f64; 2], f: [f64; 2]) -> Result<Self> {
        if sigma.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::InvalidInput(
                "conductivities must be positive".into(),
            ));
        }
        if c.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::InvalidInput(
                "breakdown thresholds must be positive".into(),
            ));
        }
        if f.iter().any(|&v| !(v > 0.0 && v < 1.0)) || (f[0] + f[1] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(
                "volume fractions must lie in (0,1) and sum to 1".into(),
            ));
        }
        Ok(ConductivityPair { sigma, c, f })
    }

    /// Swap the phase labels.
    pub fn relabeled(&self) -> Self {
        ConductivityPair {
            sigma: [self.sigma[1], self.sigma[0]],
            c: [self.c[1], self.c[0]],
            f: [self.f[1], self.f[0]],
        }
    }

    /// Same pair with all thresholds scaled by `s`.
    pub fn with_threshold_scale(&self, s: f64) -> Self {
        ConductivityPair {
            sigma: self.sigma,
            c: [self.c[0] * s, self.c[1] * s],
            f: self.f,
        }
    }
}

/// Which phase must break down first at an interior interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FirstBreakdown {
    Phase1First,
    Phase2First,
    Indeterminate,
}

/// Classify which phase breaks down first (away from the body surface,
/// assuming breakdown does not occur there first). Equality cases are
/// reported as indeterminate.
pub fn first_breakdown_phase(pair: &ConductivityPair) -> FirstBreakdown {
    let ratio = (pair.sigma[0] / pair.sigma[1]).powi(2);
    let c1sq = pair.c[0] * pair.c[0];
    let c2sq = pair.c[1] * pair.c[1];
    if c2sq > c1sq * ratio.max(1.0) {
        FirstBreakdown::Phase1First
    } else if c2sq < c1sq * ratio.min(1.0) {
        FirstBreakdown::Phase2First
    } else {
        FirstBreakdown::Indeterminate
    }
}

/// Field magnitude at a surface point from the normal flux and the
/// tangential derivatives of the potential. Takes one tangential component
/// in two dimensions and two in three; only the two-dimensional path is
/// exercised by the rest of the crate.
pub fn surface_field_magnitude(j_n: f64, sigma_local: f64, tangential: &[f64]) -> f64 {
    let en = j_n / sigma_local;
    let et_sq: f64 = tangential.iter().map(|t| t * t).sum();
    (en * en + et_sq).sqrt()
}

/// Pointwise surface check: at each sample the full field magnitude is
/// reconstructed from the normal flux and the tangential derivative of the
/// potential, and compared against the threshold of the local surface phase.
pub fn criterion1_surface_check(
    data: &BoundaryDataset,
    phase_at_boundary: &[u8],
    pair: &ConductivityPair,
) -> Result<Vec<CriterionVerdict>> {
    data.validate()?;
    if phase_at_boundary.len() != data.samples.len()
        || phase_at_boundary.iter().any(|&p| p != 1 && p != 2)
    {
        return Err(Error::UnknownBoundaryPhase);
    }
    let dvds = data.tangential_derivative_grouped(Some(phase_at_boundary))?;
    let mut out = Vec::with_capacity(data.samples.len());
    for (i, s) in data.samples.iter().enumerate() {
        let alpha = (phase_at_boundary[i] - 1) as usize;
        let mag = surface_field_magnitude(s.j_n, pair.sigma[alpha], &[dvds[i]]);
        let margin = pair.c[alpha] - mag;
        out.push(
            CriterionVerdict::from_margin(CriterionId::SurfaceField, margin).with_witness(
                Witness::BoundarySample {
                    index: i,
                    position: s.position,
                },
            ),
        );
    }
    Ok(out)
}

/// Per-phase average fields from the bulk averages:
/// `<E>_1 = (<J> - s2 <E>) / (f1 (s1 - s2))` and its phase-2 mirror.
pub fn phase_averages(m: &MomentSet, pair: &ConductivityPair) -> Result<(Vec2, Vec2)> {
    let d = pair.sigma[0] - pair.sigma[1];
    if d.abs() <= 1e-14 * pair.sigma[0].abs().max(pair.sigma[1].abs()) {
        return Err(Error::EqualConductivities);
    }
    let e1 = (m.avg_j - m.avg_e.scale(pair.sigma[1])) / (pair.f[0] * d);
    let e2 = (m.avg_j - m.avg_e.scale(pair.sigma[0])) / (pair.f[1] * (-d));
    Ok((e1, e2))
}

/// Average-field bound per phase: `|<E>_alpha| <= c_alpha`.
pub fn criterion2_check(m: &MomentSet, pair: &ConductivityPair) -> Result<[CriterionVerdict; 2]> {
    let (e1, e2) = phase_averages(m, pair)?;
    Ok([
        CriterionVerdict::from_margin(CriterionId::PhaseAverageField, pair.c[0] - e1.norm())
            .with_witness(Witness::Phase(1)),
        CriterionVerdict::from_margin(CriterionId::PhaseAverageField, pair.c[1] - e2.norm())
            .with_witness(Witness::Phase(2)),
    ])
}

/// Power budget: `<J.E> <= s1 c1^2 f1 + s2 c2^2 f2`.
pub fn criterion3_check(m: &MomentSet, pair: &ConductivityPair) -> CriterionVerdict {
    let budget = pair.sigma[0] * pair.c[0] * pair.c[0] * pair.f[0]
        + pair.sigma[1] * pair.c[1] * pair.c[1] * pair.f[1];
    CriterionVerdict::from_margin(CriterionId::DissipationBudget, budget - m.avg_power)
}

/// Per-phase field energies recovered from a conductivity perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseEnergies {
    /// Integrals of |E|^2 over each phase region (not averaged).
    pub integral_e_sq: [f64; 2],
}

/// Solve the two-power system for the per-phase energies and check the
/// bound `int_{Omega_alpha} |E|^2 <= |Omega| f_alpha c_alpha^2`.
///
/// `power_base` and `power_pert` are the averaged powers `<J.E>` of the base
/// and perturbed measurements under identical Dirichlet data; `area` is
/// `|Omega|`; `dsigma` is the conductivity perturbation per phase.
pub fn criterion4_perturbation(
    power_base: f64,
    power_pert: f64,
    area: f64,
    dsigma: [f64; 2],
    pair: &ConductivityPair,
) -> Result<(PhaseEnergies, [CriterionVerdict; 2])> {
    if !(area > 0.0) {
        return Err(Error::NonpositiveArea(area));
    }
    let det = pair.sigma[0] * dsigma[1] - pair.sigma[1] * dsigma[0];
    let scale = pair.sigma[0].abs().max(pair.sigma[1].abs()) * dsigma[0].abs().max(dsigma[1].abs());
    if det.abs() <= 1e-12 * scale.max(1e-300) {
        return Err(Error::SingularPerturbation);
    }
    // sigma1 a1 + sigma2 a2 = <J.E>;  dsigma1 a1 + dsigma2 a2 = d<J.E>,
    // where a_alpha = <chi_alpha |E|^2>.
    let dpower = power_pert - power_base;
    let a1 = (power_base * dsigma[1] - pair.sigma[1] * dpower) / det;
    let a2 = (pair.sigma[0] * dpower - dsigma[0] * power_base) / det;
    let energies = PhaseEnergies {
        integral_e_sq: [a1 * area, a2 * area],
    };
    let verdicts = [
        CriterionVerdict::from_margin(
            CriterionId::PerturbedEnergy,
            area * pair.f[0] * pair.c[0] * pair.c[0] - energies.integral_e_sq[0],
        )
        .with_witness(Witness::Phase(1)),
        CriterionVerdict::from_margin(
            CriterionId::PerturbedEnergy,
            area * pair.f[1] * pair.c[1] * pair.c[1] - energies.integral_e_sq[1],
        )
        .with_witness(Witness::Phase(2)),
    ];
    Ok((energies, verdicts))
}
