//! Two-dimensional elasticity yield certificates: tensor basis decomposition,
//! the Von Mises / Tresca invariant, energy splitting, the feasible region in
//! the phase-1 energy plane, and the viscoelastic perturbation solve.

use crate::boundary::ElasticMoments;
use crate::error::{Error, Result};
use crate::geometry::{Constraint2, Emptiness2, Region2};
use crate::math::{cond_inf, solve_dense, Mat2, Vec2};
use crate::verdict::{CriterionId, CriterionVerdict, Witness};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Per-phase bulk and shear moduli, fractions, and yield thresholds in the
/// strain form (`eps_2^2 + eps_3^2 <= k`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElasticPair {
    pub kappa: [f64; 2],
    pub mu: [f64; 2],
    /// Lame parameters; optional, `kappa = lambda + mu` in two dimensions.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<[f64; 2]>,
    pub f: [f64; 2],
    pub k: [f64; 2],
}

impl ElasticPair {
    pub fn new(
        kappa: [f64; 2],
        mu: [f64; 2],
        lambda: Option<[f64; 2]>,
        f: [f64; 2],
        k: [f64; 2],
    ) -> Result<Self> {
        if kappa.iter().chain(&mu).any(|&m| !(m > 0.0)) {
            return Err(Error::InvalidInput("moduli must be positive".into()));
        }
        if f.iter().any(|&v| !(v > 0.0 && v < 1.0)) || (f[0] + f[1] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(
                "volume fractions must lie in (0,1) and sum to 1".into(),
            ));
        }
        if k.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::InvalidInput(
                "yield thresholds must be positive".into(),
            ));
        }
        if let Some(l) = lambda {
            for alpha in 0..2 {
                if (kappa[alpha] - l[alpha] - mu[alpha]).abs() > 1e-9 * kappa[alpha] {
                    return Err(Error::InvalidInput(
                        "kappa must equal lambda + mu for each phase in two dimensions".into(),
                    ));
                }
            }
        }
        Ok(ElasticPair {
            kappa,
            mu,
            lambda,
            f,
            k,
        })
    }

    pub fn relabeled(&self) -> Self {
        ElasticPair {
            kappa: [self.kappa[1], self.kappa[0]],
            mu: [self.mu[1], self.mu[0]],
            lambda: self.lambda.map(|l| [l[1], l[0]]),
            f: [self.f[1], self.f[0]],
            k: [self.k[1], self.k[0]],
        }
    }

    pub fn with_threshold_scale(&self, s: f64) -> Self {
        ElasticPair {
            k: [self.k[0] * s, self.k[1] * s],
            ..*self
        }
    }
}

/// Coefficients in the orthonormal 2x2 tensor basis: the antisymmetric
/// element, the identity, and the two deviatoric elements (all over sqrt 2).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TensorComponents {
    /// Antisymmetric (rotation) coefficient; zero for stresses.
    pub f0: f64,
    /// Trace coefficient.
    pub e1: f64,
    /// Diagonal deviatoric coefficient.
    pub e2: f64,
    /// Off-diagonal deviatoric coefficient.
    pub e3: f64,
}

const RT2: f64 = std::f64::consts::SQRT_2;

/// Frobenius projections onto the orthonormal basis.
pub fn basis_decompose(m: Mat2) -> TensorComponents {
    TensorComponents {
        f0: (m.a12 - m.a21) / RT2,
        e1: (m.a11 + m.a22) / RT2,
        e2: (m.a11 - m.a22) / RT2,
        e3: (m.a12 + m.a21) / RT2,
    }
}

/// Inverse of `basis_decompose`.
pub fn basis_compose(t: TensorComponents) -> Mat2 {
    Mat2::new(
        (t.e1 + t.e2) / RT2,
        (t.e3 + t.f0) / RT2,
        (t.e3 - t.f0) / RT2,
        (t.e1 - t.e2) / RT2,
    )
}

/// The rotation-invariant Von Mises / Tresca combination
/// `tau_2^2 + tau_3^2 = (s_1 - s_2)^2 / 2` of a symmetric stress.
pub fn von_mises_tresca(stress: TensorComponents) -> f64 {
    stress.e2 * stress.e2 + stress.e3 * stress.e3
}

/// Provenance of an energy quadruple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitProvenance {
    FreeVariable,
    PerturbationSolved,
    Oracle,
}

/// Bulk/shear energy densities per phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergySplit {
    pub e1b: f64,
    pub e1s: f64,
    pub e2b: f64,
    pub e2s: f64,
    pub provenance: SplitProvenance,
}

impl EnergySplit {
    pub fn total(&self) -> f64 {
        self.e1b + self.e1s + self.e2b + self.e2s
    }

    /// The determinant moment implied by the split.
    pub fn det_moment(&self, pair: &ElasticPair) -> f64 {
        pair.kappa[0] * self.e1b + pair.kappa[1] * self.e2b
            - pair.mu[0] * self.e1s
            - pair.mu[1] * self.e2s
    }
}

/// Closed-form completion: given the total energy `e`, the stress
/// determinant moment `a`, and the phase-1 energies, the phase-2 energies
/// follow exactly.
pub fn complete_split(e: f64, a: f64, e1b: f64, e1s: f64, pair: &ElasticPair) -> (f64, f64) {
    let (k1, k2) = (pair.kappa[0], pair.kappa[1]);
    let (m1, m2) = (pair.mu[0], pair.mu[1]);
    let den = k2 + m2;
    let e2b = (a + e * m2 - e1b * (k1 + m2) + e1s * (m1 - m2)) / den;
    let e2s = ((k1 - k2) * e1b - (m1 + k2) * e1s - a + e * k2) / den;
    (e2b, e2s)
}

/// Lower-bound anchors from the averaged stress and displacement gradient:
/// per-phase strain averages by the two-by-two unmixing, then the quadratic
/// anchors `A_(alpha)b`, `A_(alpha)s`.
pub fn lower_bound_anchors(
    avg_stress: Mat2,
    avg_gradu: Mat2,
    pair: &ElasticPair,
) -> Result<[f64; 4]> {
    let (k1, k2) = (pair.kappa[0], pair.kappa[1]);
    let (m1, m2) = (pair.mu[0], pair.mu[1]);
    if (k1 - k2).abs() <= 1e-12 * k1.max(k2) || (m1 - m2).abs() <= 1e-12 * m1.max(m2) {
        return Err(Error::EqualModuli);
    }
    let eps = basis_decompose(avg_gradu);
    let tau = basis_decompose(avg_stress);
    // <chi_1 eps_1> = (2 k2 <eps_1> - <tau_1>) / (2 (k2 - k1)), and the
    // subscript-swapped analogues; shear components use the shear moduli.
    let chi1_e1 = (2.0 * k2 * eps.e1 - tau.e1) / (2.0 * (k2 - k1));
    let chi2_e1 = (2.0 * k1 * eps.e1 - tau.e1) / (2.0 * (k1 - k2));
    let chi1_e2 = (2.0 * m2 * eps.e2 - tau.e2) / (2.0 * (m2 - m1));
    let chi2_e2 = (2.0 * m1 * eps.e2 - tau.e2) / (2.0 * (m1 - m2));
    let chi1_e3 = (2.0 * m2 * eps.e3 - tau.e3) / (2.0 * (m2 - m1));
    let chi2_e3 = (2.0 * m1 * eps.e3 - tau.e3) / (2.0 * (m1 - m2));
    Ok([
        2.0 * k1 * chi1_e1 * chi1_e1,
        2.0 * k2 * chi2_e1 * chi2_e1,
        2.0 * m1 * (chi1_e2 * chi1_e2 + chi1_e3 * chi1_e3),
        2.0 * m2 * (chi2_e2 * chi2_e2 + chi2_e3 * chi2_e3),
    ])
}

/// Boundary-derived measurements packaged for the certificates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElasticMeasurements {
    pub energy: f64,
    pub det_stress: f64,
    pub c_value: f64,
    pub avg_stress: Mat2,
    pub avg_gradu: Mat2,
}

impl From<&ElasticMoments> for ElasticMeasurements {
    fn from(m: &ElasticMoments) -> Self {
        ElasticMeasurements {
            energy: m.energy,
            det_stress: m.det_stress,
            c_value: m.c_value,
            avg_stress: m.avg_stress,
            avg_gradu: m.avg_gradu,
        }
    }
}

/// The feasible region in the `(E_1b, E_1s)` plane: the two anchor lower
/// bounds, the two phase-2 anchor bounds pulled through the completion, and
/// the determinant-moment inequality. All five are linear.
pub fn feasible_region_e1(
    meas: &ElasticMeasurements,
    anchors: [f64; 4],
    pair: &ElasticPair,
) -> Region2 {
    let (k1, k2) = (pair.kappa[0], pair.kappa[1]);
    let (m1, m2) = (pair.mu[0], pair.mu[1]);
    let (e, a, c) = (meas.energy, meas.det_stress, meas.c_value);
    let [a1b, a2b, a1s, a2s] = anchors;
    let den = k2 + m2;
    Region2::new(vec![
        Constraint2::linear(-1.0, 0.0, -a1b / pair.f[0], "phase-1 bulk anchor"),
        Constraint2::linear(0.0, -1.0, -a1s / pair.f[0], "phase-1 shear anchor"),
        Constraint2::linear(
            k1 + m2,
            -(m1 - m2),
            a + e * m2 - a2b * den / pair.f[1],
            "phase-2 bulk anchor (completed)",
        ),
        Constraint2::linear(
            -(k1 - k2),
            m1 + k2,
            e * k2 - a - a2s * den / pair.f[1],
            "phase-2 shear anchor (completed)",
        ),
        Constraint2::linear(
            -(m2 + k1) * (k1 - k2) / k1,
            (m1 + k2) * (m1 - m2) / m1,
            4.0 * k2 * m2 * c - e * (m2 - k2) - a,
            "rotation-reduced determinant bound",
        ),
    ])
}

/// Yield certificate report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElasticCertificate {
    pub verdict: CriterionVerdict,
    /// Margins `2 mu_a f_a k_a - min E_as` per phase when defined.
    pub phase_margins: [Option<f64>; 2],
    pub outcome: String,
}

/// Check both phases: yield is certified when the feasible region does not
/// meet `E_(alpha)s <= 2 mu_a f_a k_a` (the analysis cannot attribute the
/// yield to a particular phase).
pub fn yield_certificate(
    meas: &ElasticMeasurements,
    pair: &ElasticPair,
) -> Result<ElasticCertificate> {
    let anchors = lower_bound_anchors(meas.avg_stress, meas.avg_gradu, pair)?;
    let mut violated = false;
    let mut phase_margins = [None, None];
    let mut outcome = String::new();
    let mut worst: f64 = f64::INFINITY;
    for alpha in 0..2 {
        let (p, anch) = if alpha == 0 {
            (*pair, anchors)
        } else {
            (
                pair.relabeled(),
                [anchors[1], anchors[0], anchors[3], anchors[2]],
            )
        };
        let feas = feasible_region_e1(meas, anch, &p);
        let cut = 2.0 * p.mu[0] * p.f[0] * p.k[0];
        let compat = Region2::new(vec![Constraint2::linear(
            0.0,
            1.0,
            cut,
            "yield compatibility",
        )]);
        let joint = feas.intersect(&compat);
        match joint.is_empty() {
            Emptiness2::Empty { certificate } => {
                violated = true;
                // Distance of the shear-energy floor above the cut when the
                // feasible region alone is nonempty.
                let m = min_y_over_lines(&feas).map(|min_es| cut - min_es);
                phase_margins[alpha] = m;
                worst = worst.min(m.unwrap_or(-1.0));
                outcome = format!("phase-{} frame: {}", alpha + 1, certificate);
            }
            Emptiness2::Nonempty { .. } => {
                let m = min_y_over_lines(&feas).map(|min_es| cut - min_es);
                phase_margins[alpha] = m;
                if let Some(m) = m {
                    worst = worst.min(m);
                }
            }
            Emptiness2::Inconclusive { .. } => return Err(Error::NumericalInconclusive),
        }
    }
    let margin = if worst.is_finite() { worst } else { 0.0 };
    let mut verdict = CriterionVerdict::from_margin(CriterionId::ElasticYield, margin);
    verdict.violated = violated;
    if violated {
        verdict = verdict.with_witness(Witness::Inequality(outcome.clone()));
    }
    Ok(ElasticCertificate {
        verdict,
        phase_margins,
        outcome,
    })
}

/// Minimum of the second coordinate over a linear-constraint region, by
/// vertex enumeration; `None` when empty or unbounded below.
fn min_y_over_lines(region: &Region2) -> Option<f64> {
    let mut lines = vec![];
    for c in &region.constraints {
        if let crate::geometry::ConstraintForm2::Linear { a, b, c: rhs } = c.form {
            lines.push((a, b, rhs));
        }
    }
    let scale: f64 = lines
        .iter()
        .map(|(a, b, c)| a.abs().max(b.abs()).max(c.abs()))
        .fold(1.0, f64::max);
    let eps = 1e-9 * scale;
    let feasible = |p: Vec2| {
        lines
            .iter()
            .all(|(a, b, c)| a * p.x + b * p.y <= c + eps * (1.0 + p.norm()))
    };
    let mut best: Option<f64> = None;
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let (a1, b1, c1) = lines[i];
            let (a2, b2, c2) = lines[j];
            let det = a1 * b2 - a2 * b1;
            if det.abs() <= 1e-12 * scale * scale {
                continue;
            }
            let p = Vec2::new((c1 * b2 - c2 * b1) / det, (a1 * c2 - a2 * c1) / det);
            if feasible(p) {
                best = Some(best.map_or(p.y, |b: f64| b.min(p.y)));
            }
        }
    }
    best
}

/// Solve the four-equation system (total energy, determinant moment, and the
/// real/imaginary perturbed-energy relations) for the energy quadruple.
pub fn viscoelastic_solve(
    e: f64,
    a: f64,
    delta_e: Complex64,
    dkappa: [Complex64; 2],
    dmu: [Complex64; 2],
    pair: &ElasticPair,
) -> Result<EnergySplit> {
    let rows = vec![
        vec![1.0, 1.0, 1.0, 1.0],
        vec![pair.kappa[0], -pair.mu[0], pair.kappa[1], -pair.mu[1]],
        vec![
            2.0 * (dkappa[0] / pair.kappa[0]).re,
            2.0 * (dmu[0] / pair.mu[0]).re,
            2.0 * (dkappa[1] / pair.kappa[1]).re,
            2.0 * (dmu[1] / pair.mu[1]).re,
        ],
        vec![
            2.0 * (dkappa[0] / pair.kappa[0]).im,
            2.0 * (dmu[0] / pair.mu[0]).im,
            2.0 * (dkappa[1] / pair.kappa[1]).im,
            2.0 * (dmu[1] / pair.mu[1]).im,
        ],
    ];
    // Rows are ordered for the unknowns (E1b, E1s, E2b, E2s); note the
    // determinant row carries -mu on the shear slots.
    let rhs = vec![e, a, delta_e.re, delta_e.im];
    let cond = cond_inf(&rows);
    if !cond.is_finite() || cond > 1e12 {
        return Err(Error::DegeneratePerturbation(cond));
    }
    let sol = solve_dense(rows, rhs).ok_or(Error::DegeneratePerturbation(f64::INFINITY))?;
    Ok(EnergySplit {
        e1b: sol[0],
        e1s: sol[1],
        e2b: sol[2],
        e2s: sol[3],
        provenance: SplitProvenance::PerturbationSolved,
    })
}

/// Point check of a solved quadruple against both yield-compatible cuts.
pub fn split_point_verdicts(split: &EnergySplit, pair: &ElasticPair) -> [CriterionVerdict; 2] {
    let cut1 = 2.0 * pair.mu[0] * pair.f[0] * pair.k[0];
    let cut2 = 2.0 * pair.mu[1] * pair.f[1] * pair.k[1];
    [
        CriterionVerdict::from_margin(CriterionId::ElasticYield, cut1 - split.e1s)
            .with_witness(Witness::Phase(1)),
        CriterionVerdict::from_margin(CriterionId::ElasticYield, cut2 - split.e2s)
            .with_witness(Witness::Phase(2)),
    ]
}

pub mod states {
    //! Piecewise-uniform elastostatic states with exact boundary datasets and
    //! interior moments; the verification oracle for this module.

    use super::*;
    use crate::boundary::synthetic::RingGeometry;
    use crate::boundary::BoundaryDataset;

    /// Exact interior description of a constructed state.
    #[derive(Debug, Clone)]
    pub struct ExactInterior {
        /// Per-phase strain matrices (symmetric).
        pub strain: [Mat2; 2],
        /// Per-phase displacement gradients (rows are d/dx_i).
        pub gradu: [Mat2; 2],
        /// Per-phase stresses.
        pub stress: [Mat2; 2],
        pub energies: EnergySplit,
        pub energy_total: f64,
        pub det_stress: f64,
        pub det_gradu: f64,
        pub c_value: f64,
        pub avg_stress: Mat2,
        pub avg_gradu: Mat2,
        /// Max Von Mises strain invariant `eps_2^2 + eps_3^2` per phase.
        pub vm_strain: [f64; 2],
    }

    /// A two-layer elastic laminate on the unit square (interface normal to
    /// x at `x = f1`), parametrized by the continuous interface data: normal
    /// stress `txx`, tangential strain `eyy`, shear traction `txy`, and the
    /// continuous tangential displacement slope `g = du1/dy`.
    pub struct LaminateElasticState {
        pub pair: ElasticPair,
        pub dataset: BoundaryDataset,
        pub exact: ExactInterior,
    }

    pub fn laminate(
        pair: &ElasticPair,
        txx: f64,
        eyy: f64,
        txy: f64,
        g: f64,
        n: usize,
    ) -> LaminateElasticState {
        let f1 = pair.f[0];
        let mut strain = [Mat2::zero(); 2];
        let mut gradu = [Mat2::zero(); 2];
        let mut stress = [Mat2::zero(); 2];
        let mut exx = [0.0; 2];
        let mut s_slope = [0.0; 2];
        for alpha in 0..2 {
            let (k, m) = (pair.kappa[alpha], pair.mu[alpha]);
            exx[alpha] = (txx - (k - m) * eyy) / (k + m);
            let tyy = (k - m) * exx[alpha] + (k + m) * eyy;
            let exy = txy / (2.0 * m);
            // du2/dx jumps; du1/dy = g is continuous.
            s_slope[alpha] = 2.0 * exy - g;
            strain[alpha] = Mat2::sym(exx[alpha], exy, eyy);
            gradu[alpha] = Mat2::new(exx[alpha], s_slope[alpha], g, eyy);
            stress[alpha] = Mat2::sym(txx, txy, tyy);
        }

        // Exact moments.
        let f = pair.f;
        let wavg = |q: [f64; 2]| f[0] * q[0] + f[1] * q[1];
        let avg_stress = stress[0].scale(f[0]).add_mat(stress[1].scale(f[1]));
        let avg_gradu = gradu[0].scale(f[0]).add_mat(gradu[1].scale(f[1]));
        let mut e_parts = [0.0; 4];
        let mut vm_strain = [0.0; 2];
        for alpha in 0..2 {
            let ec = basis_decompose(strain[alpha]);
            e_parts[2 * alpha] = 2.0 * pair.kappa[alpha] * f[alpha] * ec.e1 * ec.e1;
            e_parts[2 * alpha + 1] =
                2.0 * pair.mu[alpha] * f[alpha] * (ec.e2 * ec.e2 + ec.e3 * ec.e3);
            vm_strain[alpha] = ec.e2 * ec.e2 + ec.e3 * ec.e3;
        }
        let energies = EnergySplit {
            e1b: e_parts[0],
            e1s: e_parts[1],
            e2b: e_parts[2],
            e2s: e_parts[3],
            provenance: SplitProvenance::Oracle,
        };
        let det_stress = wavg([stress[0].det(), stress[1].det()]);
        let det_gradu = wavg([gradu[0].det(), gradu[1].det()]);
        let f0 = [
            (gradu[0].a12 - gradu[0].a21) / RT2,
            (gradu[1].a12 - gradu[1].a21) / RT2,
        ];
        let f0_avg = wavg(f0);
        let c_value = det_gradu - 0.5 * f0_avg * f0_avg;

        // Exact displacement field: u1 = X(x) + g y, u2 = S(x) + eyy y with
        // X' = exx and S' = du2/dx per layer.
        let x_of = move |x: f64| -> f64 {
            if x <= f1 {
                exx[0] * x
            } else {
                exx[0] * f1 + exx[1] * (x - f1)
            }
        };
        let s_of = move |x: f64| -> f64 {
            if x <= f1 {
                s_slope[0] * x
            } else {
                s_slope[0] * f1 + s_slope[1] * (x - f1)
            }
        };
        let u = move |p: Vec2| Vec2::new(x_of(p.x) + g * p.y, s_of(p.x) + eyy * p.y);
        let traction = {
            let stress = stress;
            move |p: Vec2, nrm: Vec2, side: Vec2| -> Vec2 {
                let on_break = (p.x - f1).abs() <= 1e-12;
                let alpha = if p.x < f1 - 1e-12 || (on_break && side.x < 0.0) {
                    0
                } else {
                    1
                };
                stress[alpha].mul_vec(nrm)
            }
        };
        let geom = RingGeometry::square(0.0, 0.0, 1.0, n, &[f1], &[]);
        let dataset = geom.elastic_dataset("elastic-laminate", u, traction);

        LaminateElasticState {
            pair: *pair,
            dataset,
            exact: ExactInterior {
                strain,
                gradu,
                stress,
                energies,
                energy_total: energies.total(),
                det_stress,
                det_gradu,
                c_value,
                avg_stress,
                avg_gradu,
                vm_strain,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::elastic_moments;

    fn pair() -> ElasticPair {
        ElasticPair::new([2.0, 1.0], [1.5, 0.8], None, [0.4, 0.6], [1.0, 1.0]).unwrap()
    }

    #[test]
    fn basis_examples() {
        let id = basis_decompose(Mat2::identity());
        assert!((id.e1 - RT2).abs() < 1e-15);
        assert!(id.f0 == 0.0 && id.e2 == 0.0 && id.e3 == 0.0);
        let z = basis_decompose(Mat2::zero());
        assert_eq!(z, TensorComponents::default());
        // diag(3, 1): tau2^2 + tau3^2 = (3-1)^2/2 = 2.
        let d = basis_decompose(Mat2::diag(3.0, 1.0));
        assert!((von_mises_tresca(d) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn basis_round_trip() {
        let m = Mat2::new(0.3, -1.2, 0.7, 2.1);
        let back = basis_compose(basis_decompose(m));
        assert!((m.a11 - back.a11).abs() < 1e-14);
        assert!((m.a12 - back.a12).abs() < 1e-14);
        assert!((m.a21 - back.a21).abs() < 1e-14);
        assert!((m.a22 - back.a22).abs() < 1e-14);
    }

    #[test]
    fn von_mises_rotation_invariance() {
        let base = Mat2::diag(3.0, 1.0);
        let want = 2.0;
        for k in 0..64 {
            let th = 2.0 * std::f64::consts::PI * k as f64 / 64.0;
            let r = Mat2::rotation(th);
            let rot = r.mul_mat(base).mul_mat(r.transpose());
            let v = von_mises_tresca(basis_decompose(rot));
            assert!((v - want).abs() < 1e-12, "theta = {}", th);
        }
    }

    #[test]
    fn complete_split_identities() {
        let p = pair();
        let (e, a) = (3.7, -0.9);
        let (e1b, e1s) = (0.8, 0.5);
        let (e2b, e2s) = complete_split(e, a, e1b, e1s, &p);
        let split = EnergySplit {
            e1b,
            e1s,
            e2b,
            e2s,
            provenance: SplitProvenance::FreeVariable,
        };
        assert!((split.total() - e).abs() < 1e-12);
        assert!((split.det_moment(&p) - a).abs() < 1e-12);
    }

    #[test]
    fn complete_split_homogeneous_example() {
        let p = ElasticPair::new([2.0, 2.0], [1.0, 1.0], None, [0.5, 0.5], [1.0, 1.0]).unwrap();
        let (e, a) = (1.4, 0.6);
        let (e2b, e2s) = complete_split(e, a, 0.0, 0.0, &p);
        assert!((e2b - (a + e * 1.0) / 3.0).abs() < 1e-14);
        assert!((e2s - (e * 2.0 - a) / 3.0).abs() < 1e-14);
    }

    #[test]
    fn anchors_zero_for_zero_moments() {
        let a = lower_bound_anchors(Mat2::zero(), Mat2::zero(), &pair()).unwrap();
        assert_eq!(a, [0.0; 4]);
    }

    #[test]
    fn anchors_require_distinct_moduli() {
        let p = ElasticPair::new([1.0, 1.0], [0.5, 0.8], None, [0.5, 0.5], [1.0, 1.0]).unwrap();
        assert!(matches!(
            lower_bound_anchors(Mat2::identity(), Mat2::identity(), &p),
            Err(Error::EqualModuli)
        ));
    }

    #[test]
    fn laminate_state_boundary_reduction_is_exact() {
        let p = pair();
        let st = states::laminate(&p, 0.7, 0.3, 0.2, 0.1, 64);
        let m = elastic_moments(&st.dataset).unwrap();
        assert!(
            (m.energy - st.exact.energy_total).abs() < 1e-10,
            "E {} vs {}",
            m.energy,
            st.exact.energy_total
        );
        assert!(
            (m.det_stress - st.exact.det_stress).abs() < 1e-10,
            "a {} vs {}",
            m.det_stress,
            st.exact.det_stress
        );
        assert!((m.det_gradu - st.exact.det_gradu).abs() < 1e-10);
        assert!((m.avg_stress.a11 - st.exact.avg_stress.a11).abs() < 1e-10);
        assert!((m.avg_gradu.a12 - st.exact.avg_gradu.a12).abs() < 1e-10);
    }

    #[test]
    fn laminate_constant_rotation_makes_c_tight() {
        // txy = 0 and g = 0 give F0 = 0 everywhere: the boundary c equals the
        // domain value <eps1^2 - eps2^2 - eps3^2> / 2 exactly.
        let p = pair();
        let st = states::laminate(&p, 0.9, -0.2, 0.0, 0.0, 64);
        let m = elastic_moments(&st.dataset).unwrap();
        let domain: f64 = (0..2)
            .map(|alpha| {
                let c = basis_decompose(st.exact.strain[alpha]);
                p.f[alpha] * 0.5 * (c.e1 * c.e1 - c.e2 * c.e2 - c.e3 * c.e3)
            })
            .sum();
        assert!(
            (m.c_value - domain).abs() < 1e-9,
            "c {} vs {}",
            m.c_value,
            domain
        );

        // With a rotation jump (txy != 0 across distinct mu) the boundary c
        // exceeds the domain combination.
        let st = states::laminate(&p, 0.9, -0.2, 0.6, 0.0, 64);
        let m = elastic_moments(&st.dataset).unwrap();
        let domain: f64 = (0..2)
            .map(|alpha| {
                let c = basis_decompose(st.exact.strain[alpha]);
                p.f[alpha] * 0.5 * (c.e1 * c.e1 - c.e2 * c.e2 - c.e3 * c.e3)
            })
            .sum();
        assert!(m.c_value >= domain - 1e-12);
    }

    #[test]
    fn anchors_match_laminate_exact_values() {
        let p = pair();
        let st = states::laminate(&p, 0.7, 0.3, 0.2, 0.1, 64);
        let anchors = lower_bound_anchors(st.exact.avg_stress, st.exact.avg_gradu, &p).unwrap();
        // Piecewise-constant fields make the anchors tight: A/f = E exactly.
        let en = &st.exact.energies;
        assert!(
            (anchors[0] / p.f[0] - en.e1b).abs() < 1e-10,
            "A1b/f1 {} vs E1b {}",
            anchors[0] / p.f[0],
            en.e1b
        );
        assert!((anchors[1] / p.f[1] - en.e2b).abs() < 1e-10);
        assert!((anchors[2] / p.f[0] - en.e1s).abs() < 1e-10);
        assert!((anchors[3] / p.f[1] - en.e2s).abs() < 1e-10);
        // And the chi-weighted strain averages match 2 kappa <chi eps>^2.
        let chi1_e1 = p.f[0] * basis_decompose(st.exact.strain[0]).e1;
        assert!((anchors[0] - 2.0 * p.kappa[0] * chi1_e1 * chi1_e1).abs() < 1e-10);
        // Anchors never exceed the corresponding energies.
        assert!(anchors[0] / p.f[0] <= en.e1b + 1e-10);
        assert!(anchors[1] / p.f[1] <= en.e2b + 1e-10);
        assert!(anchors[2] / p.f[0] <= en.e1s + 1e-10);
        assert!(anchors[3] / p.f[1] <= en.e2s + 1e-10);
    }

    #[test]
    fn oracle_point_inside_feasible_region() {
        let p = pair();
        let st = states::laminate(&p, 0.7, 0.3, 0.2, 0.0, 64);
        let m = elastic_moments(&st.dataset).unwrap();
        let meas = ElasticMeasurements::from(&m);
        let anchors = lower_bound_anchors(meas.avg_stress, meas.avg_gradu, &p).unwrap();
        let feas = feasible_region_e1(&meas, anchors, &p);
        let pt = Vec2::new(st.exact.energies.e1b, st.exact.energies.e1s);
        let slacks = feas.slacks(pt);
        for (i, s) in slacks.iter().enumerate() {
            assert!(*s >= -1e-10, "constraint {} slack {}", i, s);
        }
    }

    #[test]
    fn feasible_region_contains_origin_corner_with_zero_anchors() {
        let p = pair();
        let meas = ElasticMeasurements {
            energy: 5.0,
            det_stress: 0.5,
            c_value: 3.0,
            avg_stress: Mat2::zero(),
            avg_gradu: Mat2::zero(),
        };
        let feas = feasible_region_e1(&meas, [0.0; 4], &p);
        for pt in [
            Vec2::new(0.01, 0.01),
            Vec2::new(0.2, 0.05),
            Vec2::new(0.05, 0.2),
        ] {
            assert!(feas.contains_tol(pt, 1e-10), "{:?} excluded", pt);
        }
    }

    #[test]
    fn feasible_region_conflict_empties() {
        let p = pair();
        let meas = ElasticMeasurements {
            energy: 1.0,
            det_stress: 100.0, // inconsistent with the energy: conflict
            c_value: 0.0,
            avg_stress: Mat2::zero(),
            avg_gradu: Mat2::zero(),
        };
        let feas = feasible_region_e1(&meas, [0.0; 4], &p);
        assert!(matches!(feas.is_empty(), Emptiness2::Empty { .. }));
    }

    #[test]
    fn yield_certificate_safe_and_violated() {
        let p = pair();
        let st = states::laminate(&p, 0.7, 0.3, 0.2, 0.0, 64);
        let m = elastic_moments(&st.dataset).unwrap();
        let meas = ElasticMeasurements::from(&m);
        // Generous thresholds: safe.
        let generous = ElasticPair {
            k: [10.0, 10.0],
            ..p
        };
        let cert = yield_certificate(&meas, &generous).unwrap();
        assert!(!cert.verdict.violated, "{:?}", cert);
        // Thresholds below the actual shear-energy floor: violated.
        let strict = ElasticPair {
            k: [1e-4, 1e-4],
            ..p
        };
        let cert = yield_certificate(&meas, &strict).unwrap();
        assert!(cert.verdict.violated);
    }

    #[test]
    fn viscoelastic_round_trip() {
        let p = pair();
        let truth = EnergySplit {
            e1b: 0.9,
            e1s: 0.4,
            e2b: 1.3,
            e2s: 0.2,
            provenance: SplitProvenance::Oracle,
        };
        let e = truth.total();
        let a = truth.det_moment(&p);
        let dk = [Complex64::new(0.01, 0.004), Complex64::new(-0.006, 0.011)];
        let dm = [Complex64::new(-0.003, 0.009), Complex64::new(0.012, -0.002)];
        let de = Complex64::new(
            2.0 * ((dk[0] / p.kappa[0]).re * truth.e1b
                + (dm[0] / p.mu[0]).re * truth.e1s
                + (dk[1] / p.kappa[1]).re * truth.e2b
                + (dm[1] / p.mu[1]).re * truth.e2s),
            2.0 * ((dk[0] / p.kappa[0]).im * truth.e1b
                + (dm[0] / p.mu[0]).im * truth.e1s
                + (dk[1] / p.kappa[1]).im * truth.e2b
                + (dm[1] / p.mu[1]).im * truth.e2s),
        );
        let got = viscoelastic_solve(e, a, de, dk, dm, &p).unwrap();
        assert!((got.e1b - truth.e1b).abs() < 1e-10);
        assert!((got.e1s - truth.e1s).abs() < 1e-10);
        assert!((got.e2b - truth.e2b).abs() < 1e-10);
        assert!((got.e2s - truth.e2s).abs() < 1e-10);
        assert!((got.total() - e).abs() < 1e-10);
    }

    #[test]
    fn viscoelastic_degenerate_rejected() {
        let p = pair();
        // Proportional complex perturbation collapses the last two rows.
        let z = Complex64::new(0.01, 0.02);
        let dk = [z * p.kappa[0], z * p.kappa[1]];
        let dm = [z * p.mu[0], z * p.mu[1]];
        assert!(matches!(
            viscoelastic_solve(1.0, 0.2, Complex64::new(0.1, 0.1), dk, dm, &p),
            Err(Error::DegeneratePerturbation(_))
        ));
    }

    #[test]
    fn split_point_verdict_flags_excess_shear() {
        let p = pair();
        let split = EnergySplit {
            e1b: 0.1,
            e1s: 10.0,
            e2b: 0.1,
            e2s: 0.0,
            provenance: SplitProvenance::PerturbationSolved,
        };
        let v = split_point_verdicts(&split, &p);
        assert!(v[0].violated);
        assert!(!v[1].violated);
    }
}
