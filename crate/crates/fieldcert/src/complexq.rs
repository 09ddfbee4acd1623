//! Complex conductivity at a fixed frequency: field-ellipse invariants, the
//! four-unknown splitting solve, the compatible region, and the two-ellipse
//! feasibility certificate for the onset of nonlinearities.

use crate::boundary::{
    average_current, average_electric_field, cross_powers, null_lagrangians, BoundaryDataset,
};
use crate::error::{Error, Result};
use crate::geometry::{require_decision, Constraint2, Quadratic, Region2};
use crate::math::{solve_dense, Vec2};
use crate::verdict::{CriterionId, CriterionVerdict, Witness};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Per-phase complex conductivities, intensity thresholds, and fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexPair {
    pub sigma: [Complex64; 2],
    /// Intensity thresholds: nonlinearity onset at `|E_1|^2 + |E_2|^2 >= c^2`.
    pub c: [f64; 2],
    pub f: [f64; 2],
    /// Angular frequency; metadata for time-domain bookkeeping only.
    pub omega: f64,
}

impl ComplexPair {
    pub fn new(sigma: [Complex64; 2], c: [f64; 2], f: [f64; 2], omega: f64) -> Result<Self> {
        if c.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::InvalidInput("thresholds must be positive".into()));
        }
        if f.iter().any(|&v| !(v > 0.0 && v < 1.0)) || (f[0] + f[1] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(
                "volume fractions must lie in (0,1) and sum to 1".into(),
            ));
        }
        Ok(ComplexPair { sigma, c, f, omega })
    }

    /// `beta = Re(s1) Im(s2) - Im(s1) Re(s2)`; the splitting system is
    /// singular when it vanishes.
    pub fn beta(&self) -> f64 {
        self.sigma[0].re * self.sigma[1].im - self.sigma[0].im * self.sigma[1].re
    }

    pub fn check_beta(&self) -> Result<f64> {
        let b = self.beta();
        let scale = (self.sigma[0].norm() * self.sigma[1].norm()).max(1e-300);
        if b.abs() <= 1e-12 * scale {
            return Err(Error::SingularBeta);
        }
        Ok(b)
    }

    pub fn relabeled(&self) -> Self {
        ComplexPair {
            sigma: [self.sigma[1], self.sigma[0]],
            c: [self.c[1], self.c[0]],
            f: [self.f[1], self.f[0]],
            omega: self.omega,
        }
    }

    pub fn with_threshold_scale(&self, s: f64) -> Self {
        ComplexPair {
            sigma: self.sigma,
            c: [self.c[0] * s, self.c[1] * s],
            f: self.f,
            omega: self.omega,
        }
    }
}

/// The ellipse traced by the physical field at one point over a period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldEllipse {
    pub e1: Vec2,
    pub e2: Vec2,
    /// Rotation phase `omega * t0` that orthogonalizes the pair.
    pub phase: f64,
    /// Time origin; `phase / omega`.
    pub t0: f64,
    pub e1_rot: Vec2,
    pub e2_rot: Vec2,
    pub axis1: f64,
    pub axis2: f64,
    /// `|E_1|^2 + |E_2|^2`, invariant under the rotation.
    pub intensity: f64,
}

/// Ellipse axes from the real/imaginary field parts: the time origin solves
/// `tan(2 phase) = 2 E1.E2 / (|E1|^2 - |E2|^2)` with `2 phase` in
/// `(-pi/2, pi/2]`, the circular degenerate case mapping to zero.
pub fn ellipse_invariants(e1: Vec2, e2: Vec2, omega: f64) -> FieldEllipse {
    let dot = e1.dot(e2);
    let diff = e1.norm_sq() - e2.norm_sq();
    let scale = e1.norm_sq() + e2.norm_sq();
    let two_phase = if diff.abs() <= 1e-15 * scale.max(1e-300) {
        if dot.abs() <= 1e-15 * scale.max(1e-300) {
            0.0
        } else {
            std::f64::consts::FRAC_PI_2
        }
    } else {
        (2.0 * dot / diff).atan()
    };
    let phase = 0.5 * two_phase;
    let (s, c) = phase.sin_cos();
    let e1_rot = e1.scale(c) + e2.scale(s);
    let e2_rot = e2.scale(c) - e1.scale(s);
    FieldEllipse {
        e1,
        e2,
        phase,
        t0: if omega != 0.0 { phase / omega } else { 0.0 },
        e1_rot,
        e2_rot,
        axis1: e1_rot.norm(),
        axis2: e2_rot.norm(),
        intensity: scale,
    }
}

/// Time-averaged dissipated power density `Re(sigma) * I / 2`.
pub fn time_averaged_dissipation(ellipse: &FieldEllipse, sigma_re: f64) -> f64 {
    sigma_re * ellipse.intensity / 2.0
}

/// Coefficients of the splitting system expressed in the free variables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitCoefficients {
    pub beta: f64,
    pub gamma: f64,
    pub psi: [f64; 2],
    pub xi: [f64; 2],
    pub eta: [f64; 2],
}

impl SplitCoefficients {
    pub fn new(pair: &ComplexPair, cp: [[f64; 2]; 2]) -> Result<Self> {
        let beta = pair.check_beta()?;
        let (s1r, s1i) = (pair.sigma[0].re, pair.sigma[0].im);
        let (s2r, s2i) = (pair.sigma[1].re, pair.sigma[1].im);
        let (e1j1, e1j2, e2j1, e2j2) = (cp[0][0], cp[0][1], cp[1][0], cp[1][1]);
        Ok(SplitCoefficients {
            beta,
            gamma: (s1r * s2r + s1i * s2i) / beta,
            psi: [
                pair.sigma[1].norm_sqr() / beta,
                pair.sigma[0].norm_sqr() / beta,
            ],
            xi: [
                (s2i * e1j2 + s2r * e1j1) / beta,
                (s1i * e1j2 + s1r * e1j1) / beta,
            ],
            eta: [
                (s2r * (e2j1 - e1j2) + s2i * (e1j1 + e2j2)) / beta,
                (s1r * (e1j2 - e2j1) - s1i * (e1j1 + e2j2)) / beta,
            ],
        })
    }
}

/// Solve the four-unknown splitting system for
/// `(A_21^(1), A_21^(2), A_22^(1), A_22^(2))` given the free variables
/// `x = A_11^(1)` and `y = A_11^(2)`.
pub fn split_solve(cp: [[f64; 2]; 2], pair: &ComplexPair, x: f64, y: f64) -> Result<[f64; 4]> {
    pair.check_beta()?;
    let (s1r, s1i) = (pair.sigma[0].re, pair.sigma[0].im);
    let (s2r, s2i) = (pair.sigma[1].re, pair.sigma[1].im);
    let m = vec![
        vec![-s1i, -s2i, 0.0, 0.0],
        vec![s1r, s2r, 0.0, 0.0],
        vec![s1r, s2r, -s1i, -s2i],
        vec![s1i, s2i, s1r, s2r],
    ];
    let rhs = vec![
        cp[0][0] - s1r * x - s2r * y,
        cp[0][1] - s1i * x - s2i * y,
        cp[1][0],
        cp[1][1],
    ];
    let sol = solve_dense(m, rhs).ok_or(Error::SingularBeta)?;
    Ok([sol[0], sol[1], sol[2], sol[3]])
}

/// Reassemble the four cross powers from the full set of correlations; the
/// inverse of `split_solve` used for round-trip checks.
pub fn split_forward(pair: &ComplexPair, x: f64, y: f64, a: [f64; 4]) -> [[f64; 2]; 2] {
    let (s1r, s1i) = (pair.sigma[0].re, pair.sigma[0].im);
    let (s2r, s2i) = (pair.sigma[1].re, pair.sigma[1].im);
    let (a21_1, a21_2, a22_1, a22_2) = (a[0], a[1], a[2], a[3]);
    [
        [
            s1r * x + s2r * y - s1i * a21_1 - s2i * a21_2,
            s1i * x + s2i * y + s1r * a21_1 + s2r * a21_2,
        ],
        [
            s1r * a21_1 + s2r * a21_2 - s1i * a22_1 - s2i * a22_2,
            s1i * a21_1 + s2i * a21_2 + s1r * a22_1 + s2r * a22_2,
        ],
    ]
}

/// Per-phase chi-weighted complex field averages from the bulk averages.
/// Returns `[phase][component]` with component 0/1 the real/imaginary part.
pub fn phase_averages_complex(
    avg_e: [Vec2; 2],
    avg_j: [Vec2; 2],
    pair: &ComplexPair,
) -> Result<[[Vec2; 2]; 2]> {
    let d = pair.sigma[0] - pair.sigma[1];
    if d.norm() <= 1e-14 * pair.sigma[0].norm().max(pair.sigma[1].norm()) {
        return Err(Error::EqualConductivities);
    }
    let e = [
        Complex64::new(avg_e[0].x, avg_e[1].x),
        Complex64::new(avg_e[0].y, avg_e[1].y),
    ];
    let j = [
        Complex64::new(avg_j[0].x, avg_j[1].x),
        Complex64::new(avg_j[0].y, avg_j[1].y),
    ];
    // <chi_1 E> = (<J> - s2 <E>) / (s1 - s2) componentwise; these are the
    // chi-weighted averages (per-phase means times f_alpha).
    let mut out = [[Vec2::ZERO; 2]; 2];
    for spatial in 0..2 {
        let chi1 = (j[spatial] - pair.sigma[1] * e[spatial]) / d;
        let chi2 = (pair.sigma[0] * e[spatial] - j[spatial]) / d;
        let fill = |v: &mut Vec2, val: f64| {
            if spatial == 0 {
                v.x = val;
            } else {
                v.y = val;
            }
        };
        fill(&mut out[0][0], chi1.re);
        fill(&mut out[0][1], chi1.im);
        fill(&mut out[1][0], chi2.re);
        fill(&mut out[1][1], chi2.im);
    }
    Ok(out)
}

/// Everything the complex certificates consume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexInputs {
    /// `<E_k . J_l>` with k, l the real/imaginary field components.
    pub cp: [[f64; 2]; 2],
    /// `<chi_alpha E_m>`, indexed `[phase][component]`.
    pub avg_chi_e: [[Vec2; 2]; 2],
    /// Null Lagrangians of the component pair, when computed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub null_lagrangians: Option<(f64, f64)>,
}

impl ComplexInputs {
    /// Reduce the real/imaginary measurement datasets.
    pub fn from_datasets(
        d_re: &BoundaryDataset,
        d_im: &BoundaryDataset,
        pair: &ComplexPair,
    ) -> Result<Self> {
        let cp = cross_powers(d_re, d_im)?;
        let avg_e = [average_electric_field(d_re)?, average_electric_field(d_im)?];
        let avg_j = [average_current(d_re)?, average_current(d_im)?];
        let avg_chi_e = phase_averages_complex(avg_e, avg_j, pair)?;
        let nl = null_lagrangians(d_re, d_im)?;
        Ok(ComplexInputs {
            cp,
            avg_chi_e,
            null_lagrangians: Some(nl),
        })
    }

    pub fn relabeled(&self) -> Self {
        ComplexInputs {
            cp: self.cp,
            avg_chi_e: [self.avg_chi_e[1], self.avg_chi_e[0]],
            null_lagrangians: self.null_lagrangians,
        }
    }
}

/// The compatible region in the `(x, y)` plane of the free variables.
///
/// Substituting the splitting solution into the per-phase intensity bound
/// `A_11^(a) + A_22^(a) <= f_a c_a^2` eliminates the free variables entirely
/// (the per-phase intensity equals `eta^(a)`), so the threshold inequalities
/// are constant. The nonnegativity of the correlations adds the box
/// `0 <= x <= eta^(1)`, `0 <= y <= eta^(2)` as flagged tightenings.
pub fn compatible_region(
    pair: &ComplexPair,
    inputs: &ComplexInputs,
    tightenings: bool,
) -> Result<Region2> {
    let coeffs = SplitCoefficients::new(pair, inputs.cp)?;
    let mut r = Region2::new(vec![
        Constraint2::linear(
            0.0,
            0.0,
            pair.f[0] * pair.c[0] * pair.c[0] - coeffs.eta[0],
            "phase-1 intensity budget",
        ),
        Constraint2::linear(
            0.0,
            0.0,
            pair.f[1] * pair.c[1] * pair.c[1] - coeffs.eta[1],
            "phase-2 intensity budget",
        ),
    ]);
    if tightenings {
        r.push(Constraint2::linear(-1.0, 0.0, 0.0, "x nonnegative").as_tightening());
        r.push(Constraint2::linear(0.0, -1.0, 0.0, "y nonnegative").as_tightening());
        r.push(
            Constraint2::linear(
                1.0,
                0.0,
                coeffs.eta[0],
                "phase-1 second component nonnegative",
            )
            .as_tightening(),
        );
        r.push(
            Constraint2::linear(
                0.0,
                1.0,
                coeffs.eta[1],
                "phase-2 second component nonnegative",
            )
            .as_tightening(),
        );
    }
    Ok(r)
}

/// The feasible region `det S^(1) >= tau_1`, `det S^(2) >= tau_2` with the
/// variance matrices expressed in the free variables.
pub fn feasible_ellipses(
    pair: &ComplexPair,
    inputs: &ComplexInputs,
    tau: [f64; 2],
) -> Result<Region2> {
    let coeffs = SplitCoefficients::new(pair, inputs.cp)?;
    let d = |alpha: usize, m: usize, n: usize| {
        inputs.avg_chi_e[alpha][m].dot(inputs.avg_chi_e[alpha][n])
    };

    // Phase 1: S11 = x - a, S22 = -x + b, S21 = -gamma x - psi1 y + g.
    let a1 = d(0, 0, 0) / pair.f[0];
    let b1 = coeffs.eta[0] - d(0, 1, 1) / pair.f[0];
    let g1 = coeffs.xi[0] - d(0, 0, 1) / pair.f[0];
    let (gamma, psi1, psi2) = (coeffs.gamma, coeffs.psi[0], coeffs.psi[1]);
    let q1 = Quadratic::from_coeffs(
        -(1.0 + gamma * gamma),
        -2.0 * gamma * psi1,
        -psi1 * psi1,
        a1 + b1 + 2.0 * gamma * g1,
        2.0 * psi1 * g1,
        -a1 * b1 - g1 * g1 - tau[0],
    );
    // Phase 2: S11 = y - a2, S22 = -y + b2, S21 = psi2 x + gamma y - g2.
    let a2 = d(1, 0, 0) / pair.f[1];
    let b2 = coeffs.eta[1] - d(1, 1, 1) / pair.f[1];
    let g2 = coeffs.xi[1] + d(1, 0, 1) / pair.f[1];
    let q2 = Quadratic::from_coeffs(
        -psi2 * psi2,
        -2.0 * gamma * psi2,
        -(1.0 + gamma * gamma),
        2.0 * psi2 * g2,
        a2 + b2 + 2.0 * gamma * g2,
        -a2 * b2 - g2 * g2 - tau[1],
    );
    // The determinant quadratics are concave by construction; a positive
    // curvature here would mean corrupted coefficients.
    for q in [&q1, &q2] {
        let (_, hi) = q.quad_part().sym_eigenvalues();
        if hi > 1e-9 * q.scale() {
            return Err(Error::InvalidInput(
                "variance determinant lost its concavity; inputs are inconsistent".into(),
            ));
        }
    }
    Ok(Region2::new(vec![
        Constraint2::quadratic(q1, "phase-1 variance determinant"),
        Constraint2::quadratic(q2, "phase-2 variance determinant"),
    ]))
}

/// `tau^(a)` floors from the null Lagrangians (distinct conductivity
/// magnitudes required).
pub fn tau_from_null_lagrangians(pair: &ComplexPair, inputs: &ComplexInputs) -> Result<[f64; 2]> {
    let (nl_ee, nl_jj) = inputs
        .null_lagrangians
        .ok_or_else(|| Error::InvalidInput("null Lagrangians missing".into()))?;
    let m1 = pair.sigma[0].norm_sqr();
    let m2 = pair.sigma[1].norm_sqr();
    let den = m2 - m1;
    if den.abs() <= 1e-12 * m1.max(m2) {
        return Err(Error::EqualModuli);
    }
    let b12 = [(m2 * nl_ee - nl_jj) / den, (-m1 * nl_ee + nl_jj) / den];
    let mut tau = [0.0; 2];
    for alpha in 0..2 {
        let cross =
            inputs.avg_chi_e[alpha][0].dot(inputs.avg_chi_e[alpha][1].rot_cw()) / pair.f[alpha];
        let t = b12[alpha] - cross;
        tau[alpha] = t * t;
    }
    Ok(tau)
}

/// Certificate report for the complex case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexCertificate {
    pub verdict: CriterionVerdict,
    pub outcome: String,
}

/// Nonlinearities are certified when the feasible region does not meet the
/// compatible region. Inconclusive geometry propagates as an error.
pub fn nonlinearity_certificate(
    compat: &Region2,
    feas: &Region2,
    tightened: bool,
) -> Result<ComplexCertificate> {
    let region = compat.intersect(feas);
    let (empty, outcome) = require_decision(region.is_empty())?;
    let id = if tightened {
        CriterionId::EllipseFeasibilityTightened
    } else {
        CriterionId::EllipseFeasibility
    };
    let margin = if empty {
        -1.0
    } else {
        // Smallest verified slack at the witness, clamped to the safe side.
        0.0
    };
    let mut verdict = CriterionVerdict::from_margin(id, margin);
    verdict.violated = empty;
    if empty {
        verdict = verdict.with_witness(Witness::Inequality(outcome.clone()));
    }
    Ok(ComplexCertificate { verdict, outcome })
}

/// Convenience pipeline: both regions from the datasets, with or without the
/// null-Lagrangian tightening.
pub fn certify_from_datasets(
    d_re: &BoundaryDataset,
    d_im: &BoundaryDataset,
    pair: &ComplexPair,
    use_null_lagrangians: bool,
) -> Result<(ComplexCertificate, Region2, Region2)> {
    let inputs = ComplexInputs::from_datasets(d_re, d_im, pair)?;
    let compat = compatible_region(pair, &inputs, true)?;
    let tau = if use_null_lagrangians {
        tau_from_null_lagrangians(pair, &inputs)?
    } else {
        [0.0; 2]
    };
    let feas = feasible_ellipses(pair, &inputs, tau)?;
    let cert = nonlinearity_certificate(&compat, &feas, use_null_lagrangians)?;
    Ok((cert, compat, feas))
}
