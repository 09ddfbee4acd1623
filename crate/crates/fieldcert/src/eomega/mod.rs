//! Construction and validation of inclusions that support an exactly
//! constant interior field for a suitable boundary condition, via a
//! hodograph map generated by a rational function with conjugate pole pairs.
//!
//! The exterior map is `z(h) = i h + f(t)` with `t = sqrt((1 - h)/(1 + h))`
//! (branch cut on the positive real axis), and the inclusion boundary is the
//! two-sided image of the slit: `x = f(+-sqrt((1 - y)/(1 + y)))`.

mod poly;

use crate::boundary::synthetic::RingGeometry;
use crate::boundary::{BoundaryDataset, BoundarySample};
use crate::error::{Error, Result};
use crate::math::Vec2;
use num_complex::Complex64;
use poly::{poly_add, poly_mul, poly_scale, roots_in_rectangle};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Default cap on the number of conjugate pole pairs.
pub const DEFAULT_MAX_POLES: usize = 5;

/// Pole/residue data of the generating rational function
/// `f(t) = sum_a [b_a / (t - p_a) + conj(b_a) / (t - conj(p_a))] + c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalGenerator {
    /// Poles, normalized to the upper half plane.
    pub poles: Vec<Complex64>,
    pub residues: Vec<Complex64>,
    pub constant: f64,
}

impl RationalGenerator {
    pub fn new(poles: Vec<Complex64>, residues: Vec<Complex64>, constant: f64) -> Result<Self> {
        Self::with_max_poles(poles, residues, constant, DEFAULT_MAX_POLES)
    }

    pub fn with_max_poles(
        poles: Vec<Complex64>,
        residues: Vec<Complex64>,
        constant: f64,
        max_poles: usize,
    ) -> Result<Self> {
        if poles.len() != residues.len() {
            return Err(Error::InvalidGenerator(
                "pole and residue counts differ".into(),
            ));
        }
        if poles.is_empty() || poles.len() > max_poles {
            return Err(Error::InvalidGenerator(format!(
                "need between 1 and {} pole pairs, got {}",
                max_poles,
                poles.len()
            )));
        }
        let mut np = vec![];
        let mut nr = vec![];
        for (p, b) in poles.iter().zip(&residues) {
            if p.im.abs() < 1e-9 {
                return Err(Error::InvalidGenerator(format!(
                    "pole {} lies on the real axis",
                    p
                )));
            }
            // Normalize to the upper half plane; the conjugate pair form is
            // symmetric under (p, b) -> (conj p, conj b).
            if p.im > 0.0 {
                np.push(*p);
                nr.push(*b);
            } else {
                np.push(p.conj());
                nr.push(b.conj());
            }
        }
        Ok(RationalGenerator {
            poles: np,
            residues: nr,
            constant,
        })
    }

    /// The ellipse family `f(t) = 2 b t / (t^2 + 1)`: a single pole at `i`
    /// with real residue `b`. Produces the ellipse `x^2/b^2 + y^2 = 1`.
    pub fn ellipse(b: f64) -> Self {
        RationalGenerator {
            poles: vec![Complex64::new(0.0, 1.0)],
            residues: vec![Complex64::new(b, 0.0)],
            constant: 0.0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            poles: Vec<[f64; 2]>,
            residues: Vec<[f64; 2]>,
            #[serde(default)]
            c: f64,
        }
        let raw: Raw = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("generator json: {}", e)))?;
        RationalGenerator::new(
            raw.poles
                .iter()
                .map(|p| Complex64::new(p[0], p[1]))
                .collect(),
            raw.residues
                .iter()
                .map(|p| Complex64::new(p[0], p[1]))
                .collect(),
            raw.c,
        )
    }

    pub fn to_json(&self) -> String {
        let poles: Vec<[f64; 2]> = self.poles.iter().map(|p| [p.re, p.im]).collect();
        let residues: Vec<[f64; 2]> = self.residues.iter().map(|p| [p.re, p.im]).collect();
        serde_json::to_string_pretty(&serde_json::json!({
            "poles": poles,
            "residues": residues,
            "c": self.constant,
        }))
        .expect("generator serializes")
    }

    /// Leading asymptotic coefficient `beta_1` of `f(t) ~ c + beta_1/t`.
    pub fn beta1(&self) -> f64 {
        2.0 * self.residues.iter().map(|b| b.re).sum::<f64>()
    }
}

/// Distance guard for pole evaluation.
const POLE_EPS: f64 = 1e-12;

/// Evaluate `f(t)`.
pub fn eval_f(gen: &RationalGenerator, t: Complex64) -> Result<Complex64> {
    let mut acc = Complex64::new(gen.constant, 0.0);
    for (p, b) in gen.poles.iter().zip(&gen.residues) {
        let d1 = t - p;
        let d2 = t - p.conj();
        let near = d1.norm().min(d2.norm());
        if near < POLE_EPS {
            return Err(Error::PoleEvaluation(near));
        }
        acc += b / d1 + b.conj() / d2;
    }
    Ok(acc)
}

/// Evaluate `f'(t)`.
pub fn eval_f_prime(gen: &RationalGenerator, t: Complex64) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for (p, b) in gen.poles.iter().zip(&gen.residues) {
        let d1 = t - p;
        let d2 = t - p.conj();
        let near = d1.norm().min(d2.norm());
        if near < POLE_EPS {
            return Err(Error::PoleEvaluation(near));
        }
        acc -= b / (d1 * d1) + b.conj() / (d2 * d2);
    }
    Ok(acc)
}

/// Square root with the branch cut on the positive real axis: the argument
/// is taken in `[0, 2 pi)`, so values land in the closed upper half plane.
pub fn sqrt_positive_cut(s: Complex64) -> Complex64 {
    let mut theta = s.im.atan2(s.re);
    if theta < 0.0 {
        theta += std::f64::consts::TAU;
    }
    Complex64::from_polar(s.norm().sqrt(), 0.5 * theta)
}

/// The hodograph image `z(h) = i h + f(sqrt((1 - h)/(1 + h)))`, with the
/// branch-point limits at `h = +-1` evaluated in closed form.
pub fn eval_z(gen: &RationalGenerator, h: Complex64) -> Result<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    if (h - one).norm() < 1e-13 {
        // t -> 0.
        return Ok(Complex64::new(0.0, 1.0) + eval_f(gen, Complex64::new(0.0, 0.0))?);
    }
    if (h + one).norm() < 1e-13 {
        // t -> infinity: f -> constant.
        return Ok(Complex64::new(gen.constant, -1.0));
    }
    let s = (one - h) / (one + h);
    let t = sqrt_positive_cut(s);
    Ok(Complex64::new(0.0, 1.0) * h + eval_f(gen, t)?)
}

/// `dz/dh`, used by the Newton inversion of the exterior map.
fn eval_z_prime(gen: &RationalGenerator, h: Complex64) -> Result<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let s = (one - h) / (one + h);
    let t = sqrt_positive_cut(s);
    if t.norm() < 1e-9 {
        return Err(Error::BranchPointEvaluation(1.0));
    }
    let dt_dh = -one / (t * (one + h) * (one + h));
    Ok(Complex64::new(0.0, 1.0) + eval_f_prime(gen, t)? * dt_dh)
}

/// Sampled inclusion boundary: the two branches `x_plus(y)`, `x_minus(y)`
/// over `y` in `[-1, 1]` with cosine spacing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InclusionCurve {
    pub y: Vec<f64>,
    pub x_plus: Vec<f64>,
    pub x_minus: Vec<f64>,
    pub closed: bool,
}

/// Sample the inclusion boundary. `samples` is the number of points per
/// branch; cosine spacing resolves the closure points at `y = +-1`.
pub fn boundary_curve(gen: &RationalGenerator, samples: usize) -> Result<InclusionCurve> {
    let n = samples.max(16);
    let mut y = Vec::with_capacity(n);
    let mut x_plus = Vec::with_capacity(n);
    let mut x_minus = Vec::with_capacity(n);
    for k in 0..n {
        let theta = std::f64::consts::PI * k as f64 / (n - 1) as f64;
        let yy = theta.cos(); // 1 down to -1
        let (xp, xm) = if k == 0 {
            let f0 = eval_f(gen, Complex64::new(0.0, 0.0))?.re;
            (f0, f0)
        } else if k == n - 1 {
            (gen.constant, gen.constant)
        } else {
            let t = ((1.0 - yy) / (1.0 + yy)).sqrt();
            let fp = eval_f(gen, Complex64::new(t, 0.0))?;
            let fm = eval_f(gen, Complex64::new(-t, 0.0))?;
            (fp.re, fm.re)
        };
        y.push(yy);
        x_plus.push(xp);
        x_minus.push(xm);
    }
    let closed = x_plus.first().is_some() && x_plus.last().is_some();
    Ok(InclusionCurve {
        y,
        x_plus,
        x_minus,
        closed,
    })
}

impl InclusionCurve {
    /// Closed polygon through both branches, oriented counterclockwise.
    pub fn polygon(&self) -> Vec<Vec2> {
        let n = self.y.len();
        let mut pts = Vec::with_capacity(2 * n);
        // Plus branch from y = -1 up to y = +1, then minus branch back down.
        for k in (0..n).rev() {
            pts.push(Vec2::new(self.x_plus[k], self.y[k]));
        }
        for k in 1..n - 1 {
            pts.push(Vec2::new(self.x_minus[k], self.y[k]));
        }
        if polygon_area(&pts) < 0.0 {
            pts.reverse();
        }
        pts
    }

    pub fn area(&self) -> f64 {
        polygon_area(&self.polygon()).abs()
    }

    pub fn diameter(&self) -> f64 {
        let xs = self.x_plus.iter().chain(&self.x_minus);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &x in xs {
            lo = lo.min(x);
            hi = hi.max(x);
        }
        (hi - lo).max(2.0)
    }

    /// CSV rows `y,x_plus,x_minus`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("y,x_plus,x_minus\n");
        for k in 0..self.y.len() {
            out.push_str(&format!(
                "{:.12e},{:.12e},{:.12e}\n",
                self.y[k], self.x_plus[k], self.x_minus[k]
            ));
        }
        out
    }
}

pub fn polygon_area(pts: &[Vec2]) -> f64 {
    let n = pts.len();
    let mut a = 0.0;
    for i in 0..n {
        let p = pts[i];
        let q = pts[(i + 1) % n];
        a += p.x * q.y - q.x * p.y;
    }
    0.5 * a
}

pub fn point_in_polygon(pts: &[Vec2], p: Vec2) -> bool {
    let n = pts.len();
    let mut inside = false;
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}

/// Validation report: all four checks must pass for a usable generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub self_intersection_ok: bool,
    pub derivative_at_zero_ok: bool,
    pub asymptotics_ok: bool,
    pub univalence_ok: bool,
    pub beta1: f64,
    /// Zeros of the mapped derivative in the upper half t-plane with their
    /// physical images.
    pub critical_points: Vec<CriticalPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub t: [f64; 2],
    pub z: [f64; 2],
    pub inside_inclusion: bool,
}

impl ValidityReport {
    pub fn valid(&self) -> bool {
        self.self_intersection_ok
            && self.derivative_at_zero_ok
            && self.asymptotics_ok
            && self.univalence_ok
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ValidateOptions {
    /// Scale-relative floor for the branch-separation and derivative checks.
    pub tolerance: f64,
    pub curve_samples: usize,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions {
            tolerance: 1e-7,
            curve_samples: 2048,
        }
    }
}

/// Derivative of the composite map `z(h(t))` with respect to `t`:
/// `-4 i t / (1 + t^2)^2 + f'(t)`.
pub fn map_derivative(gen: &RationalGenerator, t: Complex64) -> Result<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let den = (one + t * t) * (one + t * t);
    if den.norm() < 1e-14 {
        return Err(Error::PoleEvaluation(den.norm()));
    }
    Ok(Complex64::new(0.0, -4.0) * t / den + eval_f_prime(gen, t)?)
}

/// The composite-map derivative with denominators cleared:
/// `N(t) = (dz(h(t))/dt) * (1 + t^2)^2 * prod_a |t - p_a|^4`, a polynomial.
fn derivative_numerator(gen: &RationalGenerator) -> Vec<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    // D_a(t) = (t - p)(t - conj p), real quadratic per pole pair.
    let pair_quads: Vec<Vec<Complex64>> = gen
        .poles
        .iter()
        .map(|p| {
            vec![
                Complex64::new(p.norm_sqr(), 0.0),
                Complex64::new(-2.0 * p.re, 0.0),
                one,
            ]
        })
        .collect();
    let mut prod_sq = vec![one];
    for q in &pair_quads {
        let q2 = poly_mul(q, q);
        prod_sq = poly_mul(&prod_sq, &q2);
    }
    // (1 + t^2)^2.
    let unit = vec![one, zero, one];
    let unit_sq = poly_mul(&unit, &unit);
    // N = -4 i t * prod_sq + (1+t^2)^2 * sum_a [-b (t - conj p)^2 - conj b (t - p)^2] * prod_{b != a}.
    let mut n = poly_mul(&[zero, Complex64::new(0.0, -4.0)], &prod_sq);
    for (a, (p, b)) in gen.poles.iter().zip(&gen.residues).enumerate() {
        let mut rest = vec![one];
        for (bb, q) in pair_quads.iter().enumerate() {
            if bb != a {
                rest = poly_mul(&rest, &poly_mul(q, q));
            }
        }
        let lin_conj = vec![-p.conj(), one];
        let lin = vec![-*p, one];
        let term = poly_add(
            &poly_scale(&poly_mul(&lin_conj, &lin_conj), -b),
            &poly_scale(&poly_mul(&lin, &lin), -b.conj()),
        );
        n = poly_add(&n, &poly_mul(&poly_mul(&term, &unit_sq), &rest));
    }
    n
}

/// Zeros of the composite-map derivative in the upper half t-plane.
///
/// Denominators are cleared into a polynomial whose roots are found by
/// simultaneous iteration; the count inside a tight enclosing box is then
/// verified with an argument-principle winding number, falling back to
/// winding subdivision when the two disagree.
pub fn derivative_zeros_upper_half(gen: &RationalGenerator) -> Vec<Complex64> {
    let n = derivative_numerator(gen);
    let all = poly::all_roots(&n);
    let keep_upper = |roots: &[Complex64]| -> Vec<Complex64> {
        let mut out: Vec<Complex64> = roots
            .iter()
            .copied()
            .filter(|t| t.im > 1e-7 && poly::backward_error(&n, *t) < 1e-10)
            .collect();
        out.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        out.dedup_by(|a, b| (*a - *b).norm() < 1e-8 * (1.0 + b.norm()));
        out
    };
    let mut upper = keep_upper(&all);

    // Verify the count with the argument principle over a box that enclosing
    // every located upper-half root (plus margin).
    let reach = all.iter().fold(1.0f64, |m, t| m.max(t.norm())) + 1.0;
    let counted = poly::winding_in_rectangle(&n, -reach, reach, 1e-7, reach);
    if counted != Some(upper.len() as i64) {
        let sub = roots_in_rectangle(&n, -reach, reach, 1e-7, reach, 1e-10);
        let mut merged = upper.clone();
        merged.extend(sub);
        upper = keep_upper(&merged);
    }

    // Drop spurious roots sitting on cleared poles unless the derivative
    // itself genuinely vanishes there.
    let mut poles_all: Vec<Complex64> = gen.poles.clone();
    poles_all.push(Complex64::new(0.0, 1.0));
    upper
        .into_iter()
        .filter(|t| {
            if poles_all.iter().any(|p| (t - p).norm() < 1e-6) {
                match map_derivative(gen, *t) {
                    Ok(g) => g.norm() < 1e-6,
                    Err(_) => false,
                }
            } else {
                true
            }
        })
        .collect()
}

/// Run the four generator checks.
pub fn validate(gen: &RationalGenerator, opts: ValidateOptions) -> ValidityReport {
    let beta1 = gen.beta1();
    let curve = boundary_curve(gen, opts.curve_samples).ok();
    let diameter = curve.as_ref().map(|c| c.diameter()).unwrap_or(2.0);

    // (ii) nonzero derivative at the slit end.
    let f0p = eval_f_prime(gen, Complex64::new(0.0, 0.0))
        .map(|v| v.norm())
        .unwrap_or(0.0);
    let derivative_at_zero_ok = f0p > opts.tolerance * diameter;

    // (iii) real positive leading asymptotics (real by construction).
    let asymptotics_ok = beta1 > opts.tolerance * diameter;

    // (i) branch separation: the scaled gap |f(t) - f(-t)| (1 + t^2) / (2 t)
    // tends to |f'(0)| and beta_1 at the ends, so a uniform floor is the
    // right no-touching test; plus a polyline self-intersection sweep.
    let mut self_intersection_ok = derivative_at_zero_ok && asymptotics_ok;
    if let Some(c) = &curve {
        let scaled_gap = |t: f64| -> f64 {
            let fp = eval_f(gen, Complex64::new(t, 0.0))
                .map(|v| v.re)
                .unwrap_or(f64::NAN);
            let fm = eval_f(gen, Complex64::new(-t, 0.0))
                .map(|v| v.re)
                .unwrap_or(f64::NAN);
            (fp - fm).abs() * (1.0 + t * t) / (2.0 * t)
        };
        let mut min_gap = f64::INFINITY;
        let mut min_t = 1.0;
        let n = 1024;
        for k in 0..=n {
            // Map the parameter through y to cover (0, inf) with symmetry.
            let th = std::f64::consts::PI * (k as f64 + 0.5) / (n as f64 + 1.0);
            let y = th.cos();
            let t = ((1.0 - y) / (1.0 + y)).sqrt();
            let g = scaled_gap(t);
            if g.is_finite() && g < min_gap {
                min_gap = g;
                min_t = t;
            }
        }
        // Local refinement around the minimum.
        let mut lo = min_t * 0.8;
        let mut hi = min_t * 1.25;
        for _ in 0..40 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if scaled_gap(m1) < scaled_gap(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        min_gap = min_gap.min(scaled_gap(0.5 * (lo + hi)));
        if min_gap <= opts.tolerance * diameter {
            self_intersection_ok = false;
        }
        if self_intersection_ok && polyline_self_intersects(&c.polygon()) {
            self_intersection_ok = false;
        }
    }

    // (iv) critical points of the composite map and their physical images.
    let zeros = derivative_zeros_upper_half(gen);
    let polygon = curve.as_ref().map(|c| c.polygon()).unwrap_or_default();
    let mut critical_points = vec![];
    let mut univalence_ok = true;
    for t in zeros {
        let h = (Complex64::new(1.0, 0.0) - t * t) / (Complex64::new(1.0, 0.0) + t * t);
        let z = match eval_z(gen, h) {
            Ok(z) => z,
            Err(_) => continue,
        };
        let inside = point_in_polygon(&polygon, Vec2::new(z.re, z.im));
        if inside {
            univalence_ok = false;
        }
        critical_points.push(CriticalPoint {
            t: [t.re, t.im],
            z: [z.re, z.im],
            inside_inclusion: inside,
        });
    }

    ValidityReport {
        self_intersection_ok,
        derivative_at_zero_ok,
        asymptotics_ok,
        univalence_ok,
        beta1,
        critical_points,
    }
}

/// Segment-pair sweep over a closed polyline (bounding-box early exit).
pub fn polyline_self_intersects(pts: &[Vec2]) -> bool {
    let n = pts.len();
    if n < 4 {
        return false;
    }
    let seg = |i: usize| (pts[i], pts[(i + 1) % n]);
    for i in 0..n {
        let (a1, a2) = seg(i);
        for j in i + 2..n {
            // Skip adjacent segments (sharing an endpoint).
            if i == 0 && j == n - 1 {
                continue;
            }
            let (b1, b2) = seg(j);
            if a1.x.max(a2.x) < b1.x.min(b2.x)
                || b1.x.max(b2.x) < a1.x.min(a2.x)
                || a1.y.max(a2.y) < b1.y.min(b2.y)
                || b1.y.max(b2.y) < a1.y.min(a2.y)
            {
                continue;
            }
            if segments_cross(a1, a2, b1, b2) {
                return true;
            }
        }
    }
    false
}

fn segments_cross(a1: Vec2, a2: Vec2, b1: Vec2, b2: Vec2) -> bool {
    let d = |p: Vec2, q: Vec2, r: Vec2| (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
    let d1 = d(a1, a2, b1);
    let d2 = d(a1, a2, b2);
    let d3 = d(b1, b2, a1);
    let d4 = d(b1, b2, a2);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Shear/stretch of the inclusion: `x' = g1 x + re_g2 y`, `y' = y`. On the
/// generator this adds `re_g2 * h(t)` which is again a conjugate pole pair
/// at `i`, so the result stays in the family.
pub fn transform_generator(
    gen: &RationalGenerator,
    gamma1: f64,
    re_gamma2: f64,
) -> Result<RationalGenerator> {
    if gamma1.abs() < 1e-12 {
        return Err(Error::DegenerateGamma);
    }
    let mut poles = gen.poles.clone();
    let mut residues: Vec<Complex64> = gen.residues.iter().map(|b| b * gamma1).collect();
    // h(t) = -1 - i/(t - i) + i/(t + i): residue -i*re_g2 at the pole i.
    let extra = Complex64::new(0.0, -re_gamma2);
    if let Some(k) = poles
        .iter()
        .position(|p| (p - Complex64::new(0.0, 1.0)).norm() < 1e-12)
    {
        residues[k] += extra;
    } else if re_gamma2 != 0.0 {
        poles.push(Complex64::new(0.0, 1.0));
        residues.push(extra);
    }
    Ok(RationalGenerator {
        poles,
        residues,
        constant: gamma1 * gen.constant - re_gamma2,
    })
}

/// The same transform applied directly to a sampled curve.
pub fn transform_curve(
    curve: &InclusionCurve,
    gamma1: f64,
    re_gamma2: f64,
) -> Result<InclusionCurve> {
    if gamma1.abs() < 1e-12 {
        return Err(Error::DegenerateGamma);
    }
    Ok(InclusionCurve {
        y: curve.y.clone(),
        x_plus: curve
            .y
            .iter()
            .zip(&curve.x_plus)
            .map(|(y, x)| gamma1 * x + re_gamma2 * y)
            .collect(),
        x_minus: curve
            .y
            .iter()
            .zip(&curve.x_minus)
            .map(|(y, x)| gamma1 * x + re_gamma2 * y)
            .collect(),
        closed: curve.closed,
    })
}

/// Conductivity contrast for which the hydrostatic elastic state maps onto
/// the conductivity construction: `(2 (l1 + m1) - l2) / (l2 + 2 m2)`.
pub fn elastic_sigma(lambda1: f64, mu1: f64, lambda2: f64, mu2: f64) -> Result<f64> {
    let den = lambda2 + 2.0 * mu2;
    if den.abs() < 1e-14 * (lambda2.abs() + mu2.abs() + 1.0) {
        return Err(Error::DegenerateDenominator);
    }
    Ok((2.0 * (lambda1 + mu1) - lambda2) / den)
}

/// Asymptotic slope of the exterior map: `z(h) ~ kappa h` as `h -> inf`,
/// with `kappa = i (1 + b_i)` where `b_i` is the residue at a pole at `i`
/// (zero when absent).
fn asymptotic_slope(gen: &RationalGenerator) -> Complex64 {
    let mut b_i = Complex64::new(0.0, 0.0);
    for (p, b) in gen.poles.iter().zip(&gen.residues) {
        if (p - Complex64::new(0.0, 1.0)).norm() < 1e-9 {
            b_i = *b;
        }
    }
    Complex64::new(0.0, 1.0) * (Complex64::new(1.0, 0.0) + b_i)
}

fn newton_invert(gen: &RationalGenerator, z0: Complex64, start: Complex64) -> Option<Complex64> {
    let scale = 1.0 + z0.norm();
    let mut h = start;
    for _ in 0..80 {
        let z = eval_z(gen, h).ok()?;
        let r = z - z0;
        if r.norm() < 1e-12 * scale {
            return Some(h);
        }
        let dz = eval_z_prime(gen, h).ok()?;
        if dz.norm() < 1e-14 {
            return None;
        }
        let mut step = r / dz;
        if step.norm() > 2.0 * (1.0 + h.norm()) {
            step *= 2.0 * (1.0 + h.norm()) / step.norm();
        }
        h -= step;
    }
    None
}

/// Segment continuation: track the preimage from a known pair `(h, z(h))`
/// to `z_target` along the straight segment in the physical plane.
fn continue_invert(
    gen: &RationalGenerator,
    mut h: Complex64,
    z_from: Complex64,
    z_to: Complex64,
) -> Option<Complex64> {
    let steps = 24;
    for k in 1..=steps {
        let t = k as f64 / steps as f64;
        let z_mid = z_from + (z_to - z_from) * t;
        h = newton_invert(gen, z_mid, h)?;
    }
    Some(h)
}

/// Invert the exterior map at a physical point. A provided seed (path
/// continuation along a boundary ring) is tried first. Without one, the
/// physical branch is anchored just off the slit (the inclusion boundary)
/// and continued outward to `z0`; the map is generally multivalent far from
/// the inclusion, so far-field anchoring alone can land on a wrong sheet.
pub fn invert_map(
    gen: &RationalGenerator,
    z0: Complex64,
    seed: Option<Complex64>,
) -> Result<Complex64> {
    if let Some(s) = seed {
        if let Some(h) = newton_invert(gen, z0, s) {
            return Ok(h);
        }
    }
    // Slit-anchored continuation: pick the slit-side start whose image is
    // nearest to z0, then walk the straight segment outward.
    let mut best: Option<(f64, Complex64, Complex64)> = None;
    let delta = 0.08;
    for k in 0..48 {
        let y = -0.96 + 1.92 * k as f64 / 47.0;
        for sgn in [1.0, -1.0] {
            let h0 = Complex64::new(y, sgn * delta);
            if let Ok(z) = eval_z(gen, h0) {
                let d = (z - z0).norm();
                if best.map_or(true, |(bd, _, _)| d < bd) {
                    best = Some((d, h0, z));
                }
            }
        }
    }
    if let Some((_, h0, z_from)) = best {
        if let Some(h) = continue_invert(gen, h0, z_from, z0) {
            return Ok(h);
        }
    }
    // Far-field anchored continuation (exact sheet for single-pole-at-i
    // generators, useful fallback otherwise).
    let kappa = asymptotic_slope(gen);
    let far = 256.0 * (1.0 + z0.norm());
    let z_far = z0 / z0.norm().max(1e-12) * far;
    let h_far = z_far / kappa;
    if let Some(h0) = newton_invert(gen, z_far, h_far) {
        if let Some(h) = continue_invert(gen, h0, z_far, z0) {
            return Ok(h);
        }
    }
    // Last-resort multistart.
    for &(re, im) in &[
        (2.0, 0.5),
        (-2.0, 0.5),
        (0.0, 3.0),
        (0.0, -3.0),
        (3.0, -1.0),
        (-3.0, 1.0),
    ] {
        if let Some(hh) = newton_invert(gen, z0, Complex64::new(re, im)) {
            return Ok(hh);
        }
    }
    Err(Error::InvalidInput(format!(
        "map inversion failed at z = {}",
        z0
    )))
}

/// Potentials of the field aligned with the y axis, supported by the same
/// inclusion: `V' = -W + (1 + s1) y`, `W' = V - (1 + s1) x` (the matrix
/// phase is normalized to unit conductivity).
pub fn orthogonal_potentials(
    gen: &RationalGenerator,
    sigma1: f64,
    z0: Complex64,
) -> Result<(f64, f64)> {
    let curve = boundary_curve(gen, 1024)?;
    if point_in_polygon(&curve.polygon(), Vec2::new(z0.re, z0.im)) {
        return Err(Error::PointInsideInclusion);
    }
    let h = invert_map(gen, z0, None)?;
    let vw = z0 - Complex64::new(0.0, 1.0 - sigma1) * h;
    let (v, w) = (vw.re, vw.im);
    Ok((-w + (1.0 + sigma1) * z0.im, v - (1.0 + sigma1) * z0.re))
}

/// Boundary dataset synthesized from the exact exterior solution on a given
/// body boundary. The interior field is constant and equal to `(1, 0)`
/// (phase 2 is normalized to unit conductivity). Fails when the body does
/// not strictly contain the inclusion or encloses a critical image.
pub fn synthesize_boundary_dataset(
    gen: &RationalGenerator,
    sigma1: f64,
    ring: &RingGeometry,
    label: &str,
) -> Result<(BoundaryDataset, f64)> {
    let curve = boundary_curve(gen, 2048)?;
    let inclusion = curve.polygon();
    let omega: Vec<Vec2> = ring.nodes.iter().map(|n| n.position).collect();
    for p in &inclusion {
        if !point_in_polygon(&omega, *p) {
            return Err(Error::OmegaTooLarge(
                "inclusion is not strictly inside the body".into(),
            ));
        }
    }
    let report = validate(gen, ValidateOptions::default());
    for cp in &report.critical_points {
        let p = Vec2::new(cp.z[0], cp.z[1]);
        if point_in_polygon(&omega, p) {
            return Err(Error::OmegaTooLarge(format!(
                "critical image ({:.4}, {:.4}) lies inside the body",
                p.x, p.y
            )));
        }
    }

    let mut samples = Vec::with_capacity(ring.nodes.len());
    let mut seed: Option<Complex64> = None;
    for node in &ring.nodes {
        let z0 = Complex64::new(node.position.x, node.position.y);
        let mut h = invert_map(gen, z0, seed)?;
        // Guard against branch jumps along the ring: the preimage must move
        // continuously; re-anchor from the far field when it leaps.
        if let Some(prev) = seed {
            if (h - prev).norm() > 0.5 * (1.0 + prev.norm()) {
                let fresh = invert_map(gen, z0, None)?;
                if (fresh - prev).norm() < (h - prev).norm() {
                    h = fresh;
                }
            }
        }
        seed = Some(h);
        let vw = z0 - Complex64::new(0.0, 1.0 - sigma1) * h;
        // g'(z) = 1 - i (1 - s1) / z'(h); E = (-Re g', Im g'), J = E outside.
        let zp = eval_z_prime(gen, h)?;
        let gp = Complex64::new(1.0, 0.0) - Complex64::new(0.0, 1.0 - sigma1) / zp;
        let e = Vec2::new(-gp.re, gp.im);
        // Flip the sign so the interior field is +x.
        let v = -vw.re;
        let j_n = -e.dot(node.normal);
        samples.push(BoundarySample {
            position: node.position,
            tangent: node.tangent,
            normal: node.normal,
            ds: node.ds.max(1e-300),
            v,
            j_n,
            u: None,
            traction: None,
        });
    }
    let f1 = curve.area() / ring.area;
    Ok((
        BoundaryDataset {
            area: ring.area,
            samples,
            label: label.into(),
        },
        f1,
    ))
}

/// Rejection-sample random validated generators; deterministic under a seed.
pub fn random_atlas(
    count: usize,
    seed: u64,
    max_poles: usize,
) -> Vec<(RationalGenerator, ValidityReport)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![];
    let mut guard = 0usize;
    while out.len() < count && guard < 200 * count.max(1) {
        guard += 1;
        let n = rng.random_range(1..=max_poles.max(1));
        let mut poles = vec![];
        let mut residues = vec![];
        for _ in 0..n {
            poles.push(Complex64::new(
                rng.random_range(-1.5..1.5),
                rng.random_range(0.4..2.0),
            ));
            residues.push(Complex64::new(
                rng.random_range(0.05..0.9) / n as f64,
                rng.random_range(-0.4..0.4) / n as f64,
            ));
        }
        let gen = match RationalGenerator::with_max_poles(poles, residues, 0.0, max_poles) {
            Ok(g) => g,
            Err(_) => continue,
        };
        if gen.beta1() < 0.05 {
            continue;
        }
        let report = validate(&gen, ValidateOptions::default());
        if report.valid() {
            out.push((gen, report));
        }
    }
    out
}
