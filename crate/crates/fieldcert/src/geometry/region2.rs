//! Plane regions cut out by linear and quadratic inequalities, with
//! membership, emptiness, and intersection queries.

use super::conic::Quadratic;
use crate::error::{Error, Result};
use crate::math::Vec2;
use serde::{Deserialize, Serialize};

pub const SLACK_TOL: f64 = 1e-12;
pub const WITNESS_TOL: f64 = 1e-10;

/// One inequality constraint in the plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintForm2 {
    /// `a x + b y <= c`.
    Linear { a: f64, b: f64, c: f64 },
    /// `[x y 1] M [x y 1]^T >= 0`.
    Quadratic { m: Quadratic },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint2 {
    pub form: ConstraintForm2,
    /// Report label; also marks physically-forced tightenings that are not
    /// part of the literal threshold inequalities.
    pub label: String,
    #[serde(default)]
    pub tightening: bool,
}

impl Constraint2 {
    pub fn linear(a: f64, b: f64, c: f64, label: &str) -> Self {
        Constraint2 {
            form: ConstraintForm2::Linear { a, b, c },
            label: label.into(),
            tightening: false,
        }
    }

    pub fn quadratic(m: Quadratic, label: &str) -> Self {
        Constraint2 {
            form: ConstraintForm2::Quadratic { m },
            label: label.into(),
            tightening: false,
        }
    }

    pub fn as_tightening(mut self) -> Self {
        self.tightening = true;
        self
    }

    /// Signed slack at `p`; nonnegative means satisfied.
    pub fn slack(&self, p: Vec2) -> f64 {
        match &self.form {
            ConstraintForm2::Linear { a, b, c } => c - a * p.x - b * p.y,
            ConstraintForm2::Quadratic { m } => m.eval(p),
        }
    }

    fn local_scale(&self, p: Vec2) -> f64 {
        match &self.form {
            ConstraintForm2::Linear { a, b, c } => {
                1.0 + Vec2::new(*a, *b).norm() * p.norm() + c.abs()
            }
            ConstraintForm2::Quadratic { m } => m.local_scale(p),
        }
    }

    fn is_convex(&self) -> bool {
        match &self.form {
            ConstraintForm2::Linear { .. } => true,
            ConstraintForm2::Quadratic { m } => m.is_concave(),
        }
    }
}

/// Conjunction of constraints in the plane.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Region2 {
    pub constraints: Vec<Constraint2>,
}

/// Verdict of an emptiness query.
#[derive(Debug, Clone, PartialEq)]
pub enum Emptiness2 {
    /// A certificate of emptiness exists (label of the deciding argument).
    Empty {
        certificate: String,
    },
    /// A verified member point.
    Nonempty {
        witness: Vec2,
    },
    Inconclusive {
        reason: String,
    },
}

impl Region2 {
    pub fn new(constraints: Vec<Constraint2>) -> Self {
        Region2 { constraints }
    }

    pub fn full_plane() -> Self {
        Region2 {
            constraints: vec![],
        }
    }

    pub fn push(&mut self, c: Constraint2) {
        self.constraints.push(c);
    }

    /// Per-constraint slacks at `p` (order matches `constraints`).
    pub fn slacks(&self, p: Vec2) -> Vec<f64> {
        self.constraints.iter().map(|c| c.slack(p)).collect()
    }

    /// Membership with the default tolerance ladder.
    pub fn contains(&self, p: Vec2) -> bool {
        self.contains_tol(p, SLACK_TOL)
    }

    pub fn contains_tol(&self, p: Vec2, tol: f64) -> bool {
        self.constraints
            .iter()
            .all(|c| c.slack(p) >= -tol * c.local_scale(p))
    }

    /// Concatenate constraint lists.
    pub fn intersect(&self, other: &Region2) -> Region2 {
        let mut constraints = self.constraints.clone();
        constraints.extend(other.constraints.iter().cloned());
        Region2 { constraints }
    }

    /// Drop constraints marked as physically-forced tightenings, recovering
    /// the literal threshold region.
    pub fn without_tightenings(&self) -> Region2 {
        Region2 {
            constraints: self
                .constraints
                .iter()
                .filter(|c| !c.tightening)
                .cloned()
                .collect(),
        }
    }

    fn linear_parts(&self) -> Vec<(f64, f64, f64, String)> {
        let mut out = vec![];
        for c in &self.constraints {
            match &c.form {
                ConstraintForm2::Linear { a, b, c: rhs } => {
                    out.push((*a, *b, *rhs, c.label.clone()))
                }
                ConstraintForm2::Quadratic { m } if m.is_affine() => {
                    // 2 l.p + m22 >= 0 -> (-2 lx) x + (-2 ly) y <= m22.
                    let l = m.lin_part();
                    out.push((-2.0 * l.x, -2.0 * l.y, m.m[2][2], c.label.clone()));
                }
                _ => {}
            }
        }
        out
    }

    fn quadratic_parts(&self) -> Vec<(Quadratic, String)> {
        self.constraints
            .iter()
            .filter_map(|c| match &c.form {
                ConstraintForm2::Quadratic { m } if !m.is_affine() => Some((*m, c.label.clone())),
                _ => None,
            })
            .collect()
    }

    /// Characteristic spatial extent used by samplers.
    fn extent(&self) -> f64 {
        let mut e: f64 = 1.0;
        for (q, _) in self.quadratic_parts() {
            if let Some(c) = q.center() {
                e = e.max(4.0 * (1.0 + c.norm()));
                let k = q.eval(c);
                let (lo, hi) = q.quad_part().sym_eigenvalues();
                for lam in [lo, hi] {
                    if lam.abs() > 1e-12 * q.scale() && -k / lam > 0.0 {
                        e = e.max(4.0 * (-k / lam).sqrt() + 1.0);
                    }
                }
            }
        }
        for (a, b, c, _) in self.linear_parts() {
            let n = Vec2::new(a, b).norm();
            if n > 1e-12 {
                e = e.max(4.0 * (c.abs() / n + 1.0));
            }
        }
        e.min(1e8)
    }

    /// Decide emptiness. `Empty` is only returned with a certificate;
    /// `Nonempty` always carries a verified witness.
    pub fn is_empty(&self) -> Emptiness2 {
        // Constant infeasible constraints decide immediately.
        for c in &self.constraints {
            match &c.form {
                ConstraintForm2::Linear { a, b, c: rhs } => {
                    if a.abs() <= 1e-300
                        && b.abs() <= 1e-300
                        && *rhs < -SLACK_TOL * (1.0 + rhs.abs())
                    {
                        return Emptiness2::Empty {
                            certificate: format!("constant constraint '{}' infeasible", c.label),
                        };
                    }
                }
                ConstraintForm2::Quadratic { m } => {
                    let (sup, _) = m.sup_over_plane();
                    if sup < -WITNESS_TOL * m.scale() {
                        return Emptiness2::Empty {
                            certificate: format!("constraint '{}' has empty solution set", c.label),
                        };
                    }
                }
            }
        }

        let lins = self.linear_parts();
        let quads = self.quadratic_parts();

        // Pure linear case: Fourier-Motzkin is exact.
        if quads.is_empty() {
            return match fourier_motzkin(&lins) {
                LinFeas::Empty(why) => Emptiness2::Empty { certificate: why },
                LinFeas::Point(p) => {
                    if self.contains_tol(p, WITNESS_TOL) {
                        Emptiness2::Nonempty { witness: p }
                    } else {
                        Emptiness2::Inconclusive {
                            reason: "linear witness failed verification".into(),
                        }
                    }
                }
            };
        }

        // Linear subsystem alone empty ends the question.
        if let LinFeas::Empty(why) = fourier_motzkin(&lins) {
            return Emptiness2::Empty { certificate: why };
        }

        let extent = self.extent();

        // Witness search over cheap candidates.
        if let Some(w) = self.search_witness(extent) {
            return Emptiness2::Nonempty { witness: w };
        }

        // Certificates of emptiness.
        // (a) concave quadratic vs the linear polytope, solved exactly.
        if !lins.is_empty() {
            for (q, label) in &quads {
                if q.is_concave() {
                    if let Some(sup) = max_quadratic_over_polytope(q, &lins) {
                        if sup < -WITNESS_TOL * q.scale() {
                            return Emptiness2::Empty {
                                certificate: format!(
                                    "'{}' negative over the linear constraints",
                                    label
                                ),
                            };
                        }
                    }
                }
            }
        }
        // (b) pairwise S-procedure, sound for arbitrary quadratics.
        for i in 0..quads.len() {
            for j in 0..quads.len() {
                if i == j {
                    continue;
                }
                if let Some(gap) = pair_emptiness_bound(&quads[i].0, &quads[j].0) {
                    if gap < -WITNESS_TOL * quads[i].0.scale().max(quads[j].0.scale()) {
                        return Emptiness2::Empty {
                            certificate: format!(
                                "'{}' and '{}' are disjoint",
                                quads[i].1, quads[j].1
                            ),
                        };
                    }
                }
            }
        }
        // (c) all-convex: averaged projections decide both directions.
        if self.constraints.iter().all(|c| c.is_convex()) {
            match self.averaged_projections(extent) {
                Pocs::Member(w) => return Emptiness2::Nonempty { witness: w },
                Pocs::Gap(g) => {
                    return Emptiness2::Empty {
                        certificate: format!("convex sets separated by gap {:.3e}", g),
                    }
                }
                Pocs::Undecided => {}
            }
        }

        Emptiness2::Inconclusive {
            reason: "no witness found and no emptiness certificate applies".into(),
        }
    }

    fn search_witness(&self, extent: f64) -> Option<Vec2> {
        let mut candidates: Vec<Vec2> = vec![Vec2::ZERO];
        let lins = self.linear_parts();
        if let LinFeas::Point(p) = fourier_motzkin(&lins) {
            candidates.push(p);
        }
        let quads = self.quadratic_parts();
        for (q, _) in &quads {
            if let Some(c) = q.center() {
                candidates.push(c);
            }
            if let (v, Some(p)) = q.sup_over_plane() {
                if v.is_finite() {
                    candidates.push(p);
                }
            }
            // Dense boundary sweep plus local refinement around the best
            // near-miss, which resolves witnesses at near-tangent contacts.
            let mut best_near: Option<(f64, Vec<Vec2>, usize)> = None;
            for ch in q.boundary_polylines(4096, extent) {
                for (idx, &p) in ch.iter().enumerate() {
                    // Nudge slightly inward along the gradient so boundary
                    // round-off does not spoil membership.
                    let g = q.gradient(p);
                    let gn = g.norm();
                    candidates.push(p);
                    if gn > 1e-14 {
                        candidates.push(p + g.scale(1e-7 * extent / gn));
                    }
                    let worst = self.min_slack_excluding(p, q);
                    if best_near.as_ref().map_or(true, |(w, _, _)| worst > *w) {
                        best_near = Some((worst, ch.clone(), idx));
                    }
                }
            }
            if let Some((_, ch, idx)) = best_near {
                // Ternary refinement along the polyline around the best index.
                let n = ch.len();
                if n >= 3 {
                    let mut lo = idx.saturating_sub(2) as f64;
                    let mut hi = ((idx + 2).min(n - 1)) as f64;
                    let at = |t: f64| -> Vec2 {
                        let k = t.floor() as usize;
                        let frac = t - k as f64;
                        if k + 1 < n {
                            ch[k] + (ch[k + 1] - ch[k]).scale(frac)
                        } else {
                            ch[n - 1]
                        }
                    };
                    for _ in 0..60 {
                        let m1 = lo + (hi - lo) / 3.0;
                        let m2 = hi - (hi - lo) / 3.0;
                        if self.min_slack_excluding(at(m1), q) < self.min_slack_excluding(at(m2), q)
                        {
                            lo = m1;
                        } else {
                            hi = m2;
                        }
                    }
                    let p = at(0.5 * (lo + hi));
                    candidates.push(p);
                    let g = q.gradient(p);
                    let gn = g.norm();
                    if gn > 1e-14 {
                        candidates.push(p + g.scale(1e-9 * extent / gn));
                    }
                }
            }
        }
        // Segments between conic centers often cross the intersection.
        let centers: Vec<Vec2> = quads.iter().filter_map(|(q, _)| q.center()).collect();
        for i in 0..centers.len() {
            for j in i + 1..centers.len() {
                for k in 1..16 {
                    let t = k as f64 / 16.0;
                    candidates.push(centers[i] + (centers[j] - centers[i]).scale(t));
                }
            }
        }
        candidates
            .into_iter()
            .find(|&p| self.contains_tol(p, WITNESS_TOL))
    }

    /// Smallest scaled slack at `p` over all constraints except the one
    /// whose boundary `p` lies on.
    fn min_slack_excluding(&self, p: Vec2, own: &Quadratic) -> f64 {
        let mut worst = f64::INFINITY;
        for c in &self.constraints {
            if let ConstraintForm2::Quadratic { m } = &c.form {
                if m == own {
                    continue;
                }
            }
            worst = worst.min(c.slack(p) / c.local_scale(p));
        }
        worst
    }

    fn averaged_projections(&self, extent: f64) -> Pocs {
        let mut starts = vec![Vec2::ZERO];
        for (q, _) in self.quadratic_parts() {
            if let Some(c) = q.center() {
                starts.push(c);
            }
        }
        for start in starts {
            match self.averaged_projections_from(start, extent) {
                Pocs::Member(w) => return Pocs::Member(w),
                Pocs::Gap(g) => return Pocs::Gap(g),
                Pocs::Undecided => {}
            }
        }
        Pocs::Undecided
    }

    fn averaged_projections_from(&self, start: Vec2, extent: f64) -> Pocs {
        let m = self.constraints.len();
        if m == 0 {
            return Pocs::Member(start);
        }
        let mut x = start;
        let scale = 1.0 + extent;
        let mut stalled = 0usize;
        for _ in 0..100_000 {
            let mut sum = Vec2::ZERO;
            let mut f = 0.0;
            for c in &self.constraints {
                let p = match &c.form {
                    ConstraintForm2::Linear { a, b, c: rhs } => project_halfplane(x, *a, *b, *rhs),
                    ConstraintForm2::Quadratic { m: q } => match q.project_convex(x, extent) {
                        Some(p) => p,
                        None => return Pocs::Undecided,
                    },
                };
                f += p.dist(x).powi(2);
                sum += p;
            }
            let next = sum / m as f64;
            let step = next.dist(x);
            x = next;
            if step < 1e-14 * scale {
                stalled += 1;
                if stalled > 8 {
                    let f = (f / m as f64).sqrt();
                    if self.contains_tol(x, WITNESS_TOL) {
                        return Pocs::Member(x);
                    }
                    if f > 1e-8 * scale {
                        return Pocs::Gap(f);
                    }
                    return Pocs::Undecided;
                }
            } else {
                stalled = 0;
            }
        }
        if self.contains_tol(x, WITNESS_TOL) {
            return Pocs::Member(x);
        }
        Pocs::Undecided
    }
}

enum Pocs {
    Member(Vec2),
    Gap(f64),
    Undecided,
}

fn project_halfplane(p: Vec2, a: f64, b: f64, c: f64) -> Vec2 {
    let n = Vec2::new(a, b);
    let nn = n.norm_sq();
    if nn <= 1e-300 {
        return p;
    }
    let viol = a * p.x + b * p.y - c;
    if viol <= 0.0 {
        p
    } else {
        p - n.scale(viol / nn)
    }
}

enum LinFeas {
    Empty(String),
    Point(Vec2),
}

/// Fourier-Motzkin feasibility for `a x + b y <= c` systems. Exact up to
/// floating-point tolerance; intended for small constraint counts.
fn fourier_motzkin(lins: &[(f64, f64, f64, String)]) -> LinFeas {
    let scale: f64 = lins
        .iter()
        .map(|(a, b, c, _)| a.abs().max(b.abs()).max(c.abs()))
        .fold(1.0_f64, f64::max);
    let eps = 1e-12 * scale;

    // Eliminate x: rows with a>0 give upper bounds on x, a<0 lower bounds.
    let mut uppers = vec![]; // x <= (c - b y)/a
    let mut lowers = vec![];
    let mut y_only = vec![]; // b y <= c
    for (a, b, c, label) in lins {
        if a.abs() <= eps {
            if b.abs() <= eps {
                if *c < -eps {
                    return LinFeas::Empty(format!(
                        "constraint '{}' is constant-infeasible",
                        label
                    ));
                }
            } else {
                y_only.push((*b, *c, label.clone()));
            }
        } else if *a > 0.0 {
            uppers.push((*b / *a, *c / *a, label.clone()));
        } else {
            lowers.push((*b / *a, *c / *a, label.clone()));
        }
    }
    // Combine: lower (c_l - b_l y) <= x <= (c_u - b_u y).
    for (bl, cl, ll) in &lowers {
        for (bu, cu, lu) in &uppers {
            // (c_l - b_l y) <= (c_u - b_u y)  ->  (b_u - b_l) y <= c_u - c_l.
            y_only.push((bu - bl, cu - cl, format!("{} x {}", ll, lu)));
        }
    }
    // 1D interval on y.
    let mut ylo = f64::NEG_INFINITY;
    let mut yhi = f64::INFINITY;
    let mut lo_lab = String::new();
    let mut hi_lab = String::new();
    for (b, c, label) in &y_only {
        if b.abs() <= eps {
            if *c < -eps {
                return LinFeas::Empty(format!("derived constraint '{}' infeasible", label));
            }
        } else if *b > 0.0 {
            if c / b < yhi {
                yhi = c / b;
                hi_lab = label.clone();
            }
        } else if c / b > ylo {
            ylo = c / b;
            lo_lab = label.clone();
        }
    }
    if ylo > yhi + eps {
        return LinFeas::Empty(format!(
            "y-interval empty between '{}' and '{}'",
            lo_lab, hi_lab
        ));
    }
    let y = pick_in_interval(ylo, yhi);
    // Back-substitute x.
    let mut xlo = f64::NEG_INFINITY;
    let mut xhi = f64::INFINITY;
    for (b, c, _) in &lowers {
        xlo = xlo.max(c - b * y);
    }
    for (b, c, _) in &uppers {
        xhi = xhi.min(c - b * y);
    }
    if xlo > xhi + eps {
        return LinFeas::Empty("x-interval empty after substitution".into());
    }
    LinFeas::Point(Vec2::new(pick_in_interval(xlo, xhi), y))
}

fn pick_in_interval(lo: f64, hi: f64) -> f64 {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (true, false) => lo + 1.0,
        (false, true) => hi - 1.0,
        (false, false) => 0.0,
    }
}

/// Exact maximum of a concave quadratic over the polytope `a x + b y <= c`.
/// Returns `None` when unbounded above on the polytope.
fn max_quadratic_over_polytope(q: &Quadratic, lins: &[(f64, f64, f64, String)]) -> Option<f64> {
    let scale: f64 = lins
        .iter()
        .map(|(a, b, c, _)| a.abs().max(b.abs()).max(c.abs()))
        .fold(1.0_f64, f64::max);
    let eps = 1e-10 * scale;
    let feasible = |p: Vec2| {
        lins.iter()
            .all(|(a, b, c, _)| a * p.x + b * p.y <= c + eps * (1.0 + p.norm()))
    };

    let mut best = f64::NEG_INFINITY;
    let (sup, argmax) = q.sup_over_plane();
    if let Some(p) = argmax {
        if feasible(p) {
            return Some(sup);
        }
    } else if sup.is_infinite() {
        // Concave q cannot have +inf sup unless it is flat in some direction;
        // treat as unbounded (no certificate).
        return None;
    }

    // Maximize along each active constraint line, clipped by the others.
    for (i, (a, b, c, _)) in lins.iter().enumerate() {
        let n = Vec2::new(*a, *b);
        let nn = n.norm_sq();
        if nn <= 1e-300 {
            continue;
        }
        let p0 = n.scale(*c / nn);
        let d = n.rot_ccw() / nn.sqrt();
        // Parameter interval from the other constraints.
        let mut tlo = f64::NEG_INFINITY;
        let mut thi = f64::INFINITY;
        let mut empty_line = false;
        for (j, (aj, bj, cj, _)) in lins.iter().enumerate() {
            if i == j {
                continue;
            }
            // (aj,bj).(p0 + t d) <= cj.
            let coef = aj * d.x + bj * d.y;
            let rhs = cj - (aj * p0.x + bj * p0.y);
            if coef.abs() <= 1e-14 * scale {
                if rhs < -eps {
                    empty_line = true;
                    break;
                }
            } else if coef > 0.0 {
                thi = thi.min(rhs / coef);
            } else {
                tlo = tlo.max(rhs / coef);
            }
        }
        if empty_line || tlo > thi {
            continue;
        }
        // 1D quadratic q(p0 + t d) = A t^2 + B t + C.
        let qp = q.quad_part();
        let aa = d.dot(qp.mul_vec(d));
        let bb = 2.0 * d.dot(qp.mul_vec(p0)) + 2.0 * q.lin_part().dot(d);
        let value_at = |t: f64| q.eval(p0 + d.scale(t));
        let mut cand_ts = vec![];
        if tlo.is_finite() {
            cand_ts.push(tlo);
        }
        if thi.is_finite() {
            cand_ts.push(thi);
        }
        if aa < -1e-300 {
            let mut tstar = -bb / (2.0 * aa);
            if tlo.is_finite() {
                tstar = tstar.max(tlo);
            }
            if thi.is_finite() {
                tstar = tstar.min(thi);
            }
            cand_ts.push(tstar);
        } else if (aa.abs() <= 1e-300 && bb.abs() > 0.0) || aa > 0.0 {
            // Linear growth or convex direction along an unbounded edge.
            if !(tlo.is_finite() && thi.is_finite()) {
                return None;
            }
        }
        for t in cand_ts {
            best = best.max(value_at(t));
        }
    }
    if best.is_finite() {
        Some(best)
    } else {
        // No usable edge: the polytope may be the whole plane or a slab
        // handled above; give up on certification.
        None
    }
}

/// Weak-duality bound: `sup { q2 : q1 >= 0 } <= min_lambda sup (q2 + lambda q1)`.
/// A negative return certifies that `{q1 >= 0} ∩ {q2 >= 0}` is empty.
fn pair_emptiness_bound(q1: &Quadratic, q2: &Quadratic) -> Option<f64> {
    let g = |lam: f64| -> f64 {
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = q2.m[i][j] + lam * q1.m[i][j];
            }
        }
        Quadratic::new(m).sup_over_plane().0
    };
    // Coarse log-spaced scan, then golden-section refinement.
    let mut best_lam = 0.0;
    let mut best = g(0.0);
    for k in -24..=24 {
        let lam = 10f64.powf(k as f64 * 0.25);
        let v = g(lam);
        if v < best {
            best = v;
            best_lam = lam;
        }
    }
    if !best.is_finite() {
        return None;
    }
    let (mut a, mut b) = (best_lam / 3.0, best_lam * 3.0 + 1e-12);
    let phi = 0.618_033_988_749_894_8;
    for _ in 0..200 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if g(c) < g(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let refined = g(0.5 * (a + b));
    Some(best.min(refined))
}

/// Convert an emptiness verdict into a certificate result, mapping
/// `Inconclusive` to an error so callers can never claim safety from it.
pub fn require_decision(e: Emptiness2) -> Result<(bool, String)> {
    match e {
        Emptiness2::Empty { certificate } => Ok((true, certificate)),
        Emptiness2::Nonempty { witness } => Ok((
            false,
            format!("witness ({:.6}, {:.6})", witness.x, witness.y),
        )),
        Emptiness2::Inconclusive { .. } => Err(Error::NumericalInconclusive),
    }
}
