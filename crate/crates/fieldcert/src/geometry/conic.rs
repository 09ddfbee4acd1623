//! Plane quadratic forms `q(p) = [x y 1] M [x y 1]^T` and the conic `{q = 0}`.

use crate::math::{solve2, Mat2, Vec2};
use serde::{Deserialize, Serialize};

/// Symmetric 3x3 homogeneous-coordinate matrix; the constraint is `q(p) >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadratic {
    /// Row-major symmetric 3x3 matrix.
    pub m: [[f64; 3]; 3],
}

/// Shape of `{q = 0}` after classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConicClass {
    Ellipse,
    Hyperbola,
    Parabola,
    CrossedLines,
    ParallelLines,
    SingleLine,
    PointOrEmpty,
    Everything,
}

impl Quadratic {
    pub fn new(m: [[f64; 3]; 3]) -> Self {
        Quadratic { m }
    }

    /// Build from `q(x,y) = qxx x^2 + qxy xy + qyy y^2 + lx x + ly y + c`.
    pub fn from_coeffs(qxx: f64, qxy: f64, qyy: f64, lx: f64, ly: f64, c: f64) -> Self {
        Quadratic {
            m: [
                [qxx, qxy / 2.0, lx / 2.0],
                [qxy / 2.0, qyy, ly / 2.0],
                [lx / 2.0, ly / 2.0, c],
            ],
        }
    }

    /// Disk `|p - center| <= r` as `r^2 - |p - c|^2 >= 0`.
    pub fn disk(center: Vec2, r: f64) -> Self {
        Quadratic::from_coeffs(
            -1.0,
            0.0,
            -1.0,
            2.0 * center.x,
            2.0 * center.y,
            r * r - center.norm_sq(),
        )
    }

    pub fn eval(&self, p: Vec2) -> f64 {
        let m = &self.m;
        m[0][0] * p.x * p.x
            + 2.0 * m[0][1] * p.x * p.y
            + m[1][1] * p.y * p.y
            + 2.0 * m[0][2] * p.x
            + 2.0 * m[1][2] * p.y
            + m[2][2]
    }

    pub fn gradient(&self, p: Vec2) -> Vec2 {
        let m = &self.m;
        Vec2::new(
            2.0 * (m[0][0] * p.x + m[0][1] * p.y + m[0][2]),
            2.0 * (m[0][1] * p.x + m[1][1] * p.y + m[1][2]),
        )
    }

    pub fn quad_part(&self) -> Mat2 {
        Mat2::sym(self.m[0][0], self.m[0][1], self.m[1][1])
    }

    pub fn lin_part(&self) -> Vec2 {
        Vec2::new(self.m[0][2], self.m[1][2])
    }

    /// Magnitude used for relative tolerances.
    pub fn scale(&self) -> f64 {
        let mut s: f64 = 0.0;
        for r in &self.m {
            for v in r {
                s = s.max(v.abs());
            }
        }
        s.max(1e-300)
    }

    /// Scale relevant for slack comparisons at a point.
    pub fn local_scale(&self, p: Vec2) -> f64 {
        let q = self.quad_part();
        let qn = q.a11.abs().max(q.a12.abs()).max(q.a22.abs());
        let r2 = p.norm_sq();
        1.0 + qn * r2 + 2.0 * self.lin_part().norm() * p.norm() + self.m[2][2].abs()
    }

    /// `true` when the quadratic part is negligible and the constraint is affine.
    pub fn is_affine(&self) -> bool {
        let q = self.quad_part();
        let qn = q.a11.abs().max(q.a12.abs()).max(q.a22.abs());
        qn <= 1e-13 * self.scale()
    }

    /// Quadratic part negative semidefinite (constraint region is convex).
    pub fn is_concave(&self) -> bool {
        let (_, hi) = self.quad_part().sym_eigenvalues();
        hi <= 1e-12 * self.scale()
    }

    pub fn classify(&self) -> ConicClass {
        let q = self.quad_part();
        let s = self.scale();
        let eps = 1e-12 * s;
        let (lo, hi) = q.sym_eigenvalues();
        if lo.abs() <= eps && hi.abs() <= eps {
            let l = self.lin_part();
            if l.norm() <= eps {
                return if self.m[2][2].abs() <= eps {
                    ConicClass::Everything
                } else {
                    ConicClass::PointOrEmpty
                };
            }
            return ConicClass::SingleLine;
        }
        if lo.abs() <= eps || hi.abs() <= eps {
            // Rank-one quadratic part.
            let (_, _, v_lo, v_hi) = q.sym_eigen();
            let (null_dir, _main) = if lo.abs() <= eps {
                (v_lo, v_hi)
            } else {
                (v_hi, v_lo)
            };
            let l = self.lin_part();
            if (l.dot(null_dir)).abs() > eps {
                return ConicClass::Parabola;
            }
            return ConicClass::ParallelLines;
        }
        let center = match solve2(q, -self.lin_part()) {
            Some(c) => c,
            None => return ConicClass::Parabola,
        };
        let k = self.eval(center);
        if lo * hi > 0.0 {
            if k.abs() <= eps * (1.0 + center.norm_sq()) {
                return ConicClass::PointOrEmpty;
            }
            // lambda u^2 + k = 0 solvable iff signs oppose.
            if k * lo < 0.0 {
                return ConicClass::Ellipse;
            }
            return ConicClass::PointOrEmpty;
        }
        if k.abs() <= eps * (1.0 + center.norm_sq()) {
            return ConicClass::CrossedLines;
        }
        ConicClass::Hyperbola
    }

    /// Critical point of `q` (the conic center) when the quadratic part is invertible.
    pub fn center(&self) -> Option<Vec2> {
        solve2(self.quad_part(), -self.lin_part())
    }

    /// Supremum of `q` over the plane: `(value, argmax if finite)`.
    pub fn sup_over_plane(&self) -> (f64, Option<Vec2>) {
        let q = self.quad_part();
        let s = self.scale();
        let eps = 1e-12 * s;
        let (lo, hi, v_lo, v_hi) = q.sym_eigen();
        let l = self.lin_part();
        if hi > eps {
            return (f64::INFINITY, None);
        }
        if hi.abs() <= eps {
            // Flat along v_hi.
            if (l.dot(v_hi)).abs() > eps {
                return (f64::INFINITY, None);
            }
            if lo.abs() <= eps {
                // Entirely affine-free: constant (linear part must vanish too).
                if l.norm() > eps {
                    return (f64::INFINITY, None);
                }
                return (self.m[2][2], Some(Vec2::ZERO));
            }
            // 1D concave along v_lo: maximize lo*u^2 + 2 (l.v_lo) u + m22.
            let b = l.dot(v_lo);
            let u = -b / lo;
            let p = v_lo.scale(u);
            return (self.eval(p), Some(p));
        }
        // Negative definite: unique critical point.
        match self.center() {
            Some(c) => (self.eval(c), Some(c)),
            None => (f64::NEG_INFINITY, None),
        }
    }

    /// Sampled points of the conic `{q = 0}`, as polyline chunks.
    ///
    /// `extent` bounds the parameter sweep of unbounded branches around the
    /// conic's own frame; `n` is the target total number of points.
    pub fn boundary_polylines(&self, n: usize, extent: f64) -> Vec<Vec<Vec2>> {
        let n = n.max(16);
        let q = self.quad_part();
        let s = self.scale();
        let eps = 1e-12 * s;
        let (lo, hi, v_lo, v_hi) = q.sym_eigen();
        let l = self.lin_part();

        match self.classify() {
            ConicClass::Ellipse => {
                let c = match self.center() {
                    Some(c) => c,
                    None => return vec![],
                };
                let k = self.eval(c);
                // lo u^2 + hi v^2 = -k in the eigenframe.
                let a = (-k / lo).sqrt();
                let b = (-k / hi).sqrt();
                let mut pts = Vec::with_capacity(n + 1);
                for i in 0..=n {
                    let th = 2.0 * std::f64::consts::PI * (i as f64) / (n as f64);
                    let p = c + v_lo.scale(a * th.cos()) + v_hi.scale(b * th.sin());
                    pts.push(p);
                }
                vec![pts]
            }
            ConicClass::Hyperbola => {
                let c = match self.center() {
                    Some(c) => c,
                    None => return vec![],
                };
                let k = self.eval(c);
                // lo u^2 + hi v^2 = -k with lo < 0 < hi.
                // Transverse axis: the direction whose eigenvalue has the same
                // sign as -k.
                let (et, vt, eo, vo) = if -k * hi > 0.0 {
                    (hi, v_hi, lo, v_lo)
                } else {
                    (lo, v_lo, hi, v_hi)
                };
                let a = (-k / et).sqrt(); // vertex offset along vt
                let b = (k / eo).sqrt(); // conjugate scale along vo
                let tmax = ((extent / a.max(1e-12)) + 2.0).ln().max(1.0);
                let half = n / 2;
                let mut out = vec![];
                for &sign in &[1.0, -1.0] {
                    let mut pts = Vec::with_capacity(half + 1);
                    for i in 0..=half {
                        let t = -tmax + 2.0 * tmax * (i as f64) / (half as f64);
                        let p = c + vt.scale(sign * a * t.cosh()) + vo.scale(b * t.sinh());
                        pts.push(p);
                    }
                    out.push(pts);
                }
                out
            }
            ConicClass::Parabola => {
                // Null direction u (no curvature), main direction v.
                let (null_dir, main_dir, lam) = if lo.abs() <= eps {
                    (v_lo, v_hi, hi)
                } else {
                    (v_hi, v_lo, lo)
                };
                let lu = l.dot(null_dir);
                let lv = l.dot(main_dir);
                // q = lam v^2 + 2 lu u + 2 lv v + m22 = 0 -> u(v).
                let mut pts = Vec::with_capacity(n + 1);
                for i in 0..=n {
                    let v = -extent + 2.0 * extent * (i as f64) / (n as f64);
                    let u = -(lam * v * v + 2.0 * lv * v + self.m[2][2]) / (2.0 * lu);
                    pts.push(null_dir.scale(u) + main_dir.scale(v));
                }
                vec![pts]
            }
            ConicClass::CrossedLines => {
                let c = match self.center() {
                    Some(c) => c,
                    None => return vec![],
                };
                // lo u^2 + hi v^2 = 0 -> v = +- sqrt(-lo/hi) u.
                let r = (-lo / hi).sqrt();
                let mut out = vec![];
                for &sl in &[r, -r] {
                    let dir = v_lo + v_hi.scale(sl);
                    let dir = dir / dir.norm();
                    out.push(line_points(c, dir, extent, n / 2));
                }
                out
            }
            ConicClass::ParallelLines => {
                let (null_dir, main_dir, lam) = if lo.abs() <= eps {
                    (v_lo, v_hi, hi)
                } else {
                    (v_hi, v_lo, lo)
                };
                let lv = l.dot(main_dir);
                // lam v^2 + 2 lv v + m22 = 0.
                let disc = lv * lv - lam * self.m[2][2];
                if disc < 0.0 {
                    return vec![];
                }
                let sq = disc.sqrt();
                let mut out = vec![];
                for &v in &[(-lv + sq) / lam, (-lv - sq) / lam] {
                    out.push(line_points(main_dir.scale(v), null_dir, extent, n / 2));
                }
                out
            }
            ConicClass::SingleLine => {
                let ln = l.norm();
                // 2 l.p + m22 = 0.
                let p0 = l.scale(-self.m[2][2] / (2.0 * ln * ln));
                let dir = l.rot_ccw() / ln;
                vec![line_points(p0, dir, extent, n)]
            }
            ConicClass::PointOrEmpty | ConicClass::Everything => vec![],
        }
    }

    /// Nearest point of `{q >= 0}` from `p`, for concave `q` (convex region).
    /// Returns `None` when the region is empty or the search fails.
    pub fn project_convex(&self, p: Vec2, extent: f64) -> Option<Vec2> {
        if self.eval(p) >= 0.0 {
            return Some(p);
        }
        // Seed from boundary samples, then polish with a KKT Newton iteration.
        let chunks = self.boundary_polylines(512, extent);
        let mut best: Option<Vec2> = None;
        let mut best_d = f64::INFINITY;
        for ch in &chunks {
            for &b in ch {
                let d = b.dist(p);
                if d < best_d {
                    best_d = d;
                    best = Some(b);
                }
            }
        }
        let mut y = best?;
        let h = self.quad_part().scale(2.0);
        let mut nu = {
            let g = self.gradient(y);
            let g2 = g.norm_sq();
            if g2 > 0.0 {
                (p - y).dot(g) / g2
            } else {
                0.0
            }
        };
        for _ in 0..60 {
            let g = self.gradient(y);
            let r1 = y - p - g.scale(nu);
            let r2 = self.eval(y);
            let scale = 1.0 + y.norm() + p.norm();
            if r1.norm() < 1e-14 * scale && r2.abs() < 1e-14 * self.local_scale(y) {
                break;
            }
            // Solve [I - nu H, -g; g^T, 0] [dy; dnu] = -[r1; r2].
            let a = Mat2::new(1.0 - nu * h.a11, -nu * h.a12, -nu * h.a21, 1.0 - nu * h.a22);
            let m3 = vec![
                vec![a.a11, a.a12, -g.x],
                vec![a.a21, a.a22, -g.y],
                vec![g.x, g.y, 0.0],
            ];
            let rhs = vec![-r1.x, -r1.y, -r2];
            match crate::math::solve_dense(m3, rhs) {
                Some(d) => {
                    y += Vec2::new(d[0], d[1]);
                    nu += d[2];
                }
                None => break,
            }
        }
        if self.eval(y).abs() <= 1e-9 * self.local_scale(y) {
            Some(y)
        } else {
            // Fall back to the best boundary sample.
            best
        }
    }
}

fn line_points(p0: Vec2, dir: Vec2, extent: f64, n: usize) -> Vec<Vec2> {
    let n = n.max(2);
    (0..=n)
        .map(|i| p0 + dir.scale(-extent + 2.0 * extent * (i as f64) / (n as f64)))
        .collect()
}
