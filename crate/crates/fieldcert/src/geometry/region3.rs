//! Convex regions in three free variables: a box, half-spaces, and positive
//! semidefiniteness of 2x2 symmetric matrices affine in the variables.

use crate::math::Mat2;
use serde::{Deserialize, Serialize};

pub const SLACK_TOL: f64 = 1e-12;
pub const WITNESS_TOL: f64 = 1e-10;

/// Affine scalar `c0 + cx x + cy y + cz z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Affine3 {
    pub c0: f64,
    pub cx: f64,
    pub cy: f64,
    pub cz: f64,
}

impl Affine3 {
    pub fn new(c0: f64, cx: f64, cy: f64, cz: f64) -> Self {
        Affine3 { c0, cx, cy, cz }
    }

    pub fn constant(c0: f64) -> Self {
        Affine3::new(c0, 0.0, 0.0, 0.0)
    }

    pub fn eval(&self, v: [f64; 3]) -> f64 {
        self.c0 + self.cx * v[0] + self.cy * v[1] + self.cz * v[2]
    }
}

/// `A(v) = [[a11, a12], [a12, a22]]` must be positive semidefinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdConstraint3 {
    pub a11: Affine3,
    pub a12: Affine3,
    pub a22: Affine3,
    pub label: String,
}

impl PsdConstraint3 {
    pub fn matrix(&self, v: [f64; 3]) -> Mat2 {
        Mat2::sym(self.a11.eval(v), self.a12.eval(v), self.a22.eval(v))
    }

    /// Minimum eigenvalue, the signed slack of the constraint.
    pub fn slack(&self, v: [f64; 3]) -> f64 {
        self.matrix(v).sym_eigenvalues().0
    }

    /// The projection trick requires each entry to depend on exactly one
    /// coordinate (a11 on x, a12 on y, a22 on z) with a common coefficient
    /// magnitude; our constructors all satisfy this.
    fn uniform_scale(&self) -> Option<f64> {
        let ok = self.a11.cy == 0.0
            && self.a11.cz == 0.0
            && self.a12.cx == 0.0
            && self.a12.cz == 0.0
            && self.a22.cx == 0.0
            && self.a22.cy == 0.0;
        if !ok {
            return None;
        }
        let s = self.a11.cx.abs();
        if s <= 1e-300 {
            return None;
        }
        let rel = |a: f64| (a.abs() - s).abs() <= 1e-9 * s;
        if rel(self.a12.cy) && rel(self.a22.cz) {
            Some(s)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Linear3 {
    /// `a . v <= c`.
    pub a: [f64; 3],
    pub c: f64,
    pub label: String,
}

/// Box bounds, half-spaces, and PSD constraints; convex by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region3 {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    pub linear: Vec<Linear3>,
    pub psd: Vec<PsdConstraint3>,
}

impl Default for Region3 {
    fn default() -> Self {
        Region3 {
            lo: [f64::NEG_INFINITY; 3],
            hi: [f64::INFINITY; 3],
            linear: vec![],
            psd: vec![],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Emptiness3 {
    Empty { certificate: String },
    Nonempty { witness: [f64; 3] },
    Inconclusive { reason: String },
}

impl Region3 {
    pub fn clamp_lower(&mut self, axis: usize, v: f64) {
        self.lo[axis] = self.lo[axis].max(v);
    }

    pub fn clamp_upper(&mut self, axis: usize, v: f64) {
        self.hi[axis] = self.hi[axis].min(v);
    }

    /// Signed slacks: box (per axis, two-sided), then linear, then PSD.
    pub fn slacks(&self, v: [f64; 3]) -> Vec<f64> {
        let mut out = vec![];
        for i in 0..3 {
            out.push(if self.lo[i].is_finite() {
                v[i] - self.lo[i]
            } else {
                f64::INFINITY
            });
            out.push(if self.hi[i].is_finite() {
                self.hi[i] - v[i]
            } else {
                f64::INFINITY
            });
        }
        for l in &self.linear {
            out.push(l.c - (l.a[0] * v[0] + l.a[1] * v[1] + l.a[2] * v[2]));
        }
        for p in &self.psd {
            out.push(p.slack(v));
        }
        out
    }

    pub fn contains(&self, v: [f64; 3]) -> bool {
        self.contains_tol(v, SLACK_TOL)
    }

    pub fn contains_tol(&self, v: [f64; 3], tol: f64) -> bool {
        let scale = self
            .scale()
            .max(v.iter().fold(0.0f64, |m, x| m.max(x.abs())));
        self.slacks(v).iter().all(|&s| s >= -tol * (1.0 + scale))
    }

    pub fn intersect(&self, other: &Region3) -> Region3 {
        let mut out = self.clone();
        for i in 0..3 {
            out.lo[i] = out.lo[i].max(other.lo[i]);
            out.hi[i] = out.hi[i].min(other.hi[i]);
        }
        out.linear.extend(other.linear.iter().cloned());
        out.psd.extend(other.psd.iter().cloned());
        out
    }

    fn scale(&self) -> f64 {
        let mut s = 1.0f64;
        for i in 0..3 {
            if self.lo[i].is_finite() {
                s = s.max(self.lo[i].abs());
            }
            if self.hi[i].is_finite() {
                s = s.max(self.hi[i].abs());
            }
        }
        for p in &self.psd {
            s = s
                .max(p.a11.c0.abs())
                .max(p.a12.c0.abs())
                .max(p.a22.c0.abs());
        }
        for l in &self.linear {
            s = s.max(l.c.abs());
        }
        s
    }

    /// Decide emptiness by simultaneous projections onto the constraint sets
    /// (run in coordinates where every projection is exact). `Empty` is only
    /// declared at a stationary positive gap; a returned witness is verified.
    pub fn is_empty(&self) -> Emptiness3 {
        for i in 0..3 {
            if self.lo[i] > self.hi[i] + SLACK_TOL * (1.0 + self.scale()) {
                return Emptiness3::Empty {
                    certificate: format!(
                        "box interval on axis {} is empty ({} > {})",
                        i, self.lo[i], self.hi[i]
                    ),
                };
            }
        }
        for p in &self.psd {
            if p.uniform_scale().is_none() {
                return Emptiness3::Inconclusive {
                    reason: format!(
                        "psd constraint '{}' lacks the uniform affine structure",
                        p.label
                    ),
                };
            }
        }

        // Work in w = (x, sqrt(2) y, z): the PSD eigenvalue clip becomes the
        // exact nearest-point projection in this metric.
        let rt2 = std::f64::consts::SQRT_2;
        let scale = self.scale();

        let mut start = [0.0f64; 3];
        for i in 0..3 {
            let lo = if self.lo[i].is_finite() {
                self.lo[i]
            } else {
                -1.0
            };
            let hi = if self.hi[i].is_finite() {
                self.hi[i]
            } else {
                1.0
            };
            start[i] = 0.5 * (lo + hi);
        }
        let mut w = [start[0], start[1] * rt2, start[2]];

        let n_sets = 1 + self.linear.len() + self.psd.len();
        let mut stalled = 0usize;
        for iter in 0..100_000usize {
            let mut acc = [0.0f64; 3];
            let mut f = 0.0f64;
            for k in 0..n_sets {
                let pw = self.project_set(k, w, rt2);
                f += (pw[0] - w[0]).powi(2) + (pw[1] - w[1]).powi(2) + (pw[2] - w[2]).powi(2);
                for i in 0..3 {
                    acc[i] += pw[i];
                }
            }
            let mut next = [0.0f64; 3];
            for i in 0..3 {
                next[i] = acc[i] / n_sets as f64;
            }
            let step =
                ((next[0] - w[0]).powi(2) + (next[1] - w[1]).powi(2) + (next[2] - w[2]).powi(2))
                    .sqrt();
            w = next;
            if iter % 64 == 0 {
                let v = [w[0], w[1] / rt2, w[2]];
                if self.contains_tol(v, WITNESS_TOL) {
                    return Emptiness3::Nonempty { witness: v };
                }
            }
            if step < 1e-14 * (1.0 + scale) {
                stalled += 1;
                if stalled > 8 {
                    let v = [w[0], w[1] / rt2, w[2]];
                    let rms = (f / n_sets as f64).sqrt();
                    if self.contains_tol(v, WITNESS_TOL) {
                        return Emptiness3::Nonempty { witness: v };
                    }
                    // The averaged limit can sit a hair outside every set;
                    // a cyclic projection sweep lands inside when the
                    // intersection is nonempty.
                    if let Some(v) = self.cyclic_witness(w, rt2) {
                        return Emptiness3::Nonempty { witness: v };
                    }
                    if rms > 1e-8 * (1.0 + scale) {
                        return Emptiness3::Empty {
                            certificate: format!(
                                "constraint sets separated by rms gap {:.3e}",
                                rms
                            ),
                        };
                    }
                    return Emptiness3::Inconclusive {
                        reason: "stationary within the tolerance band".into(),
                    };
                }
            } else {
                stalled = 0;
            }
        }
        let v = [w[0], w[1] / rt2, w[2]];
        if self.contains_tol(v, WITNESS_TOL) {
            return Emptiness3::Nonempty { witness: v };
        }
        if let Some(v) = self.cyclic_witness(w, rt2) {
            return Emptiness3::Nonempty { witness: v };
        }
        Emptiness3::Inconclusive {
            reason: "projection iteration cap reached".into(),
        }
    }

    /// Project the `k`-th constraint set in the scaled coordinates.
    fn project_set(&self, k: usize, w: [f64; 3], rt2: f64) -> [f64; 3] {
        if k == 0 {
            let mut pw = w;
            pw[0] = pw[0].clamp(self.lo[0], self.hi[0]);
            pw[1] = pw[1].clamp(self.lo[1] * rt2, self.hi[1] * rt2);
            pw[2] = pw[2].clamp(self.lo[2], self.hi[2]);
            return pw;
        }
        if k - 1 < self.linear.len() {
            let l = &self.linear[k - 1];
            let ap = [l.a[0], l.a[1] / rt2, l.a[2]];
            let nn = ap[0] * ap[0] + ap[1] * ap[1] + ap[2] * ap[2];
            let mut pw = w;
            if nn > 1e-300 {
                let viol = ap[0] * w[0] + ap[1] * w[1] + ap[2] * w[2] - l.c;
                if viol > 0.0 {
                    for i in 0..3 {
                        pw[i] -= ap[i] * viol / nn;
                    }
                }
            }
            return pw;
        }
        let p = &self.psd[k - 1 - self.linear.len()];
        let v = [w[0], w[1] / rt2, w[2]];
        let clipped = p.matrix(v).sym_clip_psd();
        let x_new = (clipped.a11 - p.a11.c0) / p.a11.cx;
        let y_new = (0.5 * (clipped.a12 + clipped.a21) - p.a12.c0) / p.a12.cy;
        let z_new = (clipped.a22 - p.a22.c0) / p.a22.cz;
        [x_new, y_new * rt2, z_new]
    }

    /// Sequential projections from `w`; converges into a nonempty
    /// intersection and is used only to produce a verified witness.
    fn cyclic_witness(&self, mut w: [f64; 3], rt2: f64) -> Option<[f64; 3]> {
        let n_sets = 1 + self.linear.len() + self.psd.len();
        for round in 0..2000 {
            for k in 0..n_sets {
                w = self.project_set(k, w, rt2);
            }
            if round % 8 == 0 {
                let v = [w[0], w[1] / rt2, w[2]];
                if self.contains_tol(v, WITNESS_TOL) {
                    return Some(v);
                }
            }
        }
        let v = [w[0], w[1] / rt2, w[2]];
        if self.contains_tol(v, WITNESS_TOL) {
            return Some(v);
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn psd_direct(label: &str) -> PsdConstraint3 {
        // [[x, y], [y, z]] >= 0.
        PsdConstraint3 {
            a11: Affine3::new(0.0, 1.0, 0.0, 0.0),
            a12: Affine3::new(0.0, 0.0, 1.0, 0.0),
            a22: Affine3::new(0.0, 0.0, 0.0, 1.0),
            label: label.into(),
        }
    }

    #[test]
    fn box_and_psd_nonempty() {
        let mut r = Region3::default();
        r.lo = [0.0, -1.0, 0.0];
        r.hi = [2.0, 1.0, 2.0];
        r.psd.push(psd_direct("cs"));
        match r.is_empty() {
            Emptiness3::Nonempty { witness } => assert!(r.contains_tol(witness, 1e-9)),
            other => panic!("expected nonempty, got {:?}", other),
        }
    }

    #[test]
    fn contradictory_box_is_empty() {
        let mut r = Region3::default();
        r.lo = [1.0, 0.0, 0.0];
        r.hi = [0.0, 1.0, 1.0];
        assert!(matches!(r.is_empty(), Emptiness3::Empty { .. }));
    }

    #[test]
    fn psd_excluded_by_box() {
        // Box forces x in [-2, -1] while PSD needs x >= 0.
        let mut r = Region3::default();
        r.lo = [-2.0, 0.0, 0.0];
        r.hi = [-1.0, 0.0, 1.0];
        r.psd.push(psd_direct("cs"));
        assert!(matches!(r.is_empty(), Emptiness3::Empty { .. }));
    }

    #[test]
    fn midpoint_of_witnesses_is_member() {
        let mut r = Region3::default();
        r.lo = [0.0, f64::NEG_INFINITY, 0.0];
        r.hi = [4.0, f64::INFINITY, 4.0];
        r.psd.push(psd_direct("cs"));
        let a = [1.0, 0.5, 1.0];
        let b = [4.0, -1.0, 4.0];
        assert!(r.contains(a) && r.contains(b));
        let mid = [2.5, -0.25, 2.5];
        assert!(r.contains(mid));
    }
}
