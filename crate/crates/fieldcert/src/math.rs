//! Small dense linear algebra: 2-vectors, 2x2 matrices, and tiny solves.

use serde::{Deserialize, Serialize};
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

/// A point or vector in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    /// 90-degree clockwise rotation: (x, y) -> (y, -x).
    pub fn rot_cw(self) -> Vec2 {
        Vec2::new(self.y, -self.x)
    }

    /// 90-degree counterclockwise rotation: (x, y) -> (-y, x).
    pub fn rot_ccw(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn scale(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }

    pub fn dist(self, other: Vec2) -> f64 {
        (self - other).norm()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        self.scale(s)
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, s: f64) -> Vec2 {
        self.scale(1.0 / s)
    }
}

/// Dense 2x2 matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Mat2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Mat2 {
    pub fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat2 { a11, a12, a21, a22 }
    }

    pub fn identity() -> Self {
        Mat2::new(1.0, 0.0, 0.0, 1.0)
    }

    pub fn zero() -> Self {
        Mat2::new(0.0, 0.0, 0.0, 0.0)
    }

    pub fn diag(a: f64, b: f64) -> Self {
        Mat2::new(a, 0.0, 0.0, b)
    }

    /// Symmetric matrix from its upper triangle.
    pub fn sym(a11: f64, a12: f64, a22: f64) -> Self {
        Mat2::new(a11, a12, a12, a22)
    }

    pub fn det(self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(self) -> f64 {
        self.a11 + self.a22
    }

    pub fn transpose(self) -> Self {
        Mat2::new(self.a11, self.a21, self.a12, self.a22)
    }

    pub fn mul_vec(self, v: Vec2) -> Vec2 {
        Vec2::new(
            self.a11 * v.x + self.a12 * v.y,
            self.a21 * v.x + self.a22 * v.y,
        )
    }

    pub fn mul_mat(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a11 * o.a11 + self.a12 * o.a21,
            self.a11 * o.a12 + self.a12 * o.a22,
            self.a21 * o.a11 + self.a22 * o.a21,
            self.a21 * o.a12 + self.a22 * o.a22,
        )
    }

    pub fn add_mat(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a11 + o.a11,
            self.a12 + o.a12,
            self.a21 + o.a21,
            self.a22 + o.a22,
        )
    }

    pub fn scale(self, s: f64) -> Mat2 {
        Mat2::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }

    pub fn frobenius_dot(self, o: Mat2) -> f64 {
        self.a11 * o.a11 + self.a12 * o.a12 + self.a21 * o.a21 + self.a22 * o.a22
    }

    /// Rotation by angle `theta` (counterclockwise).
    pub fn rotation(theta: f64) -> Mat2 {
        let (s, c) = theta.sin_cos();
        Mat2::new(c, -s, s, c)
    }

    /// Eigenvalues of a symmetric matrix, ascending. Uses `(a11, a12, a22)` only.
    pub fn sym_eigenvalues(self) -> (f64, f64) {
        let m = 0.5 * (self.a11 + self.a22);
        let d = 0.5 * (self.a11 - self.a22);
        let r = (d * d + self.a12 * self.a12).sqrt();
        (m - r, m + r)
    }

    /// Eigen-decomposition of a symmetric matrix: `(lambda_lo, lambda_hi, v_lo, v_hi)`.
    pub fn sym_eigen(self) -> (f64, f64, Vec2, Vec2) {
        let (lo, hi) = self.sym_eigenvalues();
        // Eigenvector for `hi`; guard the diagonal case.
        let v_hi = if self.a12.abs() > 1e-300 {
            Vec2::new(self.a12, hi - self.a11)
        } else if self.a11 >= self.a22 {
            Vec2::new(1.0, 0.0)
        } else {
            Vec2::new(0.0, 1.0)
        };
        let n = v_hi.norm();
        let v_hi = if n > 0.0 {
            v_hi / n
        } else {
            Vec2::new(1.0, 0.0)
        };
        let v_lo = v_hi.rot_ccw();
        (lo, hi, v_lo, v_hi)
    }

    /// Clip a symmetric matrix to the positive semidefinite cone.
    pub fn sym_clip_psd(self) -> Mat2 {
        let (lo, hi, v_lo, v_hi) = self.sym_eigen();
        let lo = lo.max(0.0);
        let hi = hi.max(0.0);
        outer(v_lo, v_lo)
            .scale(lo)
            .add_mat(outer(v_hi, v_hi).scale(hi))
    }
}

pub fn outer(a: Vec2, b: Vec2) -> Mat2 {
    Mat2::new(a.x * b.x, a.x * b.y, a.y * b.x, a.y * b.y)
}

/// Solve a 2x2 real system. Returns `None` when the matrix is singular.
pub fn solve2(m: Mat2, rhs: Vec2) -> Option<Vec2> {
    let d = m.det();
    let scale = m
        .a11
        .abs()
        .max(m.a12.abs())
        .max(m.a21.abs())
        .max(m.a22.abs());
    if d.abs() <= 1e-300 || d.abs() < 1e-14 * scale * scale {
        return None;
    }
    Some(Vec2::new(
        (rhs.x * m.a22 - rhs.y * m.a12) / d,
        (m.a11 * rhs.y - m.a21 * rhs.x) / d,
    ))
}

/// Solve an n x n real system by Gaussian elimination with partial pivoting.
/// `a` is row major and consumed. Returns `None` on (near-)singularity.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    assert!(a.len() == n && a.iter().all(|r| r.len() == n));
    let scale: f64 = a
        .iter()
        .flat_map(|r| r.iter().map(|v| v.abs()))
        .fold(0.0_f64, f64::max)
        .max(1e-300);
    for col in 0..n {
        let (piv, piv_val) = (col..n)
            .map(|r| (r, a[r][col].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if piv_val < 1e-14 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for c in row + 1..n {
            s -= a[row][c] * x[c];
        }
        x[row] = s / a[row][row];
    }
    Some(x)
}

/// Infinity-norm condition number of a small dense matrix (exact inverse).
pub fn cond_inf(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let norm = |m: &[Vec<f64>]| -> f64 {
        m.iter()
            .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0_f64, f64::max)
    };
    // Invert column by column.
    let mut inv = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        match solve_dense(a.to_vec(), e) {
            Some(col) => {
                for i in 0..n {
                    inv[i][j] = col[i];
                }
            }
            None => return f64::INFINITY,
        }
    }
    norm(a) * norm(&inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rot_cw_matches_matrix() {
        // R_perp = [[0, 1], [-1, 0]] acting on (0, 1) gives (1, 0).
        let v = Vec2::new(0.0, 1.0).rot_cw();
        assert_eq!(v, Vec2::new(1.0, 0.0));
    }

    #[test]
    fn solve2_roundtrip() {
        let m = Mat2::new(2.0, 1.0, -1.0, 3.0);
        let x = Vec2::new(0.3, -0.7);
        let b = m.mul_vec(x);
        let got = solve2(m, b).unwrap();
        assert!((got - x).norm() < 1e-14);
    }

    #[test]
    fn solve_dense_4x4() {
        let a = vec![
            vec![4.0, 1.0, 0.0, 2.0],
            vec![1.0, 3.0, 1.0, 0.0],
            vec![0.0, 1.0, 5.0, 1.0],
            vec![2.0, 0.0, 1.0, 4.0],
        ];
        let x = vec![1.0, -2.0, 0.5, 3.0];
        let b: Vec<f64> = (0..4)
            .map(|i| (0..4).map(|j| a[i][j] * x[j]).sum())
            .collect();
        let got = solve_dense(a, b).unwrap();
        for i in 0..4 {
            assert!((got[i] - x[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn psd_clip() {
        let m = Mat2::sym(1.0, 2.0, 1.0); // eigenvalues -1, 3
        let c = m.sym_clip_psd();
        let (lo, _) = c.sym_eigenvalues();
        assert!(lo > -1e-14);
        // Clipped matrix should agree with m on the positive eigenspace.
        let (_, hi, _, v_hi) = m.sym_eigen();
        let mv = c.mul_vec(v_hi);
        assert!((mv - v_hi.scale(hi)).norm() < 1e-12);
    }
}
