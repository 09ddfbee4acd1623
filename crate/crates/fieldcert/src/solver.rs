//! Brute-force forward solver: two-phase conductivity on a rectangular grid
//! of square cells, real or complex, with Dirichlet boundary potentials.
//!
//! Five-point finite volumes with harmonic-mean face conductivities, which
//! makes grid-aligned laminates exact up to the linear-solver tolerance. Used
//! to synthesize boundary datasets and exact interior statistics for tests.

use crate::boundary::{BoundaryDataset, BoundarySample};
use crate::error::{Error, Result};
use crate::math::Vec2;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Scalar admitted by the solver: real or complex conductivity and fields.
pub trait Scalar:
    Copy
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + std::ops::Neg<Output = Self>
    + Default
{
    fn from_f64(v: f64) -> Self;
    fn modulus(self) -> f64;
    fn re(self) -> f64;
    fn im(self) -> f64;
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn re(self) -> f64 {
        self
    }
    fn im(self) -> f64 {
        0.0
    }
}

impl Scalar for Complex64 {
    fn from_f64(v: f64) -> Self {
        Complex64::new(v, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn re(self) -> f64 {
        self.re
    }
    fn im(self) -> f64 {
        self.im
    }
}

/// Rectangular grid of square cells, each assigned phase 1 or 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub nx: usize,
    pub ny: usize,
    /// Cell size.
    pub h: f64,
    /// Row-major phase indices (1 or 2), cell `(i, j)` at `j * nx + i`.
    pub phase: Vec<u8>,
}

impl PhaseGrid {
    pub fn new(nx: usize, ny: usize, h: f64, phase: Vec<u8>) -> Result<Self> {
        if nx == 0 || ny == 0 || !(h > 0.0) {
            return Err(Error::InvalidInput(
                "grid dimensions and cell size must be positive".into(),
            ));
        }
        if phase.len() != nx * ny {
            return Err(Error::InvalidInput(
                "phase vector length must be nx*ny".into(),
            ));
        }
        if phase.iter().any(|&p| p != 1 && p != 2) {
            return Err(Error::InvalidInput("phase indices must be 1 or 2".into()));
        }
        Ok(PhaseGrid { nx, ny, h, phase })
    }

    pub fn uniform(nx: usize, ny: usize, h: f64, phase: u8) -> Self {
        PhaseGrid {
            nx,
            ny,
            h,
            phase: vec![phase; nx * ny],
        }
    }

    /// Layers normal to x, phase 1 occupying the fraction `f1` on the left.
    pub fn laminate_x(nx: usize, ny: usize, h: f64, f1: f64) -> Self {
        let cut = f1 * nx as f64;
        let phase = (0..nx * ny)
            .map(|idx| {
                if ((idx % nx) as f64 + 0.5) < cut {
                    1
                } else {
                    2
                }
            })
            .collect();
        PhaseGrid { nx, ny, h, phase }
    }

    pub fn checkerboard(nx: usize, ny: usize, h: f64, block: usize) -> Self {
        let block = block.max(1);
        let phase = (0..nx * ny)
            .map(|idx| {
                let i = (idx % nx) / block;
                let j = (idx / nx) / block;
                if (i + j) % 2 == 0 {
                    1
                } else {
                    2
                }
            })
            .collect();
        PhaseGrid { nx, ny, h, phase }
    }

    /// Random blocky geometry: a coarse `base x base` mask upsampled to the
    /// grid, so refinement preserves the continuum geometry.
    pub fn random_blocks(nx: usize, ny: usize, h: f64, base: usize, p1: f64, seed: u64) -> Self {
        let base = base.max(1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mask: Vec<u8> = (0..base * base)
            .map(|_| if rng.random::<f64>() < p1 { 1 } else { 2 })
            .collect();
        let phase = (0..nx * ny)
            .map(|idx| {
                let i = ((idx % nx) * base / nx).min(base - 1);
                let j = ((idx / nx) * base / ny).min(base - 1);
                mask[j * base + i]
            })
            .collect();
        PhaseGrid { nx, ny, h, phase }
    }

    /// Each cell split into four; the continuum geometry is unchanged.
    pub fn refine(&self) -> PhaseGrid {
        let nx = self.nx * 2;
        let ny = self.ny * 2;
        let phase = (0..nx * ny)
            .map(|idx| {
                let i = (idx % nx) / 2;
                let j = (idx / nx) / 2;
                self.phase[j * self.nx + i]
            })
            .collect();
        PhaseGrid {
            nx,
            ny,
            h: self.h / 2.0,
            phase,
        }
    }

    /// Parse lines of '1'/'2' characters (top row first).
    pub fn from_mask(text: &str, h: f64) -> Result<Self> {
        let rows: Vec<&str> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect();
        if rows.is_empty() {
            return Err(Error::InvalidInput("empty grid mask".into()));
        }
        let nx = rows[0].len();
        let ny = rows.len();
        let mut phase = vec![0u8; nx * ny];
        for (r, line) in rows.iter().enumerate() {
            if line.len() != nx {
                return Err(Error::InvalidInput(format!(
                    "row {} has length {}, expected {}",
                    r,
                    line.len(),
                    nx
                )));
            }
            for (i, ch) in line.chars().enumerate() {
                let p = match ch {
                    '1' => 1,
                    '2' => 2,
                    _ => return Err(Error::InvalidInput(format!("bad phase character '{}'", ch))),
                };
                phase[(ny - 1 - r) * nx + i] = p;
            }
        }
        PhaseGrid::new(nx, ny, h, phase)
    }

    /// Mask text (top row first), inverse of `from_mask`.
    pub fn to_mask(&self) -> String {
        let mut out = String::new();
        for j in (0..self.ny).rev() {
            for i in 0..self.nx {
                out.push(if self.phase[self.idx(i, j)] == 1 {
                    '1'
                } else {
                    '2'
                });
            }
            out.push('\n');
        }
        out
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new((i as f64 + 0.5) * self.h, (j as f64 + 0.5) * self.h)
    }

    pub fn width(&self) -> f64 {
        self.nx as f64 * self.h
    }

    pub fn height(&self) -> f64 {
        self.ny as f64 * self.h
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn volume_fractions(&self) -> [f64; 2] {
        let n1 = self.phase.iter().filter(|&&p| p == 1).count();
        let f1 = n1 as f64 / (self.nx * self.ny) as f64;
        [f1, 1.0 - f1]
    }

    /// A cell touching the other phase or the domain boundary.
    pub fn is_phase_boundary_cell(&self, i: usize, j: usize) -> bool {
        if i == 0 || j == 0 || i + 1 == self.nx || j + 1 == self.ny {
            return true;
        }
        let p = self.phase[self.idx(i, j)];
        self.phase[self.idx(i - 1, j)] != p
            || self.phase[self.idx(i + 1, j)] != p
            || self.phase[self.idx(i, j - 1)] != p
            || self.phase[self.idx(i, j + 1)] != p
    }
}

/// Converged solution: cell potentials and reconstructed cell fields.
#[derive(Debug, Clone)]
pub struct FieldSolution<S: Scalar> {
    pub v: Vec<S>,
    /// Cell-centered electric field.
    pub e: Vec<[S; 2]>,
    /// Cell-centered current.
    pub j: Vec<[S; 2]>,
    /// Relative linear-system residual at convergence.
    pub residual: f64,
}

fn harmonic<S: Scalar>(a: S, b: S) -> S {
    let two = S::from_f64(2.0);
    two * a * b / (a + b)
}

struct Stencil<S: Scalar> {
    diag: Vec<S>,
    east: Vec<S>,
    north: Vec<S>,
    rhs: Vec<S>,
}

fn assemble<S: Scalar>(grid: &PhaseGrid, sigma: [S; 2], bc: &dyn Fn(f64, f64) -> S) -> Stencil<S> {
    let (nx, ny, h) = (grid.nx, grid.ny, grid.h);
    let n = nx * ny;
    let sig = |idx: usize| sigma[(grid.phase[idx] - 1) as usize];
    let two = S::from_f64(2.0);
    let mut st = Stencil {
        diag: vec![S::default(); n],
        east: vec![S::default(); n],
        north: vec![S::default(); n],
        rhs: vec![S::default(); n],
    };
    for j in 0..ny {
        for i in 0..nx {
            let c = grid.idx(i, j);
            let sc = sig(c);
            if i + 1 < nx {
                let t = harmonic(sc, sig(grid.idx(i + 1, j)));
                st.east[c] = t;
                st.diag[c] = st.diag[c] + t;
                let e = grid.idx(i + 1, j);
                st.diag[e] = st.diag[e] + t;
            } else {
                let t = two * sc;
                st.diag[c] = st.diag[c] + t;
                st.rhs[c] = st.rhs[c] + t * bc(grid.width(), (j as f64 + 0.5) * h);
            }
            if i == 0 {
                let t = two * sc;
                st.diag[c] = st.diag[c] + t;
                st.rhs[c] = st.rhs[c] + t * bc(0.0, (j as f64 + 0.5) * h);
            }
            if j + 1 < ny {
                let t = harmonic(sc, sig(grid.idx(i, j + 1)));
                st.north[c] = t;
                st.diag[c] = st.diag[c] + t;
                let nn = grid.idx(i, j + 1);
                st.diag[nn] = st.diag[nn] + t;
            } else {
                let t = two * sc;
                st.diag[c] = st.diag[c] + t;
                st.rhs[c] = st.rhs[c] + t * bc((i as f64 + 0.5) * h, grid.height());
            }
            if j == 0 {
                let t = two * sc;
                st.diag[c] = st.diag[c] + t;
                st.rhs[c] = st.rhs[c] + t * bc((i as f64 + 0.5) * h, 0.0);
            }
        }
    }
    st
}

fn apply_stencil<S: Scalar>(grid: &PhaseGrid, st: &Stencil<S>, x: &[S], out: &mut [S]) {
    let nx = grid.nx;
    let ny = grid.ny;
    for j in 0..ny {
        for i in 0..nx {
            let c = j * nx + i;
            let mut acc = st.diag[c] * x[c];
            if i + 1 < nx {
                acc = acc - st.east[c] * x[c + 1];
            }
            if i > 0 {
                acc = acc - st.east[c - 1] * x[c - 1];
            }
            if j + 1 < ny {
                acc = acc - st.north[c] * x[c + nx];
            }
            if j > 0 {
                acc = acc - st.north[c - nx] * x[c - nx];
            }
            out[c] = acc;
        }
    }
}

/// Solve the conductivity problem with the Dirichlet potential `bc(x, y)`
/// applied at boundary face centers. Jacobi-preconditioned conjugate
/// gradients with the unconjugated inner product (plain PCG for real data,
/// COCG for the complex-symmetric case).
pub fn solve<S: Scalar>(
    grid: &PhaseGrid,
    sigma: [S; 2],
    bc: &dyn Fn(f64, f64) -> S,
) -> Result<FieldSolution<S>> {
    for s in sigma {
        if s.re() <= 0.0 {
            return Err(Error::InvalidInput(
                "conductivities must have positive real part".into(),
            ));
        }
    }
    let n = grid.nx * grid.ny;
    let st = assemble(grid, sigma, bc);

    let dot = |a: &[S], b: &[S]| -> S {
        let mut acc = S::default();
        for (x, y) in a.iter().zip(b) {
            acc = acc + *x * *y;
        }
        acc
    };
    let norm = |a: &[S]| -> f64 { a.iter().map(|v| v.modulus().powi(2)).sum::<f64>().sqrt() };

    let bnorm = norm(&st.rhs).max(1e-300);
    let mut x = vec![S::default(); n];
    let mut r = st.rhs.clone();
    let mut z: Vec<S> = r.iter().zip(&st.diag).map(|(ri, di)| *ri / *di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![S::default(); n];
    let tol = 1e-13;
    let max_iter = (80 * (grid.nx + grid.ny)).max(400);
    let mut residual = norm(&r) / bnorm;
    for _ in 0..max_iter {
        if residual <= tol {
            break;
        }
        apply_stencil(grid, &st, &p, &mut ap);
        let pap = dot(&p, &ap);
        if pap.modulus() <= 1e-300 {
            break;
        }
        let alpha = rz / pap;
        for k in 0..n {
            x[k] = x[k] + alpha * p[k];
            r[k] = r[k] - alpha * ap[k];
        }
        for k in 0..n {
            z[k] = r[k] / st.diag[k];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
        residual = norm(&r) / bnorm;
    }
    if residual > 1e-10 {
        return Err(Error::SolverDiverged(residual));
    }

    // Cell fields from face fluxes: flux densities are continuous across
    // faces, so averaging them per cell and dividing by the cell conductivity
    // keeps grid-aligned laminates exact.
    let (nx, ny, h) = (grid.nx, grid.ny, grid.h);
    let sig = |idx: usize| sigma[(grid.phase[idx] - 1) as usize];
    let two = S::from_f64(2.0);
    let hh = S::from_f64(h);
    let half = S::from_f64(0.5);
    let mut e = vec![[S::default(); 2]; n];
    let mut jf = vec![[S::default(); 2]; n];
    for j in 0..ny {
        for i in 0..nx {
            let c = grid.idx(i, j);
            let sc = sig(c);
            let qw = if i == 0 {
                two * sc * (bc(0.0, (j as f64 + 0.5) * h) - x[c]) / hh
            } else {
                st.east[c - 1] * (x[c - 1] - x[c]) / hh
            };
            let qe = if i + 1 == nx {
                two * sc * (x[c] - bc(grid.width(), (j as f64 + 0.5) * h)) / hh
            } else {
                st.east[c] * (x[c] - x[c + 1]) / hh
            };
            let qs = if j == 0 {
                two * sc * (bc((i as f64 + 0.5) * h, 0.0) - x[c]) / hh
            } else {
                st.north[c - nx] * (x[c - nx] - x[c]) / hh
            };
            let qn = if j + 1 == ny {
                two * sc * (x[c] - bc((i as f64 + 0.5) * h, grid.height())) / hh
            } else {
                st.north[c] * (x[c] - x[c + nx]) / hh
            };
            let jx = (qw + qe) * half;
            let jy = (qs + qn) * half;
            jf[c] = [jx, jy];
            e[c] = [jx / sc, jy / sc];
        }
    }

    Ok(FieldSolution {
        v: x,
        e,
        j: jf,
        residual,
    })
}

/// Maximum relative net flux out of any cell (linear-system residual per
/// cell); near zero for a converged solution.
pub fn max_divergence<S: Scalar>(
    grid: &PhaseGrid,
    sigma: [S; 2],
    sol: &FieldSolution<S>,
    bc: &dyn Fn(f64, f64) -> S,
) -> f64 {
    let st = assemble(grid, sigma, bc);
    let n = grid.nx * grid.ny;
    let mut out = vec![S::default(); n];
    apply_stencil(grid, &st, &sol.v, &mut out);
    let scale = st
        .diag
        .iter()
        .zip(&sol.v)
        .map(|(d, v)| d.modulus() * v.modulus())
        .fold(1e-300, f64::max);
    out.iter()
        .zip(&st.rhs)
        .map(|(a, b)| (*a - *b).modulus())
        .fold(0.0, f64::max)
        / scale
}

/// Extract the boundary dataset (face-center potentials and outward fluxes)
/// plus per-sample phase labels, walking counterclockwise from the origin.
/// `part` selects the real or imaginary component of complex data.
pub fn extract_boundary_dataset<S: Scalar>(
    grid: &PhaseGrid,
    sigma: [S; 2],
    sol: &FieldSolution<S>,
    bc: &dyn Fn(f64, f64) -> S,
    part: impl Fn(S) -> f64,
    label: &str,
) -> (BoundaryDataset, Vec<u8>) {
    let (nx, ny, h) = (grid.nx, grid.ny, grid.h);
    let sig = |idx: usize| sigma[(grid.phase[idx] - 1) as usize];
    let two = S::from_f64(2.0);
    let hh = S::from_f64(h);
    let mut samples = vec![];
    let mut phases = vec![];
    let mut emit = |c: usize, pos: Vec2, tangent: Vec2, normal: Vec2| {
        let vb = bc(pos.x, pos.y);
        let j_out = two * sig(c) * (sol.v[c] - vb) / hh;
        samples.push(BoundarySample {
            position: pos,
            tangent,
            normal,
            ds: h,
            v: part(vb),
            j_n: part(j_out),
            u: None,
            traction: None,
        });
        phases.push(grid.phase[c]);
    };
    for i in 0..nx {
        emit(
            grid.idx(i, 0),
            Vec2::new((i as f64 + 0.5) * h, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, -1.0),
        );
    }
    for j in 0..ny {
        emit(
            grid.idx(nx - 1, j),
            Vec2::new(grid.width(), (j as f64 + 0.5) * h),
            Vec2::new(0.0, 1.0),
            Vec2::new(1.0, 0.0),
        );
    }
    for i in (0..nx).rev() {
        emit(
            grid.idx(i, ny - 1),
            Vec2::new((i as f64 + 0.5) * h, grid.height()),
            Vec2::new(-1.0, 0.0),
            Vec2::new(0.0, 1.0),
        );
    }
    for j in (0..ny).rev() {
        emit(
            grid.idx(0, j),
            Vec2::new(0.0, (j as f64 + 0.5) * h),
            Vec2::new(0.0, -1.0),
            Vec2::new(-1.0, 0.0),
        );
    }
    (
        BoundaryDataset {
            area: grid.area(),
            samples,
            label: label.into(),
        },
        phases,
    )
}

/// Discrete dissipated power `(1/|Omega|) * sum_faces flux * dV`, the exact
/// counterpart of the boundary formula for the converged linear system.
pub fn discrete_power<S: Scalar>(
    grid: &PhaseGrid,
    sigma: [S; 2],
    sol: &FieldSolution<S>,
    bc: &dyn Fn(f64, f64) -> S,
) -> S {
    let (nx, ny, h) = (grid.nx, grid.ny, grid.h);
    let sig = |idx: usize| sigma[(grid.phase[idx] - 1) as usize];
    let two = S::from_f64(2.0);
    let mut acc = S::default();
    for j in 0..ny {
        for i in 0..nx {
            let c = grid.idx(i, j);
            let sc = sig(c);
            if i + 1 < nx {
                let t = harmonic(sc, sig(grid.idx(i + 1, j)));
                let dv = sol.v[c] - sol.v[c + 1];
                acc = acc + t * dv * dv;
            } else {
                let dv = sol.v[c] - bc(grid.width(), (j as f64 + 0.5) * h);
                acc = acc + two * sc * dv * dv;
            }
            if i == 0 {
                let dv = sol.v[c] - bc(0.0, (j as f64 + 0.5) * h);
                acc = acc + two * sc * dv * dv;
            }
            if j + 1 < ny {
                let t = harmonic(sc, sig(grid.idx(i, j + 1)));
                let dv = sol.v[c] - sol.v[c + nx];
                acc = acc + t * dv * dv;
            } else {
                let dv = sol.v[c] - bc((i as f64 + 0.5) * h, grid.height());
                acc = acc + two * sc * dv * dv;
            }
            if j == 0 {
                let dv = sol.v[c] - bc((i as f64 + 0.5) * h, 0.0);
                acc = acc + two * sc * dv * dv;
            }
        }
    }
    acc / S::from_f64(grid.area())
}

/// Two solves with identical Dirichlet data: base and perturbed conductivity.
pub fn perturbed_pair<S: Scalar>(
    grid: &PhaseGrid,
    sigma: [S; 2],
    dsigma: [S; 2],
    bc: &dyn Fn(f64, f64) -> S,
) -> Result<(FieldSolution<S>, FieldSolution<S>)> {
    let base = solve(grid, sigma, bc)?;
    let pert = solve(grid, [sigma[0] + dsigma[0], sigma[1] + dsigma[1]], bc)?;
    Ok((base, pert))
}

/// Exact interior statistics for up to two real vector fields (two real
/// boundary conditions, or the real/imaginary parts of one complex solve).
#[derive(Debug, Clone)]
pub struct InteriorStats {
    pub fractions: [f64; 2],
    pub n_fields: usize,
    /// `<chi_alpha E_m>`, indexed `[phase][field]`.
    pub avg_chi_e: [[Vec2; 2]; 2],
    /// `A_mn^(alpha) = <E_m^(alpha) . E_n^(alpha)>`, indexed `[phase][m][n]`.
    pub a_mn: [[[f64; 2]; 2]; 2],
    /// `<E_m . J_n>`, indexed `[m][n]`.
    pub power: [[f64; 2]; 2],
    /// Max `|E_m|` over all cells of a phase, `[phase][field]`.
    pub max_e: [[f64; 2]; 2],
    /// Max over interior cells of a phase (not touching the other phase or
    /// the domain boundary).
    pub max_e_interior: [[f64; 2]; 2],
    /// Max over phase-boundary cells.
    pub max_e_boundary: [[f64; 2]; 2],
    /// Max intensity `|E_1|^2 + |E_2|^2` per phase.
    pub max_intensity: [f64; 2],
    /// Null Lagrangians by domain quadrature (two fields only).
    pub nl_ee: f64,
    pub nl_jj: f64,
}

/// Statistics from per-cell real fields; the oracle for the criteria modules.
pub fn interior_stats(
    grid: &PhaseGrid,
    e_fields: &[Vec<Vec2>],
    j_fields: &[Vec<Vec2>],
) -> InteriorStats {
    assert!(!e_fields.is_empty() && e_fields.len() <= 2 && e_fields.len() == j_fields.len());
    let n = grid.nx * grid.ny;
    let nf = e_fields.len();
    let cell_w = 1.0 / n as f64;
    let mut st = InteriorStats {
        fractions: grid.volume_fractions(),
        n_fields: nf,
        avg_chi_e: [[Vec2::ZERO; 2]; 2],
        a_mn: [[[0.0; 2]; 2]; 2],
        power: [[0.0; 2]; 2],
        max_e: [[0.0; 2]; 2],
        max_e_interior: [[0.0; 2]; 2],
        max_e_boundary: [[0.0; 2]; 2],
        max_intensity: [0.0; 2],
        nl_ee: 0.0,
        nl_jj: 0.0,
    };
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let c = grid.idx(i, j);
            let alpha = (grid.phase[c] - 1) as usize;
            let boundary = grid.is_phase_boundary_cell(i, j);
            let mut intensity = 0.0;
            for m in 0..nf {
                let em = e_fields[m][c];
                st.avg_chi_e[alpha][m] += em.scale(cell_w);
                let nm = em.norm();
                st.max_e[alpha][m] = st.max_e[alpha][m].max(nm);
                if boundary {
                    st.max_e_boundary[alpha][m] = st.max_e_boundary[alpha][m].max(nm);
                } else {
                    st.max_e_interior[alpha][m] = st.max_e_interior[alpha][m].max(nm);
                }
                intensity += nm * nm;
                for mn in 0..nf {
                    st.a_mn[alpha][m][mn] += em.dot(e_fields[mn][c]) * cell_w;
                    st.power[m][mn] += em.dot(j_fields[mn][c]) * cell_w;
                }
            }
            st.max_intensity[alpha] = st.max_intensity[alpha].max(intensity);
            if nf == 2 {
                st.nl_ee += e_fields[0][c].dot(e_fields[1][c].rot_cw()) * cell_w;
                st.nl_jj += j_fields[0][c].dot(j_fields[1][c].rot_cw()) * cell_w;
            }
        }
    }
    st
}

/// Split a real solution's cell fields into plain `Vec2` arrays.
pub fn real_fields(sol: &FieldSolution<f64>) -> (Vec<Vec2>, Vec<Vec2>) {
    let e = sol.e.iter().map(|c| Vec2::new(c[0], c[1])).collect();
    let j = sol.j.iter().map(|c| Vec2::new(c[0], c[1])).collect();
    (e, j)
}

/// Real and imaginary parts of a complex solution's cell fields.
pub fn complex_fields(sol: &FieldSolution<Complex64>) -> ([Vec<Vec2>; 2], [Vec<Vec2>; 2]) {
    let e1 = sol.e.iter().map(|c| Vec2::new(c[0].re, c[1].re)).collect();
    let e2 = sol.e.iter().map(|c| Vec2::new(c[0].im, c[1].im)).collect();
    let j1 = sol.j.iter().map(|c| Vec2::new(c[0].re, c[1].re)).collect();
    let j2 = sol.j.iter().map(|c| Vec2::new(c[0].im, c[1].im)).collect();
    ([e1, e2], [j1, j2])
}

/// Cell-centered solution export: `x,y,phase,V,Ex,Ey,Jx,Jy` rows (real and
/// imaginary parts for complex data).
pub fn solution_to_csv<S: Scalar>(grid: &PhaseGrid, sol: &FieldSolution<S>) -> String {
    let mut out =
        String::from("x,y,phase,V_re,V_im,Ex_re,Ex_im,Ey_re,Ey_im,Jx_re,Jx_im,Jy_re,Jy_im\n");
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let c = grid.idx(i, j);
            let p = grid.cell_center(i, j);
            out.push_str(&format!(
                "{:.9e},{:.9e},{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n",
                p.x,
                p.y,
                grid.phase[c],
                sol.v[c].re(),
                sol.v[c].im(),
                sol.e[c][0].re(),
                sol.e[c][0].im(),
                sol.e[c][1].re(),
                sol.e[c][1].im(),
                sol.j[c][0].re(),
                sol.j[c][0].im(),
                sol.j[c][1].re(),
                sol.j[c][1].im(),
            ));
        }
    }
    out
}

/// Exact Dirichlet profile for a laminate normal to x under a unit potential
/// drop along x; matches the harmonic-mean discretization exactly.
pub fn laminate_series_bc(sigma: [f64; 2], f1: f64, width: f64) -> impl Fn(f64, f64) -> f64 {
    let sig_eff = 1.0 / (f1 / sigma[0] + (1.0 - f1) / sigma[1]);
    move |x: f64, _y: f64| {
        let xf = (x / width).clamp(0.0, 1.0);
        let drop = if xf <= f1 {
            xf / sigma[0]
        } else {
            f1 / sigma[0] + (xf - f1) / sigma[1]
        };
        -sig_eff * drop * width
    }
}
