//! Boundary measurement ingestion and reduction to averaged quantities.
//!
//! Datasets are ordered counterclockwise rings of samples. Plain moments use
//! the stored arc weights; loop integrals of the form `∮ f dg` use the
//! trapezoid Stieltjes sum over consecutive nodes, which is exact for
//! piecewise-linear data with kinks placed on nodes and spectrally accurate
//! on smooth rings.

use crate::error::{Error, Result};
use crate::math::{Mat2, Vec2};
use serde::{Deserialize, Serialize};

pub const UNIT_TOL: f64 = 1e-12;
pub const FLUX_TOL: f64 = 1e-9;

/// One boundary record: geometry, potential, and normal flux, with optional
/// displacement/traction for elastic datasets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySample {
    /// Position on the boundary.
    #[serde(rename = "x")]
    pub position: Vec2,
    /// Unit tangent along the counterclockwise traversal.
    #[serde(rename = "t")]
    pub tangent: Vec2,
    /// Outward unit normal.
    #[serde(rename = "n")]
    pub normal: Vec2,
    /// Arc weight of this sample in the quadrature.
    pub ds: f64,
    /// Potential V.
    #[serde(rename = "V")]
    pub v: f64,
    /// Outward normal flux J.n.
    #[serde(rename = "JdotN")]
    pub j_n: f64,
    /// Displacement (elastic datasets).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<Vec2>,
    /// Traction vector tau.n (elastic datasets).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub traction: Option<Vec2>,
}

/// Sampled boundary measurements for one boundary condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryDataset {
    /// Domain area |Omega|.
    pub area: f64,
    pub samples: Vec<BoundarySample>,
    #[serde(default)]
    pub label: String,
}

impl BoundaryDataset {
    pub fn new(area: f64, samples: Vec<BoundarySample>, label: &str) -> Result<Self> {
        let d = BoundaryDataset {
            area,
            samples,
            label: label.into(),
        };
        d.validate()?;
        Ok(d)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let d: BoundaryDataset = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("dataset json: {}", e)))?;
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if self.samples.len() < 3 {
            return Err(Error::InsufficientSamples(self.samples.len()));
        }
        if !(self.area > 0.0) {
            return Err(Error::NonpositiveArea(self.area));
        }
        for (i, s) in self.samples.iter().enumerate() {
            if (s.tangent.norm() - 1.0).abs() > UNIT_TOL || (s.normal.norm() - 1.0).abs() > UNIT_TOL
            {
                return Err(Error::InvalidInput(format!(
                    "sample {}: tangent/normal not unit length",
                    i
                )));
            }
            if s.tangent.dot(s.normal).abs() > UNIT_TOL {
                return Err(Error::InvalidInput(format!(
                    "sample {}: tangent not orthogonal to normal",
                    i
                )));
            }
            if !(s.ds > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "sample {}: nonpositive arc weight",
                    i
                )));
            }
        }
        // Counterclockwise ordering: positive signed polygon area.
        if self.signed_polygon_area() <= 0.0 {
            return Err(Error::InvalidInput(
                "samples are not ordered counterclockwise".into(),
            ));
        }
        Ok(())
    }

    fn signed_polygon_area(&self) -> f64 {
        let n = self.samples.len();
        let mut a = 0.0;
        for i in 0..n {
            let p = self.samples[i].position;
            let q = self.samples[(i + 1) % n].position;
            a += p.x * q.y - q.x * p.y;
        }
        0.5 * a
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Plain quadrature `(1/|Omega|) * sum f_i ds_i`.
    fn moment(&self, f: impl Fn(&BoundarySample) -> f64) -> f64 {
        self.samples.iter().map(|s| f(s) * s.ds).sum::<f64>() / self.area
    }

    /// Arc length between consecutive samples. Along straight or smooth
    /// stretches the chord is (second-order) exact; across a corner the
    /// chord under-measures, so the displacement is decomposed along the two
    /// tangents, which is exact for a single bend between the samples.
    fn arc_gap(a: &BoundarySample, b: &BoundarySample) -> f64 {
        let d = b.position - a.position;
        let chord = d.norm();
        if a.tangent.dot(b.tangent) > 0.999 || chord < 1e-300 {
            return chord;
        }
        let det = a.tangent.x * b.tangent.y - a.tangent.y * b.tangent.x;
        if det.abs() < 1e-9 {
            return chord;
        }
        let s = (d.x * b.tangent.y - d.y * b.tangent.x) / det;
        let t = (a.tangent.x * d.y - a.tangent.y * d.x) / det;
        if s >= -1e-12 && t >= -1e-12 {
            s.max(0.0) + t.max(0.0)
        } else {
            chord
        }
    }

    /// Cumulative trapezoid integral of `f` along the ring, starting from 0
    /// at the first sample.
    fn cumulative(&self, f: impl Fn(&BoundarySample) -> f64) -> Vec<f64> {
        let n = self.samples.len();
        let mut w = vec![0.0; n];
        for i in 1..n {
            let a = &self.samples[i - 1];
            let b = &self.samples[i];
            let gap = Self::arc_gap(a, b);
            w[i] = w[i - 1] + 0.5 * (f(a) + f(b)) * gap;
        }
        w
    }

    /// Tangential derivative of the potential by centered differences on the
    /// ring; zero-length spans from duplicated nodes are skipped.
    pub fn tangential_derivative(&self) -> Result<Vec<f64>> {
        self.tangential_derivative_grouped(None)
    }

    /// Tangential derivative with an optional per-sample group id: stencils
    /// never straddle a group change (material interfaces on the surface),
    /// falling back to one-sided differences there.
    pub fn tangential_derivative_grouped(&self, groups: Option<&[u8]>) -> Result<Vec<f64>> {
        if let Some(g) = groups {
            if g.len() != self.samples.len() {
                return Err(Error::InvalidInput(
                    "group labels must match the sample count".into(),
                ));
            }
        }
        self.tangential_derivative_of(|s| s.v, groups)
    }

    fn tangential_derivative_of(
        &self,
        f: impl Fn(&BoundarySample) -> f64,
        groups: Option<&[u8]>,
    ) -> Result<Vec<f64>> {
        let n = self.samples.len();
        if n < 3 {
            return Err(Error::InsufficientSamples(n));
        }
        let mut out = vec![0.0; n];
        for i in 0..n {
            // Walk outwards until both spans have positive length.
            let mut prev = (i + n - 1) % n;
            let mut next = (i + 1) % n;
            let mut guard = 0;
            while self.samples[prev].position.dist(self.samples[i].position) < 1e-300 && guard < n {
                prev = (prev + n - 1) % n;
                guard += 1;
            }
            guard = 0;
            while self.samples[next].position.dist(self.samples[i].position) < 1e-300 && guard < n {
                next = (next + 1) % n;
                guard += 1;
            }
            // A coinciding neighbour marks this sample as one side of a data
            // discontinuity: differentiate one-sidedly away from the twin.
            let twin_next = self.samples[(i + 1) % n]
                .position
                .dist(self.samples[i].position)
                < 1e-300;
            let twin_prev = self.samples[(i + n - 1) % n]
                .position
                .dist(self.samples[i].position)
                < 1e-300;
            // A stencil must also not straddle a corner or a group change:
            // only neighbours with an aligned tangent (and the same group,
            // when labels are given) contribute.
            let t = self.samples[i].tangent;
            let same_group = |j: usize| groups.map_or(true, |g| g[j] == g[i]);
            let prev_ok = !twin_prev && t.dot(self.samples[prev].tangent) > 0.9 && same_group(prev);
            let next_ok = !twin_next && t.dot(self.samples[next].tangent) > 0.9 && same_group(next);
            let (a, b) = match (prev_ok, next_ok) {
                (true, false) => (prev, i),
                (false, true) => (i, next),
                _ => (prev, next),
            };
            let gap = self.samples[a].position.dist(self.samples[i].position)
                + self.samples[i].position.dist(self.samples[b].position);
            if gap < 1e-300 {
                return Err(Error::InvalidInput(
                    "degenerate ring: all samples coincide".into(),
                ));
            }
            out[i] = (f(&self.samples[b]) - f(&self.samples[a])) / gap;
        }
        Ok(out)
    }

    fn check_same_geometry(&self, other: &BoundaryDataset) -> Result<()> {
        if self.samples.len() != other.samples.len() {
            return Err(Error::GeometryMismatch(format!(
                "sample counts differ: {} vs {}",
                self.samples.len(),
                other.samples.len()
            )));
        }
        let scale = 1.0
            + self
                .samples
                .iter()
                .map(|s| s.position.norm())
                .fold(0.0, f64::max);
        for (i, (a, b)) in self.samples.iter().zip(&other.samples).enumerate() {
            if a.position.dist(b.position) > 1e-9 * scale {
                return Err(Error::GeometryMismatch(format!(
                    "positions differ at sample {}",
                    i
                )));
            }
        }
        if (self.area - other.area).abs() > 1e-9 * self.area.abs() {
            return Err(Error::GeometryMismatch("areas differ".into()));
        }
        Ok(())
    }
}

/// `<E> = (1/|Omega|) ∮ -V n ds`.
pub fn average_electric_field(data: &BoundaryDataset) -> Result<Vec2> {
    data.validate()?;
    Ok(Vec2::new(
        data.moment(|s| -s.v * s.normal.x),
        data.moment(|s| -s.v * s.normal.y),
    ))
}

/// `<J>_i = (1/|Omega|) ∮ x_i (J.n) ds`, after checking flux conservation.
pub fn average_current(data: &BoundaryDataset) -> Result<Vec2> {
    data.validate()?;
    let total: f64 = data.samples.iter().map(|s| s.j_n * s.ds).sum();
    let magnitude: f64 = data.samples.iter().map(|s| s.j_n.abs() * s.ds).sum();
    let tol = FLUX_TOL * magnitude.max(1e-300);
    if total.abs() > tol && magnitude > 0.0 {
        return Err(Error::FluxNotConserved {
            total: total.abs(),
            tol,
        });
    }
    Ok(Vec2::new(
        data.moment(|s| s.position.x * s.j_n),
        data.moment(|s| s.position.y * s.j_n),
    ))
}

/// `<J.E> = -(1/|Omega|) ∮ V (J.n) ds`.
pub fn average_power(data: &BoundaryDataset) -> Result<f64> {
    data.validate()?;
    Ok(data.moment(|s| -s.v * s.j_n))
}

/// All four `<E_k . J_l> = -(1/|Omega|) ∮ V_k (J_l . n) ds`, indexed `[k][l]`.
pub fn cross_powers(data1: &BoundaryDataset, data2: &BoundaryDataset) -> Result<[[f64; 2]; 2]> {
    data1.validate()?;
    data2.validate()?;
    data1.check_same_geometry(data2)?;
    let ds = [data1, data2];
    let mut out = [[0.0; 2]; 2];
    for k in 0..2 {
        for l in 0..2 {
            let vk = ds[k];
            let jl = ds[l];
            let mut acc = 0.0;
            for (a, b) in vk.samples.iter().zip(&jl.samples) {
                acc += -a.v * b.j_n * a.ds;
            }
            out[k][l] = acc / data1.area;
        }
    }
    Ok(out)
}

/// The two null Lagrangians `<E_1 . R_perp E_2>` and `<J_1 . R_perp J_2>`.
///
/// The first reduces to `(1/|Omega|) ∮ V_1 dV_2`; the second uses stream
/// functions reconstructed by cumulative integration of the normal flux.
pub fn null_lagrangians(data1: &BoundaryDataset, data2: &BoundaryDataset) -> Result<(f64, f64)> {
    data1.validate()?;
    data2.validate()?;
    data1.check_same_geometry(data2)?;
    if data1.samples.len() < 3 {
        return Err(Error::InsufficientSamples(data1.samples.len()));
    }
    let n = data1.samples.len();
    // Antisymmetrized Stieltjes loop sum: ∮ f dg = (∮ f dg - ∮ g df)/2 on a
    // closed loop, which makes the dataset swap flip the sign bitwise.
    let loop_asym = |f: &dyn Fn(usize) -> f64, g: &dyn Fn(usize) -> f64| -> f64 {
        let mut acc = 0.0;
        for i in 0..n {
            let j = (i + 1) % n;
            acc += 0.25 * ((f(i) + f(j)) * (g(j) - g(i)) - (g(i) + g(j)) * (f(j) - f(i)));
        }
        acc
    };
    let ee = loop_asym(&|i| data1.samples[i].v, &|i| data2.samples[i].v) / data1.area;
    let w1 = data1.cumulative(|s| s.j_n);
    let w2 = data2.cumulative(|s| s.j_n);
    let jj = loop_asym(&|i| w1[i], &|i| w2[i]) / data1.area;
    Ok((ee, jj))
}

/// Boundary-derived averages consumed by the criteria.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub avg_e: Vec2,
    pub avg_j: Vec2,
    /// `<J.E>`.
    pub avg_power: f64,
    /// `<E_1 . R_perp E_2>` (two boundary conditions only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub null_lag_ee: Option<f64>,
    /// `<J_1 . R_perp J_2>` (two boundary conditions only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub null_lag_jj: Option<f64>,
    /// `<E_k . J_l>` indexed `[k][l]` (two boundary conditions only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cross_powers: Option<[[f64; 2]; 2]>,
}

impl MomentSet {
    pub fn from_dataset(data: &BoundaryDataset) -> Result<Self> {
        Ok(MomentSet {
            avg_e: average_electric_field(data)?,
            avg_j: average_current(data)?,
            avg_power: average_power(data)?,
            null_lag_ee: None,
            null_lag_jj: None,
            cross_powers: None,
        })
    }

    /// Moments for a pair of boundary conditions on the same geometry; both
    /// returned sets carry the shared null Lagrangians and cross powers.
    pub fn from_pair(data1: &BoundaryDataset, data2: &BoundaryDataset) -> Result<(Self, Self)> {
        let mut m1 = MomentSet::from_dataset(data1)?;
        let mut m2 = MomentSet::from_dataset(data2)?;
        let (ee, jj) = null_lagrangians(data1, data2)?;
        let cp = cross_powers(data1, data2)?;
        m1.null_lag_ee = Some(ee);
        m1.null_lag_jj = Some(jj);
        m1.cross_powers = Some(cp);
        m2.null_lag_ee = Some(ee);
        m2.null_lag_jj = Some(jj);
        m2.cross_powers = Some(cp);
        Ok((m1, m2))
    }
}

/// Elastic boundary-derived moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElasticMoments {
    /// Total energy density `<tau : grad u>`.
    pub energy: f64,
    /// `<tau>`.
    pub avg_stress: Mat2,
    /// `<grad u>` with `(i,j)` entry `<d u_j / d x_i>`.
    pub avg_gradu: Mat2,
    /// `<det tau>`, from the Airy boundary reconstruction.
    pub det_stress: f64,
    /// `<det grad u>`.
    pub det_gradu: f64,
    /// `b - <F_0>^2 / 2`.
    pub c_value: f64,
}

/// Reduce a displacement/traction dataset to the elastic moments.
pub fn elastic_moments(data: &BoundaryDataset) -> Result<ElasticMoments> {
    data.validate()?;
    let n = data.samples.len();
    let mut us = Vec::with_capacity(n);
    let mut tr = Vec::with_capacity(n);
    for (i, s) in data.samples.iter().enumerate() {
        match (s.u, s.traction) {
            (Some(u), Some(t)) => {
                us.push(u);
                tr.push(t);
            }
            _ => {
                return Err(Error::InvalidInput(format!(
                    "sample {} lacks displacement/traction",
                    i
                )))
            }
        }
    }

    // Net force and torque balance.
    let mut force = Vec2::ZERO;
    let mut torque = 0.0;
    let mut tmag = 0.0;
    for (s, t) in data.samples.iter().zip(&tr) {
        force += t.scale(s.ds);
        torque += (s.position.x * t.y - s.position.y * t.x) * s.ds;
        tmag += t.norm() * s.ds;
    }
    let scale = tmag.max(1e-300)
        * (1.0
            + data
                .samples
                .iter()
                .map(|s| s.position.norm())
                .fold(0.0, f64::max));
    let imbalance = force.norm().max(torque.abs());
    if imbalance > 1e-9 * scale {
        return Err(Error::TractionImbalance(imbalance));
    }

    let area = data.area;
    let energy = data
        .samples
        .iter()
        .zip(&us)
        .zip(&tr)
        .map(|((s, u), t)| u.dot(*t) * s.ds)
        .sum::<f64>()
        / area;

    let mut avg_stress = Mat2::zero();
    let mut avg_gradu = Mat2::zero();
    for ((s, u), t) in data.samples.iter().zip(&us).zip(&tr) {
        let w = s.ds / area;
        avg_stress.a11 += s.position.x * t.x * w;
        avg_stress.a12 += s.position.x * t.y * w;
        avg_stress.a21 += s.position.y * t.x * w;
        avg_stress.a22 += s.position.y * t.y * w;
        avg_gradu.a11 += u.x * s.normal.x * w;
        avg_gradu.a12 += u.y * s.normal.x * w;
        avg_gradu.a21 += u.x * s.normal.y * w;
        avg_gradu.a22 += u.y * s.normal.y * w;
    }
    // ∮ x_i (tau n)_j ds integrates to the transpose entry; symmetrize.
    avg_stress = avg_stress.transpose();
    let avg_stress = Mat2::sym(
        avg_stress.a11,
        0.5 * (avg_stress.a12 + avg_stress.a21),
        avg_stress.a22,
    );

    // b = <det grad u> = (1/2|Omega|) ∮ (u1 du2 - u2 du1).
    let det_gradu =
        0.5 * (loop_pair(&us, |u| u.x, |u| u.y) - loop_pair(&us, |u| u.y, |u| u.x)) / area;

    // Airy gradient on the boundary: dg/ds = -R_perp (tau n), integrated by
    // the cumulative trapezoid; then a = <det Hess psi> by the same loop form.
    let mut g = Vec::with_capacity(n);
    g.push(Vec2::ZERO);
    for i in 1..n {
        let gap = data.samples[i - 1].position.dist(data.samples[i].position);
        let fa = -tr[i - 1].rot_cw();
        let fb = -tr[i].rot_cw();
        let prev = g[i - 1];
        g.push(prev + (fa + fb).scale(0.5 * gap));
    }
    let det_stress =
        0.5 * (loop_pair(&g, |v| v.x, |v| v.y) - loop_pair(&g, |v| v.y, |v| v.x)) / area;

    let f0_avg = (avg_gradu.a12 - avg_gradu.a21) / std::f64::consts::SQRT_2;
    let c_value = det_gradu - 0.5 * f0_avg * f0_avg;

    Ok(ElasticMoments {
        energy,
        avg_stress,
        avg_gradu,
        det_stress,
        det_gradu,
        c_value,
    })
}

/// `∮ f dg` over a closed vector sequence.
fn loop_pair(vals: &[Vec2], f: impl Fn(&Vec2) -> f64, g: impl Fn(&Vec2) -> f64) -> f64 {
    let n = vals.len();
    let mut acc = 0.0;
    for i in 0..n {
        let j = (i + 1) % n;
        acc += 0.5 * (f(&vals[i]) + f(&vals[j])) * (g(&vals[j]) - g(&vals[i]));
    }
    acc
}

pub mod synthetic {
    //! Analytic ring geometries and datasets used as fixtures and by the CLI.

    use super::*;

    /// Geometry-only closed ring; fields are attached afterwards.
    #[derive(Debug, Clone)]
    pub struct RingGeometry {
        pub nodes: Vec<RingNode>,
        pub area: f64,
    }

    #[derive(Debug, Clone)]
    pub struct RingNode {
        pub position: Vec2,
        pub tangent: Vec2,
        pub normal: Vec2,
        pub ds: f64,
        /// One-sided evaluation hint for fields with jumps: -1 approaches the
        /// node along the tangent from behind, +1 from ahead, 0 is interior.
        pub bias: f64,
    }

    impl RingNode {
        /// Unit vector pointing into the boundary piece this node represents;
        /// zero for nodes away from jumps. A node with bias -1 closes the
        /// piece behind it (direction -tangent), a node with bias +1 opens
        /// the piece ahead (+tangent). Fields with jumps across a break
        /// should be evaluated at `position + epsilon * side()`.
        pub fn side(&self) -> Vec2 {
            self.tangent.scale(self.bias)
        }
    }

    impl RingGeometry {
        /// Uniformly-sampled circle of radius `r`; arc weights are exact.
        pub fn circle(center: Vec2, r: f64, n: usize) -> Self {
            let n = n.max(8);
            let ds = 2.0 * std::f64::consts::PI * r / n as f64;
            let nodes = (0..n)
                .map(|i| {
                    let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                    let normal = Vec2::new(th.cos(), th.sin());
                    RingNode {
                        position: center + normal.scale(r),
                        tangent: normal.rot_ccw(),
                        normal,
                        ds,
                        bias: 0.0,
                    }
                })
                .collect();
            RingGeometry {
                nodes,
                area: std::f64::consts::PI * r * r,
            }
        }

        /// Axis-aligned square `[x0, x0+side] x [y0, y0+side]`, counterclockwise,
        /// with `n` uniform intervals per edge. Corner nodes are duplicated so
        /// each copy carries its own edge frame; extra nodes are inserted at the
        /// interior `breaks_x` (bottom/top edges) and `breaks_y` (left/right)
        /// so piecewise data can be sampled exactly.
        pub fn square(
            x0: f64,
            y0: f64,
            side: f64,
            n: usize,
            breaks_x: &[f64],
            breaks_y: &[f64],
        ) -> Self {
            let n = n.max(2);
            let mut nodes: Vec<RingNode> = vec![];
            let edges = [
                // (start, direction, outward normal, breaks along the edge coordinate in [0,1])
                (
                    Vec2::new(x0, y0),
                    Vec2::new(1.0, 0.0),
                    Vec2::new(0.0, -1.0),
                    breaks_x,
                ),
                (
                    Vec2::new(x0 + side, y0),
                    Vec2::new(0.0, 1.0),
                    Vec2::new(1.0, 0.0),
                    breaks_y,
                ),
                (
                    Vec2::new(x0 + side, y0 + side),
                    Vec2::new(-1.0, 0.0),
                    Vec2::new(0.0, 1.0),
                    breaks_x,
                ),
                (
                    Vec2::new(x0, y0 + side),
                    Vec2::new(0.0, -1.0),
                    Vec2::new(-1.0, 0.0),
                    breaks_y,
                ),
            ];
            for (start, dir, normal, breaks) in edges {
                // Node parameters in [0, 1] along the edge: uniform + breaks.
                let mut ts: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
                for &b in breaks.iter() {
                    let t = ((b - if dir.x != 0.0 { x0 } else { y0 }) / side).clamp(0.0, 1.0);
                    let t = if dir.x < 0.0 || dir.y < 0.0 {
                        1.0 - t
                    } else {
                        t
                    };
                    ts.push(t);
                }
                ts.sort_by(f64::total_cmp);
                ts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
                // Trapezoid weights; break nodes are duplicated with one-sided
                // bias so sampled jumps stay exact.
                for (k, &t) in ts.iter().enumerate() {
                    let pos = start + dir.scale(t * side);
                    let w_left = if k == 0 {
                        0.0
                    } else {
                        0.5 * (t - ts[k - 1]) * side
                    };
                    let w_right = if k + 1 == ts.len() {
                        0.0
                    } else {
                        0.5 * (ts[k + 1] - t) * side
                    };
                    let interior_break =
                        k > 0 && k + 1 < ts.len() && breaks_contains(breaks, pos, dir);
                    if interior_break {
                        nodes.push(RingNode {
                            position: pos,
                            tangent: dir,
                            normal,
                            ds: w_left,
                            bias: -1.0,
                        });
                        nodes.push(RingNode {
                            position: pos,
                            tangent: dir,
                            normal,
                            ds: w_right,
                            bias: 1.0,
                        });
                    } else {
                        let (ds, bias) = if k == 0 {
                            (w_right, 1.0)
                        } else if k + 1 == ts.len() {
                            (w_left, -1.0)
                        } else {
                            (w_left + w_right, 0.0)
                        };
                        nodes.push(RingNode {
                            position: pos,
                            tangent: dir,
                            normal,
                            ds,
                            bias,
                        });
                    }
                }
            }
            RingGeometry {
                nodes,
                area: side * side,
            }
        }

        pub fn unit_square(n: usize) -> Self {
            RingGeometry::square(0.0, 0.0, 1.0, n, &[], &[])
        }

        /// Attach potential and flux fields. `v(p)` must be continuous;
        /// `j_n(p, outward_normal, side)` may jump across break nodes, with
        /// `side` the one-sided evaluation direction from `RingNode::side`.
        pub fn dataset(
            &self,
            label: &str,
            v: impl Fn(Vec2) -> f64,
            j_n: impl Fn(Vec2, Vec2, Vec2) -> f64,
        ) -> BoundaryDataset {
            let samples = self
                .nodes
                .iter()
                .map(|nd| BoundarySample {
                    position: nd.position,
                    tangent: nd.tangent,
                    normal: nd.normal,
                    ds: nd.ds.max(1e-300),
                    v: v(nd.position),
                    j_n: j_n(nd.position, nd.normal, nd.side()),
                    u: None,
                    traction: None,
                })
                .collect();
            BoundaryDataset {
                area: self.area,
                samples,
                label: label.into(),
            }
        }

        /// Attach displacement and traction fields for elastic datasets.
        pub fn elastic_dataset(
            &self,
            label: &str,
            u: impl Fn(Vec2) -> Vec2,
            traction: impl Fn(Vec2, Vec2, Vec2) -> Vec2,
        ) -> BoundaryDataset {
            let samples = self
                .nodes
                .iter()
                .map(|nd| BoundarySample {
                    position: nd.position,
                    tangent: nd.tangent,
                    normal: nd.normal,
                    ds: nd.ds.max(1e-300),
                    v: 0.0,
                    j_n: 0.0,
                    u: Some(u(nd.position)),
                    traction: Some(traction(nd.position, nd.normal, nd.side())),
                })
                .collect();
            BoundaryDataset {
                area: self.area,
                samples,
                label: label.into(),
            }
        }
    }

    fn breaks_contains(breaks: &[f64], pos: Vec2, dir: Vec2) -> bool {
        let coord = if dir.x != 0.0 { pos.x } else { pos.y };
        breaks.iter().any(|&b| (b - coord).abs() < 1e-12)
    }

    /// Uniform-field dataset on the unit square: `V = -e0 . x`, `J = sigma e0`.
    pub fn uniform_square(e0: Vec2, sigma: f64, n: usize) -> BoundaryDataset {
        RingGeometry::unit_square(n).dataset(
            "uniform",
            move |p| -e0.dot(p),
            move |_, nrm, _| sigma * e0.dot(nrm),
        )
    }

    /// Phase of a point on the laminate boundary, using the one-sided
    /// evaluation direction to disambiguate interface nodes.
    pub fn laminate_phase(f1: f64, p: Vec2, side: Vec2) -> u8 {
        let on_break = (p.x - f1).abs() <= 1e-12;
        if p.x < f1 - 1e-12 || (on_break && side.x < 0.0) {
            1
        } else {
            2
        }
    }

    /// Boundary phase labels matching the sampling convention of the
    /// laminate datasets built from this geometry.
    pub fn laminate_labels(geom: &RingGeometry, f1: f64) -> Vec<u8> {
        geom.nodes
            .iter()
            .map(|nd| laminate_phase(f1, nd.position, nd.side()))
            .collect()
    }

    /// Two-layer laminate on the unit square, layers normal to x with phase 1
    /// on `[0, f1)`. Returns the exact dataset for a unit potential drop along
    /// x (series configuration).
    pub fn laminate_series(sigma: [f64; 2], f1: f64, n: usize) -> BoundaryDataset {
        laminate_series_with_labels(sigma, f1, n).0
    }

    /// Series laminate dataset plus per-sample phase labels.
    pub fn laminate_series_with_labels(
        sigma: [f64; 2],
        f1: f64,
        n: usize,
    ) -> (BoundaryDataset, Vec<u8>) {
        let sig_eff = 1.0 / (f1 / sigma[0] + (1.0 - f1) / sigma[1]);
        let geom = RingGeometry::square(0.0, 0.0, 1.0, n, &[f1], &[]);
        // V(x) = -J * integral of 1/sigma; continuous piecewise linear.
        let v = move |p: Vec2| -> f64 {
            let x = p.x;
            let j = sig_eff;
            if x <= f1 {
                -j * x / sigma[0]
            } else {
                -j * (f1 / sigma[0] + (x - f1) / sigma[1])
            }
        };
        let j_n = move |_p: Vec2, nrm: Vec2, _side: Vec2| sig_eff * nrm.x;
        let labels = laminate_labels(&geom, f1);
        (geom.dataset("laminate-series", v, j_n), labels)
    }

    /// Complex-conductivity laminate on the unit square: a series component
    /// along x with complex amplitude `a` plus a parallel component along y
    /// with complex amplitude `b`. Returns the real- and imaginary-part
    /// datasets of the exact solution.
    pub fn complex_laminate_pair(
        sigma: [num_complex::Complex64; 2],
        f1: f64,
        a: num_complex::Complex64,
        b: num_complex::Complex64,
        n: usize,
    ) -> (BoundaryDataset, BoundaryDataset) {
        use num_complex::Complex64;
        let f2 = 1.0 - f1;
        let sig_eff = 1.0 / (f1 / sigma[0] + f2 / sigma[1]);
        let js = a * sig_eff;
        let v_c = move |p: Vec2| -> Complex64 {
            let cum = if p.x <= f1 {
                Complex64::new(p.x, 0.0) / sigma[0]
            } else {
                Complex64::new(f1, 0.0) / sigma[0] + Complex64::new(p.x - f1, 0.0) / sigma[1]
            };
            -js * cum - b * p.y
        };
        let j_n_c = move |p: Vec2, nrm: Vec2, side: Vec2| -> Complex64 {
            let on_break = (p.x - f1).abs() <= 1e-12;
            let s = if p.x < f1 - 1e-12 || (on_break && side.x < 0.0) {
                sigma[0]
            } else {
                sigma[1]
            };
            js * nrm.x + b * s * nrm.y
        };
        let geom = RingGeometry::square(0.0, 0.0, 1.0, n, &[f1], &[]);
        let d_re = geom.dataset(
            "complex-laminate-re",
            move |p| v_c(p).re,
            move |p, nrm, side| j_n_c(p, nrm, side).re,
        );
        let d_im = geom.dataset(
            "complex-laminate-im",
            move |p| v_c(p).im,
            move |p, nrm, side| j_n_c(p, nrm, side).im,
        );
        (d_re, d_im)
    }

    /// Same laminate with the field along the layers (unit drop along y).
    pub fn laminate_parallel(sigma: [f64; 2], f1: f64, n: usize) -> BoundaryDataset {
        let geom = RingGeometry::square(0.0, 0.0, 1.0, n, &[f1], &[]);
        let v = move |p: Vec2| -p.y;
        let j_n = move |p: Vec2, nrm: Vec2, side: Vec2| {
            let on_break = (p.x - f1).abs() <= 1e-12;
            let s = if p.x < f1 - 1e-12 || (on_break && side.x < 0.0) {
                sigma[0]
            } else {
                sigma[1]
            };
            s * nrm.y
        };
        geom.dataset("laminate-parallel", v, j_n)
    }
}

#[cfg(test)]
mod tests {
    use super::synthetic::*;
    use super::*;

    #[test]
    fn linear_potential_unit_square() {
        let d = uniform_square(Vec2::new(1.0, 0.0), 1.0, 64);
        let e = average_electric_field(&d).unwrap();
        assert!((e - Vec2::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn constant_potential_zero_field() {
        let geom = RingGeometry::unit_square(32);
        let d = geom.dataset("const", |_| 3.5, |_, _, _| 0.0);
        let e = average_electric_field(&d).unwrap();
        assert!(e.norm() < 1e-12);
        assert!(average_current(&d).unwrap().norm() < 1e-12);
        assert!(average_power(&d).unwrap().abs() < 1e-12);
    }

    #[test]
    fn disk_linear_potential() {
        let geom = RingGeometry::circle(Vec2::ZERO, 1.0, 4096);
        let d = geom.dataset("disk", |p| -p.x - 2.0 * p.y, |_, _, _| 0.0);
        let e = average_electric_field(&d).unwrap();
        assert!((e - Vec2::new(1.0, 2.0)).norm() < 1e-8);
    }

    #[test]
    fn uniform_current_unit_square() {
        let geom = RingGeometry::unit_square(64);
        let d = geom.dataset("j", |_| 0.0, |_, nrm, _| nrm.x);
        let j = average_current(&d).unwrap();
        assert!((j - Vec2::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn laminate_series_recovery() {
        let d = laminate_series([1.0, 2.0], 0.5, 64);
        let j = average_current(&d).unwrap();
        assert!((j.x - 4.0 / 3.0).abs() < 1e-12, "got {}", j.x);
        assert!(j.y.abs() < 1e-12);
        let e = average_electric_field(&d).unwrap();
        assert!((e.x - 1.0).abs() < 1e-12);
        let p = average_power(&d).unwrap();
        assert!((p - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn laminate_parallel_recovery() {
        let d = laminate_parallel([1.0, 2.0], 0.5, 64);
        let j = average_current(&d).unwrap();
        assert!((j.y - 1.5).abs() < 1e-12, "got {}", j.y);
        let p = average_power(&d).unwrap();
        assert!((p - 1.5).abs() < 1e-12);
    }

    #[test]
    fn flux_conservation_enforced() {
        let geom = RingGeometry::unit_square(16);
        let d = geom.dataset("bad", |_| 0.0, |_, _, _| 1.0);
        assert!(matches!(
            average_current(&d),
            Err(Error::FluxNotConserved { .. })
        ));
    }

    #[test]
    fn power_of_uniform_field() {
        for sigma in [0.5, 1.0, 3.7] {
            let geom = RingGeometry::unit_square(32);
            let d = geom.dataset("p", |p| -p.x, move |_, nrm, _| sigma * nrm.x);
            assert!((average_power(&d).unwrap() - sigma).abs() < 1e-12);
        }
    }

    #[test]
    fn cross_powers_identical_and_orthogonal() {
        let d1 = uniform_square(Vec2::new(1.0, 0.0), 1.0, 32);
        let cp = cross_powers(&d1, &d1).unwrap();
        assert!((cp[0][1] - cp[0][0]).abs() < 1e-12);
        let d2 = uniform_square(Vec2::new(0.0, 1.0), 1.0, 32);
        let cp = cross_powers(&d1, &d2).unwrap();
        assert!(cp[0][1].abs() < 1e-12);
        assert!(cp[1][0].abs() < 1e-12);
        assert!((cp[0][0] - 1.0).abs() < 1e-12);
        assert!((cp[1][1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cross_powers_geometry_mismatch() {
        let d1 = uniform_square(Vec2::new(1.0, 0.0), 1.0, 32);
        let d2 = uniform_square(Vec2::new(1.0, 0.0), 1.0, 48);
        assert!(matches!(
            cross_powers(&d1, &d2),
            Err(Error::GeometryMismatch(_))
        ));
    }

    #[test]
    fn null_lagrangian_same_dataset_vanishes() {
        let d = uniform_square(Vec2::new(1.0, 2.0), 1.0, 32);
        let (ee, _) = null_lagrangians(&d, &d).unwrap();
        assert_eq!(ee, 0.0);
    }

    #[test]
    fn null_lagrangian_uniform_pair() {
        let d1 = uniform_square(Vec2::new(1.0, 0.0), 1.0, 32);
        let d2 = uniform_square(Vec2::new(0.0, 1.0), 1.0, 32);
        let (ee, jj) = null_lagrangians(&d1, &d2).unwrap();
        assert!((ee - 1.0).abs() < 1e-12, "ee = {}", ee);
        assert!((jj - 1.0).abs() < 1e-12, "jj = {}", jj);
    }

    #[test]
    fn null_lagrangian_laminate_matches_domain_values() {
        // Exact fields: E1 = (J/sigma, 0) per phase with J = 4/3; E2 = (0,1).
        // <E1 . R_perp E2> = <E1x> = 1; <J1 . R_perp J2> = <J1x * sigma> = 2.
        let d1 = laminate_series([1.0, 2.0], 0.5, 128);
        let d2 = laminate_parallel([1.0, 2.0], 0.5, 128);
        let (ee, jj) = null_lagrangians(&d1, &d2).unwrap();
        assert!((ee - 1.0).abs() < 1e-6, "ee = {}", ee);
        assert!((jj - 2.0).abs() < 1e-6, "jj = {}", jj);
    }

    #[test]
    fn null_lagrangian_antisymmetry() {
        let d1 = laminate_series([1.0, 2.0], 0.5, 32);
        let d2 = laminate_parallel([1.0, 2.0], 0.5, 32);
        let (a, b) = null_lagrangians(&d1, &d2).unwrap();
        let (a2, b2) = null_lagrangians(&d2, &d1).unwrap();
        assert_eq!(a, -a2);
        assert_eq!(b, -b2);
    }

    #[test]
    fn quadrature_second_order_on_square() {
        // V = x^3 - 3xy^2 is harmonic; <E> = (0, 3/2) on the unit square.
        let target = Vec2::new(0.0, 1.5);
        let err_at = |n: usize| -> f64 {
            let geom = RingGeometry::unit_square(n);
            let d = geom.dataset(
                "q",
                |p| p.x * p.x * p.x - 3.0 * p.x * p.y * p.y,
                |_, _, _| 0.0,
            );
            (average_electric_field(&d).unwrap() - target).norm()
        };
        let e1 = err_at(32);
        let e2 = err_at(64);
        assert!(e1 > 1e-9, "error unexpectedly zero: {}", e1);
        assert!(e1 / e2 >= 3.5, "ratio {}", e1 / e2);
    }

    #[test]
    fn elastic_uniform_hydrostatic() {
        let kappa = 1.3;
        let geom = RingGeometry::unit_square(32);
        let d = geom.elastic_dataset("hydro", |p| p, move |_, nrm, _| nrm.scale(2.0 * kappa));
        let m = elastic_moments(&d).unwrap();
        assert!((m.energy - 4.0 * kappa).abs() < 1e-12);
        assert!((m.det_stress - 4.0 * kappa * kappa).abs() < 1e-12);
        assert!((m.det_gradu - 1.0).abs() < 1e-12);
        assert!((m.c_value - 1.0).abs() < 1e-12);
        assert!((m.avg_gradu.a11 - 1.0).abs() < 1e-12);
        assert!((m.avg_stress.a11 - 2.0 * kappa).abs() < 1e-12);
    }

    #[test]
    fn elastic_rigid_rotation() {
        // u = R_perp x = (y, -x): zero stress, b = 1, <F0>^2/2 = 1, c = 0.
        let geom = RingGeometry::unit_square(32);
        let d = geom.elastic_dataset("rot", |p| Vec2::new(p.y, -p.x), |_, _, _| Vec2::ZERO);
        let m = elastic_moments(&d).unwrap();
        assert!(m.energy.abs() < 1e-12);
        assert!(m.det_stress.abs() < 1e-12);
        assert!((m.det_gradu - 1.0).abs() < 1e-12);
        assert!(m.c_value.abs() < 1e-12);
    }

    #[test]
    fn elastic_pure_shear() {
        // u = (y, x) * amp: strain eps3 = sqrt(2) amp in the tensor basis;
        // tau = 2 mu eps. With mu = 1, amp = 1/sqrt(2): eps3 = 1, E = 2,
        // a = <det tau> = -tau12^2 = -2.
        let amp = 1.0 / std::f64::consts::SQRT_2;
        let geom = RingGeometry::unit_square(32);
        let d = geom.elastic_dataset(
            "shear",
            move |p| Vec2::new(p.y, p.x).scale(amp),
            move |_, nrm, _| Vec2::new(nrm.y, nrm.x).scale(2.0 * amp),
        );
        let m = elastic_moments(&d).unwrap();
        assert!((m.energy - 2.0).abs() < 1e-12, "E = {}", m.energy);
        assert!((m.det_stress + 2.0).abs() < 1e-12, "a = {}", m.det_stress);
    }

    #[test]
    fn traction_imbalance_detected() {
        let geom = RingGeometry::unit_square(16);
        let d = geom.elastic_dataset("bad", |_| Vec2::ZERO, |_, _, _| Vec2::new(1.0, 0.0));
        assert!(matches!(
            elastic_moments(&d),
            Err(Error::TractionImbalance(_))
        ));
    }

    #[test]
    fn dataset_validation_rejects_degenerates() {
        let geom = RingGeometry::unit_square(16);
        let mut d = geom.dataset("v", |_| 0.0, |_, _, _| 0.0);
        d.area = 0.0;
        assert!(matches!(d.validate(), Err(Error::NonpositiveArea(_))));
        let d2 = BoundaryDataset {
            area: 1.0,
            samples: geom.dataset("v", |_| 0.0, |_, _, _| 0.0).samples[..2].to_vec(),
            label: "short".into(),
        };
        assert!(matches!(d2.validate(), Err(Error::InsufficientSamples(2))));
    }

    #[test]
    fn arc_weights_sum_to_perimeter() {
        let circle = RingGeometry::circle(Vec2::new(0.3, -0.1), 1.7, 512);
        let total: f64 = circle.nodes.iter().map(|n| n.ds).sum();
        let perimeter = 2.0 * std::f64::consts::PI * 1.7;
        assert!((total - perimeter).abs() < 1e-9 * perimeter);

        let square = RingGeometry::square(0.0, 0.0, 1.0, 48, &[0.37], &[]);
        let total: f64 = square.nodes.iter().map(|n| n.ds).sum();
        assert!((total - 4.0).abs() < 1e-12);
    }

    #[test]
    fn json_roundtrip_matches_schema() {
        let d = uniform_square(Vec2::new(1.0, 0.0), 2.0, 8);
        let text = serde_json::to_string(&d).unwrap();
        assert!(text.contains("\"JdotN\""));
        assert!(text.contains("\"V\""));
        assert!(text.contains("\"area\""));
        let back = BoundaryDataset::from_json(&text).unwrap();
        assert_eq!(back.samples.len(), d.samples.len());
    }
}
