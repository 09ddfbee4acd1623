//! Deterministic SVG rendering of plane regions: feasible regions drawn with
//! a solid translucent fill, compatible regions hatched.

use super::region2::{ConstraintForm2, Region2};
use crate::error::{Error, Result};
use crate::math::Vec2;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionStyle {
    /// Solid translucent fill.
    Feasible,
    /// Diagonal hatch fill.
    Compatible,
}

#[derive(Debug, Clone, Copy)]
pub struct Viewport {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
    pub width: u32,
    pub height: u32,
}

impl Viewport {
    pub fn square(half: f64, px: u32) -> Self {
        Viewport {
            xmin: -half,
            xmax: half,
            ymin: -half,
            ymax: half,
            width: px,
            height: px,
        }
    }
}

pub struct StyledRegion<'a> {
    pub region: &'a Region2,
    pub style: RegionStyle,
    pub label: String,
}

const FILL_COLORS: &[&str] = &["#4477aa", "#ee6677", "#228833", "#ccbb44"];
const HATCH_COLORS: &[&str] = &["#222222", "#aa3377"];

/// Render regions over the viewport. Output is deterministic: fixed float
/// formatting, stable element order, no timestamps.
pub fn render_svg(regions: &[StyledRegion<'_>], vp: Viewport) -> Result<String> {
    if !(vp.xmax > vp.xmin && vp.ymax > vp.ymin) || vp.width == 0 || vp.height == 0 {
        return Err(Error::DegenerateViewport);
    }
    let w = vp.width as f64;
    let h = vp.height as f64;
    let sx = w / (vp.xmax - vp.xmin);
    let sy = h / (vp.ymax - vp.ymin);
    let to_px = |p: Vec2| -> (f64, f64) { ((p.x - vp.xmin) * sx, (vp.ymax - p.y) * sy) };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        vp.width, vp.height, vp.width, vp.height
    );
    let _ = writeln!(out, "<defs>");
    for (i, color) in HATCH_COLORS.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<pattern id="hatch{}" width="8" height="8" patternTransform="rotate(45)" patternUnits="userSpaceOnUse"><line x1="0" y1="0" x2="0" y2="8" stroke="{}" stroke-width="1.5"/></pattern>"#,
            i, color
        );
    }
    let _ = writeln!(out, "</defs>");
    let _ = writeln!(
        out,
        r#"<rect width="{}" height="{}" fill="white"/>"#,
        vp.width, vp.height
    );

    // Region fills: paint membership on a fixed grid of cells.
    let cells = 160usize;
    let mut feas_idx = 0usize;
    let mut comp_idx = 0usize;
    for sr in regions {
        let fill = match sr.style {
            RegionStyle::Feasible => {
                let c = format!("{}66", FILL_COLORS[feas_idx % FILL_COLORS.len()]);
                feas_idx += 1;
                c
            }
            RegionStyle::Compatible => {
                let c = format!("url(#hatch{})", comp_idx % HATCH_COLORS.len());
                comp_idx += 1;
                c
            }
        };
        let _ = writeln!(out, r#"<g fill="{}" stroke="none">"#, fill);
        let dx = (vp.xmax - vp.xmin) / cells as f64;
        let dy = (vp.ymax - vp.ymin) / cells as f64;
        for iy in 0..cells {
            // Merge consecutive member cells per row into one rect.
            let y = vp.ymin + (iy as f64 + 0.5) * dy;
            let mut run_start: Option<usize> = None;
            for ix in 0..=cells {
                let member = if ix < cells {
                    let x = vp.xmin + (ix as f64 + 0.5) * dx;
                    sr.region.contains_tol(Vec2::new(x, y), 1e-9)
                } else {
                    false
                };
                match (member, run_start) {
                    (true, None) => run_start = Some(ix),
                    (false, Some(s)) => {
                        let (px0, py0) = to_px(Vec2::new(vp.xmin + s as f64 * dx, y + 0.5 * dy));
                        let wpx = (ix - s) as f64 * dx * sx;
                        let hpx = dy * sy;
                        let _ = writeln!(
                            out,
                            r#"<rect x="{:.4}" y="{:.4}" width="{:.4}" height="{:.4}"/>"#,
                            px0, py0, wpx, hpx
                        );
                        run_start = None;
                    }
                    _ => {}
                }
            }
        }
        let _ = writeln!(out, "</g>");
    }

    // Constraint boundaries as polylines (at least 512 samples per conic).
    let extent = 2.0 * (vp.xmax - vp.xmin).max(vp.ymax - vp.ymin) + (vp.xmin.abs() + vp.ymax.abs());
    for (ri, sr) in regions.iter().enumerate() {
        let stroke = match sr.style {
            RegionStyle::Feasible => FILL_COLORS[ri % FILL_COLORS.len()],
            RegionStyle::Compatible => "#222222",
        };
        let dash = match sr.style {
            RegionStyle::Feasible => "",
            RegionStyle::Compatible => r#" stroke-dasharray="6 3""#,
        };
        for c in &sr.region.constraints {
            let polylines: Vec<Vec<Vec2>> = match &c.form {
                ConstraintForm2::Quadratic { m } => m.boundary_polylines(512, extent),
                ConstraintForm2::Linear { a, b, c: rhs } => {
                    let n = Vec2::new(*a, *b);
                    let nn = n.norm_sq();
                    if nn <= 1e-300 {
                        vec![]
                    } else {
                        let p0 = n.scale(*rhs / nn);
                        let d = n.rot_ccw() / nn.sqrt();
                        vec![(0..=64)
                            .map(|i| p0 + d.scale(-extent + 2.0 * extent * i as f64 / 64.0))
                            .collect()]
                    }
                }
            };
            for pl in polylines {
                if pl.len() < 2 {
                    continue;
                }
                let mut points = String::new();
                for p in &pl {
                    let (px, py) = to_px(*p);
                    if !(px.is_finite() && py.is_finite()) {
                        continue;
                    }
                    let _ = write!(points, "{:.4},{:.4} ", px, py);
                }
                let _ = writeln!(
                    out,
                    r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"{}/>"#,
                    points.trim_end(),
                    stroke,
                    dash
                );
            }
        }
    }
    let _ = writeln!(out, "</svg>");
    Ok(out)
}
