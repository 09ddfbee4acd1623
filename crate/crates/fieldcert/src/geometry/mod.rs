//! Shared geometry kernel: conics, plane regions, three-variable convex
//! regions, and SVG output.
//!
//! Emptiness queries are deliberately three-valued. `Empty` is returned only
//! with a certificate, `Nonempty` only with a verified witness; anything else
//! is `Inconclusive`, and certificates of breakdown must never be claimed
//! from inconclusive geometry.

pub mod conic;
pub mod region2;
pub mod region3;
pub mod svg;

pub use conic::{ConicClass, Quadratic};
pub use region2::{require_decision, Constraint2, ConstraintForm2, Emptiness2, Region2};
pub use region3::{Affine3, Emptiness3, Linear3, PsdConstraint3, Region3};
pub use svg::{render_svg, RegionStyle, StyledRegion, Viewport};
