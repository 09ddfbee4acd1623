//! Rigorous certificates of breakdown in two-phase bodies from boundary data.
//!
//! Given sampled boundary measurements of a body made of two isotropic
//! phases in an unknown arrangement, this crate computes averaged moments and
//! evaluates criteria which, when violated, prove that breakdown (dielectric,
//! resistive, or plastic) or the onset of nonlinearities must have occurred
//! somewhere inside. The criteria cover real conductivity with one or two
//! boundary conditions, complex quasistatic conductivity at a fixed
//! frequency, and two-dimensional elasticity. A companion module constructs
//! the inclusion shapes for which several of the bounds are sharp, and a
//! finite-volume forward solver provides brute-force oracles for testing.

pub mod boundary;
pub mod complexq;
pub mod elastic;
pub mod eomega;
pub mod error;
pub mod geometry;
pub mod math;
pub mod real;
pub mod solver;
pub mod twobc;
pub mod verdict;

pub use error::{Error, Result};
pub use math::{Mat2, Vec2};
pub use verdict::{CriterionId, CriterionVerdict, Witness};
