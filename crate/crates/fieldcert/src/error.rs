//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset has no samples")]
    EmptyDataset,
    #[error("dataset has fewer than 3 samples ({0})")]
    InsufficientSamples(usize),
    #[error("domain area must be positive, got {0}")]
    NonpositiveArea(f64),
    #[error("total boundary flux {total:e} exceeds conservation tolerance {tol:e}")]
    FluxNotConserved { total: f64, tol: f64 },
    #[error("datasets sampled on different geometries: {0}")]
    GeometryMismatch(String),
    #[error("net boundary force/torque imbalance: {0:e}")]
    TractionImbalance(f64),
    #[error("boundary phase labels missing or wrong length")]
    UnknownBoundaryPhase,
    #[error("phase conductivities are equal; per-phase averages are undetermined")]
    EqualConductivities,
    #[error("perturbation is proportional to the conductivities; system is singular")]
    SingularPerturbation,
    #[error("phase-2 conductivity is zero; relabel the phases")]
    ZeroSigma2,
    #[error("phase moduli have equal magnitude; reduction is undetermined")]
    EqualModuli,
    #[error("sigma1*sigma2'' - sigma1''*sigma2 vanishes; splitting system is singular")]
    SingularBeta,
    #[error("feasibility test did not converge; result is inconclusive")]
    NumericalInconclusive,
    #[error("region dimensions do not match")]
    DimensionMismatch,
    #[error("viewport is degenerate")]
    DegenerateViewport,
    #[error("evaluation at or too close to a pole (|t - t_pole| = {0:e})")]
    PoleEvaluation(f64),
    #[error("evaluation at the branch point h = {0}")]
    BranchPointEvaluation(f64),
    #[error("invalid inclusion generator: {0}")]
    InvalidGenerator(String),
    #[error("affine coefficient gamma1 must be nonzero")]
    DegenerateGamma,
    #[error("point lies inside the inclusion")]
    PointInsideInclusion,
    #[error("body boundary does not satisfy the exclusion conditions: {0}")]
    OmegaTooLarge(String),
    #[error("lambda2 + 2*mu2 vanishes")]
    DegenerateDenominator,
    #[error("perturbation system is degenerate (condition number {0:.3e})")]
    DegeneratePerturbation(f64),
    #[error("linear system is singular")]
    SingularSystem,
    #[error("solver did not converge: residual {0:e}")]
    SolverDiverged(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
