use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes for construction, geometry, and the numerical pipelines.
///
/// `NoCycle` and friends describe a *negative answer on a valid input*
/// (the map simply is not renormalizable with the requested data); the
/// other variants are genuine numerical or contract failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("degenerate interval [{lo}, {hi}]")]
    DegenerateInterval { lo: f64, hi: f64 },

    #[error("non-finite sample while fitting at degree {degree}")]
    NonFiniteSample { degree: usize },

    #[error("endpoint condition violated: phi(-1)={at_neg1:e}, phi(1)={at_pos1:e} (tolerance 1e-12 about -1, 1)")]
    EndpointInvariant { at_neg1: f64, at_pos1: f64 },

    #[error("derivative not strictly positive on check grid (min {min:e} at x={at})")]
    DerivativeNotPositive { min: f64, at: f64 },

    #[error("map is not monotone on [{lo}, {hi}]")]
    Monotonicity { lo: f64, hi: f64 },

    #[error("inner map leaves the outer domain: value {value} at x={at}")]
    RangeViolation { value: f64, at: f64 },

    #[error("sector violation: z={z} outside the admissible sector for alpha={alpha}, branch {branch}")]
    SectorViolation { z: String, alpha: f64, branch: i8 },

    #[error("root bracketing failed: {0}")]
    RootBracket(String),

    #[error("root refinement failed to converge: {0}")]
    RootRefine(String),

    #[error("no admissible cycle of period {period} at t={t}, alpha={alpha}")]
    NoCycle { period: usize, t: f64, alpha: f64 },

    #[error("cycle combinatorics {found} do not match the requested type {requested}")]
    CombinatoricsMismatch { requested: String, found: String },

    #[error("not a valid unimodal permutation: {0}")]
    BadPermutation(String),

    #[error("nesting violated between levels {parent} and {child}: {detail}")]
    Nesting { parent: usize, child: usize, detail: String },

    #[error("Newton did not converge after {steps} steps (last residual {residual:e}) at alpha={alpha}")]
    NewtonDiverged { steps: usize, residual: f64, alpha: f64 },

    #[error("renormalizability lost during iteration at step {step}: {detail}")]
    CycleLost { step: usize, detail: String },

    #[error("perturbed map left the renormalizable set even after shrinking the step to {fd_step:e}")]
    PerturbationLost { fd_step: f64 },

    #[error("eigenvalue computation failed: {0}")]
    Eigen(String),

    #[error("tangent field has odd-coefficient mass {mass:e}; not a function of x^(2r)")]
    NotEvenField { mass: f64 },

    #[error("tangent field is not representable through the fold power: reconstruction error {err:e}")]
    NotRepresentable { err: f64 },

    #[error("cascade too shallow: produced {got} usable ratios, need {need}")]
    InsufficientDepth { got: usize, need: usize },

    #[error("test map rejected: {0}")]
    RejectedTestMap(String),
}
