//! Numerical laboratory for period-doubling-type renormalization of
//! unimodal maps, decomposed as pairs (phi, t): a diffeomorphic factor
//! phi composed with the standard folding family
//! `q_t(x) = -2t|x|^alpha + 2t - 1`.
//!
//! The crate finds interval cycles certifying renormalizability, applies
//! the decomposed renormalization operator, solves for its fixed points
//! by Newton iteration on Chebyshev coefficients, linearizes to extract
//! the expanding eigenvalue (the universal constant delta), and checks
//! the geometric estimates (real bounds, decomposition decay, univalence
//! screens) that make the whole picture hang together.

pub mod bounds;
pub mod cheb;
pub mod cycle;
pub mod diffeo;
pub mod error;
pub mod interval;
pub mod levels;
pub mod oracle;
pub mod pair;
pub mod perm;
pub mod qt;
pub mod renorm;
pub mod roots;
pub mod solver;
pub mod spectral;

pub use bounds::{
    decomposition_decay, near_identity_bound_check, real_bounds_report, safe_univalence_radius,
    stadium_propagation, univalence_check, BoundsReport, NearIdentityReport,
};
pub use cheb::{sup_dist, ChebPoly, RealMap};
pub use cycle::{find_cycle, find_cycle_with, nested_cycles, Cycle};
pub use diffeo::{compose_refit, zoom, PolyDiffeo, Zoomed};
pub use error::{Error, Result};
pub use interval::{AffineMap, OrientedInterval, Orientation, Stadium};
pub use oracle::{cascade_delta, cascade_scaling, CascadeReport, ScalingReport};
pub use pair::{pair_dist, Pair, TangentPair};
pub use perm::UnimodalPermutation;
pub use qt::{Branch, QtParams};
pub use renorm::{
    classic_renormalize, compose_tangent, injectivity_probe, renormalize, renormalize_tangent,
    renormalize_with_cycle, tangent_lift, DecomposedStep,
};
pub use solver::{
    continue_in_alpha, find_superstable_t, fixed_point, fixed_point_with_tol, iterate_orbit,
    superstable_cascade, FixedPointRecord, OrbitTrace,
};
pub use spectral::{
    delta_of_alpha, jacobian_matrix, spectral_report, spectrum, spectrum_equality_check,
    tangent_jacobian, SpectralReport, SpectrumComparison,
};
