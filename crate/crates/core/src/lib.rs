//! Structured decompositions of matrices as short sums of rank-one terms
//! `X = sum_m lambda_m u_m v_m^T` with the factors `u_m`, `v_m` drawn from
//! prescribed atomic sets.  The central object is the decomposition gauge:
//! the smallest total weight `sum_m lambda_m` over all such expansions.
//!
//! The crate provides
//!
//! * atomic sets (norm balls, the simplex, binary vectors, elastic-net
//!   style sets) with their gauges, polars and support maximizers,
//! * semidefinite outer approximations of the quadratic-form sets
//!   `{u u^T : u in U}` and the induced computable bounds on the gauge and
//!   its polar,
//! * randomized and spectral rounding schemes that turn a semidefinite
//!   solution back into feasible atoms with approximation guarantees,
//! * conditional-gradient and simplicial (fully corrective) solvers for the
//!   penalized decomposition problem, robust to multiplicatively
//!   approximate polar oracles,
//! * reproducible experiment drivers and the acceptance checks used to
//!   validate the implementation.

pub mod atomic;
pub mod decomp;
pub mod error;
pub mod experiments;
pub mod numerics;
pub mod oracle;
pub mod relax;
pub mod sdp;

pub use error::{Error, Result};
