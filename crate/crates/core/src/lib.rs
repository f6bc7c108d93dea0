//! Numerics for a nonlocal boundary value problem of the time-fractional
//! generalized telegraph equation with the Caputo-Prabhakar derivative.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod datafn;
pub mod error;
pub mod expr;
pub mod fracops;
pub mod goursat;
pub mod problem;
pub mod quadrature;
pub mod specfun;
pub mod volterra;

pub use datafn::DataFn;
pub use error::{Error, Result};
pub use fracops::{PrabhakarParams, QuadPolicy};
pub use goursat::{Domain2D, Forcing, GoursatOptions, TelegraphCoeffs, TraceSolution, Variant};
pub use problem::{GridSolution, ProblemN, ResidualReport, SolveOptions, Thresholds};
pub use specfun::{Ml2Params, Ml3Params, SeriesPolicy};
pub use volterra::{NonlocalConstant, VolterraSystem};
