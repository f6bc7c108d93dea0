//! Slow, independent reference implementations for checking `ptel-core`.
//!
//! Nothing here shares numerical code with the production crate: series are
//! summed directly in MPFR arithmetic, quadrature is adaptive Gauss-Legendre
//! with nodes computed in high precision, and the classical telegraph solver
//! is a plain finite-difference scheme.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

mod fd;
mod integrals;
mod quad;
mod series;

pub use fd::{classical_telegraph_fd, FdGrid};
pub use integrals::{hp_gamma, ml2_weighted_integral, ml3_weighted_integral, prabhakar_kernel_integral};
pub use quad::{adaptive_quad, adaptive_quad_f64, QuadOptions};
pub use series::{hp_ml, hp_ml2, hp_ml3, hp_ml_big, Ml2Coefficients, Ml2Spec, Ml3Coefficients, Ml3Spec};

use rug::ops::PowAssign;
use rug::Float;

/// Arbitrary-precision real.
pub type BigReal = Float;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("series did not settle within {0} shells")]
    NonConvergence(usize),
    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),
}

pub type Result<T> = std::result::Result<T, OracleError>;

/// Working precision in decimal digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Precision {
    pub digits: u32,
}

impl Default for Precision {
    fn default() -> Self {
        Self { digits: 60 }
    }
}

impl Precision {
    pub fn new(digits: u32) -> Result<Self> {
        if digits < 30 {
            return Err(OracleError::InvalidParams(format!("oracle runs need at least 30 digits (got {digits})")));
        }
        Ok(Self { digits })
    }

    pub fn bits(&self) -> u32 {
        (f64::from(self.digits) * std::f64::consts::LOG2_10).ceil() as u32 + 16
    }

    pub fn float(&self, v: f64) -> BigReal {
        Float::with_val(self.bits(), v)
    }

    /// 10^(−digits/2), the absolute tail target of the series oracles.
    pub fn tail_target(&self) -> BigReal {
        let mut t = Float::with_val(self.bits(), 10);
        t.pow_assign(-(i32::try_from(self.digits / 2).unwrap_or(i32::MAX)));
        t
    }
}

/// MPFR library version the oracle is linked against.
pub fn mpfr_version() -> String {
    // SAFETY: mpfr_get_version returns a pointer to a static NUL-terminated string.
    unsafe { std::ffi::CStr::from_ptr(gmp_mpfr_sys::mpfr::get_version()) }.to_string_lossy().into_owned()
}
