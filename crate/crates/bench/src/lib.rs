//! Shared inputs for the criterion benches in `benches/`.

use ptel_core::{DataFn, Domain2D, Forcing, PrabhakarParams, ProblemN, TelegraphCoeffs};

pub fn regime_params() -> (PrabhakarParams, TelegraphCoeffs) {
    (PrabhakarParams::new(1.0, 0.5, 0.5, -1.0), TelegraphCoeffs { a: -1.0, b: -1.0 })
}

/// φ ≡ 1, M ≡ 1, ψ ≡ 0 on the unit square; the solution is u ≡ 1.
pub fn constant_problem() -> ProblemN {
    let (params, coeffs) = regime_params();
    ProblemN {
        params,
        coeffs,
        domain: Domain2D { q: 1.0, p: 1.0 },
        phi: DataFn::Const(1.0),
        psi: DataFn::Const(0.0),
        m: DataFn::Const(1.0),
        forcing: Forcing::default(),
    }
}
