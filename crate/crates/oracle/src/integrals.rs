//! Reference integrals built from the series oracles and `adaptive_quad`.

use rug::ops::Pow;
use rug::Float;

use crate::series::hp_ml_big;
use crate::{adaptive_quad, BigReal, Ml2Coefficients, Ml2Spec, Ml3Coefficients, Ml3Spec, QuadOptions, Result};

fn powf(s: &BigReal, e: f64) -> BigReal {
    if s.is_zero() {
        return s.clone();
    }
    Float::with_val(s.prec(), s.pow(Float::with_val(s.prec(), e)))
}

fn scaled(prec: u32, v: BigReal, c: f64) -> BigReal {
    Float::with_val(prec, v * c)
}

/// ∫₀ᵗ s^{β−1} E^γ_{α,β}(δ s^α) ds.
pub fn prabhakar_kernel_integral(alpha: f64, beta: f64, gamma: f64, delta: f64, t: f64, opts: QuadOptions) -> Result<f64> {
    let bits = opts.prec.bits();
    let mut f = |s: &BigReal| hp_ml_big(alpha, beta, gamma, &scaled(bits, powf(s, alpha), delta), opts.prec);
    Ok(adaptive_quad(&mut f, 0.0, t, beta - 1.0, opts)?.to_f64())
}

/// ∫₀^q t^β E(a t^β, δ t^α) dt for a bivariate series E.
pub fn ml2_weighted_integral(spec: Ml2Spec, alpha: f64, beta: f64, a: f64, delta: f64, q: f64, opts: QuadOptions) -> Result<f64> {
    let bits = opts.prec.bits();
    let mut e = Ml2Coefficients::new(spec, opts.prec)?;
    let mut f = |t: &BigReal| e.eval_big(&scaled(bits, powf(t, beta), a), &scaled(bits, powf(t, alpha), delta));
    Ok(adaptive_quad(&mut f, 0.0, q, beta, opts)?.to_f64())
}

/// ∫₀^q t^β F(a t^β, y, δ t^α) dt for a trivariate series F.
#[allow(clippy::too_many_arguments)]
pub fn ml3_weighted_integral(spec: Ml3Spec, alpha: f64, beta: f64, a: f64, y: f64, delta: f64, q: f64, opts: QuadOptions) -> Result<f64> {
    let bits = opts.prec.bits();
    let yb = opts.prec.float(y);
    let mut e = Ml3Coefficients::new(spec, opts.prec)?;
    let mut f = |t: &BigReal| e.eval_big(&scaled(bits, powf(t, beta), a), &yb, &scaled(bits, powf(t, alpha), delta));
    Ok(adaptive_quad(&mut f, 0.0, q, beta, opts)?.to_f64())
}

/// Γ(x) rounded to f64.
pub fn hp_gamma(x: f64, opts: QuadOptions) -> f64 {
    opts.prec.float(x).gamma().to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{hp_ml, Precision};

    #[test]
    fn kernel_integral_matches_termwise_identity() {
        let opts = QuadOptions::default();
        let (al, be, ga, de, t) = (1.3, 0.6, 0.8, -1.1, 0.9);
        let q = prabhakar_kernel_integral(al, be, ga, de, t, opts).unwrap();
        let closed = f64::powf(t, be) * hp_ml(al, be + 1.0, ga, de * f64::powf(t, al), Precision::default()).unwrap();
        assert!((q - closed).abs() < 1e-13, "{q} {closed}");
    }

    #[test]
    fn plain_power_integrals() {
        // ∫₀¹ s^{-1/2} ds = 2 and γ = 0 collapses the kernel to s^{β−1}/Γ(β).
        let opts = QuadOptions::default();
        let v = prabhakar_kernel_integral(1.0, 0.5, 0.0, 3.0, 1.0, opts).unwrap();
        assert!((v * hp_gamma(0.5, opts) - 2.0).abs() < 1e-13);
        let e = crate::adaptive_quad_f64(&mut f64::exp, 0.0, 1.0, 0.0, opts).unwrap();
        assert!((e - (std::f64::consts::E - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn weighted_series_integral_of_separable_case() {
        // E(x, y) = e^x e^y; ∫₀¹ t e^{-t} e^{0·t} dt = 1 − 2/e with β = 1, a = −1, δ = 0.
        let s = Ml2Spec { a1: 0.0, b1: 0.0, g1: 1.0, a2: 0.0, g2: 1.0, a3: 0.0, b2: 0.0, d1: 1.0, a4: 1.0, d2: 1.0, b3: 1.0, d3: 1.0 };
        let v = ml2_weighted_integral(s, 1.0, 1.0, -1.0, 0.0, 1.0, QuadOptions::default()).unwrap();
        assert!((v - (1.0 - 2.0 / std::f64::consts::E)).abs() < 1e-14);
    }
}
