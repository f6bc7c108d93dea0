//! Adaptive Gauss-Legendre quadrature in MPFR arithmetic.

use rug::ops::Pow;
use rug::Float;

use crate::{BigReal, OracleError, Precision, Result};

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub prec: Precision,
    /// Gauss-Legendre points per panel.
    pub order: usize,
    pub abs_tol: f64,
    pub max_depth: u32,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { prec: Precision::new(40).expect("40 digits"), order: 16, abs_tol: 1e-15, max_depth: 60, max_panels: 200_000 }
    }
}

/// Nodes and weights on [0, 1].
fn gauss_legendre(n: usize, prec: Precision) -> Vec<(BigReal, BigReal)> {
    let bits = prec.bits();
    let tiny = {
        let mut t = Float::with_val(bits, 2);
        t = t.pow(-(bits as i32) + 8);
        t
    };
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut x = Float::with_val(bits, guess);
        let mut dp = Float::new(bits);
        for _ in 0..100 {
            // P_n(x) and P_n'(x) by the three-term recurrence
            let mut p0 = Float::with_val(bits, 1);
            let mut p1 = x.clone();
            for k in 2..=n {
                let kf = k as u32;
                let p2 = (Float::with_val(bits, &x * &p1) * (2 * kf - 1) - Float::with_val(bits, &p0 * (kf - 1))) / kf;
                p0 = p1;
                p1 = p2;
            }
            let one_minus = Float::with_val(bits, 1) - Float::with_val(bits, &x * &x);
            dp = (Float::with_val(bits, &p0) - Float::with_val(bits, &x * &p1)) * (n as u32) / one_minus;
            let dx = Float::with_val(bits, &p1 / &dp);
            x -= &dx;
            if dx.abs() < tiny {
                break;
            }
        }
        let one_minus = Float::with_val(bits, 1) - Float::with_val(bits, &x * &x);
        let w = Float::with_val(bits, 2) / (one_minus * Float::with_val(bits, &dp * &dp));
        // map [-1, 1] to [0, 1]
        let node = (Float::with_val(bits, 1) - x) / 2u32;
        out.push((node, w / 2u32));
    }
    out
}

struct Integrator<'a> {
    rule: Vec<(BigReal, BigReal)>,
    opts: QuadOptions,
    panels: usize,
    f: &'a mut dyn FnMut(&BigReal) -> Result<BigReal>,
}

impl Integrator<'_> {
    fn panel(&mut self, lo: &BigReal, hi: &BigReal) -> Result<BigReal> {
        let bits = self.opts.prec.bits();
        let len = Float::with_val(bits, hi - lo);
        let mut s = Float::new(bits);
        for (u, w) in &self.rule {
            let x = Float::with_val(bits, lo + Float::with_val(bits, &len * u));
            s += Float::with_val(bits, w * (self.f)(&x)?);
        }
        Ok(s * len)
    }

    fn recurse(&mut self, lo: BigReal, hi: BigReal, whole: BigReal, tol: f64, depth: u32) -> Result<BigReal> {
        let bits = self.opts.prec.bits();
        let mid = Float::with_val(bits, &lo + &hi) / 2u32;
        let left = self.panel(&lo, &mid)?;
        let right = self.panel(&mid, &hi)?;
        self.panels += 2;
        let both = Float::with_val(bits, &left + &right);
        let err = Float::with_val(bits, &both - &whole).abs().to_f64();
        if !err.is_finite() {
            return Err(OracleError::QuadratureFailure(format!("non-finite integrand near {}", mid.to_f64())));
        }
        if err <= tol {
            return Ok(both);
        }
        if depth >= self.opts.max_depth || self.panels >= self.opts.max_panels {
            return Err(OracleError::QuadratureFailure(format!("error estimate {err:.3e} above {tol:.3e} after {} panels", self.panels)));
        }
        // halve per level, but not below the integrand's own noise
        let sub = (tol / 2.0).max(self.opts.abs_tol * 1e-4);
        let l = self.recurse(lo, mid.clone(), left, sub, depth + 1)?;
        let r = self.recurse(mid, hi, right, sub, depth + 1)?;
        Ok(l + r)
    }
}

/// ∫_a^b (s − a)^w f(s) ds for w > −1.
///
/// The substitution s = a + (b − a)·u^{1/(1+w)} removes the weight, then
/// panels are bisected until a panel and its two halves agree.
pub fn adaptive_quad(f: &mut dyn FnMut(&BigReal) -> Result<BigReal>, a: f64, b: f64, weight_exponent: f64, opts: QuadOptions) -> Result<BigReal> {
    if !(weight_exponent > -1.0) || !a.is_finite() || !b.is_finite() || !(b >= a) {
        return Err(OracleError::InvalidParams(format!("need finite a ≤ b and weight exponent > −1 (got [{a}, {b}], {weight_exponent})")));
    }
    let prec = opts.prec;
    let bits = prec.bits();
    if a == b {
        return Ok(Float::new(bits));
    }
    let lo = prec.float(a);
    let len = prec.float(b - a);
    let w1 = prec.float(1.0 + weight_exponent);
    let inv = Float::with_val(bits, 1) / &w1;
    let scale = Float::with_val(bits, (&len).pow(&w1)) / &w1;
    let mut g = |u: &BigReal| -> Result<BigReal> {
        let s = Float::with_val(bits, &lo + Float::with_val(bits, &len * Float::with_val(bits, u.pow(&inv))));
        f(&s)
    };
    let mut it = Integrator { rule: gauss_legendre(opts.order, prec), opts, panels: 1, f: &mut g };
    let zero = Float::new(bits);
    let one = Float::with_val(bits, 1);
    let tol = opts.abs_tol / scale.to_f64().abs().max(f64::MIN_POSITIVE);
    let whole = it.panel(&zero, &one)?;
    let v = it.recurse(zero, one, whole, tol, 0)?;
    Ok(v * scale)
}

/// `adaptive_quad` for an f64 integrand, returning f64.
pub fn adaptive_quad_f64(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, weight_exponent: f64, opts: QuadOptions) -> Result<f64> {
    let bits = opts.prec.bits();
    let mut g = |s: &BigReal| -> Result<BigReal> { Ok(Float::with_val(bits, f(s.to_f64()))) };
    Ok(adaptive_quad(&mut g, a, b, weight_exponent, opts)?.to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_integrate_polynomials_exactly() {
        let p = Precision::default();
        let rule = gauss_legendre(10, p);
        // ∫_0^1 x^19 = 1/20
        let mut s = Float::new(p.bits());
        for (x, w) in &rule {
            s += Float::with_val(p.bits(), x.pow(19u32)) * w;
        }
        let d = Float::with_val(p.bits(), s - Float::with_val(p.bits(), 1) / 20u32).abs();
        assert!(d.to_f64() < 1e-50);
    }

    #[test]
    fn weighted_endpoint_singularity() {
        // ∫_0^1 s^{-1/2} e^s ds = Σ 1/(k! (k + 1/2))
        let mut want = 0.0;
        let mut fact = 1.0;
        for k in 0..30 {
            if k > 0 {
                fact *= k as f64;
            }
            want += 1.0 / (fact * (k as f64 + 0.5));
        }
        let v = adaptive_quad_f64(&mut |s| s.exp(), 0.0, 1.0, -0.5, QuadOptions::default()).unwrap();
        assert!((v - want).abs() < 1e-14, "{v} {want}");
    }

    #[test]
    fn interior_kink_and_shifted_interval() {
        let v = adaptive_quad_f64(&mut |s| (s - 1.3).abs(), 1.0, 2.0, 0.0, QuadOptions::default()).unwrap();
        assert!((v - (0.045 + 0.245)).abs() < 1e-13, "{v}");
        let w = adaptive_quad_f64(&mut |_| 1.0, 2.0, 3.0, 0.7, QuadOptions::default()).unwrap();
        assert!((w - 1.0 / 1.7).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(adaptive_quad_f64(&mut |_| 1.0, 0.0, 1.0, -1.0, QuadOptions::default()).is_err());
        assert!(adaptive_quad_f64(&mut |_| 1.0, 1.0, 0.0, 0.0, QuadOptions::default()).is_err());
    }
}
