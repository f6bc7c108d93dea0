//! Gamma helpers and the Mittag-Leffler family: the three-parameter function
//! E^γ_{α,β}, the bivariate series E₂ and the trivariate series F̄.
//!
//! Multivariate series are summed as nested loops (outermost index first).
//! Each level stops once `consecutive_small` successive slices are negligible
//! relative to the running total, but never before the point where the
//! term ratio along that index has dropped below one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Truncation controls shared by every series evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeriesPolicy {
    pub rel_tol: f64,
    pub max_terms_per_index: usize,
    pub consecutive_small: usize,
}

impl Default for SeriesPolicy {
    fn default() -> Self {
        Self { rel_tol: 1e-12, max_terms_per_index: 2000, consecutive_small: 3 }
    }
}

impl SeriesPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || self.max_terms_per_index == 0 || self.consecutive_small == 0 {
            return Err(Error::InvalidParams(format!(
                "series policy needs rel_tol > 0, max_terms_per_index >= 1, consecutive_small >= 1 (got {self:?})"
            )));
        }
        Ok(())
    }
}

fn is_pole(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// 1/Γ(x), exactly zero at the poles.
pub fn rgamma(x: f64) -> f64 {
    if is_pole(x) {
        return 0.0;
    }
    if x > 171.0 {
        let (lg, _) = libm::lgamma_r(x);
        return (-lg).exp();
    }
    1.0 / libm::tgamma(x)
}

/// ln|Γ(x)| and the sign of Γ(x).
pub fn lgamma_signed(x: f64) -> (f64, f64) {
    let (lg, s) = libm::lgamma_r(x);
    (lg, if s < 0 { -1.0 } else { 1.0 })
}

/// Rising factorial (g)_m.
pub fn pochhammer(g: f64, m: u32) -> f64 {
    (0..m).fold(1.0, |acc, i| acc * (g + f64::from(i)))
}

/// Π Γ(num) / Π Γ(den). A pole in the denominator gives 0; a pole in the
/// numerator is an error.
pub(crate) fn gamma_ratio(num: &[f64], den: &[f64]) -> Result<f64> {
    if let Some(p) = num.iter().copied().find(|&v| is_pole(v)) {
        return Err(Error::InvalidParams(format!("numerator gamma argument {p} is a pole of Γ")));
    }
    if den.iter().any(|&v| is_pole(v)) {
        return Ok(0.0);
    }
    if num.iter().chain(den).all(|v| v.abs() <= 30.0) {
        let mut r = 1.0;
        for &v in num {
            r *= libm::tgamma(v);
        }
        for &v in den {
            r /= libm::tgamma(v);
        }
        return Ok(r);
    }
    let mut l = 0.0;
    let mut sign = 1.0;
    for &v in num {
        let (g, s) = lgamma_signed(v);
        l += g;
        sign *= s;
    }
    for &v in den {
        let (g, s) = lgamma_signed(v);
        l -= g;
        sign *= s;
    }
    Ok(sign * l.exp())
}

/// Index past which the term ratio |w|·Π num^num / Π den^den / n^Δ is below one.
fn ratio_onset(w: f64, num: &[f64], den: &[f64], delta: f64) -> usize {
    let plog = |v: &[f64]| v.iter().filter(|&&a| a > 0.0).map(|&a| a * a.ln()).sum::<f64>();
    let k = w.abs() * (plog(num) - plog(den)).exp();
    if k <= 0.0 || !k.is_finite() {
        return 0;
    }
    let n = k.powf(1.0 / delta).ceil();
    if n > 1e7 {
        usize::MAX
    } else {
        n as usize + 1
    }
}

/// Sums `slice(n)` for n = 0, 1, ... under the policy. `slice` returns the value
/// of the n-th slice and the sum of absolute values it contains; `outer` is the
/// magnitude of everything already accumulated by enclosing levels.
fn sum_level<F>(policy: &SeriesPolicy, what: &'static str, min_index: usize, outer: f64, mut slice: F) -> Result<(f64, f64)>
where
    F: FnMut(usize, f64) -> Result<(f64, f64)>,
{
    let mut s: f64 = 0.0;
    let mut abs: f64 = 0.0;
    let mut small = 0usize;
    for n in 0..policy.max_terms_per_index {
        let scale = outer.max(s.abs());
        let (v, a) = slice(n, scale)?;
        if !v.is_finite() || !a.is_finite() {
            return Err(Error::NonConvergence { what, max_terms: policy.max_terms_per_index });
        }
        s += v;
        abs += a;
        let thresh = policy.rel_tol * scale.max(s.abs()).max(f64::EPSILON * abs);
        if a <= thresh {
            small += 1;
        } else {
            small = 0;
        }
        if small >= policy.consecutive_small && n >= min_index {
            return Ok((s, abs));
        }
    }
    Err(Error::NonConvergence { what, max_terms: policy.max_terms_per_index })
}

/// Three-parameter Mittag-Leffler function Σ (γ)_m z^m / (m! Γ(αm+β)).
pub fn ml_prabhakar(alpha: f64, beta: f64, gamma: f64, z: f64, policy: &SeriesPolicy) -> Result<f64> {
    policy.validate()?;
    if !(alpha > 0.0) || !beta.is_finite() || !gamma.is_finite() || !z.is_finite() {
        return Err(Error::InvalidParams(format!("ml_prabhakar needs alpha > 0 and finite beta, gamma, z (got {alpha}, {beta}, {gamma}, {z})")));
    }
    // Kummer's transformation turns the alternating series into a positive one.
    if alpha == 1.0 && z < -1.0 {
        return Ok(z.exp() * prabhakar_series(1.0, beta, beta - gamma, -z, policy)?);
    }
    prabhakar_series(alpha, beta, gamma, z, policy)
}

fn prabhakar_series(alpha: f64, beta: f64, gamma: f64, z: f64, policy: &SeriesPolicy) -> Result<f64> {
    if z == 0.0 || gamma == 0.0 {
        return Ok(rgamma(beta));
    }
    let min_index = ratio_onset(z, &[], &[alpha], alpha);
    let lz = z.abs().ln();
    // (γ)_m / m! carried as log-magnitude and sign
    let mut lr = 0.0;
    let mut sr = 1.0;
    let mut zero = false;
    let (s, _) = sum_level(policy, "ml_prabhakar", min_index, 0.0, |m, _| {
        if m > 0 {
            let f = (gamma + m as f64 - 1.0) / m as f64;
            if f == 0.0 {
                zero = true;
            } else {
                lr += f.abs().ln();
                sr *= f.signum();
            }
        }
        if zero {
            return Ok((0.0, 0.0));
        }
        let arg = alpha * m as f64 + beta;
        if is_pole(arg) {
            return Ok((0.0, 0.0));
        }
        let (lg, sg) = lgamma_signed(arg);
        let zs = if z < 0.0 && m % 2 == 1 { -1.0 } else { 1.0 };
        let t = sr * sg * zs * (lr + m as f64 * lz - lg).exp();
        Ok((t, t.abs()))
    })?;
    Ok(s)
}

/// Parameters of the bivariate series
/// Σ Γ(a1 m + b1 k + g1) Γ(a2 m + g2) x^m y^k
///   / (Γ(g1) Γ(g2) Γ(a3 m + b2 k + d1) Γ(a4 m + d2) Γ(b3 k + d3)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ml2Params {
    pub a1: f64,
    pub b1: f64,
    pub g1: f64,
    pub a2: f64,
    pub g2: f64,
    pub a3: f64,
    pub b2: f64,
    pub d1: f64,
    pub a4: f64,
    pub d2: f64,
    pub b3: f64,
    pub d3: f64,
}

impl Ml2Params {
    pub fn discriminants(&self) -> (f64, f64) {
        (self.a3 + self.a4 - self.a1 - self.a2, self.b2 + self.b3 - self.b1)
    }

    pub fn validate(&self) -> Result<()> {
        let v = [self.a1, self.b1, self.g1, self.a2, self.g2, self.a3, self.b2, self.d1, self.a4, self.d2, self.b3, self.d3];
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParams("ml2 parameters must be finite".into()));
        }
        let (d1, d2) = self.discriminants();
        if !(d1 > 0.0) {
            return Err(Error::InvalidParams(format!("ml2 discriminant Δ₁ = a3 + a4 - a1 - a2 = {d1} must be positive")));
        }
        if !(d2 > 0.0) {
            return Err(Error::InvalidParams(format!("ml2 discriminant Δ₂ = b2 + b3 - b1 = {d2} must be positive")));
        }
        if [self.a1, self.a3, self.a4, self.b1, self.b2, self.b3].iter().any(|&e| !(e > 0.0)) || self.a2 < 0.0 {
            return Err(Error::InvalidParams("ml2 exponents a1, a3, a4, b1, b2, b3 must be positive and a2 nonnegative".into()));
        }
        Ok(())
    }
}

pub fn discriminants2(p: &Ml2Params) -> (f64, f64) {
    p.discriminants()
}

/// Parameters of the trivariate series
/// Σ Γ(a1 m + b1 k + d1) Γ(a2 m + g1 j + d2) x^m y^j z^k
///   / (Γ(a3 m + b2 k + d3) Γ(a4 m + d4) Γ(a5 m + d5) Γ(b3 k + d6) Γ(g2 j + d7) Γ(g3 j + d8)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ml3Params {
    pub a1: f64,
    pub b1: f64,
    pub d1: f64,
    pub a2: f64,
    pub g1: f64,
    pub d2: f64,
    pub a3: f64,
    pub b2: f64,
    pub d3: f64,
    pub a4: f64,
    pub d4: f64,
    pub a5: f64,
    pub d5: f64,
    pub b3: f64,
    pub d6: f64,
    pub g2: f64,
    pub d7: f64,
    pub g3: f64,
    pub d8: f64,
}

impl Ml3Params {
    pub fn discriminants(&self) -> (f64, f64, f64) {
        (self.a3 + self.a4 + self.a5 - self.a1 - self.a2, self.g2 + self.g3 - self.g1, self.b2 + self.b3 - self.b1)
    }

    pub fn validate(&self) -> Result<()> {
        let exps = [self.a1, self.a2, self.a3, self.a4, self.a5, self.b1, self.b2, self.b3, self.g1, self.g2, self.g3];
        let shifts = [self.d1, self.d2, self.d3, self.d4, self.d5, self.d6, self.d7, self.d8];
        if exps.iter().chain(&shifts).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParams("ml3 parameters must be finite".into()));
        }
        let (d1, d2, d3) = self.discriminants();
        for (name, formula, d) in [("Δ₁", "a3 + a4 + a5 - a1 - a2", d1), ("Δ₂", "g2 + g3 - g1", d2), ("Δ₃", "b2 + b3 - b1", d3)] {
            if !(d > 0.0) {
                return Err(Error::InvalidParams(format!("ml3 discriminant {name} = {formula} = {d} must be positive")));
            }
        }
        if exps.iter().any(|&e| !(e > 0.0)) {
            return Err(Error::InvalidParams("ml3 exponents (a*, b*, g*) must be positive".into()));
        }
        Ok(())
    }
}

pub fn discriminants3(p: &Ml3Params) -> (f64, f64, f64) {
    p.discriminants()
}

/// Reusable E₂ evaluator that caches coefficients across calls.
#[derive(Debug, Clone)]
pub struct Ml2Series {
    p: Ml2Params,
    policy: SeriesPolicy,
    coef: Vec<Vec<f64>>,
}

impl Ml2Series {
    pub fn new(p: Ml2Params, policy: SeriesPolicy) -> Result<Self> {
        p.validate()?;
        policy.validate()?;
        Ok(Self { p, policy, coef: Vec::new() })
    }

    pub fn params(&self) -> &Ml2Params {
        &self.p
    }

    fn coefficient(&mut self, m: usize, k: usize) -> Result<f64> {
        while self.coef.len() <= m {
            self.coef.push(Vec::new());
        }
        let p = self.p;
        let row = &mut self.coef[m];
        while row.len() <= k {
            let kk = row.len() as f64;
            let mm = m as f64;
            let c = gamma_ratio(
                &[p.a1 * mm + p.b1 * kk + p.g1, p.a2 * mm + p.g2],
                &[p.g1, p.g2, p.a3 * mm + p.b2 * kk + p.d1, p.a4 * mm + p.d2, p.b3 * kk + p.d3],
            )?;
            row.push(c);
        }
        Ok(row[k])
    }

    pub fn eval(&mut self, x: f64, y: f64) -> Result<f64> {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::InvalidParams(format!("ml2 arguments must be finite (got {x}, {y})")));
        }
        let p = self.p;
        let (d1, d2) = p.discriminants();
        let m_min = ratio_onset(x, &[p.a1, p.a2], &[p.a3, p.a4], d1);
        let k_min = ratio_onset(y, &[p.b1], &[p.b2, p.b3], d2);
        let policy = self.policy;
        let mut xm = 1.0;
        let (s, _) = sum_level(&policy, "ml2", m_min, 0.0, |m, outer| {
            if m > 0 {
                xm *= x;
            }
            if xm == 0.0 {
                return Ok((0.0, 0.0));
            }
            let mut yk = 1.0;
            sum_level(&policy, "ml2", k_min, outer, |k, _| {
                if k > 0 {
                    yk *= y;
                }
                if yk == 0.0 {
                    return Ok((0.0, 0.0));
                }
                let t = self.coefficient(m, k)? * xm * yk;
                Ok((t, t.abs()))
            })
        })?;
        Ok(s)
    }
}

/// Reusable F̄ evaluator that caches coefficients across calls.
#[derive(Debug, Clone)]
pub struct Ml3Series {
    p: Ml3Params,
    policy: SeriesPolicy,
    coef: Vec<Vec<Vec<f64>>>,
}

impl Ml3Series {
    pub fn new(p: Ml3Params, policy: SeriesPolicy) -> Result<Self> {
        p.validate()?;
        policy.validate()?;
        Ok(Self { p, policy, coef: Vec::new() })
    }

    pub fn params(&self) -> &Ml3Params {
        &self.p
    }

    fn coefficient(&mut self, m: usize, j: usize, k: usize) -> Result<f64> {
        while self.coef.len() <= m {
            self.coef.push(Vec::new());
        }
        let plane = &mut self.coef[m];
        while plane.len() <= j {
            plane.push(Vec::new());
        }
        let p = self.p;
        let row = &mut plane[j];
        let (mm, jj) = (m as f64, j as f64);
        while row.len() <= k {
            let kk = row.len() as f64;
            let c = gamma_ratio(
                &[p.a1 * mm + p.b1 * kk + p.d1, p.a2 * mm + p.g1 * jj + p.d2],
                &[p.a3 * mm + p.b2 * kk + p.d3, p.a4 * mm + p.d4, p.a5 * mm + p.d5, p.b3 * kk + p.d6, p.g2 * jj + p.d7, p.g3 * jj + p.d8],
            )?;
            row.push(c);
        }
        Ok(row[k])
    }

    pub fn eval(&mut self, x: f64, y: f64, z: f64) -> Result<f64> {
        if !x.is_finite() || !y.is_finite() || !z.is_finite() {
            return Err(Error::InvalidParams(format!("ml3 arguments must be finite (got {x}, {y}, {z})")));
        }
        let p = self.p;
        let (d1, d2, d3) = p.discriminants();
        let m_min = ratio_onset(x, &[p.a1, p.a2], &[p.a3, p.a4, p.a5], d1);
        let j_min = ratio_onset(y, &[p.g1], &[p.g2, p.g3], d2);
        let k_min = ratio_onset(z, &[p.b1], &[p.b2, p.b3], d3);
        let policy = self.policy;
        let mut xm = 1.0;
        let (s, _) = sum_level(&policy, "ml3", m_min, 0.0, |m, outer_m| {
            if m > 0 {
                xm *= x;
            }
            if xm == 0.0 {
                return Ok((0.0, 0.0));
            }
            let mut yj = 1.0;
            sum_level(&policy, "ml3", j_min, outer_m, |j, outer_j| {
                if j > 0 {
                    yj *= y;
                }
                if yj == 0.0 {
                    return Ok((0.0, 0.0));
                }
                let mut zk = 1.0;
                let xy = xm * yj;
                sum_level(&policy, "ml3", k_min, outer_j, |k, _| {
                    if k > 0 {
                        zk *= z;
                    }
                    if zk == 0.0 {
                        return Ok((0.0, 0.0));
                    }
                    let t = self.coefficient(m, j, k)? * xy * zk;
                    Ok((t, t.abs()))
                })
            })
        })?;
        Ok(s)
    }
}

pub fn ml2(params: &Ml2Params, x: f64, y: f64, policy: &SeriesPolicy) -> Result<f64> {
    Ml2Series::new(*params, *policy)?.eval(x, y)
}

pub fn ml3(params: &Ml3Params, x: f64, y: f64, z: f64, policy: &SeriesPolicy) -> Result<f64> {
    Ml3Series::new(*params, *policy)?.eval(x, y, z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pol() -> SeriesPolicy {
        SeriesPolicy::default()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    fn tele_e2(alpha: f64, beta: f64, gamma: f64) -> Ml2Params {
        Ml2Params { a1: gamma, b1: 1.0, g1: gamma, a2: 0.0, g2: 1.0, a3: beta, b2: alpha, d1: beta + 1.0, a4: gamma, d2: gamma, b3: 1.0, d3: 1.0 }
    }

    #[test]
    fn rgamma_values() {
        assert_eq!(rgamma(1.0), 1.0);
        assert_eq!(rgamma(0.0), 0.0);
        assert_eq!(rgamma(-3.0), 0.0);
        assert!((rgamma(0.5) - 0.564189583547756).abs() < 1e-15);
        assert!(rgamma(170.0) > 0.0 && rgamma(170.0) < 1e-300);
        assert_eq!(rgamma(200.0), 0.0);
    }

    #[test]
    fn pochhammer_values() {
        assert_eq!(pochhammer(3.0, 2), 12.0);
        assert_eq!(pochhammer(0.7, 0), 1.0);
        assert_eq!(pochhammer(0.0, 5), 0.0);
    }

    #[test]
    fn prabhakar_reductions() {
        let e = ml_prabhakar(1.0, 1.0, 1.0, 1.0, &pol()).unwrap();
        assert!((e - std::f64::consts::E).abs() < 1e-14);
        let c = ml_prabhakar(2.0, 1.0, 1.0, 1.0, &pol()).unwrap();
        assert!((c - 1.543080634815244).abs() < 1e-14);
        assert_eq!(ml_prabhakar(1.3, 0.7, 0.0, 9.0, &pol()).unwrap(), rgamma(0.7));
        assert_eq!(ml_prabhakar(1.3, 0.7, 2.5, 0.0, &pol()).unwrap(), rgamma(0.7));
    }

    #[test]
    fn prabhakar_exp_over_range() {
        for i in 0..=50 {
            let z = -20.0 + 25.0 * i as f64 / 50.0;
            let v = ml_prabhakar(1.0, 1.0, 1.0, z, &pol()).unwrap();
            assert!(rel(v, z.exp()) < 1e-10, "z = {z}: {v}");
        }
    }

    #[test]
    fn prabhakar_rejects_bad_alpha() {
        assert!(matches!(ml_prabhakar(0.0, 1.0, 1.0, 1.0, &pol()), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn prabhakar_reports_nonconvergence() {
        let tight = SeriesPolicy { max_terms_per_index: 5, ..pol() };
        assert!(matches!(ml_prabhakar(1.0, 1.0, 1.0, 3.0, &tight), Err(Error::NonConvergence { .. })));
    }

    #[test]
    fn ml2_origin() {
        let p = Ml2Params { a1: 0.5, b1: 1.0, g1: 0.7, a2: 0.3, g2: 1.2, a3: 1.0, b2: 1.5, d1: 1.3, a4: 0.4, d2: 2.2, b3: 1.0, d3: 0.8 };
        let v = ml2(&p, 0.0, 0.0, &pol()).unwrap();
        let expected = rgamma(1.3) * rgamma(2.2) * rgamma(0.8);
        assert!(rel(v, expected) < 1e-14);
    }

    #[test]
    fn ml2_separable_case() {
        // a1 = a3, g1 = d1, b1 = b2 cancels the coupled ratio.
        let p = Ml2Params { a1: 0.8, b1: 1.0, g1: 1.5, a2: 0.5, g2: 1.0, a3: 0.8, b2: 1.0, d1: 1.5, a4: 1.1, d2: 1.2, b3: 0.9, d3: 1.4 };
        let (x, y) = (-0.7, 0.6);
        let v = ml2(&p, x, y, &pol()).unwrap();
        let sx: f64 = (0..80)
            .map(|m| {
                let m = m as f64;
                libm::tgamma(0.5 * m + 1.0) * rgamma(1.1 * m + 1.2) * x.powf(m)
            })
            .sum();
        let sy: f64 = (0..80).map(|k| rgamma(0.9 * k as f64 + 1.4) * y.powi(k)).sum();
        let expected = sx * sy * rgamma(1.5) * rgamma(1.0);
        assert!(rel(v, expected) < 1e-12, "{v} vs {expected}");
    }

    #[test]
    fn discriminant_examples() {
        let p = tele_e2(1.0, 0.5, 0.5);
        assert_eq!(discriminants2(&p), (0.5, 1.0));
        let mut q = p;
        q.a3 = 0.0;
        q.a4 = 0.5;
        q.a1 = 0.5;
        q.a2 = 0.0;
        assert_eq!(q.discriminants().0, 0.0);
        let err = ml2(&q, 0.1, 0.1, &pol()).unwrap_err();
        assert!(err.to_string().contains("Δ₁"));
    }

    #[test]
    fn ml3_origin_and_axis() {
        let p = Ml3Params {
            a1: 0.5,
            b1: 1.0,
            d1: 0.5,
            a2: 1.0,
            g1: 1.0,
            d2: 2.0,
            a3: 0.5,
            b2: 1.0,
            d3: 1.5,
            a4: 0.5,
            d4: 0.5,
            a5: 1.0,
            d5: 2.0,
            b3: 1.0,
            d6: 1.0,
            g2: 1.0,
            d7: 1.0,
            g3: 1.0,
            d8: 1.0,
        };
        let v0 = ml3(&p, 0.0, 0.0, 0.0, &pol()).unwrap();
        let e0 = libm::tgamma(0.5) * libm::tgamma(2.0) * rgamma(1.5) * rgamma(0.5) * rgamma(2.0);
        assert!(rel(v0, e0) < 1e-14);

        let x = -0.8;
        let v = ml3(&p, x, 0.0, 0.0, &pol()).unwrap();
        let e: f64 = (0..100)
            .map(|m| {
                let m = m as f64;
                libm::tgamma(0.5 * m + 0.5) * libm::tgamma(m + 2.0) * x.powf(m) * rgamma(0.5 * m + 1.5) * rgamma(0.5 * m + 0.5) * rgamma(m + 2.0)
            })
            .sum();
        assert!(rel(v, e) < 1e-12, "{v} vs {e}");
    }

    #[test]
    fn numerator_pole_is_invalid() {
        let mut p = tele_e2(1.0, 0.5, 0.5);
        p.g2 = -1.0;
        assert!(matches!(ml2(&p, 0.1, 0.1, &pol()), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn denominator_pole_terms_vanish() {
        // Γ(b3 k + d3) with d3 = -1, b3 = 1: k = 0, 1 are poles.
        let p = Ml2Params { a1: 0.5, b1: 1.0, g1: 1.0, a2: 0.0, g2: 1.0, a3: 1.0, b2: 1.0, d1: 1.0, a4: 0.5, d2: 1.0, b3: 1.0, d3: -1.0 };
        let v = ml2(&p, 0.0, 0.5, &pol()).unwrap();
        let e: f64 = (2..60).map(|k| libm::tgamma(k as f64 + 1.0) * rgamma(k as f64 + 1.0) * rgamma(k as f64 - 1.0) * 0.5f64.powi(k)).sum();
        assert!(rel(v, e) < 1e-13);
    }

    #[test]
    fn telegraph_e2_positive() {
        for bi in 1..=9 {
            let beta = bi as f64 / 10.0;
            let p = tele_e2(1.0, beta, beta);
            let mut s = Ml2Series::new(p, pol()).unwrap();
            for ti in 1..=20 {
                let t = ti as f64 / 20.0;
                let v = s.eval(-t.powf(beta), -t).unwrap();
                assert!(v > 0.0, "β = {beta}, t = {t}: {v}");
            }
        }
    }

    #[test]
    fn lemma_regime_bounded() {
        let p = Ml3Params {
            a1: 0.5,
            b1: 1.0,
            d1: 0.5,
            a2: 1.0,
            g1: 1.0,
            d2: 2.0,
            a3: 0.5,
            b2: 1.0,
            d3: 1.5,
            a4: 0.5,
            d4: 0.5,
            a5: 1.0,
            d5: 1.0,
            b3: 1.0,
            d6: 1.0,
            g2: 1.0,
            d7: 1.0,
            g3: 1.0,
            d8: 1.0,
        };
        let mut s = Ml3Series::new(p, pol()).unwrap();
        let mut c: f64 = 0.0;
        for i in 0..10 {
            for j in 0..10 {
                for k in 0..10 {
                    let v = s.eval(-0.3 * i as f64, -0.3 * j as f64, -0.3 * k as f64).unwrap();
                    assert!(v.is_finite());
                    c = c.max(v.abs());
                }
            }
        }
        assert!(c.is_finite() && c > 0.0);
    }

    #[test]
    fn policy_validation() {
        assert!(SeriesPolicy { rel_tol: 0.0, ..pol() }.validate().is_err());
        assert!(SeriesPolicy { max_terms_per_index: 0, ..pol() }.validate().is_err());
        assert!(SeriesPolicy { consecutive_small: 0, ..pol() }.validate().is_err());
    }

    proptest! {
        #[test]
        fn prabhakar_at_zero(alpha in 0.1f64..3.0, beta in 0.05f64..4.0, gamma in -2.0f64..3.0) {
            let v = ml_prabhakar(alpha, beta, gamma, 0.0, &pol()).unwrap();
            prop_assert!((v * libm::tgamma(beta) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn more_terms_do_not_move_converged_value(
            beta in 0.2f64..0.95, x in -2.0f64..0.5, y in -2.0f64..0.5,
        ) {
            let p = tele_e2(1.0, beta, beta);
            let v1 = ml2(&p, x, y, &pol()).unwrap();
            let v2 = ml2(&p, x, y, &SeriesPolicy { max_terms_per_index: 8000, ..pol() }).unwrap();
            prop_assert!((v1 - v2).abs() <= 1e-12 * v1.abs().max(1e-300));
        }

        #[test]
        fn cached_and_fresh_agree(beta in 0.2f64..0.95, x in -1.0f64..0.5, y in -1.0f64..0.5) {
            let p = tele_e2(1.0, beta, beta);
            let mut s = Ml2Series::new(p, pol()).unwrap();
            s.eval(-2.0, -2.0).unwrap();
            prop_assert_eq!(s.eval(x, y).unwrap(), ml2(&p, x, y, &pol()).unwrap());
        }
    }
}
