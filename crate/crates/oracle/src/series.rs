//! Direct high-precision summation of the Prabhakar, bivariate and trivariate
//! Mittag-Leffler series.
//!
//! Terms are grouped in shells of fixed total degree. Summation stops once
//! shells decay geometrically and the geometric tail bound drops below
//! 10^(−digits/2).

use std::collections::HashMap;

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::{BigReal, OracleError, Precision, Result};

const MAX_SHELL_1D: usize = 20_000;
const MAX_SHELL_2D: usize = 1_500;
const MAX_SHELL_3D: usize = 400;
const MIN_SHELLS: usize = 8;
const DECAY_RATIO: f64 = 0.95;
const DECAYING_SHELLS: usize = 3;

/// Field layout matches the production bivariate parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ml2Spec {
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

/// Field layout matches the production trivariate parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ml3Spec {
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

fn is_pole(x: &Float) -> bool {
    x.is_integer() && *x <= 0
}

fn gamma(prec: Precision, x: &Float) -> Result<BigReal> {
    if is_pole(x) {
        return Err(OracleError::InvalidParams(format!("Γ pole in a numerator at {}", x.to_f64())));
    }
    Ok(Float::with_val(prec.bits(), x.gamma_ref()))
}

fn rgamma(prec: Precision, x: &Float) -> BigReal {
    if is_pole(x) {
        return Float::new(prec.bits());
    }
    Float::with_val(prec.bits(), 1) / Float::with_val(prec.bits(), x.gamma_ref())
}

/// a·n + b·m + c evaluated exactly from the f64 inputs.
fn affine(prec: Precision, terms: &[(f64, usize)], c: f64) -> BigReal {
    let mut s = prec.float(c);
    for &(a, n) in terms {
        s += prec.float(a) * Float::with_val(prec.bits(), n);
    }
    s
}

/// Tracks shell magnitudes and decides when the tail is negligible.
struct Stopper {
    target: BigReal,
    prev: Option<BigReal>,
    decaying: usize,
    zeros: usize,
}

impl Stopper {
    fn new(prec: Precision) -> Self {
        Self { target: prec.tail_target(), prev: None, decaying: 0, zeros: 0 }
    }

    fn done(&mut self, n: usize, shell_abs: BigReal) -> bool {
        if shell_abs.is_zero() {
            self.zeros += 1;
        } else {
            self.zeros = 0;
        }
        let stop = match &self.prev {
            Some(prev) if !prev.is_zero() && !shell_abs.is_zero() => {
                let r = Float::with_val(shell_abs.prec(), &shell_abs / prev);
                if r.to_f64() < DECAY_RATIO {
                    self.decaying += 1;
                    let one = Float::with_val(r.prec(), 1);
                    let tail = Float::with_val(r.prec(), &shell_abs * &r) / (one - &r);
                    self.decaying >= DECAYING_SHELLS && tail < self.target
                } else {
                    self.decaying = 0;
                    false
                }
            }
            _ => self.zeros >= DECAYING_SHELLS,
        };
        self.prev = Some(shell_abs);
        n + 1 >= MIN_SHELLS && stop
    }
}

/// Prabhakar function E^γ_{α,β}(z) = Σ (γ)_k z^k / (k! Γ(αk + β)).
pub fn hp_ml(alpha: f64, beta: f64, gamma_: f64, z: f64, prec: Precision) -> Result<f64> {
    Ok(hp_ml_big(alpha, beta, gamma_, &prec.float(z), prec)?.to_f64())
}

pub fn hp_ml_big(alpha: f64, beta: f64, gamma_: f64, z: &Float, prec: Precision) -> Result<BigReal> {
    if !(alpha > 0.0) || ![beta, gamma_].iter().all(|v| v.is_finite()) {
        return Err(OracleError::InvalidParams(format!("Prabhakar needs α > 0 and finite β, γ (got {alpha}, {beta}, {gamma_})")));
    }
    let bits = prec.bits();
    let mut sum = Float::new(bits);
    // (γ)_k z^k / k!
    let mut lead = Float::with_val(bits, 1);
    let mut stop = Stopper::new(prec);
    for k in 0..MAX_SHELL_1D {
        if k > 0 {
            lead *= affine(prec, &[], gamma_) + Float::with_val(bits, k - 1);
            lead *= z;
            lead /= Float::with_val(bits, k);
        }
        let term = Float::with_val(bits, &lead * rgamma(prec, &affine(prec, &[(alpha, k)], beta)));
        sum += &term;
        if stop.done(k, term.abs()) {
            return Ok(sum);
        }
    }
    Err(OracleError::NonConvergence(MAX_SHELL_1D))
}

/// Coefficient table of the bivariate series; reusable across arguments.
pub struct Ml2Coefficients {
    spec: Ml2Spec,
    prec: Precision,
    shells: Vec<Vec<BigReal>>,
}

impl Ml2Coefficients {
    pub fn new(spec: Ml2Spec, prec: Precision) -> Result<Self> {
        let s = spec;
        let all = [s.a1, s.b1, s.g1, s.a2, s.g2, s.a3, s.b2, s.d1, s.a4, s.d2, s.b3, s.d3];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(OracleError::InvalidParams("ml2 parameters must be finite".into()));
        }
        if !(s.a3 + s.a4 - s.a1 - s.a2 > 0.0) || !(s.b2 + s.b3 - s.b1 > 0.0) {
            return Err(OracleError::InvalidParams("ml2 discriminants must be positive".into()));
        }
        Ok(Self { spec, prec, shells: Vec::new() })
    }

    fn shell(&mut self, n: usize) -> Result<&[BigReal]> {
        while self.shells.len() <= n {
            let n = self.shells.len();
            let (s, p) = (self.spec, self.prec);
            let norm = rgamma(p, &p.float(s.g1)) * rgamma(p, &p.float(s.g2));
            let mut row = Vec::with_capacity(n + 1);
            for m in 0..=n {
                let k = n - m;
                let mut c = Float::with_val(p.bits(), &norm);
                c *= gamma(p, &affine(p, &[(s.a1, m), (s.b1, k)], s.g1))?;
                c *= gamma(p, &affine(p, &[(s.a2, m)], s.g2))?;
                c *= rgamma(p, &affine(p, &[(s.a3, m), (s.b2, k)], s.d1));
                c *= rgamma(p, &affine(p, &[(s.a4, m)], s.d2));
                c *= rgamma(p, &affine(p, &[(s.b3, k)], s.d3));
                row.push(c);
            }
            self.shells.push(row);
        }
        Ok(&self.shells[n])
    }

    pub fn eval_big(&mut self, x: &Float, y: &Float) -> Result<BigReal> {
        let bits = self.prec.bits();
        let mut xp = vec![Float::with_val(bits, 1)];
        let mut yp = vec![Float::with_val(bits, 1)];
        let mut sum = Float::new(bits);
        let mut stop = Stopper::new(self.prec);
        for n in 0..MAX_SHELL_2D {
            if n > 0 {
                xp.push(Float::with_val(bits, &xp[n - 1] * x));
                yp.push(Float::with_val(bits, &yp[n - 1] * y));
            }
            let row = self.shell(n)?;
            let mut abs = Float::new(bits);
            for (m, c) in row.iter().enumerate() {
                let t = Float::with_val(bits, c * &xp[m]) * &yp[n - m];
                abs += Float::with_val(bits, t.abs_ref());
                sum += t;
            }
            if stop.done(n, abs) {
                return Ok(sum);
            }
        }
        Err(OracleError::NonConvergence(MAX_SHELL_2D))
    }

    pub fn eval(&mut self, x: f64, y: f64) -> Result<f64> {
        let p = self.prec;
        Ok(self.eval_big(&p.float(x), &p.float(y))?.to_f64())
    }
}

/// Coefficient table of the trivariate series; reusable across arguments.
pub struct Ml3Coefficients {
    spec: Ml3Spec,
    prec: Precision,
    shells: Vec<Vec<BigReal>>,
    gammas: HashMap<(u8, usize, usize), BigReal>,
}

impl Ml3Coefficients {
    pub fn new(spec: Ml3Spec, prec: Precision) -> Result<Self> {
        let s = spec;
        let all = [s.a1, s.b1, s.d1, s.a2, s.g1, s.d2, s.a3, s.b2, s.d3, s.a4, s.d4, s.a5, s.d5, s.b3, s.d6, s.g2, s.d7, s.g3, s.d8];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(OracleError::InvalidParams("ml3 parameters must be finite".into()));
        }
        let disc = [s.a3 + s.a4 + s.a5 - s.a1 - s.a2, s.g2 + s.g3 - s.g1, s.b2 + s.b3 - s.b1];
        if disc.iter().any(|d| !(*d > 0.0)) {
            return Err(OracleError::InvalidParams("ml3 discriminants must be positive".into()));
        }
        Ok(Self { spec, prec, shells: Vec::new(), gammas: HashMap::new() })
    }

    /// Cached Γ (numerator slots 0, 1) or 1/Γ (slots 2..) factor.
    fn factor(&mut self, slot: u8, i: usize, l: usize) -> Result<BigReal> {
        if let Some(v) = self.gammas.get(&(slot, i, l)) {
            return Ok(v.clone());
        }
        let (s, p) = (self.spec, self.prec);
        let v = match slot {
            0 => gamma(p, &affine(p, &[(s.a1, i), (s.b1, l)], s.d1))?,
            1 => gamma(p, &affine(p, &[(s.a2, i), (s.g1, l)], s.d2))?,
            2 => rgamma(p, &affine(p, &[(s.a3, i), (s.b2, l)], s.d3)),
            3 => Float::with_val(p.bits(), rgamma(p, &affine(p, &[(s.a4, i)], s.d4)) * rgamma(p, &affine(p, &[(s.a5, i)], s.d5))),
            4 => rgamma(p, &affine(p, &[(s.b3, i)], s.d6)),
            _ => Float::with_val(p.bits(), rgamma(p, &affine(p, &[(s.g2, i)], s.d7)) * rgamma(p, &affine(p, &[(s.g3, i)], s.d8))),
        };
        self.gammas.insert((slot, i, l), v.clone());
        Ok(v)
    }

    /// Shell n lists (m, j, k) with m + j + k = n, m outer, j inner.
    fn shell(&mut self, n: usize) -> Result<&[BigReal]> {
        while self.shells.len() <= n {
            let n = self.shells.len();
            let bits = self.prec.bits();
            let mut row = Vec::with_capacity((n + 1) * (n + 2) / 2);
            for m in 0..=n {
                let r_m = self.factor(3, m, 0)?;
                for j in 0..=n - m {
                    let k = n - m - j;
                    let mut c = Float::with_val(bits, &r_m);
                    c *= self.factor(0, m, k)?;
                    c *= self.factor(1, m, j)?;
                    c *= self.factor(2, m, k)?;
                    c *= self.factor(4, k, 0)?;
                    c *= self.factor(5, j, 0)?;
                    row.push(c);
                }
            }
            self.shells.push(row);
        }
        Ok(&self.shells[n])
    }

    pub fn eval_big(&mut self, x: &Float, y: &Float, z: &Float) -> Result<BigReal> {
        let bits = self.prec.bits();
        let mut xp = vec![Float::with_val(bits, 1)];
        let mut yp = vec![Float::with_val(bits, 1)];
        let mut zp = vec![Float::with_val(bits, 1)];
        let mut sum = Float::new(bits);
        let mut stop = Stopper::new(self.prec);
        for n in 0..MAX_SHELL_3D {
            if n > 0 {
                xp.push(Float::with_val(bits, &xp[n - 1] * x));
                yp.push(Float::with_val(bits, &yp[n - 1] * y));
                zp.push(Float::with_val(bits, &zp[n - 1] * z));
            }
            let row = self.shell(n)?;
            let mut abs = Float::new(bits);
            let mut idx = 0;
            for m in 0..=n {
                for j in 0..=n - m {
                    let k = n - m - j;
                    let mut t = Float::with_val(bits, &row[idx] * &xp[m]);
                    t *= &yp[j];
                    t *= &zp[k];
                    abs += Float::with_val(bits, t.abs_ref());
                    sum += t;
                    idx += 1;
                }
            }
            if stop.done(n, abs) {
                return Ok(sum);
            }
        }
        Err(OracleError::NonConvergence(MAX_SHELL_3D))
    }

    pub fn eval(&mut self, x: f64, y: f64, z: f64) -> Result<f64> {
        let p = self.prec;
        Ok(self.eval_big(&p.float(x), &p.float(y), &p.float(z))?.to_f64())
    }
}

pub fn hp_ml2(spec: &Ml2Spec, x: f64, y: f64, prec: Precision) -> Result<f64> {
    Ml2Coefficients::new(*spec, prec)?.eval(x, y)
}

pub fn hp_ml3(spec: &Ml3Spec, x: f64, y: f64, z: f64, prec: Precision) -> Result<f64> {
    Ml3Coefficients::new(*spec, prec)?.eval(x, y, z)
}
