//! Closed-form solution of the Goursat problem for the telegraph equation
//! ∂ₓ D u − a uₓ − b D u = f with u(0, x) = τ(x) and u(t, 0) = φ(t).
//!
//! The solution is a sum of seven terms built on the E₂ series and four
//! instances of the trivariate F̄ series. Everything is evaluated on a uniform
//! (t, x) lattice: the series are tabulated once per lattice and reused by
//! every node, the η-integrals use product weights from exact kernel
//! antiderivatives, and the ξ-integrals use the trapezoid rule (or
//! power-moment weights when f carries a ξ^{−ε₂} factor).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datafn::DataFn;
use crate::error::{Error, Result};
use crate::fracops::{PrabhakarParams, QuadPolicy};
use crate::quadrature::{cell_weights, interp_linear, power_moment};
use crate::specfun::{Ml2Params, Ml2Series, Ml3Params, Ml3Series, SeriesPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TelegraphCoeffs {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Domain2D {
    pub q: f64,
    pub p: f64,
}

impl Domain2D {
    pub fn validate(&self) -> Result<()> {
        if !(self.q > 0.0 && self.q.is_finite() && self.p > 0.0 && self.p.is_finite()) {
            return Err(Error::InvalidParams(format!("domain needs q > 0 and p > 0 (got {self:?})")));
        }
        Ok(())
    }
}

/// The four F̄ instances that appear in the solution formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    V1,
    V2,
    V3,
    V4,
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "v1" | "1" => Ok(Self::V1),
            "v2" | "2" => Ok(Self::V2),
            "v3" | "3" => Ok(Self::V3),
            "v4" | "4" => Ok(Self::V4),
            _ => Err(Error::InvalidParams(format!("unknown variant {s:?}; expected v1..v4"))),
        }
    }
}

/// E₂ with parameters (γ,1,γ; 0,1; β,α,β+1; γ,γ; 1,1).
pub fn ml2_tele(p: &PrabhakarParams) -> Ml2Params {
    Ml2Params {
        a1: p.gamma,
        b1: 1.0,
        g1: p.gamma,
        a2: 0.0,
        g2: 1.0,
        a3: p.beta,
        b2: p.alpha,
        d1: p.beta + 1.0,
        a4: p.gamma,
        d2: p.gamma,
        b3: 1.0,
        d3: 1.0,
    }
}

pub fn ml3_tele_variant(v: Variant, p: &PrabhakarParams) -> Ml3Params {
    let (al, be, ga) = (p.alpha, p.beta, p.gamma);
    let (d2, d3, d5, d8) = match v {
        Variant::V1 => (2.0, be + 1.0, 2.0, 1.0),
        Variant::V2 => (2.0, be + 1.0, 1.0, 2.0),
        Variant::V3 => (2.0, be, 2.0, 2.0),
        Variant::V4 => (1.0, be, 1.0, 1.0),
    };
    Ml3Params {
        a1: ga,
        b1: 1.0,
        d1: ga,
        a2: 1.0,
        g1: 1.0,
        d2,
        a3: be,
        b2: al,
        d3,
        a4: ga,
        d4: ga,
        a5: 1.0,
        d5,
        b3: 1.0,
        d6: 1.0,
        g2: 1.0,
        d7: 1.0,
        g3: 1.0,
        d8,
    }
}

fn shifted(mut p: Ml3Params, n: f64) -> Ml3Params {
    p.d3 += n;
    p
}

/// Samples of the trace τ(x) = u(0, x) on ascending nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSolution {
    pub x: Vec<f64>,
    pub tau: Vec<f64>,
}

impl TraceSolution {
    pub fn eval(&self, x: f64) -> f64 {
        interp_linear(&self.x, &self.tau, x)
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Trace<'a> {
    Data(&'a DataFn),
    Samples(&'a TraceSolution),
}

impl Trace<'_> {
    pub fn eval(&self, x: f64) -> Result<f64> {
        match self {
            Self::Data(f) => f.eval(0.0, x),
            Self::Samples(s) => Ok(s.eval(x)),
        }
    }
}

/// Right-hand side f = t^{−ε₁} x^{−ε₂} f̃(t, x) with f̃ continuous on the closed domain.
#[derive(Debug, Clone)]
pub struct Forcing {
    pub smooth: DataFn,
    pub eps1: f64,
    pub eps2: f64,
}

impl Default for Forcing {
    fn default() -> Self {
        Self { smooth: DataFn::Const(0.0), eps1: 0.0, eps2: 0.0 }
    }
}

impl Forcing {
    pub fn smooth(f: DataFn) -> Self {
        Self { smooth: f, eps1: 0.0, eps2: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, e) in [("eps1", self.eps1), ("eps2", self.eps2)] {
            if !(0.0..1.0).contains(&e) {
                return Err(Error::InvalidParams(format!("{name} must lie in [0, 1) (got {e})")));
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.smooth.is_zero()
    }

    pub fn eval(&self, t: f64, x: f64) -> Result<f64> {
        let w = if self.eps1 > 0.0 { t.powf(-self.eps1) } else { 1.0 } * if self.eps2 > 0.0 { x.powf(-self.eps2) } else { 1.0 };
        Ok(w * self.smooth.eval(t, x)?)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GoursatProblem<'a> {
    pub params: PrabhakarParams,
    pub coeffs: TelegraphCoeffs,
    pub tau: Trace<'a>,
    pub phi: &'a DataFn,
    pub forcing: &'a Forcing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GoursatOptions {
    pub quad: QuadPolicy,
    pub series: SeriesPolicy,
    /// Largest |argument| accepted by the series evaluators.
    pub arg_cap: f64,
}

impl Default for GoursatOptions {
    fn default() -> Self {
        Self { quad: QuadPolicy::default(), series: SeriesPolicy::default(), arg_cap: 50.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoursatGrid {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    /// u[i][j] = u(t_i, x_j).
    pub u: Vec<Vec<f64>>,
    /// max |aΓ(γ) t^β E₂ − a t^β F̄₁(·, 0, ·)| over the t-nodes; zero in exact arithmetic.
    pub identity_defect: f64,
}

/// u(t, x) from the closed-form solution on a lattice of `quad.n_points` cells per axis.
pub fn goursat_eval(problem: &GoursatProblem, t: f64, x: f64, opts: &GoursatOptions) -> Result<f64> {
    check_inputs(problem, opts)?;
    if !(t >= 0.0 && x >= 0.0 && t.is_finite() && x.is_finite()) {
        return Err(Error::DomainError(format!("goursat_eval needs t, x >= 0 (got {t}, {x})")));
    }
    if t == 0.0 {
        return problem.tau.eval(x);
    }
    let n = opts.quad.n_points;
    let lat = Lattice::new(n, t / n as f64, if x == 0.0 { 0 } else { n }, if x == 0.0 { 0.0 } else { x / n as f64 });
    let engine = Engine::build(problem, &lat, Need::LastNode, opts)?;
    let samples = engine.samples(problem)?;
    Ok(engine.node(&samples, lat.nt, lat.nx))
}

/// u on the tensor grid t_nodes × x_nodes; both must be uniform and start at 0.
pub fn goursat_grid(problem: &GoursatProblem, t_nodes: &[f64], x_nodes: &[f64], opts: &GoursatOptions) -> Result<GoursatGrid> {
    check_inputs(problem, opts)?;
    let lat = Lattice::from_nodes(t_nodes, x_nodes)?;
    let engine = Engine::build(problem, &lat, Need::Full, opts)?;
    let samples = engine.samples(problem)?;
    let u = (0..=lat.nt).map(|i| (0..=lat.nx).map(|j| engine.node(&samples, i, j)).collect()).collect();
    Ok(GoursatGrid { t: lat.t_nodes(), x: lat.x_nodes(), u, identity_defect: engine.identity_defect() })
}

fn check_inputs(problem: &GoursatProblem, opts: &GoursatOptions) -> Result<()> {
    problem.params.validate_derivative()?;
    if !(problem.params.gamma > 0.0) {
        return Err(Error::InvalidParams(format!("gamma must be positive (got {})", problem.params.gamma)));
    }
    if !problem.coeffs.a.is_finite() || !problem.coeffs.b.is_finite() {
        return Err(Error::InvalidParams("telegraph coefficients must be finite".into()));
    }
    problem.forcing.validate()?;
    opts.quad.validate()?;
    opts.series.validate()?;
    let (phi0, tau0) = (problem.phi.eval(0.0, 0.0)?, problem.tau.eval(0.0)?);
    if (phi0 - tau0).abs() > 1e-8 * phi0.abs().max(1.0) {
        return Err(Error::InvalidData(format!("corner mismatch: phi(0) = {phi0} but tau(0) = {tau0}")));
    }
    Ok(())
}

/// Uniform lattice t_i = i·ht, i ≤ nt, and x_j = j·hx, j ≤ nx.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Lattice {
    pub nt: usize,
    pub ht: f64,
    pub nx: usize,
    pub hx: f64,
}

impl Lattice {
    pub fn new(nt: usize, ht: f64, nx: usize, hx: f64) -> Self {
        Self { nt, ht, nx, hx }
    }

    pub fn from_nodes(t: &[f64], x: &[f64]) -> Result<Self> {
        let (nt, ht) = uniform_step(t, "t")?;
        let (nx, hx) = uniform_step(x, "x")?;
        Ok(Self { nt, ht, nx, hx })
    }

    pub fn t(&self, i: usize) -> f64 {
        i as f64 * self.ht
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.hx
    }

    pub fn t_nodes(&self) -> Vec<f64> {
        (0..=self.nt).map(|i| self.t(i)).collect()
    }

    pub fn x_nodes(&self) -> Vec<f64> {
        (0..=self.nx).map(|j| self.x(j)).collect()
    }
}

fn uniform_step(nodes: &[f64], name: &str) -> Result<(usize, f64)> {
    if nodes.is_empty() || nodes[0] != 0.0 {
        return Err(Error::DomainError(format!("{name}-nodes must start at 0")));
    }
    let n = nodes.len() - 1;
    if n == 0 {
        return Ok((0, 0.0));
    }
    let h = nodes[n] / n as f64;
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::DomainError(format!("{name}-nodes must be ascending and finite")));
    }
    for (i, v) in nodes.iter().enumerate() {
        if (v - i as f64 * h).abs() > 1e-9 * nodes[n] {
            return Err(Error::DomainError(format!("{name}-nodes must be uniformly spaced")));
        }
    }
    Ok((n, h))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Need {
    Full,
    LastNode,
}

#[derive(Clone)]
struct TeleSeries {
    e2: Ml2Series,
    v1: Ml3Series,
    v2: Ml3Series,
    v3: [Ml3Series; 2],
    v4: [Ml3Series; 3],
}

impl TeleSeries {
    fn new(p: &PrabhakarParams, policy: SeriesPolicy) -> Result<Self> {
        let v3 = ml3_tele_variant(Variant::V3, p);
        let v4 = ml3_tele_variant(Variant::V4, p);
        Ok(Self {
            e2: Ml2Series::new(ml2_tele(p), policy)?,
            v1: Ml3Series::new(ml3_tele_variant(Variant::V1, p), policy)?,
            v2: Ml3Series::new(ml3_tele_variant(Variant::V2, p), policy)?,
            v3: [Ml3Series::new(shifted(v3, 1.0), policy)?, Ml3Series::new(shifted(v3, 2.0), policy)?],
            v4: [Ml3Series::new(v4, policy)?, Ml3Series::new(shifted(v4, 1.0), policy)?, Ml3Series::new(shifted(v4, 2.0), policy)?],
        })
    }
}

fn par_rows<F>(rows: &[usize], series: &TeleSeries, f: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&mut TeleSeries, usize) -> Result<Vec<f64>> + Sync + Send,
{
    rows.par_iter().map_init(|| series.clone(), |s, &r| f(s, r)).collect()
}

/// Series tables and quadrature weights for one lattice.
pub(crate) struct Engine {
    pub lat: Lattice,
    pub coeffs: TelegraphCoeffs,
    eps1: f64,
    /// aΓ(γ) t_i^β E₂(a t_i^β, δ t_i^α).
    e2: Vec<f64>,
    /// t_i^β F̄₁(a t_i^β, b x_j, δ t_i^α); only row nt when `Need::LastNode`.
    f1: Vec<Vec<f64>>,
    /// t_i^β F̄₂(a t_i^β, b d hx, δ t_i^α), indexed by the x-difference d.
    f2: Vec<Vec<f64>>,
    /// Product weights (near, far) for cells of the η-integral in the third term, per x-column.
    v3w: Vec<Vec<(f64, f64)>>,
    /// Product weights per x-difference d for the forcing term.
    v4w: Vec<Vec<(f64, f64)>>,
    /// Kernel values s_k^{β−1} F̄₄ at lattice s_k, per x-difference (only when ε₁ > 0).
    v4k: Vec<Vec<f64>>,
    /// F̄₄(0, b d hx, 0).
    v4base: Vec<f64>,
    /// ξ-cell weights (left, right) absorbing ξ^{−ε₂}.
    xiw: Vec<(f64, f64)>,
    /// η-cell 0 weights (left, right) absorbing η^{−ε₁}.
    eta0: (f64, f64),
    /// Beta moments for the first cell when both singularities meet.
    beta_mom: (f64, f64),
    need: Need,
    forcing: bool,
}

/// Data sampled on the lattice.
pub(crate) struct Samples {
    pub tau: Vec<f64>,
    pub phi: Vec<f64>,
    /// f̃(t_l, x_c).
    ftil: Vec<Vec<f64>>,
    /// t_l^{−ε₁} f̃(t_l, x_c) for l ≥ 1 (equal to ftil when ε₁ = 0).
    fw: Vec<Vec<f64>>,
}

impl Engine {
    pub fn build(problem: &GoursatProblem, lat: &Lattice, need: Need, opts: &GoursatOptions) -> Result<Self> {
        let p = problem.params;
        let TelegraphCoeffs { a, b } = problem.coeffs;
        let (tmax, xmax) = (lat.t(lat.nt), lat.x(lat.nx));
        for (what, v) in [("a t^beta", a * tmax.powf(p.beta)), ("b x", b * xmax), ("delta t^alpha", p.delta * tmax.powf(p.alpha))] {
            if !(v.abs() <= opts.arg_cap) {
                return Err(Error::ArgumentOutOfRange { what, value: v, cap: opts.arg_cap });
            }
        }
        let series = TeleSeries::new(&p, opts.series)?;
        let forcing = !problem.forcing.is_zero();
        let eps1 = problem.forcing.eps1;
        let eps2 = problem.forcing.eps2;
        let gg = libm::tgamma(p.gamma);
        let pw = |s: f64, e: f64| if s == 0.0 { 0.0 } else { s.powf(e) };
        let args = move |s: f64| (a * pw(s, p.beta), p.delta * pw(s, p.alpha));

        let all_t: Vec<usize> = (0..=lat.nt).collect();
        let all_x: Vec<usize> = (0..=lat.nx).collect();
        let (t_rows, x_cols): (Vec<usize>, Vec<usize>) = match need {
            Need::Full => (all_t.clone(), all_x.clone()),
            Need::LastNode => (vec![lat.nt], vec![lat.nx]),
        };

        let mut s0 = series.clone();
        let e2 = all_t
            .iter()
            .map(|&i| {
                let t = lat.t(i);
                if t == 0.0 {
                    return Ok(0.0);
                }
                let (xa, za) = args(t);
                Ok(a * gg * t.powf(p.beta) * s0.e2.eval(xa, za)?)
            })
            .collect::<Result<Vec<f64>>>()?;

        let row_f = |which: Variant, cols: &[usize]| {
            let cols = cols.to_vec();
            move |s: &mut TeleSeries, i: usize| -> Result<Vec<f64>> {
                let t = lat.t(i);
                if t == 0.0 {
                    return Ok(vec![0.0; lat.nx + 1]);
                }
                let (xa, za) = args(t);
                let tb = t.powf(p.beta);
                let mut row = vec![f64::NAN; lat.nx + 1];
                for &j in &cols {
                    let ser = if which == Variant::V1 { &mut s.v1 } else { &mut s.v2 };
                    row[j] = tb * ser.eval(xa, b * lat.x(j), za)?;
                }
                Ok(row)
            }
        };
        let f1_cols = if need == Need::Full { all_x.clone() } else { vec![0, lat.nx] };
        let f1 = scatter(&t_rows, lat.nt + 1, par_rows(&t_rows, &series, row_f(Variant::V1, &f1_cols))?);
        let f2 = scatter(&t_rows, lat.nt + 1, par_rows(&t_rows, &series, row_f(Variant::V2, &all_x))?);

        // Antiderivative tables in s = t − η for a fixed y, turned into cell weights.
        let cell_row = |v3: bool| {
            move |s: &mut TeleSeries, j: usize| -> Result<Vec<f64>> {
                let y = b * lat.x(j);
                let mut k1 = Vec::with_capacity(lat.nt + 1);
                let mut k2 = Vec::with_capacity(lat.nt + 1);
                for k in 0..=lat.nt {
                    let sk = lat.t(k);
                    if sk == 0.0 {
                        k1.push(0.0);
                        k2.push(0.0);
                        continue;
                    }
                    let (xa, za) = args(sk);
                    let (s1, s2) = if v3 {
                        let [x1, x2] = &mut s.v3;
                        (x1, x2)
                    } else {
                        let [_, x1, x2] = &mut s.v4;
                        (x1, x2)
                    };
                    let sb = sk.powf(p.beta);
                    k1.push(sb * s1.eval(xa, y, za)?);
                    k2.push(sb * sk * s2.eval(xa, y, za)?);
                }
                let mut out = Vec::with_capacity(2 * lat.nt);
                for k in 0..lat.nt {
                    let (wn, wf) = cell_weights(lat.t(k), lat.t(k + 1), (k1[k], k1[k + 1]), (k2[k], k2[k + 1]));
                    out.push(wn);
                    out.push(wf);
                }
                Ok(out)
            }
        };
        let pairs = |v: Vec<f64>| v.chunks(2).map(|c| (c[0], c[1])).collect::<Vec<_>>();
        let v3w = scatter(&x_cols, lat.nx + 1, par_rows(&x_cols, &series, cell_row(true))?).into_iter().map(pairs).collect();

        let (mut v4w, mut v4k, mut v4base) = (Vec::new(), Vec::new(), Vec::new());
        if forcing {
            v4w = par_rows(&all_x, &series, cell_row(false))?.into_iter().map(pairs).collect();
            v4base = all_x.iter().map(|&d| s0.v4[0].eval(0.0, b * lat.x(d), 0.0)).collect::<Result<_>>()?;
            if eps1 > 0.0 {
                v4k = par_rows(&all_x, &series, |s, d| {
                    let y = b * lat.x(d);
                    let mut row = vec![0.0; lat.nt + 1];
                    for (k, r) in row.iter_mut().enumerate().skip(1) {
                        let sk = lat.t(k);
                        let (xa, za) = args(sk);
                        *r = sk.powf(p.beta - 1.0) * s.v4[0].eval(xa, y, za)?;
                    }
                    Ok(row)
                })?;
            }
        }

        let xiw = (0..lat.nx)
            .map(|c| {
                let (l, r) = (lat.x(c), lat.x(c + 1));
                if eps2 == 0.0 {
                    return Ok((0.5 * lat.hx, 0.5 * lat.hx));
                }
                let m0 = power_moment(-eps2, l, r, 0)?;
                let wr = (power_moment(-eps2, l, r, 1)? - l * m0) / lat.hx;
                Ok((m0 - wr, wr))
            })
            .collect::<Result<Vec<_>>>()?;
        let (mut eta0, mut beta_mom) = ((0.0, 0.0), (0.0, 0.0));
        if eps1 > 0.0 && lat.nt > 0 {
            let h = lat.ht;
            let m0 = power_moment(-eps1, 0.0, h, 0)?;
            let wr = power_moment(-eps1, 0.0, h, 1)? / h;
            eta0 = (m0 - wr, wr);
            let beta_fn = |x: f64, y: f64| libm::tgamma(x) * libm::tgamma(y) / libm::tgamma(x + y);
            let hp = h.powf(p.beta - eps1);
            beta_mom = (hp * beta_fn(1.0 - eps1, p.beta), hp * beta_fn(2.0 - eps1, p.beta));
        }

        Ok(Self { lat: *lat, coeffs: problem.coeffs, eps1, e2, f1, f2, v3w, v4w, v4k, v4base, xiw, eta0, beta_mom, need, forcing })
    }

    pub fn samples(&self, problem: &GoursatProblem) -> Result<Samples> {
        let lat = &self.lat;
        let tau = (0..=lat.nx).map(|j| problem.tau.eval(lat.x(j))).collect::<Result<Vec<_>>>()?;
        self.samples_with_tau(problem, tau)
    }

    pub fn samples_with_tau(&self, problem: &GoursatProblem, tau: Vec<f64>) -> Result<Samples> {
        let lat = &self.lat;
        let phi = (0..=lat.nt).map(|i| problem.phi.eval(lat.t(i), 0.0)).collect::<Result<Vec<_>>>()?;
        let (mut ftil, mut fw) = (Vec::new(), Vec::new());
        if self.forcing {
            ftil = (0..=lat.nt)
                .map(|l| (0..=lat.nx).map(|c| problem.forcing.smooth.eval(lat.t(l), lat.x(c))).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            fw = ftil
                .iter()
                .enumerate()
                .map(|(l, row)| {
                    let w = if self.eps1 > 0.0 && l > 0 { lat.t(l).powf(-self.eps1) } else { 1.0 };
                    row.iter().map(|v| w * v).collect()
                })
                .collect();
        }
        Ok(Samples { tau, phi, ftil, fw })
    }

    /// Coefficient of τ(x) in u: 1 + aΓ(γ) t^β E₂.
    pub fn r1(&self, i: usize) -> f64 {
        1.0 + self.e2[i]
    }

    pub fn f2(&self, i: usize, d: usize) -> f64 {
        self.f2[i][d]
    }

    /// Trapezoid weights over [0, x_j] applied to g(c, d = j − c).
    pub fn xi_trapezoid<F: Fn(usize, usize) -> f64>(&self, j: usize, g: F) -> f64 {
        let half = 0.5 * self.lat.hx;
        let mut acc = 0.0;
        for c in 0..j {
            acc += half * (g(c, j - c) + g(c + 1, j - c - 1));
        }
        acc
    }

    /// Σ_l w_l τ_l t^β F̄₂(·, b(x_j − ξ_l), ·).
    pub fn trace_convolution(&self, tau: &[f64], i: usize, j: usize) -> f64 {
        let row = &self.f2[i];
        self.xi_trapezoid(j, |c, d| tau[c] * row[d])
    }

    /// Every τ-free term of u at (t_i, x_j).
    pub fn data_term(&self, s: &Samples, i: usize, j: usize) -> f64 {
        let TelegraphCoeffs { a, b } = self.coeffs;
        let x = self.lat.x(j);
        let phi0 = s.phi[0];
        let mut v = (s.phi[i] - phi0) * (b * x).exp() - a * phi0 * self.f1[i][j];
        if j > 0 && i > 0 {
            let w = &self.v3w[j];
            let mut acc = 0.0;
            for l in 0..i {
                let (wn, wf) = w[i - 1 - l];
                acc += wn * s.phi[l + 1] + wf * s.phi[l];
            }
            v += a * b * x * acc;
        }
        if self.forcing && j > 0 && i > 0 {
            v += self.forcing_term(s, i, j);
        }
        v
    }

    fn forcing_term(&self, s: &Samples, i: usize, j: usize) -> f64 {
        let mut acc = 0.0;
        for c in 0..=j {
            let mut w = 0.0;
            if c < j {
                w += self.xiw[c].0;
            }
            if c > 0 {
                w += self.xiw[c - 1].1;
            }
            acc += w * self.eta_integral(s, i, c, j - c);
        }
        acc
    }

    /// ∫₀^{t_i} (t_i−η)^{β−1} F̄₄(·, b x_d, ·) η^{−ε₁} f̃(η, x_c) dη.
    fn eta_integral(&self, s: &Samples, i: usize, c: usize, d: usize) -> f64 {
        let w = &self.v4w[d];
        let start = if self.eps1 > 0.0 { 1 } else { 0 };
        let mut acc = 0.0;
        for l in start..i {
            let (wn, wf) = w[i - 1 - l];
            acc += wn * s.fw[l + 1][c] + wf * s.fw[l][c];
        }
        if self.eps1 > 0.0 {
            let (f0, f1) = (s.ftil[0][c], s.ftil[1][c]);
            if i == 1 {
                acc += self.v4base[d] * (f0 * self.beta_mom.0 + (f1 - f0) * self.beta_mom.1);
            } else {
                let k = &self.v4k[d];
                acc += self.eta0.0 * k[i] * f0 + self.eta0.1 * k[i - 1] * f1;
            }
        }
        acc
    }

    /// u(t_i, x_j) for sampled data.
    pub fn node(&self, s: &Samples, i: usize, j: usize) -> f64 {
        let ab = self.coeffs.a * self.coeffs.b;
        s.tau[j] * self.r1(i) + ab * self.trace_convolution(&s.tau, i, j) + self.data_term(s, i, j)
    }

    fn identity_defect(&self) -> f64 {
        if self.need != Need::Full {
            return 0.0;
        }
        (0..=self.lat.nt).map(|i| (self.e2[i] - self.coeffs.a * self.f1[i][0]).abs()).fold(0.0, f64::max)
    }
}

fn scatter(rows: &[usize], n: usize, vals: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new(); n];
    for (r, v) in rows.iter().zip(vals) {
        out[*r] = v;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::ml3;

    fn params() -> PrabhakarParams {
        PrabhakarParams::new(1.0, 0.5, 0.5, -1.0)
    }

    fn opts(n: usize) -> GoursatOptions {
        GoursatOptions { quad: QuadPolicy { n_points: n, ..Default::default() }, ..Default::default() }
    }

    fn linspace(l: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|i| l * i as f64 / n as f64).collect()
    }

    #[test]
    fn variants_validate_and_reduce() {
        let p = params();
        for v in [Variant::V1, Variant::V2, Variant::V3, Variant::V4] {
            ml3_tele_variant(v, &p).validate().unwrap();
        }
        let pol = SeriesPolicy::default();
        let e2 = crate::specfun::ml2(&ml2_tele(&p), -0.3, -0.2, &pol).unwrap();
        let f1 = ml3(&ml3_tele_variant(Variant::V1, &p), -0.3, 0.0, -0.2, &pol).unwrap();
        assert!((libm::tgamma(0.5) * e2 - f1).abs() < 1e-13);
        assert_eq!("V3".parse::<Variant>().unwrap(), Variant::V3);
    }

    #[test]
    fn trace_and_boundary_are_reproduced() {
        let tau = DataFn::parse("1 + sin(x)").unwrap();
        let phi = DataFn::parse("1 + t^2").unwrap();
        let f = Forcing::smooth(DataFn::parse("t*x").unwrap());
        let pr = GoursatProblem { params: params(), coeffs: TelegraphCoeffs { a: -1.0, b: -1.0 }, tau: Trace::Data(&tau), phi: &phi, forcing: &f };
        let g = goursat_grid(&pr, &linspace(1.0, 16), &linspace(1.0, 16), &opts(16)).unwrap();
        for j in 0..=16 {
            assert_eq!(g.u[0][j], tau.eval(0.0, g.x[j]).unwrap());
        }
        for i in 0..=16 {
            assert!((g.u[i][0] - phi.eval(g.t[i], 0.0).unwrap()).abs() < 1e-12);
        }
        assert!(g.identity_defect < 1e-12);
        assert_eq!(goursat_eval(&pr, 0.0, 0.7, &opts(16)).unwrap(), tau.eval(0.0, 0.7).unwrap());
    }

    #[test]
    fn constant_is_solution() {
        let one = DataFn::Const(1.0);
        let f = Forcing::default();
        let pr = GoursatProblem { params: params(), coeffs: TelegraphCoeffs { a: -1.0, b: -1.0 }, tau: Trace::Data(&one), phi: &one, forcing: &f };
        let g = goursat_grid(&pr, &linspace(1.0, 32), &linspace(1.0, 32), &opts(32)).unwrap();
        let err = g.u.iter().flatten().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn eval_matches_grid_corner_exactly() {
        let tau = DataFn::parse("1 + x").unwrap();
        let phi = DataFn::parse("1 + t").unwrap();
        let f = Forcing { smooth: DataFn::parse("1 + t + x").unwrap(), eps1: 0.0, eps2: 0.0 };
        let pr = GoursatProblem { params: params(), coeffs: TelegraphCoeffs { a: -0.5, b: -1.0 }, tau: Trace::Data(&tau), phi: &phi, forcing: &f };
        let (t, x, n) = (0.8, 0.6, 12);
        let g = goursat_grid(&pr, &linspace(t, n), &linspace(x, n), &opts(n)).unwrap();
        let e = goursat_eval(&pr, t, x, &opts(n)).unwrap();
        assert_eq!(e.to_bits(), g.u[n][n].to_bits());
    }

    #[test]
    fn linear_in_forcing() {
        let zero = DataFn::Const(0.0);
        let mk = |s: &str| Forcing::smooth(DataFn::parse(s).unwrap());
        let (f1, f2, f12) = (mk("t"), mk("x^2"), mk("2*t + 3*x^2"));
        let run = |f: &Forcing| {
            let pr =
                GoursatProblem { params: params(), coeffs: TelegraphCoeffs { a: -1.0, b: -0.5 }, tau: Trace::Data(&zero), phi: &zero, forcing: f };
            goursat_grid(&pr, &linspace(1.0, 10), &linspace(1.0, 10), &opts(10)).unwrap().u
        };
        let (u1, u2, u12) = (run(&f1), run(&f2), run(&f12));
        for i in 0..=10 {
            for j in 0..=10 {
                assert!((2.0 * u1[i][j] + 3.0 * u2[i][j] - u12[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn corner_mismatch_and_cap() {
        let tau = DataFn::Const(1.0);
        let phi = DataFn::Const(2.0);
        let f = Forcing::default();
        let pr = GoursatProblem { params: params(), coeffs: TelegraphCoeffs { a: -1.0, b: -1.0 }, tau: Trace::Data(&tau), phi: &phi, forcing: &f };
        assert!(matches!(goursat_eval(&pr, 0.5, 0.5, &opts(8)), Err(Error::InvalidData(_))));
        let pr = GoursatProblem { phi: &tau, coeffs: TelegraphCoeffs { a: -1.0, b: -100.0 }, ..pr };
        assert!(matches!(goursat_eval(&pr, 0.5, 1.0, &opts(8)), Err(Error::ArgumentOutOfRange { .. })));
    }

    #[test]
    fn nonuniform_nodes_rejected() {
        assert!(Lattice::from_nodes(&[0.0, 0.1, 0.5], &[0.0, 1.0]).is_err());
        assert!(Lattice::from_nodes(&[0.1, 0.2], &[0.0, 1.0]).is_err());
    }
}

#[cfg(test)]
mod residual {
    use super::*;
    use crate::fracops::caputo_prabhakar_on_grid;

    /// max |∂ₓDu − a uₓ − b Du − f| over nodes at least `inset` steps inside an n × n unit lattice.
    fn pde_residual(p: PrabhakarParams, a: f64, b: f64, f: &Forcing, n: usize, inset: usize) -> f64 {
        let tau = DataFn::parse("1 + sin(x)").unwrap();
        let phi = DataFn::parse("1 + t").unwrap();
        let pr = GoursatProblem { params: p, coeffs: TelegraphCoeffs { a, b }, tau: Trace::Data(&tau), phi: &phi, forcing: f };
        let nodes: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        let o = GoursatOptions { quad: QuadPolicy { n_points: n, ..Default::default() }, ..Default::default() };
        let g = goursat_grid(&pr, &nodes, &nodes, &o).unwrap();
        let h = 1.0 / n as f64;
        let mut du = vec![vec![0.0; n + 1]; n + 1];
        for j in 0..=n {
            let col: Vec<f64> = (0..=n).map(|i| g.u[i][j]).collect();
            let d = caputo_prabhakar_on_grid(&p, h, &col, &SeriesPolicy::default()).unwrap();
            for i in 0..=n {
                du[i][j] = d[i];
            }
        }
        let mut worst: f64 = 0.0;
        for i in inset..n {
            for j in inset..n {
                let dxdu = (du[i][j + 1] - du[i][j - 1]) / (2.0 * h);
                let ux = (g.u[i][j + 1] - g.u[i][j - 1]) / (2.0 * h);
                let r = dxdu - a * ux - b * du[i][j] - f.eval(g.t[i], g.x[j]).unwrap();
                worst = worst.max(r.abs());
            }
        }
        worst
    }

    #[test]
    fn satisfies_equation_in_regime() {
        let f = Forcing::smooth(DataFn::parse("1 + t*x").unwrap());
        let p = PrabhakarParams::new(1.0, 0.5, 0.5, -1.0);
        let r = pde_residual(p, -1.0, -1.0, &f, 32, 8);
        assert!(r < 2e-3, "{r}");
        let r = pde_residual(p, -1.0, -1.0, &f, 32, 1);
        assert!(r < 5e-2, "{r}");
    }

    #[test]
    fn residual_converges_for_general_parameters() {
        let f = Forcing { smooth: DataFn::parse("1 + t*x").unwrap(), eps1: 0.3, eps2: 0.2 };
        let p = PrabhakarParams::new(1.5, 0.7, 1.2, 0.5);
        let (r1, r2) = (pde_residual(p, 0.8, 0.3, &f, 16, 4), pde_residual(p, 0.8, 0.3, &f, 32, 8));
        assert!(r2 < 0.5 * r1 && r2 < 3e-2, "{r1} {r2}");
    }
}
