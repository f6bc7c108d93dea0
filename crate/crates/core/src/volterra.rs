//! The integral equation for the trace τ(x) = u(0, x).
//!
//! Substituting the Goursat solution into the nonlocal condition
//! u(0, x) − ∫₀^q M(t) u(t, x) dt = ψ(x) gives
//!
//!   A τ(x) − ab ∫₀ˣ τ(ξ) M₁(x − ξ) dξ = g(x),
//!
//! a second-kind Volterra equation with a continuous kernel whenever A ≠ 0.

use crate::datafn::DataFn;
use crate::error::{Error, Result};
use crate::fracops::PrabhakarParams;
use crate::goursat::{ml2_tele, ml3_tele_variant, Forcing, GoursatOptions, TelegraphCoeffs, TraceSolution, Variant};
use crate::quadrature::{composite_gauss, geometric_gauss, hybrid_product_rule, left_singular_gauss, GradedMesh, WeightedRule};
use crate::specfun::{Ml2Series, Ml3Params, Ml3Series};

/// |A| at or below this is treated as a degenerate nonlocal condition.
pub const DEGENERATE_TOL: f64 = 1e-10;

/// The two integrals behind the leading coefficient of the trace equation:
/// `mass` = ∫₀^q M and `memory` = aΓ(γ) ∫₀^q M(t) t^β E₂(a t^β, δ t^α) dt.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NonlocalConstant {
    pub mass: f64,
    pub memory: f64,
}

impl NonlocalConstant {
    /// Coefficient of τ(x) in the trace equation: 1 − ∫M(1 + aΓ(γ) t^β E₂).
    pub fn leading(&self) -> f64 {
        1.0 - self.mass - self.memory
    }

    /// ∫M(1 − aΓ(γ) t^β E₂).
    pub fn weighted(&self) -> f64 {
        self.mass - self.memory
    }

    pub fn check(&self) -> Result<f64> {
        let a = self.leading();
        if !(a.abs() > DEGENERATE_TOL) {
            return Err(Error::DegenerateNonlocal { a, tol: DEGENERATE_TOL });
        }
        Ok(a)
    }
}

/// Inputs of the nonlocal problem that the trace equation depends on.
#[derive(Debug, Clone, Copy)]
pub struct NonlocalData<'a> {
    pub params: PrabhakarParams,
    pub coeffs: TelegraphCoeffs,
    pub q: f64,
    pub m: &'a DataFn,
    pub psi: &'a DataFn,
    pub phi: &'a DataFn,
    pub forcing: &'a Forcing,
}

fn eval_m(m: &DataFn, t: f64) -> Result<f64> {
    m.eval(t, 0.0)
}

fn shifted(mut p: Ml3Params, n: u32) -> Ml3Params {
    p.d3 += f64::from(n);
    p
}

/// Rule for ∫₀^q M(t) t^β S(a t^β, y, δ t^α) dt where S is an F̄ instance whose
/// third lower parameter is β + 1, so that t^{β+n} S[d3 + n] are antiderivatives.
fn weighted_series_integral(data: &NonlocalData, variant: Variant, y: f64, opts: &GoursatOptions) -> Result<f64> {
    let p = data.params;
    let base = ml3_tele_variant(variant, &p);
    let mut series =
        [Ml3Series::new(base, opts.series)?, Ml3Series::new(shifted(base, 1), opts.series)?, Ml3Series::new(shifted(base, 2), opts.series)?];
    let (a, d) = (data.coeffs.a, p.delta);
    let mesh = GradedMesh::new(data.q, opts.quad.n_points, opts.quad.grading)?;
    let rule = hybrid_product_rule(&mesh.nodes, |n, t| {
        if t == 0.0 {
            return Ok(0.0);
        }
        let tb = t.powf(p.beta);
        Ok(t.powi(n as i32) * tb * series[n as usize].eval(a * tb, y, d * t.powf(p.alpha))?)
    })?;
    apply(&rule, |t| eval_m(data.m, t))
}

fn apply<F: FnMut(f64) -> Result<f64>>(rule: &WeightedRule, mut y: F) -> Result<f64> {
    let mut acc = 0.0;
    for (s, w) in rule.nodes.iter().zip(&rule.weights) {
        acc += w * y(*s)?;
    }
    Ok(acc)
}

/// ∫₀^q M and aΓ(γ) ∫₀^q M t^β E₂, by Gauss-Legendre and product integration.
pub fn compute_a(params: &PrabhakarParams, coeffs: &TelegraphCoeffs, m: &DataFn, q: f64, opts: &GoursatOptions) -> Result<NonlocalConstant> {
    params.validate_derivative()?;
    opts.quad.validate()?;
    let outer = composite_gauss(0.0, q, (opts.quad.n_points / 8).max(1), 8);
    let mass = apply(&outer, |t| eval_m(m, t))?;
    if outer.nodes.iter().map(|&t| eval_m(m, t)).collect::<Result<Vec<_>>>()?.iter().all(|v| *v == 0.0) {
        return Err(Error::InvalidData("the nonlocal weight M vanishes at every sample".into()));
    }
    let base = ml2_tele(params);
    let mk = |n: f64| Ml2Series::new(crate::specfun::Ml2Params { d1: base.d1 + n, ..base }, opts.series);
    let mut series = [mk(0.0)?, mk(1.0)?, mk(2.0)?];
    let mesh = GradedMesh::new(q, opts.quad.n_points, opts.quad.grading)?;
    let rule = hybrid_product_rule(&mesh.nodes, |n, t| {
        if t == 0.0 {
            return Ok(0.0);
        }
        let tb = t.powf(params.beta);
        Ok(t.powi(n as i32) * tb * series[n as usize].eval(coeffs.a * tb, params.delta * t.powf(params.alpha))?)
    })?;
    let integral = apply(&rule, |t| eval_m(m, t))?;
    let c = NonlocalConstant { mass, memory: coeffs.a * libm::tgamma(params.gamma) * integral };
    c.check()?;
    Ok(c)
}

/// M₁(ξ, x) = ∫₀^q M(t) t^β F̄₂(a t^β, b(x − ξ), δ t^α) dt.
pub fn kernel_m1(data: &NonlocalData, xi: f64, x: f64, opts: &GoursatOptions) -> Result<f64> {
    if !(0.0 <= xi && xi <= x) {
        return Err(Error::DomainError(format!("kernel needs 0 <= xi <= x (got {xi}, {x})")));
    }
    weighted_series_integral(data, Variant::V2, data.coeffs.b * (x - xi), opts)
}

/// g(x), the right-hand side of the trace equation, by nested quadrature.
pub fn rhs_g(data: &NonlocalData, x: f64, opts: &GoursatOptions) -> Result<f64> {
    let p = data.params;
    let TelegraphCoeffs { a, b } = data.coeffs;
    data.forcing.validate()?;
    let phi = |t: f64| data.phi.eval(t, 0.0);
    let phi0 = phi(0.0)?;
    let outer = geometric_gauss(data.q, 16, 8);
    let mut g = data.psi.eval(0.0, x)?;
    g += (b * x).exp() * apply(&outer, |t| Ok(eval_m(data.m, t)? * (phi(t)? - phi0)))?;
    g -= a * phi0 * weighted_series_integral(data, Variant::V1, b * x, opts)?;
    if x == 0.0 {
        return Ok(g);
    }
    let inner_cells = (opts.quad.n_points / 16).max(8);
    let args = |s: f64| (a * s.powf(p.beta), p.delta * s.powf(p.alpha));

    // abx ∫ M(t) ∫₀ᵗ (t−η)^{β−1} φ(η) F̄₃(a(t−η)^β, bx, δ(t−η)^α) dη dt
    let v3 = ml3_tele_variant(Variant::V3, &p);
    let mut s3 = [Ml3Series::new(v3, opts.series)?, Ml3Series::new(shifted(v3, 1), opts.series)?, Ml3Series::new(shifted(v3, 2), opts.series)?];
    let mut kern3 = |n: u32, s: f64| -> Result<f64> {
        if s == 0.0 {
            return Ok(0.0);
        }
        let (xa, za) = args(s);
        Ok(s.powf(p.beta - 1.0 + f64::from(n)) * s3[n as usize].eval(xa, b * x, za)?)
    };
    let mut i3 = 0.0;
    for (t, w) in outer.nodes.iter().zip(&outer.weights) {
        let mesh = GradedMesh::new(*t, inner_cells, opts.quad.grading)?;
        let rule = hybrid_product_rule(&mesh.nodes, &mut kern3)?;
        i3 += w * eval_m(data.m, *t)? * apply(&rule, |s| phi(t - s))?;
    }
    g += a * b * x * i3;

    if data.forcing.is_zero() {
        return Ok(g);
    }
    let (e1, e2) = (data.forcing.eps1, data.forcing.eps2);
    let xi_rule = left_singular_gauss(0.0, x, -e2, 2, 8)?;
    let v4 = ml3_tele_variant(Variant::V4, &p);
    let mut s4 = [Ml3Series::new(v4, opts.series)?, Ml3Series::new(shifted(v4, 1), opts.series)?, Ml3Series::new(shifted(v4, 2), opts.series)?];
    let mut i4 = 0.0;
    for (t, w) in outer.nodes.iter().zip(&outer.weights) {
        let t = *t;
        let mut inner = 0.0;
        for (xi, wx) in xi_rule.nodes.iter().zip(&xi_rule.weights) {
            let y = b * (x - xi);
            let mut kern4 = |n: u32, s: f64| -> Result<f64> {
                if s == 0.0 {
                    return Ok(0.0);
                }
                let (xa, za) = args(s);
                Ok(s.powf(p.beta - 1.0 + f64::from(n)) * s4[n as usize].eval(xa, y, za)?)
            };
            let ft = |eta: f64| data.forcing.smooth.eval(eta, *xi);
            let val = if e1 == 0.0 {
                let mesh = GradedMesh::new(t, inner_cells, opts.quad.grading)?;
                let rule = hybrid_product_rule(&mesh.nodes, &mut kern4)?;
                apply(&rule, |s| ft(t - s))?
            } else {
                // η ∈ [t/2, t]: kernel singular at s = t − η = 0
                let mesh = GradedMesh::new(0.5 * t, inner_cells, opts.quad.grading)?;
                let rule = hybrid_product_rule(&mesh.nodes, &mut kern4)?;
                let near = apply(&rule, |s| Ok((t - s).powf(-e1) * ft(t - s)?))?;
                // η ∈ [0, t/2]: η^{−ε₁} absorbed by the substitution
                let left = left_singular_gauss(0.0, 0.5 * t, -e1, 2, 8)?;
                let far = apply(&left, |eta| Ok(kern4(0, t - eta)? * ft(eta)?))?;
                near + far
            };
            inner += wx * val;
        }
        i4 += w * eval_m(data.m, t)? * inner;
    }
    Ok(g + i4)
}

/// Discrete trace equation on the uniform grid x_j = j·hx:
/// τ_j − ab Σ_l w_l M₂[j − l] τ_l = G_j with trapezoid weights w,
/// where M₂ = M₁/A and G = g/A.
#[derive(Debug, Clone, PartialEq)]
pub struct VolterraSystem {
    pub a: f64,
    pub ab: f64,
    pub hx: f64,
    /// M₂ at the x-differences d·hx, d = 0..=n.
    pub m2: Vec<f64>,
    pub g: Vec<f64>,
}

impl VolterraSystem {
    /// From M₁ and g sampled at the x-differences and x-nodes of a uniform grid.
    pub fn new(a: f64, ab: f64, hx: f64, m1: &[f64], g: &[f64]) -> Result<Self> {
        if !(a.abs() > DEGENERATE_TOL) {
            return Err(Error::DegenerateNonlocal { a, tol: DEGENERATE_TOL });
        }
        if m1.len() != g.len() || g.is_empty() {
            return Err(Error::DomainError("kernel and right-hand side must have equal, nonzero length".into()));
        }
        if g.len() > 1 && !(hx > 0.0) {
            return Err(Error::DomainError(format!("grid step must be positive (got {hx})")));
        }
        Ok(Self { a, ab, hx, m2: m1.iter().map(|v| v / a).collect(), g: g.iter().map(|v| v / a).collect() })
    }

    /// Samples M₁ and g on n uniform cells of [0, p].
    pub fn from_functions<K, G>(a: f64, ab: f64, p: f64, n: usize, mut m1: K, mut g: G) -> Result<Self>
    where
        K: FnMut(f64) -> Result<f64>,
        G: FnMut(f64) -> Result<f64>,
    {
        if n == 0 || !(p > 0.0) {
            return Err(Error::DomainError(format!("trace grid needs n >= 1 and p > 0 (got {n}, {p})")));
        }
        let hx = p / n as f64;
        let m1 = (0..=n).map(|d| m1(d as f64 * hx)).collect::<Result<Vec<_>>>()?;
        let g = (0..=n).map(|j| g(j as f64 * hx)).collect::<Result<Vec<_>>>()?;
        Self::new(a, ab, hx, &m1, &g)
    }

    /// Builds the system from the nonlocal data with the standalone quadratures.
    pub fn assemble(data: &NonlocalData, p: f64, n: usize, opts: &GoursatOptions) -> Result<Self> {
        let a = compute_a(&data.params, &data.coeffs, data.m, data.q, opts)?.leading();
        let ab = data.coeffs.a * data.coeffs.b;
        Self::from_functions(a, ab, p, n, |y| kernel_m1(data, 0.0, y, opts), |x| rhs_g(data, x, opts))
    }

    pub fn x_nodes(&self) -> Vec<f64> {
        (0..self.g.len()).map(|j| j as f64 * self.hx).collect()
    }

    /// Trapezoid value of ∫₀^{x_j} τ(ξ) M₂(x_j − ξ) dξ, leaving out τ_j when `skip_last`.
    fn history(&self, tau: &[f64], j: usize, skip_last: bool) -> f64 {
        let half = 0.5 * self.hx;
        let mut acc = 0.0;
        for c in 0..j {
            acc += half * tau[c] * self.m2[j - c];
            if !(skip_last && c + 1 == j) {
                acc += half * tau[c + 1] * self.m2[j - c - 1];
            }
        }
        acc
    }

    /// max_j |τ_j − ab Σ w M₂ τ − G_j|.
    pub fn residual(&self, tau: &[f64]) -> f64 {
        (0..self.g.len()).map(|j| (tau[j] - self.ab * self.history(tau, j, false) - self.g[j]).abs()).fold(0.0, f64::max)
    }
}

/// Trapezoid Nyström solution by forward substitution.
pub fn solve_tau(sys: &VolterraSystem) -> Result<TraceSolution> {
    let n = sys.g.len() - 1;
    let mut tau = vec![0.0; n + 1];
    tau[0] = sys.g[0];
    let pivot = 1.0 - sys.ab * 0.5 * sys.hx * sys.m2[0];
    for j in 1..=n {
        if !(pivot.abs() >= 1e-12) {
            return Err(Error::SingularStep { index: j, pivot });
        }
        tau[j] = (sys.g[j] + sys.ab * sys.history(&tau, j, true)) / pivot;
    }
    Ok(TraceSolution { x: sys.x_nodes(), tau })
}

/// Successive approximations τ ← G + ab ∫τ M₂ from τ⁰ = G on the same discretization.
pub fn picard_solve(sys: &VolterraSystem, max_iter: usize, tol: f64) -> Result<(TraceSolution, usize)> {
    let n = sys.g.len() - 1;
    let mut tau = sys.g.clone();
    let mut change = f64::INFINITY;
    for it in 1..=max_iter {
        let next: Vec<f64> = (0..=n).map(|j| sys.g[j] + sys.ab * sys.history(&tau, j, false)).collect();
        change = next.iter().zip(&tau).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        tau = next;
        if change < tol {
            return Ok((TraceSolution { x: sys.x_nodes(), tau }, it));
        }
    }
    Err(Error::MaxIterExceeded { iterations: max_iter, last_change: change })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fracops::QuadPolicy;

    fn opts(n: usize) -> GoursatOptions {
        GoursatOptions { quad: QuadPolicy { n_points: n, ..Default::default() }, ..Default::default() }
    }

    #[test]
    fn exponential_trace() {
        // τ − ∫₀ˣ τ = 1  ⇒  τ = eˣ
        let sys = VolterraSystem::from_functions(1.0, 1.0, 1.0, 64, |_| Ok(1.0), |_| Ok(1.0)).unwrap();
        let tr = solve_tau(&sys).unwrap();
        assert!(sys.residual(&tr.tau) < 1e-12);
        for (x, v) in tr.x.iter().zip(&tr.tau) {
            assert!((v - x.exp()).abs() < 1e-4);
        }
        let (pic, it) = picard_solve(&sys, 200, 1e-15).unwrap();
        assert!(it > 1);
        for (a, b) in pic.tau.iter().zip(&tr.tau) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(matches!(picard_solve(&sys, 2, 1e-14), Err(Error::MaxIterExceeded { .. })));
    }

    #[test]
    fn degenerate_and_singular() {
        let sys = VolterraSystem::from_functions(0.0, 1.0, 1.0, 4, |_| Ok(1.0), |_| Ok(1.0));
        assert!(matches!(sys, Err(Error::DegenerateNonlocal { .. })));
        // pivot = 1 − 0.5·(1/4)·8 = 0
        let sys = VolterraSystem::from_functions(1.0, 1.0, 1.0, 4, |_| Ok(8.0), |_| Ok(1.0)).unwrap();
        assert!(matches!(solve_tau(&sys), Err(Error::SingularStep { index: 1, .. })));
    }

    #[test]
    fn picard_first_iterate_and_partial_sums() {
        let sys = VolterraSystem::from_functions(2.0, 1.0, 1.0, 8, |_| Ok(0.0), |x| Ok(1.0 + x)).unwrap();
        let (tr, it) = picard_solve(&sys, 5, 1e-12).unwrap();
        assert_eq!(it, 1);
        assert_eq!(tr.tau, sys.g);
        // kernel 1, G = 1: iterates are Taylor partial sums of eˣ up to trapezoid error
        let sys = VolterraSystem::from_functions(1.0, 1.0, 1.0, 256, |_| Ok(1.0), |_| Ok(1.0)).unwrap();
        let r = picard_solve(&sys, 3, 1e-30);
        let Err(Error::MaxIterExceeded { last_change, .. }) = r else { panic!() };
        assert!((last_change - 1.0 / 6.0).abs() < 1e-4);
    }

    #[test]
    fn kernel_translation_invariance() {
        let p = PrabhakarParams::new(1.0, 0.5, 0.5, -1.0);
        let (m, psi, phi) = (DataFn::Const(1.0), DataFn::Const(0.0), DataFn::Const(1.0));
        let f = Forcing::default();
        let data = NonlocalData { params: p, coeffs: TelegraphCoeffs { a: -1.0, b: -1.0 }, q: 1.0, m: &m, psi: &psi, phi: &phi, forcing: &f };
        let o = opts(64);
        let (k1, k2) = (kernel_m1(&data, 0.2, 0.7, &o).unwrap(), kernel_m1(&data, 0.0, 0.5, &o).unwrap());
        assert!((k1 - k2).abs() < 1e-14);
        assert!(kernel_m1(&data, 0.7, 0.2, &o).is_err());
    }

    #[test]
    fn constant_a_without_memory() {
        let p = PrabhakarParams::new(1.0, 0.5, 0.5, -1.0);
        let m = DataFn::parse("1 + t").unwrap();
        let c = compute_a(&p, &TelegraphCoeffs { a: 0.0, b: -1.0 }, &m, 2.0, &opts(64)).unwrap();
        assert!((c.weighted() - 4.0).abs() < 1e-13);
        assert!((c.leading() + 3.0).abs() < 1e-13);
    }

    #[test]
    fn constant_a_regime_bounds() {
        let p = PrabhakarParams::new(1.0, 0.5, 0.5, -1.0);
        let c = compute_a(&p, &TelegraphCoeffs { a: -1.0, b: -1.0 }, &DataFn::Const(1.0), 1.0, &opts(128)).unwrap();
        assert!(c.memory < 0.0);
        assert!(c.weighted() > c.mass - 1e-8 && c.leading() > 1.0 - c.mass - 1e-8);
        // grid refinement leaves the value in place
        let c2 = compute_a(&p, &TelegraphCoeffs { a: -1.0, b: -1.0 }, &DataFn::Const(1.0), 1.0, &opts(256)).unwrap();
        assert!((c.memory - c2.memory).abs() < 1e-8);
    }

    #[test]
    fn rhs_at_origin_matches_closed_terms() {
        let p = PrabhakarParams::new(1.0, 0.5, 0.5, -1.0);
        let (m, psi, phi) = (DataFn::Const(1.0), DataFn::Const(0.25), DataFn::parse("1 + t").unwrap());
        let f = Forcing::default();
        let coeffs = TelegraphCoeffs { a: -1.0, b: -1.0 };
        let data = NonlocalData { params: p, coeffs, q: 1.0, m: &m, psi: &psi, phi: &phi, forcing: &f };
        let o = opts(128);
        // g(0) = ψ(0) + ∫M(φ − φ0) − φ0 ∫M aΓ t^β E₂ = 0.25 + 0.5 − memory
        let c = compute_a(&p, &coeffs, &m, 1.0, &o).unwrap();
        let g0 = rhs_g(&data, 0.0, &o).unwrap();
        assert!((g0 - (0.75 - c.memory)).abs() < 1e-9, "{g0}");
    }

    #[test]
    fn constant_data_gives_constant_trace() {
        // u ≡ c solves the equation with φ = c, f = 0 and ψ = c(1 − ∫M)
        let p = PrabhakarParams::new(1.0, 0.5, 0.5, -1.0);
        let (m, psi, phi) = (DataFn::Const(1.0), DataFn::Const(0.0), DataFn::Const(2.0));
        let f = Forcing::default();
        let coeffs = TelegraphCoeffs { a: -1.0, b: -1.0 };
        let data = NonlocalData { params: p, coeffs, q: 1.0, m: &m, psi: &psi, phi: &phi, forcing: &f };
        let o = opts(32);
        let sys = VolterraSystem::assemble(&data, 1.0, 16, &o).unwrap();
        let tr = solve_tau(&sys).unwrap();
        let err = tr.tau.iter().map(|v| (v - 2.0).abs()).fold(0.0, f64::max);
        println!("const trace err {err:e}");
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn rhs_additive_in_psi() {
        let p = PrabhakarParams::new(1.0, 0.5, 0.5, -1.0);
        let m = DataFn::Const(0.5);
        let phi = DataFn::parse("1 + t").unwrap();
        let f = Forcing { smooth: DataFn::Const(1.0), eps1: 0.2, eps2: 0.1 };
        let coeffs = TelegraphCoeffs { a: -1.0, b: -1.0 };
        let (p1, p2) = (DataFn::Const(0.0), DataFn::parse("x^2").unwrap());
        let d1 = NonlocalData { params: p, coeffs, q: 1.0, m: &m, psi: &p1, phi: &phi, forcing: &f };
        let d2 = NonlocalData { psi: &p2, ..d1 };
        let o = opts(16);
        let (g1, g2) = (rhs_g(&d1, 0.5, &o).unwrap(), rhs_g(&d2, 0.5, &o).unwrap());
        assert!((g2 - g1 - 0.25).abs() < 1e-13);
    }
}
