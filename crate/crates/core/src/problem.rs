//! Problem N end to end: validate the data, solve the trace equation,
//! evaluate u on a grid and check every condition of the problem numerically.

use serde::{Deserialize, Serialize};

use crate::datafn::DataFn;
use crate::error::{Error, Result};
use crate::fracops::{caputo_prabhakar_on_grid_power, PrabhakarParams};
use crate::goursat::{Domain2D, Engine, Forcing, GoursatOptions, GoursatProblem, Lattice, Need, TelegraphCoeffs, Trace, TraceSolution};
use crate::quadrature::{geometric_gauss, trapezoid_weights};
use crate::specfun::SeriesPolicy;
use crate::volterra::{compute_a, rhs_g, solve_tau, NonlocalConstant, NonlocalData, VolterraSystem};

/// Tolerance for the hypothesis φ(0) = G(0).
pub const G0_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct ProblemN {
    pub params: PrabhakarParams,
    pub coeffs: TelegraphCoeffs,
    pub domain: Domain2D,
    pub phi: DataFn,
    pub psi: DataFn,
    pub m: DataFn,
    pub forcing: Forcing,
}

impl ProblemN {
    pub fn validate(&self) -> Result<()> {
        self.params.validate_derivative()?;
        if !(self.params.gamma > 0.0) {
            return Err(Error::InvalidParams(format!("gamma must be positive (got {})", self.params.gamma)));
        }
        if !self.coeffs.a.is_finite() || !self.coeffs.b.is_finite() {
            return Err(Error::InvalidParams("telegraph coefficients must be finite".into()));
        }
        self.domain.validate()?;
        self.forcing.validate()?;
        if self.forcing.eps1 >= self.params.beta {
            return Err(Error::InvalidParams(format!("eps1 = {} must be below beta = {}", self.forcing.eps1, self.params.beta)));
        }
        let q = self.domain.q;
        let mut nonzero = false;
        for k in 0..=64 {
            let t = q * k as f64 / 64.0;
            nonzero |= self.m.eval(t, 0.0)? != 0.0;
        }
        if !nonzero {
            return Err(Error::InvalidData("M must not vanish identically".into()));
        }
        Ok(())
    }

    /// `None` inside α = 1, γ = β, a < 0, b < 0, δ < 0; otherwise the first failed condition.
    pub fn regime_violation(&self) -> Option<String> {
        let p = &self.params;
        let checks = [
            (p.alpha == 1.0, format!("alpha = {} (need 1)", p.alpha)),
            (p.gamma == p.beta, format!("gamma = {} differs from beta = {}", p.gamma, p.beta)),
            (self.coeffs.a < 0.0, format!("a = {} (need a < 0)", self.coeffs.a)),
            (self.coeffs.b < 0.0, format!("b = {} (need b < 0)", self.coeffs.b)),
            (p.delta < 0.0, format!("delta = {} (need delta < 0)", p.delta)),
        ];
        checks.into_iter().find(|(ok, _)| !ok).map(|(_, why)| why)
    }

    pub fn nonlocal_data(&self) -> NonlocalData<'_> {
        NonlocalData {
            params: self.params,
            coeffs: self.coeffs,
            q: self.domain.q,
            m: &self.m,
            psi: &self.psi,
            phi: &self.phi,
            forcing: &self.forcing,
        }
    }

    pub fn goursat<'a>(&'a self, tau: Trace<'a>) -> GoursatProblem<'a> {
        GoursatProblem { params: self.params, coeffs: self.coeffs, tau, phi: &self.phi, forcing: &self.forcing }
    }
}

/// |φ(0) − ∫₀^q M φ dt − ψ(0)|.
pub fn compatibility_check(problem: &ProblemN) -> Result<f64> {
    let rule = geometric_gauss(problem.domain.q, 20, 10);
    let mut integral = 0.0;
    for (t, w) in rule.nodes.iter().zip(&rule.weights) {
        integral += w * problem.m.eval(*t, 0.0)? * problem.phi.eval(*t, 0.0)?;
    }
    Ok((problem.phi.eval(0.0, 0.0)? - integral - problem.psi.eval(0.0, 0.0)?).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub boundary: f64,
    pub nonlocal: f64,
    pub pde: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { boundary: 1e-3, nonlocal: 1e-3, pde: 5e-2 }
    }
}

/// Max-norm residuals of the three conditions a regular solution satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub boundary: f64,
    pub nonlocal: f64,
    pub pde: f64,
    pub compatibility: f64,
}

impl ResidualReport {
    pub fn passes(&self, th: &Thresholds) -> bool {
        self.boundary <= th.boundary && self.nonlocal <= th.nonlocal && self.pde <= th.pde
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSolution {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    /// u[i][j] = u(t_i, x_j).
    pub u: Vec<Vec<f64>>,
    pub tau: TraceSolution,
    /// Quadrature-accurate integrals behind the leading coefficient.
    pub a: NonlocalConstant,
    /// Leading coefficient of the discrete trace equation (trapezoid rule in t).
    pub a_discrete: f64,
    pub compatibility: f64,
    /// |φ(0) − G(0)|.
    pub g0_defect: f64,
    /// Max discrete residual of the trace equation.
    pub trace_residual: f64,
    pub warnings: Vec<String>,
    pub residuals: Option<ResidualReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveOptions {
    pub goursat: GoursatOptions,
    pub strict: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { goursat: GoursatOptions::default(), strict: true }
    }
}

/// Solves Problem N on the uniform grid with n_t × n_x cells.
///
/// The trace equation is assembled on the same lattice the solution is
/// evaluated on, with the trapezoid rule in t, so the discrete nonlocal
/// condition holds to rounding error.
pub fn solve(problem: &ProblemN, n_t: usize, n_x: usize, opts: &SolveOptions) -> Result<GridSolution> {
    problem.validate()?;
    if n_t == 0 || n_x == 0 {
        return Err(Error::DomainError(format!("grid needs at least one cell per axis (got {n_t} x {n_x})")));
    }
    let mut warnings = Vec::new();
    if let Some(why) = problem.regime_violation() {
        if opts.strict {
            return Err(Error::RegimeViolation(why));
        }
        warnings.push(format!("outside the regime where uniqueness is proven: {why}"));
    }
    let gopts = &opts.goursat;
    let data = problem.nonlocal_data();
    let a = compute_a(&problem.params, &problem.coeffs, &problem.m, problem.domain.q, gopts)?;
    let lead = a.leading();
    let phi0 = problem.phi.eval(0.0, 0.0)?;
    let g0_defect = (phi0 - rhs_g(&data, 0.0, gopts)? / lead).abs();
    if g0_defect > G0_TOL {
        let msg = format!("phi(0) - G(0) = {g0_defect:e} exceeds {G0_TOL:e}");
        if opts.strict {
            return Err(Error::RegimeViolation(msg));
        }
        warnings.push(msg);
    }
    let compatibility = compatibility_check(problem)?;

    let lat = Lattice::new(n_t, problem.domain.q / n_t as f64, n_x, problem.domain.p / n_x as f64);
    let zero = DataFn::Const(0.0);
    let gp = problem.goursat(Trace::Data(&zero));
    let engine = Engine::build(&gp, &lat, Need::Full, gopts)?;
    let samples = engine.samples_with_tau(&gp, vec![0.0; n_x + 1])?;
    let tw = trapezoid_weights(&lat.t_nodes());
    let mw: Vec<f64> = (0..=n_t).map(|i| Ok(tw[i] * problem.m.eval(lat.t(i), 0.0)?)).collect::<Result<_>>()?;

    let a_discrete = 1.0 - (0..=n_t).map(|i| mw[i] * engine.r1(i)).sum::<f64>();
    let m1: Vec<f64> = (0..=n_x).map(|d| (0..=n_t).map(|i| mw[i] * engine.f2(i, d)).sum()).collect();
    let data_terms: Vec<Vec<f64>> = (0..=n_t).map(|i| (0..=n_x).map(|j| engine.data_term(&samples, i, j)).collect()).collect();
    let g = (0..=n_x)
        .map(|j| Ok(problem.psi.eval(0.0, lat.x(j))? + (0..=n_t).map(|i| mw[i] * data_terms[i][j]).sum::<f64>()))
        .collect::<Result<Vec<_>>>()?;
    let ab = problem.coeffs.a * problem.coeffs.b;
    let sys = VolterraSystem::new(a_discrete, ab, lat.hx, &m1, &g)?;
    let tau = solve_tau(&sys)?;
    let trace_residual = sys.residual(&tau.tau);

    let u = (0..=n_t)
        .map(|i| (0..=n_x).map(|j| tau.tau[j] * engine.r1(i) + ab * engine.trace_convolution(&tau.tau, i, j) + data_terms[i][j]).collect())
        .collect();
    Ok(GridSolution {
        t: lat.t_nodes(),
        x: lat.x_nodes(),
        u,
        tau,
        a,
        a_discrete,
        compatibility,
        g0_defect,
        trace_residual,
        warnings,
        residuals: None,
    })
}

/// Residuals of a solution stored on a uniform grid.
pub fn verify_grid(problem: &ProblemN, t: &[f64], x: &[f64], u: &[Vec<f64>], series: &SeriesPolicy) -> Result<ResidualReport> {
    let lat = Lattice::from_nodes(t, x)?;
    if u.len() != t.len() || u.iter().any(|row| row.len() != x.len()) {
        return Err(Error::InvalidData(format!("solution grid must be {} x {}", t.len(), x.len())));
    }
    let (nt, nx) = (lat.nt, lat.nx);
    let mut boundary: f64 = 0.0;
    for i in 0..=nt {
        boundary = boundary.max((u[i][0] - problem.phi.eval(t[i], 0.0)?).abs());
    }
    let tw = trapezoid_weights(t);
    let mw: Vec<f64> = (0..=nt).map(|i| Ok(tw[i] * problem.m.eval(t[i], 0.0)?)).collect::<Result<_>>()?;
    let mut nonlocal: f64 = 0.0;
    for j in 0..=nx {
        let avg: f64 = (0..=nt).map(|i| mw[i] * u[i][j]).sum();
        nonlocal = nonlocal.max((u[0][j] - avg - problem.psi.eval(0.0, x[j])?).abs());
    }
    let mut pde: f64 = 0.0;
    if nt >= 2 && nx >= 2 {
        let mut du = vec![vec![0.0; nx + 1]; nt + 1];
        for j in 0..=nx {
            let col: Vec<f64> = (0..=nt).map(|i| u[i][j]).collect();
            for (i, v) in caputo_prabhakar_on_grid_power(&problem.params, lat.ht, &col, problem.params.beta, series)?.into_iter().enumerate() {
                du[i][j] = v;
            }
        }
        let (a, b) = (problem.coeffs.a, problem.coeffs.b);
        for i in 1..nt {
            for j in 1..nx {
                let dxdu = (du[i][j + 1] - du[i][j - 1]) / (2.0 * lat.hx);
                let ux = (u[i][j + 1] - u[i][j - 1]) / (2.0 * lat.hx);
                let r = dxdu - a * ux - b * du[i][j] - problem.forcing.eval(t[i], x[j])?;
                pde = pde.max(r.abs());
            }
        }
    }
    Ok(ResidualReport { boundary, nonlocal, pde, compatibility: compatibility_check(problem)? })
}

pub fn verify(problem: &ProblemN, solution: &GridSolution, series: &SeriesPolicy) -> Result<ResidualReport> {
    verify_grid(problem, &solution.t, &solution.x, &solution.u, series)
}
