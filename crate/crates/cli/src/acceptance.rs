//! The acceptance suite behind `ptel selftest`.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use ptel_core::fracops::{caputo_prabhakar_deriv, prabhakar_integral};
use ptel_core::goursat::{goursat_grid, ml2_tele, GoursatProblem, Trace};
use ptel_core::problem::{solve, verify};
use ptel_core::quadrature::composite_gauss;
use ptel_core::specfun::{ml2, ml3, ml_prabhakar, rgamma};
use ptel_core::volterra::{compute_a, kernel_m1, picard_solve, solve_tau, NonlocalData};
use ptel_core::{
    DataFn, Domain2D, Forcing, GoursatOptions, PrabhakarParams, ProblemN, QuadPolicy, SeriesPolicy, SolveOptions, TelegraphCoeffs, Thresholds,
    VolterraSystem,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fixtures;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl CheckResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {:<22} {:>7.2}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

type Outcome = Result<String, String>;

struct Ctx {
    fixtures: PathBuf,
}

type CheckFn = fn(&Ctx) -> Outcome;

const CHECKS: [(&str, CheckFn); 10] = [
    ("specfun-reductions", specfun_reductions),
    ("oracle-equivalence", oracle_equivalence),
    ("fracops-identity", fracops_identity),
    ("volterra-order", volterra_order),
    ("constant-solution", constant_solution),
    ("residuals", residuals),
    ("positivity-a-bound", positivity_and_a_bound),
    ("classical-limit", classical_limit),
    ("volterra-solvers", volterra_solvers),
    ("cli-contract", cli_contract),
];

pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|(n, _)| *n).collect()
}

/// Runs every check whose name contains `filter`, reporting each as it finishes.
pub fn run(filter: Option<&str>, fixtures: &Path, report: &mut dyn FnMut(&CheckResult)) -> Vec<CheckResult> {
    let ctx = Ctx { fixtures: fixtures.to_path_buf() };
    let mut out = Vec::new();
    for (k, (name, f)) in CHECKS.iter().enumerate() {
        if filter.is_some_and(|s| !name.contains(s)) {
            continue;
        }
        let start = Instant::now();
        let res = std::panic::catch_unwind(|| f(&ctx)).unwrap_or_else(|_| Err("check panicked".into()));
        let (passed, detail) = match res {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        let r = CheckResult { id: k + 1, name, passed, detail, elapsed: start.elapsed() };
        report(&r);
        out.push(r);
    }
    out
}

fn fail_if(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Err(msg())
    } else {
        Ok(())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn regime() -> (PrabhakarParams, TelegraphCoeffs) {
    (PrabhakarParams::new(1.0, 0.5, 0.5, -1.0), TelegraphCoeffs { a: -1.0, b: -1.0 })
}

fn constant_problem() -> ProblemN {
    let (params, coeffs) = regime();
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

/// φ = 1 + t, M = 1, f = 1 + t x and ψ(x) = sin x − 1/2, so ψ(0) = φ(0) − ∫φ.
fn smooth_problem() -> ProblemN {
    let (params, coeffs) = regime();
    ProblemN {
        params,
        coeffs,
        domain: Domain2D { q: 1.0, p: 1.0 },
        phi: DataFn::parse("1 + t").expect("phi"),
        psi: DataFn::parse("sin(x) - 0.5").expect("psi"),
        m: DataFn::Const(1.0),
        forcing: Forcing::smooth(DataFn::parse("1 + t*x").expect("f")),
    }
}

fn specfun_reductions(_: &Ctx) -> Outcome {
    let pol = SeriesPolicy::default();
    let (mut worst_exp, mut worst_cosh): (f64, f64) = (0.0, 0.0);
    for k in 0..50 {
        let z = -20.0 + 25.0 * k as f64 / 49.0;
        let e = ml_prabhakar(1.0, 1.0, 1.0, z, &pol).map_err(e2s)?;
        worst_exp = worst_exp.max(rel(e, z.exp()));
        let c = ml_prabhakar(2.0, 1.0, 1.0, z, &pol).map_err(e2s)?;
        let want = if z >= 0.0 { z.sqrt().cosh() } else { (-z).sqrt().cos() };
        worst_cosh = worst_cosh.max(rel(c, want));
    }
    fail_if(worst_exp > 1e-10, || format!("exp reduction off by {worst_exp:.2e} relative"))?;
    fail_if(worst_cosh > 1e-10, || format!("cosh reduction off by {worst_cosh:.2e} relative"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst0: f64 = 0.0;
    for _ in 0..100 {
        let (a, b, g) = (rng.gen_range(0.1..3.0), rng.gen_range(0.1..5.0), rng.gen_range(-3.0..3.0));
        let v = ml_prabhakar(a, b, g, 0.0, &pol).map_err(e2s)?;
        worst0 = worst0.max((v / rgamma(b) - 1.0).abs());
    }
    fail_if(worst0 > 1e-12, || format!("E(0)Γ(β) off by {worst0:.2e}"))?;
    Ok(format!("exp {worst_exp:.1e}, cosh {worst_cosh:.1e}, E(0)Γ(β) {worst0:.1e}"))
}

fn oracle_equivalence(ctx: &Ctx) -> Outcome {
    let start = Instant::now();
    let f = fixtures::load(&ctx.fixtures).map_err(e2s)?;
    let pol = SeriesPolicy::default();
    let mut worst: (f64, String) = (0.0, String::new());
    for c in &f.ml2 {
        let v = ml2(&c.params, c.x, c.y, &pol).map_err(|e| format!("{}: {e}", c.label))?;
        let r = rel(v, c.value);
        if !(r <= worst.0) {
            worst = (r, c.label.clone());
        }
    }
    for c in &f.ml3 {
        let v = ml3(&c.params, c.x, c.y, c.z, &pol).map_err(|e| format!("{}: {e}", c.label))?;
        let r = rel(v, c.value);
        if !(r <= worst.0) {
            worst = (r, c.label.clone());
        }
    }
    let n = f.ml2.len() + f.ml3.len();
    let secs = start.elapsed().as_secs_f64();
    fail_if(n < 200, || format!("only {n} fixture cases"))?;
    fail_if(!(worst.0 <= 1e-9), || format!("{n} cases, worst {:.2e} relative ({})", worst.0, worst.1))?;
    fail_if(secs > 120.0, || format!("took {secs:.1} s"))?;
    Ok(format!("{n} cases, worst {:.1e} relative", worst.0))
}

fn fracops_identity(ctx: &Ctx) -> Outcome {
    let f = fixtures::load(&ctx.fixtures).map_err(e2s)?;
    let (quad, pol) = (QuadPolicy::default(), SeriesPolicy::default());
    fail_if(f.prabhakar_integral.len() < 20, || "fewer than 20 identity cases".into())?;
    let mut worst: f64 = 0.0;
    let mut worst_const: f64 = 0.0;
    let one = |_: f64| Ok(1.0);
    let konst = |_: f64| Ok(2.5);
    for c in &f.prabhakar_integral {
        let v = prabhakar_integral(&c.params, &one, c.t, &quad, &pol).map_err(e2s)?;
        worst = worst.max((v - c.closed_form).abs());
        let d = caputo_prabhakar_deriv(&c.params, &konst, None, c.t, &quad, &pol).map_err(e2s)?;
        worst_const = worst_const.max(d.abs());
    }
    fail_if(worst > 1e-7, || format!("integral of 1 off by {worst:.2e}"))?;
    fail_if(worst_const > 1e-10, || format!("derivative of a constant is {worst_const:.2e}"))?;
    Ok(format!("{} cases, worst {worst:.1e}; constant derivative {worst_const:.1e}", f.prabhakar_integral.len()))
}

/// Chebyshev interpolant of M₁(0, ·) on [0, p] for the regime data with M ≡ 1.
fn kernel_interpolant() -> Result<(f64, impl Fn(f64) -> f64), String> {
    let (params, coeffs) = regime();
    let opts = GoursatOptions::default();
    let (m, zero, forcing) = (DataFn::Const(1.0), DataFn::Const(0.0), Forcing::default());
    let data = NonlocalData { params, coeffs, q: 1.0, m: &m, psi: &zero, phi: &zero, forcing: &forcing };
    let a = compute_a(&params, &coeffs, &m, 1.0, &opts).map_err(e2s)?.leading();
    const N: usize = 24;
    let theta = |k: usize| std::f64::consts::PI * (k as f64 + 0.5) / N as f64;
    let nodes: Vec<f64> = (0..N).map(|k| 0.5 * (1.0 - theta(k).cos())).collect();
    let vals = nodes.iter().map(|&d| kernel_m1(&data, 0.0, d, &opts)).collect::<Result<Vec<_>, _>>().map_err(e2s)?;
    let interp = move |y: f64| {
        let (mut num, mut den) = (0.0, 0.0);
        for k in 0..N {
            let d = y - nodes[k];
            if d == 0.0 {
                return vals[k];
            }
            let w = if k % 2 == 0 { 1.0 } else { -1.0 } * theta(k).sin() / d;
            num += w * vals[k];
            den += w;
        }
        num / den
    };
    Ok((a, interp))
}

/// Trapezoid Nyström systems for τ*(x) = 1 + x² on n = 64, 128, 256.
fn manufactured_systems() -> Result<Vec<VolterraSystem>, String> {
    let (a, k) = kernel_interpolant()?;
    let ab = 1.0;
    let exact = |x: f64| 1.0 + x * x;
    let g = |x: f64| -> f64 {
        if x == 0.0 {
            return a * exact(0.0);
        }
        let r = composite_gauss(0.0, x, 8, 16);
        let conv: f64 = r.nodes.iter().zip(&r.weights).map(|(s, w)| w * k(x - s) * exact(*s)).sum();
        a * exact(x) - ab * conv
    };
    [64, 128, 256].iter().map(|&n| VolterraSystem::from_functions(a, ab, 1.0, n, |y| Ok(k(y)), |x| Ok(g(x))).map_err(e2s)).collect()
}

fn volterra_order(_: &Ctx) -> Outcome {
    let mut errs = Vec::new();
    for sys in manufactured_systems()? {
        let tau = solve_tau(&sys).map_err(e2s)?;
        errs.push(tau.x.iter().zip(&tau.tau).map(|(x, t)| (t - (1.0 + x * x)).abs()).fold(0.0, f64::max));
    }
    let ratios: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
    let show = |v: &[f64], e: bool| v.iter().map(|x| if e { format!("{x:.2e}") } else { format!("{x:.3}") }).collect::<Vec<_>>().join(" ");
    fail_if(ratios.iter().any(|r| !(3.5..=4.5).contains(r)), || format!("error ratios {} (errors {})", show(&ratios, false), show(&errs, true)))?;
    fail_if(errs[2] > 1e-5, || format!("error {:.2e} at n = 256", errs[2]))?;
    Ok(format!("errors {}, ratios {}", show(&errs, true), show(&ratios, false)))
}

fn grid_error(u: &[Vec<f64>], c: f64) -> f64 {
    u.iter().flatten().map(|v| (v - c).abs()).fold(0.0, f64::max)
}

fn constant_solution(_: &Ctx) -> Outcome {
    let start = Instant::now();
    let sol = solve(&constant_problem(), 64, 64, &SolveOptions::default()).map_err(e2s)?;
    let err = grid_error(&sol.u, 1.0);
    let secs = start.elapsed().as_secs_f64();
    fail_if(sol.u.len() != 65 || sol.u[0].len() != 65, || "grid is not 65 x 65".into())?;
    fail_if(err > 1e-3, || format!("max |u − 1| = {err:.2e}"))?;
    fail_if(secs > 180.0, || format!("took {secs:.1} s"))?;
    Ok(format!("max |u − 1| = {err:.1e} on 65 x 65 in {secs:.1} s"))
}

fn residuals(_: &Ctx) -> Outcome {
    let th = Thresholds::default();
    let mut parts = Vec::new();
    for (label, p) in [("constant", constant_problem()), ("smooth", smooth_problem())] {
        let opts = SolveOptions::default();
        let sol = solve(&p, 64, 64, &opts).map_err(|e| format!("{label}: {e}"))?;
        let r = verify(&p, &sol, &opts.goursat.series).map_err(e2s)?;
        fail_if(!r.passes(&th), || format!("{label}: {r:?}"))?;
        parts.push(format!("{label} b {:.0e} n {:.0e} pde {:.1e}", r.boundary, r.nonlocal, r.pde));
    }
    Ok(parts.join("; "))
}

fn positivity_and_a_bound(_: &Ctx) -> Outcome {
    let pol = SeriesPolicy::default();
    let opts = GoursatOptions::default();
    let mut min_e2 = f64::INFINITY;
    let mut samples = 0;
    let weights = ["1", "t", "exp(-t)", "1 + cos(3*t)"];
    let mut worst_margin = f64::INFINITY;
    for k in 1..=9 {
        let beta = k as f64 / 10.0;
        for (a, delta) in [(-1.0, -1.0), (-0.5, -2.0), (-1.0, -0.25)] {
            let p = PrabhakarParams::new(1.0, beta, beta, delta);
            let e2 = ml2_tele(&p);
            for j in 1..=20 {
                let t = j as f64 / 20.0;
                let v = ml2(&e2, a * t.powf(beta), delta * t, &pol).map_err(|e| format!("β = {beta}, t = {t}: {e}"))?;
                min_e2 = min_e2.min(v);
                samples += 1;
            }
            for w in weights {
                let m = DataFn::parse(w).map_err(e2s)?;
                let c = compute_a(&p, &TelegraphCoeffs { a, b: -1.0 }, &m, 1.0, &opts).map_err(|e| format!("β = {beta}, M = {w}: {e}"))?;
                worst_margin = worst_margin.min(c.weighted() - c.mass).min(c.leading() - (1.0 - c.mass));
            }
        }
    }
    fail_if(!(min_e2 > 0.0), || format!("E₂ reaches {min_e2:e}"))?;
    fail_if(!(worst_margin > -1e-8), || format!("A bound violated by {worst_margin:e}"))?;
    Ok(format!("{samples} samples, min E₂ {min_e2:.2e}; min A − bound {worst_margin:.2e}"))
}

fn classical_limit(_: &Ctx) -> Outcome {
    let beta = 0.999;
    let params = PrabhakarParams::new(1.0, beta, beta, 0.0);
    let coeffs = TelegraphCoeffs { a: -1.0, b: -0.5 };
    let tau = DataFn::parse("cos(x)").map_err(e2s)?;
    let phi = DataFn::parse("1 + sin(t)").map_err(e2s)?;
    let f = Forcing::smooth(DataFn::parse("1 + t*x").map_err(e2s)?);
    let gp = GoursatProblem { params, coeffs, tau: Trace::Data(&tau), phi: &phi, forcing: &f };
    let nodes: Vec<f64> = (0..=64).map(|i| i as f64 / 64.0).collect();
    let grid = goursat_grid(&gp, &nodes, &nodes, &GoursatOptions::default()).map_err(e2s)?;
    let fd =
        ptel_oracle::classical_telegraph_fd(coeffs.a, coeffs.b, 1.0, 1.0, &|t| 1.0 + t.sin(), &|x| x.cos(), &|t, x| 1.0 + t * x, 64).map_err(e2s)?;
    let (mut diff, mut scale): (f64, f64) = (0.0, 0.0);
    for (ru, rf) in grid.u.iter().zip(&fd.u) {
        for (a, b) in ru.iter().zip(rf) {
            diff = diff.max((a - b).abs());
            scale = scale.max(b.abs());
        }
    }
    let r = diff / scale;
    fail_if(r > 0.02, || format!("relative max-norm difference {r:.2e}"))?;
    Ok(format!("relative max-norm difference {r:.1e}"))
}

fn volterra_solvers(_: &Ctx) -> Outcome {
    let mut systems = manufactured_systems()?;
    let opts = GoursatOptions::default();
    for p in [constant_problem(), smooth_problem()] {
        systems.push(VolterraSystem::assemble(&p.nonlocal_data(), p.domain.p, 16, &opts).map_err(e2s)?);
    }
    let mut worst: f64 = 0.0;
    for sys in &systems {
        let direct = solve_tau(sys).map_err(e2s)?;
        let (pic, _) = picard_solve(sys, 1000, 1e-13).map_err(e2s)?;
        worst = worst.max(direct.tau.iter().zip(&pic.tau).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    fail_if(worst > 1e-8, || format!("solvers differ by {worst:.2e}"))?;
    Ok(format!("{} systems, max difference {worst:.1e}", systems.len()))
}

fn cli_contract(_: &Ctx) -> Outcome {
    crate::contract::run_contract()
}
