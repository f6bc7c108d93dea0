//! Subcommands of the `ptel` binary.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ptel_core::fracops::{caputo_prabhakar_deriv, prabhakar_integral};
use ptel_core::goursat::{ml2_tele, ml3_tele_variant};
use ptel_core::problem::{solve as solve_problem, verify_grid};
use ptel_core::specfun::{ml2, ml3, ml_prabhakar};
use ptel_core::{DataFn, Ml2Params, Ml3Params, PrabhakarParams, QuadPolicy, ResidualReport, SeriesPolicy, SolveOptions, Thresholds, Variant};

use crate::config::{Mode, RunConfig};
use crate::error::{CliError, CliResult, ExitCode};
use crate::output::{fmt_sig, read_u_csv, svg_plot, tau_csv, u_csv, write_atomic};

#[derive(Debug, Parser)]
#[command(name = "ptel", version, about = "Fractional telegraph equation toolkit: special functions, Prabhakar operators, Problem N solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Prabhakar function E^γ_{α,β}(z).
    Ml(MlArgs),
    /// Bivariate Mittag-Leffler type series.
    Ml2(Ml2Args),
    /// Trivariate Mittag-Leffler type series.
    Ml3(Ml3Args),
    /// Prabhakar integral or Caputo-Prabhakar derivative of an expression in t.
    Op(OpArgs),
    /// Solve Problem N from a JSON config and write u.csv / tau.csv.
    Solve(SolveArgs),
    /// Recompute the residual report for a stored u.csv.
    Verify(VerifyArgs),
    /// Run the acceptance checks.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SeriesArgs {
    /// Relative truncation tolerance.
    #[arg(long, default_value_t = SeriesPolicy::default().rel_tol)]
    pub rel_tol: f64,
    /// Term cap per summation index.
    #[arg(long, default_value_t = SeriesPolicy::default().max_terms_per_index)]
    pub max_terms: usize,
}

impl SeriesArgs {
    fn policy(&self) -> SeriesPolicy {
        SeriesPolicy { rel_tol: self.rel_tol, max_terms_per_index: self.max_terms, ..SeriesPolicy::default() }
    }
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct MlArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long)]
    pub z: f64,
    #[command(flatten)]
    pub series: SeriesArgs,
}

/// Telegraph presets; explicit coefficient flags override them.
#[derive(Debug, Clone, Args)]
pub struct PresetArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
}

impl PresetArgs {
    fn params(&self) -> CliResult<Option<PrabhakarParams>> {
        match (self.alpha, self.beta, self.gamma) {
            (None, None, None) => Ok(None),
            (Some(a), Some(b), Some(g)) => Ok(Some(PrabhakarParams::new(a, b, g, 0.0))),
            _ => Err(CliError::Input("the telegraph preset needs all of --alpha, --beta, --gamma".into())),
        }
    }
}

macro_rules! coefficient_args {
    ($name:ident, $params:ident, [$($f:ident),*]) => {
        #[derive(Debug, Clone, Args)]
        pub struct $name {
            $(#[arg(long)] pub $f: Option<f64>,)*
        }

        impl $name {
            fn fill(&self, base: Option<$params>) -> CliResult<$params> {
                let mut missing = Vec::new();
                $(
                    let $f = match (self.$f, base.map(|b| b.$f)) {
                        (Some(v), _) | (None, Some(v)) => v,
                        (None, None) => {
                            missing.push(concat!("--", stringify!($f)));
                            0.0
                        }
                    };
                )*
                if !missing.is_empty() {
                    return Err(CliError::Input(format!("missing coefficients {} (or give a telegraph preset)", missing.join(" "))));
                }
                Ok($params { $($f),* })
            }
        }
    };
}

coefficient_args!(Ml2Coefficients, Ml2Params, [a1, b1, g1, a2, g2, a3, b2, d1, a4, d2, b3, d3]);
coefficient_args!(Ml3Coefficients, Ml3Params, [a1, b1, d1, a2, g1, d2, a3, b2, d3, a4, d4, a5, d5, b3, d6, g2, d7, g3, d8]);

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct Ml2Args {
    #[command(flatten)]
    pub preset: PresetArgs,
    #[command(flatten)]
    pub coefficients: Ml2Coefficients,
    #[arg(long)]
    pub x: f64,
    #[arg(long)]
    pub y: f64,
    #[command(flatten)]
    pub series: SeriesArgs,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct Ml3Args {
    /// Telegraph variant V1..V4 (needs --alpha --beta --gamma).
    #[arg(long)]
    pub variant: Option<Variant>,
    #[command(flatten)]
    pub preset: PresetArgs,
    #[command(flatten)]
    pub coefficients: Ml3Coefficients,
    #[arg(long)]
    pub x: f64,
    #[arg(long)]
    pub y: f64,
    #[arg(long)]
    pub z: f64,
    #[command(flatten)]
    pub series: SeriesArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OpKind {
    Integral,
    Caputo,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct OpArgs {
    #[arg(long, value_enum, default_value_t = OpKind::Integral)]
    pub kind: OpKind,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub beta: f64,
    #[arg(long)]
    pub gamma: f64,
    #[arg(long)]
    pub delta: f64,
    #[arg(long)]
    pub t: f64,
    /// Integrand as an expression in t.
    #[arg(long, default_value = "1")]
    pub y: String,
    #[arg(long, default_value_t = QuadPolicy::default().n_points)]
    pub n_points: usize,
    #[arg(long, default_value_t = QuadPolicy::default().tol)]
    pub tol: f64,
    #[command(flatten)]
    pub series: SeriesArgs,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub config: PathBuf,
    /// Directory that relative output paths are resolved against.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub n_t: Option<usize>,
    #[arg(long)]
    pub n_x: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Write an SVG chart (to the given path, the config's svg path, or solution.svg).
    #[arg(long, num_args = 0..=1)]
    pub plot: Option<Option<PathBuf>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Strict,
    Relaxed,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub config: PathBuf,
    /// Solution to check (default: the config's u.csv under --out-dir).
    #[arg(long)]
    pub u: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub n_t: Option<usize>,
    #[arg(long)]
    pub n_x: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    /// Run only checks whose name contains this text.
    #[arg(long)]
    pub filter: Option<String>,
    /// Regenerate the oracle fixture file instead of running checks.
    #[arg(long)]
    pub regen_fixtures: bool,
    /// Fixture file location.
    #[arg(long)]
    pub fixtures: Option<PathBuf>,
}

fn out_err(e: std::io::Error) -> CliError {
    CliError::Failure(format!("writing output: {e}"))
}

pub fn cmd_ml(a: &MlArgs, out: &mut dyn Write) -> CliResult<ExitCode> {
    let policy = a.series.policy();
    policy.validate()?;
    let v = ml_prabhakar(a.alpha, a.beta, a.gamma, a.z, &policy)?;
    writeln!(out, "{}", fmt_sig(v, 15)).map_err(out_err)?;
    Ok(ExitCode::Ok)
}

pub fn cmd_ml2(a: &Ml2Args, out: &mut dyn Write) -> CliResult<ExitCode> {
    let base = a.preset.params()?.map(|p| ml2_tele(&p));
    let p = a.coefficients.fill(base)?;
    let v = ml2(&p, a.x, a.y, &a.series.policy())?;
    let (d1, d2) = p.discriminants();
    writeln!(out, "{}", fmt_sig(v, 15)).map_err(out_err)?;
    writeln!(out, "Δ₁ = a3 + a4 - a1 - a2 = {}", fmt_sig(d1, 15)).map_err(out_err)?;
    writeln!(out, "Δ₂ = b2 + b3 - b1 = {}", fmt_sig(d2, 15)).map_err(out_err)?;
    Ok(ExitCode::Ok)
}

pub fn cmd_ml3(a: &Ml3Args, out: &mut dyn Write) -> CliResult<ExitCode> {
    let preset = a.preset.params()?;
    let base = match (a.variant, preset) {
        (Some(v), Some(p)) => Some(ml3_tele_variant(v, &p)),
        (Some(_), None) => return Err(CliError::Input("--variant needs --alpha, --beta and --gamma".into())),
        (None, Some(_)) => return Err(CliError::Input("the ml3 telegraph preset needs --variant".into())),
        (None, None) => None,
    };
    let p = a.coefficients.fill(base)?;
    let v = ml3(&p, a.x, a.y, a.z, &a.series.policy())?;
    let (d1, d2, d3) = p.discriminants();
    writeln!(out, "{}", fmt_sig(v, 15)).map_err(out_err)?;
    writeln!(out, "Δ₁ = a3 + a4 + a5 - a1 - a2 = {}", fmt_sig(d1, 15)).map_err(out_err)?;
    writeln!(out, "Δ₂ = g2 + g3 - g1 = {}", fmt_sig(d2, 15)).map_err(out_err)?;
    writeln!(out, "Δ₃ = b2 + b3 - b1 = {}", fmt_sig(d3, 15)).map_err(out_err)?;
    Ok(ExitCode::Ok)
}

pub fn cmd_op(a: &OpArgs, out: &mut dyn Write) -> CliResult<ExitCode> {
    let params = PrabhakarParams::new(a.alpha, a.beta, a.gamma, a.delta);
    let quad = QuadPolicy { n_points: a.n_points, tol: a.tol, ..QuadPolicy::default() };
    let series = a.series.policy();
    let y = DataFn::parse(&a.y).map_err(|e| CliError::Input(format!("--y: {e}")))?;
    let yf = |t: f64| y.eval(t, 0.0);
    let v = match a.kind {
        OpKind::Integral => prabhakar_integral(&params, &yf, a.t, &quad, &series)?,
        OpKind::Caputo => {
            let dy = match y.derivative(ptel_core::expr::Var::T) {
                Some(d) => Some(d?),
                None => None,
            };
            match &dy {
                Some(d) => {
                    let df = |t: f64| d.eval(t, 0.0);
                    caputo_prabhakar_deriv(&params, &yf, Some(&df), a.t, &quad, &series)?
                }
                None => caputo_prabhakar_deriv(&params, &yf, None, a.t, &quad, &series)?,
            }
        }
    };
    writeln!(out, "{}", fmt_sig(v, 15)).map_err(out_err)?;
    Ok(ExitCode::Ok)
}

/// Residual block shared by `solve` and `verify`, so both print identical text.
pub fn format_report(r: &ResidualReport, th: &Thresholds) -> String {
    let mark = |v: f64, limit: f64| if v <= limit { "ok" } else { "FAIL" };
    format!(
        "residuals:\n  boundary      = {:.6e}  (limit {:.0e}, {})\n  nonlocal      = {:.6e}  (limit {:.0e}, {})\n  pde           = {:.6e}  (limit {:.0e}, {})\n  compatibility = {:.6e}\nstatus: {}\n",
        r.boundary,
        th.boundary,
        mark(r.boundary, th.boundary),
        r.nonlocal,
        th.nonlocal,
        mark(r.nonlocal, th.nonlocal),
        r.pde,
        th.pde,
        mark(r.pde, th.pde),
        r.compatibility,
        if r.passes(th) { "pass" } else { "FAIL" }
    )
}

fn resolve(out_dir: &Option<PathBuf>, p: &Path) -> PathBuf {
    match out_dir {
        Some(d) if p.is_relative() => d.join(p),
        _ => p.to_path_buf(),
    }
}

fn apply_grid(cfg: &mut RunConfig, n_t: Option<usize>, n_x: Option<usize>) -> CliResult<()> {
    if let Some(n) = n_t {
        cfg.grid.n_t = n;
    }
    if let Some(n) = n_x {
        cfg.grid.n_x = n;
    }
    cfg.check()
}

/// Outcome of a solve, for callers that want more than the printed summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub report: ResidualReport,
    pub u_csv: PathBuf,
    pub tau_csv: PathBuf,
    pub svg: Option<PathBuf>,
}

pub fn solve_config(a: &SolveArgs, out: &mut dyn Write) -> CliResult<SolveOutcome> {
    let mut cfg = RunConfig::load(&a.config)?;
    if let Some(m) = a.mode {
        cfg.mode = if m == ModeArg::Strict { Mode::Strict } else { Mode::Relaxed };
    }
    apply_grid(&mut cfg, a.n_t, a.n_x)?;
    let problem = cfg.problem()?;
    let opts = SolveOptions { goursat: cfg.goursat_options(), strict: cfg.mode == Mode::Strict };
    let sol = solve_problem(&problem, cfg.grid.n_t - 1, cfg.grid.n_x - 1, &opts)?;
    let report = verify_grid(&problem, &sol.t, &sol.x, &sol.u, &opts.goursat.series)?;

    let u_path = resolve(&a.out_dir, &cfg.outputs.u_csv);
    let tau_path = resolve(&a.out_dir, &cfg.outputs.tau_csv);
    write_atomic(&u_path, u_csv(&sol.t, &sol.x, &sol.u).as_bytes())?;
    write_atomic(&tau_path, tau_csv(&sol.tau.x, &sol.tau.tau).as_bytes())?;
    let svg = match &a.plot {
        Some(Some(p)) => Some(resolve(&a.out_dir, p)),
        Some(None) => Some(resolve(&a.out_dir, cfg.outputs.svg.as_deref().unwrap_or(Path::new("solution.svg")))),
        None => cfg.outputs.svg.as_deref().map(|p| resolve(&a.out_dir, p)),
    };
    if let Some(p) = &svg {
        write_atomic(p, svg_plot(&sol.t, &sol.x, &sol.u, &sol.tau.tau).as_bytes())?;
    }

    let mut s = String::new();
    s.push_str(&format!("grid: {} x {} nodes, mode {:?}\n", cfg.grid.n_t, cfg.grid.n_x, cfg.mode).to_lowercase());
    s.push_str(&format!("A = {}\n", fmt_sig(sol.a.leading(), 12)));
    s.push_str(&format!("A (grid) = {}\n", fmt_sig(sol.a_discrete, 12)));
    s.push_str(&format!("weighted integral of M = {}\n", fmt_sig(sol.a.weighted(), 12)));
    s.push_str(&format!("compatibility defect = {:.6e}\n", sol.compatibility));
    s.push_str(&format!("phi(0) - G(0) = {:.6e}\n", sol.g0_defect));
    for w in &sol.warnings {
        s.push_str(&format!("warning: {w}\n"));
    }
    s.push_str(&format_report(&report, &Thresholds::default()));
    s.push_str(&format!("wrote {}\nwrote {}\n", u_path.display(), tau_path.display()));
    if let Some(p) = &svg {
        s.push_str(&format!("wrote {}\n", p.display()));
    }
    out.write_all(s.as_bytes()).map_err(out_err)?;
    Ok(SolveOutcome { report, u_csv: u_path, tau_csv: tau_path, svg })
}

pub fn cmd_solve(a: &SolveArgs, out: &mut dyn Write) -> CliResult<ExitCode> {
    let o = solve_config(a, out)?;
    Ok(if o.report.passes(&Thresholds::default()) { ExitCode::Ok } else { ExitCode::Failure })
}

pub fn verify_config(a: &VerifyArgs, out: &mut dyn Write) -> CliResult<ResidualReport> {
    let mut cfg = RunConfig::load(&a.config)?;
    apply_grid(&mut cfg, a.n_t, a.n_x)?;
    let problem = cfg.problem()?;
    let path = a.u.clone().unwrap_or_else(|| resolve(&a.out_dir, &cfg.outputs.u_csv));
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let g = read_u_csv(&text, cfg.grid.n_t, cfg.grid.n_x)?;
    let report = verify_grid(&problem, &g.t, &g.x, &g.u, &cfg.policies.series)?;
    out.write_all(format_report(&report, &Thresholds::default()).as_bytes()).map_err(out_err)?;
    Ok(report)
}

pub fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> CliResult<ExitCode> {
    let r = verify_config(a, out)?;
    Ok(if r.passes(&Thresholds::default()) { ExitCode::Ok } else { ExitCode::Failure })
}

pub fn cmd_selftest(a: &SelftestArgs, out: &mut dyn Write) -> CliResult<ExitCode> {
    let path = a.fixtures.clone().unwrap_or_else(crate::fixtures::default_path);
    if a.regen_fixtures {
        let f = crate::fixtures::regenerate(&mut |msg| {
            let _ = writeln!(out, "{msg}");
        })?;
        let text = serde_json::to_string_pretty(&f).map_err(|e| CliError::Failure(e.to_string()))? + "\n";
        write_atomic(&path, text.as_bytes())?;
        writeln!(out, "wrote {}", path.display()).map_err(out_err)?;
        return Ok(ExitCode::Ok);
    }
    let results = crate::acceptance::run(a.filter.as_deref(), &path, &mut |r| {
        let _ = writeln!(out, "{}", r.line());
    });
    if results.is_empty() {
        return Err(CliError::Input(format!("no check matches filter {:?}", a.filter.as_deref().unwrap_or(""))));
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    writeln!(out, "{} of {} checks passed", results.len() - failed, results.len()).map_err(out_err)?;
    Ok(if failed == 0 { ExitCode::Ok } else { ExitCode::Failure })
}

pub fn dispatch(cli: &Cli, out: &mut dyn Write) -> CliResult<ExitCode> {
    match &cli.command {
        Command::Ml(a) => cmd_ml(a, out),
        Command::Ml2(a) => cmd_ml2(a, out),
        Command::Ml3(a) => cmd_ml3(a, out),
        Command::Op(a) => cmd_op(a, out),
        Command::Solve(a) => cmd_solve(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Selftest(a) => cmd_selftest(a, out),
    }
}
