//! Oracle fixtures: generated by `ptel selftest --regen-fixtures`, read by
//! the acceptance checks and by the core integration tests.

use std::path::PathBuf;

use ptel_core::goursat::{ml2_tele, ml3_tele_variant};
use ptel_core::{Ml2Params, Ml3Params, PrabhakarParams, Variant};
use ptel_oracle::{
    adaptive_quad_f64, hp_gamma, hp_ml, ml2_weighted_integral, ml3_weighted_integral, mpfr_version, prabhakar_kernel_integral, Ml2Coefficients,
    Ml2Spec, Ml3Coefficients, Ml3Spec, Precision, QuadOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const GENERATOR: &str = "ptel selftest --regen-fixtures";
pub const SEED: u64 = 0x5eed_2024;
pub const SERIES_DIGITS: u32 = 60;
pub const QUAD_DIGITS: u32 = 40;
const ML2_CASES: usize = 100;
const ML3_CASES: usize = 120;
const IDENTITY_CASES: usize = 20;
const COMPAT_CASES: usize = 10;

pub fn default_path() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/data/oracle_fixtures.json"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fixtures {
    pub generator: String,
    pub mpfr_version: String,
    pub series_digits: u32,
    pub quad_digits: u32,
    pub seed: u64,
    pub ml2: Vec<Ml2Case>,
    pub ml3: Vec<Ml3Case>,
    /// ∫₀ᵗ kernel · 1 against t^β E^γ_{α,β+1}(δt^α).
    pub prabhakar_integral: Vec<IdentityCase>,
    /// Caputo-Prabhakar derivative of y = t against t^{1−β} E^{−γ}_{α,2−β}(δt^α).
    pub caputo_of_t: Vec<IdentityCase>,
    pub nonlocal: NonlocalCase,
    pub compatibility: Vec<CompatCase>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ml2Case {
    pub label: String,
    pub params: Ml2Params,
    pub x: f64,
    pub y: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ml3Case {
    pub label: String,
    pub params: Ml3Params,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityCase {
    pub params: PrabhakarParams,
    pub t: f64,
    pub closed_form: f64,
    pub quadrature: f64,
}

/// Integrals of the nonlocal condition for (α,β,γ,δ,a,b) = (1, 0.5, 0.5, −1, −1, −1), M ≡ 1, q = 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlocalCase {
    pub params: PrabhakarParams,
    pub a: f64,
    pub b: f64,
    pub q: f64,
    pub mass: f64,
    /// aΓ(γ) ∫₀^q t^β E₂(a t^β, δ t^α) dt.
    pub memory: f64,
    /// ∫₀^q (1 − aΓ(γ) t^β E₂) dt.
    pub weighted: f64,
    pub m1_xi: f64,
    pub m1_x: f64,
    /// ∫₀^q t^β F̄₂(a t^β, b(x − ξ), δ t^α) dt.
    pub m1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompatCase {
    pub phi: String,
    pub psi: String,
    #[serde(rename = "M")]
    pub m: String,
    pub q: f64,
    pub defect: f64,
}

pub fn load(path: &std::path::Path) -> CliResult<Fixtures> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn spec2(p: &Ml2Params) -> Ml2Spec {
    Ml2Spec { a1: p.a1, b1: p.b1, g1: p.g1, a2: p.a2, g2: p.g2, a3: p.a3, b2: p.b2, d1: p.d1, a4: p.a4, d2: p.d2, b3: p.b3, d3: p.d3 }
}

fn spec3(p: &Ml3Params) -> Ml3Spec {
    Ml3Spec {
        a1: p.a1,
        b1: p.b1,
        d1: p.d1,
        a2: p.a2,
        g1: p.g1,
        d2: p.d2,
        a3: p.a3,
        b2: p.b2,
        d3: p.d3,
        a4: p.a4,
        d4: p.d4,
        a5: p.a5,
        d5: p.d5,
        b3: p.b3,
        d6: p.d6,
        g2: p.g2,
        d7: p.d7,
        g3: p.g3,
        d8: p.d8,
    }
}

fn telegraph_params(rng: &mut ChaCha8Rng) -> PrabhakarParams {
    PrabhakarParams::new(rng.gen_range(0.5..2.0), rng.gen_range(0.5..1.0), rng.gen_range(0.3..1.5), 0.0)
}

fn arg(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(-3.0..1.0)
}

fn ml2_cases(rng: &mut ChaCha8Rng, prec: Precision, log: &mut dyn FnMut(&str)) -> CliResult<Vec<Ml2Case>> {
    // (α,β,γ,δ,a,t) = (1, 0.5, 0.5, −1, −1, 0.5)
    let ex = PrabhakarParams::new(1.0, 0.5, 0.5, -1.0);
    let t: f64 = 0.5;
    let mut cases = vec![Ml2Case { label: "telegraph example".into(), params: ml2_tele(&ex), x: -t.powf(0.5), y: -t, value: 0.0 }];
    for k in 0..ML2_CASES {
        let p = telegraph_params(rng);
        let mut params = ml2_tele(&p);
        let shift = rng.gen_range(0..3);
        params.d1 += f64::from(shift);
        cases.push(Ml2Case { label: format!("telegraph sample {k} (d1 shift {shift})"), params, x: arg(rng), y: arg(rng), value: 0.0 });
    }
    for (k, c) in cases.iter_mut().enumerate() {
        c.value = Ml2Coefficients::new(spec2(&c.params), prec)?.eval(c.x, c.y)?;
        if k % 25 == 0 {
            log(&format!("ml2 {k}/{}", ML2_CASES + 1));
        }
    }
    Ok(cases)
}

fn ml3_cases(rng: &mut ChaCha8Rng, prec: Precision, log: &mut dyn FnMut(&str)) -> CliResult<Vec<Ml3Case>> {
    // V1 at x = a·0.5^β, y = b·0.25, z = δ·0.5 with (α,β,γ,δ,a,b) = (1, 0.5, 0.5, −1, −1, −1)
    let ex = PrabhakarParams::new(1.0, 0.5, 0.5, -1.0);
    let mut cases = vec![Ml3Case {
        label: "telegraph V1 example".into(),
        params: ml3_tele_variant(Variant::V1, &ex),
        x: -(0.5f64.powf(0.5)),
        y: -0.25,
        z: -0.5,
        value: 0.0,
    }];
    let variants = [Variant::V1, Variant::V2, Variant::V3, Variant::V4];
    for k in 0..ML3_CASES {
        let p = telegraph_params(rng);
        let v = variants[k % 4];
        let mut params = ml3_tele_variant(v, &p);
        let shift = rng.gen_range(0..3);
        params.d3 += f64::from(shift);
        cases.push(Ml3Case {
            label: format!("telegraph {v:?} sample {k} (d3 shift {shift})"),
            params,
            x: arg(rng),
            y: arg(rng),
            z: arg(rng),
            value: 0.0,
        });
    }
    for (k, c) in cases.iter_mut().enumerate() {
        c.value = Ml3Coefficients::new(spec3(&c.params), prec)?.eval(c.x, c.y, c.z)?;
        if k % 10 == 0 {
            log(&format!("ml3 {k}/{}", ML3_CASES + 1));
        }
    }
    Ok(cases)
}

/// Oracle quadrature of the kernel next to the closed form t^b E^g_{α,b+1}(δ t^α).
fn identity(alpha: f64, b: f64, g: f64, delta: f64, t: f64, series: Precision, quad: QuadOptions) -> CliResult<(f64, f64)> {
    let closed = t.powf(b) * hp_ml(alpha, b + 1.0, g, delta * t.powf(alpha), series)?;
    let q = prabhakar_kernel_integral(alpha, b, g, delta, t, quad)?;
    if (q - closed).abs() > 1e-10 * closed.abs().max(1.0) {
        return Err(CliError::Failure(format!("oracle identity mismatch at α={alpha} β={b} γ={g} δ={delta} t={t}: {closed} vs {q}")));
    }
    Ok((closed, q))
}

fn identity_cases(rng: &mut ChaCha8Rng, series: Precision, quad: QuadOptions) -> CliResult<(Vec<IdentityCase>, Vec<IdentityCase>)> {
    let mut ints = Vec::new();
    let mut ders = Vec::new();
    for _ in 0..IDENTITY_CASES {
        let p = PrabhakarParams::new(rng.gen_range(0.5..2.0), rng.gen_range(0.2..0.9), rng.gen_range(0.2..1.5), rng.gen_range(-2.0..1.0));
        let t = rng.gen_range(0.1..1.5);
        let (closed, q) = identity(p.alpha, p.beta, p.gamma, p.delta, t, series, quad)?;
        ints.push(IdentityCase { params: p, t, closed_form: closed, quadrature: q });
        // y = t: y′ = 1 under the substituted kernel (α, 1−β, −γ, δ)
        let (closed, q) = identity(p.alpha, 1.0 - p.beta, -p.gamma, p.delta, t, series, quad)?;
        ders.push(IdentityCase { params: p, t, closed_form: closed, quadrature: q });
    }
    Ok((ints, ders))
}

fn nonlocal_case(quad: QuadOptions) -> CliResult<NonlocalCase> {
    let p = PrabhakarParams::new(1.0, 0.5, 0.5, -1.0);
    let (a, b, q) = (-1.0, -1.0, 1.0);
    let e2 = ml2_weighted_integral(spec2(&ml2_tele(&p)), p.alpha, p.beta, a, p.delta, q, quad)?;
    let memory = a * hp_gamma(p.gamma, quad) * e2;
    let (m1_xi, m1_x) = (0.0, 0.5);
    let v2 = spec3(&ml3_tele_variant(Variant::V2, &p));
    let m1 = ml3_weighted_integral(v2, p.alpha, p.beta, a, b * (m1_x - m1_xi), p.delta, q, quad)?;
    Ok(NonlocalCase { params: p, a, b, q, mass: q, memory, weighted: q - memory, m1_xi, m1_x, m1 })
}

fn compat_cases(rng: &mut ChaCha8Rng, quad: QuadOptions) -> CliResult<Vec<CompatCase>> {
    let mut out = Vec::new();
    for _ in 0..COMPAT_CASES {
        let q: f64 = rng.gen_range(0.5..2.0);
        let (c0, c1, k1, c2) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.5..4.0), rng.gen_range(-1.0..1.0));
        let (m0, m1, k2) = (rng.gen_range(0.0..1.0), rng.gen_range(-0.5..0.5), rng.gen_range(0.5..4.0));
        let (s0, s1) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let phi = format!("{c0:?} + {c1:?}*sin({k1:?}*t) + {c2:?}*t^2");
        let m = format!("{m0:?} + {m1:?}*cos({k2:?}*t)");
        let psi = format!("{s0:?} + {s1:?}*x");
        let phif = move |t: f64| c0 + c1 * (k1 * t).sin() + c2 * t * t;
        let mf = move |t: f64| m0 + m1 * (k2 * t).cos();
        let integral = adaptive_quad_f64(&mut |t| mf(t) * phif(t), 0.0, q, 0.0, quad)?;
        let defect = (phif(0.0) - integral - s0).abs();
        out.push(CompatCase { phi, psi, m, q, defect });
    }
    Ok(out)
}

/// Recomputes every fixture from the oracle.
pub fn regenerate(log: &mut dyn FnMut(&str)) -> CliResult<Fixtures> {
    let series = Precision::new(SERIES_DIGITS)?;
    let quad = QuadOptions { prec: Precision::new(QUAD_DIGITS)?, ..QuadOptions::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let ml2 = ml2_cases(&mut rng, series, log)?;
    let ml3 = ml3_cases(&mut rng, series, log)?;
    log("prabhakar identities");
    let (prabhakar_integral, caputo_of_t) = identity_cases(&mut rng, series, quad)?;
    log("nonlocal integrals");
    let nonlocal = nonlocal_case(quad)?;
    log("compatibility defects");
    let compatibility = compat_cases(&mut rng, quad)?;
    Ok(Fixtures {
        generator: GENERATOR.into(),
        mpfr_version: mpfr_version(),
        series_digits: SERIES_DIGITS,
        quad_digits: QUAD_DIGITS,
        seed: SEED,
        ml2,
        ml3,
        prabhakar_integral,
        caputo_of_t,
        nonlocal,
        compatibility,
    })
}
