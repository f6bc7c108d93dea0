//! Run configuration: one JSON document per solve.

use std::path::{Path, PathBuf};

use ptel_core::{DataFn, Domain2D, Forcing, GoursatOptions, PrabhakarParams, ProblemN, QuadPolicy, SeriesPolicy, TelegraphCoeffs};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Strict,
    Relaxed,
}

/// Grid size in nodes per axis, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_t: usize,
    pub n_x: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Policies {
    pub series: SeriesPolicy,
    pub quad: QuadPolicy,
    pub arg_cap: f64,
}

impl Default for Policies {
    fn default() -> Self {
        let g = GoursatOptions::default();
        Self { series: g.series, quad: g.quad, arg_cap: g.arg_cap }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub u_csv: PathBuf,
    pub tau_csv: PathBuf,
    pub svg: Option<PathBuf>,
}

impl Default for Outputs {
    fn default() -> Self {
        Self { u_csv: "u.csv".into(), tau_csv: "tau.csv".into(), svg: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_version")]
    pub version: u32,
    pub params: PrabhakarParams,
    pub coeffs: TelegraphCoeffs,
    pub domain: Domain2D,
    pub phi: String,
    pub psi: String,
    #[serde(rename = "M")]
    pub m: String,
    #[serde(default = "zero_expr")]
    pub f_smooth: String,
    #[serde(default)]
    pub eps1: f64,
    #[serde(default)]
    pub eps2: f64,
    pub grid: GridConfig,
    #[serde(default)]
    pub policies: Policies,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub outputs: Outputs,
}

fn default_version() -> u32 {
    CONFIG_VERSION
}

fn zero_expr() -> String {
    "0".into()
}

impl RunConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Input(format!("config: {e}")))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Input(m) => CliError::Input(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Enforces everything that can be checked without solving.
    pub fn check(&self) -> CliResult<()> {
        if self.version != CONFIG_VERSION {
            return Err(CliError::Input(format!("config version {} is not supported (expected {CONFIG_VERSION})", self.version)));
        }
        if self.grid.n_t < 2 || self.grid.n_x < 2 {
            return Err(CliError::Input(format!("grid needs at least 2 nodes per axis (got n_t = {}, n_x = {})", self.grid.n_t, self.grid.n_x)));
        }
        self.problem()?.validate()?;
        self.policies.series.validate()?;
        self.policies.quad.validate()?;
        if !(self.policies.arg_cap > 0.0) {
            return Err(CliError::Input(format!("policies.arg_cap must be positive (got {})", self.policies.arg_cap)));
        }
        Ok(())
    }

    pub fn problem(&self) -> CliResult<ProblemN> {
        let parse = |name: &str, text: &str| DataFn::parse(text).map_err(|e| CliError::Input(format!("{name}: {e}")));
        Ok(ProblemN {
            params: self.params,
            coeffs: self.coeffs,
            domain: self.domain,
            phi: parse("phi", &self.phi)?,
            psi: parse("psi", &self.psi)?,
            m: parse("M", &self.m)?,
            forcing: Forcing { smooth: parse("f_smooth", &self.f_smooth)?, eps1: self.eps1, eps2: self.eps2 },
        })
    }

    pub fn goursat_options(&self) -> GoursatOptions {
        GoursatOptions { quad: self.policies.quad, series: self.policies.series, arg_cap: self.policies.arg_cap }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "params": {"alpha": 1, "beta": 0.5, "gamma": 0.5, "delta": -1},
        "coeffs": {"a": -1, "b": -1},
        "domain": {"q": 1, "p": 1},
        "phi": "1", "psi": "0", "M": "1",
        "grid": {"n_t": 9, "n_x": 9}
    }"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = RunConfig::from_json(MINIMAL).unwrap();
        assert_eq!(c.mode, Mode::Strict);
        assert_eq!(c.f_smooth, "0");
        assert_eq!(c.outputs.u_csv, PathBuf::from("u.csv"));
        assert!(c.problem().unwrap().forcing.is_zero());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = MINIMAL.replace("\"phi\"", "\"colour\": 1, \"phi\"");
        assert!(matches!(RunConfig::from_json(&bad), Err(CliError::Input(m)) if m.contains("colour")));
        let nested = MINIMAL.replace("\"delta\": -1", "\"delta\": -1, \"eta\": 2");
        assert!(RunConfig::from_json(&nested).is_err());
    }

    #[test]
    fn invalid_problems_fail_at_load() {
        let bad_expr = MINIMAL.replace("\"psi\": \"0\"", "\"psi\": \"sin(\"");
        assert!(matches!(RunConfig::from_json(&bad_expr), Err(CliError::Input(_))));
        let zero_m = MINIMAL.replace("\"M\": \"1\"", "\"M\": \"0\"");
        assert!(matches!(RunConfig::from_json(&zero_m), Err(CliError::Core(_))));
        let tiny = MINIMAL.replace("\"n_t\": 9", "\"n_t\": 1");
        assert!(RunConfig::from_json(&tiny).is_err());
        let v2 = MINIMAL.replace("\"params\"", "\"version\": 2, \"params\"");
        assert!(RunConfig::from_json(&v2).is_err());
    }
}
