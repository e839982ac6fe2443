//! Flat run settings shared by flags, TOML files and report echoes.
//!
//! Every field is optional. A run overlays command-line flags on the TOML
//! file, then fills the remaining fields with per-command defaults. The
//! filled settings are echoed in the report and can be fed back through
//! `--config` to replay the run.

use std::path::{Path, PathBuf};

use hdmt_core::combine::RhoMethod;
use hdmt_core::optimizer::{LambdaRule, SolverOptions, StepRule};
use hdmt_core::penalty::{DEFAULT_MCP_B, DEFAULT_SCAD_A};
use hdmt_core::{
    CovarianceFamily, CovarianceSpec, Distribution, MptConfig, PenaltyKind, Reference, SptConfig,
    ZeroDirection,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SEED_ENV: &str = "HDMT_SEED";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub header: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalize: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub penalty: Option<String>,
    /// SCAD `a` or MCP `b`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub penalty_param: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_c0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zero_direction: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub critical_override: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rpt_dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ridge_lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distribution: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub covariance: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sparsity: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tests: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_values: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_values: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub families: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distributions: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_values: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub full_scale: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_values: Option<Vec<f64>>,
}

macro_rules! overlay_fields {
    ($top:ident, $base:ident, $($f:ident),*) => {
        Settings { $($f: $top.$f.or($base.$f)),* }
    };
}

impl Settings {
    pub fn from_toml_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    /// Fields of `self` win; missing ones come from `base`.
    pub fn overlay(self, base: Settings) -> Settings {
        let top = self;
        overlay_fields!(
            top, base, data, header, normalize, method, alpha, seed, kappa, penalty,
            penalty_param, lambda, lambda_c0, reference, zero_direction, max_iterations,
            tolerance, m, rho, critical_override, rpt_dim, ridge_lambda, n, p, distribution,
            covariance, r, c, sparsity, reps, tests, r_values, c_values, families,
            distributions, m_values, full_scale, p_values
        )
    }

    pub fn fill_alpha(&mut self) {
        self.alpha.get_or_insert(0.05);
    }

    /// Flag or file seed, then the environment, then 0.
    pub fn fill_seed(&mut self) -> Result<(), CliError> {
        if self.seed.is_none() {
            self.seed = Some(match std::env::var(SEED_ENV) {
                Ok(v) => v.trim().parse().map_err(|_| {
                    CliError::Usage(format!("{SEED_ENV} must be an unsigned integer, got '{v}'"))
                })?,
                Err(_) => 0,
            });
        }
        Ok(())
    }

    pub fn fill_split(&mut self, default_reference: &str) {
        self.kappa.get_or_insert(0.5);
        let penalty = self.penalty.get_or_insert_with(|| "lasso".into()).to_ascii_lowercase();
        match penalty.as_str() {
            "scad" => {
                self.penalty_param.get_or_insert(DEFAULT_SCAD_A);
            }
            "mcp" => {
                self.penalty_param.get_or_insert(DEFAULT_MCP_B);
            }
            _ => {}
        }
        if self.lambda.is_none() {
            self.lambda_c0.get_or_insert(1.0);
        }
        self.reference.get_or_insert_with(|| default_reference.into());
        self.zero_direction.get_or_insert_with(|| "leading".into());
        let solver = SolverOptions::default();
        self.max_iterations.get_or_insert(solver.max_iterations);
        self.tolerance.get_or_insert(solver.stationarity_tolerance);
    }

    pub fn fill_mpt(&mut self) {
        self.m.get_or_insert(hdmt_core::mpt::DEFAULT_M);
        self.rho.get_or_insert_with(|| "quantile".into());
    }

    pub fn penalty_kind(&self) -> Result<PenaltyKind, CliError> {
        let name = self.penalty.as_deref().unwrap_or("lasso");
        match name.to_ascii_lowercase().as_str() {
            "lasso" => Ok(PenaltyKind::Lasso),
            "scad" => Ok(PenaltyKind::Scad {
                a: self.penalty_param.unwrap_or(DEFAULT_SCAD_A),
            }),
            "mcp" => Ok(PenaltyKind::Mcp {
                b: self.penalty_param.unwrap_or(DEFAULT_MCP_B),
            }),
            other => Err(CliError::Usage(format!(
                "unknown penalty '{other}' (expected lasso, scad or mcp)"
            ))),
        }
    }

    pub fn solver(&self) -> SolverOptions {
        let defaults = SolverOptions::default();
        SolverOptions {
            max_iterations: self.max_iterations.unwrap_or(defaults.max_iterations),
            stationarity_tolerance: self.tolerance.unwrap_or(defaults.stationarity_tolerance),
            step_rule: StepRule::default(),
            lambda_rule: match self.lambda {
                Some(l) => LambdaRule::Explicit(l),
                None => LambdaRule::RateFormula {
                    c0: self.lambda_c0.unwrap_or(1.0),
                },
            },
        }
    }

    pub fn split_config(&self) -> Result<SptConfig, CliError> {
        Ok(SptConfig {
            kappa: self.kappa.unwrap_or(0.5),
            penalty: self.penalty_kind()?,
            solver: self.solver(),
            reference: parse_reference(self.reference.as_deref().unwrap_or("normal"))?,
            zero_direction: parse_zero_direction(
                self.zero_direction.as_deref().unwrap_or("leading"),
            )?,
            alpha: self.alpha,
        })
    }

    pub fn mpt_config(&self) -> Result<MptConfig, CliError> {
        let split = self.split_config()?;
        Ok(MptConfig {
            m: self.m.unwrap_or(hdmt_core::mpt::DEFAULT_M),
            kappa: split.kappa,
            alpha: self.alpha.unwrap_or(0.05),
            penalty: split.penalty,
            solver: split.solver,
            reference: split.reference,
            zero_direction: split.zero_direction,
            rho_method: parse_rho(self.rho.as_deref().unwrap_or("quantile"))?,
            critical_override: self.critical_override,
            parallel: true,
            ..MptConfig::default()
        })
    }
}

pub fn parse_reference(s: &str) -> Result<Reference, CliError> {
    match s.to_ascii_lowercase().as_str() {
        "normal" | "z" => Ok(Reference::Normal),
        "t" | "student" | "student-t" => Ok(Reference::StudentT),
        other => Err(CliError::Usage(format!(
            "unknown reference '{other}' (expected normal or t)"
        ))),
    }
}

pub fn parse_zero_direction(s: &str) -> Result<ZeroDirection, CliError> {
    match s.to_ascii_lowercase().as_str() {
        "leading" => Ok(ZeroDirection::LeadingCoordinate),
        "p-one" | "pvalue-one" => Ok(ZeroDirection::PValueOne),
        other => Err(CliError::Usage(format!(
            "unknown zero-direction rule '{other}' (expected leading or pvalue-one)"
        ))),
    }
}

pub fn parse_rho(s: &str) -> Result<RhoMethod, CliError> {
    match s.to_ascii_lowercase().as_str() {
        "variance" => Ok(RhoMethod::Variance),
        "quantile" => Ok(RhoMethod::Quantile),
        other => Err(CliError::Usage(format!(
            "unknown rho method '{other}' (expected variance or quantile)"
        ))),
    }
}

/// `normal` or `t<df>`, e.g. `t6`.
pub fn parse_distribution(s: &str) -> Result<Distribution, CliError> {
    let lower = s.to_ascii_lowercase();
    if lower == "normal" || lower == "gaussian" {
        return Ok(Distribution::Gaussian);
    }
    if let Some(df) = lower.strip_prefix('t') {
        if let Ok(df) = df.parse::<f64>() {
            if df > 2.0 {
                return Ok(Distribution::student_t(df));
            }
        }
    }
    Err(CliError::Usage(format!(
        "unknown distribution '{s}' (expected normal or t<df> with df > 2)"
    )))
}

pub fn parse_family(s: &str) -> Result<CovarianceFamily, CliError> {
    match s.to_ascii_lowercase().as_str() {
        "cs" => Ok(CovarianceFamily::CompoundSymmetry),
        "ar" => Ok(CovarianceFamily::Autocorrelation),
        "identity" | "id" => Ok(CovarianceFamily::Identity),
        other => Err(CliError::Usage(format!(
            "unknown covariance family '{other}' (expected cs, ar or identity)"
        ))),
    }
}

pub fn covariance_spec(family: &str, r: f64) -> Result<CovarianceSpec, CliError> {
    Ok(CovarianceSpec {
        family: parse_family(family)?,
        r,
    })
}
