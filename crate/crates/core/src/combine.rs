//! Combining split p-values.
//!
//! Under the null, the split p-values `p_1, .., p_m` are exchangeable, so
//! `Z_k = Phi^{-1}(p_k)` are exchangeable standard normals with a common
//! correlation `rho >= 0`. The standardized mean
//! `M = Zbar / sqrt((1 + (m - 1) rho_hat) / m)` is compared against critical
//! values chosen for the least favorable `rho`.
//!
//! All summary statistics are computed over a sorted copy of the inputs, so
//! every function here is exactly invariant to the order of the p-values.

use serde::{Deserialize, Serialize};

use crate::dist;
use crate::linalg;
use crate::projtest::TestResult;
use crate::{Error, Result};

/// p-values are clamped into `[P_CLAMP, 1 - P_CLAMP]` before `Phi^{-1}`.
pub const P_CLAMP: f64 = 1e-15;

/// Numbers of splits covered by the critical-value tables.
pub const TABULATED_M: [usize; 10] = [2, 3, 4, 5, 10, 20, 40, 100, 1000, 10000];

/// `c(m, alpha/2)` at `alpha = 0.05` for the variance-based `rho_hat1`.
pub const VARIANCE_CRITICAL: [f64; 10] = [
    1.988, 2.058, 2.133, 2.204, 2.489, 2.865, 3.126, 4.115, 7.17, 12.66,
];

/// Smallest `beta` keeping level 0.05 for the quantile-based `rho_hat2`
/// with critical value `z_{alpha/2}`.
pub const QUANTILE_BETA: [f64; 10] = [0.25, 0.25, 0.25, 0.25, 0.20, 0.20, 0.15, 0.15, 0.10, 0.05];

/// The only level the tables cover.
pub const TABULATED_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZVector(Vec<f64>);

impl ZVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn m(&self) -> usize {
        self.0.len()
    }

    /// Mean and unbiased variance, computed on sorted values.
    pub fn mean_var(&self) -> (f64, f64) {
        let mut sorted = self.0.clone();
        sorted.sort_by(f64::total_cmp);
        linalg::mean_var(&sorted)
    }
}

fn check_p(pvals: &[f64]) -> Result<()> {
    if let Some(p) = pvals.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidParameter(format!(
            "p-values must lie in [0, 1], got {p}"
        )));
    }
    Ok(())
}

fn clamped_quantile(p: f64) -> f64 {
    dist::normal_quantile(p.clamp(P_CLAMP, 1.0 - P_CLAMP))
}

/// `Z_k = Phi^{-1}(p_k)` after clamping; needs `m >= 2`.
pub fn z_transform(pvals: &[f64]) -> Result<ZVector> {
    if pvals.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 p-values, got {}",
            pvals.len()
        )));
    }
    check_p(pvals)?;
    Ok(ZVector(pvals.iter().map(|&p| clamped_quantile(p)).collect()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RhoMethod {
    /// `rho_hat1 = max(0, 1 - s_Z^2)` with tabulated `c(m, alpha/2)`.
    Variance,
    /// `rho_hat2` from a chi-square quantile, with `c = z_{alpha/2}`.
    #[default]
    Quantile,
}

impl RhoMethod {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Variance => "variance",
            Self::Quantile => "quantile",
        }
    }
}

/// Which chi-square quantile `q` enters `rho_hat2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ChiSquareTail {
    /// `P(X <= q) = 1 - beta`. Larger `beta` gives a smaller `rho_hat2`, so
    /// the tabulated "largest admissible beta" is the least conservative
    /// choice that keeps the level.
    #[default]
    CdfOneMinusBeta,
    /// `P(X > q) = 1 - beta`. Kept for comparison; it under-estimates `rho`
    /// and inflates the size.
    SurvivalOneMinusBeta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoEstimate {
    pub value: f64,
    pub method: RhoMethod,
    pub beta: Option<f64>,
}

pub fn rho_hat1(z: &ZVector) -> RhoEstimate {
    let (_, var) = z.mean_var();
    RhoEstimate {
        value: (1.0 - var).clamp(0.0, 1.0),
        method: RhoMethod::Variance,
        beta: None,
    }
}

/// `rho_hat2 = max(0, 1 - (m - 1) s_Z^2 / q)` with `q` per [`ChiSquareTail`].
pub fn rho_hat2(z: &ZVector, beta: f64) -> Result<RhoEstimate> {
    rho_hat2_with(z, beta, ChiSquareTail::default())
}

pub fn rho_hat2_with(z: &ZVector, beta: f64, tail: ChiSquareTail) -> Result<RhoEstimate> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "beta must lie in (0, 1), got {beta}"
        )));
    }
    let df = (z.m() - 1) as f64;
    let q = match tail {
        ChiSquareTail::CdfOneMinusBeta => dist::chi_squared_quantile(1.0 - beta, df),
        ChiSquareTail::SurvivalOneMinusBeta => dist::chi_squared_quantile(beta, df),
    };
    let (_, var) = z.mean_var();
    Ok(RhoEstimate {
        value: (1.0 - df * var / q).clamp(0.0, 1.0),
        method: RhoMethod::Quantile,
        beta: Some(beta),
    })
}

/// `M = Zbar / sqrt((1 + (m - 1) rho) / m)`.
pub fn m_statistic(z: &ZVector, rho: &RhoEstimate) -> f64 {
    let m = z.m() as f64;
    let (mean, _) = z.mean_var();
    let rho = rho.value.clamp(0.0, 1.0);
    mean / ((1.0 + (m - 1.0) * rho) / m).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalValue {
    pub c: f64,
    /// `beta` for the quantile method.
    pub beta: Option<f64>,
    /// Table column used (nearest tabulated `m` not below the requested one).
    pub tabulated_m: usize,
    /// True when the value came from an explicit override.
    pub overridden: bool,
}

fn table_index(m: usize) -> Result<usize> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("need m >= 2, got {m}")));
    }
    TABULATED_M
        .iter()
        .position(|&t| t >= m)
        .ok_or(Error::UntabulatedM { m })
}

/// Table lookup at `alpha = 0.05`. Untabulated `m` maps to the nearest larger
/// tabulated `m`, which is conservative for both methods.
pub fn critical_value(method: RhoMethod, m: usize, alpha: f64) -> Result<CriticalValue> {
    critical_value_with_override(method, m, alpha, None)
}

/// As [`critical_value`], but a supplied `c` replaces the tabulated one and
/// lifts the `alpha = 0.05` restriction. The result is no longer exact.
pub fn critical_value_with_override(
    method: RhoMethod,
    m: usize,
    alpha: f64,
    override_c: Option<f64>,
) -> Result<CriticalValue> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let idx = table_index(m)?;
    let tabulated_m = TABULATED_M[idx];
    let beta = match method {
        RhoMethod::Variance => None,
        RhoMethod::Quantile => Some(QUANTILE_BETA[idx]),
    };
    if let Some(c) = override_c {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "critical value override must be positive, got {c}"
            )));
        }
        return Ok(CriticalValue {
            c,
            beta,
            tabulated_m,
            overridden: true,
        });
    }
    if (alpha - TABULATED_ALPHA).abs() > 1e-12 {
        return Err(Error::UnsupportedLevel { alpha });
    }
    let c = match method {
        RhoMethod::Variance => VARIANCE_CRITICAL[idx],
        RhoMethod::Quantile => dist::normal_upper_quantile(alpha / 2.0),
    };
    Ok(CriticalValue {
        c,
        beta,
        tabulated_m,
        overridden: false,
    })
}

/// Baseline combiners for dependent (or, for Fisher and Stouffer,
/// independent) p-values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Combiner {
    /// Reject when the mean p-value is at most `alpha / 2`.
    Mean2x,
    /// Reject when the median p-value is at most `alpha / 2`.
    Median2x,
    /// Reject when `|sum Z_k| >= m z_{alpha/2}`.
    ZAverage,
    /// Reject when `sum tan((0.5 - p_k) pi) >= m c_alpha`.
    Cauchy,
    /// `-2 sum ln p_k ~ chi^2_{2m}`; valid under independence only.
    Fisher,
    /// `sum Phi^{-1}(1 - p_k) / sqrt(m) ~ N(0, 1)`; valid under independence only.
    Stouffer,
}

impl Combiner {
    pub const ALL: [Combiner; 6] = [
        Self::Mean2x,
        Self::Median2x,
        Self::ZAverage,
        Self::Cauchy,
        Self::Fisher,
        Self::Stouffer,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Mean2x => "mean2x",
            Self::Median2x => "median2x",
            Self::ZAverage => "zaverage",
            Self::Cauchy => "cauchy",
            Self::Fisher => "fisher",
            Self::Stouffer => "stouffer",
        }
    }

    pub fn assumes_independence(&self) -> bool {
        matches!(self, Self::Fisher | Self::Stouffer)
    }
}

impl std::str::FromStr for Combiner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown combiner '{s}'")))
    }
}

fn median(sorted: &[f64]) -> f64 {
    let m = sorted.len();
    if m % 2 == 1 {
        sorted[m / 2]
    } else {
        0.5 * (sorted[m / 2 - 1] + sorted[m / 2])
    }
}

/// Applies one baseline combination rule at level `alpha`.
pub fn combine(method: Combiner, pvals: &[f64], alpha: f64) -> Result<TestResult> {
    if pvals.is_empty() {
        return Err(Error::InvalidParameter("no p-values to combine".into()));
    }
    check_p(pvals)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let mut sorted = pvals.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() as f64;
    let sum = |f: &dyn Fn(f64) -> f64| sorted.iter().map(|&p| f(p)).sum::<f64>();

    let result = match method {
        Combiner::Mean2x => {
            let mean = sum(&|p| p) / m;
            TestResult::new(method.name(), mean, (2.0 * mean).min(1.0))
                .with_decision(alpha, mean <= alpha / 2.0)
        }
        Combiner::Median2x => {
            let med = median(&sorted);
            TestResult::new(method.name(), med, (2.0 * med).min(1.0))
                .with_decision(alpha, med <= alpha / 2.0)
        }
        Combiner::ZAverage => {
            let s = sum(&clamped_quantile);
            let z = dist::normal_upper_quantile(alpha / 2.0);
            TestResult::new(method.name(), s, dist::normal_two_sided(s / m))
                .with_decision(alpha, s.abs() >= m * z)
        }
        Combiner::Cauchy => {
            let t = sum(&|p| {
                let p = p.clamp(P_CLAMP, 1.0 - P_CLAMP);
                ((0.5 - p) * std::f64::consts::PI).tan()
            });
            let c = dist::cauchy_upper_quantile(alpha);
            let p_value = 0.5 - (t / m).atan() / std::f64::consts::PI;
            TestResult::new(method.name(), t, p_value)
                .with_decision(alpha, t >= m * c)
                .diag("threshold", m * c)
        }
        Combiner::Fisher => {
            let x = sum(&|p| -2.0 * p.max(P_CLAMP).ln());
            TestResult::new(method.name(), x, dist::chi_squared_sf(x, 2.0 * m)).at_level(Some(alpha))
        }
        Combiner::Stouffer => {
            let s = sum(&|p| -clamped_quantile(p)) / m.sqrt();
            TestResult::new(method.name(), s, dist::normal_sf(s)).at_level(Some(alpha))
        }
    };
    Ok(result
        .diag("m", pvals.len())
        .diag("assumes_independence", method.assumes_independence()))
}
