//! Single-split projection test.
//!
//! The sample is split into a direction-estimation half `D1` and a testing
//! half `D2`. A sparse direction `w` is estimated on `D1`; the projected
//! observations `w' x_i`, `i in D2`, are then tested for zero mean with a
//! one-sample t-statistic. Because `w` depends only on `D1`, the projected
//! sample is i.i.d. given `w` and the t-test keeps its nominal level.

use std::collections::BTreeMap;

use ndarray::{Array1, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::datagen::DataMatrix;
use crate::dist;
use crate::linalg;
use crate::optimizer::{self, SampleCovariance, SolverOptions};
use crate::penalty::{PenaltyKind, PenaltySpec};
use crate::{Error, Result};

/// A random partition of `{0, .., n-1}`: the first `n1` permuted indices form
/// `D1`, the remaining `n2` form `D2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    permutation: Vec<usize>,
    n1: usize,
    n2: usize,
}

/// `n2 = floor(kappa n)`, `n1 = n - n2`.
pub fn make_split(n: usize, kappa: f64, permutation: Vec<usize>) -> Result<SplitPlan> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "split fraction kappa must lie in (0, 1), got {kappa}"
        )));
    }
    if permutation.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "permutation has length {}, expected {n}",
            permutation.len()
        )));
    }
    let mut seen = vec![false; n];
    for &i in &permutation {
        if i >= n || seen[i] {
            return Err(Error::InvalidParameter(format!(
                "permutation is not a bijection on 0..{n}"
            )));
        }
        seen[i] = true;
    }
    let n2 = (kappa * n as f64).floor() as usize;
    let n1 = n - n2;
    if n1 < 2 || n2 < 2 {
        return Err(Error::InfeasibleSplit { n, n1, n2 });
    }
    Ok(SplitPlan {
        permutation,
        n1,
        n2,
    })
}

impl SplitPlan {
    /// Split of the unpermuted index order.
    pub fn identity(n: usize, kappa: f64) -> Result<Self> {
        make_split(n, kappa, (0..n).collect())
    }

    pub fn n(&self) -> usize {
        self.permutation.len()
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    /// Row indices of the direction-estimation half.
    pub fn estimation_rows(&self) -> &[usize] {
        &self.permutation[..self.n1]
    }

    /// Row indices of the testing half.
    pub fn testing_rows(&self) -> &[usize] {
        &self.permutation[self.n1..]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Reference {
    /// `p = 2 (1 - Phi(|T|))`.
    #[default]
    Normal,
    /// `p = 2 (1 - G_{n2-1}(|T|))`, exact under Gaussian data.
    StudentT,
}

/// What to do when the penalized estimate is identically zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ZeroDirection {
    /// Project on `sign(xbar_j) e_j` for the coordinate with the largest
    /// `|xbar_j|` on `D1`, which is the first variable to enter the Lasso
    /// path. The direction still depends on `D1` only.
    #[default]
    LeadingCoordinate,
    /// Report the degenerate statistic `T = 0`, `p = 1`.
    PValueOne,
}

/// Diagnostic value attached to a [`TestResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Diagnostic {
    Flag(bool),
    Count(u64),
    Number(f64),
    Text(String),
}

impl From<bool> for Diagnostic {
    fn from(v: bool) -> Self {
        Self::Flag(v)
    }
}

impl From<usize> for Diagnostic {
    fn from(v: usize) -> Self {
        Self::Count(v as u64)
    }
}

impl From<f64> for Diagnostic {
    fn from(v: f64) -> Self {
        Self::Number(v)
    }
}

impl From<&str> for Diagnostic {
    fn from(v: &str) -> Self {
        Self::Text(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub method: String,
    pub statistic: f64,
    pub p_value: f64,
    pub alpha: Option<f64>,
    pub reject: Option<bool>,
    pub diagnostics: BTreeMap<String, Diagnostic>,
}

impl TestResult {
    pub fn new(method: impl Into<String>, statistic: f64, p_value: f64) -> Self {
        Self {
            method: method.into(),
            statistic,
            p_value: p_value.clamp(0.0, 1.0),
            alpha: None,
            reject: None,
            diagnostics: BTreeMap::new(),
        }
    }

    /// Attaches a level and the decision `p_value < alpha`.
    pub fn at_level(mut self, alpha: Option<f64>) -> Self {
        self.alpha = alpha;
        self.reject = alpha.map(|a| self.p_value < a);
        self
    }

    /// Overrides the decision for rules that are not of the `p < alpha` form.
    pub fn with_decision(mut self, alpha: f64, reject: bool) -> Self {
        self.alpha = Some(alpha);
        self.reject = Some(reject);
        self
    }

    pub fn diag(mut self, key: &str, value: impl Into<Diagnostic>) -> Self {
        self.diagnostics.insert(key.to_string(), value.into());
        self
    }

    pub fn rejected(&self) -> bool {
        self.reject.unwrap_or(false)
    }
}

/// Outcome of the projected t-test on `D2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub statistic: f64,
    pub p_value: f64,
    /// The projected sample was identically zero.
    pub degenerate: bool,
}

/// Projects the rows of `data2` on `w` and applies a one-sample t-test:
/// `T = sqrt(n2) ybar / s_y`.
pub fn project_and_t(
    data2: ArrayView2<f64>,
    w: ArrayView1<f64>,
    reference: Reference,
) -> Result<Projection> {
    let n2 = data2.nrows();
    if n2 < 2 {
        return Err(Error::InvalidParameter(format!(
            "testing half needs at least 2 observations, got {n2}"
        )));
    }
    if data2.ncols() != w.len() {
        return Err(Error::DimensionMismatch(format!(
            "data has {} columns, direction has {}",
            data2.ncols(),
            w.len()
        )));
    }
    let y: Vec<f64> = data2.dot(&w).to_vec();
    project_sample(&y, reference)
}

/// One-sample t-test on an already projected sample.
pub fn project_sample(y: &[f64], reference: Reference) -> Result<Projection> {
    let n2 = y.len();
    let (mean, var) = linalg::mean_var(y);
    let sd = var.sqrt();
    let scale = y.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if sd <= 1e-14 * scale || scale == 0.0 {
        if scale == 0.0 {
            return Ok(Projection {
                statistic: 0.0,
                p_value: 1.0,
                degenerate: true,
            });
        }
        return Err(Error::ConstantProjection);
    }
    let statistic = (n2 as f64).sqrt() * mean / sd;
    let p_value = match reference {
        Reference::Normal => dist::normal_two_sided(statistic),
        Reference::StudentT => dist::student_two_sided(statistic, n2 as f64 - 1.0),
    };
    Ok(Projection {
        statistic,
        p_value,
        degenerate: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SptConfig {
    pub kappa: f64,
    pub penalty: PenaltyKind,
    pub solver: SolverOptions,
    pub reference: Reference,
    pub zero_direction: ZeroDirection,
    pub alpha: Option<f64>,
}

impl Default for SptConfig {
    fn default() -> Self {
        Self {
            kappa: 0.5,
            penalty: PenaltyKind::Lasso,
            solver: SolverOptions::default(),
            reference: Reference::Normal,
            zero_direction: ZeroDirection::default(),
            alpha: Some(0.05),
        }
    }
}

/// Everything one split produces; shared by [`spt`] and the multi-split test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitOutcome {
    pub statistic: f64,
    pub p_value: f64,
    pub degenerate: bool,
    pub lambda: f64,
    pub converged: bool,
    pub iterations: usize,
    pub stationarity_residual: f64,
    pub nonzeros: usize,
    /// The penalized estimate was zero and the leading-coordinate direction
    /// was used instead.
    pub fallback_direction: bool,
}

/// Estimates the direction on `D1` and tests the projection of `D2`.
pub fn run_split(data: &DataMatrix, plan: &SplitPlan, config: &SptConfig) -> Result<SplitOutcome> {
    if plan.n() != data.n() {
        return Err(Error::DimensionMismatch(format!(
            "split plan covers {} observations, data has {}",
            plan.n(),
            data.n()
        )));
    }
    let x = data.view();
    let d1 = x.select(Axis(0), plan.estimation_rows());
    let lambda = optimizer::resolve_lambda(&config.solver.lambda_rule, d1.view(), config.penalty, &config.solver)?;
    let penalty = PenaltySpec::new(config.penalty, lambda)?;
    let s1 = SampleCovariance::from_rows(d1.view())?;
    let est = optimizer::estimate_direction(&s1, s1.means(), &penalty, &config.solver)?;

    let mut w = Array1::from(est.w_hat.clone());
    let mut fallback_direction = false;
    if est.is_zero() && config.zero_direction == ZeroDirection::LeadingCoordinate {
        let means = s1.means();
        let (j, &m) = means
            .iter()
            .enumerate()
            .fold((0, &0.0_f64), |best, cur| if cur.1.abs() > best.1.abs() { cur } else { best });
        if m != 0.0 {
            w[j] = m.signum();
            fallback_direction = true;
        }
    }

    let y: Vec<f64> = plan
        .testing_rows()
        .iter()
        .map(|&i| x.row(i).dot(&w))
        .collect();
    let proj = project_sample(&y, config.reference)?;
    Ok(SplitOutcome {
        statistic: proj.statistic,
        p_value: proj.p_value,
        degenerate: proj.degenerate,
        lambda,
        converged: est.converged,
        iterations: est.iterations_used,
        stationarity_residual: est.stationarity_residual,
        nonzeros: est.nonzeros(),
        fallback_direction,
    })
}

/// Single-splitting projection test.
pub fn spt(data: &DataMatrix, plan: &SplitPlan, config: &SptConfig) -> Result<TestResult> {
    let out = run_split(data, plan, config)?;
    Ok(TestResult::new("spt", out.statistic, out.p_value)
        .at_level(config.alpha)
        .diag("lambda", out.lambda)
        .diag("nonzeros", out.nonzeros)
        .diag("converged", out.converged)
        .diag("iterations", out.iterations)
        .diag("stationarity_residual", out.stationarity_residual)
        .diag("degenerate", out.degenerate)
        .diag("fallback_direction", out.fallback_direction)
        .diag("n1", plan.n1())
        .diag("n2", plan.n2()))
}

/// Asymptotic SPT power `Phi(-z_{alpha/2} + sqrt(n kappa zeta))`, where
/// `zeta = mu' Sigma^{-1} mu`.
pub fn spt_power_oracle(n: usize, kappa: f64, zeta: f64, alpha: f64) -> Result<f64> {
    if !(zeta >= 0.0) || !(kappa > 0.0 && kappa < 1.0) || !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need zeta >= 0, kappa and alpha in (0, 1); got zeta = {zeta}, kappa = {kappa}, alpha = {alpha}"
        )));
    }
    let z = dist::normal_upper_quantile(alpha / 2.0);
    Ok(dist::normal_cdf(-z + (n as f64 * kappa * zeta).sqrt()))
}
