//! Competitor one-sample tests: the CQ quadratic-form test, the CLX
//! extreme-value test, the random projection test and the ridge projection
//! test.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::datagen::DataMatrix;
use crate::dist;
use crate::linalg;
use crate::projtest::{self, Reference, SplitPlan, TestResult};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    /// Random projection dimension; `None` means `floor(n / 2)`.
    pub rpt_dim: Option<usize>,
    /// Ridge level; `None` means `sqrt(ln p / n1)`.
    pub ridge_lambda: Option<f64>,
    pub ridge_reference: Reference,
    pub kappa: f64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            rpt_dim: None,
            ridge_lambda: None,
            ridge_reference: Reference::StudentT,
            kappa: 0.5,
        }
    }
}

impl BaselineConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        if let Some(k) = self.rpt_dim {
            if k == 0 || k >= n {
                return Err(Error::InvalidParameter(format!(
                    "projection dimension must satisfy 1 <= k < n = {n}, got {k}"
                )));
            }
        }
        if let Some(l) = self.ridge_lambda {
            if !(l > 0.0) || !l.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "ridge lambda must be positive, got {l}"
                )));
            }
        }
        Ok(())
    }
}

fn need_rows(data: &DataMatrix, min: usize) -> Result<()> {
    if data.n() < min {
        return Err(Error::InvalidParameter(format!(
            "need at least {min} observations, got {}",
            data.n()
        )));
    }
    Ok(())
}

/// CQ test: `T = sum_{i != j} x_i'x_j / (n (n - 1))`, standardized by
/// `sqrt(2 tr(Sigma^2) / (n (n - 1)))` with the pairwise estimate
/// `tr(Sigma^2) = sum_{i != j} (x_i'x_j)^2 / (n (n - 1))`. One-sided: large
/// `T` is evidence against the null.
pub fn cq_test(data: &DataMatrix, alpha: f64) -> Result<TestResult> {
    need_rows(data, 4)?;
    let x = data.view();
    let n = data.n();
    let gram = x.dot(&x.t());
    let (mut s1, mut s2) = (0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let g = gram[[i, j]];
                s1 += g;
                s2 += g * g;
            }
        }
    }
    let pairs = (n * (n - 1)) as f64;
    let t = s1 / pairs;
    let trace_sigma2 = s2 / pairs;
    let se = (2.0 * trace_sigma2 / pairs).sqrt();
    let z = if se > 0.0 {
        t / se
    } else if t == 0.0 {
        0.0
    } else {
        return Err(Error::ZeroVariance("CQ variance estimate is zero".into()));
    };
    Ok(TestResult::new("cq", t, dist::normal_sf(z))
        .at_level(Some(alpha))
        .diag("z", z)
        .diag("trace_sigma2", trace_sigma2))
}

/// CLX test: `M = max_j n xbar_j^2 / s_jj`, with p-value from the Gumbel
/// limit `P(M - 2 ln p + ln ln p <= x) -> exp(-exp(-x / 2) / sqrt(pi))`.
pub fn clx_test(data: &DataMatrix, alpha: f64) -> Result<TestResult> {
    need_rows(data, 4)?;
    let p = data.p();
    if p < 2 {
        return Err(Error::InvalidParameter("CLX needs p >= 2".into()));
    }
    let n = data.n() as f64;
    let x = data.view();
    let mut m_stat = 0.0_f64;
    for (j, col) in x.axis_iter(Axis(1)).enumerate() {
        let (mean, var) = linalg::mean_var(&col.to_vec());
        if var <= 0.0 {
            return Err(Error::ZeroVariance(format!("column {j} is constant")));
        }
        m_stat = m_stat.max(n * mean * mean / var);
    }
    let pf = p as f64;
    let shifted = m_stat - 2.0 * pf.ln() + pf.ln().ln();
    let cdf = (-(-shifted / 2.0).exp() / std::f64::consts::PI.sqrt()).exp();
    let p_value = 1.0 - cdf;
    let q_alpha = -std::f64::consts::PI.ln() - 2.0 * (1.0 / (1.0 - alpha)).ln().ln();
    Ok(TestResult::new("clx", m_stat, p_value)
        .with_decision(alpha, shifted > q_alpha)
        .diag("shifted", shifted)
        .diag("critical", q_alpha))
}

/// Hotelling's `T^2 = n ybar' S^{-1} ybar` on the rows of `y`, with the exact
/// reference `(n - k) / (k (n - 1)) T^2 ~ F(k, n - k)`.
pub fn hotelling(y: ArrayView2<f64>) -> Result<(f64, f64)> {
    let (n, k) = y.dim();
    if k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!(
            "Hotelling test needs 1 <= k < n, got k = {k}, n = {n}"
        )));
    }
    let ybar = linalg::column_means(y);
    let s = linalg::sample_covariance(y);
    let l = linalg::cholesky(s.view())
        .map_err(|_| Error::Singular("projected covariance".into()))?;
    let sol = linalg::cholesky_solve(l.view(), ybar.view());
    let t2 = n as f64 * ybar.dot(&sol);
    let (nf, kf) = (n as f64, k as f64);
    let f = (nf - kf) / (kf * (nf - 1.0)) * t2;
    Ok((t2, dist::f_sf(f, kf, nf - kf)))
}

const RPT_ATTEMPTS: usize = 3;

/// Random projection test: project on a `p x k` standard normal matrix and
/// apply Hotelling's test to the `k`-dimensional sample. A singular
/// projected covariance triggers a fresh draw, up to three attempts.
pub fn random_projection_test<R: Rng + ?Sized>(
    data: &DataMatrix,
    k: usize,
    rng: &mut R,
    alpha: f64,
) -> Result<TestResult> {
    let n = data.n();
    if k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!(
            "projection dimension must satisfy 1 <= k < n = {n}, got {k}"
        )));
    }
    let mut last = None;
    for attempt in 1..=RPT_ATTEMPTS {
        let proj = Array2::from_shape_simple_fn((data.p(), k), || rng.sample(StandardNormal));
        let y = data.view().dot(&proj);
        match hotelling(y.view()) {
            Ok((t2, p_value)) => {
                return Ok(TestResult::new("rpt", t2, p_value)
                    .at_level(Some(alpha))
                    .diag("k", k)
                    .diag("attempts", attempt));
            }
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// `(S1 + lambda I)^{-1} xbar1` for the sample covariance `S1` of `d1`,
/// computed through the `n1 x n1` Woodbury form.
pub fn ridge_direction(d1: ArrayView2<f64>, lambda: f64) -> Result<Array1<f64>> {
    let n1 = d1.nrows();
    if n1 < 2 {
        return Err(Error::InvalidParameter("ridge needs n1 >= 2".into()));
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "ridge lambda must be positive, got {lambda}"
        )));
    }
    let xbar = linalg::column_means(d1);
    let a = linalg::center(d1) / (n1 as f64 - 1.0).sqrt();
    let mut inner = a.dot(&a.t());
    for i in 0..n1 {
        inner[[i, i]] += lambda;
    }
    let l = linalg::cholesky(inner.view())?;
    let ax = a.dot(&xbar);
    let sol = linalg::cholesky_solve(l.view(), ax.view());
    Ok((&xbar - &a.t().dot(&sol)) / lambda)
}

/// Ridge projection test on a given split.
pub fn ridge_projection_test_with_plan(
    data: &DataMatrix,
    plan: &SplitPlan,
    lambda: Option<f64>,
    reference: Reference,
    alpha: f64,
) -> Result<TestResult> {
    let d1 = data.select_rows(plan.estimation_rows());
    let lambda = match lambda {
        Some(l) => l,
        None => (((data.p() as f64).ln()).max(0.0) / plan.n1() as f64).sqrt().max(f64::MIN_POSITIVE),
    };
    let w = ridge_direction(d1.view(), lambda)?;
    let d2 = data.select_rows(plan.testing_rows());
    let proj = projtest::project_and_t(d2.view(), w.view(), reference)?;
    Ok(TestResult::new("ridge", proj.statistic, proj.p_value)
        .at_level(Some(alpha))
        .diag("lambda", lambda)
        .diag("degenerate", proj.degenerate))
}

/// Ridge projection test on a random split drawn from `rng`.
pub fn ridge_projection_test<R: Rng + ?Sized>(
    data: &DataMatrix,
    kappa: f64,
    lambda: Option<f64>,
    reference: Reference,
    rng: &mut R,
    alpha: f64,
) -> Result<TestResult> {
    let mut perm: Vec<usize> = (0..data.n()).collect();
    perm.shuffle(rng);
    let plan = projtest::make_split(data.n(), kappa, perm)?;
    ridge_projection_test_with_plan(data, &plan, lambda, reference, alpha)
}
