//! Composite gradient descent for the penalized quadratic
//!
//! ```text
//! minimize  1/2 w' S w - xbar' w + sum_j P(w_j)
//! ```
//!
//! where `S` is a sample covariance and `P` one of the penalties in
//! [`crate::penalty`]. Iterates are `w <- prox_{eta P}(w - eta (S w - xbar))`
//! started from zero. Any stationary point is an acceptable answer; the
//! stationarity residual measures how far the first-order condition is from
//! holding.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, ArrayViewMut1};
use serde::{Deserialize, Serialize};

use crate::linalg;
use crate::penalty::{PenaltyKind, PenaltySpec};
use crate::{Error, Result};

/// A symmetric positive semidefinite `p x p` operator `v -> S v`.
pub trait CurvatureOperator: Sync {
    fn dim(&self) -> usize;

    fn apply(&self, v: &[f64], out: &mut [f64]);

    /// Largest eigenvalue, by power iteration on `apply`.
    fn max_eigenvalue(&self) -> f64 {
        power_iteration(self.dim(), |v, out| self.apply(v, out))
    }
}

impl CurvatureOperator for Array2<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(self.outer_iter()) {
            *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }
}

/// Sample covariance kept in factored form `X_c' X_c / (n - 1)`, so that a
/// product costs `O(n p)` instead of `O(p^2)`.
#[derive(Debug, Clone)]
pub struct SampleCovariance {
    centered: Array2<f64>,
    means: Array1<f64>,
}

impl SampleCovariance {
    /// Builds the operator from observations (rows). Needs at least two rows.
    pub fn from_rows(x: ArrayView2<f64>) -> Result<Self> {
        if x.nrows() < 2 {
            return Err(Error::InvalidParameter(
                "sample covariance needs at least two observations".into(),
            ));
        }
        let means = linalg::column_means(x);
        let centered = linalg::center(x);
        Ok(Self {
            centered,
            means,
        })
    }

    pub fn means(&self) -> ArrayView1<'_, f64> {
        self.means.view()
    }

    pub fn n(&self) -> usize {
        self.centered.nrows()
    }

    fn denom(&self) -> f64 {
        self.n() as f64 - 1.0
    }

    pub fn to_dense(&self) -> Array2<f64> {
        self.centered.t().dot(&self.centered) / self.denom()
    }

    pub fn diagonal(&self) -> Array1<f64> {
        self.centered
            .columns()
            .into_iter()
            .map(|c| c.iter().map(|v| v * v).sum::<f64>() / self.denom())
            .collect()
    }
}

impl CurvatureOperator for SampleCovariance {
    fn dim(&self) -> usize {
        self.centered.ncols()
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        let t = self.centered.dot(&ArrayView1::from(v)) / self.denom();
        let mut out = ArrayViewMut1::from(out);
        ndarray::linalg::general_mat_vec_mul(1.0, &self.centered.t(), &t, 0.0, &mut out);
    }

    fn max_eigenvalue(&self) -> f64 {
        let (n, p) = self.centered.dim();
        if n < p {
            // nonzero spectrum of X'X equals that of XX'
            let gram = self.centered.dot(&self.centered.t()) / self.denom();
            gram.max_eigenvalue()
        } else {
            power_iteration(p, |v, out| self.apply(v, out))
        }
    }
}

const POWER_MAX_ITER: usize = 200;
const POWER_REL_TOL: f64 = 1e-8;

fn power_iteration(dim: usize, apply: impl Fn(&[f64], &mut [f64])) -> f64 {
    if dim == 0 {
        return 0.0;
    }
    // fixed, non-degenerate start so estimates are reproducible
    let mut v: Vec<f64> = (0..dim).map(|i| 1.0 + 0.5 * ((i as f64) * 0.7).sin()).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    let mut w = vec![0.0; dim];
    let mut estimate = 0.0;
    for _ in 0..POWER_MAX_ITER {
        apply(&v, &mut w);
        let rayleigh: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let next = rayleigh.max(0.0);
        let done = (next - estimate).abs() <= POWER_REL_TOL * next;
        estimate = next;
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / norm;
        }
        if done {
            break;
        }
    }
    estimate
}

/// Power-iteration estimate of the gradient Lipschitz constant, inflated by
/// 1% so that `1 / L` is a safe step.
pub fn lipschitz_estimate(sigma: ArrayView2<f64>) -> Result<f64> {
    linalg::check_symmetric(sigma, 1e-10)?;
    Ok(lipschitz_of(&sigma.to_owned()))
}

pub fn lipschitz_of<S: CurvatureOperator + ?Sized>(op: &S) -> f64 {
    1.01 * op.max_eigenvalue()
}

/// `lambda = c0 sqrt(ln p / n1)`.
pub fn default_lambda(n1: usize, p: usize, c0: f64) -> Result<f64> {
    if n1 < 2 {
        return Err(Error::InvalidParameter(format!(
            "direction-estimation sample needs n1 >= 2, got {n1}"
        )));
    }
    if p == 0 {
        return Err(Error::InvalidParameter("dimension p must be positive".into()));
    }
    lambda_rate(n1 as f64, p as f64, c0)
}

/// Real-valued form of [`default_lambda`].
pub fn lambda_rate(n1: f64, p: f64, c0: f64) -> Result<f64> {
    if !(c0 > 0.0) || !c0.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "rate constant c0 must be positive, got {c0}"
        )));
    }
    if !(n1 > 0.0) || !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "invalid sizes n1 = {n1}, p = {p}"
        )));
    }
    Ok(c0 * (p.ln() / n1).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum StepRule {
    /// `eta = 1 / L` with `L` from [`lipschitz_of`].
    #[default]
    FixedInverseLipschitz,
    /// Armijo-type backtracking on the quadratic upper bound.
    Backtracking,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LambdaRule {
    /// `c0 sqrt(ln p / n1)`.
    RateFormula { c0: f64 },
    Explicit(f64),
    /// K-fold cross-validation of the unpenalized quadratic loss over a grid.
    Grid { values: Vec<f64>, folds: usize },
}

impl Default for LambdaRule {
    fn default() -> Self {
        Self::RateFormula { c0: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub max_iterations: usize,
    pub stationarity_tolerance: f64,
    pub step_rule: StepRule,
    pub lambda_rule: LambdaRule,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 5_000,
            stationarity_tolerance: 1e-6,
            step_rule: StepRule::default(),
            lambda_rule: LambdaRule::default(),
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be >= 1".into()));
        }
        if !(self.stationarity_tolerance > 0.0) {
            return Err(Error::InvalidParameter(
                "stationarity tolerance must be positive".into(),
            ));
        }
        match &self.lambda_rule {
            LambdaRule::RateFormula { c0 } if !(*c0 > 0.0) => Err(Error::InvalidParameter(
                format!("rate constant c0 must be positive, got {c0}"),
            )),
            LambdaRule::Explicit(l) if !(*l >= 0.0) => Err(Error::InvalidParameter(format!(
                "explicit lambda must be nonnegative, got {l}"
            ))),
            LambdaRule::Grid { values, folds } if values.is_empty() || *folds < 2 => {
                Err(Error::InvalidParameter(
                    "lambda grid must be nonempty with at least 2 folds".into(),
                ))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionEstimate {
    pub w_hat: Vec<f64>,
    pub iterations_used: usize,
    pub stationarity_residual: f64,
    pub objective: f64,
    pub converged: bool,
    pub lambda: f64,
    /// Set when `gamma >= lambda_max(S)`, a sign the penalized problem may
    /// lack curvature.
    pub curvature_warning: bool,
}

impl DirectionEstimate {
    pub fn nonzeros(&self) -> usize {
        self.w_hat.iter().filter(|&&v| v != 0.0).count()
    }

    pub fn is_zero(&self) -> bool {
        self.w_hat.iter().all(|&v| v == 0.0)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn smooth_objective(w: &[f64], sw: &[f64], xbar: &[f64]) -> f64 {
    0.5 * dot(w, sw) - dot(xbar, w)
}

fn residual_from_gradient(w: &[f64], grad: &[f64], penalty: &PenaltySpec) -> f64 {
    w.iter()
        .zip(grad)
        .map(|(&wj, &gj)| penalty.subgradient(wj).distance(-gj))
        .fold(0.0, f64::max)
}

/// Max over coordinates of the distance from `-(S w - xbar)_j` to the
/// subdifferential of the penalty at `w_j`.
pub fn stationarity_residual<S: CurvatureOperator + ?Sized>(
    w: ArrayView1<f64>,
    sigma: &S,
    xbar: ArrayView1<f64>,
    penalty: &PenaltySpec,
) -> Result<f64> {
    let p = sigma.dim();
    if w.len() != p || xbar.len() != p {
        return Err(Error::DimensionMismatch(format!(
            "operator has dimension {p}, w has {}, xbar has {}",
            w.len(),
            xbar.len()
        )));
    }
    let w = w.to_vec();
    let mut grad = vec![0.0; p];
    sigma.apply(&w, &mut grad);
    for (g, x) in grad.iter_mut().zip(xbar.iter()) {
        *g -= x;
    }
    Ok(residual_from_gradient(&w, &grad, penalty))
}

const DIVERGENCE_STREAK: usize = 10;

/// Runs composite gradient descent from `w = 0`.
pub fn estimate_direction<S: CurvatureOperator + ?Sized>(
    sigma: &S,
    xbar: ArrayView1<f64>,
    penalty: &PenaltySpec,
    opts: &SolverOptions,
) -> Result<DirectionEstimate> {
    opts.validate()?;
    let p = sigma.dim();
    if xbar.len() != p {
        return Err(Error::DimensionMismatch(format!(
            "operator has dimension {p}, xbar has {}",
            xbar.len()
        )));
    }
    if xbar.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("mean vector".into()));
    }
    let xbar = xbar.to_vec();

    let lmax = sigma.max_eigenvalue();
    if !lmax.is_finite() {
        return Err(Error::NonFinite("curvature operator".into()));
    }
    let lipschitz = 1.01 * lmax;
    let gamma = penalty.gamma();
    let curvature_warning = gamma > 0.0 && gamma >= lmax;
    if curvature_warning {
        log::warn!(
            "penalty weak-convexity {gamma:.4} exceeds the largest sample-covariance eigenvalue {lmax:.4}"
        );
    }
    // backtracking starts from a unit step and only ever shrinks it
    let mut eta = match opts.step_rule {
        StepRule::FixedInverseLipschitz if lipschitz > 0.0 => 1.0 / lipschitz,
        _ => 1.0,
    };

    let mut w = vec![0.0; p];
    let mut sw = vec![0.0; p];
    let mut grad: Vec<f64> = xbar.iter().map(|x| -x).collect();
    let mut objective = 0.0_f64;
    let mut residual = residual_from_gradient(&w, &grad, penalty);
    let mut iterations = 0;
    let mut increases = 0;

    let mut w_next = vec![0.0; p];
    let mut sw_next = vec![0.0; p];
    while residual > opts.stationarity_tolerance && iterations < opts.max_iterations {
        iterations += 1;
        let smooth = smooth_objective(&w, &sw, &xbar);
        let next_objective = loop {
            for j in 0..p {
                w_next[j] = penalty.prox_unchecked(w[j] - eta * grad[j], eta);
            }
            sigma.apply(&w_next, &mut sw_next);
            let smooth_next = smooth_objective(&w_next, &sw_next, &xbar);
            if opts.step_rule == StepRule::FixedInverseLipschitz {
                break smooth_next + penalty.total(&w_next);
            }
            let mut linear = 0.0;
            let mut dist2 = 0.0;
            for j in 0..p {
                let d = w_next[j] - w[j];
                linear += grad[j] * d;
                dist2 += d * d;
            }
            let bound = smooth + linear + dist2 / (2.0 * eta);
            if smooth_next <= bound + 1e-12 * (1.0 + bound.abs()) || eta < 1e-12 {
                break smooth_next + penalty.total(&w_next);
            }
            eta *= 0.5;
        };
        if !next_objective.is_finite() {
            return Err(Error::Divergence { iterations });
        }
        if opts.step_rule == StepRule::FixedInverseLipschitz {
            debug_assert!(
                next_objective <= objective + 1e-9 * (1.0 + objective.abs()),
                "objective increased from {objective} to {next_objective}"
            );
        }
        if next_objective > objective + 1e-12 * (1.0 + objective.abs()) {
            increases += 1;
            if increases >= DIVERGENCE_STREAK {
                return Err(Error::Divergence { iterations });
            }
        } else {
            increases = 0;
        }
        std::mem::swap(&mut w, &mut w_next);
        std::mem::swap(&mut sw, &mut sw_next);
        objective = next_objective;
        for j in 0..p {
            grad[j] = sw[j] - xbar[j];
        }
        residual = residual_from_gradient(&w, &grad, penalty);
    }

    Ok(DirectionEstimate {
        converged: residual <= opts.stationarity_tolerance,
        w_hat: w,
        iterations_used: iterations,
        stationarity_residual: residual,
        objective,
        lambda: penalty.lambda,
        curvature_warning,
    })
}

/// Resolves the penalty level for a direction-estimation sample `d1`.
pub fn resolve_lambda(
    rule: &LambdaRule,
    d1: ArrayView2<f64>,
    kind: PenaltyKind,
    opts: &SolverOptions,
) -> Result<f64> {
    let (n1, p) = d1.dim();
    match rule {
        LambdaRule::RateFormula { c0 } => default_lambda(n1, p, *c0),
        LambdaRule::Explicit(l) => {
            if !(*l >= 0.0) || !l.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "explicit lambda must be finite and nonnegative, got {l}"
                )));
            }
            Ok(*l)
        }
        LambdaRule::Grid { values, folds } => cross_validate_lambda(d1, values, *folds, kind, opts),
    }
}

/// K-fold cross-validation over contiguous row blocks. Picks the grid value
/// with the smallest mean held-out loss `1/2 w' S_test w - xbar_test' w`;
/// ties go to the larger lambda.
pub fn cross_validate_lambda(
    d1: ArrayView2<f64>,
    values: &[f64],
    folds: usize,
    kind: PenaltyKind,
    opts: &SolverOptions,
) -> Result<f64> {
    let n = d1.nrows();
    if values.is_empty() || folds < 2 {
        return Err(Error::InvalidParameter(
            "lambda grid must be nonempty with at least 2 folds".into(),
        ));
    }
    if n < 2 * folds + 2 {
        return Err(Error::InvalidParameter(format!(
            "{folds}-fold cross-validation needs at least {} observations, got {n}",
            2 * folds + 2
        )));
    }
    let inner = SolverOptions {
        lambda_rule: LambdaRule::Explicit(0.0),
        ..opts.clone()
    };
    let bounds: Vec<(usize, usize)> = (0..folds)
        .map(|k| (k * n / folds, (k + 1) * n / folds))
        .collect();
    let mut best: Option<(f64, f64)> = None;
    for &lambda in values {
        let penalty = PenaltySpec::new(kind, lambda)?;
        let mut loss = 0.0;
        for &(lo, hi) in &bounds {
            let train_rows: Vec<usize> = (0..n).filter(|i| *i < lo || *i >= hi).collect();
            let train = d1.select(ndarray::Axis(0), &train_rows);
            let test = d1.slice(ndarray::s![lo..hi, ..]);
            let s_train = SampleCovariance::from_rows(train.view())?;
            let est = estimate_direction(&s_train, s_train.means(), &penalty, &inner)?;
            let s_test = SampleCovariance::from_rows(test)?;
            let mut sw = vec![0.0; est.w_hat.len()];
            s_test.apply(&est.w_hat, &mut sw);
            loss += smooth_objective(&est.w_hat, &sw, s_test.means().as_slice().unwrap());
        }
        loss /= folds as f64;
        let better = match best {
            None => true,
            Some((l, b)) => loss < l - 1e-12 * (1.0 + l.abs()) || ((loss - l).abs() <= 1e-12 * (1.0 + l.abs()) && lambda > b),
        };
        if better {
            best = Some((loss, lambda));
        }
    }
    Ok(best.expect("grid is nonempty").1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn strict() -> SolverOptions {
        SolverOptions {
            max_iterations: 100_000,
            stationarity_tolerance: 1e-10,
            ..SolverOptions::default()
        }
    }

    #[test]
    fn lambda_rate_values() {
        let e = std::f64::consts::E;
        assert_abs_diff_eq!(lambda_rate(e * e, e, 1.0).unwrap(), 1.0 / e, epsilon = 1e-12);
        assert_abs_diff_eq!(default_lambda(100, 100, 1.0).unwrap(), 0.214_596_7, epsilon = 1e-6);
        assert!(default_lambda(100, 100, 0.0).is_err());
        assert!(default_lambda(1, 100, 1.0).is_err());
    }

    #[test]
    fn lipschitz_values() {
        let l = lipschitz_estimate(Array2::<f64>::eye(3).view()).unwrap();
        assert_abs_diff_eq!(l, 1.01, epsilon = 1e-6);
        let l = lipschitz_estimate(array![[1.0, 0.0], [0.0, 4.0]].view()).unwrap();
        assert_abs_diff_eq!(l, 4.04, epsilon = 1e-4);
        let cs = crate::build_covariance(&crate::CovarianceSpec::compound_symmetry(0.5), 10).unwrap();
        assert_abs_diff_eq!(lipschitz_estimate(cs.view()).unwrap(), 1.01 * 5.5, epsilon = 1e-4);
        assert!(lipschitz_estimate(array![[1.0, 0.5], [0.0, 1.0]].view()).is_err());
    }

    #[test]
    fn factored_covariance_matches_dense() {
        let x = array![
            [1.0, 2.0, 0.5, -1.0],
            [0.3, -0.2, 1.5, 2.0],
            [-1.0, 0.7, 0.1, 0.4]
        ];
        let s = SampleCovariance::from_rows(x.view()).unwrap();
        let dense = linalg::sample_covariance(x.view());
        let v = [0.2, -1.0, 0.5, 0.3];
        let (mut a, mut b) = ([0.0; 4], [0.0; 4]);
        s.apply(&v, &mut a);
        dense.apply(&v, &mut b);
        for (u, w) in a.iter().zip(&b) {
            assert_abs_diff_eq!(u, w, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(s.max_eigenvalue(), dense.max_eigenvalue(), epsilon = 1e-8);
        for (d, e) in s.diagonal().iter().zip(dense.diag().iter()) {
            assert_abs_diff_eq!(d, e, epsilon = 1e-12);
        }
    }

    #[test]
    fn scalar_soft_threshold_solutions() {
        let s = array![[1.0]];
        let pen = PenaltySpec::lasso(0.5).unwrap();
        let est = estimate_direction(&s, array![1.0].view(), &pen, &strict()).unwrap();
        assert_abs_diff_eq!(est.w_hat[0], 0.5, epsilon = 1e-9);
        assert!(est.converged);
        let r = stationarity_residual(array![est.w_hat[0]].view(), &s, array![1.0].view(), &pen)
            .unwrap();
        assert!(r <= 1e-10);

        let est = estimate_direction(&s, array![0.3].view(), &pen, &strict()).unwrap();
        assert_eq!(est.w_hat, vec![0.0]);
    }

    #[test]
    fn origin_is_stationary_for_null_data() {
        let s = array![[2.0, 0.3], [0.3, 1.0]];
        let pen = PenaltySpec::lasso(0.1).unwrap();
        let r = stationarity_residual(array![0.0, 0.0].view(), &s, array![0.0, 0.0].view(), &pen)
            .unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn random_point_is_not_stationary() {
        let s = array![[1.0, 0.3], [0.3, 1.0]];
        let xbar = array![1.0, 0.2];
        let pen = PenaltySpec::lasso(0.2).unwrap();
        let r = stationarity_residual(array![0.37, -0.81].view(), &s, xbar.view(), &pen).unwrap();
        // gradient (-0.873, -0.899); coordinate 2 has -g = 0.899 vs derivative -0.2
        assert_abs_diff_eq!(r, 1.099, epsilon = 1e-12);
    }

    #[test]
    fn backtracking_agrees_with_fixed_step() {
        let s = array![[1.0, 0.3, 0.1], [0.3, 2.0, -0.2], [0.1, -0.2, 0.5]];
        let xbar = array![1.0, -0.4, 0.3];
        for pen in [
            PenaltySpec::lasso(0.1).unwrap(),
            PenaltySpec::scad(0.1, 3.7).unwrap(),
            PenaltySpec::mcp(0.1, 3.0).unwrap(),
        ] {
            let fixed = estimate_direction(&s, xbar.view(), &pen, &strict()).unwrap();
            let bt = estimate_direction(
                &s,
                xbar.view(),
                &pen,
                &SolverOptions {
                    step_rule: StepRule::Backtracking,
                    ..strict()
                },
            )
            .unwrap();
            assert!(fixed.converged && bt.converged, "{pen:?} {fixed:?} {bt:?}");
            for (a, b) in fixed.w_hat.iter().zip(&bt.w_hat) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn iteration_cap_reports_nonconvergence() {
        let s = array![[1.0, 0.99], [0.99, 1.0]];
        let xbar = array![1.0, -1.0];
        let pen = PenaltySpec::lasso(0.01).unwrap();
        let opts = SolverOptions {
            max_iterations: 3,
            ..SolverOptions::default()
        };
        let est = estimate_direction(&s, xbar.view(), &pen, &opts).unwrap();
        assert!(!est.converged);
        assert_eq!(est.iterations_used, 3);
        assert!(est.stationarity_residual > opts.stationarity_tolerance);
    }

    #[test]
    fn input_validation() {
        let s = array![[1.0]];
        let pen = PenaltySpec::lasso(0.1).unwrap();
        let opts = SolverOptions::default();
        assert!(estimate_direction(&s, array![f64::NAN].view(), &pen, &opts).is_err());
        assert!(estimate_direction(&s, array![1.0, 2.0].view(), &pen, &opts).is_err());
        let bad = SolverOptions {
            max_iterations: 0,
            ..SolverOptions::default()
        };
        assert!(estimate_direction(&s, array![1.0].view(), &pen, &bad).is_err());
    }

    #[test]
    fn curvature_warning_flag() {
        let s = array![[0.1]];
        let pen = PenaltySpec::mcp(0.1, 3.0).unwrap();
        let est = estimate_direction(&s, array![0.05].view(), &pen, &SolverOptions::default())
            .unwrap();
        assert!(est.curvature_warning);
    }

    #[test]
    fn cross_validation_picks_from_grid() {
        let x = Array2::from_shape_fn((30, 4), |(i, j)| {
            ((i * 7 + j * 3) as f64 * 0.61).sin() + if j == 0 { 1.0 } else { 0.0 }
        });
        let grid = vec![0.01, 0.1, 0.5, 2.0];
        let lam = cross_validate_lambda(x.view(), &grid, 5, PenaltyKind::Lasso, &SolverOptions::default())
            .unwrap();
        assert!(grid.contains(&lam));
        assert!(cross_validate_lambda(x.view(), &grid, 20, PenaltyKind::Lasso, &SolverOptions::default()).is_err());
    }
}
