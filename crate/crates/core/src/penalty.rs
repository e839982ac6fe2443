//! Sparsity-inducing penalties: Lasso, SCAD and MCP.
//!
//! Each penalty `P(t)` is symmetric with `P(0) = 0`, nondecreasing on
//! `[0, inf)`, has right derivative `lambda` at zero, and becomes convex after
//! adding `gamma t^2 / 2`, where `gamma` is [`PenaltySpec::gamma`].

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const DEFAULT_SCAD_A: f64 = 3.7;
pub const DEFAULT_MCP_B: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PenaltyKind {
    Lasso,
    Scad { a: f64 },
    Mcp { b: f64 },
}

impl PenaltyKind {
    pub fn scad() -> Self {
        Self::Scad { a: DEFAULT_SCAD_A }
    }

    pub fn mcp() -> Self {
        Self::Mcp { b: DEFAULT_MCP_B }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Lasso => "lasso",
            Self::Scad { .. } => "scad",
            Self::Mcp { .. } => "mcp",
        }
    }

    pub fn with_lambda(self, lambda: f64) -> Result<PenaltySpec> {
        PenaltySpec::new(self, lambda)
    }
}

/// Closed interval `[lo, hi]`; a singleton when `lo == hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    pub fn distance(&self, x: f64) -> f64 {
        if x < self.lo {
            self.lo - x
        } else if x > self.hi {
            x - self.hi
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltySpec {
    pub kind: PenaltyKind,
    pub lambda: f64,
}

impl PenaltySpec {
    pub fn new(kind: PenaltyKind, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "penalty level must be finite and nonnegative, got {lambda}"
            )));
        }
        match kind {
            PenaltyKind::Scad { a } if !(a > 2.0) => Err(Error::InvalidParameter(format!(
                "SCAD requires a > 2, got {a}"
            ))),
            PenaltyKind::Mcp { b } if !(b > 1.0) => Err(Error::InvalidParameter(format!(
                "MCP requires b > 1, got {b}"
            ))),
            _ => Ok(Self { kind, lambda }),
        }
    }

    pub fn lasso(lambda: f64) -> Result<Self> {
        Self::new(PenaltyKind::Lasso, lambda)
    }

    pub fn scad(lambda: f64, a: f64) -> Result<Self> {
        Self::new(PenaltyKind::Scad { a }, lambda)
    }

    pub fn mcp(lambda: f64, b: f64) -> Result<Self> {
        Self::new(PenaltyKind::Mcp { b }, lambda)
    }

    pub fn value(&self, t: f64) -> f64 {
        let lam = self.lambda;
        let x = t.abs();
        match self.kind {
            PenaltyKind::Lasso => lam * x,
            PenaltyKind::Scad { a } => {
                if x <= lam {
                    lam * x
                } else if x <= a * lam {
                    // saturation minus a quadratic gap: hits the plateau exactly
                    let gap = a * lam - x;
                    (a + 1.0) * lam * lam / 2.0 - gap * gap / (2.0 * (a - 1.0))
                } else {
                    (a + 1.0) * lam * lam / 2.0
                }
            }
            PenaltyKind::Mcp { b } => {
                if x <= b * lam {
                    lam * x - x * x / (2.0 * b)
                } else {
                    b * lam * lam / 2.0
                }
            }
        }
    }

    /// Sum of the penalty over the coordinates of `w`.
    pub fn total(&self, w: &[f64]) -> f64 {
        w.iter().map(|&t| self.value(t)).sum()
    }

    /// `P'(x)` for `x > 0`.
    fn derivative_positive(&self, x: f64) -> f64 {
        let lam = self.lambda;
        match self.kind {
            PenaltyKind::Lasso => lam,
            PenaltyKind::Scad { a } => {
                if x <= lam {
                    lam
                } else if x <= a * lam {
                    (a * lam - x) / (a - 1.0)
                } else {
                    0.0
                }
            }
            PenaltyKind::Mcp { b } => (lam - x / b).max(0.0),
        }
    }

    /// Subdifferential (Clarke, for the nonconvex families) at `t`.
    pub fn subgradient(&self, t: f64) -> Interval {
        if t == 0.0 {
            Interval {
                lo: -self.lambda,
                hi: self.lambda,
            }
        } else {
            Interval::point(t.signum() * self.derivative_positive(t.abs()))
        }
    }

    /// Weak-convexity constant: `P(t) + gamma t^2 / 2` is convex.
    pub fn gamma(&self) -> f64 {
        match self.kind {
            PenaltyKind::Lasso => 0.0,
            PenaltyKind::Scad { a } => 1.0 / (a - 1.0),
            PenaltyKind::Mcp { b } => 1.0 / b,
        }
    }

    /// Proximal map `argmin_u (u - t)^2 / 2 + eta P(u)`.
    ///
    /// When `eta * gamma >= 1` the scalar problem is nonconvex; the minimizer
    /// is then found by comparing the candidates of every quadratic piece and
    /// ties go to the candidate of smaller magnitude.
    pub fn prox(&self, t: f64, eta: f64) -> Result<f64> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "prox step must be positive, got {eta}"
            )));
        }
        Ok(self.prox_unchecked(t, eta))
    }

    pub(crate) fn prox_unchecked(&self, t: f64, eta: f64) -> f64 {
        let lam = self.lambda;
        let x = t.abs();
        let s = t.signum();
        let u = match self.kind {
            PenaltyKind::Lasso => (x - eta * lam).max(0.0),
            PenaltyKind::Scad { a } if eta < a - 1.0 => {
                if x <= lam * (1.0 + eta) {
                    (x - eta * lam).max(0.0)
                } else if x <= a * lam {
                    ((a - 1.0) * x - eta * a * lam) / (a - 1.0 - eta)
                } else {
                    x
                }
            }
            PenaltyKind::Mcp { b } if eta < b => {
                if x <= eta * lam {
                    0.0
                } else if x <= b * lam {
                    (x - eta * lam) / (1.0 - eta / b)
                } else {
                    x
                }
            }
            _ => self.prox_by_candidates(x, eta),
        };
        if u == 0.0 {
            0.0
        } else {
            s * u
        }
    }

    /// Exact prox for `t = x >= 0` by enumerating piecewise minimizers.
    fn prox_by_candidates(&self, x: f64, eta: f64) -> f64 {
        let lam = self.lambda;
        let objective = |u: f64| 0.5 * (u - x).powi(2) + eta * self.value(u);
        // (lo, hi, curvature, stationary point) per piece
        let mut candidates = vec![0.0];
        let mut piece = |lo: f64, hi: f64, curvature: f64, stationary: f64| {
            candidates.push(lo);
            if hi.is_finite() {
                candidates.push(hi);
            }
            if curvature > 0.0 {
                candidates.push(stationary.clamp(lo, hi));
            }
        };
        match self.kind {
            PenaltyKind::Lasso => piece(0.0, f64::INFINITY, 1.0, x - eta * lam),
            PenaltyKind::Scad { a } => {
                piece(0.0, lam, 1.0, x - eta * lam);
                let c = 1.0 - eta / (a - 1.0);
                piece(lam, a * lam, c, ((a - 1.0) * x - eta * a * lam) / (a - 1.0 - eta));
                piece(a * lam, f64::INFINITY, 1.0, x);
            }
            PenaltyKind::Mcp { b } => {
                let c = 1.0 - eta / b;
                piece(0.0, b * lam, c, (x - eta * lam) / c);
                piece(b * lam, f64::INFINITY, 1.0, x);
            }
        }
        let mut best = (f64::INFINITY, f64::INFINITY);
        for u in candidates.into_iter().filter(|u| u.is_finite()) {
            let f = objective(u);
            let tie = (f - best.0).abs() <= 1e-14 * (1.0 + best.0.abs());
            if (tie && u < best.1) || (!tie && f < best.0) {
                best = (f, u);
            }
        }
        best.1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn families(lambda: f64) -> Vec<PenaltySpec> {
        vec![
            PenaltySpec::lasso(lambda).unwrap(),
            PenaltySpec::scad(lambda, DEFAULT_SCAD_A).unwrap(),
            PenaltySpec::mcp(lambda, DEFAULT_MCP_B).unwrap(),
        ]
    }

    fn grid() -> impl Iterator<Item = f64> {
        (-10_000..=10_000).map(|i| i as f64 * 1e-3)
    }

    #[test]
    fn lasso_values() {
        let p = PenaltySpec::lasso(0.5).unwrap();
        assert_eq!(p.value(0.0), 0.0);
        assert_eq!(p.value(2.0), 1.0);
        assert_eq!(p.subgradient(0.0), Interval { lo: -0.5, hi: 0.5 });
        assert_eq!(p.subgradient(3.0), Interval::point(0.5));
    }

    #[test]
    fn scad_saturation_matches_integrated_derivative() {
        let p = PenaltySpec::scad(1.0, 3.7).unwrap();
        assert_abs_diff_eq!(p.value(10.0), 2.35, epsilon = 1e-12);
        // trapezoid integration of P' over [0, 10]
        let h = 1e-5;
        let steps = (10.0 / h) as usize;
        let mut integral = 0.0;
        for i in 0..steps {
            let (x0, x1) = (i as f64 * h, (i + 1) as f64 * h);
            let d0 = if i == 0 { 1.0 } else { p.derivative_positive(x0) };
            integral += 0.5 * h * (d0 + p.derivative_positive(x1));
        }
        assert_abs_diff_eq!(integral, 2.35, epsilon = 1e-6);
    }

    #[test]
    fn mcp_derivative_matches_finite_difference() {
        let p = PenaltySpec::mcp(1.0, 3.0).unwrap();
        let g = p.subgradient(1.0);
        assert_abs_diff_eq!(g.lo, 2.0 / 3.0, epsilon = 1e-15);
        let h = 1e-6;
        let fd = (p.value(1.0 + h) - p.value(1.0 - h)) / (2.0 * h);
        assert_abs_diff_eq!(fd, g.lo, epsilon = 1e-8);
    }

    #[test]
    fn gamma_values() {
        assert_eq!(PenaltySpec::lasso(1.0).unwrap().gamma(), 0.0);
        assert_abs_diff_eq!(PenaltySpec::scad(1.0, 3.7).unwrap().gamma(), 1.0 / 2.7);
        assert_abs_diff_eq!(PenaltySpec::mcp(1.0, 3.0).unwrap().gamma(), 1.0 / 3.0);
    }

    #[test]
    fn gamma_is_tight_second_difference() {
        // with gamma the second difference is >= 0; with 0.9 gamma it is not
        let h = 1e-3;
        for p in families(1.0).into_iter().skip(1) {
            let g = p.gamma();
            let second = |gam: f64, t: f64| {
                let f = |x: f64| p.value(x) + 0.5 * gam * x * x;
                f(t + h) - 2.0 * f(t) + f(t - h)
            };
            assert!(grid().all(|t| second(g, t) >= -1e-8));
            assert!(grid().any(|t| second(0.9 * g, t) < -1e-8));
        }
    }

    #[test]
    fn penalty_conditions_on_grid() {
        let h = 1e-3;
        for lambda in [0.1, 1.0] {
            for p in families(lambda) {
                assert_eq!(p.value(0.0), 0.0);
                let g = p.gamma();
                let mut prev = 0.0;
                let mut prev_ratio = f64::INFINITY;
                for t in grid() {
                    assert_eq!(p.value(t), p.value(-t), "symmetry {p:?} at {t}");
                    if t > 0.0 {
                        let v = p.value(t);
                        assert!(v >= prev - 1e-15, "monotone {p:?} at {t}");
                        let ratio = v / t;
                        assert!(ratio <= prev_ratio + 1e-12, "ratio {p:?} at {t}");
                        prev = v;
                        prev_ratio = ratio;
                    }
                    let f = |x: f64| p.value(x) + 0.5 * g * x * x;
                    assert!(f(t + h) - 2.0 * f(t) + f(t - h) >= -1e-8, "convexity {p:?} at {t}");
                    let t2 = t + 0.731;
                    assert!((p.value(t) - p.value(t2)).abs() <= lambda * (t - t2).abs() + 1e-12);
                }
            }
        }
    }

    #[test]
    fn lasso_prox_soft_thresholds() {
        let p = PenaltySpec::lasso(1.0).unwrap();
        assert_eq!(p.prox(0.5, 1.0).unwrap(), 0.0);
        assert_eq!(p.prox(3.0, 1.0).unwrap(), 2.0);
        assert_eq!(p.prox(-3.0, 1.0).unwrap(), -2.0);
        assert!(p.prox(1.0, 0.0).is_err());
    }

    fn grid_argmin(p: &PenaltySpec, t: f64, eta: f64) -> (f64, f64) {
        let obj = |u: f64| 0.5 * (u - t).powi(2) + eta * p.value(u);
        (-100_000..=100_000)
            .map(|i| i as f64 * 1e-4)
            .map(|u| (obj(u), u))
            .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a })
    }

    #[test]
    fn scad_prox_matches_grid_search() {
        let p = PenaltySpec::scad(1.0, 3.7).unwrap();
        let u = p.prox(2.5, 1.0).unwrap();
        let (_, best) = grid_argmin(&p, 2.5, 1.0);
        assert_abs_diff_eq!(u, best, epsilon = 1e-4);
        // ((a - 1) t - a lambda) / (a - 2) = (2.7 * 2.5 - 3.7) / 1.7
        assert_abs_diff_eq!(u, (2.7 * 2.5 - 3.7) / 1.7, epsilon = 1e-12);
    }

    #[test]
    fn prox_beats_grid_in_nonconvex_regime() {
        for p in families(1.0) {
            for eta in [0.5, 2.0, 3.5, 5.0] {
                for t in [-6.0, -2.2, -0.3, 0.0, 0.9, 1.7, 3.1, 4.4, 8.0] {
                    let u = p.prox(t, eta).unwrap();
                    let obj = |u: f64| 0.5 * (u - t).powi(2) + eta * p.value(u);
                    let (best, _) = grid_argmin(&p, t, eta);
                    assert!(obj(u) <= best + 1e-8, "{p:?} eta={eta} t={t}");
                }
            }
        }
    }

    #[test]
    fn nonconvex_tie_prefers_smaller_magnitude() {
        // MCP with eta = b: objective is flat-tied between 0 and the hard threshold.
        let p = PenaltySpec::mcp(1.0, 2.0).unwrap();
        // at eta = 2 the scalar objective on [0, 2] is (u - t)^2/2 + 2u - u^2/2,
        // linear in u with slope 2 - t; at t = 2 every u in [0, 2] ties.
        assert_eq!(p.prox(2.0, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn invalid_specs() {
        assert!(PenaltySpec::lasso(-1.0).is_err());
        assert!(PenaltySpec::scad(1.0, 2.0).is_err());
        assert!(PenaltySpec::mcp(1.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn closed_form_prox_matches_candidate_enumeration(
            t in -20.0f64..20.0,
            eta in 0.01f64..1.5,
            lambda in 0.01f64..3.0,
        ) {
            for p in families(lambda) {
                let closed = p.prox_unchecked(t, eta);
                let enumerated = t.signum() * p.prox_by_candidates(t.abs(), eta);
                prop_assert!((closed - enumerated).abs() <= 1e-9 * (1.0 + t.abs()),
                    "{:?}: {} vs {}", p, closed, enumerated);
            }
        }
    }
}
