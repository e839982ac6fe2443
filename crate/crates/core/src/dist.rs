//! Thin wrappers over `statrs` for the reference distributions used by the
//! tests. Upper tails go through `sf` so small p-values keep their precision.

use statrs::distribution::{ChiSquared, ContinuousCDF, FisherSnedecor, Normal, StudentsT};

fn std_normal() -> Normal {
    Normal::standard()
}

pub fn normal_cdf(x: f64) -> f64 {
    std_normal().cdf(x)
}

pub fn normal_sf(x: f64) -> f64 {
    std_normal().sf(x)
}

/// Standard normal quantile, `p` in `[0, 1]`.
///
/// The `statrs` inverse is polished with one Halley step against the cdf,
/// which brings the round trip `Phi(Phi^{-1}(p))` to machine precision.
pub fn normal_quantile(p: f64) -> f64 {
    let x = std_normal().inverse_cdf(p);
    if !x.is_finite() {
        return x;
    }
    // work in the smaller tail for accuracy
    let err = if p < 0.5 {
        normal_cdf(x) - p
    } else {
        (1.0 - p) - normal_sf(x)
    };
    let density = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    if density == 0.0 {
        return x;
    }
    let u = err / density;
    x - u / (1.0 + 0.5 * x * u)
}

/// Upper `q` quantile of N(0, 1), i.e. `z` with `P(Z > z) = q`.
pub fn normal_upper_quantile(q: f64) -> f64 {
    -normal_quantile(q)
}

/// Two-sided normal p-value `2 (1 - Phi(|t|))`.
pub fn normal_two_sided(t: f64) -> f64 {
    (2.0 * normal_sf(t.abs())).min(1.0)
}

/// Two-sided Student-t p-value with `df` degrees of freedom.
pub fn student_two_sided(t: f64, df: f64) -> f64 {
    let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
    (2.0 * dist.sf(t.abs())).min(1.0)
}

pub fn chi_squared_quantile(p: f64, df: f64) -> f64 {
    ChiSquared::new(df).expect("df > 0").inverse_cdf(p)
}

pub fn chi_squared_sf(x: f64, df: f64) -> f64 {
    ChiSquared::new(df).expect("df > 0").sf(x)
}

pub fn f_sf(x: f64, df1: f64, df2: f64) -> f64 {
    FisherSnedecor::new(df1, df2).expect("df > 0").sf(x)
}

/// Upper `alpha` quantile of the standard Cauchy distribution.
pub fn cauchy_upper_quantile(alpha: f64) -> f64 {
    (std::f64::consts::PI * (0.5 - alpha)).tan()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn normal_quantile_known_values() {
        assert_abs_diff_eq!(normal_upper_quantile(0.025), 1.959964, epsilon = 1e-6);
        assert_abs_diff_eq!(normal_quantile(0.5), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(normal_two_sided(1.959964), 0.05, epsilon = 1e-6);
    }

    #[test]
    fn chi_squared_quantile_matches_table() {
        // chi2(1) 25% point and chi2(10) 95% point
        assert_abs_diff_eq!(chi_squared_quantile(0.25, 1.0), 0.1015, epsilon = 1e-4);
        assert_abs_diff_eq!(chi_squared_quantile(0.95, 10.0), 18.307, epsilon = 1e-3);
    }

    #[test]
    fn cauchy_quantile() {
        assert_abs_diff_eq!(cauchy_upper_quantile(0.05), 6.313752, epsilon = 1e-6);
    }
}
