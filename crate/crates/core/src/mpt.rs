//! Multiple-splitting projection test (MPT).
//!
//! 1. Draw `m` random permutations of the observations.
//! 2. For each, run the single-split test and keep its p-value `p_k`.
//! 3. Combine via `Z_k = Phi^{-1}(p_k)`, an estimate of their common
//!    correlation, and the standardized mean `M`; reject when `|M|` exceeds
//!    the tabulated critical value.
//!
//! The split p-values are exchangeable, which is what makes a single
//! correlation parameter sufficient. [`exchangeability_probe`] checks the
//! testable consequences of that by simulation.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combine::{
    self, ChiSquareTail, CriticalValue, RhoEstimate, RhoMethod, ZVector,
};
use crate::datagen::{DataMatrix, SeedPolicy};
use crate::optimizer::SolverOptions;
use crate::penalty::PenaltyKind;
use crate::projtest::{self, Reference, SplitOutcome, SplitPlan, SptConfig, ZeroDirection};
use crate::{Error, Result};

pub const DEFAULT_M: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MptConfig {
    pub m: usize,
    pub kappa: f64,
    pub alpha: f64,
    pub penalty: PenaltyKind,
    pub solver: SolverOptions,
    pub reference: Reference,
    pub zero_direction: ZeroDirection,
    pub rho_method: RhoMethod,
    pub chi_square_tail: ChiSquareTail,
    /// Replaces the tabulated critical value; required for `alpha != 0.05`.
    pub critical_override: Option<f64>,
    /// Run the `m` splits on the rayon pool.
    pub parallel: bool,
}

impl Default for MptConfig {
    fn default() -> Self {
        Self {
            m: DEFAULT_M,
            kappa: 0.5,
            alpha: 0.05,
            penalty: PenaltyKind::Lasso,
            solver: SolverOptions::default(),
            reference: Reference::Normal,
            zero_direction: ZeroDirection::default(),
            rho_method: RhoMethod::Quantile,
            chi_square_tail: ChiSquareTail::default(),
            critical_override: None,
            parallel: false,
        }
    }
}

impl MptConfig {
    pub fn split_config(&self) -> SptConfig {
        SptConfig {
            kappa: self.kappa,
            penalty: self.penalty,
            solver: self.solver.clone(),
            reference: self.reference,
            zero_direction: self.zero_direction,
            alpha: None,
        }
    }
}

/// Outcome of the combination step alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MptDecision {
    pub z: ZVector,
    pub rho_hat: RhoEstimate,
    pub m_stat: f64,
    pub critical: CriticalValue,
    pub reject: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MptResult {
    pub alpha: f64,
    pub p_values: Vec<f64>,
    pub z: ZVector,
    pub rho_hat: RhoEstimate,
    pub m_stat: f64,
    pub critical: CriticalValue,
    pub reject: bool,
    /// Splits whose solver hit the iteration cap.
    pub nonconverged: usize,
    /// Splits that used the leading-coordinate direction.
    pub fallbacks: usize,
    /// Splits with an identically zero projection.
    pub degenerate: usize,
    pub per_split: Vec<SplitOutcome>,
}

/// `m` independent uniform permutations of `0..n`. Each permutation has its
/// own stream derived from one draw of `rng`, so the first `k` permutations
/// do not depend on `m`.
pub fn generate_permutations<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    rng: &mut R,
) -> Result<Vec<Vec<usize>>> {
    if m < 2 || n < 4 {
        return Err(Error::InvalidParameter(format!(
            "need m >= 2 and n >= 4, got m = {m}, n = {n}"
        )));
    }
    let policy = SeedPolicy::new(rng.random());
    Ok((0..m)
        .map(|k| {
            let mut stream = policy.rng(0, k as u32);
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut stream);
            perm
        })
        .collect())
}

/// Combination step: Z transform, rho estimate, `M`, table decision.
pub fn decide(
    p_values: &[f64],
    method: RhoMethod,
    alpha: f64,
    tail: ChiSquareTail,
    critical_override: Option<f64>,
) -> Result<MptDecision> {
    let z = combine::z_transform(p_values)?;
    let critical =
        combine::critical_value_with_override(method, z.m(), alpha, critical_override)?;
    let rho_hat = match method {
        RhoMethod::Variance => combine::rho_hat1(&z),
        RhoMethod::Quantile => {
            combine::rho_hat2_with(&z, critical.beta.expect("quantile method has beta"), tail)?
        }
    };
    let m_stat = combine::m_statistic(&z, &rho_hat);
    Ok(MptDecision {
        reject: m_stat.abs() > critical.c,
        z,
        rho_hat,
        m_stat,
        critical,
    })
}

fn validate_data(data: &DataMatrix) -> Result<()> {
    if data.n() < 4 {
        return Err(Error::InvalidParameter(format!(
            "need at least 4 observations, got {}",
            data.n()
        )));
    }
    if let Some(j) = data.constant_column() {
        return Err(Error::ZeroVariance(format!("column {j} is constant")));
    }
    Ok(())
}

/// Runs the single-split test on every permutation.
pub fn split_outcomes(
    data: &DataMatrix,
    permutations: &[Vec<usize>],
    config: &MptConfig,
) -> Result<Vec<SplitOutcome>> {
    let spt = config.split_config();
    let run = |perm: &Vec<usize>| -> Result<SplitOutcome> {
        let plan = projtest::make_split(data.n(), config.kappa, perm.clone())?;
        projtest::run_split(data, &plan, &spt)
    };
    if config.parallel {
        permutations.par_iter().map(run).collect()
    } else {
        permutations.iter().map(run).collect()
    }
}

/// MPT on explicit permutations.
pub fn mpt_with_permutations(
    data: &DataMatrix,
    permutations: &[Vec<usize>],
    config: &MptConfig,
) -> Result<MptResult> {
    validate_data(data)?;
    // fail fast on an infeasible split before any solver work
    SplitPlan::identity(data.n(), config.kappa)?;
    let per_split = split_outcomes(data, permutations, config)?;
    let p_values: Vec<f64> = per_split.iter().map(|o| o.p_value).collect();
    let d = decide(
        &p_values,
        config.rho_method,
        config.alpha,
        config.chi_square_tail,
        config.critical_override,
    )?;
    let nonconverged = per_split.iter().filter(|o| !o.converged).count();
    if nonconverged > 0 {
        log::warn!("{nonconverged} of {} splits did not converge", per_split.len());
    }
    Ok(MptResult {
        alpha: config.alpha,
        nonconverged,
        fallbacks: per_split.iter().filter(|o| o.fallback_direction).count(),
        degenerate: per_split.iter().filter(|o| o.degenerate).count(),
        p_values,
        z: d.z,
        rho_hat: d.rho_hat,
        m_stat: d.m_stat,
        critical: d.critical,
        reject: d.reject,
        per_split,
    })
}

/// The multiple-splitting projection test.
pub fn mpt<R: Rng + ?Sized>(data: &DataMatrix, config: &MptConfig, rng: &mut R) -> Result<MptResult> {
    validate_data(data)?;
    let permutations = generate_permutations(data.n(), config.m, rng)?;
    mpt_with_permutations(data, &permutations, config)
}

/// Summary of an exchangeability check over simulated datasets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExchangeabilityReport {
    pub m: usize,
    pub reps: usize,
    /// Two-sample KS statistic for every pair `(i, j)`, `i < j`.
    pub ks_statistics: Vec<(usize, usize, f64)>,
    pub max_ks: f64,
    /// Asymptotic two-sample KS critical value at level 0.01.
    pub ks_critical_01: f64,
    pub correlations: Vec<(usize, usize, f64)>,
    /// `max - min` of the pairwise correlations.
    pub correlation_spread: f64,
    /// Monte Carlo standard error of a difference of two correlations.
    pub correlation_stderr: f64,
}

fn two_sample_ks(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0_f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        0.0
    } else {
        sab / (saa * sbb).sqrt()
    }
}

/// Simulates `reps` datasets with `generate`, maps each to `m` statistics
/// with `statistic`, and measures how far the columns are from being
/// exchangeable: equal marginals (pairwise KS) and equal pairwise
/// correlations.
///
/// Replication `r` uses the stream `SeedPolicy(seed).rng(r, 0)` for both
/// closures.
pub fn exchangeability_probe<G, S>(
    generate: G,
    statistic: S,
    m: usize,
    reps: usize,
    seed: u64,
) -> Result<ExchangeabilityReport>
where
    G: Fn(&mut ChaCha8Rng) -> Result<DataMatrix> + Sync,
    S: Fn(&DataMatrix, &mut ChaCha8Rng) -> Result<Vec<f64>> + Sync,
{
    if m < 3 || reps < 2 {
        return Err(Error::InvalidParameter(format!(
            "probe needs m >= 3 and reps >= 2, got m = {m}, reps = {reps}"
        )));
    }
    let policy = SeedPolicy::new(seed);
    let rows: Vec<Vec<f64>> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = policy.rng(r as u32, 0);
            let data = generate(&mut rng)?;
            let t = statistic(&data, &mut rng)?;
            if t.len() != m {
                return Err(Error::DimensionMismatch(format!(
                    "statistic map returned {} values, expected {m}",
                    t.len()
                )));
            }
            Ok(t)
        })
        .collect::<Result<_>>()?;
    let columns: Vec<Vec<f64>> = (0..m).map(|k| rows.iter().map(|r| r[k]).collect()).collect();

    let mut ks_statistics = Vec::new();
    let mut correlations = Vec::new();
    for i in 0..m {
        for j in (i + 1)..m {
            ks_statistics.push((i, j, two_sample_ks(&columns[i], &columns[j])));
            correlations.push((i, j, correlation(&columns[i], &columns[j])));
        }
    }
    let max_ks = ks_statistics.iter().map(|t| t.2).fold(0.0, f64::max);
    let cmax = correlations.iter().map(|t| t.2).fold(f64::NEG_INFINITY, f64::max);
    let cmin = correlations.iter().map(|t| t.2).fold(f64::INFINITY, f64::min);
    let mean_corr = correlations.iter().map(|t| t.2).sum::<f64>() / correlations.len() as f64;
    let c_alpha = (-(0.005f64).ln() / 2.0).sqrt();
    Ok(ExchangeabilityReport {
        m,
        reps,
        max_ks,
        ks_critical_01: c_alpha * (2.0 / reps as f64).sqrt(),
        correlation_spread: cmax - cmin,
        correlation_stderr: 2.0f64.sqrt() * (1.0 - mean_corr * mean_corr) / (reps as f64).sqrt(),
        ks_statistics,
        correlations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{CovarianceFactor, Distribution};
    use ndarray::{Array1, Array2};
    use rand::SeedableRng;

    fn gaussian(n: usize, p: usize, seed: u64) -> DataMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let factor = CovarianceFactor::Autocorrelation { r: 0.5, p };
        Distribution::Gaussian
            .sample(n, Array1::zeros(p).view(), &factor, &mut rng)
            .unwrap()
    }

    #[test]
    fn permutations_are_bijections_and_reproducible() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let perms = generate_permutations(10, 5, &mut rng).unwrap();
        for p in &perms {
            let mut s = p.clone();
            s.sort();
            assert_eq!(s, (0..10).collect::<Vec<_>>());
        }
        let again = generate_permutations(10, 5, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(perms, again);
        let longer = generate_permutations(10, 8, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(&longer[..5], &perms[..]);
        assert!(generate_permutations(3, 5, &mut rng).is_err());
        assert!(generate_permutations(10, 1, &mut rng).is_err());
    }

    #[test]
    fn first_element_is_uniform() {
        let (n, m) = (6, 10_000);
        let perms = generate_permutations(n, m, &mut ChaCha8Rng::seed_from_u64(99)).unwrap();
        let mut counts = [0usize; 6];
        for p in &perms {
            counts[p[0]] += 1;
        }
        let expected = m as f64 / n as f64;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // chi^2_5 upper 1% point
        assert!(chi2 < 15.086, "{chi2}");
    }

    #[test]
    fn constant_data_is_rejected() {
        let data = DataMatrix::new(Array2::zeros((20, 5))).unwrap();
        let r = mpt(&data, &MptConfig::default(), &mut ChaCha8Rng::seed_from_u64(1));
        assert!(matches!(r, Err(Error::ZeroVariance(_))));
    }

    #[test]
    fn result_is_deterministic_and_consistent() {
        let data = gaussian(40, 30, 5);
        let cfg = MptConfig::default();
        let a = mpt(&data, &cfg, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = mpt(&data, &cfg, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.p_values.len(), 40);
        assert_eq!(a.z.m(), 40);
        assert_eq!(a.reject, a.m_stat.abs() > a.critical.c);
        assert!((0.0..=1.0).contains(&a.rho_hat.value));
        assert!(a.m_stat.is_finite());
        let par = mpt(
            &data,
            &MptConfig {
                parallel: true,
                ..cfg
            },
            &mut ChaCha8Rng::seed_from_u64(3),
        )
        .unwrap();
        assert_eq!(a, par);
    }

    #[test]
    fn decision_invariant_to_split_order() {
        let data = gaussian(40, 20, 8);
        let cfg = MptConfig {
            m: 10,
            ..MptConfig::default()
        };
        let mut perms = generate_permutations(40, 10, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let a = mpt_with_permutations(&data, &perms, &cfg).unwrap();
        perms.reverse();
        let b = mpt_with_permutations(&data, &perms, &cfg).unwrap();
        assert_eq!((a.m_stat, a.rho_hat, a.reject), (b.m_stat, b.rho_hat, b.reject));
    }

    #[test]
    fn strong_signal_is_detected() {
        let p = 30;
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut mu = Array1::zeros(p);
        mu.slice_mut(ndarray::s![..5]).fill(1.0);
        let data = Distribution::Gaussian
            .sample(60, mu.view(), &CovarianceFactor::Identity { p }, &mut rng)
            .unwrap();
        for method in [RhoMethod::Variance, RhoMethod::Quantile] {
            let cfg = MptConfig {
                rho_method: method,
                ..MptConfig::default()
            };
            let r = mpt(&data, &cfg, &mut rng).unwrap();
            assert!(r.reject, "{method:?}: {r:?}");
            assert!(r.m_stat < 0.0);
        }
    }

    #[test]
    fn unsupported_level_needs_override() {
        let data = gaussian(20, 5, 1);
        let cfg = MptConfig {
            alpha: 0.1,
            m: 4,
            ..MptConfig::default()
        };
        assert!(matches!(
            mpt(&data, &cfg, &mut ChaCha8Rng::seed_from_u64(0)),
            Err(Error::UnsupportedLevel { .. })
        ));
        let cfg = MptConfig {
            critical_override: Some(1.645),
            ..cfg
        };
        let r = mpt(&data, &cfg, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(r.critical.overridden);
    }

    #[test]
    fn probe_of_constant_map_has_zero_spread() {
        let report = exchangeability_probe(
            |rng| Ok(gaussian(10, 3, rng.random())),
            |_, _| Ok(vec![1.0; 4]),
            4,
            50,
            1,
        )
        .unwrap();
        assert_eq!(report.max_ks, 0.0);
        assert_eq!(report.correlation_spread, 0.0);
        assert_eq!(report.ks_statistics.len(), 6);
    }

    #[test]
    fn ks_statistic_of_shifted_samples() {
        let a: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..100).map(|i| i as f64 + 50.0).collect();
        assert!((two_sample_ks(&a, &b) - 0.5).abs() < 1e-12);
        assert_eq!(two_sample_ks(&a, &a), 0.0);
    }
}
