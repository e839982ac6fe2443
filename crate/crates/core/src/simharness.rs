//! Monte Carlo size and power studies over a scenario grid.
//!
//! Every replication derives its own random streams from the master seed, so
//! replications can run in any order (or concurrently) and still give the
//! same rows. Within a replication all tests see the same dataset, and all
//! split-based tests (SPT, MPT and the p-value combiners) share one set of
//! split p-values.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{self, BaselineConfig};
use crate::combine::{self, Combiner, RhoMethod};
use crate::datagen::{
    CovarianceFactor, CovarianceFamily, CovarianceSpec, DataMatrix, Distribution, MeanSpec,
    SeedPolicy,
};
use crate::mpt::{self, MptConfig};
use crate::projtest::{Reference, SplitOutcome};
use crate::{Error, Result};

const STREAM_DATA: u32 = 0;
const STREAM_SPLITS: u32 = 1;
const STREAM_RPT: u32 = 2;
const STREAM_RIDGE: u32 = 3;

/// Largest tolerated share of failed replications per test.
pub const MAX_FAILURE_RATE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum TestId {
    /// Single split: the first of the shared splits.
    Spt,
    Mpt(RhoMethod),
    Combiner(Combiner),
    Cq,
    Clx,
    Rpt,
    Ridge,
}

impl TestId {
    /// The tests compared in the size and power study.
    pub const STUDY: [TestId; 11] = [
        TestId::Spt,
        TestId::Mpt(RhoMethod::Variance),
        TestId::Mpt(RhoMethod::Quantile),
        TestId::Combiner(Combiner::Mean2x),
        TestId::Combiner(Combiner::Median2x),
        TestId::Combiner(Combiner::ZAverage),
        TestId::Combiner(Combiner::Cauchy),
        TestId::Cq,
        TestId::Clx,
        TestId::Rpt,
        TestId::Ridge,
    ];

    pub fn name(&self) -> String {
        match self {
            Self::Spt => "spt".into(),
            Self::Mpt(m) => format!("mpt_{}", m.name()),
            Self::Combiner(c) => c.name().into(),
            Self::Cq => "cq".into(),
            Self::Clx => "clx".into(),
            Self::Rpt => "rpt".into(),
            Self::Ridge => "ridge".into(),
        }
    }

    fn uses_splits(&self) -> bool {
        matches!(self, Self::Spt | Self::Mpt(_) | Self::Combiner(_))
    }
}

impl fmt::Display for TestId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for TestId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Ok(match lower.as_str() {
            "spt" => Self::Spt,
            "mpt" | "mpt_quantile" => Self::Mpt(RhoMethod::Quantile),
            "mpt_variance" => Self::Mpt(RhoMethod::Variance),
            "cq" => Self::Cq,
            "clx" => Self::Clx,
            "rpt" => Self::Rpt,
            "ridge" => Self::Ridge,
            other => Self::Combiner(other.parse().map_err(|_| {
                Error::InvalidParameter(format!("unknown test '{s}'"))
            })?),
        })
    }
}

impl TryFrom<String> for TestId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<TestId> for String {
    fn from(t: TestId) -> String {
        t.name()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub n: usize,
    pub p: usize,
    pub distribution: Distribution,
    pub covariance: CovarianceSpec,
    pub mean: MeanSpec,
    pub alpha: f64,
    pub reps: usize,
    pub tests: Vec<TestId>,
    pub master_seed: u64,
    /// Split, solver and combination settings shared by SPT and MPT.
    pub mpt: MptConfig,
    pub baselines: BaselineConfig,
    /// Run replications on the rayon pool. Rows do not depend on this.
    pub parallel: bool,
}

impl Default for ScenarioConfig {
    /// Desk-scale H0 scenario: n = 40, p = 100, Gaussian, CS(0.5), 1000 reps,
    /// t reference for the split tests.
    fn default() -> Self {
        Self {
            n: 40,
            p: 100,
            distribution: Distribution::Gaussian,
            covariance: CovarianceSpec::compound_symmetry(0.5),
            mean: MeanSpec::sparse_ones(10, 0.0),
            alpha: 0.05,
            reps: 1000,
            tests: TestId::STUDY.to_vec(),
            master_seed: 20240101,
            // n2 = 20 at desk scale: the t reference keeps every split exact
            mpt: MptConfig {
                reference: Reference::StudentT,
                ..MptConfig::default()
            },
            baselines: BaselineConfig::default(),
            parallel: true,
        }
    }
}

impl ScenarioConfig {
    /// Full-scale setting: p = 1000 and 10^4 replications. Slow.
    pub fn full_scale(mut self) -> Self {
        log::warn!("full-scale simulation (p = 1000, 10000 replications) may take hours");
        self.p = 1000;
        self.reps = 10_000;
        self
    }

    pub fn key(&self) -> String {
        format!(
            "n={},p={},{},{},c={}",
            self.n,
            self.p,
            self.distribution.label(),
            self.covariance.label(),
            self.mean.scale
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::InvalidParameter("reps must be at least 1".into()));
        }
        if self.tests.is_empty() {
            return Err(Error::InvalidParameter("no tests configured".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if self.reps > u32::MAX as usize {
            return Err(Error::InvalidParameter("too many replications".into()));
        }
        self.baselines.validate(self.n)?;
        crate::projtest::SplitPlan::identity(self.n, self.mpt.kappa)?;
        for t in &self.tests {
            if let TestId::Mpt(method) = t {
                combine::critical_value_with_override(
                    *method,
                    self.mpt.m,
                    self.alpha,
                    self.mpt.critical_override,
                )?;
            }
        }
        self.mean.realize(self.p)?;
        Ok(())
    }

    fn mpt_config(&self) -> MptConfig {
        MptConfig {
            alpha: self.alpha,
            parallel: false,
            ..self.mpt.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizePowerRow {
    pub scenario: String,
    pub n: usize,
    pub p: usize,
    pub distribution: String,
    pub covariance: String,
    pub signal: f64,
    pub test: String,
    pub rejections: usize,
    pub reps_completed: usize,
    pub failures: usize,
    pub rejection_rate: f64,
    pub mc_stderr: f64,
}

/// `sqrt(rate (1 - rate) / reps)`.
pub fn mc_stderr(rate: f64, reps: usize) -> f64 {
    if reps == 0 {
        return f64::NAN;
    }
    (rate * (1.0 - rate) / reps as f64).sqrt()
}

type Decision = std::result::Result<bool, String>;

struct Tally {
    rejections: usize,
    completed: usize,
    failures: usize,
    last_error: Option<String>,
}

fn tally<'a>(decisions: impl Iterator<Item = &'a Decision>) -> Tally {
    let mut t = Tally {
        rejections: 0,
        completed: 0,
        failures: 0,
        last_error: None,
    };
    for d in decisions {
        match d {
            Ok(r) => {
                t.completed += 1;
                t.rejections += usize::from(*r);
            }
            Err(e) => {
                t.failures += 1;
                t.last_error = Some(e.clone());
            }
        }
    }
    t
}

fn check_failures(t: &Tally, reps: usize) -> Result<()> {
    if t.failures as f64 > MAX_FAILURE_RATE * reps as f64 {
        return Err(Error::TooManyFailures {
            failed: t.failures,
            reps,
            last: t.last_error.clone().unwrap_or_default(),
        });
    }
    Ok(())
}

fn sample_replication(config: &ScenarioConfig, factor: &CovarianceFactor, rep: u32) -> Result<DataMatrix> {
    let mean = config.mean.realize(config.p)?;
    let mut rng = SeedPolicy::new(config.master_seed).rng(rep, STREAM_DATA);
    config.distribution.sample(config.n, mean.view(), factor, &mut rng)
}

fn shared_splits(data: &DataMatrix, mpt_cfg: &MptConfig, policy: SeedPolicy, rep: u32) -> Result<Vec<SplitOutcome>> {
    let mut rng = policy.rng(rep, STREAM_SPLITS);
    let perms = mpt::generate_permutations(data.n(), mpt_cfg.m, &mut rng)?;
    mpt::split_outcomes(data, &perms, mpt_cfg)
}

fn run_replication(config: &ScenarioConfig, factor: &CovarianceFactor, rep: u32) -> Vec<Decision> {
    let policy = SeedPolicy::new(config.master_seed);
    let data = match sample_replication(config, factor, rep) {
        Ok(d) => d,
        Err(e) => return vec![Err(e.to_string()); config.tests.len()],
    };
    let mpt_cfg = config.mpt_config();
    let alpha = config.alpha;
    let splits = if config.tests.iter().any(TestId::uses_splits) {
        Some(shared_splits(&data, &mpt_cfg, policy, rep).map(|outcomes| {
            outcomes.iter().map(|o| o.p_value).collect::<Vec<f64>>()
        }))
    } else {
        None
    };
    config
        .tests
        .iter()
        .map(|test| {
            let split_p = || match splits.as_ref().expect("splits computed") {
                Ok(p) => Ok(p.as_slice()),
                Err(e) => Err(e.clone()),
            };
            let decision = match test {
                TestId::Spt => split_p().map(|p| p[0] < alpha),
                TestId::Mpt(method) => split_p().and_then(|p| {
                    mpt::decide(
                        p,
                        *method,
                        alpha,
                        mpt_cfg.chi_square_tail,
                        mpt_cfg.critical_override,
                    )
                    .map(|d| d.reject)
                }),
                TestId::Combiner(c) => {
                    split_p().and_then(|p| combine::combine(*c, p, alpha).map(|r| r.rejected()))
                }
                TestId::Cq => baselines::cq_test(&data, alpha).map(|r| r.rejected()),
                TestId::Clx => baselines::clx_test(&data, alpha).map(|r| r.rejected()),
                TestId::Rpt => {
                    let k = config.baselines.rpt_dim.unwrap_or(config.n / 2);
                    let mut rng = policy.rng(rep, STREAM_RPT);
                    baselines::random_projection_test(&data, k, &mut rng, alpha).map(|r| r.rejected())
                }
                TestId::Ridge => {
                    let mut rng = policy.rng(rep, STREAM_RIDGE);
                    baselines::ridge_projection_test(
                        &data,
                        config.baselines.kappa,
                        config.baselines.ridge_lambda,
                        config.baselines.ridge_reference,
                        &mut rng,
                        alpha,
                    )
                    .map(|r| r.rejected())
                }
            };
            decision.map_err(|e| e.to_string())
        })
        .collect()
}

fn replications<T, F>(reps: usize, parallel: bool, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u32) -> T + Sync + Send,
{
    if parallel {
        (0..reps as u32).into_par_iter().map(f).collect()
    } else {
        (0..reps as u32).map(f).collect()
    }
}

/// Runs every configured test on `reps` simulated datasets and reports one
/// row per test, in the configured order.
pub fn run_scenario(config: &ScenarioConfig) -> Result<Vec<SizePowerRow>> {
    config.validate()?;
    let factor = CovarianceFactor::for_spec(&config.covariance, config.p)?;
    let per_rep = replications(config.reps, config.parallel, |rep| {
        run_replication(config, &factor, rep)
    });
    let key = config.key();
    config
        .tests
        .iter()
        .enumerate()
        .map(|(i, test)| {
            let t = tally(per_rep.iter().map(|d| &d[i]));
            check_failures(&t, config.reps)?;
            let rate = t.rejections as f64 / t.completed as f64;
            Ok(SizePowerRow {
                scenario: key.clone(),
                n: config.n,
                p: config.p,
                distribution: config.distribution.label(),
                covariance: config.covariance.label(),
                signal: config.mean.scale,
                test: test.name(),
                rejections: t.rejections,
                reps_completed: t.completed,
                failures: t.failures,
                rejection_rate: rate,
                mc_stderr: mc_stderr(rate, t.completed),
            })
        })
        .collect()
}

/// The Cartesian product of distributions, families, correlations and
/// signal strengths, in that nesting order. Every scenario reuses the base
/// master seed.
pub fn grid_scenarios(
    base: &ScenarioConfig,
    r_values: &[f64],
    c_values: &[f64],
    families: &[CovarianceFamily],
    distributions: &[Distribution],
) -> Result<Vec<ScenarioConfig>> {
    if r_values.is_empty() || c_values.is_empty() || families.is_empty() || distributions.is_empty() {
        return Err(Error::InvalidParameter("every grid axis needs at least one value".into()));
    }
    let mut out = Vec::new();
    for dist in distributions {
        for family in families {
            for &r in r_values {
                for &c in c_values {
                    out.push(ScenarioConfig {
                        distribution: *dist,
                        covariance: CovarianceSpec {
                            family: family.clone(),
                            r,
                        },
                        mean: MeanSpec {
                            pattern: base.mean.pattern.clone(),
                            scale: c,
                        },
                        ..base.clone()
                    });
                }
            }
        }
    }
    Ok(out)
}

pub fn run_grid(
    base: &ScenarioConfig,
    r_values: &[f64],
    c_values: &[f64],
    families: &[CovarianceFamily],
    distributions: &[Distribution],
) -> Result<Vec<SizePowerRow>> {
    let mut rows = Vec::new();
    for scenario in grid_scenarios(base, r_values, c_values, families, distributions)? {
        rows.extend(run_scenario(&scenario)?);
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerVsMRow {
    pub scenario: String,
    pub m: usize,
    pub tabulated_m: usize,
    pub test: String,
    pub rejections: usize,
    pub reps_completed: usize,
    pub failures: usize,
    pub rejection_rate: f64,
    pub mc_stderr: f64,
}

/// MPT rejection rate for each `m`. The splits for a smaller `m` are a
/// prefix of those for the largest one, and all `m` share each replication's
/// dataset, so differences between rows reflect `m` alone.
///
/// The MPT variants in `config.tests` are evaluated; other tests are ignored.
/// With no MPT variant configured the quantile method is used.
pub fn power_vs_m_study(config: &ScenarioConfig, m_values: &[usize]) -> Result<Vec<PowerVsMRow>> {
    if m_values.is_empty() {
        return Err(Error::InvalidParameter("no m values given".into()));
    }
    let mut methods: Vec<RhoMethod> = config
        .tests
        .iter()
        .filter_map(|t| match t {
            TestId::Mpt(m) => Some(*m),
            _ => None,
        })
        .collect();
    if methods.is_empty() {
        methods.push(RhoMethod::Quantile);
    }
    let m_max = *m_values.iter().max().expect("nonempty");
    let mut tabulated = Vec::with_capacity(m_values.len());
    for &m in m_values {
        if m < 2 {
            return Err(Error::InvalidParameter(format!("m must be at least 2, got {m}")));
        }
        for &method in &methods {
            combine::critical_value_with_override(method, m, config.alpha, config.mpt.critical_override)?;
        }
        tabulated.push(combine::critical_value(RhoMethod::Variance, m, 0.05)?.tabulated_m);
    }
    let probe = ScenarioConfig {
        tests: vec![TestId::Mpt(methods[0])],
        ..config.clone()
    };
    probe.validate()?;
    let factor = CovarianceFactor::for_spec(&config.covariance, config.p)?;
    let mpt_cfg = MptConfig {
        m: m_max,
        ..config.mpt_config()
    };
    let policy = SeedPolicy::new(config.master_seed);
    // per replication: decisions indexed by (m, method)
    let per_rep: Vec<Vec<Decision>> = replications(config.reps, config.parallel, |rep| {
        let pvals = sample_replication(config, &factor, rep)
            .and_then(|data| shared_splits(&data, &mpt_cfg, policy, rep))
            .map(|o| o.iter().map(|s| s.p_value).collect::<Vec<f64>>());
        let mut out = Vec::with_capacity(m_values.len() * methods.len());
        for &m in m_values {
            for &method in &methods {
                out.push(match &pvals {
                    Ok(p) => mpt::decide(
                        &p[..m],
                        method,
                        config.alpha,
                        mpt_cfg.chi_square_tail,
                        mpt_cfg.critical_override,
                    )
                    .map(|d| d.reject)
                    .map_err(|e| e.to_string()),
                    Err(e) => Err(e.to_string()),
                });
            }
        }
        out
    });
    let key = config.key();
    let mut rows = Vec::new();
    for (mi, &m) in m_values.iter().enumerate() {
        for (hi, method) in methods.iter().enumerate() {
            let idx = mi * methods.len() + hi;
            let t = tally(per_rep.iter().map(|d| &d[idx]));
            check_failures(&t, config.reps)?;
            let rate = t.rejections as f64 / t.completed as f64;
            rows.push(PowerVsMRow {
                scenario: key.clone(),
                m,
                tabulated_m: tabulated[mi],
                test: TestId::Mpt(*method).name(),
                rejections: t.rejections,
                reps_completed: t.completed,
                failures: t.failures,
                rejection_rate: rate,
                mc_stderr: mc_stderr(rate, t.completed),
            });
        }
    }
    Ok(rows)
}
