use std::time::Instant;

use hdmt_core::baselines::{self, BaselineConfig};
use hdmt_core::combine::{self, Combiner, RhoMethod, TABULATED_ALPHA, TABULATED_M};
use hdmt_core::mpt::{self, MptDecision};
use hdmt_core::simharness::{self, PowerVsMRow, ScenarioConfig, SizePowerRow, TestId};
use hdmt_core::{DataMatrix, MeanSpec, MptResult, Reference, SeedPolicy, SplitPlan, TestResult};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::args::Command;
use crate::input::{load_matrix, LoadOptions};
use crate::settings::{self, Settings};
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    /// Fully resolved settings; feeding them back through `--config`
    /// reproduces `results`.
    pub config: Settings,
    pub seed: Option<u64>,
    pub results: Results,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Results {
    Test(TestResult),
    Mpt(Box<MptResult>),
    Decision(Box<MptDecision>),
    Rows(Vec<SizePowerRow>),
    PowerVsM(Vec<PowerVsMRow>),
    Table(Vec<TableRow>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub method: String,
    pub m: usize,
    pub alpha: f64,
    pub beta: Option<f64>,
    pub c: f64,
}

#[derive(Serialize)]
struct TestRow<'a> {
    method: &'a str,
    statistic: f64,
    p_value: f64,
    alpha: Option<f64>,
    reject: Option<bool>,
}

#[derive(Serialize)]
struct SplitRow {
    split: usize,
    statistic: f64,
    p_value: f64,
    z: f64,
    lambda: f64,
    converged: bool,
    nonzeros: usize,
}

#[derive(Serialize)]
struct DecisionRow {
    m: usize,
    rho_method: String,
    rho_hat: f64,
    m_stat: f64,
    critical: f64,
    reject: bool,
}

impl RunReport {
    pub fn to_json(&self) -> Result<Vec<u8>, CliError> {
        let mut out =
            serde_json::to_vec_pretty(self).map_err(|e| CliError::Output(e.to_string()))?;
        out.push(b'\n');
        Ok(out)
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let res: Result<(), csv::Error> = (|| {
            match &self.results {
                Results::Test(t) => w.serialize(TestRow {
                    method: &t.method,
                    statistic: t.statistic,
                    p_value: t.p_value,
                    alpha: t.alpha,
                    reject: t.reject,
                })?,
                Results::Mpt(r) => {
                    for (k, s) in r.per_split.iter().enumerate() {
                        w.serialize(SplitRow {
                            split: k,
                            statistic: s.statistic,
                            p_value: s.p_value,
                            z: r.z.as_slice()[k],
                            lambda: s.lambda,
                            converged: s.converged,
                            nonzeros: s.nonzeros,
                        })?;
                    }
                }
                Results::Decision(d) => w.serialize(DecisionRow {
                    m: d.z.m(),
                    rho_method: d.rho_hat.method.name().to_string(),
                    rho_hat: d.rho_hat.value,
                    m_stat: d.m_stat,
                    critical: d.critical.c,
                    reject: d.reject,
                })?,
                Results::Rows(rows) => rows.iter().try_for_each(|r| w.serialize(r))?,
                Results::PowerVsM(rows) => rows.iter().try_for_each(|r| w.serialize(r))?,
                Results::Table(rows) => rows.iter().try_for_each(|r| w.serialize(r))?,
            }
            Ok(())
        })();
        res.map_err(|e| CliError::Output(e.to_string()))?;
        w.into_inner().map_err(|e| CliError::Output(e.to_string()))
    }
}

/// Resolves settings (flags over `--config`, then defaults) and runs the
/// command.
pub fn execute(command: &Command) -> Result<RunReport, CliError> {
    let flags = command.flag_settings();
    let settings = match &command.common().config {
        Some(path) => flags.overlay(Settings::from_toml_file(path)?),
        None => flags,
    };
    let started = Instant::now();
    let (config, results) = match command {
        Command::Test(_) => cmd_test(settings)?,
        Command::Mpt(_) => cmd_mpt(settings)?,
        Command::Simulate(_) => cmd_simulate(settings)?,
        Command::Combine(_) => cmd_combine(settings)?,
        Command::Tables(_) => cmd_tables(settings)?,
    };
    let elapsed = started.elapsed().as_secs_f64();
    log::info!("{} finished in {elapsed:.3} s", command.name());
    Ok(RunReport {
        command: command.name().to_string(),
        seed: config.seed,
        config,
        results,
        wall_time_seconds: command.common().timing.then_some(elapsed),
    })
}

fn load(settings: &Settings) -> Result<DataMatrix, CliError> {
    let path = settings
        .data
        .as_ref()
        .ok_or_else(|| CliError::Usage("--data is required".into()))?;
    load_matrix(
        path,
        LoadOptions {
            header: settings.header,
            normalize: settings.normalize.unwrap_or(false),
        },
    )
}

fn split_plan(n: usize, kappa: f64, seed: u64) -> Result<SplitPlan, CliError> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut SeedPolicy::new(seed).rng(0, 0));
    Ok(hdmt_core::make_split(n, kappa, perm)?)
}

pub fn cmd_test(mut s: Settings) -> Result<(Settings, Results), CliError> {
    let method = s.method.get_or_insert_with(|| "spt".into()).to_ascii_lowercase();
    s.fill_alpha();
    s.fill_seed()?;
    let alpha = s.alpha.expect("filled");
    let seed = s.seed.expect("filled");
    let data = load(&s)?;
    let result = match method.as_str() {
        "spt" => {
            s.fill_split("normal");
            let cfg = s.split_config()?;
            let plan = split_plan(data.n(), cfg.kappa, seed)?;
            hdmt_core::spt(&data, &plan, &cfg)?
        }
        "cq" => baselines::cq_test(&data, alpha)?,
        "clx" => baselines::clx_test(&data, alpha)?,
        "rpt" => {
            let k = *s.rpt_dim.get_or_insert(data.n() / 2);
            baselines::random_projection_test(&data, k, &mut SeedPolicy::new(seed).rng(0, 0), alpha)?
        }
        "ridge" => {
            s.kappa.get_or_insert(0.5);
            s.reference.get_or_insert_with(|| "t".into());
            let reference = settings::parse_reference(s.reference.as_deref().expect("filled"))?;
            let plan = split_plan(data.n(), s.kappa.expect("filled"), seed)?;
            baselines::ridge_projection_test_with_plan(&data, &plan, s.ridge_lambda, reference, alpha)?
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown test '{other}' (expected spt, cq, clx, rpt or ridge)"
            )))
        }
    };
    Ok((s, Results::Test(result)))
}

pub fn cmd_mpt(mut s: Settings) -> Result<(Settings, Results), CliError> {
    s.fill_alpha();
    s.fill_seed()?;
    s.fill_split("normal");
    s.fill_mpt();
    let cfg = s.mpt_config()?;
    // check the table before loading data so level errors are usage errors
    combine::critical_value_with_override(cfg.rho_method, cfg.m, cfg.alpha, cfg.critical_override)?;
    let data = load(&s)?;
    let mut rng = SeedPolicy::new(s.seed.expect("filled")).rng(0, 0);
    let result = mpt::mpt(&data, &cfg, &mut rng)?;
    Ok((s, Results::Mpt(Box::new(result))))
}

fn scenario(s: &Settings) -> Result<ScenarioConfig, CliError> {
    let tests = s
        .tests
        .as_ref()
        .expect("filled")
        .iter()
        .map(|t| t.parse::<TestId>())
        .collect::<Result<Vec<_>, _>>()?;
    let mpt = s.mpt_config()?;
    let n = s.n.expect("filled");
    Ok(ScenarioConfig {
        n,
        p: s.p.expect("filled"),
        distribution: settings::parse_distribution(s.distribution.as_deref().expect("filled"))?,
        covariance: settings::covariance_spec(
            s.covariance.as_deref().expect("filled"),
            s.r.expect("filled"),
        )?,
        mean: MeanSpec::sparse_ones(s.sparsity.expect("filled"), s.c.expect("filled")),
        alpha: s.alpha.expect("filled"),
        reps: s.reps.expect("filled"),
        tests,
        master_seed: s.seed.expect("filled"),
        baselines: BaselineConfig {
            rpt_dim: s.rpt_dim,
            ridge_lambda: s.ridge_lambda,
            ridge_reference: Reference::StudentT,
            kappa: mpt.kappa,
        },
        mpt,
        parallel: true,
    })
}

pub fn cmd_simulate(mut s: Settings) -> Result<(Settings, Results), CliError> {
    if s.full_scale == Some(true) {
        log::warn!("full-scale simulation (p = 1000, 10000 replications) may take hours");
        s.p.get_or_insert(1000);
        s.reps.get_or_insert(10_000);
    }
    s.n.get_or_insert(40);
    s.p.get_or_insert(100);
    s.distribution.get_or_insert_with(|| "normal".into());
    s.covariance.get_or_insert_with(|| "cs".into());
    s.r.get_or_insert(0.5);
    s.c.get_or_insert(0.0);
    s.sparsity.get_or_insert(10);
    s.reps.get_or_insert(1000);
    s.tests
        .get_or_insert_with(|| TestId::STUDY.iter().map(|t| t.name()).collect());
    s.fill_alpha();
    s.fill_seed()?;
    s.fill_split("t");
    s.fill_mpt();
    let base = scenario(&s)?;
    if let Some(m_values) = s.m_values.clone() {
        let rows = simharness::power_vs_m_study(&base, &m_values)?;
        return Ok((s, Results::PowerVsM(rows)));
    }
    let is_grid = s.r_values.is_some()
        || s.c_values.is_some()
        || s.families.is_some()
        || s.distributions.is_some();
    if !is_grid {
        return Ok((s, Results::Rows(simharness::run_scenario(&base)?)));
    }
    let r_values = s.r_values.get_or_insert_with(|| vec![base.covariance.r]).clone();
    let c_values = s.c_values.get_or_insert_with(|| vec![base.mean.scale]).clone();
    let families = s
        .families
        .get_or_insert_with(|| vec![s.covariance.clone().expect("filled")])
        .iter()
        .map(|f| settings::parse_family(f))
        .collect::<Result<Vec<_>, _>>()?;
    let distributions = s
        .distributions
        .get_or_insert_with(|| vec![s.distribution.clone().expect("filled")])
        .iter()
        .map(|d| settings::parse_distribution(d))
        .collect::<Result<Vec<_>, _>>()?;
    let rows = simharness::run_grid(&base, &r_values, &c_values, &families, &distributions)?;
    Ok((s, Results::Rows(rows)))
}

pub fn cmd_combine(mut s: Settings) -> Result<(Settings, Results), CliError> {
    let method = s.method.get_or_insert_with(|| "mpt".into()).to_ascii_lowercase();
    s.fill_alpha();
    let alpha = s.alpha.expect("filled");
    let p_values = s
        .p_values
        .clone()
        .ok_or_else(|| CliError::Usage("--p-values is required".into()))?;
    if method == "mpt" {
        let rho = settings::parse_rho(s.rho.get_or_insert_with(|| "quantile".into()))?;
        let d = mpt::decide(&p_values, rho, alpha, Default::default(), s.critical_override)?;
        return Ok((s, Results::Decision(Box::new(d))));
    }
    let combiner: Combiner = method
        .parse()
        .map_err(|_| CliError::Usage(format!("unknown combination method '{method}'")))?;
    if combiner.assumes_independence() {
        log::warn!("{} assumes independent p-values; split p-values are dependent", combiner.name());
    }
    Ok((s, Results::Test(combine::combine(combiner, &p_values, alpha)?)))
}

pub fn table_rows(method: RhoMethod) -> Result<Vec<TableRow>, CliError> {
    TABULATED_M
        .iter()
        .map(|&m| {
            let cv = combine::critical_value(method, m, TABULATED_ALPHA)?;
            Ok(TableRow {
                method: method.name().to_string(),
                m,
                alpha: TABULATED_ALPHA,
                beta: cv.beta,
                c: cv.c,
            })
        })
        .collect()
}

pub fn cmd_tables(mut s: Settings) -> Result<(Settings, Results), CliError> {
    let method = settings::parse_rho(s.method.get_or_insert_with(|| "variance".into()))?;
    Ok((s, Results::Table(table_rows(method)?)))
}
