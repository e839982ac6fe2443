use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::settings::Settings;

#[derive(Debug, Parser)]
#[command(name = "hdmt", version, about = "One-sample tests for high-dimensional mean vectors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a single test (SPT or a baseline) on a CSV dataset.
    Test(TestArgs),
    /// Run the multiple-splitting projection test on a CSV dataset.
    Mpt(MptArgs),
    /// Monte Carlo size and power study.
    Simulate(SimulateArgs),
    /// Combine externally computed p-values.
    Combine(CombineArgs),
    /// Print the embedded critical value tables as CSV.
    Tables(TablesArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML file with settings; flags win on conflict.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum)]
    pub out: Option<OutFormat>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Significance level (0.05 unless a critical value is overridden).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Master seed; falls back to the HDMT_SEED environment variable.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Include wall time in the report (breaks byte-for-byte reproducibility).
    #[arg(long)]
    pub timing: bool,
}

impl CommonArgs {
    fn settings(&self) -> Settings {
        Settings {
            alpha: self.alpha,
            seed: self.seed,
            ..Settings::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV file, rows = observations, columns = variables.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Treat the first row as a header (default: detect).
    #[arg(long)]
    pub header: bool,
    /// Rescale columns to unit mean square.
    #[arg(long)]
    pub normalize: bool,
}

impl DataArgs {
    fn settings(&self) -> Settings {
        Settings {
            data: self.data.clone(),
            header: self.header.then_some(true),
            normalize: self.normalize.then_some(true),
            ..Settings::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Share of observations in the testing half.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// lasso, scad or mcp.
    #[arg(long)]
    pub penalty: Option<String>,
    /// SCAD `a` or MCP `b`.
    #[arg(long)]
    pub penalty_param: Option<f64>,
    /// Explicit penalty level.
    #[arg(long, conflicts_with = "lambda_c0")]
    pub lambda: Option<f64>,
    /// Constant in `lambda = c0 sqrt(ln p / n1)`.
    #[arg(long)]
    pub lambda_c0: Option<f64>,
    /// normal or t.
    #[arg(long)]
    pub reference: Option<String>,
    /// leading or pvalue-one: what to do when the estimated direction is zero.
    #[arg(long)]
    pub zero_direction: Option<String>,
    /// Solver iteration cap.
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// Solver stationarity tolerance.
    #[arg(long)]
    pub tolerance: Option<f64>,
}

impl SplitArgs {
    fn settings(&self) -> Settings {
        Settings {
            kappa: self.kappa,
            penalty: self.penalty.clone(),
            penalty_param: self.penalty_param,
            lambda: self.lambda,
            lambda_c0: self.lambda_c0,
            reference: self.reference.clone(),
            zero_direction: self.zero_direction.clone(),
            max_iterations: self.max_iterations,
            tolerance: self.tolerance,
            ..Settings::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct CombineRuleArgs {
    /// Number of splits.
    #[arg(long)]
    pub m: Option<usize>,
    /// variance or quantile.
    #[arg(long)]
    pub rho: Option<String>,
    /// Replace the tabulated critical value (allows alpha other than 0.05).
    #[arg(long)]
    pub critical_override: Option<f64>,
}

impl CombineRuleArgs {
    fn settings(&self) -> Settings {
        Settings {
            m: self.m,
            rho: self.rho.clone(),
            critical_override: self.critical_override,
            ..Settings::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct TestArgs {
    /// spt, cq, clx, rpt or ridge.
    #[arg(long)]
    pub method: Option<String>,
    /// Random projection dimension (rpt).
    #[arg(long)]
    pub rpt_dim: Option<usize>,
    /// Ridge level (ridge).
    #[arg(long)]
    pub ridge_lambda: Option<f64>,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct MptArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub rule: CombineRuleArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Sample size.
    #[arg(long)]
    pub n: Option<usize>,
    /// Dimension.
    #[arg(long)]
    pub p: Option<usize>,
    /// normal or t<df>, e.g. t6.
    #[arg(long)]
    pub distribution: Option<String>,
    /// cs, ar or identity.
    #[arg(long)]
    pub covariance: Option<String>,
    /// Correlation parameter of the covariance family.
    #[arg(long)]
    pub r: Option<f64>,
    /// Signal strength: the mean is c on the first `sparsity` coordinates.
    #[arg(long)]
    pub c: Option<f64>,
    /// Number of nonzero mean coordinates.
    #[arg(long)]
    pub sparsity: Option<usize>,
    /// Monte Carlo replications.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Comma-separated test names (spt, mpt_variance, mpt_quantile, mean2x,
    /// median2x, zaverage, cauchy, fisher, stouffer, cq, clx, rpt, ridge).
    #[arg(long, value_delimiter = ',')]
    pub tests: Option<Vec<String>>,
    /// Grid over r values.
    #[arg(long, value_delimiter = ',')]
    pub r_values: Option<Vec<f64>>,
    /// Grid over signal strengths.
    #[arg(long, value_delimiter = ',')]
    pub c_values: Option<Vec<f64>>,
    /// Grid over covariance families.
    #[arg(long, value_delimiter = ',')]
    pub families: Option<Vec<String>>,
    /// Grid over distributions.
    #[arg(long, value_delimiter = ',')]
    pub distributions: Option<Vec<String>>,
    /// Power-versus-m study over these split counts.
    #[arg(long, value_delimiter = ',')]
    pub m_values: Option<Vec<usize>>,
    /// p = 1000 and 10000 replications unless given explicitly. Slow.
    #[arg(long)]
    pub full_scale: bool,
    /// Random projection dimension (rpt).
    #[arg(long)]
    pub rpt_dim: Option<usize>,
    /// Ridge level (ridge).
    #[arg(long)]
    pub ridge_lambda: Option<f64>,
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub rule: CombineRuleArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CombineArgs {
    /// mpt (with --rho), mean2x, median2x, zaverage, cauchy, fisher or stouffer.
    #[arg(long)]
    pub method: Option<String>,
    /// Comma-separated p-values.
    #[arg(long = "p-values", value_delimiter = ',')]
    pub p_values: Option<Vec<f64>>,
    /// variance or quantile (method mpt).
    #[arg(long)]
    pub rho: Option<String>,
    #[arg(long)]
    pub critical_override: Option<f64>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct TablesArgs {
    /// variance or quantile.
    #[arg(long)]
    pub method: Option<String>,
    #[command(flatten)]
    pub common: CommonArgs,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Test(_) => "test",
            Self::Mpt(_) => "mpt",
            Self::Simulate(_) => "simulate",
            Self::Combine(_) => "combine",
            Self::Tables(_) => "tables",
        }
    }

    pub fn common(&self) -> &CommonArgs {
        match self {
            Self::Test(a) => &a.common,
            Self::Mpt(a) => &a.common,
            Self::Simulate(a) => &a.common,
            Self::Combine(a) => &a.common,
            Self::Tables(a) => &a.common,
        }
    }

    /// Settings given on the command line.
    pub fn flag_settings(&self) -> Settings {
        match self {
            Self::Test(a) => Settings {
                method: a.method.clone(),
                rpt_dim: a.rpt_dim,
                ridge_lambda: a.ridge_lambda,
                ..Settings::default()
            }
            .overlay(a.data.settings())
            .overlay(a.split.settings())
            .overlay(a.common.settings()),
            Self::Mpt(a) => a
                .data
                .settings()
                .overlay(a.split.settings())
                .overlay(a.rule.settings())
                .overlay(a.common.settings()),
            Self::Simulate(a) => Settings {
                n: a.n,
                p: a.p,
                distribution: a.distribution.clone(),
                covariance: a.covariance.clone(),
                r: a.r,
                c: a.c,
                sparsity: a.sparsity,
                reps: a.reps,
                tests: a.tests.clone(),
                r_values: a.r_values.clone(),
                c_values: a.c_values.clone(),
                families: a.families.clone(),
                distributions: a.distributions.clone(),
                m_values: a.m_values.clone(),
                full_scale: a.full_scale.then_some(true),
                rpt_dim: a.rpt_dim,
                ridge_lambda: a.ridge_lambda,
                ..Settings::default()
            }
            .overlay(a.split.settings())
            .overlay(a.rule.settings())
            .overlay(a.common.settings()),
            Self::Combine(a) => Settings {
                method: a.method.clone(),
                p_values: a.p_values.clone(),
                rho: a.rho.clone(),
                critical_override: a.critical_override,
                ..Settings::default()
            }
            .overlay(a.common.settings()),
            Self::Tables(a) => Settings {
                method: a.method.clone(),
                ..Settings::default()
            }
            .overlay(a.common.settings()),
        }
    }
}
