//! Multiple-splitting projection tests for one-sample high-dimensional mean
//! vectors.
//!
//! The crate is organized bottom-up:
//!
//! * [`datagen`] builds covariance families, samples Gaussian and
//!   multivariate-t data, and derives reproducible random streams.
//! * [`penalty`] and [`optimizer`] estimate a sparse projection direction by
//!   composite (proximal) gradient descent on a penalized quadratic.
//! * [`projtest`] runs the single-split projection test (SPT).
//! * [`combine`] turns exchangeable split p-values into one decision, and
//!   hosts the baseline p-value combiners.
//! * [`mpt`] orchestrates the multiple-splitting projection test (MPT).
//! * [`baselines`] implements competitor tests (CQ, CLX, random projection,
//!   ridge projection).
//! * [`simharness`] runs Monte Carlo size and power studies.

pub mod baselines;
pub mod combine;
pub mod datagen;
pub mod dist;
mod error;
pub mod linalg;
pub mod mpt;
pub mod optimizer;
pub mod penalty;
pub mod projtest;
pub mod simharness;

pub use combine::{
    combine, critical_value, m_statistic, rho_hat1, rho_hat2, z_transform, ChiSquareTail,
    Combiner, CriticalValue, RhoEstimate, RhoMethod, ZVector,
};
pub use datagen::{
    build_covariance, cholesky_factor, derive_seed, CovarianceFactor, CovarianceFamily,
    CovarianceSpec, DataMatrix, Distribution, MeanPattern, MeanSpec, SeedPolicy, TScaling,
};
pub use error::{Error, Result};
pub use mpt::{generate_permutations, mpt, MptConfig, MptResult};
pub use optimizer::{
    default_lambda, estimate_direction, lipschitz_estimate, stationarity_residual,
    DirectionEstimate, LambdaRule, SampleCovariance, SolverOptions, StepRule,
};
pub use penalty::{PenaltyKind, PenaltySpec};
pub use projtest::{
    make_split, project_and_t, spt, spt_power_oracle, Diagnostic, Reference, SplitPlan,
    SptConfig, TestResult, ZeroDirection,
};
