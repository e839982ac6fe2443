//! Fixtures shared by the benchmarks.

use hdmt_core::{CovarianceFactor, CovarianceSpec, DataMatrix, Distribution, MeanSpec, SeedPolicy};

/// Desk-scale dataset: Gaussian, CS(0.5), mean `c` on the first ten
/// coordinates.
pub fn desk_data(n: usize, p: usize, c: f64, seed: u64) -> DataMatrix {
    let spec = CovarianceSpec::compound_symmetry(0.5);
    let factor = CovarianceFactor::for_spec(&spec, p).expect("valid spec");
    let mean = MeanSpec::sparse_ones(10.min(p), c).realize(p).expect("valid mean");
    Distribution::Gaussian
        .sample(n, mean.view(), &factor, &mut SeedPolicy::new(seed).rng(0, 0))
        .expect("sampling succeeds")
}
