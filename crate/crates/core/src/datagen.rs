//! Covariance families, data generation and reproducible random streams.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution as _, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::linalg;
use crate::{Error, Result};

/// Covariance structure of the generated observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CovarianceFamily {
    /// `sigma_ij = r` off the diagonal, 1 on it.
    CompoundSymmetry,
    /// `sigma_ij = r^|i - j|`.
    Autocorrelation,
    Identity,
    Custom(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceSpec {
    pub family: CovarianceFamily,
    /// Correlation parameter for the CS and AR families; ignored otherwise.
    pub r: f64,
}

impl CovarianceSpec {
    pub fn compound_symmetry(r: f64) -> Self {
        Self {
            family: CovarianceFamily::CompoundSymmetry,
            r,
        }
    }

    pub fn autocorrelation(r: f64) -> Self {
        Self {
            family: CovarianceFamily::Autocorrelation,
            r,
        }
    }

    pub fn identity() -> Self {
        Self {
            family: CovarianceFamily::Identity,
            r: 0.0,
        }
    }

    pub fn custom(matrix: ArrayView2<f64>) -> Self {
        Self {
            family: CovarianceFamily::Custom(matrix.outer_iter().map(|row| row.to_vec()).collect()),
            r: 0.0,
        }
    }

    /// Short label such as `CS(0.5)`, used as part of scenario keys.
    pub fn label(&self) -> String {
        match self.family {
            CovarianceFamily::CompoundSymmetry => format!("CS({})", self.r),
            CovarianceFamily::Autocorrelation => format!("AR({})", self.r),
            CovarianceFamily::Identity => "I".to_string(),
            CovarianceFamily::Custom(_) => "custom".to_string(),
        }
    }

    fn check_r(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.r) {
            return Err(Error::InvalidParameter(format!(
                "correlation r must lie in [0, 1), got {}",
                self.r
            )));
        }
        Ok(())
    }
}

fn custom_matrix(rows: &[Vec<f64>], p: usize) -> Result<Array2<f64>> {
    if rows.len() != p || rows.iter().any(|row| row.len() != p) {
        return Err(Error::DimensionMismatch(format!(
            "custom covariance must be {p}x{p}"
        )));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    let m = Array2::from_shape_vec((p, p), flat).expect("shape checked above");
    linalg::check_symmetric(m.view(), 1e-12)?;
    Ok(m)
}

/// Realizes the covariance matrix for dimension `p`.
pub fn build_covariance(spec: &CovarianceSpec, p: usize) -> Result<Array2<f64>> {
    if p == 0 {
        return Err(Error::InvalidParameter("dimension p must be positive".into()));
    }
    match &spec.family {
        CovarianceFamily::CompoundSymmetry => {
            spec.check_r()?;
            Ok(Array2::from_shape_fn((p, p), |(i, j)| {
                if i == j {
                    1.0
                } else {
                    spec.r
                }
            }))
        }
        CovarianceFamily::Autocorrelation => {
            spec.check_r()?;
            Ok(Array2::from_shape_fn((p, p), |(i, j)| {
                spec.r.powi(i.abs_diff(j) as i32)
            }))
        }
        CovarianceFamily::Identity => Ok(Array2::eye(p)),
        CovarianceFamily::Custom(rows) => custom_matrix(rows, p),
    }
}

/// Dense lower Cholesky factor `L` with `L L^T = sigma`.
pub fn cholesky_factor(sigma: ArrayView2<f64>) -> Result<Array2<f64>> {
    linalg::check_symmetric(sigma, 1e-12)?;
    linalg::cholesky(sigma)
}

/// Closed-form Cholesky factor of the AR(1) correlation matrix:
/// `L[i][0] = r^i`, `L[i][j] = r^(i-j) sqrt(1 - r^2)` for `1 <= j <= i`.
pub fn ar1_cholesky(r: f64, p: usize) -> Array2<f64> {
    let s = (1.0 - r * r).sqrt();
    Array2::from_shape_fn((p, p), |(i, j)| {
        if j > i {
            0.0
        } else if j == 0 {
            r.powi(i as i32)
        } else {
            r.powi((i - j) as i32) * s
        }
    })
}

/// A square-root factor of the covariance used to color standard normal
/// draws. The structured variants apply in O(p) per observation.
#[derive(Debug, Clone, PartialEq)]
pub enum CovarianceFactor {
    Identity { p: usize },
    /// `x = sqrt(r) u 1 + sqrt(1 - r) z`, consuming `p + 1` normals per row.
    CompoundSymmetry { r: f64, p: usize },
    /// AR(1) recursion `x_j = r x_{j-1} + sqrt(1 - r^2) z_j`, equivalent to
    /// multiplying by [`ar1_cholesky`].
    Autocorrelation { r: f64, p: usize },
    /// Any lower-triangular (or general) `L`; rows are `L z`.
    Dense(Array2<f64>),
}

impl CovarianceFactor {
    pub fn for_spec(spec: &CovarianceSpec, p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidParameter("dimension p must be positive".into()));
        }
        match &spec.family {
            CovarianceFamily::Identity => Ok(Self::Identity { p }),
            CovarianceFamily::CompoundSymmetry => {
                spec.check_r()?;
                Ok(Self::CompoundSymmetry { r: spec.r, p })
            }
            CovarianceFamily::Autocorrelation => {
                spec.check_r()?;
                Ok(Self::Autocorrelation { r: spec.r, p })
            }
            CovarianceFamily::Custom(rows) => {
                let sigma = custom_matrix(rows, p)?;
                Ok(Self::Dense(linalg::cholesky(sigma.view())?))
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Identity { p }
            | Self::CompoundSymmetry { p, .. }
            | Self::Autocorrelation { p, .. } => *p,
            Self::Dense(l) => l.nrows(),
        }
    }

    fn normals_per_row(&self) -> usize {
        match self {
            Self::CompoundSymmetry { p, .. } => p + 1,
            Self::Dense(l) => l.ncols(),
            _ => self.dim(),
        }
    }

    /// Writes the colored vector for the normal draws `z` into `out`.
    fn color(&self, z: &[f64], out: &mut [f64]) {
        match self {
            Self::Identity { .. } => out.copy_from_slice(z),
            Self::CompoundSymmetry { r, .. } => {
                let common = r.sqrt() * z[0];
                let own = (1.0 - r).sqrt();
                for (o, zi) in out.iter_mut().zip(&z[1..]) {
                    *o = common + own * zi;
                }
            }
            Self::Autocorrelation { r, .. } => {
                let s = (1.0 - r * r).sqrt();
                out[0] = z[0];
                for j in 1..out.len() {
                    out[j] = r * out[j - 1] + s * z[j];
                }
            }
            Self::Dense(l) => {
                for (o, row) in out.iter_mut().zip(l.outer_iter()) {
                    *o = row.iter().zip(z).map(|(a, b)| a * b).sum();
                }
            }
        }
    }
}

impl From<Array2<f64>> for CovarianceFactor {
    fn from(l: Array2<f64>) -> Self {
        Self::Dense(l)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MeanPattern {
    /// First `k` coordinates equal to one, the rest zero.
    SparseOnes(usize),
    Custom(Vec<f64>),
}

/// Mean vector `c * pattern`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanSpec {
    pub pattern: MeanPattern,
    pub scale: f64,
}

impl MeanSpec {
    pub fn sparse_ones(k: usize, scale: f64) -> Self {
        Self {
            pattern: MeanPattern::SparseOnes(k),
            scale,
        }
    }

    pub fn realize(&self, p: usize) -> Result<Array1<f64>> {
        match &self.pattern {
            MeanPattern::SparseOnes(k) => {
                if *k > p {
                    return Err(Error::InvalidParameter(format!(
                        "sparse mean with {k} nonzeros does not fit dimension {p}"
                    )));
                }
                Ok(Array1::from_shape_fn(p, |j| if j < *k { self.scale } else { 0.0 }))
            }
            MeanPattern::Custom(v) => {
                if v.len() != p {
                    return Err(Error::DimensionMismatch(format!(
                        "mean has length {}, expected {p}",
                        v.len()
                    )));
                }
                Ok(Array1::from_iter(v.iter().map(|x| x * self.scale)))
            }
        }
    }
}

impl Default for MeanSpec {
    fn default() -> Self {
        Self::sparse_ones(10, 0.0)
    }
}

/// An `n x p` sample; rows are observations.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Array2<f64>,
}

impl DataMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        let (n, p) = values.dim();
        if n == 0 || p == 0 {
            return Err(Error::InvalidParameter(format!(
                "data matrix must be nonempty, got {n}x{p}"
            )));
        }
        if let Some((idx, _)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "data at row {}, column {}",
                idx.0, idx.1
            )));
        }
        Ok(Self { values })
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn p(&self) -> usize {
        self.values.ncols()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.values
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.values.row(i)
    }

    pub fn select_rows(&self, rows: &[usize]) -> Array2<f64> {
        self.values.select(Axis(0), rows)
    }

    /// Index of the first column whose values are all identical.
    pub fn constant_column(&self) -> Option<usize> {
        self.values.axis_iter(Axis(1)).position(|col| {
            let first = col[0];
            col.iter().all(|&v| v == first)
        })
    }

    /// Rescales every column so that `(1/n) sum_i x_ij^2 = 1`. All-zero
    /// columns are left untouched.
    pub fn normalize_second_moment(&mut self) {
        let n = self.n() as f64;
        for mut col in self.values.axis_iter_mut(Axis(1)) {
            let ms = col.iter().map(|v| v * v).sum::<f64>() / n;
            if ms > 0.0 {
                let s = ms.sqrt();
                col.mapv_inplace(|v| v / s);
            }
        }
    }
}

/// Scaling convention for multivariate t draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TScaling {
    /// `Sigma` is the scale matrix; the covariance is `Sigma df / (df - 2)`.
    #[default]
    ScaleMatrix,
    /// Rescaled so the covariance is exactly `Sigma`.
    ExactCovariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Distribution {
    Gaussian,
    StudentT { df: f64, scaling: TScaling },
}

impl Distribution {
    pub fn student_t(df: f64) -> Self {
        Self::StudentT {
            df,
            scaling: TScaling::ScaleMatrix,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Gaussian => "normal".to_string(),
            Self::StudentT { df, .. } => format!("t{df}"),
        }
    }

    pub fn sample<R: Rng + ?Sized>(
        &self,
        n: usize,
        mean: ArrayView1<f64>,
        factor: &CovarianceFactor,
        rng: &mut R,
    ) -> Result<DataMatrix> {
        match *self {
            Self::Gaussian => sample_gaussian(n, mean, factor, rng),
            Self::StudentT { df, scaling } => sample_student_t(n, mean, factor, df, scaling, rng),
        }
    }
}

fn check_dims(n: usize, mean: ArrayView1<f64>, factor: &CovarianceFactor) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample size must be positive".into()));
    }
    if mean.len() != factor.dim() {
        return Err(Error::DimensionMismatch(format!(
            "mean has length {}, covariance factor has dimension {}",
            mean.len(),
            factor.dim()
        )));
    }
    Ok(())
}

fn sample_rows<R, F>(
    n: usize,
    mean: ArrayView1<f64>,
    factor: &CovarianceFactor,
    rng: &mut R,
    mut row_scale: F,
) -> Result<DataMatrix>
where
    R: Rng + ?Sized,
    F: FnMut(&mut R) -> f64,
{
    check_dims(n, mean, factor)?;
    let p = factor.dim();
    let mut values = Array2::<f64>::zeros((n, p));
    let mut z = vec![0.0; factor.normals_per_row()];
    let mut colored = vec![0.0; p];
    for mut row in values.outer_iter_mut() {
        for zi in z.iter_mut() {
            *zi = rng.sample(StandardNormal);
        }
        factor.color(&z, &mut colored);
        let scale = row_scale(rng);
        for ((out, c), m) in row.iter_mut().zip(&colored).zip(mean.iter()) {
            *out = m + scale * c;
        }
    }
    DataMatrix::new(values)
}

/// Draws `n` rows `mu + L z`, `z ~ N(0, I)`.
pub fn sample_gaussian<R: Rng + ?Sized>(
    n: usize,
    mean: ArrayView1<f64>,
    factor: &CovarianceFactor,
    rng: &mut R,
) -> Result<DataMatrix> {
    sample_rows(n, mean, factor, rng, |_| 1.0)
}

/// Draws `n` rows `mu + L z sqrt(df / W)`, `W ~ chi^2(df)`.
pub fn sample_student_t<R: Rng + ?Sized>(
    n: usize,
    mean: ArrayView1<f64>,
    factor: &CovarianceFactor,
    df: f64,
    scaling: TScaling,
    rng: &mut R,
) -> Result<DataMatrix> {
    if !(df > 2.0) || !df.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "t degrees of freedom must exceed 2, got {df}"
        )));
    }
    let chi = ChiSquared::new(df).expect("df > 2");
    let adjust = match scaling {
        TScaling::ScaleMatrix => 1.0,
        TScaling::ExactCovariance => ((df - 2.0) / df).sqrt(),
    };
    sample_rows(n, mean, factor, rng, |rng| {
        let w: f64 = chi.sample(rng);
        adjust * (df / w).sqrt()
    })
}

/// Master seed from which every per-(replication, stream) seed is derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedPolicy {
    pub master_seed: u64,
}

impl SeedPolicy {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    pub fn seed(&self, replication: u32, stream: u32) -> u64 {
        derive_seed(*self, replication, stream)
    }

    pub fn rng(&self, replication: u32, stream: u32) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed(replication, stream))
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for `(replication, stream)`. The index pair is packed into 64 bits
/// and passed through a bijective mixer keyed by the master seed, so distinct
/// pairs always map to distinct seeds.
pub fn derive_seed(policy: SeedPolicy, replication: u32, stream: u32) -> u64 {
    let key = ((replication as u64) << 32) | stream as u64;
    splitmix64(key ^ splitmix64(policy.master_seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use std::collections::HashSet;

    fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
        a.iter()
            .zip(b.iter())
            .fold(0.0, |m, (x, y)| f64::max(m, (x - y).abs()))
    }

    #[test]
    fn ar_zero_is_identity() {
        let s = build_covariance(&CovarianceSpec::autocorrelation(0.0), 3).unwrap();
        assert_eq!(s, Array2::<f64>::eye(3));
    }

    #[test]
    fn cs_two_by_two() {
        let s = build_covariance(&CovarianceSpec::compound_symmetry(0.5), 2).unwrap();
        assert_eq!(s, array![[1.0, 0.5], [0.5, 1.0]]);
    }

    #[test]
    fn ar_three_by_three() {
        let s = build_covariance(&CovarianceSpec::autocorrelation(0.5), 3).unwrap();
        assert_eq!(s, array![[1.0, 0.5, 0.25], [0.5, 1.0, 0.5], [0.25, 0.5, 1.0]]);
    }

    #[test]
    fn covariance_errors() {
        assert!(build_covariance(&CovarianceSpec::compound_symmetry(0.5), 0).is_err());
        assert!(build_covariance(&CovarianceSpec::compound_symmetry(1.0), 3).is_err());
        assert!(build_covariance(&CovarianceSpec::autocorrelation(-0.1), 3).is_err());
        let asym = CovarianceSpec::custom(array![[1.0, 0.1], [0.2, 1.0]].view());
        assert!(matches!(
            build_covariance(&asym, 2),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn families_symmetric_unit_diagonal_on_grid() {
        for p in [1usize, 2, 7, 50, 200, 500] {
            for step in 0..10 {
                let r = step as f64 / 10.0;
                for spec in [
                    CovarianceSpec::compound_symmetry(r),
                    CovarianceSpec::autocorrelation(r),
                ] {
                    let s = build_covariance(&spec, p).unwrap();
                    for i in 0..p {
                        assert_eq!(s[[i, i]], 1.0);
                        for j in 0..i {
                            assert_eq!(s[[i, j]], s[[j, i]]);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn cholesky_reconstructs_families() {
        for p in [10usize, 100] {
            for step in 1..10 {
                let r = step as f64 / 10.0;
                for spec in [
                    CovarianceSpec::compound_symmetry(r),
                    CovarianceSpec::autocorrelation(r),
                ] {
                    let s = build_covariance(&spec, p).unwrap();
                    let l = cholesky_factor(s.view()).unwrap();
                    let err = max_abs_diff(&l.dot(&l.t()), &s);
                    assert!(err <= 1e-10 * linalg::max_abs(s.view()), "{spec:?} p={p}: {err}");
                }
            }
        }
        let s = build_covariance(&CovarianceSpec::compound_symmetry(0.9), 50).unwrap();
        let l = cholesky_factor(s.view()).unwrap();
        assert!(max_abs_diff(&l.dot(&l.t()), &s) <= 1e-10);
    }

    #[test]
    fn ar_closed_form_matches_dense() {
        for r in [0.0, 0.3, 0.9] {
            let s = build_covariance(&CovarianceSpec::autocorrelation(r), 40).unwrap();
            let dense = cholesky_factor(s.view()).unwrap();
            assert!(max_abs_diff(&dense, &ar1_cholesky(r, 40)) < 1e-12);
        }
    }

    #[test]
    fn ar_recursion_matches_closed_form_factor() {
        let (r, p) = (0.7, 12);
        let fast = CovarianceFactor::Autocorrelation { r, p };
        let dense = CovarianceFactor::Dense(ar1_cholesky(r, p));
        let z: Vec<f64> = (0..p).map(|i| (i as f64 * 0.37).sin()).collect();
        let (mut a, mut b) = (vec![0.0; p], vec![0.0; p]);
        fast.color(&z, &mut a);
        dense.color(&z, &mut b);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_factor_gives_mean_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let l = CovarianceFactor::Dense(Array2::zeros((4, 4)));
        let mu = Array1::zeros(4);
        let x = sample_gaussian(5, mu.view(), &l, &mut rng).unwrap();
        assert!(x.view().iter().all(|&v| v == 0.0));

        let mu = array![1.0, -2.0, 0.5, 3.0];
        let t = sample_student_t(5, mu.view(), &l, 6.0, TScaling::ScaleMatrix, &mut rng).unwrap();
        for row in t.view().outer_iter() {
            assert_eq!(row, mu);
        }
    }

    #[test]
    fn gaussian_mean_within_clt_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let factor = CovarianceFactor::Identity { p: 3 };
        let x = sample_gaussian(10_000, Array1::zeros(3).view(), &factor, &mut rng).unwrap();
        let means = linalg::column_means(x.view());
        for m in means.iter() {
            assert!(m.abs() < 4.0 / 100.0, "{m}");
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let factor = CovarianceFactor::CompoundSymmetry { r: 0.4, p: 6 };
        let mu = Array1::zeros(6);
        let a = sample_gaussian(8, mu.view(), &factor, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = sample_gaussian(8, mu.view(), &factor, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a, b);
        let d = Distribution::student_t(6.0);
        let a = d.sample(8, mu.view(), &factor, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let b = d.sample(8, mu.view(), &factor, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empirical_covariance_matches() {
        let p = 5;
        for spec in [
            CovarianceSpec::compound_symmetry(0.6),
            CovarianceSpec::autocorrelation(0.6),
        ] {
            let sigma = build_covariance(&spec, p).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            for factor in [
                CovarianceFactor::for_spec(&spec, p).unwrap(),
                CovarianceFactor::Dense(cholesky_factor(sigma.view()).unwrap()),
            ] {
                let x = sample_gaussian(100_000, Array1::zeros(p).view(), &factor, &mut rng)
                    .unwrap();
                let s = linalg::sample_covariance(x.view());
                assert!(max_abs_diff(&s, &sigma) < 0.02, "{spec:?}");
            }
        }
    }

    #[test]
    fn student_t_large_df_has_unit_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let factor = CovarianceFactor::Identity { p: 2 };
        let x = sample_student_t(
            10_000,
            Array1::zeros(2).view(),
            &factor,
            1e6,
            TScaling::ScaleMatrix,
            &mut rng,
        )
        .unwrap();
        let s = linalg::sample_covariance(x.view());
        for j in 0..2 {
            assert!((s[[j, j]] - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn student_t_scaling_conventions() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let factor = CovarianceFactor::Identity { p: 1 };
        let mu = Array1::zeros(1);
        let var = |x: &DataMatrix| linalg::sample_covariance(x.view())[[0, 0]];
        let scale =
            sample_student_t(200_000, mu.view(), &factor, 6.0, TScaling::ScaleMatrix, &mut rng)
                .unwrap();
        let exact =
            sample_student_t(200_000, mu.view(), &factor, 6.0, TScaling::ExactCovariance, &mut rng)
                .unwrap();
        // 6 / (6 - 2) = 1.5
        assert!((var(&scale) - 1.5).abs() < 0.05);
        assert!((var(&exact) - 1.0).abs() < 0.04);
    }

    #[test]
    fn student_t_rejects_small_df() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let factor = CovarianceFactor::Identity { p: 2 };
        let r = sample_student_t(3, Array1::zeros(2).view(), &factor, 2.0, TScaling::ScaleMatrix, &mut rng);
        assert!(r.is_err());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let factor = CovarianceFactor::Identity { p: 3 };
        assert!(matches!(
            sample_gaussian(3, Array1::zeros(2).view(), &factor, &mut rng),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn sparse_mean_pattern() {
        let mu = MeanSpec::sparse_ones(10, 0.5).realize(30).unwrap();
        assert_eq!(mu.iter().filter(|&&v| v == 0.5).count(), 10);
        assert_eq!(mu.iter().filter(|&&v| v == 0.0).count(), 20);
        assert!(MeanSpec::sparse_ones(10, 1.0).realize(5).is_err());
    }

    #[test]
    fn seeds_are_pure_and_distinct() {
        let policy = SeedPolicy::new(42);
        assert_eq!(derive_seed(policy, 3, 4), derive_seed(policy, 3, 4));
        assert_ne!(derive_seed(policy, 0, 0), derive_seed(policy, 0, 1));
        let seeds: HashSet<u64> = (0..100)
            .flat_map(|rep| (0..100).map(move |split| derive_seed(policy, rep, split)))
            .collect();
        assert_eq!(seeds.len(), 10_000);
    }

    #[test]
    fn normalization_gives_unit_second_moment() {
        let mut x = DataMatrix::new(array![[1.0, 2.0], [3.0, -1.0], [-2.0, 0.5]]).unwrap();
        x.normalize_second_moment();
        for col in x.view().columns() {
            let ms = col.iter().map(|v| v * v).sum::<f64>() / 3.0;
            assert!((ms - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn data_matrix_validation() {
        assert!(DataMatrix::new(Array2::zeros((0, 3))).is_err());
        assert!(DataMatrix::new(array![[1.0, f64::NAN]]).is_err());
        let x = DataMatrix::new(array![[1.0, 2.0], [1.0, 3.0]]).unwrap();
        assert_eq!(x.constant_column(), Some(0));
    }
}
