//! Small dense linear-algebra helpers. Problem sizes here are modest (the
//! largest dense factorization is p x p with p in the low thousands), so
//! straightforward row-major loops are adequate.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::{Error, Result};

/// Checks `a` is square and symmetric up to `tol` relative to its max entry.
pub fn check_symmetric(a: ArrayView2<f64>, tol: f64) -> Result<()> {
    let (rows, cols) = a.dim();
    if rows != cols {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {rows}x{cols}"
        )));
    }
    let scale = max_abs(a).max(1.0);
    for i in 0..rows {
        for j in (i + 1)..cols {
            let (x, y) = (a[[i, j]], a[[j, i]]);
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::NonFinite(format!("matrix entry ({i}, {j})")));
            }
            if (x - y).abs() > tol * scale {
                return Err(Error::NotSymmetric { row: i, col: j });
            }
        }
    }
    Ok(())
}

pub fn max_abs(a: ArrayView2<f64>) -> f64 {
    a.iter().fold(0.0_f64, |m, &x| m.max(x.abs()))
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
///
/// Only the lower triangle of `a` is read. Fails with the index of the first
/// non-positive pivot.
pub fn cholesky(a: ArrayView2<f64>) -> Result<Array2<f64>> {
    let p = a.nrows();
    if a.ncols() != p {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            p,
            a.ncols()
        )));
    }
    let mut l = Array2::<f64>::zeros((p, p));
    for j in 0..p {
        let mut d = a[[j, j]];
        for k in 0..j {
            d -= l[[j, k]] * l[[j, k]];
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { pivot: j, value: d });
        }
        let djj = d.sqrt();
        l[[j, j]] = djj;
        for i in (j + 1)..p {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = s / djj;
        }
    }
    Ok(l)
}

/// Solves `L L^T x = b` given the lower factor `L`.
pub fn cholesky_solve(l: ArrayView2<f64>, b: ArrayView1<f64>) -> Array1<f64> {
    let p = l.nrows();
    let mut y = b.to_owned();
    for i in 0..p {
        let mut s = y[i];
        for k in 0..i {
            s -= l[[i, k]] * y[k];
        }
        y[i] = s / l[[i, i]];
    }
    for i in (0..p).rev() {
        let mut s = y[i];
        for k in (i + 1)..p {
            s -= l[[k, i]] * y[k];
        }
        y[i] = s / l[[i, i]];
    }
    y
}

pub fn column_means(x: ArrayView2<f64>) -> Array1<f64> {
    x.mean_axis(Axis(0))
        .unwrap_or_else(|| Array1::zeros(x.ncols()))
}

/// Returns `x` with column means removed.
pub fn center(x: ArrayView2<f64>) -> Array2<f64> {
    let means = column_means(x);
    &x - &means.insert_axis(Axis(0))
}

/// Unbiased sample covariance `X_c^T X_c / (n - 1)`.
pub fn sample_covariance(x: ArrayView2<f64>) -> Array2<f64> {
    let n = x.nrows();
    let xc = center(x);
    xc.t().dot(&xc) / (n as f64 - 1.0)
}

/// Mean and unbiased variance of a slice.
pub fn mean_var(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    (mean, ss / (n - 1.0))
}
