use nalgebra::{DMatrix, SymmetricEigen};
use num_traits::Float;
use serde::Serialize;

use crate::{Error, LinalgScalar, Result, Scalar};

/// Ridge added to both block covariances before whitening.
pub const CCA_RIDGE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CcaResult<T: Scalar> {
    pub first_correlation: T,
    /// A block covariance had (numerically) zero eigenvalues even after
    /// the ridge, or a column was constant.
    pub rank_deficient: bool,
    /// Always true: the model is fitted and evaluated on the same rows.
    pub in_sample: bool,
}

/// Standardizes columns (sample sd). Constant columns become zero and are
/// reported.
fn standardize<T: LinalgScalar>(m: &DMatrix<T>) -> (DMatrix<T>, bool) {
    let n = m.nrows();
    let mut out = m.clone();
    let mut constant = false;
    for c in 0..m.ncols() {
        let mut col = out.column_mut(c);
        let mean = col.iter().copied().sum::<T>() / T::count(n);
        col.iter_mut().for_each(|v| *v -= mean);
        let sd = Float::sqrt(col.iter().map(|v| *v * *v).sum::<T>() / T::count(n - 1));
        if sd > T::zero() {
            col.iter_mut().for_each(|v| *v /= sd);
        } else {
            col.fill(T::zero());
            constant = true;
        }
    }
    (out, constant)
}

/// Inverse square root of a symmetric positive-definite matrix, plus
/// whether its spectrum looked singular.
fn inv_sqrt<T: LinalgScalar>(c: DMatrix<T>) -> (DMatrix<T>, bool) {
    let eig = SymmetricEigen::new(c);
    let max = eig.eigenvalues.iter().copied().fold(T::zero(), Float::max);
    let min = eig.eigenvalues.iter().copied().fold(T::infinity(), Float::min);
    let singular = !(min > T::lit(1e-6) * max);
    let floor = T::lit(CCA_RIDGE);
    let d = eig.eigenvalues.map(|v| T::one() / Float::sqrt(Float::max(v, floor)));
    let v = &eig.eigenvectors;
    (v * DMatrix::from_diagonal(&d) * v.transpose(), singular)
}

/// First canonical correlation between column blocks `x` (`n x p`) and `y`
/// (`n x q`): the largest singular value of
/// `Cxx^{-1/2} Cxy Cyy^{-1/2}` after standardizing columns and adding
/// [`CCA_RIDGE`] to the diagonals of `Cxx` and `Cyy`.
pub fn cca_first<T: LinalgScalar>(x: &DMatrix<T>, y: &DMatrix<T>) -> Result<CcaResult<T>> {
    let n = x.nrows();
    if y.nrows() != n {
        return Err(Error::invalid(format!("CCA blocks have {} and {} rows", n, y.nrows())));
    }
    if x.ncols() == 0 || y.ncols() == 0 {
        return Err(Error::invalid("CCA blocks must have at least one column"));
    }
    if n <= x.ncols().max(y.ncols()) {
        return Err(Error::invalid(format!(
            "CCA needs more rows ({n}) than columns in either block ({}, {})",
            x.ncols(),
            y.ncols()
        )));
    }
    if x.iter().chain(y.iter()).any(|v| !Float::is_finite(*v)) {
        return Err(Error::invalid("CCA inputs must be finite"));
    }
    let (zx, cx) = standardize(x);
    let (zy, cy) = standardize(y);
    let denom = T::count(n - 1);
    let ridge = T::lit(CCA_RIDGE);
    let cxx = zx.tr_mul(&zx) / denom + DMatrix::identity(x.ncols(), x.ncols()) * ridge;
    let cyy = zy.tr_mul(&zy) / denom + DMatrix::identity(y.ncols(), y.ncols()) * ridge;
    let cxy = zx.tr_mul(&zy) / denom;
    let (wx, sx) = inv_sqrt(cxx);
    let (wy, sy) = inv_sqrt(cyy);
    let m = wx * cxy * wy;
    let sv = m.singular_values();
    let first = sv.iter().copied().fold(T::zero(), Float::max);
    Ok(CcaResult {
        first_correlation: Float::min(Float::max(first, T::zero()), T::one()),
        rank_deficient: cx || cy || sx || sy,
        in_sample: true,
    })
}
