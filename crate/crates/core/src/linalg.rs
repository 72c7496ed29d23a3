//! Moore–Penrose pseudoinverse and a few small matrix helpers.

use nalgebra::{DMatrix, Matrix3, SMatrix};

/// Singular values below `PINV_RCOND * sigma_max` are treated as zero.
pub const PINV_RCOND: f64 = 1e-8;

/// Moore–Penrose pseudoinverse via SVD, truncating singular values below
/// `1e-8 * sigma_max`. The zero matrix maps to the zero matrix.
pub fn pseudoinverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return DMatrix::zeros(cols, rows);
    }
    let svd = m.clone().svd(true, true);
    let sigma_max = svd.singular_values.max();
    if sigma_max <= 0.0 || !sigma_max.is_finite() {
        return DMatrix::zeros(cols, rows);
    }
    let cutoff = PINV_RCOND * sigma_max;
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let mut out = DMatrix::zeros(cols, rows);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff {
            // out += v_k * u_k^T / s
            out += v_t.row(k).transpose() * u.column(k).transpose() / s;
        }
    }
    out
}

/// Fixed-size front end to [`pseudoinverse`].
pub fn pseudoinverse_fixed<const R: usize, const C: usize>(m: &SMatrix<f64, R, C>) -> SMatrix<f64, C, R> {
    let dynamic = DMatrix::from_column_slice(R, C, m.as_slice());
    let pinv = pseudoinverse(&dynamic);
    SMatrix::<f64, C, R>::from_column_slice(pinv.as_slice())
}

/// Singular values in descending order.
pub fn singular_values<const R: usize, const C: usize>(m: &SMatrix<f64, R, C>) -> Vec<f64> {
    let dynamic = DMatrix::from_column_slice(R, C, m.as_slice());
    let mut s: Vec<f64> = dynamic.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// sigma_min / sigma_max, or 0 for the zero matrix.
pub fn sigma_ratio<const R: usize, const C: usize>(m: &SMatrix<f64, R, C>) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if hi > 0.0 => lo / hi,
        _ => 0.0,
    }
}

/// Largest absolute entry of `R^T R - I`.
pub fn orthonormality_error(r: &Matrix3<f64>) -> f64 {
    (r.transpose() * r - Matrix3::identity()).amax()
}

/// Nearest rotation matrix in the Frobenius sense (polar factor), or `None`
/// if the input is degenerate or a reflection.
pub fn nearest_rotation(m: &Matrix3<f64>) -> Option<Matrix3<f64>> {
    if !m.iter().all(|x| x.is_finite()) {
        return None;
    }
    let svd = m.svd(true, true);
    if svd.singular_values.min() <= 1e-12 * svd.singular_values.max().max(1e-300) {
        return None;
    }
    let r = svd.u? * svd.v_t?;
    if r.determinant() <= 0.0 {
        return None;
    }
    Some(r)
}
