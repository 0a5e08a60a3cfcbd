//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::{Error, Result};

/// Relative eigenvalue floor below which a metric counts as rank deficient.
pub const RANK_TOL: f64 = 1e-10;

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn quad_form(v: &DVector<f64>, m: &DMatrix<f64>) -> f64 {
    (v.transpose() * m * v)[(0, 0)]
}

/// Inverse of a symmetric positive-definite matrix via Cholesky.
pub fn spd_inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let chol = m
        .clone()
        .cholesky()
        .ok_or(Error::Singular("Cholesky factorization failed"))?;
    Ok(symmetrize(&chol.inverse()))
}

/// Solve `m x = b` for symmetric positive-definite `m`.
pub fn spd_solve(m: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let chol = m
        .clone()
        .cholesky()
        .ok_or(Error::Singular("Cholesky factorization failed"))?;
    Ok(chol.solve(b))
}

/// General solve via LU; used for non-symmetric Jacobians.
pub fn lu_solve(m: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    m.clone()
        .lu()
        .solve(b)
        .filter(|x| x.iter().all(|v| v.is_finite()))
        .ok_or(Error::Singular("LU solve failed"))
}

/// Extreme eigenvalues `(min, max)` of a symmetric matrix.
pub fn eigen_extremes(m: &DMatrix<f64>) -> (f64, f64) {
    let eig = SymmetricEigen::new(symmetrize(m));
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let max = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (min, max)
}

pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let (min, max) = eigen_extremes(m);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// `true` when the smallest eigenvalue is below `RANK_TOL` times the largest.
pub fn is_rank_deficient(m: &DMatrix<f64>) -> bool {
    let (min, max) = eigen_extremes(m);
    !(min > RANK_TOL * max.abs())
}

/// Full QR of a tall `k × q` matrix: returns the complete orthogonal `k × k`
/// factor `(Q | N)` and the leading `q × q` triangular block `R`.
pub fn full_qr(y: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let (k, q) = y.shape();
    let mut aug = DMatrix::zeros(k, q + k);
    aug.view_mut((0, 0), (k, q)).copy_from(y);
    aug.view_mut((0, q), (k, k)).fill_with_identity();
    let qr = aug.qr();
    let qfull = qr.q();
    let r = qr.r().view((0, 0), (q, q)).into_owned();
    (qfull, r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_qr_reconstructs_and_completes_basis() {
        let y = DMatrix::from_row_slice(4, 2, &[1.0, 2.0, 0.5, -1.0, 3.0, 0.0, 1.0, 1.0]);
        let (q, r) = full_qr(&y);
        assert_eq!(q.shape(), (4, 4));
        let qtq = q.transpose() * &q;
        assert!((qtq - DMatrix::identity(4, 4)).abs().max() < 1e-12);
        let recon = q.columns(0, 2) * &r;
        assert!((recon - &y).abs().max() < 1e-12);
        let normal = q.columns(2, 2);
        assert!((normal.transpose() * &y).abs().max() < 1e-12);
    }

    #[test]
    fn spd_inverse_and_rank() {
        let m = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let inv = spd_inverse(&m).unwrap();
        assert!((&m * inv - DMatrix::identity(2, 2)).abs().max() < 1e-14);
        assert!(!is_rank_deficient(&m));
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(is_rank_deficient(&s));
        assert!(spd_inverse(&DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0])).is_err());
    }
}
