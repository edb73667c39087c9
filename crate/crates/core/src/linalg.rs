//! Small symmetric-matrix helpers shared by the covariance and whitening
//! paths: eigendecomposition, determinants, and matrix square roots.
//!
//! Everything here operates on matrices of dimension <= 10, so the dense
//! routines from nalgebra are plenty.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative eigenvalue floor below which a covariance counts as singular.
pub const EIGENVALUE_FLOOR: f64 = 1e-14;

/// Eigendecomposition of a symmetric matrix, eigenvalues sorted descending
/// (deterministic ordering regardless of the backend's internal order).
pub fn sym_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// Determinant of a symmetric matrix as the product of its eigenvalues.
pub fn sym_det(m: &DMatrix<f64>) -> f64 {
    sym_eigen(m).0.iter().product()
}

/// Checks that `m` is numerically symmetric.
pub fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    let scale = m.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-9 * scale {
                return Err(Error::InvalidParameter(format!(
                    "matrix is not symmetric at ({i},{j})"
                )));
            }
        }
    }
    Ok(())
}

/// Eigenvalues of a symmetric matrix that must be PSD within tolerance;
/// errors if any eigenvalue is more negative than `-1e-10 * trace scale`.
pub fn psd_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_symmetric(m)?;
    let (values, _) = sym_eigen(m);
    let scale = m.trace().abs().max(1.0);
    if values.iter().any(|&l| l < -1e-10 * scale) {
        return Err(Error::InvalidParameter(
            "matrix is not positive semidefinite".into(),
        ));
    }
    Ok(values)
}

/// `m^(1/2)` for symmetric PSD `m`, via eigendecomposition. Eigenvalues
/// below the relative floor make the matrix singular.
pub fn sym_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    sym_power(m, 0.5)
}

/// `m^(-1/2)` for symmetric positive definite `m`.
pub fn sym_inv_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    sym_power(m, -0.5)
}

fn sym_power(m: &DMatrix<f64>, pow: f64) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    let (values, vectors) = sym_eigen(m);
    let floor = EIGENVALUE_FLOOR * m.trace().abs().max(1e-300);
    let mut diag = DMatrix::zeros(n, n);
    for (i, &l) in values.iter().enumerate() {
        if l < floor {
            return Err(Error::SingularCovariance(format!(
                "eigenvalue {l:e} below floor {floor:e}"
            )));
        }
        diag[(i, i)] = l.powf(pow);
    }
    Ok(&vectors * diag * vectors.transpose())
}
