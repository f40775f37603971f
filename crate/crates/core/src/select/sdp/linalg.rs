//! Dense symmetric eigenvalue helpers backed by faer.

use faer::{Mat, Side};
use nalgebra::DMatrix;

use crate::{Error, Result};

fn to_faer(x: &DMatrix<f64>) -> Mat<f64> {
    Mat::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)])
}

pub(crate) fn symmetrize(mut x: DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (x[(i, j)] + x[(j, i)]);
            x[(i, j)] = v;
            x[(j, i)] = v;
        }
    }
    x
}

/// Eigenvalues (ascending) and eigenvectors (columns) of a symmetric matrix.
pub(crate) fn symmetric_eigen(x: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = x.nrows();
    let eig = to_faer(x)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigendecomposition failed: {e:?}")))?;
    let vals = eig.S().column_vector();
    let vecs = eig.U();
    Ok((
        (0..n).map(|i| vals[i]).collect(),
        DMatrix::from_fn(n, n, |i, j| vecs[(i, j)]),
    ))
}

pub(crate) fn min_eigenvalue(x: &DMatrix<f64>) -> Result<f64> {
    let vals = to_faer(x)
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigendecomposition failed: {e:?}")))?;
    Ok(vals.into_iter().fold(f64::INFINITY, f64::min))
}

/// Projection of a symmetric matrix onto the PSD cone.
///
/// The result is rebuilt from whichever eigenvalue sign has fewer terms:
/// `Q+ L+ Q+^T`, or `W - Q- L- Q-^T`.
pub(crate) fn project_psd(x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = x.nrows();
    let w = to_faer(x);
    let eig = w
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigendecomposition failed: {e:?}")))?;
    let vals = eig.S().column_vector();
    let vecs = eig.U();
    // eigenvalues come in ascending order
    let negative = (0..n).take_while(|&i| vals[i] < 0.0).count();
    let positive = n - negative;
    let out = if positive <= negative {
        let f = Mat::<f64>::from_fn(n, positive, |i, j| {
            vecs[(i, negative + j)] * vals[negative + j].sqrt()
        });
        &f * f.transpose()
    } else {
        let f = Mat::<f64>::from_fn(n, negative, |i, j| vecs[(i, j)] * (-vals[j]).sqrt());
        &w + &f * f.transpose()
    };
    Ok(symmetrize(DMatrix::from_fn(n, n, |i, j| out[(i, j)])))
}
