//! Small dense helpers for symmetric matrices.
//!
//! Every matrix function here goes through the symmetric eigendecomposition,
//! so results stay exactly symmetric and spectra are explicit.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Eigenvalues below this floor (relative to 1) are treated as a conditioning failure.
pub const EIGEN_FLOOR: f64 = 1e-14;

pub fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Symmetric eigendecomposition with eigenvalues sorted in descending order.
pub fn sym_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(symmetrize(m));
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// Descending eigenvalues of a symmetric matrix.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> DVector<f64> {
    sym_eigen(m).0
}

/// Applies a scalar function to the spectrum: `V f(Λ) Vᵀ`.
pub fn sym_apply(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let (values, vectors) = sym_eigen(m);
    let mapped = DVector::from_iterator(values.len(), values.iter().map(|&v| f(v)));
    let scaled = &vectors * DMatrix::from_diagonal(&mapped);
    symmetrize(&(scaled * vectors.transpose()))
}

pub fn sym_exp(m: &DMatrix<f64>) -> DMatrix<f64> {
    sym_apply(m, f64::exp)
}

/// Matrix logarithm of an SPD matrix.
pub fn spd_log(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_spectrum(m)?;
    Ok(sym_apply(m, f64::ln))
}

/// `(M^{1/2}, M^{-1/2})` for an SPD matrix, guarded by [`EIGEN_FLOOR`].
pub fn spd_sqrt_pair(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let (values, vectors) = sym_eigen(m);
    let smallest = values[values.len() - 1];
    if smallest <= EIGEN_FLOOR * values[0].abs().max(1.0) {
        return Err(Error::IllConditioned(smallest));
    }
    let build = |f: &dyn Fn(f64) -> f64| {
        let d = DVector::from_iterator(values.len(), values.iter().map(|&v| f(v)));
        symmetrize(&(&vectors * DMatrix::from_diagonal(&d) * vectors.transpose()))
    };
    Ok((build(&f64::sqrt), build(&|v: f64| 1.0 / v.sqrt())))
}

fn check_spectrum(m: &DMatrix<f64>) -> Result<()> {
    let values = sym_eigenvalues(m);
    let smallest = values[values.len() - 1];
    if !smallest.is_finite() {
        return Err(Error::NonFinite("eigendecomposition"));
    }
    if smallest <= 0.0 {
        return Err(Error::NotPositiveDefinite(smallest));
    }
    Ok(())
}

/// Inverse of an SPD matrix through its Cholesky factor.
pub fn spd_inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let chol = nalgebra::Cholesky::new(symmetrize(m)).ok_or_else(|| {
        let values = sym_eigenvalues(m);
        Error::NotPositiveDefinite(values[values.len() - 1])
    })?;
    Ok(symmetrize(&chol.inverse()))
}

pub fn frobenius(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `Σ_ij a_ij b_ij`.
pub fn contract(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Orthonormal basis of traceless symmetric n×n matrices under the Frobenius
/// inner product: n−1 diagonal (Helmert) vectors followed by the off-diagonal
/// pairs `(E_ij + E_ji)/√2`, i < j.
pub fn traceless_symmetric_basis(n: usize) -> Vec<DMatrix<f64>> {
    let mut basis = Vec::with_capacity(n * (n + 1) / 2 - 1);
    for k in 1..n {
        let norm = ((k * (k + 1)) as f64).sqrt();
        let mut e = DMatrix::zeros(n, n);
        for i in 0..k {
            e[(i, i)] = 1.0 / norm;
        }
        e[(k, k)] = -(k as f64) / norm;
        basis.push(e);
    }
    let off = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        for j in (i + 1)..n {
            let mut e = DMatrix::zeros(n, n);
            e[(i, j)] = off;
            e[(j, i)] = off;
            basis.push(e);
        }
    }
    basis
}
