//! Thin wrappers over nalgebra's Hermitian eigensolver and SVD.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

/// Eigenvalues in ascending order with matching unit eigenvectors (columns).
pub(crate) fn hermitian_eigen(h: &DMatrix<C64>) -> (Vec<f64>, Vec<DVector<C64>>) {
    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..h.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
    (values, vectors)
}

/// Hermitian part `(A + A^H) / 2`.
pub(crate) fn hermitian_part(a: &DMatrix<C64>) -> DMatrix<C64> {
    (a + a.adjoint()) * C64::new(0.5, 0.0)
}

/// Singular values (descending) and matching right singular vectors.
pub(crate) fn svd_right(a: &DMatrix<C64>) -> (Vec<f64>, Vec<DVector<C64>>) {
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
    let values = order.iter().map(|&i| svd.singular_values[i]).collect();
    let vectors = order.iter().map(|&i| v_t.row(i).adjoint().into_owned()).collect();
    (values, vectors)
}

/// Rotate a vector so its largest coordinate is real and positive.
pub(crate) fn normalize_phase(v: &mut [C64]) {
    let big = v.iter().copied().fold(C64::new(0.0, 0.0), |m, c| if c.norm() > m.norm() { c } else { m });
    if big.norm() > 0.0 {
        let rot = big.conj() / big.norm();
        for c in v.iter_mut() {
            *c *= rot;
        }
    }
}
