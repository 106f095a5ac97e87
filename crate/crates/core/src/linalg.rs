//! Thin wrappers around the dense kernels used throughout the crate.

use faer::{Mat, Side};

/// Dense real matrix, column-major.
pub type Matrix = Mat<f64>;

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors
/// as columns. `None` when the solver does not converge.
pub fn symmetric_eigen(a: &Matrix) -> Option<(Vec<f64>, Matrix)> {
    let evd = a.self_adjoint_eigen(Side::Lower).ok()?;
    let values = evd.S().column_vector().iter().copied().collect();
    Some((values, evd.U().to_owned()))
}

pub fn symmetric_eigenvalues(a: &Matrix) -> Option<Vec<f64>> {
    a.self_adjoint_eigenvalues(Side::Lower).ok()
}

/// Singular values in nonincreasing order.
pub fn singular_values(a: &Matrix) -> Option<Vec<f64>> {
    a.singular_values().ok()
}

pub fn column(a: &Matrix, j: usize) -> Vec<f64> {
    a.col(j).iter().copied().collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn mat_vec(a: &Matrix, v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.nrows()];
    for (j, &vj) in v.iter().enumerate() {
        if vj == 0.0 {
            continue;
        }
        for (o, &aij) in out.iter_mut().zip(a.col(j).iter()) {
            *o += aij * vj;
        }
    }
    out
}

/// Largest absolute entry.
pub fn max_abs(a: &Matrix) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for &x in a.col(j).iter() {
            m = m.max(x.abs());
        }
    }
    m
}

/// Frobenius norm.
pub fn frobenius(a: &Matrix) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for &x in a.col(j).iter() {
            s += x * x;
        }
    }
    s.sqrt()
}

/// Orthonormal basis for the column space of `a` (rank decided by `rel_tol`
/// on the singular values), via the eigenvectors of the Gram matrix.
pub fn orthonormal_range(a: &Matrix, rel_tol: f64) -> Option<Matrix> {
    let n = a.ncols();
    if n == 0 {
        return Some(Matrix::zeros(a.nrows(), 0));
    }
    let gram = a.transpose() * a;
    let (vals, vecs) = symmetric_eigen(&gram)?;
    let top = vals.iter().copied().fold(0.0f64, f64::max);
    let keep: Vec<usize> = (0..n)
        .rev()
        .filter(|&k| top > 0.0 && vals[k] > rel_tol * rel_tol * top)
        .collect();
    let mut out = Matrix::zeros(a.nrows(), keep.len());
    for (c, &k) in keep.iter().enumerate() {
        let y = column(&vecs, k);
        let mut v = mat_vec(a, &y);
        let nv = norm(&v);
        v.iter_mut().for_each(|x| *x /= nv);
        for (r, x) in v.into_iter().enumerate() {
            out[(r, c)] = x;
        }
    }
    Some(out)
}
