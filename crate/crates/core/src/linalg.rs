//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen, SVD};

use crate::error::{numerical, Result};
use crate::scalar::Scalar;

/// Symmetric eigendecomposition with eigenvalues sorted in descending order.
///
/// The input is symmetrized first. Equal eigenvalues keep the solver order.
pub fn sym_eig_desc<T: Scalar>(m: &DMatrix<T>) -> Result<(Vec<T>, DMatrix<T>)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), DMatrix::zeros(0, 0)));
    }
    let half = T::lit(0.5);
    let sym = (m + m.transpose()) * half;
    if sym.iter().any(|v| !v.is_finite()) {
        return Err(numerical!("non-finite entry in symmetric eigenproblem"));
    }
    let eig = SymmetricEigen::try_new(sym, T::eps(), 10_000)
        .ok_or_else(|| numerical!("symmetric eigensolver did not converge"))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Square root and thresholded pseudo-inverse square root of a symmetric
/// positive semidefinite matrix.
pub fn psd_sqrt_pair<T: Scalar>(m: &DMatrix<T>) -> Result<(DMatrix<T>, DMatrix<T>)> {
    let (vals, vecs) = sym_eig_desc(m)?;
    let n = vals.len();
    let top = vals.first().copied().unwrap_or_else(T::zero).max(T::zero());
    let cut = top * T::lit(1e-13);
    let mut root = DVector::zeros(n);
    let mut inv_root = DVector::zeros(n);
    for (i, &v) in vals.iter().enumerate() {
        if v > cut && v > T::zero() {
            let s = v.sqrt();
            root[i] = s;
            inv_root[i] = T::one() / s;
        }
    }
    let sqrt = &vecs * DMatrix::from_diagonal(&root) * vecs.transpose();
    let pinv_sqrt = &vecs * DMatrix::from_diagonal(&inv_root) * vecs.transpose();
    Ok((sqrt, pinv_sqrt))
}

/// Solves `a x = b` for symmetric positive-definite `a`.
///
/// Uses a Cholesky factorization; when the matrix is too ill-conditioned
/// (ratio of extreme eigenvalues above `1e10`) falls back to a thresholded
/// eigen pseudo-inverse. A numerically singular matrix is an error.
pub fn solve_spd<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> Result<DMatrix<T>> {
    if let Some(chol) = a.clone().cholesky() {
        let l = chol.l_dirty();
        let diag = (0..l.nrows()).map(|i| l[(i, i)]);
        let (lo, hi) = diag.fold((T::max_value().unwrap(), T::zero()), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
        // squared diagonal ratio bounds the reciprocal condition number from above
        if hi > T::zero() && (lo / hi) * (lo / hi) >= T::lit(1e-8) {
            return Ok(chol.solve(b));
        }
    }
    let (vals, vecs) = sym_eig_desc(a)?;
    let top = vals.first().copied().unwrap_or_else(T::zero);
    let bottom = vals.last().copied().unwrap_or_else(T::zero);
    if top <= T::zero() {
        return Err(numerical!("matrix is not positive definite"));
    }
    let rank_cut = top * T::eps() * T::from_usize_lossy(a.nrows().max(1)) * T::lit(10.0);
    if bottom <= rank_cut {
        return Err(numerical!(
            "matrix is numerically singular (eigenvalue ratio {:e})",
            (bottom / top).as_f64()
        ));
    }
    if bottom / top >= T::lit(1e-10) {
        if let Some(chol) = a.clone().cholesky() {
            return Ok(chol.solve(b));
        }
    }
    let inv_vals = DVector::from_iterator(vals.len(), vals.iter().map(|&v| T::one() / v));
    let inv = &vecs * DMatrix::from_diagonal(&inv_vals) * vecs.transpose();
    Ok(inv * b)
}

/// Least-squares coefficients `(xᵀx)⁻¹ xᵀ y` via the normal equations.
pub fn least_squares<T: Scalar>(x: &DMatrix<T>, y: &DMatrix<T>) -> Result<DMatrix<T>> {
    if x.nrows() != y.nrows() {
        return Err(crate::error::shape!(
            "regressor rows {} vs response rows {}",
            x.nrows(),
            y.nrows()
        ));
    }
    let xtx = x.transpose() * x;
    let xty = x.transpose() * y;
    solve_spd(&xtx, &xty).map_err(|e| numerical!("singular regressor cross-product: {e}"))
}

/// Largest singular value.
pub fn spectral_norm<T: Scalar>(m: &DMatrix<T>) -> T {
    if m.is_empty() {
        return T::zero();
    }
    match SVD::try_new(m.clone(), false, false, T::eps(), 10_000) {
        Some(svd) => svd.singular_values.max(),
        None => (m.transpose() * m).symmetric_eigenvalues().max().max(T::zero()).sqrt(),
    }
}

/// Largest eigenvalue modulus of a square (not necessarily symmetric) matrix.
///
/// Falls back to Gelfand's formula `‖M^k‖^{1/k}` with `k = 2^40` when the
/// Schur iteration does not converge.
pub fn spectral_radius<T: Scalar>(m: &DMatrix<T>) -> T {
    if m.is_empty() {
        return T::zero();
    }
    if m.iter().any(|v| !v.is_finite()) {
        return T::lit(f64::NAN);
    }
    for eps in [T::eps(), T::eps() * T::lit(1e4)] {
        if let Some(schur) = Schur::try_new(m.clone(), eps, 10_000) {
            return schur
                .complex_eigenvalues()
                .iter()
                .map(|z| (z.re * z.re + z.im * z.im).sqrt())
                .fold(T::zero(), |a, b| a.max(b));
        }
    }
    gelfand_radius(m)
}

fn gelfand_radius<T: Scalar>(m: &DMatrix<T>) -> T {
    let mut log_scale = T::zero();
    let mut p = m.clone();
    let mut k = T::one();
    for _ in 0..40 {
        let n = p.norm();
        if n == T::zero() {
            return T::zero();
        }
        p /= n;
        log_scale += n.ln() / k;
        p = &p * &p;
        k *= T::lit(2.0);
    }
    (log_scale + p.norm().ln() / k).exp()
}

/// Companion matrix of a VAR(p) with `d×d` coefficient blocks.
pub fn companion<T: Scalar>(blocks: &[DMatrix<T>]) -> DMatrix<T> {
    let p = blocks.len();
    if p == 0 {
        return DMatrix::zeros(0, 0);
    }
    let d = blocks[0].nrows();
    let mut c = DMatrix::zeros(p * d, p * d);
    for (i, b) in blocks.iter().enumerate() {
        c.view_mut((0, i * d), (d, d)).copy_from(b);
    }
    for i in 1..p {
        for r in 0..d {
            c[(i * d + r, (i - 1) * d + r)] = T::one();
        }
    }
    c
}
