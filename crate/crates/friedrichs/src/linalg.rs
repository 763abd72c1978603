//! Thin helpers over dense complex linear algebra.
//!
//! Everything here operates on small matrices (the reduced dimension `n`, the
//! multiplicity `m`, or the discretized block dimension `n + m N`), so the
//! routines favor clarity and deterministic behavior over scale. LAPACK is
//! used through `ndarray-linalg` for the eigen/singular decompositions; the
//! wrappers translate failures into the crate's error taxonomy.

use ndarray::Array2;
use ndarray_linalg::{Determinant, Eig, Eigh, Inverse, SVD, UPLO};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Frobenius norm threshold beyond which an inverse is declared singular.
const SINGULAR_INVERSE_LIMIT: f64 = 1e12;

/// Largest singular value (the operator 2-norm). Zero for empty matrices.
pub fn spectral_norm(a: &Array2<Complex64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let (_, s, _) = a.svd(false, false).expect("SVD of a finite matrix failed");
    s.iter().cloned().fold(0.0, f64::max)
}

/// Frobenius norm.
pub fn fro_norm(a: &Array2<Complex64>) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest entry modulus.
pub fn max_abs_entry(a: &Array2<Complex64>) -> f64 {
    a.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Inverse with an explicit singularity guard.
///
/// Fails with [`Error::SingularResolvent`] either when LAPACK reports a
/// singular factorization or when the computed inverse is so large that the
/// result would be numerical noise. `node` tags which quadrature node (or
/// other context index) triggered the failure.
pub fn inv_checked(a: &Array2<Complex64>, node: usize) -> Result<Array2<Complex64>> {
    let inv = a
        .inv()
        .map_err(|_| Error::SingularResolvent { node })?;
    if !inv.iter().all(|v| v.re.is_finite() && v.im.is_finite())
        || fro_norm(&inv) >= SINGULAR_INVERSE_LIMIT
    {
        return Err(Error::SingularResolvent { node });
    }
    Ok(inv)
}

/// Determinant of a square complex matrix.
pub fn det(a: &Array2<Complex64>) -> Result<Complex64> {
    a.det().map_err(|_| Error::SingularResolvent { node: 0 })
}

/// Eigenvalues of a general complex matrix, sorted by real part then
/// imaginary part so repeated calls produce identical orderings.
pub fn eig_sorted(a: &Array2<Complex64>) -> Result<Vec<Complex64>> {
    if a.is_empty() {
        return Ok(Vec::new());
    }
    let (vals, _) = a
        .eig()
        .map_err(|_| Error::SingularResolvent { node: 0 })?;
    let mut out: Vec<Complex64> = vals.to_vec();
    out.sort_by(|p, q| {
        p.re.partial_cmp(&q.re)
            .unwrap()
            .then(p.im.partial_cmp(&q.im).unwrap())
    });
    Ok(out)
}

/// Ascending real eigenvalues of a Hermitian matrix.
pub fn eigh_ascending(a: &Array2<Complex64>) -> Result<Vec<f64>> {
    let (vals, _) = a
        .eigh(UPLO::Lower)
        .map_err(|_| Error::SingularResolvent { node: 0 })?;
    Ok(vals.to_vec())
}

/// Identity matrix of dimension `n`.
pub fn eye(n: usize) -> Array2<Complex64> {
    Array2::from_diag_elem(n, Complex64::new(1.0, 0.0))
}

/// Symmetric Hausdorff distance between two finite point sets.
///
/// Empty-versus-empty is zero; empty-versus-nonempty is infinite, since one
/// set then contains points arbitrarily far from the other.
pub fn hausdorff_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => return 0.0,
        (true, false) | (false, true) => return f64::INFINITY,
        _ => {}
    }
    let one_sided = |from: &[Complex64], to: &[Complex64]| {
        from.iter()
            .map(|p| to.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_sided(a, b).max(one_sided(b, a))
}
