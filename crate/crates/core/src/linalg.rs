//! Complex matrix aliases and a few helpers shared across modules.

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64 as C64;

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Euclidean norm of every column.
pub fn column_norms(x: &CMat) -> Vec<f64> {
    x.column_iter().map(|c| c.norm()).collect()
}

pub fn is_finite(x: &CMat) -> bool {
    x.iter().all(|v| v.re.is_finite() && v.im.is_finite())
}

/// `(A + A^H) / 2`.
pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()) * C64::new(0.5, 0.0)
}

/// Largest entrywise deviation of `a` from its conjugate transpose.
pub fn hermitian_defect(a: &CMat) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Smallest eigenvalue of the Hermitian part of `a`.
pub fn min_eigenvalue(a: &CMat) -> f64 {
    hermitian_part(a)
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Squared Frobenius norm of `z v^H - r` without forming the outer product.
pub fn outer_deviation_sq(
    z: nalgebra::DVectorView<'_, C64>,
    v: nalgebra::DVectorView<'_, C64>,
    r: &CMat,
    r_fro_sq: f64,
) -> f64 {
    // ||z v^H - R||^2 = ||z||^2 ||v||^2 - 2 Re(z^H R v) + ||R||^2
    let rv = r * v;
    let cross = z.dotc(&rv).re;
    (z.norm_squared() * v.norm_squared() - 2.0 * cross + r_fro_sq).max(0.0)
}
