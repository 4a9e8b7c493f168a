//! Small dense linear-algebra helpers shared by the rational and
//! time-domain code paths.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Numerical rank with threshold `σ_max · max(rows, cols) · 1e-10`.
pub fn rank(m: &DMatrix<f64>) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    let tol = smax * (m.nrows().max(m.ncols()) as f64) * 1e-10;
    sv.iter().filter(|&&s| s > tol).count()
}

pub fn has_full_rank(m: &DMatrix<f64>) -> bool {
    rank(m) == m.nrows().min(m.ncols())
}

pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    assert!(m.is_square());
    if m.is_empty() {
        return 0.0;
    }
    m.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Induced ∞-norm (max absolute row sum); the matrix norm matching the
/// max-abs vector norm used for signals.
pub fn induced_inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn cmax_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Solves `a · x = b` by LU with a relative pivot check.
pub fn csolve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    if a.nrows() != b.nrows() {
        return Err(Error::Dimension(format!(
            "solve: lhs has {} rows, rhs has {}",
            a.nrows(),
            b.nrows()
        )));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(b.clone());
    }
    let lu = a.clone().lu();
    let u = lu.u();
    let scale = cmax_abs(a);
    let min_pivot = (0..n).map(|i| u[(i, i)].norm()).fold(f64::INFINITY, f64::min);
    if scale == 0.0 || min_pivot <= scale * 1e-13 {
        return Err(Error::SingularAtPoint);
    }
    lu.solve(b).ok_or(Error::SingularAtPoint)
}

/// Real counterpart of [`csolve`].
pub fn rsolve(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(b.clone());
    }
    let lu = a.clone().lu();
    let u = lu.u();
    let scale = a.amax();
    let min_pivot = (0..n).map(|i| u[(i, i)].abs()).fold(f64::INFINITY, f64::min);
    if scale == 0.0 || min_pivot <= scale * 1e-13 {
        return Err(Error::SingularAtPoint);
    }
    lu.solve(b).ok_or(Error::SingularAtPoint)
}

/// Determinant tested against the Hadamard bound: returns true when
/// `|det(m)| > tol · Π‖col‖`.
pub fn cdet_nonzero(m: &CMatrix, tol: f64) -> bool {
    let det = m.clone().determinant();
    let bound: f64 = m.column_iter().map(|c| c.norm()).product();
    bound > 0.0 && det.norm() > tol * bound
}
