//! Real-coefficient polynomials and polynomial matrices.
//!
//! Coefficients are stored in ascending degree order. The zero polynomial
//! is the empty coefficient vector, and a nonzero polynomial never stores a
//! zero leading coefficient.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Relative threshold under which a coefficient counts as zero.
pub const ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    /// Builds a polynomial, dropping exact trailing zeros.
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Poly { coeffs };
        p.trim(0.0);
        p
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(1.0)
    }

    pub fn constant(c: f64) -> Self {
        Poly::new(vec![c])
    }

    /// The monomial `s`.
    pub fn s() -> Self {
        Poly::new(vec![0.0, 1.0])
    }

    /// `(s - root)`.
    pub fn linear(root: f64) -> Self {
        Poly::new(vec![-root, 1.0])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> f64 {
        self.coeffs.get(i).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> f64 {
        self.coeffs.last().copied().unwrap_or(0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    fn trim(&mut self, scale: f64) {
        let tol = ZERO_TOL * (1.0 + scale);
        let exact = scale == 0.0;
        while let Some(&c) = self.coeffs.last() {
            if (exact && c == 0.0) || (!exact && c.abs() <= tol) {
                self.coeffs.pop();
            } else {
                break;
            }
        }
    }

    fn trimmed(mut self, scale: f64) -> Self {
        self.trim(scale);
        self
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let c = (0..n).map(|i| self.coeff(i) + other.coeff(i)).collect();
        Poly { coeffs: c }.trimmed(self.max_abs().max(other.max_abs()))
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let c = (0..n).map(|i| self.coeff(i) - other.coeff(i)).collect();
        Poly { coeffs: c }.trimmed(self.max_abs().max(other.max_abs()))
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly { coeffs: c }.trimmed(0.0)
    }

    pub fn scale(&self, k: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn neg(&self) -> Poly {
        self.scale(-1.0)
    }

    /// Multiplies by `s^k`.
    pub fn shift(&self, k: usize) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![0.0; k];
        c.extend_from_slice(&self.coeffs);
        Poly { coeffs: c }
    }

    pub fn pow(&self, k: usize) -> Poly {
        (0..k).fold(Poly::one(), |acc, _| acc.mul(self))
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * i as f64)
                .collect(),
        )
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Rescales so the leading coefficient is one; returns the old leading
    /// coefficient alongside.
    pub fn monic(&self) -> (Poly, f64) {
        let lead = self.leading();
        if lead == 0.0 {
            return (Poly::zero(), 0.0);
        }
        (self.scale(1.0 / lead), lead)
    }

    /// Long division `self = q·d + r` with `deg r < deg d`.
    pub fn div_rem(&self, d: &Poly) -> Result<(Poly, Poly)> {
        let dd = d.degree().ok_or(Error::ZeroDenominator)?;
        let Some(nd) = self.degree() else {
            return Ok((Poly::zero(), Poly::zero()));
        };
        if nd < dd {
            return Ok((Poly::zero(), self.clone()));
        }
        let mut rem = self.coeffs.clone();
        let mut quot = vec![0.0; nd - dd + 1];
        let lead = d.leading();
        for k in (0..=nd - dd).rev() {
            let q = rem[k + dd] / lead;
            quot[k] = q;
            for (j, dc) in d.coeffs.iter().enumerate() {
                rem[k + j] -= q * dc;
            }
            rem[k + dd] = 0.0;
        }
        rem.truncate(dd);
        let scale = self.max_abs();
        Ok((Poly { coeffs: quot }.trimmed(0.0), Poly { coeffs: rem }.trimmed(scale)))
    }

    /// Whether `d` divides `self` up to a relative remainder of `1e-9`.
    pub fn divisible_by(&self, d: &Poly) -> Option<Poly> {
        let (q, r) = self.div_rem(d).ok()?;
        let scale = self.max_abs().max(1e-300);
        if r.max_abs() <= 1e-9 * scale {
            Some(q)
        } else {
            None
        }
    }

    /// Coefficientwise closeness relative to the larger operand.
    pub fn approx_eq(&self, other: &Poly, rel: f64) -> bool {
        if self.degree() != other.degree() {
            return false;
        }
        let scale = self.max_abs().max(other.max_abs()).max(1e-300);
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .all(|(a, b)| (a - b).abs() <= rel * scale)
    }
}

/// Dense row-major matrix of polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Poly>,
}

/// Column degrees and highest-column-degree coefficient matrix.
#[derive(Debug, Clone)]
pub struct ColumnStructure {
    /// `None` marks an identically zero column (degree undefined).
    pub degrees: Vec<Option<usize>>,
    pub leading: DMatrix<f64>,
}

impl PolyMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Poly>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} polynomial matrix",
                entries.len()
            )));
        }
        Ok(PolyMatrix { rows, cols, entries })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Poly) -> Self {
        let entries = (0..rows)
            .flat_map(|i| (0..cols).map(move |j| (i, j)))
            .map(|(i, j)| f(i, j))
            .collect();
        PolyMatrix { rows, cols, entries }
    }

    pub fn constant(m: &DMatrix<f64>) -> Self {
        PolyMatrix::from_fn(m.nrows(), m.ncols(), |i, j| Poly::constant(m[(i, j)]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.entries[i * self.cols + j]
    }

    pub fn eval_complex(&self, z: Complex64) -> linalg::CMatrix {
        linalg::CMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).eval_complex(z))
    }

    pub fn eval(&self, x: f64) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).eval(x))
    }

    pub fn mul(&self, other: &PolyMatrix) -> Result<PolyMatrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(PolyMatrix::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).fold(Poly::zero(), |acc, k| acc.add(&self.get(i, k).mul(other.get(k, j))))
        }))
    }

    pub fn transpose(&self) -> PolyMatrix {
        PolyMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    /// Submatrix with row `r` and column `c` removed.
    pub fn minor(&self, r: usize, c: usize) -> PolyMatrix {
        let entries = (0..self.rows)
            .filter(|&i| i != r)
            .flat_map(|i| (0..self.cols).filter(move |&j| j != c).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j).clone())
            .collect();
        PolyMatrix { rows: self.rows - 1, cols: self.cols - 1, entries }
    }

    /// Determinant. Cofactor expansion for n ≤ 3, fraction-free (Bareiss)
    /// elimination beyond that.
    pub fn det(&self) -> Result<Poly> {
        if self.rows != self.cols {
            return Err(Error::NotSquare { rows: self.rows, cols: self.cols });
        }
        match self.rows {
            0 => Ok(Poly::one()),
            1 => Ok(self.get(0, 0).clone()),
            2 => Ok(self.get(0, 0).mul(self.get(1, 1)).sub(&self.get(0, 1).mul(self.get(1, 0)))),
            3 => Ok(self.det_cofactor()),
            _ => self.det_bareiss(),
        }
    }

    fn det_cofactor(&self) -> Poly {
        if self.rows == 1 {
            return self.get(0, 0).clone();
        }
        (0..self.cols).fold(Poly::zero(), |acc, j| {
            let term = self.get(0, j).mul(&self.minor(0, j).det_cofactor());
            if j % 2 == 0 {
                acc.add(&term)
            } else {
                acc.sub(&term)
            }
        })
    }

    fn det_bareiss(&self) -> Result<Poly> {
        let n = self.rows;
        let mut m: Vec<Vec<Poly>> = (0..n)
            .map(|i| (0..n).map(|j| self.get(i, j).clone()).collect())
            .collect();
        let mut sign = 1.0;
        let mut prev = Poly::one();
        for k in 0..n - 1 {
            if m[k][k].is_zero() {
                match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                    Some(r) => {
                        m.swap(k, r);
                        sign = -sign;
                    }
                    None => return Ok(Poly::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = m[k][k].mul(&m[i][j]).sub(&m[i][k].mul(&m[k][j]));
                    // Sylvester's identity makes this division exact.
                    m[i][j] = num.div_rem(&prev)?.0;
                }
                m[i][k] = Poly::zero();
            }
            prev = m[k][k].clone();
        }
        Ok(m[n - 1][n - 1].scale(sign))
    }

    /// Adjugate (transposed cofactor matrix).
    pub fn adjugate(&self) -> Result<PolyMatrix> {
        if self.rows != self.cols {
            return Err(Error::NotSquare { rows: self.rows, cols: self.cols });
        }
        let n = self.rows;
        if n == 1 {
            return Ok(PolyMatrix::from_fn(1, 1, |_, _| Poly::one()));
        }
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let c = self.minor(j, i).det()?;
                entries.push(if (i + j) % 2 == 0 { c } else { c.neg() });
            }
        }
        PolyMatrix::new(n, n, entries)
    }

    pub fn column_structure(&self) -> ColumnStructure {
        let degrees: Vec<Option<usize>> = (0..self.cols)
            .map(|j| (0..self.rows).filter_map(|i| self.get(i, j).degree()).max())
            .collect();
        let leading = DMatrix::from_fn(self.rows, self.cols, |i, j| match degrees[j] {
            Some(d) => self.get(i, j).coeff(d),
            None => 0.0,
        });
        ColumnStructure { degrees, leading }
    }

    /// Column reducedness: the highest-column-degree coefficient matrix has
    /// full column rank.
    pub fn is_column_reduced(&self) -> Result<bool> {
        let cs = self.column_structure();
        if let Some(j) = cs.degrees.iter().position(Option::is_none) {
            return Err(Error::ZeroColumn(j));
        }
        Ok(linalg::rank(&cs.leading) == self.cols)
    }
}
