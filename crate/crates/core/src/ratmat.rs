//! Rational transfer-function matrices.
//!
//! No symbolic pole/zero cancellation is attempted. Identities between
//! rational functions are checked by evaluating at seeded random complex
//! probe points, and closed-form frequency-domain objects are evaluated
//! pointwise instead of being materialized.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::poly::Poly;

/// A single polynomial fraction `num / den`, with `den` monic.
#[derive(Debug, Clone, PartialEq)]
pub struct Ratio {
    num: Poly,
    den: Poly,
}

/// Serialized form of a fraction: ascending coefficient arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioSpec {
    pub num: Vec<f64>,
    pub den: Vec<f64>,
}

/// Common multiple of two monic denominators without a GCD: equal
/// denominators and exact divisibility are detected, otherwise the product
/// is used. Returns `(lcm, lcm / a, lcm / b)`.
pub fn common_denominator(a: &Poly, b: &Poly) -> (Poly, Poly, Poly) {
    if a.approx_eq(b, 1e-12) {
        return (a.clone(), Poly::one(), Poly::one());
    }
    if b.degree() >= a.degree() {
        if let Some(q) = b.divisible_by(a) {
            return (b.clone(), q, Poly::one());
        }
    } else if let Some(q) = a.divisible_by(b) {
        return (a.clone(), Poly::one(), q);
    }
    (a.mul(b), b.clone(), a.clone())
}

impl Ratio {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        if num.is_zero() {
            return Ok(Ratio::zero());
        }
        let (den, lead) = den.monic();
        Ok(Ratio { num: num.scale(1.0 / lead), den })
    }

    pub fn from_coeffs(num: &[f64], den: &[f64]) -> Result<Self> {
        Ratio::new(Poly::new(num.to_vec()), Poly::new(den.to_vec()))
    }

    pub fn zero() -> Self {
        Ratio { num: Poly::zero(), den: Poly::one() }
    }

    pub fn constant(c: f64) -> Self {
        Ratio { num: Poly::constant(c), den: Poly::one() }
    }

    pub fn poly(p: Poly) -> Self {
        Ratio { num: p, den: Poly::one() }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// `deg den − deg num`; `None` for the zero fraction.
    pub fn relative_degree(&self) -> Option<i64> {
        let n = self.num.degree()? as i64;
        Some(self.den.degree().unwrap_or(0) as i64 - n)
    }

    pub fn eval(&self, s: Complex64) -> Option<Complex64> {
        let d = self.den.eval_complex(s);
        let scale = 1.0 + self.den.max_abs() * (1.0 + s.norm()).powi(self.den.degree().unwrap_or(0) as i32);
        if d.norm() <= 1e-12 * scale {
            return None;
        }
        Some(self.num.eval_complex(s) / d)
    }

    pub fn add(&self, other: &Ratio) -> Ratio {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let (den, qa, qb) = common_denominator(&self.den, &other.den);
        let num = self.num.mul(&qa).add(&other.num.mul(&qb));
        Ratio::new(num, den).expect("common denominator is nonzero")
    }

    pub fn neg(&self) -> Ratio {
        Ratio { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, other: &Ratio) -> Ratio {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Ratio) -> Ratio {
        if self.is_zero() || other.is_zero() {
            return Ratio::zero();
        }
        // Cancel a denominator against the other factor's numerator when it
        // divides exactly; keeps degrees down in products like s·(1/s).
        let mut num_a = self.num.clone();
        let mut num_b = other.num.clone();
        let mut den_a = self.den.clone();
        let mut den_b = other.den.clone();
        if den_b.degree() > Some(0) {
            if let Some(q) = num_a.divisible_by(&den_b) {
                num_a = q;
                den_b = Poly::one();
            }
        }
        if den_a.degree() > Some(0) {
            if let Some(q) = num_b.divisible_by(&den_a) {
                num_b = q;
                den_a = Poly::one();
            }
        }
        Ratio::new(num_a.mul(&num_b), den_a.mul(&den_b)).expect("product denominator is nonzero")
    }

    pub fn scale(&self, k: f64) -> Ratio {
        if k == 0.0 {
            return Ratio::zero();
        }
        Ratio { num: self.num.scale(k), den: self.den.clone() }
    }

    /// Multiplies by `s`.
    pub fn mul_s(&self) -> Ratio {
        self.mul(&Ratio::poly(Poly::s()))
    }

    /// Divides by `s`.
    pub fn div_s(&self) -> Ratio {
        if self.is_zero() {
            return Ratio::zero();
        }
        if self.num.coeff(0) == 0.0 {
            let shifted = Poly::new(self.num.coeffs()[1..].to_vec());
            return Ratio { num: shifted, den: self.den.clone() };
        }
        Ratio { num: self.num.clone(), den: self.den.mul(&Poly::s()) }
    }

    /// Limit at infinity for a proper fraction.
    pub fn limit(&self) -> Option<f64> {
        match self.relative_degree() {
            None => Some(0.0),
            Some(r) if r > 0 => Some(0.0),
            Some(0) => Some(self.num.leading()),
            _ => None,
        }
    }

    /// Strictly proper remainder `num/den − limit`.
    pub fn strictly_proper_part(&self) -> Option<Ratio> {
        let lim = self.limit()?;
        if lim == 0.0 {
            return Some(self.clone());
        }
        let num = self.num.sub(&self.den.scale(lim));
        Some(Ratio::new(num, self.den.clone()).expect("nonzero den"))
    }

    /// Markov coefficients `h_k` of the expansion `Σ h_k s^{-(k+1)}` of a
    /// strictly proper fraction.
    pub fn markov(&self, count: usize) -> Vec<f64> {
        let nd = self.den.degree().unwrap_or(0);
        let mut h = Vec::with_capacity(count);
        for k in 0..count {
            let target = if nd > k { self.num.coeff(nd - 1 - k) } else { 0.0 };
            let lo = nd.saturating_sub(k);
            let acc: f64 = (lo..nd)
                .map(|i| self.den.coeff(i) * h[i + k - nd])
                .sum();
            h.push(target - acc);
        }
        h
    }

    pub fn to_spec(&self) -> RatioSpec {
        RatioSpec { num: self.num.coeffs().to_vec(), den: self.den.coeffs().to_vec() }
    }
}

impl TryFrom<&RatioSpec> for Ratio {
    type Error = Error;
    fn try_from(s: &RatioSpec) -> Result<Self> {
        Ratio::from_coeffs(&s.num, &s.den)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Properness {
    Improper,
    Proper,
    StrictlyProper,
}

impl Properness {
    fn name(self) -> &'static str {
        match self {
            Properness::Improper => "improper",
            Properness::Proper => "proper",
            Properness::StrictlyProper => "strictly proper",
        }
    }
}

#[derive(Debug, Clone)]
pub struct PropernessClass {
    pub kind: Properness,
    /// `lim_{s→∞} G(s)`; absent when improper.
    pub limit: Option<DMatrix<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Ratio>,
}

impl RationalMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Ratio>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} rational matrix",
                entries.len()
            )));
        }
        Ok(RationalMatrix { rows, cols, entries })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Ratio) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        RationalMatrix { rows, cols, entries }
    }

    pub fn from_specs(rows: &[Vec<RatioSpec>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rational matrix rows".into()));
        }
        let entries = rows
            .iter()
            .flatten()
            .map(Ratio::try_from)
            .collect::<Result<Vec<_>>>()?;
        RationalMatrix::new(r, c, entries)
    }

    pub fn to_specs(&self) -> Vec<Vec<RatioSpec>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).to_spec()).collect())
            .collect()
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix::from_fn(rows, cols, |_, _| Ratio::zero())
    }

    pub fn identity(n: usize) -> Self {
        RationalMatrix::constant(&DMatrix::identity(n, n))
    }

    pub fn constant(m: &DMatrix<f64>) -> Self {
        RationalMatrix::from_fn(m.nrows(), m.ncols(), |i, j| Ratio::constant(m[(i, j)]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Ratio {
        &self.entries[i * self.cols + j]
    }

    pub fn entries(&self) -> &[Ratio] {
        &self.entries
    }

    /// Entrywise evaluation at `s0`.
    pub fn eval(&self, s0: Complex64) -> Result<CMatrix> {
        let mut out = CMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self
                    .get(i, j)
                    .eval(s0)
                    .ok_or(Error::PoleAtPoint { row: i, col: j })?;
            }
        }
        Ok(out)
    }

    pub fn has_pole_near(&self, s0: Complex64) -> bool {
        self.entries.iter().any(|r| r.eval(s0).is_none())
    }

    pub fn classify(&self) -> PropernessClass {
        let mut limit = DMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                match self.get(i, j).limit() {
                    Some(v) => limit[(i, j)] = v,
                    None => return PropernessClass { kind: Properness::Improper, limit: None },
                }
            }
        }
        let kind = if limit.iter().all(|&v| v == 0.0) {
            Properness::StrictlyProper
        } else {
            Properness::Proper
        };
        PropernessClass { kind, limit: Some(limit) }
    }

    pub fn is_strictly_proper(&self) -> bool {
        self.classify().kind == Properness::StrictlyProper
    }

    fn require(&self, want: Properness) -> Result<()> {
        let found = self.classify().kind;
        let ok = match want {
            Properness::StrictlyProper => found == Properness::StrictlyProper,
            Properness::Proper => found != Properness::Improper,
            Properness::Improper => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Properness { expected: want.name(), found: found.name() })
        }
    }

    /// Markov parameters `Φ^{(0)}(0), …, Φ^{(count−1)}(0)` of a strictly
    /// proper matrix, by long division of every entry.
    pub fn markov(&self, count: usize) -> Result<Vec<DMatrix<f64>>> {
        self.require(Properness::StrictlyProper)?;
        let series: Vec<Vec<f64>> = self.entries.iter().map(|r| r.markov(count)).collect();
        Ok((0..count)
            .map(|k| DMatrix::from_fn(self.rows, self.cols, |i, j| series[i * self.cols + j][k]))
            .collect())
    }

    /// Leading Markov parameter.
    pub fn first_markov(&self) -> Result<DMatrix<f64>> {
        Ok(self.markov(1)?.remove(0))
    }

    /// Relative degree one: the leading Markov parameter has full rank.
    pub fn relative_degree_one(&self) -> Result<bool> {
        Ok(linalg::has_full_rank(&self.first_markov()?))
    }

    pub fn transpose(&self) -> RationalMatrix {
        RationalMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn add(&self, other: &RationalMatrix) -> Result<RationalMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "add {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(RationalMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).add(other.get(i, j))))
    }

    pub fn sub(&self, other: &RationalMatrix) -> Result<RationalMatrix> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> RationalMatrix {
        RationalMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).neg())
    }

    pub fn mul(&self, other: &RationalMatrix) -> Result<RationalMatrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(RationalMatrix::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).fold(Ratio::zero(), |acc, k| acc.add(&self.get(i, k).mul(other.get(k, j))))
        }))
    }

    pub fn mul_s(&self) -> RationalMatrix {
        RationalMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).mul_s())
    }

    pub fn div_s(&self) -> RationalMatrix {
        RationalMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).div_s())
    }

    /// Subtracts the constant limit, leaving the strictly proper part.
    pub fn strictly_proper_part(&self) -> Result<RationalMatrix> {
        self.require(Properness::Proper)?;
        Ok(RationalMatrix::from_fn(self.rows, self.cols, |i, j| {
            self.get(i, j).strictly_proper_part().expect("proper entry")
        }))
    }

    pub fn select_columns(&self, cols: &[usize]) -> RationalMatrix {
        RationalMatrix::from_fn(self.rows, cols.len(), |i, j| self.get(i, cols[j]).clone())
    }

    pub fn select_rows(&self, rows: &[usize]) -> RationalMatrix {
        RationalMatrix::from_fn(rows.len(), self.cols, |i, j| self.get(rows[i], j).clone())
    }

    /// Horizontal concatenation `[self other]`.
    pub fn hcat(&self, other: &RationalMatrix) -> Result<RationalMatrix> {
        if self.rows != other.rows {
            return Err(Error::Dimension("hcat row mismatch".into()));
        }
        Ok(RationalMatrix::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.get(i, j).clone()
            } else {
                other.get(i, j - self.cols).clone()
            }
        }))
    }

    /// Whether the determinant is not identically zero, judged at random
    /// probe points (relative tolerance `1e-8`).
    pub fn is_nonsingular(&self, probes: &mut ProbeSampler) -> Result<bool> {
        if self.rows != self.cols {
            return Err(Error::NotSquare { rows: self.rows, cols: self.cols });
        }
        let points = probes.sample(8, &[self])?;
        for s0 in points {
            if linalg::cdet_nonzero(&self.eval(s0)?, 1e-8) {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// `a(s0)^{-1} · rhs(s0)` by a linear solve.
    pub fn solve_pointwise(a: &RationalMatrix, rhs: &RationalMatrix, s0: Complex64) -> Result<CMatrix> {
        if a.rows != a.cols {
            return Err(Error::NotSquare { rows: a.rows, cols: a.cols });
        }
        linalg::csolve(&a.eval(s0)?, &rhs.eval(s0)?)
    }
}

/// Seeded sampler of probe points in the annulus `0.5 ≤ |s| ≤ 20`, kept
/// away from the real axis and from poles of the given matrices.
#[derive(Debug, Clone)]
pub struct ProbeSampler {
    rng: ChaCha8Rng,
}

pub const PROBE_ATTEMPTS: usize = 64;

impl ProbeSampler {
    pub fn new(seed: u64) -> Self {
        ProbeSampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn next_point(&mut self, avoid: &[&RationalMatrix]) -> Result<Complex64> {
        for _ in 0..PROBE_ATTEMPTS {
            let r = self.rng.random_range(0.5..20.0);
            let theta = self.rng.random_range(0.0..std::f64::consts::TAU);
            let s = Complex64::from_polar(r, theta);
            if s.im.abs() < 0.05 * r {
                continue;
            }
            if avoid.iter().any(|m| m.has_pole_near(s)) {
                continue;
            }
            return Ok(s);
        }
        Err(Error::ProbeExhausted(PROBE_ATTEMPTS))
    }

    pub fn sample(&mut self, count: usize, avoid: &[&RationalMatrix]) -> Result<Vec<Complex64>> {
        (0..count).map(|_| self.next_point(avoid)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::builtin;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn first_order() -> RationalMatrix {
        RationalMatrix::new(1, 1, vec![Ratio::from_coeffs(&[1.0], &[1.0, 1.0]).unwrap()]).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert!((first_order().eval(c(1.0)).unwrap()[(0, 0)] - 0.5).norm() < 1e-15);
        let id = RationalMatrix::identity(3).eval(Complex64::new(0.3, 2.0)).unwrap();
        assert_eq!(id, CMatrix::identity(3, 3));
        let g1 = builtin::example1_g1();
        assert!((g1.eval(c(0.0)).unwrap()[(0, 0)] - c(-0.85)).norm() < 1e-12);
    }

    #[test]
    fn pole_at_point_names_entry() {
        let g = RationalMatrix::new(1, 2, vec![Ratio::constant(1.0), Ratio::from_coeffs(&[1.0], &[1.0, 1.0]).unwrap()]).unwrap();
        assert!(matches!(g.eval(c(-1.0)), Err(Error::PoleAtPoint { row: 0, col: 1 })));
    }

    #[test]
    fn zero_denominator_rejected() {
        assert!(matches!(Ratio::from_coeffs(&[1.0], &[0.0]), Err(Error::ZeroDenominator)));
    }

    #[test]
    fn classification() {
        let cls = first_order().classify();
        assert_eq!(cls.kind, Properness::StrictlyProper);
        assert_eq!(cls.limit.unwrap()[(0, 0)], 0.0);
        let g = RationalMatrix::new(1, 1, vec![Ratio::from_coeffs(&[2.0, 1.0], &[1.0, 1.0]).unwrap()]).unwrap();
        let cls = g.classify();
        assert_eq!(cls.kind, Properness::Proper);
        assert_eq!(cls.limit.unwrap()[(0, 0)], 1.0);
        let imp = RationalMatrix::new(1, 1, vec![Ratio::poly(Poly::s())]).unwrap();
        assert_eq!(imp.classify().kind, Properness::Improper);
        assert_eq!(builtin::example1_g1().classify().kind, Properness::StrictlyProper);
    }

    #[test]
    fn markov_examples() {
        let m = first_order().markov(5).unwrap();
        let vals: Vec<f64> = m.iter().map(|x| x[(0, 0)]).collect();
        assert_eq!(vals, vec![1.0, -1.0, 1.0, -1.0, 1.0]);
        let phi = builtin::example1_g1().first_markov().unwrap();
        let expect = DMatrix::from_row_slice(3, 2, &[1.2, 1.2, 1.11, 1.11, 0.5, 1.22]);
        assert!((phi - expect).amax() < 1e-12);
        let phi2 = builtin::example2_g1().first_markov().unwrap();
        let expect2 = DMatrix::from_row_slice(2, 3, &[1.2, 1.11, 0.5, 1.2, 1.11, 1.22]);
        assert!((phi2 - expect2).amax() < 1e-12);
        let proper = RationalMatrix::constant(&DMatrix::identity(1, 1));
        assert!(matches!(proper.markov(1), Err(Error::Properness { .. })));
    }

    #[test]
    fn markov_matches_large_s_limit() {
        // Independent oracle: s·G(s) at s = 1e8.
        for g in [builtin::example1_g1(), builtin::example2_g1(), builtin::example1_g2()] {
            let phi = g.first_markov().unwrap();
            let s = 1e8;
            let lim = g.eval(c(s)).unwrap().map(|z| z.re * s);
            for (a, b) in phi.iter().zip(lim.iter()) {
                assert!((a - b).abs() <= 1e-4 * (1.0 + a.abs()), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn relative_degree_one_examples() {
        assert!(first_order().relative_degree_one().unwrap());
        let g = RationalMatrix::new(1, 1, vec![Ratio::from_coeffs(&[1.0], &[1.0, 0.0, 1.0]).unwrap()]).unwrap();
        assert!(!g.relative_degree_one().unwrap());
        assert!(builtin::example2_g1().relative_degree_one().unwrap());
    }

    #[test]
    fn algebra_examples() {
        let g = builtin::example1_g1();
        assert_eq!(g.transpose().transpose(), g);
        let gi = g.mul(&RationalMatrix::identity(2)).unwrap();
        let mut probes = ProbeSampler::new(1);
        for s0 in probes.sample(8, &[&g]).unwrap() {
            assert!(linalg::cmax_abs(&(gi.eval(s0).unwrap() - g.eval(s0).unwrap())) < 1e-12);
            let sg = g.mul_s().eval(s0).unwrap();
            let expect = g.eval(s0).unwrap() * s0;
            assert!(linalg::cmax_abs(&(sg - expect)) < 1e-10);
        }
        assert!(g.add(&RationalMatrix::identity(2)).is_err());
    }

    #[test]
    fn sums_reuse_divisible_denominators() {
        let a = Ratio::from_coeffs(&[1.0], &[2.0, 3.0, 1.0]).unwrap();
        let b = Ratio::from_coeffs(&[1.0], &[6.0, 11.0, 6.0, 1.0]).unwrap();
        assert_eq!(a.add(&b).den().degree(), Some(3));
    }

    #[test]
    fn nonsingularity() {
        let mut probes = ProbeSampler::new(2);
        assert!(RationalMatrix::identity(2).is_nonsingular(&mut probes).unwrap());
        let r = |k: f64| Ratio::from_coeffs(&[k], &[1.0, 1.0]).unwrap();
        let rank1 = RationalMatrix::new(2, 2, vec![r(1.0), r(1.0), r(2.0), r(2.0)]).unwrap();
        assert!(!rank1.is_nonsingular(&mut probes).unwrap());
        let g = builtin::example1_g1();
        let gtg = g.transpose().mul(&g).unwrap();
        assert!(gtg.is_nonsingular(&mut probes).unwrap());
    }

    #[test]
    fn pointwise_solve() {
        let s0 = Complex64::new(0.7, 1.3);
        let rhs = builtin::example1_g1();
        let id = RationalMatrix::identity(3);
        let x = RationalMatrix::solve_pointwise(&id, &rhs, s0).unwrap();
        assert!(linalg::cmax_abs(&(x - rhs.eval(s0).unwrap())) < 1e-14);

        let a = RationalMatrix::new(1, 1, vec![Ratio::from_coeffs(&[2.0], &[1.0, 1.0]).unwrap()]).unwrap();
        let b = first_order();
        let x = RationalMatrix::solve_pointwise(&a, &b, c(0.0)).unwrap();
        assert!((x[(0, 0)] - c(0.5)).norm() < 1e-15);

        // Left inverse of G1 applied to G1 is the identity.
        let g = builtin::example1_g1();
        let gt = g.transpose();
        let gtg = gt.mul(&g).unwrap();
        let gtg_g = gt.mul(&g).unwrap();
        let mut probes = ProbeSampler::new(9);
        for s0 in probes.sample(8, &[&g]).unwrap() {
            let x = RationalMatrix::solve_pointwise(&gtg, &gtg_g, s0).unwrap();
            assert!(linalg::cmax_abs(&(x - CMatrix::identity(2, 2))) < 1e-8);
        }
    }

    #[test]
    fn probes_stay_in_annulus_and_are_seeded() {
        let g = builtin::example1_g1();
        let a = ProbeSampler::new(5).sample(16, &[&g]).unwrap();
        let b = ProbeSampler::new(5).sample(16, &[&g]).unwrap();
        assert_eq!(a, b);
        for s in a {
            assert!(s.norm() >= 0.5 && s.norm() <= 20.0);
            assert!(s.im.abs() >= 0.05 * s.norm());
        }
    }

    #[test]
    fn gamma_g1_limit_matches_product_of_limits() {
        let g1 = builtin::example1_g1();
        let gamma = RationalMatrix::constant(&builtin::example1_gamma0()).mul_s();
        let prod = gamma.mul(&g1).unwrap();
        let cls = prod.classify();
        assert_eq!(cls.kind, Properness::Proper);
        let expect = builtin::example1_gamma0() * g1.first_markov().unwrap();
        assert!((cls.limit.clone().unwrap() - &expect).amax() < 1e-12);
        for s in [1e6, 1e8] {
            let v = prod.eval(c(s)).unwrap().map(|z| z.re);
            assert!((v - &expect).amax() < 1e-3);
        }
    }
}
