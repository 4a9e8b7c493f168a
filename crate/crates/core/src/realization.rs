//! State-space realizations of proper rational matrices.
//!
//! Each input column gets a controllable-canonical block built on the
//! column's common denominator. The result is generally not minimal.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::poly::Poly;
use crate::ratmat::{common_denominator, Properness, ProbeSampler, RationalMatrix};
use crate::simulate::{self, Grid, SampledSignal};

const VERIFY_SEED: u64 = 0x5eed_0001;
const VERIFY_PROBES: usize = 8;
const VERIFY_TOL: f64 = 1e-6;

/// `ẋ = Ax + Bu`, `y = Cx + Du`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    d: DMatrix<f64>,
}

impl StateSpace {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>, d: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::NotSquare { rows: a.nrows(), cols: a.ncols() });
        }
        if b.nrows() != n || c.ncols() != n || d.nrows() != c.nrows() || d.ncols() != b.ncols() {
            return Err(Error::Dimension(format!(
                "A {}x{}, B {}x{}, C {}x{}, D {}x{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols(),
                c.nrows(),
                c.ncols(),
                d.nrows(),
                d.ncols()
            )));
        }
        if a.iter().chain(b.iter()).chain(c.iter()).chain(d.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("state-space matrices"));
        }
        Ok(StateSpace { a, b, c, d })
    }

    /// Pure feedthrough with no states.
    pub fn static_gain(d: DMatrix<f64>) -> Self {
        let (q, p) = d.shape();
        StateSpace { a: DMatrix::zeros(0, 0), b: DMatrix::zeros(0, p), c: DMatrix::zeros(q, 0), d }
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn d(&self) -> &DMatrix<f64> {
        &self.d
    }

    /// `C(s0·I − A)^{-1}B + D`.
    pub fn transfer_eval(&self, s0: Complex64) -> Result<CMatrix> {
        let n = self.n();
        let d = linalg::to_complex(&self.d);
        if n == 0 {
            return Ok(d);
        }
        let si_a = CMatrix::identity(n, n) * s0 - linalg::to_complex(&self.a);
        let x = linalg::csolve(&si_a, &linalg::to_complex(&self.b))?;
        Ok(linalg::to_complex(&self.c) * x + d)
    }

    /// `C·A^j·B` for `j = 0..count`.
    pub fn markov(&self, count: usize) -> Vec<DMatrix<f64>> {
        let mut out = Vec::with_capacity(count);
        let mut ab = self.b.clone();
        for _ in 0..count {
            out.push(&self.c * &ab);
            ab = &self.a * ab;
        }
        out
    }

    /// Realization of the inverse system `(A − BD⁻¹C, BD⁻¹, −D⁻¹C, D⁻¹)`.
    pub fn inverse(&self) -> Result<StateSpace> {
        let (q, p) = self.d.shape();
        if q != p {
            return Err(Error::NotSquare { rows: q, cols: p });
        }
        let d_inv = linalg::rsolve(&self.d, &DMatrix::identity(p, p))?;
        let bd = &self.b * &d_inv;
        let dc = &d_inv * &self.c;
        StateSpace::new(&self.a - &bd * &self.c, bd, -dc, d_inv)
    }

    /// `s·G(s)` for a strictly proper `G`: `(A, B, CA, CB)`.
    pub fn times_s(&self) -> Result<StateSpace> {
        if self.d.iter().any(|&v| v != 0.0) {
            return Err(Error::Properness { expected: "strictly proper", found: "proper" });
        }
        StateSpace::new(self.a.clone(), self.b.clone(), &self.c * &self.a, &self.c * &self.b)
    }

    /// Cascade: `next(self(u))`, i.e. transfer `G_next · G_self`.
    pub fn series(&self, next: &StateSpace) -> Result<StateSpace> {
        if self.outputs() != next.inputs() {
            return Err(Error::Dimension(format!(
                "series: {} outputs feed {} inputs",
                self.outputs(),
                next.inputs()
            )));
        }
        let (n1, n2) = (self.n(), next.n());
        let mut a = DMatrix::zeros(n1 + n2, n1 + n2);
        a.view_mut((0, 0), (n1, n1)).copy_from(&self.a);
        a.view_mut((n1, n1), (n2, n2)).copy_from(&next.a);
        a.view_mut((n1, 0), (n2, n1)).copy_from(&(&next.b * &self.c));
        let mut b = DMatrix::zeros(n1 + n2, self.inputs());
        b.view_mut((0, 0), (n1, self.inputs())).copy_from(&self.b);
        b.view_mut((n1, 0), (n2, self.inputs())).copy_from(&(&next.b * &self.d));
        let mut c = DMatrix::zeros(next.outputs(), n1 + n2);
        c.view_mut((0, 0), (next.outputs(), n1)).copy_from(&(&next.d * &self.c));
        c.view_mut((0, n1), (next.outputs(), n2)).copy_from(&next.c);
        StateSpace::new(a, b, c, &next.d * &self.d)
    }

    /// Same dynamics with the feedthrough removed.
    pub fn strictly_proper_part(&self) -> StateSpace {
        StateSpace { d: DMatrix::zeros(self.outputs(), self.inputs()), ..self.clone() }
    }

    /// Keeps the listed input columns.
    pub fn select_inputs(&self, cols: &[usize]) -> StateSpace {
        StateSpace {
            a: self.a.clone(),
            b: self.b.select_columns(cols),
            c: self.c.clone(),
            d: self.d.select_columns(cols),
        }
    }

    /// `C·e^{At}·B` at every grid node, integrated with the same RK4 scheme
    /// as [`simulate::lsim`]. The feedthrough is ignored.
    pub fn impulse_response(&self, grid: Grid) -> Result<Vec<DMatrix<f64>>> {
        let (q, p) = (self.outputs(), self.inputs());
        let mut out = vec![DMatrix::zeros(q, p); grid.nodes];
        if self.n() == 0 {
            return Ok(out);
        }
        let free = self.strictly_proper_part();
        let u = SampledSignal::zeros(grid, p);
        for j in 0..p {
            let x0: Vec<f64> = self.b.column(j).iter().copied().collect();
            let y = simulate::lsim(&free, &u, None, &x0)?;
            for (i, m) in out.iter_mut().enumerate() {
                for r in 0..q {
                    m[(r, j)] = y.get(i, r);
                }
            }
        }
        Ok(out)
    }
}

/// Builds a realization and checks it against `g` at random probes.
pub fn realize(g: &RationalMatrix) -> Result<StateSpace> {
    let class = g.classify();
    let limit = match (class.kind, class.limit) {
        (Properness::Improper, _) | (_, None) => {
            return Err(Error::Properness { expected: "proper", found: "improper" })
        }
        (_, Some(l)) => l,
    };
    let (q, p) = (g.rows(), g.cols());

    // Per-column common denominator and numerators over it.
    let mut blocks = Vec::with_capacity(p);
    for j in 0..p {
        let mut lcd = Poly::one();
        for i in 0..q {
            let r = g.get(i, j);
            if !r.is_zero() {
                lcd = common_denominator(&lcd, r.den()).0;
            }
        }
        let order = lcd.degree().unwrap_or(0);
        let mut resid = DMatrix::zeros(q, order);
        for i in 0..q {
            let r = g.get(i, j);
            if r.is_zero() {
                continue;
            }
            let (factor, _) = lcd.div_rem(r.den())?;
            let num = r.num().mul(&factor).sub(&lcd.scale(limit[(i, j)]));
            for k in 0..order {
                resid[(i, k)] = num.coeff(k);
            }
        }
        blocks.push((lcd, resid));
    }

    let n: usize = blocks.iter().map(|(l, _)| l.degree().unwrap_or(0)).sum();
    let mut a = DMatrix::zeros(n, n);
    let mut b = DMatrix::zeros(n, p);
    let mut c = DMatrix::zeros(q, n);
    let mut off = 0;
    for (j, (lcd, resid)) in blocks.iter().enumerate() {
        let r = lcd.degree().unwrap_or(0);
        if r == 0 {
            continue;
        }
        for k in 0..r - 1 {
            a[(off + k, off + k + 1)] = 1.0;
        }
        for k in 0..r {
            a[(off + r - 1, off + k)] = -lcd.coeff(k);
        }
        b[(off + r - 1, j)] = 1.0;
        c.view_mut((0, off), (q, r)).copy_from(resid);
        off += r;
    }
    let ss = StateSpace::new(a, b, c, limit)?;
    verify(g, &ss)?;
    Ok(ss)
}

fn verify(g: &RationalMatrix, ss: &StateSpace) -> Result<()> {
    let mut probes = ProbeSampler::new(VERIFY_SEED);
    let mut worst = 0.0f64;
    for s0 in probes.sample(VERIFY_PROBES, &[g])? {
        let want = g.eval(s0)?;
        let got = ss.transfer_eval(s0)?;
        let err = linalg::cmax_abs(&(&got - &want)) / (1.0 + linalg::cmax_abs(&want));
        worst = worst.max(err);
    }
    if worst > VERIFY_TOL {
        return Err(Error::RealizationMismatch(worst));
    }
    Ok(())
}

pub fn markov_from_ss(ss: &StateSpace, count: usize) -> Vec<DMatrix<f64>> {
    ss.markov(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratmat::Ratio;
    use crate::scenario::builtin;

    fn first_order() -> RationalMatrix {
        RationalMatrix::new(1, 1, vec![Ratio::from_coeffs(&[1.0], &[1.0, 1.0]).unwrap()]).unwrap()
    }

    #[test]
    fn first_order_realization() {
        let ss = realize(&first_order()).unwrap();
        assert_eq!(ss.n(), 1);
        assert_eq!(ss.a()[(0, 0)], -1.0);
        assert_eq!(ss.b()[(0, 0)], 1.0);
        assert_eq!(ss.c()[(0, 0)], 1.0);
        assert_eq!(ss.d()[(0, 0)], 0.0);
    }

    #[test]
    fn static_matrix_has_no_states() {
        let k = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let ss = realize(&RationalMatrix::constant(&k)).unwrap();
        assert_eq!(ss.n(), 0);
        assert_eq!(ss.d(), &k);
    }

    #[test]
    fn improper_rejected() {
        let g = RationalMatrix::new(1, 1, vec![Ratio::from_coeffs(&[0.0, 0.0, 1.0], &[1.0, 1.0]).unwrap()]).unwrap();
        assert!(matches!(realize(&g), Err(Error::Properness { .. })));
    }

    #[test]
    fn markov_cross_oracle() {
        for g in [builtin::example1_g1(), builtin::example2_g1(), builtin::example1_g2(), builtin::example2_g2()] {
            let ss = realize(&g).unwrap();
            let from_ss = markov_from_ss(&ss, 6);
            let from_div = g.markov(6).unwrap();
            for (x, y) in from_ss.iter().zip(&from_div) {
                let scale = 1.0 + y.amax();
                assert!((x - y).amax() <= 1e-8 * scale);
            }
        }
        let ss = realize(&builtin::example1_g1()).unwrap();
        let cb = ss.c() * ss.b();
        assert!((cb - builtin::example1_g1().first_markov().unwrap()).amax() <= 1e-9);
    }

    #[test]
    fn scalar_integrator_markov() {
        let ss = StateSpace::new(
            DMatrix::zeros(1, 1),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::zeros(1, 1),
        )
        .unwrap();
        let m: Vec<f64> = markov_from_ss(&ss, 4).iter().map(|x| x[(0, 0)]).collect();
        assert_eq!(m, vec![1.0, 0.0, 0.0, 0.0]);
        let m: Vec<f64> = markov_from_ss(&realize(&first_order()).unwrap(), 4).iter().map(|x| x[(0, 0)]).collect();
        assert_eq!(m, vec![1.0, -1.0, 1.0, -1.0]);
    }

    #[test]
    fn proper_realization_matches_at_probes() {
        let g = RationalMatrix::new(
            2,
            2,
            vec![
                Ratio::from_coeffs(&[2.0, 1.0], &[1.0, 1.0]).unwrap(),
                Ratio::from_coeffs(&[1.0], &[2.0, 3.0, 1.0]).unwrap(),
                Ratio::zero(),
                Ratio::from_coeffs(&[0.0, 3.0], &[5.0, 1.0]).unwrap(),
            ],
        )
        .unwrap();
        let ss = realize(&g).unwrap();
        let mut probes = ProbeSampler::new(11);
        for s0 in probes.sample(8, &[&g]).unwrap() {
            let diff = ss.transfer_eval(s0).unwrap() - g.eval(s0).unwrap();
            assert!(linalg::cmax_abs(&diff) < 1e-10);
        }
    }

    #[test]
    fn inverse_composes_to_identity() {
        let g = RationalMatrix::new(1, 1, vec![Ratio::from_coeffs(&[3.0, 2.0], &[1.0, 1.0]).unwrap()]).unwrap();
        let ss = realize(&g).unwrap();
        let id = ss.series(&ss.inverse().unwrap()).unwrap();
        let v = id.transfer_eval(Complex64::new(0.4, 1.3)).unwrap();
        assert!((v[(0, 0)] - 1.0).norm() < 1e-12);
    }

    #[test]
    fn times_s_matches_frequency_domain() {
        let g = builtin::example1_g1();
        let ss = realize(&g).unwrap().times_s().unwrap();
        let s0 = Complex64::new(1.0, 2.5);
        let want = g.eval(s0).unwrap() * s0;
        assert!(linalg::cmax_abs(&(ss.transfer_eval(s0).unwrap() - want)) < 1e-10);
    }

    #[test]
    fn impulse_response_of_first_order() {
        let grid = Grid::new(2.0, 2001).unwrap();
        let h = realize(&first_order()).unwrap().impulse_response(grid).unwrap();
        assert!((h[2000][(0, 0)] - (-2.0f64).exp()).abs() < 1e-10);
    }
}
