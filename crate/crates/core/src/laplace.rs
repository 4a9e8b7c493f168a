//! Analytic trajectories built from terms `c·t^m·e^{at}·cos(ωt+φ)`.
//!
//! The basis is closed under differentiation and every term has a rational
//! Laplace transform, so desired trajectories written this way can be fed
//! to the frequency-domain trackability tests.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::ratmat::{Ratio, RationalMatrix};
use crate::simulate::{Grid, SampledSignal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub c: f64,
    #[serde(default)]
    pub m: u32,
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub omega: f64,
    #[serde(default)]
    pub phi: f64,
}

impl Term {
    pub fn constant(c: f64) -> Self {
        Term { c, m: 0, a: 0.0, omega: 0.0, phi: 0.0 }
    }

    /// `c·sin(ωt)`.
    pub fn sin(c: f64, omega: f64) -> Self {
        Term { c, m: 0, a: 0.0, omega, phi: -std::f64::consts::FRAC_PI_2 }
    }

    /// `c·cos(ωt)`.
    pub fn cos(c: f64, omega: f64) -> Self {
        Term { c, m: 0, a: 0.0, omega, phi: 0.0 }
    }

    /// `c·e^{at}`.
    pub fn exp(c: f64, a: f64) -> Self {
        Term { c, m: 0, a, omega: 0.0, phi: 0.0 }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.c * t.powi(self.m as i32) * (self.a * t).exp() * (self.omega * t + self.phi).cos()
    }

    fn derivative(&self) -> [Term; 3] {
        let Term { c, m, a, omega, phi } = *self;
        [
            Term { c: c * m as f64, m: m.saturating_sub(1), a, omega, phi },
            Term { c: c * a, m, a, omega, phi },
            Term { c: c * omega, m, a, omega, phi: phi + std::f64::consts::FRAC_PI_2 },
        ]
    }

    /// `L[c·t^m e^{at} cos(ωt+φ)] = c·m!·Re{e^{iφ}/(s−a−iω)^{m+1}}`, written
    /// over the real denominator `((s−a)²+ω²)^{m+1}`.
    pub fn transform(&self) -> Ratio {
        let fact: f64 = (1..=self.m).map(f64::from).product();
        let k = self.m as usize + 1;
        if self.omega == 0.0 {
            let num = Poly::constant(self.c * fact * self.phi.cos());
            return Ratio::new(num, Poly::linear(self.a).pow(k)).expect("monic denominator");
        }
        // e^{iφ}·(s − a + iω)^{m+1}, keeping real parts of the coefficients.
        let mut coeffs = vec![Complex64::new(1.0, 0.0)];
        let root = Complex64::new(-self.a, self.omega);
        for _ in 0..k {
            let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
            for (i, cf) in coeffs.iter().enumerate() {
                next[i + 1] += cf;
                next[i] += cf * root;
            }
            coeffs = next;
        }
        let rot = Complex64::from_polar(1.0, self.phi);
        let num = Poly::new(coeffs.iter().map(|z| (z * rot).re * self.c * fact).collect());
        let quad = Poly::new(vec![self.a * self.a + self.omega * self.omega, -2.0 * self.a, 1.0]);
        Ratio::new(num, quad.pow(k)).expect("monic denominator")
    }
}

/// Finite sum of basis terms.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SignalExpr {
    pub terms: Vec<Term>,
}

impl SignalExpr {
    pub fn new(terms: Vec<Term>) -> Self {
        SignalExpr { terms }
    }

    pub fn zero() -> Self {
        SignalExpr::default()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.terms.iter().map(|term| term.eval(t)).sum()
    }

    /// Term-by-term derivative; zero-gain terms are dropped and identical
    /// exponents merged.
    pub fn derivative(&self) -> SignalExpr {
        let mut out: Vec<Term> = Vec::new();
        for term in self.terms.iter().flat_map(Term::derivative) {
            if term.c == 0.0 {
                continue;
            }
            match out.iter_mut().find(|o| {
                o.m == term.m && o.a == term.a && o.omega == term.omega && o.phi == term.phi
            }) {
                Some(o) => o.c += term.c,
                None => out.push(term),
            }
        }
        out.retain(|t| t.c != 0.0);
        SignalExpr { terms: out }
    }

    pub fn transform(&self) -> Ratio {
        self.terms.iter().fold(Ratio::zero(), |acc, t| acc.add(&t.transform()))
    }
}

/// Laplace transform of a vector of expressions as a column matrix.
pub fn laplace_transform(f: &[SignalExpr]) -> RationalMatrix {
    RationalMatrix::from_fn(f.len(), 1, |i, _| f[i].transform())
}

pub fn derivative(f: &[SignalExpr]) -> Vec<SignalExpr> {
    f.iter().map(SignalExpr::derivative).collect()
}

/// Samples every channel at the grid nodes.
pub fn sample(f: &[SignalExpr], grid: &Grid) -> SampledSignal {
    SampledSignal::from_fn(*grid, f.len(), |t, ch| f[ch].eval(t))
}

pub fn eval_at(f: &[SignalExpr], t: f64) -> Vec<f64> {
    f.iter().map(|e| e.eval(t)).collect()
}

/// Exogenous input `d(t) = d₀δ(t) + d̂(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExogenousInput {
    pub d0: Vec<f64>,
    pub dhat: Vec<SignalExpr>,
}

impl ExogenousInput {
    pub fn new(d0: Vec<f64>, dhat: Vec<SignalExpr>) -> Result<Self> {
        if d0.len() != dhat.len() {
            return Err(Error::Dimension(format!(
                "impulsive part has {} channels, regular part {}",
                d0.len(),
                dhat.len()
            )));
        }
        Ok(ExogenousInput { d0, dhat })
    }

    pub fn zero(m: usize) -> Self {
        ExogenousInput { d0: vec![0.0; m], dhat: vec![SignalExpr::zero(); m] }
    }

    pub fn dim(&self) -> usize {
        self.d0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.d0.iter().all(|&v| v == 0.0) && self.dhat.iter().all(|e| e.terms.iter().all(|t| t.c == 0.0))
    }

    /// `D(s) = d₀ + D̂(s)`.
    pub fn transform(&self) -> RationalMatrix {
        RationalMatrix::from_fn(self.dim(), 1, |i, _| {
            Ratio::constant(self.d0[i]).add(&self.dhat[i].transform())
        })
    }

    pub fn regular_transform(&self) -> RationalMatrix {
        laplace_transform(&self.dhat)
    }
}
