//! Trackability and realizability of desired trajectories.
//!
//! Every check works on the frequency-domain model
//! `Y(s) = G₁(s)U(s) + G₂(s)D(s)` and evaluates the relevant closed forms
//! pointwise at seeded random probes.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Condition, Error, Result};
use crate::laplace::{self, ExogenousInput, SignalExpr};
use crate::linalg::{self, CMatrix};
use crate::poly::{Poly, PolyMatrix};
use crate::ratmat::{ProbeSampler, Ratio, RationalMatrix};
use crate::simulate::SampledSignal;

pub const TRACK_PROBES: usize = 12;
pub const TRACK_TOL: f64 = 1e-7;
pub const INITIAL_TOL: f64 = 1e-9;

/// Pointwise evaluator of a frequency-domain object.
pub type Evaluator = Arc<dyn Fn(Complex64) -> Result<CMatrix> + Send + Sync>;

/// A validated plant satisfying C1–C3, and C4 when `q ≤ p`.
#[derive(Debug, Clone)]
pub struct Plant {
    g1: RationalMatrix,
    g2: RationalMatrix,
    exo: ExogenousInput,
    phi1: DMatrix<f64>,
    phi2: DMatrix<f64>,
    permutation: Vec<usize>,
}

fn condition(condition: Condition, detail: impl Into<String>) -> Error {
    Error::Condition { condition, detail: detail.into() }
}

impl Plant {
    pub fn new(g1: RationalMatrix, g2: RationalMatrix, exo: ExogenousInput) -> Result<Self> {
        let (q, p) = (g1.rows(), g1.cols());
        if q == 0 || p == 0 {
            return Err(Error::Dimension("G1 must have at least one row and column".into()));
        }
        if g2.rows() != q {
            return Err(Error::Dimension(format!("G1 has {q} rows, G2 has {}", g2.rows())));
        }
        if g2.cols() != exo.dim() {
            return Err(Error::Dimension(format!(
                "G2 has {} columns, exogenous input has {} channels",
                g2.cols(),
                exo.dim()
            )));
        }
        if !g1.is_strictly_proper() {
            return Err(condition(Condition::C1, "G1 is not strictly proper"));
        }
        if g2.cols() > 0 && !g2.is_strictly_proper() {
            return Err(condition(Condition::C1, "G2 is not strictly proper"));
        }
        if !exo.regular_transform().is_strictly_proper() {
            return Err(condition(Condition::C2, "regular part of the exogenous input has a non-strictly-proper transform"));
        }
        let phi1 = g1.first_markov()?;
        if !linalg::has_full_rank(&phi1) {
            return Err(condition(
                Condition::C3,
                format!("first Markov parameter of G1 has rank {} < {}", linalg::rank(&phi1), q.min(p)),
            ));
        }
        let phi2 = if g2.cols() > 0 { g2.first_markov()? } else { DMatrix::zeros(q, 0) };
        let permutation = if q <= p {
            leading_block_permutation(&phi1)
                .ok_or_else(|| condition(Condition::C4, "no choice of columns gives a nonsingular leading block"))?
        } else {
            (0..p).collect()
        };
        Ok(Plant { g1, g2, exo, phi1, phi2, permutation })
    }

    pub fn q(&self) -> usize {
        self.g1.rows()
    }

    pub fn p(&self) -> usize {
        self.g1.cols()
    }

    pub fn m(&self) -> usize {
        self.g2.cols()
    }

    pub fn g1(&self) -> &RationalMatrix {
        &self.g1
    }

    pub fn g2(&self) -> &RationalMatrix {
        &self.g2
    }

    pub fn exo(&self) -> &ExogenousInput {
        &self.exo
    }

    /// `Φ₁(0)`, the leading Markov parameter of `G₁`.
    pub fn phi1(&self) -> &DMatrix<f64> {
        &self.phi1
    }

    /// `Φ₂(0)`.
    pub fn phi2(&self) -> &DMatrix<f64> {
        &self.phi2
    }

    /// Column order putting a nonsingular `q×q` block first (identity when `q > p`).
    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn is_underactuated(&self) -> bool {
        self.q() >= self.p()
    }

    /// Leading square block `G₁₁` after the column permutation.
    pub fn g11(&self) -> RationalMatrix {
        self.g1.select_columns(&self.permutation[..self.q().min(self.p())])
    }

    /// Remaining columns `G₁₂`.
    pub fn g12(&self) -> RationalMatrix {
        self.g1.select_columns(&self.permutation[self.q().min(self.p())..])
    }

    /// Same plant with a different exogenous input (dimension must match).
    pub fn with_exo(&self, exo: ExogenousInput) -> Result<Plant> {
        Plant::new(self.g1.clone(), self.g2.clone(), exo)
    }

    /// Matrices whose poles must be avoided when probing `R(s) = Y_d − G₂D`.
    fn reference_parts(&self, yd: &[SignalExpr]) -> Result<(RationalMatrix, RationalMatrix)> {
        if yd.len() != self.q() {
            return Err(Error::Dimension(format!("trajectory has {} channels, plant has {} outputs", yd.len(), self.q())));
        }
        Ok((laplace::laplace_transform(yd), self.exo.transform()))
    }
}

/// First (lexicographic) set of `q` columns of `phi` with full rank, followed
/// by the remaining columns in order.
fn leading_block_permutation(phi: &DMatrix<f64>) -> Option<Vec<usize>> {
    let (q, p) = phi.shape();
    let mut pick: Vec<usize> = (0..q).collect();
    loop {
        if linalg::has_full_rank(&phi.select_columns(&pick)) {
            let mut perm = pick.clone();
            perm.extend((0..p).filter(|j| !pick.contains(j)));
            return Some(perm);
        }
        // Next combination.
        let mut i = q;
        loop {
            if i == 0 {
                return None;
            }
            i -= 1;
            if pick[i] < p - q + i {
                break;
            }
        }
        pick[i] += 1;
        for k in i + 1..q {
            pick[k] = pick[k - 1] + 1;
        }
    }
}

/// `R(s) = Y_d(s) − G₂(s)D(s)` as an evaluator.
pub fn reference_evaluator(plant: &Plant, yd: &[SignalExpr]) -> Result<Evaluator> {
    let (ydt, dt) = plant.reference_parts(yd)?;
    let g2 = plant.g2.clone();
    Ok(Arc::new(move |s0| {
        let y = ydt.eval(s0)?;
        if g2.cols() == 0 {
            return Ok(y);
        }
        Ok(y - g2.eval(s0)? * dt.eval(s0)?)
    }))
}

/// Probe points avoiding the poles of every transfer in the reference.
pub fn probe_points(plant: &Plant, yd: &[SignalExpr], count: usize, probes: &mut ProbeSampler) -> Result<Vec<Complex64>> {
    let (ydt, dt) = plant.reference_parts(yd)?;
    probes.sample(count, &[&plant.g1, &plant.g2, &ydt, &dt])
}

/// Desired trajectory, either analytic or sampled only.
#[derive(Debug, Clone)]
pub enum Trajectory {
    Analytic(Vec<SignalExpr>),
    Sampled { y: SampledSignal, y_dot: Option<SampledSignal> },
}

impl Trajectory {
    pub fn analytic(&self) -> Result<&[SignalExpr]> {
        match self {
            Trajectory::Analytic(e) => Ok(e),
            Trajectory::Sampled { .. } => Err(Error::NonRationalTrajectory),
        }
    }
}

/// Outcome of a trackability check.
#[derive(Clone)]
pub struct TrackabilityVerdict {
    pub trackable: bool,
    pub realizable: bool,
    pub initial_condition_ok: bool,
    /// Largest probe residual: the projection residual when `q ≥ p`, the
    /// membership residual of the witness when `q < p`.
    pub residual: f64,
    /// Same residual divided by `1 + ‖Y_d(s0)‖`, the quantity compared with the tolerance.
    pub relative_residual: f64,
    pub probes_used: usize,
    pub permutation: Vec<usize>,
    /// Evaluator of a desired input: unique when `q ≥ p`, one member of the
    /// solution set otherwise. Meaningful only when trackable.
    pub witness: Evaluator,
}

impl std::fmt::Debug for TrackabilityVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TrackabilityVerdict")
            .field("trackable", &self.trackable)
            .field("realizable", &self.realizable)
            .field("initial_condition_ok", &self.initial_condition_ok)
            .field("residual", &self.residual)
            .field("probes_used", &self.probes_used)
            .field("permutation", &self.permutation)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub trackable: bool,
    pub realizable: bool,
    pub initial_condition_ok: bool,
    pub residual: f64,
    pub relative_residual: f64,
    pub probes_used: usize,
    pub permutation: Vec<usize>,
}

impl TrackabilityVerdict {
    pub fn report(&self) -> VerdictReport {
        VerdictReport {
            trackable: self.trackable,
            realizable: self.realizable,
            initial_condition_ok: self.initial_condition_ok,
            residual: self.residual,
            relative_residual: self.relative_residual,
            probes_used: self.probes_used,
            permutation: self.permutation.clone(),
        }
    }
}

fn vec_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `y_d(0) = Φ₂(0)·d₀`.
pub fn check_initial_condition(plant: &Plant, yd: &[SignalExpr]) -> Result<bool> {
    if yd.len() != plant.q() {
        return Err(Error::Dimension(format!("trajectory has {} channels, plant has {} outputs", yd.len(), plant.q())));
    }
    let y0 = nalgebra::DVector::from_vec(laplace::eval_at(yd, 0.0));
    let free = if plant.m() == 0 {
        nalgebra::DVector::zeros(plant.q())
    } else {
        &plant.phi2 * nalgebra::DVector::from_column_slice(&plant.exo.d0)
    };
    let gap = (&y0 - free).norm();
    Ok(gap <= INITIAL_TOL * (1.0 + y0.norm()))
}

/// `P(s0) = I − G₁(G₁ᵀG₁)^{-1}G₁ᵀ` (plain transpose, not conjugate).
pub fn projector_at(g1: &RationalMatrix, s0: Complex64) -> Result<CMatrix> {
    let g = g1.eval(s0)?;
    let gt = g.transpose();
    let x = linalg::csolve(&(&gt * &g), &gt)?;
    Ok(CMatrix::identity(g.nrows(), g.nrows()) - g * x)
}

/// `(G₁ᵀG₁)^{-1}G₁ᵀR` at a point.
fn left_solve_at(g1: &RationalMatrix, r: &CMatrix, s0: Complex64) -> Result<CMatrix> {
    let g = g1.eval(s0)?;
    let gt = g.transpose();
    linalg::csolve(&(&gt * &g), &(gt * r))
}

/// Trackability test for `q ≥ p`.
pub fn check_trackable_underactuated(plant: &Plant, yd: &[SignalExpr], probes: &mut ProbeSampler) -> Result<TrackabilityVerdict> {
    if !plant.is_underactuated() {
        return Err(Error::InvalidArgument(format!(
            "the projection test needs q >= p (q = {}, p = {})",
            plant.q(),
            plant.p()
        )));
    }
    let ic = check_initial_condition(plant, yd)?;
    let reference = reference_evaluator(plant, yd)?;
    let ydt = laplace::laplace_transform(yd);
    let points = probe_points(plant, yd, TRACK_PROBES, probes)?;
    let (mut residual, mut relative) = (0.0f64, 0.0f64);
    for &s0 in &points {
        let r = reference(s0)?;
        let res = vec_norm(&(projector_at(&plant.g1, s0)? * r));
        residual = residual.max(res);
        relative = relative.max(res / (1.0 + vec_norm(&ydt.eval(s0)?)));
    }
    let trackable = ic && relative <= TRACK_TOL;
    let g1 = plant.g1.clone();
    let witness: Evaluator = Arc::new(move |s0| left_solve_at(&g1, &reference(s0)?, s0));
    Ok(TrackabilityVerdict {
        trackable,
        realizable: trackable,
        initial_condition_ok: ic,
        residual,
        relative_residual: relative,
        probes_used: points.len(),
        permutation: plant.permutation.clone(),
        witness,
    })
}

/// `U_d(s) = (G₁ᵀG₁)^{-1}G₁ᵀ[Y_d − G₂D]`; refuses untrackable trajectories.
pub fn desired_input_underactuated(plant: &Plant, yd: &[SignalExpr], probes: &mut ProbeSampler) -> Result<Evaluator> {
    let verdict = check_trackable_underactuated(plant, yd, probes)?;
    if !verdict.trackable {
        return Err(Error::Untrackable);
    }
    Ok(verdict.witness)
}

/// Scatters a permuted-order vector back to the original column order.
fn unpermute(perm: &[usize], v: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(v.nrows(), v.ncols());
    for (k, &j) in perm.iter().enumerate() {
        out.set_row(j, &v.row(k));
    }
    out
}

/// One member of the solution set for `q ≤ p`:
/// `U_{d,1} = G₁₁^{-1}[R − G₁₂U_{d,2}]`, returned in the original column order.
pub fn solution_member(plant: &Plant, yd: &[SignalExpr], ud2: Option<&[SignalExpr]>) -> Result<Evaluator> {
    let (q, p) = (plant.q(), plant.p());
    if q > p {
        return Err(Error::InvalidArgument("the solution-set form needs q <= p".into()));
    }
    let free = match ud2 {
        Some(e) if e.len() != p - q => {
            return Err(Error::Dimension(format!("free input has {} channels, expected {}", e.len(), p - q)))
        }
        Some(e) => laplace::laplace_transform(e),
        None => RationalMatrix::zeros(p - q, 1),
    };
    let reference = reference_evaluator(plant, yd)?;
    let (g11, g12) = (plant.g11(), plant.g12());
    let perm = plant.permutation.clone();
    Ok(Arc::new(move |s0| {
        let u2 = free.eval(s0)?;
        let mut rhs = reference(s0)?;
        if p > q {
            rhs -= g12.eval(s0)? * &u2;
        }
        let u1 = linalg::csolve(&g11.eval(s0)?, &rhs)?;
        let mut stacked = CMatrix::zeros(p, 1);
        stacked.view_mut((0, 0), (q, 1)).copy_from(&u1);
        stacked.view_mut((q, 0), (p - q, 1)).copy_from(&u2);
        Ok(unpermute(&perm, &stacked))
    }))
}

/// `max ‖G₁U − R‖` over the points, absolute and relative to `1 + ‖R‖`.
pub fn membership_residual(plant: &Plant, yd: &[SignalExpr], u: &Evaluator, points: &[Complex64]) -> Result<(f64, f64)> {
    let reference = reference_evaluator(plant, yd)?;
    let (mut abs, mut rel) = (0.0f64, 0.0f64);
    for &s0 in points {
        let r = reference(s0)?;
        let res = vec_norm(&(plant.g1.eval(s0)? * u(s0)? - &r));
        abs = abs.max(res);
        rel = rel.max(res / (1.0 + vec_norm(&r)));
    }
    Ok((abs, rel))
}

/// Trackability test for `q ≤ p`: trackable exactly when the initial
/// condition holds.
pub fn check_trackable_overactuated(
    plant: &Plant,
    yd: &[SignalExpr],
    ud2: Option<&[SignalExpr]>,
    probes: &mut ProbeSampler,
) -> Result<TrackabilityVerdict> {
    let ic = check_initial_condition(plant, yd)?;
    let witness = solution_member(plant, yd, ud2)?;
    let points = probe_points(plant, yd, TRACK_PROBES, probes)?;
    let (residual, relative) = membership_residual(plant, yd, &witness, &points)?;
    let square = plant.q() == plant.p();
    Ok(TrackabilityVerdict {
        trackable: ic,
        realizable: square && ic,
        initial_condition_ok: ic,
        residual,
        relative_residual: relative,
        probes_used: points.len(),
        permutation: plant.permutation.clone(),
        witness,
    })
}

/// Dispatches on the plant shape; sampled trajectories are refused.
pub fn check_trackable(plant: &Plant, yd: &Trajectory, probes: &mut ProbeSampler) -> Result<TrackabilityVerdict> {
    let yd = yd.analytic()?;
    if plant.is_underactuated() {
        check_trackable_underactuated(plant, yd, probes)
    } else {
        check_trackable_overactuated(plant, yd, None, probes)
    }
}

/// Rational model of `ẋ = Ax + Bu + w`, `y = Cx`, `x(0) = x₀`:
/// `G₁ = C(sI−A)^{-1}B`, `G₂ = [C(sI−A)^{-1}  C(sI−A)^{-1}]`, `d₀ = (x₀, 0)`,
/// `D̂ = (0, W)`.
pub fn statespace_plant(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    x0: &[f64],
    w: &[SignalExpr],
) -> Result<Plant> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n || c.ncols() != n || x0.len() != n || w.len() != n {
        return Err(Error::Dimension(format!(
            "A {}x{}, B {}x{}, C {}x{}, x0 {}, w {}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols(),
            c.nrows(),
            c.ncols(),
            x0.len(),
            w.len()
        )));
    }
    if n == 0 {
        return Err(Error::Dimension("state dimension must be positive".into()));
    }
    let si_a = PolyMatrix::from_fn(n, n, |i, j| {
        let base = Poly::constant(-a[(i, j)]);
        if i == j {
            base.add(&Poly::s())
        } else {
            base
        }
    });
    let alpha = si_a.det()?;
    let adj = si_a.adjugate()?;
    let c_adj = PolyMatrix::constant(c).mul(&adj)?;
    let g1_num = c_adj.mul(&PolyMatrix::constant(b))?;
    let g1 = RationalMatrix::from_fn(c.nrows(), b.ncols(), |i, j| {
        Ratio::new(g1_num.get(i, j).clone(), alpha.clone()).expect("characteristic polynomial is nonzero")
    });
    let gx = RationalMatrix::from_fn(c.nrows(), n, |i, j| {
        Ratio::new(c_adj.get(i, j).clone(), alpha.clone()).expect("characteristic polynomial is nonzero")
    });
    let g2 = gx.hcat(&gx)?;
    let mut d0 = x0.to_vec();
    d0.extend(std::iter::repeat_n(0.0, n));
    let mut dhat = vec![SignalExpr::zero(); n];
    dhat.extend(w.iter().cloned());
    Plant::new(g1, g2, ExogenousInput::new(d0, dhat)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laplace::Term;
    use crate::scenario::builtin;

    fn scalar(v: f64) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, v)
    }

    #[test]
    fn example_plants_pass_conditions() {
        let p1 = builtin::example1_plant();
        assert_eq!((p1.q(), p1.p(), p1.m()), (3, 2, 3));
        let p2 = builtin::example2_plant();
        assert_eq!(p2.permutation(), &[0, 2, 1]);
    }

    #[test]
    fn c1_violation_named() {
        let g = RationalMatrix::new(1, 1, vec![Ratio::from_coeffs(&[1.0, 1.0], &[1.0, 1.0]).unwrap()]).unwrap();
        let err = Plant::new(g, RationalMatrix::zeros(1, 0), ExogenousInput::zero(0)).unwrap_err();
        assert!(matches!(err, Error::Condition { condition: Condition::C1, .. }));
    }

    #[test]
    fn c3_violation_named() {
        let g = RationalMatrix::new(1, 1, vec![Ratio::from_coeffs(&[1.0], &[1.0, 0.0, 1.0]).unwrap()]).unwrap();
        let err = Plant::new(g, RationalMatrix::zeros(1, 0), ExogenousInput::zero(0)).unwrap_err();
        assert!(matches!(err, Error::Condition { condition: Condition::C3, .. }));
    }

    #[test]
    fn initial_condition_examples() {
        let p1 = builtin::example1_plant();
        assert!(check_initial_condition(&p1, &builtin::example1_yd('a')).unwrap());
        let mut shifted = builtin::example1_yd('a');
        shifted[0].terms.push(Term::constant(1.0));
        assert!(!check_initial_condition(&p1, &shifted).unwrap());
        assert!(check_initial_condition(&builtin::example2_plant(), &builtin::example2_yd()).unwrap());
    }

    #[test]
    fn example1_triage() {
        let plant = builtin::example1_plant();
        for (case, want) in [('a', true), ('b', true), ('c', false)] {
            let v = check_trackable_underactuated(&plant, &builtin::example1_yd(case), &mut ProbeSampler::new(7)).unwrap();
            assert_eq!(v.trackable, want, "case {case}: residual {}", v.residual);
            assert_eq!(v.realizable, v.trackable);
        }
    }

    #[test]
    fn zero_trajectory_has_zero_witness() {
        let plant = builtin::example1_plant();
        let yd = vec![SignalExpr::zero(); 3];
        let u = desired_input_underactuated(&plant, &yd, &mut ProbeSampler::new(1)).unwrap();
        let v = u(Complex64::new(1.0, 1.0)).unwrap();
        assert!(linalg::cmax_abs(&v) == 0.0);
    }

    #[test]
    fn witness_solves_equation_and_is_unique() {
        let plant = builtin::example1_plant();
        let ua = desired_input_underactuated(&plant, &builtin::example1_yd('a'), &mut ProbeSampler::new(2)).unwrap();
        let ub = desired_input_underactuated(&plant, &builtin::example1_yd('b'), &mut ProbeSampler::new(3)).unwrap();
        let s0 = Complex64::new(1.0, 1.0);
        let r = reference_evaluator(&plant, &builtin::example1_yd('a')).unwrap()(s0).unwrap();
        let res = plant.g1().eval(s0).unwrap() * ua(s0).unwrap() - &r;
        assert!(vec_norm(&res) <= 1e-7 * (1.0 + vec_norm(&r)));
        assert!(linalg::cmax_abs(&(ua(s0).unwrap() - ub(s0).unwrap())) < 1e-12);
    }

    #[test]
    fn untrackable_refuses_witness() {
        let plant = builtin::example1_plant();
        let err = desired_input_underactuated(&plant, &builtin::example1_yd('c'), &mut ProbeSampler::new(2));
        assert!(matches!(err, Err(Error::Untrackable)));
    }

    #[test]
    fn projector_properties() {
        let g1 = builtin::example1_g1();
        let mut probes = ProbeSampler::new(5);
        for s0 in probes.sample(10, &[&g1]).unwrap() {
            let p = projector_at(&g1, s0).unwrap();
            assert!(linalg::cmax_abs(&(&p * &p - &p)) < 1e-8);
            assert!(linalg::cmax_abs(&(&p * g1.eval(s0).unwrap())) < 1e-8);
        }
    }

    #[test]
    fn overactuated_examples() {
        let plant = builtin::example2_plant();
        let yd = builtin::example2_yd();
        let v = check_trackable_overactuated(&plant, &yd, None, &mut ProbeSampler::new(9)).unwrap();
        assert!(v.trackable);
        assert!(!v.realizable);
        assert!(v.relative_residual <= 1e-7);
        let mut bad = yd.clone();
        bad[1].terms.push(Term::constant(0.5));
        let v = check_trackable_overactuated(&plant, &bad, None, &mut ProbeSampler::new(9)).unwrap();
        assert!(!v.trackable);
    }

    #[test]
    fn solution_set_has_many_members() {
        let plant = builtin::example2_plant();
        let yd = builtin::example2_yd();
        let u_a = solution_member(&plant, &yd, None).unwrap();
        let u_b = solution_member(&plant, &yd, Some(&[SignalExpr::new(vec![Term::exp(2.0, -1.0)])])).unwrap();
        let points = ProbeSampler::new(4).sample(12, &[plant.g1()]).unwrap();
        for u in [&u_a, &u_b] {
            assert!(membership_residual(&plant, &yd, u, &points).unwrap().1 <= 1e-7);
        }
        let differ = points
            .iter()
            .any(|&s| linalg::cmax_abs(&(u_a(s).unwrap() - u_b(s).unwrap())) > 1e-3);
        assert!(differ);
    }

    #[test]
    fn sampled_trajectory_refused() {
        let plant = builtin::example1_plant();
        let grid = crate::simulate::Grid::new(1.0, 11).unwrap();
        let traj = Trajectory::Sampled { y: SampledSignal::zeros(grid, 3), y_dot: None };
        assert!(matches!(
            check_trackable(&plant, &traj, &mut ProbeSampler::new(1)),
            Err(Error::NonRationalTrajectory)
        ));
    }

    #[test]
    fn statespace_first_order() {
        let plant = statespace_plant(&scalar(-1.0), &scalar(1.0), &scalar(1.0), &[0.0], &[SignalExpr::zero()]).unwrap();
        let g = plant.g1().get(0, 0);
        assert!(g.num().approx_eq(&Poly::one(), 1e-12));
        assert!(g.den().approx_eq(&Poly::linear(-1.0), 1e-12));
    }

    #[test]
    fn statespace_initial_condition_rule() {
        let plant = statespace_plant(&scalar(-1.0), &scalar(1.0), &scalar(2.0), &[0.5], &[SignalExpr::zero()]).unwrap();
        let ok = vec![SignalExpr::new(vec![Term::cos(1.0, 1.0)])];
        let bad = vec![SignalExpr::new(vec![Term::sin(1.0, 1.0)])];
        let mut probes = ProbeSampler::new(3);
        assert!(check_trackable(&plant, &Trajectory::Analytic(ok), &mut probes).unwrap().trackable);
        assert!(!check_trackable(&plant, &Trajectory::Analytic(bad), &mut probes).unwrap().trackable);
    }

    #[test]
    fn statespace_cb_matches_relative_degree() {
        let a = DMatrix::from_row_slice(3, 3, &[-1.0, 0.5, 0.0, 0.0, -2.0, 1.0, 0.3, 0.0, -3.0]);
        let b = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.5, 0.5]);
        let c = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let w = vec![SignalExpr::zero(); 3];
        let plant = statespace_plant(&a, &b, &c, &[0.0; 3], &w).unwrap();
        assert!((plant.phi1() - &c * &b).amax() < 1e-12);
        assert_eq!(plant.g1().relative_degree_one().unwrap(), linalg::has_full_rank(&(&c * &b)));
        let degenerate = DMatrix::from_row_slice(2, 3, &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
        let cb = &degenerate * &b;
        assert!(!linalg::has_full_rank(&cb));
        assert!(matches!(
            statespace_plant(&a, &b, &degenerate, &[0.0; 3], &w),
            Err(Error::Condition { condition: Condition::C3, .. })
        ));
    }

    #[test]
    fn leading_block_search() {
        let phi = DMatrix::from_row_slice(2, 3, &[1.2, 1.11, 0.5, 1.2, 1.11, 1.22]);
        assert_eq!(leading_block_permutation(&phi), Some(vec![0, 2, 1]));
        let zero = DMatrix::zeros(2, 3);
        assert_eq!(leading_block_permutation(&zero), None);
    }
}
