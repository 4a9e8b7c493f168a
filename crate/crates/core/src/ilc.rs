//! The learning law `U_{k+1} = U_k + Γ(s)E_k` with `Γ(s) = s(Γ₀ + Γ̂(s))`:
//! gain validation, convergence conditions, time-domain runs, limit
//! predictions and contraction diagnostics.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laplace::{self, SignalExpr};
use crate::linalg::{self, CMatrix};
use crate::par::{self, Execution};
use crate::ratmat::{Properness, RationalMatrix};
use crate::realization::{realize, StateSpace};
use crate::simulate::{self, lambda_norm, sup_norm, Grid, Response, SampledSignal};
use crate::trackability::{reference_evaluator, Evaluator, Plant, Trajectory};

/// Relative size of `Γ₀e_k(0)` above which the impulsive update term is flagged.
pub const IMPULSE_TOL: f64 = 1e-6;
/// The run aborts once the sup error exceeds this multiple of its initial value.
pub const DIVERGENCE_FACTOR: f64 = 1e6;
/// λ-norms of `Δu_k` below this fraction of their peak are treated as round-off.
pub const NOISE_FLOOR: f64 = 1e-10;

/// Validated gain `Γ(s) = s(Γ₀ + Γ̂(s))`.
#[derive(Debug, Clone)]
pub struct GainOperator {
    gamma0: DMatrix<f64>,
    gammahat: RationalMatrix,
}

impl GainOperator {
    pub fn new(gamma0: DMatrix<f64>, gammahat: RationalMatrix) -> Result<Self> {
        if gammahat.rows() != gamma0.nrows() || gammahat.cols() != gamma0.ncols() {
            return Err(Error::Dimension(format!(
                "Γ0 is {}x{}, Γ̂ is {}x{}",
                gamma0.nrows(),
                gamma0.ncols(),
                gammahat.rows(),
                gammahat.cols()
            )));
        }
        if gamma0.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidGain("Γ0 = lim s⁻¹Γ(s) is zero".into()));
        }
        if !gammahat.is_strictly_proper() {
            return Err(Error::InvalidGain("Γ̂ must be strictly proper".into()));
        }
        Ok(GainOperator { gamma0, gammahat })
    }

    pub fn gamma0(&self) -> &DMatrix<f64> {
        &self.gamma0
    }

    pub fn gammahat(&self) -> &RationalMatrix {
        &self.gammahat
    }

    /// Input count `p` (rows of Γ).
    pub fn p(&self) -> usize {
        self.gamma0.nrows()
    }

    /// Output count `q` (columns of Γ).
    pub fn q(&self) -> usize {
        self.gamma0.ncols()
    }

    pub fn is_dtype(&self) -> bool {
        self.gammahat.entries().iter().all(|r| r.is_zero())
    }

    /// `Γ(s) = s(Γ₀ + Γ̂(s))` as a rational matrix.
    pub fn gamma(&self) -> RationalMatrix {
        RationalMatrix::constant(&self.gamma0)
            .add(&self.gammahat)
            .expect("conformable by construction")
            .mul_s()
    }

    /// `Γ(s0)`.
    pub fn eval(&self, s0: Complex64) -> Result<CMatrix> {
        Ok((linalg::to_complex(&self.gamma0) + self.gammahat.eval(s0)?) * s0)
    }

    /// Realization of `Γ₀ + Γ̂(s)`.
    pub fn realization(&self) -> Result<StateSpace> {
        realize(&RationalMatrix::constant(&self.gamma0).add(&self.gammahat)?)
    }

    /// Realization of `Γ̂` alone, absent for a D-type gain.
    pub fn filter(&self) -> Result<Option<StateSpace>> {
        if self.is_dtype() {
            return Ok(None);
        }
        realize(&self.gammahat).map(Some)
    }

    pub fn scaled(&self, k: f64) -> Result<GainOperator> {
        let hat = RationalMatrix::from_fn(self.p(), self.q(), |i, j| self.gammahat.get(i, j).scale(k));
        GainOperator::new(&self.gamma0 * k, hat)
    }
}

/// Accepts `Γ(s)` when `s⁻¹Γ(s)` is proper with a nonzero limit. With a
/// plant, also checks that `Γ(s)G₁(s)` and `G₁(s)Γ(s)` are proper.
pub fn validate_gain(gamma_raw: &RationalMatrix, plant: Option<&Plant>) -> Result<GainOperator> {
    let reduced = gamma_raw.div_s();
    let class = reduced.classify();
    let gamma0 = match (class.kind, class.limit) {
        (Properness::Improper, _) | (_, None) => {
            return Err(Error::InvalidGain("s⁻¹Γ(s) is improper".into()));
        }
        (_, Some(l)) => l,
    };
    let gammahat = reduced.strictly_proper_part()?;
    let gain = GainOperator::new(gamma0, gammahat)?;
    if let Some(plant) = plant {
        if gain.p() != plant.p() || gain.q() != plant.q() {
            return Err(Error::Dimension(format!(
                "gain is {}x{}, plant needs {}x{}",
                gain.p(),
                gain.q(),
                plant.p(),
                plant.q()
            )));
        }
        let left = gamma_raw.mul(plant.g1())?.classify().kind != Properness::Improper;
        let right = plant.g1().mul(gamma_raw)?.classify().kind != Properness::Improper;
        if !(left && right) {
            return Err(Error::InvalidGain(format!(
                "properness of ΓG1 ({left}) and G1Γ ({right}) disagree with s⁻¹Γ proper"
            )));
        }
    }
    Ok(gain)
}

/// D-type gain `Γ(s) = sΥ`.
pub fn dtype_gain(upsilon: DMatrix<f64>) -> Result<GainOperator> {
    let (p, q) = upsilon.shape();
    GainOperator::new(upsilon, RationalMatrix::zeros(p, q))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `ρ(I − Γ₀Φ₁(0)) < 1`, used when `q ≥ p`.
    InputSide,
    /// `ρ(I − Φ₁(0)Γ₀) < 1`, used when `q < p`.
    OutputSide,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCheck {
    pub side: Side,
    pub rho: f64,
    pub satisfied: bool,
}

fn limit_product(plant: &Plant, gain: &GainOperator) -> (Side, DMatrix<f64>) {
    if plant.is_underactuated() {
        (Side::InputSide, gain.gamma0() * plant.phi1())
    } else {
        (Side::OutputSide, plant.phi1() * gain.gamma0())
    }
}

pub fn check_convergence_condition(plant: &Plant, gain: &GainOperator) -> Result<ConvergenceCheck> {
    if gain.p() != plant.p() || gain.q() != plant.q() {
        return Err(Error::Dimension(format!("gain is {}x{}, plant needs {}x{}", gain.p(), gain.q(), plant.p(), plant.q())));
    }
    let (side, lim) = limit_product(plant, gain);
    let n = lim.nrows();
    let rho = linalg::spectral_radius(&(DMatrix::identity(n, n) - lim));
    Ok(ConvergenceCheck { side, rho, satisfied: rho < 1.0 })
}

fn require_convergence(plant: &Plant, gain: &GainOperator) -> Result<ConvergenceCheck> {
    let check = check_convergence_condition(plant, gain)?;
    if !check.satisfied {
        return Err(Error::ConvergenceCondition { rho: check.rho });
    }
    Ok(check)
}

/// Time-domain simulator of `[G₁ G₂]` with the impulsive part of the
/// exogenous input folded into the initial state.
#[derive(Debug, Clone)]
pub struct PlantSim {
    ss: StateSpace,
    p: usize,
    b2: DMatrix<f64>,
    x0: DVector<f64>,
    dhat: SampledSignal,
}

impl PlantSim {
    pub fn new(plant: &Plant, grid: Grid) -> Result<Self> {
        let (p, m) = (plant.p(), plant.m());
        let g = if m > 0 { plant.g1().hcat(plant.g2())? } else { plant.g1().clone() };
        let ss = realize(&g)?;
        let b2 = ss.b().columns(p, m).into_owned();
        let x0 = &b2 * DVector::from_column_slice(&plant.exo().d0);
        let dhat = laplace::sample(&plant.exo().dhat, &grid);
        Ok(PlantSim { ss, p, b2, x0, dhat })
    }

    pub fn grid(&self) -> Grid {
        self.dhat.grid()
    }

    pub fn state_space(&self) -> &StateSpace {
        &self.ss
    }

    /// Output and exact output derivative for input `u`, optionally with an
    /// extra impulsive `θ` and regular `θ̂(t)` added to the exogenous input.
    pub fn simulate(&self, u: &SampledSignal, theta: Option<(&[f64], &SampledSignal)>) -> Result<Response> {
        if u.dims() != self.p {
            return Err(Error::Dimension(format!("input has {} channels, plant has {} inputs", u.dims(), self.p)));
        }
        let mut x0 = self.x0.clone();
        let mut d = self.dhat.clone();
        if let Some((jump, reg)) = theta {
            x0 += &self.b2 * DVector::from_column_slice(jump);
            d = d.add(reg)?;
        }
        let input = if d.dims() > 0 { u.stack(&d)? } else { u.clone() };
        simulate::lsim_full(&self.ss, &input, None, None, x0.as_slice())
    }
}

/// One row of iteration telemetry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub sup_error: f64,
    pub lambda_norm_delta_u: f64,
    /// `‖Γ₀e_k(0)‖_∞`, the size of the dropped impulse.
    pub impulse: f64,
    pub impulse_flag: bool,
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub k: usize,
    pub u: SampledSignal,
    pub y: SampledSignal,
    pub e: SampledSignal,
}

#[derive(Debug, Clone)]
pub struct IlcRunReport {
    /// One record per simulated iteration `k = 0..=K`.
    pub records: Vec<IterationRecord>,
    pub lambda: f64,
    pub yd: SampledSignal,
    pub u_final: SampledSignal,
    pub y_final: SampledSignal,
    pub e_final: SampledSignal,
    /// `Δu_k = u_{k+1} − u_k` for every record (the last one is computed but not applied).
    pub delta_u: Vec<SampledSignal>,
    pub snapshots: Vec<Snapshot>,
    pub convergence: ConvergenceCheck,
    pub bound: Option<FcsBound>,
    pub fitted_ratio: Option<f64>,
    pub impulsive_update_required: bool,
}

impl IlcRunReport {
    pub fn final_sup_error(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.sup_error)
    }

    pub fn yd_scale(&self) -> f64 {
        sup_norm(&self.yd)
    }

    /// Machine-readable summary without the signals.
    pub fn summary(&self) -> RunSummary {
        RunSummary {
            iterations: self.records.len().saturating_sub(1),
            final_sup_error: self.final_sup_error(),
            yd_sup: self.yd_scale(),
            lambda: self.lambda,
            fitted_ratio: self.fitted_ratio,
            convergence: self.convergence.clone(),
            bound: self.bound.clone(),
            impulsive_update_required: self.impulsive_update_required,
        }
    }

    /// Iteration metrics as CSV: `k,sup_error,lambda_delta_u,impulse,impulse_flag`.
    pub fn write_metrics_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "k,sup_error,lambda_delta_u,impulse,impulse_flag")?;
        for r in &self.records {
            writeln!(
                w,
                "{},{},{},{},{}",
                r.k,
                simulate::fmt_num(r.sup_error),
                simulate::fmt_num(r.lambda_norm_delta_u),
                simulate::fmt_num(r.impulse),
                u8::from(r.impulse_flag)
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub iterations: usize,
    pub final_sup_error: f64,
    pub yd_sup: f64,
    pub lambda: f64,
    pub fitted_ratio: Option<f64>,
    pub convergence: ConvergenceCheck,
    pub bound: Option<FcsBound>,
    pub impulsive_update_required: bool,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// λ for the recorded `‖Δu_k‖_λ`; defaults to λ* of [`fcs_bound`].
    pub lambda: Option<f64>,
    /// Iterations whose signals are kept (clamped to the run length).
    pub snapshots: Vec<usize>,
    pub divergence_factor: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { lambda: None, snapshots: vec![0, 1, 10], divergence_factor: DIVERGENCE_FACTOR }
    }
}

fn sampled_trajectory(yd: &Trajectory, grid: Grid) -> Result<(SampledSignal, SampledSignal)> {
    match yd {
        Trajectory::Analytic(e) => Ok((laplace::sample(e, &grid), laplace::sample(&laplace::derivative(e), &grid))),
        Trajectory::Sampled { y, y_dot } => {
            if y.grid() != grid {
                return Err(Error::Dimension("trajectory and input use different grids".into()));
            }
            let dot = match y_dot {
                Some(d) => d.clone(),
                None => simulate::finite_diff(y)?,
            };
            Ok((y.clone(), dot))
        }
    }
}

/// Runs `iterations` learning updates from `u0` on `u0`'s grid.
pub fn ilc_run(
    plant: &Plant,
    gain: &GainOperator,
    yd: &Trajectory,
    u0: &SampledSignal,
    iterations: usize,
    options: &RunOptions,
) -> Result<IlcRunReport> {
    run_inner(plant, gain, yd, u0, iterations, options, None)
}

fn run_inner(
    plant: &Plant,
    gain: &GainOperator,
    yd: &Trajectory,
    u0: &SampledSignal,
    iterations: usize,
    options: &RunOptions,
    disturbance: Option<&DisturbanceModel>,
) -> Result<IlcRunReport> {
    let grid = u0.grid();
    if u0.dims() != plant.p() {
        return Err(Error::Dimension(format!("initial input has {} channels, plant has {} inputs", u0.dims(), plant.p())));
    }
    let convergence = check_convergence_condition(plant, gain)?;
    let (y_d, yd_dot) = sampled_trajectory(yd, grid)?;
    if y_d.dims() != plant.q() {
        return Err(Error::Dimension(format!("trajectory has {} channels, plant has {} outputs", y_d.dims(), plant.q())));
    }
    let sim = PlantSim::new(plant, grid)?;
    let bound = fcs_bound(plant, gain, grid).ok();
    let lambda = options
        .lambda
        .or_else(|| bound.as_ref().and_then(|b| b.lambda_star))
        .unwrap_or(1.0);
    let filter = gain.filter()?;
    let scale = 1.0 + sup_norm(&y_d);
    let g0 = gain.gamma0();

    let mut u = u0.clone();
    let mut records = Vec::with_capacity(iterations + 1);
    let mut delta_u = Vec::with_capacity(iterations + 1);
    let mut snapshots = Vec::new();
    let mut initial = 0.0;
    let mut impulsive = false;

    for k in 0..=iterations {
        let theta = disturbance.map(|d| d.sample(k, plant.m(), grid));
        let sim_out = sim.simulate(&u, theta.as_ref().map(|(j, r)| (j.as_slice(), r)));
        let resp = match sim_out {
            Ok(r) => r,
            Err(Error::NonFinite(_)) => {
                let partial = partial_report(records, lambda, &y_d, &u, delta_u, snapshots, &convergence, &bound, impulsive);
                return Err(Error::Divergence { iteration: k, sup_error: f64::INFINITY, partial: Box::new(partial) });
            }
            Err(e) => return Err(e),
        };
        let e = y_d.sub(&resp.y)?;
        let e_dot = yd_dot.sub(&resp.y_dot)?;
        let sup = sup_norm(&e);
        if k == 0 {
            initial = sup.max(1e-9 * scale);
        }
        if !sup.is_finite() || sup > options.divergence_factor * initial {
            let partial = partial_report(records, lambda, &y_d, &u, delta_u, snapshots, &convergence, &bound, impulsive);
            return Err(Error::Divergence { iteration: k, sup_error: sup, partial: Box::new(partial) });
        }

        let e0 = DVector::from_column_slice(e.row(0));
        let impulse = (g0 * &e0).amax();
        let flag = impulse > IMPULSE_TOL * scale;
        impulsive |= flag;

        let mut du = e_dot.map_matrix(g0)?;
        if let Some(f) = &filter {
            let x0 = f.b() * &e0;
            du = du.add(&simulate::lsim(f, &e_dot, None, x0.as_slice())?)?;
        }
        records.push(IterationRecord {
            k,
            sup_error: sup,
            lambda_norm_delta_u: lambda_norm(&du, lambda)?,
            impulse,
            impulse_flag: flag,
        });
        if options.snapshots.contains(&k) || k == iterations {
            snapshots.push(Snapshot { k, u: u.clone(), y: resp.y.clone(), e: e.clone() });
        }
        if k < iterations {
            u = u.add(&du)?;
        }
        delta_u.push(du);
    }

    let last = snapshots.last().expect("final snapshot").clone();
    let mut report = IlcRunReport {
        records,
        lambda,
        yd: y_d,
        u_final: last.u,
        y_final: last.y,
        e_final: last.e,
        delta_u,
        snapshots,
        convergence,
        bound,
        fitted_ratio: None,
        impulsive_update_required: impulsive,
    };
    let rho_bound = report.bound.as_ref().and_then(|b| b.rho_bound);
    report.fitted_ratio = fcs_diagnostic_from_norms(&report.records.iter().map(|r| r.lambda_norm_delta_u).collect::<Vec<_>>(), rho_bound)
        .ok()
        .map(|d| d.fitted_rho);
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn partial_report(
    records: Vec<IterationRecord>,
    lambda: f64,
    y_d: &SampledSignal,
    u: &SampledSignal,
    delta_u: Vec<SampledSignal>,
    snapshots: Vec<Snapshot>,
    convergence: &ConvergenceCheck,
    bound: &Option<FcsBound>,
    impulsive: bool,
) -> IlcRunReport {
    let zeros = SampledSignal::zeros(y_d.grid(), y_d.dims());
    IlcRunReport {
        records,
        lambda,
        yd: y_d.clone(),
        u_final: u.clone(),
        y_final: zeros.clone(),
        e_final: zeros,
        delta_u,
        snapshots,
        convergence: convergence.clone(),
        bound: bound.clone(),
        fitted_ratio: None,
        impulsive_update_required: impulsive,
    }
}

/// Pointwise evaluators of the predicted limits.
#[derive(Clone)]
pub struct LimitPrediction {
    pub u_inf: Evaluator,
    pub e_inf: Evaluator,
}

/// `U_∞ = [ΓG₁]^{-1}Γ·R` and `E_∞ = {I − G₁[ΓG₁]^{-1}Γ}·R` for `q ≥ p`.
pub fn predict_limit_underactuated(plant: &Plant, gain: &GainOperator, yd: &[SignalExpr]) -> Result<LimitPrediction> {
    if !plant.is_underactuated() {
        return Err(Error::InvalidArgument("this limit applies when q >= p".into()));
    }
    require_convergence(plant, gain)?;
    let reference = reference_evaluator(plant, yd)?;
    let (g1, gain_u) = (plant.g1().clone(), gain.clone());
    let u_ref = reference.clone();
    let u_inf: Evaluator = Arc::new(move |s0| {
        let gm = gain_u.eval(s0)?;
        let r = u_ref(s0)?;
        linalg::csolve(&(&gm * g1.eval(s0)?), &(gm * r))
    });
    let (g1, u_e) = (plant.g1().clone(), u_inf.clone());
    let e_inf: Evaluator = Arc::new(move |s0| Ok(reference(s0)? - g1.eval(s0)? * u_e(s0)?));
    Ok(LimitPrediction { u_inf, e_inf })
}

/// `Γ̃(s0) = I − Γ(G₁Γ)^{-1}G₁`.
pub fn gamma_tilde_direct(plant: &Plant, gain: &GainOperator, s0: Complex64) -> Result<CMatrix> {
    let g = plant.g1().eval(s0)?;
    let gm = gain.eval(s0)?;
    let w = &g * &gm;
    let p = plant.p();
    Ok(CMatrix::identity(p, p) - gm * linalg::csolve(&w, &g)?)
}

/// `Γ̃(s0)` assembled from the four blocks written in terms of `G₁₁`, `G₁₂`,
/// `Γ₁`, `Γ₂` (after the plant's column permutation), returned in the
/// original input order.
pub fn gamma_tilde_blocks(plant: &Plant, gain: &GainOperator, s0: Complex64) -> Result<CMatrix> {
    let (q, p) = (plant.q(), plant.p());
    if q > p {
        return Err(Error::InvalidArgument("block form needs q <= p".into()));
    }
    let perm = plant.permutation();
    let gm = gain.eval(s0)?;
    let g = plant.g1().eval(s0)?;
    let w = &g * &gm;
    let g11 = plant.g11().eval(s0)?;
    let g12 = plant.g12().eval(s0)?;
    let gam1 = gm.select_rows(&perm[..q]);
    let gam2 = gm.select_rows(&perm[q..]);
    let r = p - q;

    let w_g11 = linalg::csolve(&w, &g11)?;
    let w_g12 = linalg::csolve(&w, &g12)?;
    let t22 = CMatrix::identity(r, r) - &gam2 * &w_g12;
    let t21 = -(&gam2 * &w_g11);
    let g11_inv_g12 = linalg::csolve(&g11, &g12)?;
    let t11 = &g11_inv_g12 * (&gam2 * &w_g11);
    let t12 = -(&g11_inv_g12 * &t22);

    let mut permuted = CMatrix::zeros(p, p);
    permuted.view_mut((0, 0), (q, q)).copy_from(&t11);
    permuted.view_mut((0, q), (q, r)).copy_from(&t12);
    permuted.view_mut((q, 0), (r, q)).copy_from(&t21);
    permuted.view_mut((q, q), (r, r)).copy_from(&t22);
    let _ = gam1;
    let mut out = CMatrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            out[(perm[i], perm[j])] = permuted[(i, j)];
        }
    }
    Ok(out)
}

/// `U_∞ = Γ[G₁Γ]^{-1}·R + Γ̃·U₀` for `q ≤ p`.
pub fn predict_limit_overactuated(plant: &Plant, gain: &GainOperator, yd: &[SignalExpr], u0: &[SignalExpr]) -> Result<Evaluator> {
    if plant.q() > plant.p() {
        return Err(Error::InvalidArgument("this limit applies when q <= p".into()));
    }
    if u0.len() != plant.p() {
        return Err(Error::Dimension(format!("initial input has {} channels, plant has {} inputs", u0.len(), plant.p())));
    }
    require_convergence(plant, gain)?;
    let reference = reference_evaluator(plant, yd)?;
    let u0t = laplace::laplace_transform(u0);
    let (plant, gain) = (plant.clone(), gain.clone());
    Ok(Arc::new(move |s0| {
        let gm = gain.eval(s0)?;
        let w = plant.g1().eval(s0)? * &gm;
        let base = gm * linalg::csolve(&w, &reference(s0)?)?;
        Ok(base + gamma_tilde_blocks(&plant, &gain, s0)? * u0t.eval(s0)?)
    }))
}

/// Time-domain learned limit obtained by simulating a realization of the
/// closed-form expression rather than iterating.
#[derive(Debug, Clone)]
pub struct TimeDomainLimit {
    pub u_inf: SampledSignal,
    pub e_inf: SampledSignal,
}

/// Simulates `u_∞` from the inverse of `ΓG₁` (when `q ≥ p`) or `G₁Γ` (when
/// `q < p`). Assumes the initial condition holds so no impulse is needed.
pub fn limit_time_domain(plant: &Plant, gain: &GainOperator, yd: &[SignalExpr], u0: &SampledSignal) -> Result<TimeDomainLimit> {
    let grid = u0.grid();
    let sim = PlantSim::new(plant, grid)?;
    let sg1 = realize(plant.g1())?.times_s()?;
    let gss = gain.realization()?;
    let y_d = laplace::sample(yd, &grid);
    let yd_dot = laplace::sample(&laplace::derivative(yd), &grid);
    let u_inf = if plant.is_underactuated() {
        // U∞ = (ΓG₁)^{-1}(Γ₀+Γ̂)·L[ṙ]
        let free = sim.simulate(&SampledSignal::zeros(grid, plant.p()), None)?;
        let r_dot = yd_dot.sub(&free.y_dot)?;
        let k = gss.series(&sg1.series(&gss)?.inverse()?)?;
        simulate::lsim(&k, &r_dot, None, &vec![0.0; k.n()])?
    } else {
        // U∞ = U₀ + (Γ₀+Γ̂)(G₁Γ)^{-1}·L[ė₀]
        let first = sim.simulate(u0, None)?;
        let e0_dot = yd_dot.sub(&first.y_dot)?;
        let k = gss.series(&sg1)?.inverse()?.series(&gss)?;
        u0.add(&simulate::lsim(&k, &e0_dot, None, &vec![0.0; k.n()])?)?
    };
    let e_inf = y_d.sub(&sim.simulate(&u_inf, None)?.y)?;
    Ok(TimeDomainLimit { u_inf, e_inf })
}

/// Constants of the λ-norm contraction argument for the difference
/// recurrence `ΔF_{k+1} = G_F ΔF_k`: `G_F = I − ΓG₁` (input side) or
/// `I − G₁Γ` (output side).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FcsBound {
    pub side: Side,
    /// `‖D_F‖_∞` with `D_F = lim G_F(s)`.
    pub rho1: f64,
    /// `max_t ‖Φ_F(t)‖_∞` over the grid.
    pub beta_f: f64,
    /// `2β_F/(1 − ρ₁)`; absent when `ρ₁ ≥ 1`.
    pub lambda_star: Option<f64>,
    /// `(ρ₁ + 1)/2`; absent when `ρ₁ ≥ 1`.
    pub rho_bound: Option<f64>,
}

pub fn fcs_bound(plant: &Plant, gain: &GainOperator, grid: Grid) -> Result<FcsBound> {
    let sg1 = realize(plant.g1())?.times_s()?;
    let gss = gain.realization()?;
    let (side, m) = if plant.is_underactuated() {
        (Side::InputSide, sg1.series(&gss)?)
    } else {
        (Side::OutputSide, gss.series(&sg1)?)
    };
    let n = m.outputs();
    let rho1 = linalg::induced_inf_norm(&(DMatrix::identity(n, n) - m.d()));
    let beta_f = m
        .impulse_response(grid)?
        .iter()
        .map(linalg::induced_inf_norm)
        .fold(0.0, f64::max);
    let (lambda_star, rho_bound) = if rho1 < 1.0 {
        (Some((2.0 * beta_f / (1.0 - rho1)).max(1e-6)), Some((rho1 + 1.0) / 2.0))
    } else {
        (None, None)
    };
    Ok(FcsBound { side, rho1, beta_f, lambda_star, rho_bound })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FcsDiagnostic {
    pub ratios: Vec<f64>,
    /// Indices into `ratios` counted as late stage.
    pub late: Vec<usize>,
    pub fitted_rho: f64,
    pub is_contractive: bool,
    /// All increments are at round-off level: the run started at a fixed point.
    pub degenerate: bool,
}

/// Ratios `‖Δu_{k+1}‖_λ / ‖Δu_k‖_λ` of a run.
pub fn fcs_diagnostic(report: &IlcRunReport, lambda: f64) -> Result<FcsDiagnostic> {
    let norms = report
        .delta_u
        .iter()
        .map(|d| lambda_norm(d, lambda))
        .collect::<Result<Vec<_>>>()?;
    let floor = 1e-12 * (1.0 + report.yd_scale());
    if norms.iter().all(|&n| n <= floor) {
        return Ok(degenerate());
    }
    fcs_diagnostic_from_norms(&norms, report.bound.as_ref().and_then(|b| b.rho_bound))
}

fn degenerate() -> FcsDiagnostic {
    FcsDiagnostic { ratios: Vec::new(), late: Vec::new(), fitted_rho: 0.0, is_contractive: true, degenerate: true }
}

/// Diagnostic on a sequence of increment norms. Ratios are taken while the
/// norms stay above [`NOISE_FLOOR`] times their peak; the late stage is the
/// second half of those ratios.
pub fn fcs_diagnostic_from_norms(norms: &[f64], rho_bound: Option<f64>) -> Result<FcsDiagnostic> {
    if norms.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("increment norms"));
    }
    let peak = norms.iter().copied().fold(0.0, f64::max);
    if peak == 0.0 {
        return Ok(degenerate());
    }
    let live = norms.iter().take_while(|&&n| n > NOISE_FLOOR * peak).count();
    if live < 2 {
        return Ok(degenerate());
    }
    let ratios: Vec<f64> = norms[..live].windows(2).map(|w| w[1] / w[0]).collect();
    let start = ratios.len() / 2;
    let late: Vec<usize> = (start..ratios.len()).collect();
    let fitted_rho = (late.iter().map(|&i| ratios[i].ln()).sum::<f64>() / late.len() as f64).exp();
    let within = match rho_bound {
        Some(b) => late.iter().all(|&i| ratios[i] <= b + 0.05),
        None => true,
    };
    Ok(FcsDiagnostic { is_contractive: fitted_rho < 1.0 && within, ratios, late, fitted_rho, degenerate: false })
}

/// Iteration-varying perturbation of the exogenous input: an impulsive part
/// with `‖θ_k‖_∞ ≤ β_θ` and a regular part with `sup_t ‖θ̂_k(t)‖_∞ ≤ β_θ̂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisturbanceModel {
    pub beta_theta: f64,
    pub beta_thetahat: f64,
    pub seed: u64,
}

impl DisturbanceModel {
    pub fn new(beta_theta: f64, beta_thetahat: f64, seed: u64) -> Result<Self> {
        if !(beta_theta >= 0.0 && beta_thetahat >= 0.0 && beta_theta.is_finite() && beta_thetahat.is_finite()) {
            return Err(Error::InvalidArgument("disturbance bounds must be finite and nonnegative".into()));
        }
        Ok(DisturbanceModel { beta_theta, beta_thetahat, seed })
    }

    /// Draw for iteration `k`: each regular channel is `β_θ̂·a·sin(ωt + φ)`
    /// with `|a| ≤ 1`. Draws depend only on `(seed, k)`.
    pub fn sample(&self, k: usize, m: usize, grid: Grid) -> (Vec<f64>, SampledSignal) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(k as u64);
        let jump: Vec<f64> = (0..m).map(|_| self.beta_theta * rng.random_range(-1.0..=1.0)).collect();
        let waves: Vec<(f64, f64, f64)> = (0..m)
            .map(|_| {
                (
                    self.beta_thetahat * rng.random_range(-1.0..=1.0),
                    rng.random_range(0.5..5.0),
                    rng.random_range(0.0..std::f64::consts::TAU),
                )
            })
            .collect();
        let reg = SampledSignal::from_fn(grid, m, |t, ch| {
            let (a, w, phi) = waves[ch];
            a * (w * t + phi).sin()
        });
        (jump, reg)
    }
}

#[derive(Debug, Clone)]
pub struct RobustnessReport {
    pub model: DisturbanceModel,
    pub run: IlcRunReport,
    /// Max sup error over the last 20% of iterations.
    pub limsup_estimate: f64,
}

pub fn limsup_estimate(records: &[IterationRecord]) -> f64 {
    let tail = records.len().div_ceil(5).max(1);
    records[records.len().saturating_sub(tail)..]
        .iter()
        .map(|r| r.sup_error)
        .fold(0.0, f64::max)
}

pub fn robustness_run(
    plant: &Plant,
    gain: &GainOperator,
    yd: &Trajectory,
    u0: &SampledSignal,
    iterations: usize,
    model: &DisturbanceModel,
    options: &RunOptions,
) -> Result<RobustnessReport> {
    require_convergence(plant, gain)?;
    let run = run_inner(plant, gain, yd, u0, iterations, options, Some(model))?;
    let limsup_estimate = limsup_estimate(&run.records);
    Ok(RobustnessReport { model: *model, run, limsup_estimate })
}

/// Robustness runs for several `(β_θ, β_θ̂)` pairs sharing one seed.
#[allow(clippy::too_many_arguments)]
pub fn robustness_sweep(
    plant: &Plant,
    gain: &GainOperator,
    yd: &Trajectory,
    u0: &SampledSignal,
    iterations: usize,
    betas: &[(f64, f64)],
    seed: u64,
    options: &RunOptions,
    exec: Execution,
) -> Result<Vec<RobustnessReport>> {
    let models = betas
        .iter()
        .map(|&(a, b)| DisturbanceModel::new(a, b, seed))
        .collect::<Result<Vec<_>>>()?;
    par::par_map(&models, exec, |m| robustness_run(plant, gain, yd, u0, iterations, m, options))
        .into_iter()
        .collect()
}
