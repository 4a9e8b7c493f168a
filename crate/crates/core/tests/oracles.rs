use ilc_core::ilc::{self, RunOptions};
use ilc_core::laplace::{self, ExogenousInput, SignalExpr, Term};
use ilc_core::linalg;
use ilc_core::poly::Poly;
use ilc_core::ratmat::{ProbeSampler, Ratio, RationalMatrix};
use ilc_core::realization::realize;
use ilc_core::scenario::builtin;
use ilc_core::simulate::{sup_norm, Grid, SampledSignal};
use ilc_core::trackability::{Plant, Trajectory};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn ratio(num: &[f64], den: &[f64]) -> Ratio {
    Ratio::from_coeffs(num, den).unwrap()
}

fn square_plant() -> Plant {
    let g1 = RationalMatrix::new(
        2,
        2,
        vec![ratio(&[1.0], &[1.0, 1.0]), ratio(&[1.0], &[2.0, 1.0]), Ratio::zero(), ratio(&[2.0], &[3.0, 1.0])],
    )
    .unwrap();
    Plant::new(g1, RationalMatrix::zeros(2, 0), ExogenousInput::zero(0)).unwrap()
}

/// `Γ(s) = s(Γ₀ + Γ₀/(s+2))` written out as one fraction per entry.
fn filtered_gain(g0: &DMatrix<f64>) -> RationalMatrix {
    RationalMatrix::from_fn(g0.nrows(), g0.ncols(), |i, j| {
        let k = g0[(i, j)];
        ratio(&[0.0, 3.0 * k, k], &[2.0, 1.0])
    })
}

/// One learning update computed two ways: stepping the time-domain law, and
/// forming `U₀ + Γ(Y_d − G₁U₀)` as a rational vector whose inverse Laplace
/// transform is the impulse response of its realization.
#[test]
fn single_update_matches_rational_route() {
    let plant = square_plant();
    let g0 = DMatrix::from_row_slice(2, 2, &[0.8, -0.3, 0.0, 0.4]);
    let raw = filtered_gain(&g0);
    let gain = ilc::validate_gain(&raw, Some(&plant)).unwrap();
    assert!(!gain.is_dtype());

    let yd = vec![
        SignalExpr::new(vec![Term::sin(1.0, 1.0)]),
        SignalExpr::new(vec![Term::cos(0.5, 2.0), Term::exp(-0.5, -1.0)]),
    ];
    let u0 = vec![SignalExpr::new(vec![Term::constant(0.5)]), SignalExpr::new(vec![Term::constant(-0.25)])];
    let grid = Grid::new(5.0, 1001).unwrap();
    let u0s = laplace::sample(&u0, &grid);
    let run = ilc::ilc_run(&plant, &gain, &Trajectory::Analytic(yd.clone()), &u0s, 1, &RunOptions::default()).unwrap();

    let e0 = laplace::laplace_transform(&yd).sub(&plant.g1().mul(&laplace::laplace_transform(&u0)).unwrap()).unwrap();
    let update = raw.mul(&e0).unwrap();
    let ss = realize(&update).unwrap();
    assert!(ss.d().amax() < 1e-9, "update carries an impulse");
    let h = ss.impulse_response(grid).unwrap();
    let values: Vec<f64> = (0..grid.nodes)
        .flat_map(|i| (0..2).map(move |ch| (i, ch)))
        .map(|(i, ch)| u0[ch].eval(grid.t(i)) + h[i][(ch, 0)])
        .collect();
    let expected = SampledSignal::new(grid, 2, values).unwrap();
    let gap = sup_norm(&run.u_final.sub(&expected).unwrap());
    assert!(gap <= 1e-4 * (1.0 + sup_norm(&expected)), "gap {gap}");
}

#[test]
fn square_plant_limits_agree() {
    let plant = square_plant();
    let gain = ilc::validate_gain(&filtered_gain(&DMatrix::from_row_slice(2, 2, &[0.8, -0.3, 0.0, 0.4])), Some(&plant)).unwrap();
    let yd = vec![SignalExpr::new(vec![Term::sin(1.0, 1.0)]), SignalExpr::new(vec![Term::sin(2.0, 0.5)])];
    let zero = vec![SignalExpr::zero(); 2];
    let under = ilc::predict_limit_underactuated(&plant, &gain, &yd).unwrap();
    let over = ilc::predict_limit_overactuated(&plant, &gain, &yd, &zero).unwrap();
    let mut probes = ProbeSampler::new(5);
    for s0 in probes.sample(10, &[plant.g1(), gain.gammahat()]).unwrap() {
        let a = (under.u_inf)(s0).unwrap();
        let b = over(s0).unwrap();
        assert!(linalg::cmax_abs(&(&a - &b)) <= 1e-9 * (1.0 + linalg::cmax_abs(&a)));
        assert!(linalg::cmax_abs(&(under.e_inf)(s0).unwrap()) < 1e-9);
    }
}

#[test]
fn filtered_gain_run_converges() {
    let plant = square_plant();
    let gain = ilc::validate_gain(&filtered_gain(&DMatrix::from_row_slice(2, 2, &[0.8, -0.3, 0.0, 0.4])), Some(&plant)).unwrap();
    let yd = vec![SignalExpr::new(vec![Term::sin(1.0, 1.0)]), SignalExpr::new(vec![Term::sin(2.0, 0.5)])];
    let grid = Grid::new(5.0, 1001).unwrap();
    let run = ilc::ilc_run(&plant, &gain, &Trajectory::Analytic(yd.clone()), &SampledSignal::zeros(grid, 2), 60, &RunOptions::default()).unwrap();
    assert!(run.final_sup_error() <= 1e-2 * run.yd_scale());
    let limit = ilc::limit_time_domain(&plant, &gain, &yd, &SampledSignal::zeros(grid, 2)).unwrap();
    assert!(sup_norm(&run.u_final.sub(&limit.u_inf).unwrap()) <= 2e-2);
}

#[test]
fn printed_limit_products() {
    let p1 = builtin::example1_plant();
    let m1 = builtin::example1_gamma0() * p1.phi1();
    let want1 = [[0.900065, 0.000065], [0.000004, 0.900004]];
    let p2 = builtin::example2_plant();
    let m2 = p2.phi1() * builtin::example2_gamma0();
    let want2 = [[0.581, 0.431], [0.221, 0.719]];
    for i in 0..2 {
        for j in 0..2 {
            assert!((m1[(i, j)] - want1[i][j]).abs() < 5e-6, "{m1}");
            assert!((m2[(i, j)] - want2[i][j]).abs() < 5e-4, "{m2}");
        }
    }
    let f2 = DMatrix::identity(2, 2) - m2;
    assert!((linalg::induced_inf_norm(&f2) - 0.85).abs() < 1e-3);
}

#[test]
fn larger_lambda_keeps_contraction() {
    let s = builtin::by_name("example1").unwrap();
    let case = s.case("a").unwrap();
    let run = ilc::ilc_run(s.plant(), s.gain(), &s.trajectory(case), &s.u0_signal(case), 40, &RunOptions::default()).unwrap();
    let lambda_star = run.bound.as_ref().unwrap().lambda_star.unwrap();
    for factor in [1.0, 2.0, 4.0, 16.0] {
        let d = ilc::fcs_diagnostic(&run, lambda_star * factor).unwrap();
        assert!(d.is_contractive, "λ = {factor}·λ*: {:?}", d.ratios);
    }
}

#[test]
fn zero_iterations_only_simulate() {
    let s = builtin::by_name("example1").unwrap();
    let case = s.case("b").unwrap();
    let u0 = s.u0_signal(case);
    let run = ilc::ilc_run(s.plant(), s.gain(), &s.trajectory(case), &u0, 0, &RunOptions::default()).unwrap();
    assert_eq!(run.records.len(), 1);
    assert_eq!(run.u_final, u0);
}

#[test]
fn untrackable_limit_error_is_nonzero() {
    let plant = builtin::example1_plant();
    let pred = ilc::predict_limit_underactuated(&plant, &builtin::example1_gain(), &builtin::example1_yd('c')).unwrap();
    let s0 = Complex64::new(0.9, 2.3);
    assert!(linalg::cmax_abs(&(pred.e_inf)(s0).unwrap()) > 1e-4);
}

fn stable_ratio(roots: &[f64], num: &[f64]) -> Ratio {
    let den = roots.iter().fold(Poly::one(), |acc, &r| acc.mul(&Poly::new(vec![-r, 1.0])));
    Ratio::new(Poly::new(num[..roots.len()].to_vec()), den).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn realization_reproduces_transfer(
        roots in prop::collection::vec(-5.0f64..-0.5, 1..4),
        num in prop::collection::vec(-3.0f64..3.0, 4),
        roots2 in prop::collection::vec(-5.0f64..-0.5, 1..3),
        num2 in prop::collection::vec(-3.0f64..3.0, 4),
        re in 0.5f64..4.0,
        im in 0.5f64..4.0,
    ) {
        let a = stable_ratio(&roots, &num);
        let b = stable_ratio(&roots2, &num2);
        let g = RationalMatrix::new(2, 2, vec![a.clone(), b.clone(), b.add(&a), Ratio::zero()]).unwrap();
        let ss = realize(&g).unwrap();
        let s0 = Complex64::new(re, im);
        let exact = g.eval(s0).unwrap();
        let diff = linalg::cmax_abs(&(ss.transfer_eval(s0).unwrap() - &exact));
        prop_assert!(diff <= 1e-8 * (1.0 + linalg::cmax_abs(&exact)));
        let m1 = g.markov(2).unwrap();
        let m2 = ss.markov(2);
        for k in 0..2 {
            prop_assert!((&m1[k] - &m2[k]).amax() <= 1e-8 * (1.0 + m1[k].amax()));
        }
    }
}
