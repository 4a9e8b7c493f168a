//! Declarative experiment files (JSON) and the built-in examples.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ilc::{self, DisturbanceModel, GainOperator};
use crate::laplace::{self, ExogenousInput, SignalExpr};
use crate::ratmat::{RationalMatrix, RatioSpec};
use crate::simulate::{Grid, SampledSignal};
use crate::trackability::{self, Plant, Trajectory};

fn default_seed() -> u64 {
    7
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub plant: PlantSpec,
    pub gain: GainSpec,
    #[serde(default)]
    pub grid: Grid,
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disturbance: Option<DisturbanceSpec>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub cases: Vec<CaseSpec>,
}

/// `[G₁ G₂]` with `d = d₀δ + d̂`, or `(A, B, C, x₀, w)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum PlantSpec {
    Rational {
        g1: Vec<Vec<RatioSpec>>,
        #[serde(default)]
        g2: Vec<Vec<RatioSpec>>,
        #[serde(default)]
        d0: Vec<f64>,
        #[serde(default)]
        dhat: Vec<SignalExpr>,
    },
    StateSpace {
        a: Vec<Vec<f64>>,
        b: Vec<Vec<f64>>,
        c: Vec<Vec<f64>>,
        x0: Vec<f64>,
        #[serde(default)]
        w: Vec<SignalExpr>,
    },
}

/// `Γ(s)` as written, or a D-type gain `sΥ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum GainSpec {
    Rational { gamma: Vec<Vec<RatioSpec>> },
    Dtype { upsilon: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceSpec {
    pub beta_theta: f64,
    pub beta_thetahat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseSpec {
    pub name: String,
    pub yd: Vec<SignalExpr>,
    /// Empty means the zero input.
    #[serde(default)]
    pub u0: Vec<SignalExpr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ud2: Option<Vec<SignalExpr>>,
}

fn dense(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(Error::Scenario(format!("{what} must be a nonempty rectangular matrix")));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

fn rational(rows: &[Vec<RatioSpec>], what: &str) -> Result<RationalMatrix> {
    if rows.is_empty() || rows[0].is_empty() {
        return Err(Error::Scenario(format!("{what} must be nonempty")));
    }
    RationalMatrix::from_specs(rows).map_err(|e| Error::Scenario(format!("{what}: {e}")))
}

impl PlantSpec {
    pub fn build(&self) -> Result<Plant> {
        match self {
            PlantSpec::Rational { g1, g2, d0, dhat } => {
                let g1 = rational(g1, "g1")?;
                let g2 = if g2.is_empty() { RationalMatrix::zeros(g1.rows(), 0) } else { rational(g2, "g2")? };
                let m = g2.cols();
                let d0 = if d0.is_empty() { vec![0.0; m] } else { d0.clone() };
                let dhat = if dhat.is_empty() { vec![SignalExpr::zero(); m] } else { dhat.clone() };
                Plant::new(g1, g2, ExogenousInput::new(d0, dhat)?)
            }
            PlantSpec::StateSpace { a, b, c, x0, w } => {
                let a = dense(a, "a")?;
                let w = if w.is_empty() { vec![SignalExpr::zero(); a.nrows()] } else { w.clone() };
                trackability::statespace_plant(&a, &dense(b, "b")?, &dense(c, "c")?, x0, &w)
            }
        }
    }
}

impl GainSpec {
    pub fn build(&self, plant: &Plant) -> Result<GainOperator> {
        match self {
            GainSpec::Rational { gamma } => ilc::validate_gain(&rational(gamma, "gamma")?, Some(plant)),
            GainSpec::Dtype { upsilon } => {
                let g = ilc::dtype_gain(dense(upsilon, "upsilon")?)?;
                if g.p() != plant.p() || g.q() != plant.q() {
                    return Err(Error::Dimension(format!(
                        "gain is {}x{}, plant needs {}x{}",
                        g.p(),
                        g.q(),
                        plant.p(),
                        plant.q()
                    )));
                }
                Ok(g)
            }
        }
    }
}

/// A validated scenario: plant conditions and gain checked on construction.
#[derive(Debug, Clone)]
pub struct Scenario {
    spec: ScenarioSpec,
    plant: Plant,
    gain: GainOperator,
}

impl Scenario {
    pub fn from_spec(spec: ScenarioSpec) -> Result<Self> {
        if spec.cases.is_empty() {
            return Err(Error::Scenario("at least one case is required".into()));
        }
        Grid::new(spec.grid.t_end, spec.grid.nodes)?;
        if let Some(l) = spec.lambda {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::Scenario(format!("lambda must be positive, got {l}")));
            }
        }
        let plant = spec.plant.build()?;
        let gain = spec.gain.build(&plant)?;
        if let Some(d) = spec.disturbance {
            DisturbanceModel::new(d.beta_theta, d.beta_thetahat, spec.seed)?;
        }
        for (i, case) in spec.cases.iter().enumerate() {
            if spec.cases[..i].iter().any(|c| c.name == case.name) {
                return Err(Error::Scenario(format!("duplicate case name {:?}", case.name)));
            }
            if case.yd.len() != plant.q() {
                return Err(Error::Scenario(format!(
                    "case {}: yd has {} channels, plant has {} outputs",
                    case.name,
                    case.yd.len(),
                    plant.q()
                )));
            }
            if !case.u0.is_empty() && case.u0.len() != plant.p() {
                return Err(Error::Scenario(format!(
                    "case {}: u0 has {} channels, plant has {} inputs",
                    case.name,
                    case.u0.len(),
                    plant.p()
                )));
            }
            if let Some(ud2) = &case.ud2 {
                if ud2.len() + plant.q() != plant.p() {
                    return Err(Error::Scenario(format!("case {}: ud2 must have p - q channels", case.name)));
                }
            }
        }
        Ok(Scenario { spec, plant, gain })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ScenarioSpec = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        Scenario::from_spec(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Scenario::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.spec).expect("scenario serializes")
    }

    pub fn spec(&self) -> &ScenarioSpec {
        &self.spec
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn plant(&self) -> &Plant {
        &self.plant
    }

    pub fn gain(&self) -> &GainOperator {
        &self.gain
    }

    pub fn grid(&self) -> Grid {
        self.spec.grid
    }

    pub fn iterations(&self) -> usize {
        self.spec.iterations
    }

    pub fn seed(&self) -> u64 {
        self.spec.seed
    }

    pub fn cases(&self) -> &[CaseSpec] {
        &self.spec.cases
    }

    pub fn case(&self, name: &str) -> Result<&CaseSpec> {
        self.spec.cases.iter().find(|c| c.name == name).ok_or_else(|| {
            let names: Vec<&str> = self.spec.cases.iter().map(|c| c.name.as_str()).collect();
            Error::Scenario(format!("no case {name:?}; available: {}", names.join(", ")))
        })
    }

    pub fn u0_exprs(&self, case: &CaseSpec) -> Vec<SignalExpr> {
        if case.u0.is_empty() {
            vec![SignalExpr::zero(); self.plant.p()]
        } else {
            case.u0.clone()
        }
    }

    pub fn u0_signal(&self, case: &CaseSpec) -> SampledSignal {
        laplace::sample(&self.u0_exprs(case), &self.grid())
    }

    pub fn trajectory(&self, case: &CaseSpec) -> Trajectory {
        Trajectory::Analytic(case.yd.clone())
    }

    pub fn disturbance(&self, seed: Option<u64>) -> Option<DisturbanceModel> {
        self.spec.disturbance.map(|d| DisturbanceModel {
            beta_theta: d.beta_theta,
            beta_thetahat: d.beta_thetahat,
            seed: seed.unwrap_or(self.spec.seed),
        })
    }
}

/// The two worked examples and a state-space D-type scenario.
pub mod builtin {
    use super::*;
    use crate::laplace::Term;
    use std::f64::consts::PI;

    pub const NAMES: [&str; 4] = ["example1", "example2", "dtype", "dtype_divergent"];

    fn spec(num: &[f64], den: &[f64]) -> RatioSpec {
        RatioSpec { num: num.to_vec(), den: den.to_vec() }
    }

    fn matrix(rows: &[Vec<RatioSpec>]) -> RationalMatrix {
        RationalMatrix::from_specs(rows).expect("built-in matrix is valid")
    }

    fn example1_g1_specs() -> Vec<Vec<RatioSpec>> {
        let d2 = [20.0, 30.0, 10.0];
        let d2b = [200.0, 300.0, 100.0];
        let d3 = [300.0, 550.0, 300.0, 50.0];
        vec![
            vec![spec(&[-17.0, 12.0], &d2), spec(&[-17.0, 12.0], &d2)],
            vec![spec(&[82.0, 111.0], &d2b), spec(&[82.0, 111.0], &d2b)],
            vec![spec(&[-216.0, -133.0, 25.0], &d3), spec(&[-144.0, -25.0, 61.0], &d3)],
        ]
    }

    fn example1_g2_specs() -> Vec<Vec<RatioSpec>> {
        vec![
            vec![spec(&[1.0], &[1.0, 1.0]), spec(&[1.0], &[1.0, 1.0]), spec(&[-39.0, 1.0], &[20.0, 30.0, 10.0])],
            vec![spec(&[1.0], &[10.0, 10.0]), spec(&[1.0], &[10.0, 10.0]), spec(&[3.0, 5.0], &[10.0, 15.0, 5.0])],
            vec![
                spec(&[1.0], &[5.0, 5.0]),
                spec(&[7.0, 5.0], &[15.0, 20.0, 5.0]),
                spec(&[-29.0, -20.0, 1.0], &[30.0, 55.0, 30.0, 5.0]),
            ],
        ]
    }

    fn transpose<T: Clone>(m: Vec<Vec<T>>) -> Vec<Vec<T>> {
        (0..m[0].len()).map(|j| m.iter().map(|row| row[j].clone()).collect()).collect()
    }

    fn example2_g1_specs() -> Vec<Vec<RatioSpec>> {
        let d3 = [120.0, 220.0, 120.0, 20.0];
        let d3b = [600.0, 1100.0, 600.0, 100.0];
        let d3c = [60.0, 110.0, 60.0, 10.0];
        let d3d = [300.0, 550.0, 300.0, 50.0];
        transpose(vec![
            vec![spec(&[195.0, 155.0, 24.0], &d3), spec(&[273.0, 361.0, 120.0], &d3b)],
            vec![spec(&[-348.0, 523.0, 111.0], &d3b), spec(&[-240.0, -53.0, 111.0], &d3b)],
            vec![spec(&[45.0, 42.0, 5.0], &d3c), spec(&[99.0, 156.0, 61.0], &d3d)],
        ])
    }

    fn example2_g2_specs() -> Vec<Vec<RatioSpec>> {
        transpose(vec![
            vec![spec(&[1.0], &[1.0, 1.0]), spec(&[1.0], &[10.0, 10.0])],
            vec![spec(&[21.0, 1.0], &[30.0, 40.0, 10.0]), spec(&[6.0, 5.0], &[15.0, 20.0, 5.0])],
            vec![spec(&[-9.0, 9.0, 2.0], &[12.0, 22.0, 12.0, 2.0]), spec(&[-27.0, -9.0, 10.0], &[60.0, 110.0, 60.0, 10.0])],
        ])
    }

    fn s_times(rows: &[&[f64]]) -> Vec<Vec<RatioSpec>> {
        rows.iter().map(|r| r.iter().map(|&v| spec(&[0.0, v], &[1.0])).collect()).collect()
    }

    const EX1_GAMMA: [[f64; 3]; 2] = [[0.6849, 0.6335, -1.25], [-0.2807, -0.2596, 1.25]];
    const EX2_GAMMA: [[f64; 2]; 3] = [[0.6, 0.1], [0.1, 0.1], [-0.5, 0.4]];

    pub fn example1_g1() -> RationalMatrix {
        matrix(&example1_g1_specs())
    }

    pub fn example1_g2() -> RationalMatrix {
        matrix(&example1_g2_specs())
    }

    pub fn example2_g1() -> RationalMatrix {
        matrix(&example2_g1_specs())
    }

    pub fn example2_g2() -> RationalMatrix {
        matrix(&example2_g2_specs())
    }

    pub fn example1_gamma0() -> DMatrix<f64> {
        DMatrix::from_fn(2, 3, |i, j| EX1_GAMMA[i][j])
    }

    pub fn example2_gamma0() -> DMatrix<f64> {
        DMatrix::from_fn(3, 2, |i, j| EX2_GAMMA[i][j])
    }

    pub fn example1_plant() -> Plant {
        Plant::new(example1_g1(), example1_g2(), ExogenousInput::zero(3)).expect("example 1 satisfies C1-C4")
    }

    pub fn example2_plant() -> Plant {
        Plant::new(example2_g1(), example2_g2(), ExogenousInput::zero(3)).expect("example 2 satisfies C1-C4")
    }

    pub fn example1_gain() -> GainOperator {
        ilc::dtype_gain(example1_gamma0()).expect("nonzero gain")
    }

    pub fn example2_gain() -> GainOperator {
        ilc::dtype_gain(example2_gamma0()).expect("nonzero gain")
    }

    /// Desired output of Example 1; cases `a` and `b` share it, `c` changes
    /// the sine coefficient of the first channel.
    pub fn example1_yd(case: char) -> Vec<SignalExpr> {
        let k = 57420.0 / 3809.0;
        let sin_coeff = if case == 'c' { -2.0 / 5.0 } else { -1240.0 / 3809.0 };
        vec![
            SignalExpr::new(vec![Term::cos(k, 1.0), Term::exp(-k, -82.0 / 111.0), Term::sin(sin_coeff, 1.0)]),
            SignalExpr::new(vec![Term::sin(10.0, 1.0)]),
            SignalExpr::new(vec![Term::sin(10.0, PI / 5.0)]),
        ]
    }

    pub fn example2_yd() -> Vec<SignalExpr> {
        vec![SignalExpr::new(vec![Term::sin(10.0, 1.0)]), SignalExpr::new(vec![Term::sin(10.0, PI / 5.0)])]
    }

    fn constants(v: &[f64]) -> Vec<SignalExpr> {
        v.iter().map(|&c| SignalExpr::new(vec![Term::constant(c)])).collect()
    }

    fn case(name: &str, yd: Vec<SignalExpr>, u0: Vec<SignalExpr>) -> CaseSpec {
        CaseSpec { name: name.into(), yd, u0, ud2: None }
    }

    pub fn example1_spec() -> ScenarioSpec {
        ScenarioSpec {
            name: "example1".into(),
            description: "q=3 outputs, p=2 inputs, D-type gain; cases a and b share a trackable trajectory, c is untrackable".into(),
            plant: PlantSpec::Rational { g1: example1_g1_specs(), g2: example1_g2_specs(), d0: vec![0.0; 3], dhat: Vec::new() },
            gain: GainSpec::Rational { gamma: s_times(&[&EX1_GAMMA[0], &EX1_GAMMA[1]]) },
            grid: Grid::default(),
            iterations: 100,
            lambda: None,
            disturbance: None,
            seed: default_seed(),
            cases: vec![
                case("a", example1_yd('a'), Vec::new()),
                case("b", example1_yd('b'), constants(&[10.0, -10.0])),
                case("c", example1_yd('c'), Vec::new()),
            ],
        }
    }

    pub fn example2_spec() -> ScenarioSpec {
        ScenarioSpec {
            name: "example2".into(),
            description: "q=2 outputs, p=3 inputs, D-type gain; cases d and e differ only in the initial input".into(),
            plant: PlantSpec::Rational { g1: example2_g1_specs(), g2: example2_g2_specs(), d0: vec![0.0; 3], dhat: Vec::new() },
            gain: GainSpec::Rational { gamma: s_times(&[&EX2_GAMMA[0], &EX2_GAMMA[1], &EX2_GAMMA[2]]) },
            grid: Grid::default(),
            iterations: 200,
            lambda: None,
            disturbance: None,
            seed: default_seed(),
            cases: vec![case("d", example2_yd(), Vec::new()), case("e", example2_yd(), constants(&[10.0, -10.0, 5.0]))],
        }
    }

    fn dtype_with(name: &str, gain: f64) -> ScenarioSpec {
        ScenarioSpec {
            name: name.into(),
            description: format!("state-space plant with CB = I and D-type gain {gain}·I"),
            plant: PlantSpec::StateSpace {
                a: vec![vec![-1.0, 0.5, 0.0], vec![0.0, -2.0, 1.0], vec![0.3, 0.0, -3.0]],
                b: vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5]],
                c: vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]],
                x0: vec![0.5, 0.0, 0.0],
                w: vec![
                    SignalExpr::zero(),
                    SignalExpr::new(vec![Term::sin(0.1, 3.0)]),
                    SignalExpr::new(vec![Term::constant(0.05)]),
                ],
            },
            gain: GainSpec::Dtype { upsilon: vec![vec![gain, 0.0], vec![0.0, gain]] },
            grid: Grid::default(),
            iterations: 150,
            lambda: None,
            disturbance: None,
            seed: default_seed(),
            cases: vec![case(
                "nominal",
                vec![
                    SignalExpr::new(vec![Term::cos(0.5, 1.0), Term::sin(1.0, 1.0)]),
                    SignalExpr::new(vec![Term::sin(1.0, 2.0)]),
                ],
                Vec::new(),
            )],
        }
    }

    pub fn dtype_spec() -> ScenarioSpec {
        dtype_with("dtype", 0.5)
    }

    pub fn dtype_divergent_spec() -> ScenarioSpec {
        dtype_with("dtype_divergent", 2.5)
    }

    pub fn spec_by_name(name: &str) -> Option<ScenarioSpec> {
        match name {
            "example1" => Some(example1_spec()),
            "example2" => Some(example2_spec()),
            "dtype" => Some(dtype_spec()),
            "dtype_divergent" => Some(dtype_divergent_spec()),
            _ => None,
        }
    }

    pub fn by_name(name: &str) -> Option<Scenario> {
        spec_by_name(name).map(|s| Scenario::from_spec(s).expect("built-in scenario is valid"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_validate() {
        let s1 = builtin::by_name("example1").unwrap();
        assert_eq!((s1.plant().q(), s1.plant().p(), s1.grid().t_end, s1.iterations()), (3, 2, 10.0, 100));
        let s2 = builtin::by_name("example2").unwrap();
        assert_eq!((s2.plant().q(), s2.plant().p(), s2.iterations()), (2, 3, 200));
        for name in builtin::NAMES {
            assert!(builtin::by_name(name).is_some());
        }
    }

    #[test]
    fn round_trip() {
        for name in builtin::NAMES {
            let s = builtin::by_name(name).unwrap();
            let back = Scenario::from_json(&s.to_json()).unwrap();
            assert_eq!(back.spec(), s.spec());
        }
    }

    #[test]
    fn parse_error_has_position() {
        let text = builtin::by_name("example1").unwrap().to_json().replacen("-17.0", "-17.0.5", 1);
        match Scenario::from_json(&text) {
            Err(Error::Parse { line, .. }) => assert!(line > 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn two_plant_forms_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(&builtin::by_name("dtype").unwrap().to_json()).unwrap();
        v["plant"]["g1"] = serde_json::json!([[{"num": [1.0], "den": [1.0, 1.0]}]]);
        assert!(Scenario::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn case_lookup() {
        let s = builtin::by_name("example1").unwrap();
        assert!(s.case("b").is_ok());
        assert!(matches!(s.case("z"), Err(Error::Scenario(_))));
        let u0 = s.u0_signal(s.case("b").unwrap());
        assert_eq!(u0.row(0), &[10.0, -10.0]);
    }
}
