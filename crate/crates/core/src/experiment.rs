//! Scenario-level analyses, runs and cross-checks shared by the CLI and the
//! acceptance suite.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ilc::{self, ConvergenceCheck, FcsBound, IlcRunReport, RunOptions, RunSummary};
use crate::par::{self, Execution};
use crate::ratmat::ProbeSampler;
use crate::scenario::{CaseSpec, Scenario};
use crate::simulate::sup_norm;
use crate::trackability::{self, VerdictReport, TRACK_PROBES};

/// Relative tracking tolerance of a converged run.
pub const TRACKING_TOL: f64 = 1e-2;
/// Sup-norm tolerance between a simulated limit and its closed form.
pub const LIMIT_TOL: f64 = 2e-2;
/// Minimum sup-norm gap between learned inputs from different initial inputs
/// when the solution set is not a singleton.
pub const DISTINCT_GAP: f64 = 0.2;
/// Relative membership residual accepted at each probe.
pub const MEMBERSHIP_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub scenario: String,
    pub case: String,
    pub q: usize,
    pub p: usize,
    pub m: usize,
    pub verdict: VerdictReport,
    pub classification: String,
    pub convergence: ConvergenceCheck,
    pub bound: Option<FcsBound>,
}

impl AnalysisReport {
    pub fn render(&self) -> String {
        let cond = match self.convergence.side {
            ilc::Side::InputSide => "rho(I - G0 Phi1(0))",
            ilc::Side::OutputSide => "rho(I - Phi1(0) G0)",
        };
        let mut out = format!(
            "scenario {} case {}\n  dimensions   q={} p={} m={}\n  verdict      {}\n  residual     {:.3e} (relative {:.3e}, {} probes)\n  initial cond {}\n  convergence  {} = {:.6} ({})\n",
            self.scenario,
            self.case,
            self.q,
            self.p,
            self.m,
            self.classification,
            self.verdict.residual,
            self.verdict.relative_residual,
            self.verdict.probes_used,
            if self.verdict.initial_condition_ok { "ok" } else { "violated" },
            cond,
            self.convergence.rho,
            if self.convergence.satisfied { "satisfied" } else { "violated" },
        );
        if let Some(b) = &self.bound {
            out.push_str(&format!("  contraction  rho1={:.6} beta_F={:.6}", b.rho1, b.beta_f));
            if let Some(l) = b.lambda_star {
                out.push_str(&format!(" lambda*={l:.6}"));
            }
            out.push('\n');
        }
        out
    }
}

fn classify(v: &VerdictReport) -> &'static str {
    match (v.trackable, v.realizable) {
        (true, true) => "trackable, realizable",
        (true, false) => "trackable, not realizable",
        _ => "untrackable",
    }
}

pub fn analyze(scenario: &Scenario, case: &str) -> Result<AnalysisReport> {
    let spec = scenario.case(case)?;
    let plant = scenario.plant();
    let mut probes = ProbeSampler::new(scenario.seed());
    let verdict = trackability::check_trackable(plant, &scenario.trajectory(spec), &mut probes)?.report();
    Ok(AnalysisReport {
        scenario: scenario.name().to_string(),
        case: spec.name.clone(),
        q: plant.q(),
        p: plant.p(),
        m: plant.m(),
        classification: classify(&verdict).to_string(),
        verdict,
        convergence: ilc::check_convergence_condition(plant, scenario.gain())?,
        bound: ilc::fcs_bound(plant, scenario.gain(), scenario.grid()).ok(),
    })
}

#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    pub iterations: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct CaseRun {
    pub scenario: String,
    pub case: String,
    pub report: IlcRunReport,
    /// Present when the scenario carries a disturbance model.
    pub limsup_estimate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRunSummary {
    pub scenario: String,
    pub case: String,
    #[serde(flatten)]
    pub run: RunSummary,
    pub limsup_estimate: Option<f64>,
}

impl CaseRun {
    pub fn summary(&self) -> CaseRunSummary {
        CaseRunSummary {
            scenario: self.scenario.clone(),
            case: self.case.clone(),
            run: self.report.summary(),
            limsup_estimate: self.limsup_estimate,
        }
    }
}

fn run_options(scenario: &Scenario, iterations: usize) -> RunOptions {
    RunOptions {
        lambda: scenario.spec().lambda,
        snapshots: vec![0, 1, 10, iterations / 2],
        ..RunOptions::default()
    }
}

pub fn run_case(scenario: &Scenario, case: &str, config: &RunConfig) -> Result<CaseRun> {
    let spec = scenario.case(case)?;
    let iterations = config.iterations.unwrap_or(scenario.iterations());
    let options = run_options(scenario, iterations);
    let (plant, gain) = (scenario.plant(), scenario.gain());
    let yd = scenario.trajectory(spec);
    let u0 = scenario.u0_signal(spec);
    let (report, limsup_estimate) = match scenario.disturbance(config.seed) {
        Some(model) => {
            let r = ilc::robustness_run(plant, gain, &yd, &u0, iterations, &model, &options)?;
            (r.run, Some(r.limsup_estimate))
        }
        None => (ilc::ilc_run(plant, gain, &yd, &u0, iterations, &options)?, None),
    };
    Ok(CaseRun { scenario: scenario.name().to_string(), case: spec.name.clone(), report, limsup_estimate })
}

/// Runs several cases, optionally in parallel.
pub fn run_cases(scenario: &Scenario, cases: &[String], config: &RunConfig, exec: Execution) -> Vec<Result<CaseRun>> {
    par::par_map(cases, exec, |c| run_case(scenario, c, config))
}

/// Writes `metrics.csv`, `signals_k<K>.csv` for every snapshot and
/// `summary.json` into `dir`.
pub fn write_outputs(report: &IlcRunReport, summary: &impl Serialize, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let metrics = dir.join("metrics.csv");
    report.write_metrics_csv(BufWriter::new(File::create(&metrics)?))?;
    written.push(metrics);
    let (p, q) = (report.u_final.dims(), report.yd.dims());
    let mut names: Vec<String> = (1..=p).map(|i| format!("u{i}")).collect();
    for prefix in ["y", "e", "yd"] {
        names.extend((1..=q).map(|i| format!("{prefix}{i}")));
    }
    for snap in &report.snapshots {
        let table = snap.u.stack(&snap.y)?.stack(&snap.e)?.stack(&report.yd)?;
        let path = dir.join(format!("signals_k{}.csv", snap.k));
        table.write_csv(BufWriter::new(File::create(&path)?), &names)?;
        written.push(path);
    }
    let path = dir.join("summary.json");
    let mut text = serde_json::to_string_pretty(summary).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    text.push('\n');
    std::fs::write(&path, text)?;
    written.push(path);
    Ok(written)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    /// Threshold the measurement is compared against.
    pub tolerance: f64,
    /// `true` when `measured` must stay at or below `tolerance`, `false` when it must exceed it.
    pub upper: bool,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Check { name: name.into(), measured, tolerance, upper: true, passed: measured <= tolerance }
    }

    pub fn above(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Check { name: name.into(), measured, tolerance, upper: false, passed: measured > tolerance }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}: {:.3e} {} {:.3e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            if self.upper { "<=" } else { ">" },
            self.tolerance
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub scenario: String,
    pub case: String,
    pub analysis: AnalysisReport,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut out = self.analysis.render();
        for c in &self.checks {
            out.push_str("  ");
            out.push_str(&c.line());
            out.push('\n');
        }
        out
    }
}

fn contraction_checks(report: &IlcRunReport) -> Result<Vec<Check>> {
    let diag = ilc::fcs_diagnostic(report, report.lambda)?;
    let mut checks = vec![Check::at_most("fitted contraction ratio", diag.fitted_rho, 1.0 - f64::EPSILON)];
    if let Some(bound) = report.bound.as_ref().and_then(|b| b.rho_bound) {
        let worst = diag.late.iter().map(|&i| diag.ratios[i]).fold(0.0, f64::max);
        checks.push(Check::at_most("late-stage ratio", worst, bound + 0.05));
    }
    Ok(checks)
}

fn same_trajectory(a: &CaseSpec, b: &CaseSpec) -> bool {
    a.name != b.name && a.yd == b.yd
}

/// Runs the case and compares the learned limit with its closed form, plus
/// the uniqueness or non-uniqueness claim against sibling cases that share
/// the trajectory.
pub fn verify(scenario: &Scenario, case: &str, exec: Execution) -> Result<VerifyReport> {
    let spec = scenario.case(case)?;
    let analysis = analyze(scenario, case)?;
    let (plant, gain) = (scenario.plant(), scenario.gain());
    let config = RunConfig::default();
    let siblings: Vec<String> = scenario
        .cases()
        .iter()
        .filter(|c| same_trajectory(c, spec))
        .map(|c| c.name.clone())
        .collect();
    let mut names = vec![spec.name.clone()];
    names.extend(siblings);
    let mut runs = run_cases(scenario, &names, &config, exec).into_iter();
    let run = runs.next().expect("own run")?;
    let others = runs.collect::<Result<Vec<_>>>()?;
    let report = &run.report;
    let scale = report.yd_scale();
    let u0 = scenario.u0_signal(spec);
    let mut checks = Vec::new();

    if analysis.verdict.trackable {
        checks.push(Check::at_most("final sup error / max|yd|", report.final_sup_error() / scale.max(f64::MIN_POSITIVE), TRACKING_TOL));
    } else {
        let first = report.records.first().map_or(0.0, |r| r.lambda_norm_delta_u);
        let last = report.records.last().map_or(0.0, |r| r.lambda_norm_delta_u);
        checks.push(Check::at_most("input increment decay", last / first.max(f64::MIN_POSITIVE), 1e-6));
    }
    checks.extend(contraction_checks(report)?);

    let limit = ilc::limit_time_domain(plant, gain, &spec.yd, &u0)?;
    if plant.is_underactuated() {
        checks.push(Check::at_most("error vs closed-form limit", sup_norm(&report.e_final.sub(&limit.e_inf)?), LIMIT_TOL));
        if analysis.verdict.trackable {
            let mut probes = ProbeSampler::new(scenario.seed());
            let ud = trackability::desired_input_underactuated(plant, &spec.yd, &mut probes)?;
            let points = trackability::probe_points(plant, &spec.yd, TRACK_PROBES, &mut probes)?;
            let (_, rel) = trackability::membership_residual(plant, &spec.yd, &ud, &points)?;
            checks.push(Check::at_most("desired input residual", rel, MEMBERSHIP_TOL));
        }
        for other in &others {
            let gap = sup_norm(&report.u_final.sub(&other.report.u_final)?);
            checks.push(Check::at_most(format!("learned input agrees with case {}", other.case), gap, LIMIT_TOL));
        }
    } else if analysis.verdict.trackable {
        let mut probes = ProbeSampler::new(scenario.seed());
        let points = trackability::probe_points(plant, &spec.yd, TRACK_PROBES, &mut probes)?;
        let u_inf = ilc::predict_limit_overactuated(plant, gain, &spec.yd, &scenario.u0_exprs(spec))?;
        let (_, rel) = trackability::membership_residual(plant, &spec.yd, &u_inf, &points)?;
        checks.push(Check::at_most("limit membership residual", rel, MEMBERSHIP_TOL));
        let mut dual = 0.0f64;
        for &s0 in &points {
            let a = ilc::gamma_tilde_blocks(plant, gain, s0)?;
            let b = ilc::gamma_tilde_direct(plant, gain, s0)?;
            dual = dual.max(crate::linalg::cmax_abs(&(a - b)));
        }
        checks.push(Check::at_most("complement gain two-route agreement", dual, 1e-8));
        checks.push(Check::at_most("input vs closed-form limit", sup_norm(&report.u_final.sub(&limit.u_inf)?), LIMIT_TOL));
        for other in &others {
            let gap = sup_norm(&report.u_final.sub(&other.report.u_final)?);
            checks.push(Check::above(format!("learned input differs from case {}", other.case), gap, DISTINCT_GAP));
        }
    }
    Ok(VerifyReport { scenario: scenario.name().to_string(), case: spec.name.clone(), analysis, checks })
}
