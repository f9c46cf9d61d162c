//! Batch runs: configuration, run modes and JSON reports.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classical::{
    covariance_sequence, filter_forward, monte_carlo_cost, riccati_backward, scalar_terms_s, simulate_plant,
    value_function, ScalarTermForm,
};
use crate::error::{Error, Result};
use crate::generate::{generate_problem, GeneratorSpec};
use crate::linalg::{RMatrix, RVector};
use crate::problem::{LqgProblem, ProblemSpec};
use crate::qsvt::{calibrate_degrees, default_grid, DegreeCalibration};
use crate::quantum::{
    audit_complexity, horizon_audit, q_lqg, ComplexityAudit, EncodingScheme, HorizonAudit, QuantumOptions,
    QuantumRun, Totals,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Classical,
    Quantum,
    Compare,
    Audit,
    CalibrateQsvt,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Classical => "classical",
            Mode::Quantum => "quantum",
            Mode::Compare => "compare",
            Mode::Audit => "audit",
            Mode::CalibrateQsvt => "calibrate-qsvt",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::Config(format!("unknown mode {s:?}")))
    }
}

/// Inline data or a generator recipe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum ProblemSource {
    Inline(Box<ProblemSpec>),
    Generate(GeneratorSpec),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub eps_prime_r: f64,
    pub eps_prime_v: f64,
    pub beta: f64,
    pub match_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eps_prime_r: 1e-8,
            eps_prime_v: 1e-8,
            beta: 2.0,
            match_tol: 1e-4,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarlo {
    /// Zero skips the Monte Carlo estimate.
    pub trials: usize,
    pub seed: u64,
}

/// Everything a run needs; unknown fields are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    #[serde(default)]
    pub problem: Option<ProblemSource>,
    /// Seed of the plant simulation that produces the measurement stream.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub monte_carlo: MonteCarlo,
    #[serde(default)]
    pub scheme: EncodingScheme,
    /// Where to write the report; stdout when absent.
    #[serde(default)]
    pub out: Option<String>,
}

impl RunConfig {
    pub fn new(mode: Mode, problem: ProblemSource) -> Self {
        RunConfig {
            mode,
            problem: Some(problem),
            seed: 0,
            tolerances: Tolerances::default(),
            monte_carlo: MonteCarlo::default(),
            scheme: EncodingScheme::default(),
            out: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn problem(&self) -> Result<LqgProblem> {
        match &self.problem {
            Some(ProblemSource::Inline(spec)) => LqgProblem::try_from(spec.as_ref()),
            Some(ProblemSource::Generate(spec)) => generate_problem(spec),
            None => Err(Error::Config("no problem given".into())),
        }
    }

    pub fn quantum_options(&self) -> QuantumOptions {
        QuantumOptions {
            eps_prime_r: self.tolerances.eps_prime_r,
            eps_prime_v: self.tolerances.eps_prime_v,
            beta: self.tolerances.beta,
            scheme: self.scheme,
            ..QuantumOptions::default()
        }
    }

    /// Replaces the horizon of the inline or generated problem.
    pub fn set_horizon(&mut self, horizon: usize) {
        match &mut self.problem {
            Some(ProblemSource::Inline(spec)) => spec.horizon = horizon,
            Some(ProblemSource::Generate(spec)) => spec.horizon = horizon,
            None => {}
        }
    }
}

/// Largest relative elementwise deviation for each sequence.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct Deviations {
    pub K_max: f64,
    pub P_max: f64,
    pub mu_max: f64,
    pub R_max: f64,
    pub u_max: f64,
}

impl Deviations {
    pub fn max(&self) -> f64 {
        [self.K_max, self.P_max, self.mu_max, self.R_max, self.u_max]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// `max_k ‖q_k − c_k‖_max / max_k ‖c_k‖_max`; absolute when the reference is
/// identically zero.
pub fn relative_deviation(quantum: &[RMatrix], classical: &[RMatrix]) -> f64 {
    let scale = classical.iter().map(|c| c.amax()).fold(0.0, f64::max);
    let diff = quantum
        .iter()
        .zip(classical)
        .map(|(q, c)| (q - c).amax())
        .fold(0.0, f64::max);
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

fn as_columns(v: &[RVector]) -> Vec<RMatrix> {
    v.iter()
        .map(|x| RMatrix::from_column_slice(x.len(), 1, x.as_slice()))
        .collect()
}

/// Classical reference sequences for one measurement stream.
#[derive(Clone, Debug)]
pub struct ClassicalRun {
    pub k: Vec<RMatrix>,
    pub p: Vec<RMatrix>,
    pub mu: Vec<RVector>,
    pub r: Vec<RMatrix>,
    pub u: Vec<RVector>,
    pub measurements: Vec<RVector>,
    pub scalar_terms: BTreeMap<String, f64>,
}

/// Classical solve plus the plant rollout that supplies `y_1..y_T`.
pub fn classical_run(prob: &LqgProblem, seed: u64) -> Result<ClassicalRun> {
    let sol = riccati_backward(prob)?;
    let plant = simulate_plant(prob, &sol.k, seed)?;
    let trace = filter_forward(prob, &sol, &plant.y)?;
    let r = covariance_sequence(prob)?;
    let scalar_terms = ScalarTermForm::ALL
        .iter()
        .map(|&f| (f.name().to_string(), scalar_terms_s(prob, &r, &sol.p, f)[0]))
        .collect();
    Ok(ClassicalRun {
        k: sol.k,
        p: sol.p,
        mu: trace.mu,
        r: trace.r,
        u: trace.u,
        measurements: plant.y,
        scalar_terms,
    })
}

/// Deviations of a quantum run from the classical reference.
pub fn compare_runs(q: &QuantumRun, c: &ClassicalRun) -> Deviations {
    Deviations {
        K_max: relative_deviation(&q.k, &c.k),
        P_max: relative_deviation(&q.p, &c.p),
        mu_max: relative_deviation(&as_columns(&q.mu), &as_columns(&c.mu)),
        R_max: relative_deviation(&q.r, &c.r),
        u_max: relative_deviation(&as_columns(&q.u), &as_columns(&c.u)),
    }
}

/// One row of the per-step resource table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepEntry {
    pub k: usize,
    pub phase: String,
    pub kappa: f64,
    pub degree: usize,
    pub queries: usize,
    pub peak_ancilla: usize,
    pub peak_alpha: f64,
    pub eps_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct Resources {
    pub per_step: Vec<StepEntry>,
    pub totals: Totals,
    pub linear_in_T: Option<bool>,
    pub degree_fit_r2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit: Option<ComplexityAudit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon_audit: Option<HorizonAudit>,
}

/// Classical-side figures.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalSummary {
    /// `s_0` under each formula variant.
    pub s0: BTreeMap<String, f64>,
    /// `μ₀ᵀP₀μ₀ + s_0` under each variant.
    pub value: BTreeMap<String, f64>,
    pub u: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monte_carlo: Option<MonteCarloSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub trials: usize,
    pub mean: f64,
    pub std_error: f64,
    /// `|mean − value| / std_error` per variant.
    pub z: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub seconds: BTreeMap<String, f64>,
}

/// The machine-readable outcome of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub mode: String,
    pub problem_digest: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deviations: Option<Deviations>,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resources: Option<Resources>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical: Option<ClassicalSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<DegreeCalibration>,
    pub timings: Timings,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// The report with wall-clock timings cleared, for reproducibility checks.
    pub fn without_timings(&self) -> Report {
        Report {
            timings: Timings::default(),
            ..self.clone()
        }
    }
}

/// SHA-256 of the problem's canonical JSON.
pub fn problem_digest(prob: &LqgProblem) -> Result<String> {
    let text = serde_json::to_string(&ProblemSpec::from(prob))?;
    Ok(hex::encode(Sha256::digest(text.as_bytes())))
}

/// Per-step table and totals from a ledger.
pub fn resource_report(run: &QuantumRun, audit: ComplexityAudit) -> Resources {
    let per_step = run
        .ledger
        .per_step
        .iter()
        .map(|r| StepEntry {
            k: r.k,
            phase: r.phase.name().to_string(),
            kappa: r.kappa,
            degree: r.degree,
            queries: r.queries,
            peak_ancilla: r.peak_ancilla,
            peak_alpha: r.peak_alpha,
            eps_bound: r.eps_bound,
        })
        .collect();
    Resources {
        per_step,
        totals: run.ledger.totals(),
        linear_in_T: None,
        degree_fit_r2: None,
        audit: Some(audit),
        horizon_audit: None,
    }
}

struct Clock {
    start: Instant,
    seconds: BTreeMap<String, f64>,
}

impl Clock {
    fn new() -> Self {
        Clock {
            start: Instant::now(),
            seconds: BTreeMap::new(),
        }
    }

    fn time<T>(&mut self, name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let t = Instant::now();
        let out = f()?;
        self.seconds.insert(name.to_string(), t.elapsed().as_secs_f64());
        Ok(out)
    }

    fn finish(mut self) -> Timings {
        self.seconds
            .insert("total".to_string(), self.start.elapsed().as_secs_f64());
        Timings { seconds: self.seconds }
    }
}

/// Standard errors within which the Monte Carlo mean must match the value.
pub const MC_Z_LIMIT: f64 = 3.0;

fn classical_summary(prob: &LqgProblem, run: &ClassicalRun, mc: &MonteCarlo) -> Result<ClassicalSummary> {
    let value: BTreeMap<String, f64> = run
        .scalar_terms
        .iter()
        .map(|(k, &s)| (k.clone(), value_function(&prob.mu0, &run.p[0], s)))
        .collect();
    let monte_carlo = if mc.trials > 0 {
        let est = monte_carlo_cost(prob, &run.k, mc.trials, mc.seed)?;
        let z = value
            .iter()
            .map(|(k, v)| (k.clone(), (est.mean - v).abs() / est.std_error))
            .collect();
        Some(MonteCarloSummary {
            trials: est.trials,
            mean: est.mean,
            std_error: est.std_error,
            z,
        })
    } else {
        None
    };
    Ok(ClassicalSummary {
        s0: run.scalar_terms.clone(),
        value,
        u: run.u.iter().map(|u| u.iter().copied().collect()).collect(),
        monte_carlo,
    })
}

/// Executes the configured mode.
pub fn run(config: &RunConfig) -> Result<Report> {
    let mut clock = Clock::new();
    if config.mode == Mode::CalibrateQsvt {
        let (kappas, eps) = default_grid();
        let cal = clock.time("calibration", || {
            calibrate_degrees(&kappas, &eps, config.tolerances.beta, config.seed)
        })?;
        let grid = serde_json::to_string(&(kappas, eps, config.tolerances.beta))?;
        let pass = cal.r2 >= 0.99 && cal.residuals_ok();
        return Ok(Report {
            mode: config.mode.name().into(),
            problem_digest: hex::encode(Sha256::digest(grid.as_bytes())),
            deviations: None,
            pass,
            resources: Some(Resources {
                per_step: Vec::new(),
                totals: Totals::default(),
                linear_in_T: None,
                degree_fit_r2: Some(cal.r2),
                audit: None,
                horizon_audit: None,
            }),
            classical: None,
            calibration: Some(cal),
            timings: clock.finish(),
        });
    }

    let prob = config.problem()?;
    let digest = problem_digest(&prob)?;
    let classical = clock.time("classical", || classical_run(&prob, config.seed))?;
    let summary = if matches!(config.mode, Mode::Classical | Mode::Compare) {
        Some(clock.time("monte_carlo", || {
            classical_summary(&prob, &classical, &config.monte_carlo)
        })?)
    } else {
        None
    };
    let mut report = Report {
        mode: config.mode.name().into(),
        problem_digest: digest,
        deviations: None,
        pass: true,
        resources: None,
        classical: summary,
        calibration: None,
        timings: Timings::default(),
    };
    if config.mode == Mode::Classical {
        report.timings = clock.finish();
        return Ok(report);
    }

    let mut opts = config.quantum_options();
    if config.mode == Mode::Audit {
        opts.kappa = crate::quantum::fixed_kappa_for(&prob.with_horizon(2 * prob.horizon), opts.margin)?;
    }
    let qrun = clock.time("quantum", || q_lqg(&prob, &classical.measurements, &opts))?;
    let audit = audit_complexity(&qrun.ledger, prob.horizon, None);
    let mut resources = resource_report(&qrun, audit);

    if matches!(config.mode, Mode::Compare | Mode::Audit) {
        let dev = compare_runs(&qrun, &classical);
        report.pass = dev.max() <= config.tolerances.match_tol;
        report.deviations = Some(dev);
    }
    if config.mode == Mode::Audit {
        let (kappas, eps) = default_grid();
        let cal = clock.time("calibration", || {
            calibrate_degrees(&kappas, &eps, config.tolerances.beta, config.seed)
        })?;
        let audit = audit_complexity(&qrun.ledger, prob.horizon, Some((&cal, &opts)));
        let h = clock.time("horizon_audit", || {
            horizon_audit(&prob, prob.horizon, 2 * prob.horizon, &opts, config.seed)
        })?;
        let linear = h.linear_in_t && h.per_step_independent && audit.per_step_constant;
        report.pass = report.pass && linear && audit.consistent && audit.within_envelope == Some(true);
        resources.linear_in_T = Some(linear);
        resources.degree_fit_r2 = Some(cal.r2);
        resources.audit = Some(audit);
        resources.horizon_audit = Some(h);
    }
    report.resources = Some(resources);
    report.timings = clock.finish();
    Ok(report)
}

/// Default problem when no configuration file is given.
pub fn default_config(mode: Mode) -> RunConfig {
    RunConfig::new(
        mode,
        ProblemSource::Generate(GeneratorSpec {
            n: 2,
            m: 1,
            p: 1,
            horizon: 10,
            seed: 0,
            kappa_target: 10.0,
        }),
    )
}

/// Writes the report to `config.out`, or returns it for printing.
pub fn emit(config: &RunConfig, report: &Report) -> Result<Option<String>> {
    let text = report.to_json()?;
    match &config.out {
        Some(path) => {
            std::fs::write(path, text + "\n")?;
            Ok(None)
        }
        None => Ok(Some(text)),
    }
}
