use std::cmp::Ordering;
use std::path::PathBuf;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::criteria::{applicable_verdicts, CriteriaInputs, CriterionVerdict};
use crate::cutoff::RadialCutoff;
use crate::diagnostics::{
    damping_triple_integral, energy_identity_residual, scattering_deficit, strichartz_exponents, strichartz_norm,
    DiagnosticSample, Probe,
};
use crate::model::{Field, ProblemSpec};
use crate::snapshot;
use crate::solver::{run_with, Observer, RunOptions, RunOutcome, RunResult};
use crate::spectral::Spectral;

use super::config::{InitialData, RunConfig, Scenario};
use super::{par_map, ExperimentError};

/// Largest residuals of the identity monitors along one run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualMaxima {
    /// `max |∥u(t)∥ - e^{-at}∥u₀∥| / ∥u₀∥`
    pub mass: f64,
    /// energy identity residual relative to `|E(u₀)|`
    pub energy: f64,
    /// centered second difference of `V_χ` against the virial right side, relative
    pub virial: Option<f64>,
    /// `I(v(t))` against `f(t) + A(t)`, relative; mass-critical powers only
    pub sigma: Option<f64>,
}

fn uniform_spacing(samples: &[DiagnosticSample]) -> bool {
    if samples.len() < 3 {
        return false;
    }
    let h = samples[1].t - samples[0].t;
    samples
        .windows(2)
        .all(|w| ((w[1].t - w[0].t) - h).abs() <= 1e-9 * h.abs().max(1e-300))
}

/// Residual maxima of the mass law, the energy identity, the second-derivative
/// virial identity and (for `Nα = 4`) the exact variance identity.
pub fn identity_residuals(samples: &[DiagnosticSample], spec: &ProblemSpec) -> ResidualMaxima {
    let a = spec.damping;
    let first = samples[0];
    let m0 = first.mass.sqrt();
    let mass = samples
        .iter()
        .map(|s| (s.mass.sqrt() - (-a * s.t).exp() * m0).abs() / m0)
        .fold(0.0, f64::max);
    let e0 = first.energy.abs().max(f64::MIN_POSITIVE);
    let energy = energy_identity_residual(samples, spec)
        .iter()
        .map(|r| r.abs() / e0)
        .fold(0.0, f64::max);
    let virial = uniform_spacing(samples).then(|| {
        let scale = samples.iter().map(|s| s.d2v_chi_rhs.abs()).fold(0.0, f64::max);
        let floor = (1e-3 * scale).max(f64::MIN_POSITIVE);
        samples
            .windows(3)
            .map(|w| {
                let h = w[1].t - w[0].t;
                let fd = (w[2].v_chi - 2.0 * w[1].v_chi + w[0].v_chi) / (h * h);
                (fd - w[1].d2v_chi_rhs).abs() / w[1].d2v_chi_rhs.abs().max(floor)
            })
            .fold(0.0, f64::max)
    });
    let sigma = (spec.cmp_mass_critical() == Ordering::Equal).then(|| {
        let n = spec.dimension as f64;
        let c = 32.0 * a / (n + 2.0);
        let rho = 4.0 * a / n;
        let triple = damping_triple_integral(samples, spec, c, rho);
        samples
            .iter()
            .zip(&triple)
            .map(|(s, tri)| {
                let i_v = (2.0 * a * s.t).exp() * s.i_weight;
                let f = first.i_weight + 4.0 * first.v_momentum * s.t + 8.0 * first.energy * s.t * s.t;
                (i_v - (f - spec.mu() * tri)).abs() / i_v.abs().max(f64::MIN_POSITIVE)
            })
            .fold(0.0, f64::max)
    });
    ResidualMaxima {
        mass,
        energy,
        virial,
        sigma,
    }
}

/// Verdicts of every criterion applicable to `spec` for the datum `u0`.
pub fn criteria_verdicts(
    u0: &Field,
    spec: &ProblemSpec,
    cutoff: Option<&RadialCutoff>,
    radial: bool,
) -> Result<(DiagnosticSample, Vec<CriterionVerdict>), ExperimentError> {
    let mut probe = Probe::new(u0.grid(), spec, cutoff);
    let s = probe.sample(&u0.clone().with_time(0.0));
    let inputs = CriteriaInputs {
        energy: s.energy,
        i_weight: s.i_weight,
        v_momentum: s.v_momentum,
        j_local: cutoff.map(|_| s.j_local),
        w_local: cutoff.map(|_| s.w_local),
        radial,
    };
    Ok((s, applicable_verdicts(&inputs, spec)?))
}

/// Writes snapshots at the requested checkpoints.
struct SnapshotWriter<'a> {
    dir: PathBuf,
    spec: &'a ProblemSpec,
    prefix: String,
    written: Vec<PathBuf>,
    error: Option<snapshot::SnapshotError>,
}

impl SnapshotWriter<'_> {
    fn write(&mut self, u: &Field) {
        if self.error.is_some() {
            return;
        }
        let path = self
            .dir
            .join(format!("{}_{:06}.{}", self.prefix, self.written.len(), snapshot::EXTENSION));
        match snapshot::write_snapshot(&path, u, self.spec) {
            Ok(()) => self.written.push(path),
            Err(e) => self.error = Some(e),
        }
    }
}

impl Observer for SnapshotWriter<'_> {
    fn on_checkpoint(&mut self, u: &Field) {
        self.write(u);
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulationReport {
    pub outcome: RunOutcome,
    pub steps: usize,
    pub max_grad_ratio: f64,
    pub boundary_flag: Option<f64>,
    pub verdicts: Vec<CriterionVerdict>,
    pub residuals: ResidualMaxima,
    pub final_sample: DiagnosticSample,
    pub snapshots: Vec<PathBuf>,
    #[serde(skip)]
    pub samples: Vec<DiagnosticSample>,
}

fn solve(cfg: &RunConfig, obs: &mut dyn Observer, checkpoints: Vec<f64>) -> Result<RunResult, ExperimentError> {
    let u0 = cfg.initial_field()?;
    let opts = RunOptions {
        cutoff: cfg.cutoff()?,
        checkpoints,
    };
    Ok(run_with(&u0, &cfg.problem, &cfg.solver, &opts, obs)?)
}

/// Plain run; snapshots go to `output_dir` when `snapshot_times` is non-empty.
pub fn simulate(cfg: &RunConfig) -> Result<SimulationReport, ExperimentError> {
    cfg.validate()?;
    let u0 = cfg.initial_field()?;
    let cutoff = cfg.cutoff()?;
    let (_, verdicts) = criteria_verdicts(&u0, &cfg.problem, cutoff.as_ref(), cfg.initial.is_radial())?;
    let want_snapshots = !cfg.snapshot_times.is_empty();
    if want_snapshots {
        std::fs::create_dir_all(&cfg.output_dir)?;
    }
    let mut writer = SnapshotWriter {
        dir: cfg.output_dir.clone(),
        spec: &cfg.problem,
        prefix: cfg.short_hash(),
        written: Vec::new(),
        error: None,
    };
    if want_snapshots && cfg.snapshot_times.contains(&0.0) {
        writer.write(&u0);
    }
    let res = solve(cfg, &mut writer, cfg.snapshot_times.clone())?;
    if want_snapshots && cfg.snapshot_times.iter().any(|&t| t >= cfg.solver.t_final) && res.outcome.is_global() {
        writer.write(&res.final_field);
    }
    if let Some(e) = writer.error {
        return Err(e.into());
    }
    Ok(SimulationReport {
        outcome: res.outcome,
        steps: res.steps,
        max_grad_ratio: res.max_grad_ratio,
        boundary_flag: res.boundary_flag,
        verdicts,
        residuals: identity_residuals(&res.samples, &cfg.problem),
        final_sample: res.final_sample,
        snapshots: writer.written,
        samples: res.samples,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub outcome: RunOutcome,
    pub residuals: ResidualMaxima,
    /// Names of the monitors above tolerance.
    pub breaches: Vec<String>,
    pub passed: bool,
    #[serde(skip)]
    pub samples: Vec<DiagnosticSample>,
}

/// Runs the solver and checks the identity residuals against the configured tolerances.
/// A NaN residual counts as a breach.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn verify_identities(cfg: &RunConfig) -> Result<IdentityReport, ExperimentError> {
    cfg.validate()?;
    let res = solve(cfg, &mut (), Vec::new())?;
    let r = identity_residuals(&res.samples, &cfg.problem);
    let tol = cfg.tolerances;
    let mut breaches = Vec::new();
    if !(r.mass <= tol.mass) {
        breaches.push("mass".to_string());
    }
    if !(r.energy <= tol.energy) {
        breaches.push("energy".to_string());
    }
    if r.virial.is_some_and(|v| !(v <= tol.virial)) {
        breaches.push("virial".to_string());
    }
    if r.sigma.is_some_and(|v| !(v <= tol.sigma)) {
        breaches.push("sigma".to_string());
    }
    Ok(IdentityReport {
        outcome: res.outcome,
        residuals: r,
        passed: breaches.is_empty(),
        breaches,
        samples: res.samples,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DampedRun {
    pub damping: f64,
    pub outcome: RunOutcome,
}

#[derive(Clone, Debug, Serialize)]
pub struct DatumReport {
    pub datum: InitialData,
    pub energy: f64,
    pub i_weight: f64,
    pub v_momentum: f64,
    pub j_local: Option<f64>,
    pub w_local: Option<f64>,
    pub verdicts: Vec<CriterionVerdict>,
    pub predicted: bool,
    pub runs: Vec<DampedRun>,
    /// Largest tested damping with detected blow-up.
    pub largest_detected: Option<f64>,
    /// A prediction not confirmed at the smallest tested damping.
    pub disagreement: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriteriaReport {
    pub data: Vec<DatumReport>,
    pub disagreements: usize,
    pub passed: bool,
}

/// Compares the criteria verdicts with solver outcomes over the family and damping list.
pub fn criteria_vs_outcome(cfg: &RunConfig) -> Result<CriteriaReport, ExperimentError> {
    cfg.validate()?;
    let family = if cfg.family.is_empty() {
        vec![cfg.initial]
    } else {
        cfg.family.clone()
    };
    let mut dampings = if cfg.damping_values.is_empty() {
        vec![cfg.problem.damping]
    } else {
        cfg.damping_values.clone()
    };
    dampings.sort_by(f64::total_cmp);
    let cutoff = cfg.cutoff()?;
    let jobs: Vec<(usize, f64)> = (0..family.len())
        .flat_map(|i| dampings.iter().map(move |&a| (i, a)))
        .collect();
    let outcomes = par_map(&jobs, |&(i, a)| -> Result<RunOutcome, ExperimentError> {
        let mut c = cfg.with_damping(a)?;
        c.initial = family[i];
        // the outcome does not depend on the cutoff; skip its diagnostics
        c.cutoff_radius = None;
        Ok(solve(&c, &mut (), Vec::new())?.outcome)
    });
    let mut data = Vec::new();
    let mut outcomes = outcomes.into_iter();
    for datum in &family {
        let u0 = datum.build(&cfg.grid)?;
        let (s, verdicts) = criteria_verdicts(&u0, &cfg.problem, cutoff.as_ref(), datum.is_radial())?;
        let predicted = verdicts.iter().any(|v| v.predicted_blowup);
        let runs: Vec<DampedRun> = dampings
            .iter()
            .map(|&a| {
                Ok(DampedRun {
                    damping: a,
                    outcome: outcomes.next().expect("one outcome per job")?,
                })
            })
            .collect::<Result<_, ExperimentError>>()?;
        let largest_detected = runs
            .iter()
            .filter(|r| r.outcome.is_blowup())
            .map(|r| r.damping)
            .fold(None, |m: Option<f64>, a| Some(m.map_or(a, |m| m.max(a))));
        let disagreement = predicted && !runs[0].outcome.is_blowup();
        data.push(DatumReport {
            datum: *datum,
            energy: s.energy,
            i_weight: s.i_weight,
            v_momentum: s.v_momentum,
            j_local: cutoff.as_ref().map(|_| s.j_local),
            w_local: cutoff.as_ref().map(|_| s.w_local),
            verdicts,
            predicted,
            runs,
            largest_detected,
            disagreement,
        });
    }
    let disagreements = data.iter().filter(|d| d.disagreement).count();
    Ok(CriteriaReport {
        data,
        disagreements,
        passed: disagreements == 0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutcomeClass {
    Collapse,
    Global,
    Unresolved,
}

pub fn classify_outcome(o: &RunOutcome) -> OutcomeClass {
    match o {
        RunOutcome::BlowUpDetected { .. } => OutcomeClass::Collapse,
        RunOutcome::GlobalToT { .. } => OutcomeClass::Global,
        RunOutcome::ResolutionLoss { .. } => OutcomeClass::Unresolved,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThresholdRun {
    pub damping: f64,
    pub outcome: RunOutcome,
}

#[derive(Clone, Debug, Serialize)]
pub struct ThresholdResult {
    /// Blow-up detected here.
    pub a_lo: f64,
    /// Global to the final time here.
    pub a_hi: f64,
    /// Runs after the two endpoint validations.
    pub bisection_runs: usize,
    pub runs: Vec<ThresholdRun>,
}

/// Bisects the damping between a collapsing and a global run until the bracket is at most `width`.
pub fn threshold_bisection(cfg: &RunConfig, a_lo: f64, a_hi: f64, width: f64) -> Result<ThresholdResult, ExperimentError> {
    cfg.validate()?;
    if !(a_lo >= 0.0 && a_lo < a_hi && width > 0.0) {
        return Err(ExperimentError::Config(format!(
            "need 0 ≤ a_lo < a_hi and width > 0, got [{a_lo}, {a_hi}] / {width}"
        )));
    }
    let mut runs = Vec::new();
    let probe = |a: f64, runs: &mut Vec<ThresholdRun>| -> Result<OutcomeClass, ExperimentError> {
        let mut c = cfg.with_damping(a)?;
        c.cutoff_radius = None;
        let outcome = solve(&c, &mut (), Vec::new())?.outcome;
        log::info!("threshold run a = {a}: {outcome:?}");
        runs.push(ThresholdRun { damping: a, outcome });
        let class = classify_outcome(&outcome);
        // the record is monotone iff every collapse lies below every global run
        let max_collapse = runs
            .iter()
            .filter(|r| r.outcome.is_blowup())
            .map(|r| r.damping)
            .fold(f64::NEG_INFINITY, f64::max);
        let min_global = runs
            .iter()
            .filter(|r| r.outcome.is_global())
            .map(|r| r.damping)
            .fold(f64::INFINITY, f64::min);
        if max_collapse > min_global {
            return Err(ExperimentError::NonMonotone {
                blowup: max_collapse,
                global: min_global,
            });
        }
        Ok(class)
    };
    let lo_class = probe(a_lo, &mut runs)?;
    if lo_class != OutcomeClass::Collapse {
        return Err(ExperimentError::Precondition(format!(
            "no blow-up detected at a_lo = {a_lo}: {:?}",
            runs[0].outcome
        )));
    }
    let hi_class = probe(a_hi, &mut runs)?;
    if hi_class != OutcomeClass::Global {
        return Err(ExperimentError::Precondition(format!(
            "run at a_hi = {a_hi} is not global: {:?}",
            runs[1].outcome
        )));
    }
    let (mut lo, mut hi) = (a_lo, a_hi);
    let mut bisection_runs = 0;
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        bisection_runs += 1;
        match probe(mid, &mut runs)? {
            OutcomeClass::Collapse => lo = mid,
            OutcomeClass::Global => hi = mid,
            OutcomeClass::Unresolved => {
                return Err(ExperimentError::Precondition(format!(
                    "resolution lost at a = {mid}; refine the grid: {:?}",
                    runs.last().map(|r| r.outcome)
                )))
            }
        }
    }
    Ok(ThresholdResult {
        a_lo: lo,
        a_hi: hi,
        bisection_runs,
        runs,
    })
}

/// Accumulates the interaction-picture profile `e^{-itΔ}v(t)` from the
/// nonlinear increments, split at every sample and checkpoint.
struct InteractionRecorder {
    spectral: Spectral,
    damping: f64,
    current: Vec<Complex64>,
    scratch: Vec<Complex64>,
    /// `(t_k, increments in (t_{k-1}, t_k])`
    points: Vec<(f64, Vec<Complex64>)>,
    fields: Vec<Field>,
}

impl InteractionRecorder {
    fn close(&mut self, u: &Field) {
        if self.points.last().is_some_and(|p| p.0 == u.time()) {
            return;
        }
        let d = std::mem::replace(&mut self.current, vec![Complex64::default(); u.values().len()]);
        self.points.push((u.time(), d));
        self.fields.push(u.clone());
    }
}

impl Observer for InteractionRecorder {
    fn on_sample(&mut self, u: &Field, _sample: &DiagnosticSample) {
        self.close(u);
    }

    fn on_checkpoint(&mut self, u: &Field) {
        self.close(u);
    }

    fn wants_increments(&self) -> bool {
        true
    }

    fn on_increment(&mut self, t: f64, increment: &[Complex64]) {
        let s = (self.damping * t).exp();
        self.scratch.clear();
        self.scratch.extend(increment.iter().map(|z| z * s));
        self.spectral.forward(&mut self.scratch);
        self.spectral.apply_free_phase(&mut self.scratch, -t);
        for (c, z) in self.current.iter_mut().zip(&self.scratch) {
            *c += z;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScatterPoint {
    pub t: f64,
    /// `∥v(t) - e^{itΔ}u₊∥_{H¹}` summed from the recorded nonlinear increments after `t`
    pub deficit: f64,
    /// the same quantity by direct subtraction of fields
    pub deficit_direct: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScatterReport {
    pub t1: f64,
    pub t2: f64,
    pub outcome: RunOutcome,
    pub max_grad_ratio: f64,
    /// `∥e^{-it₂Δ}v(t₂) - e^{-it₁Δ}v(t₁)∥_{H¹}` from the increments
    pub cauchy_increment: f64,
    pub cauchy_increment_direct: f64,
    pub series: Vec<ScatterPoint>,
    /// `(q, r)` of the space-time norm
    pub exponents: (f64, f64),
    pub strichartz: f64,
    #[serde(skip)]
    pub samples: Vec<DiagnosticSample>,
}

impl ScatterReport {
    /// Series point at time `t` exactly.
    pub fn deficit_at(&self, t: f64) -> Option<ScatterPoint> {
        self.series.iter().find(|p| p.t == t).copied()
    }
}

/// Integrates to `t2` and reports the exponential scattering deficit series and the Cauchy increment on `[t1, t2]`.
pub fn scattering_probe(cfg: &RunConfig, t1: f64, t2: f64) -> Result<ScatterReport, ExperimentError> {
    scattering_probe_at(cfg, t1, t2, &[])
}

/// [`scattering_probe`] with extra times the series must contain exactly.
pub fn scattering_probe_at(cfg: &RunConfig, t1: f64, t2: f64, times: &[f64]) -> Result<ScatterReport, ExperimentError> {
    cfg.validate()?;
    if !(0.0 <= t1 && t1 < t2) {
        return Err(ExperimentError::Config(format!("need 0 ≤ t1 < t2, got {t1}, {t2}")));
    }
    let mut c = cfg.clone();
    c.solver.t_final = t2;
    let len = cfg.grid.len();
    let mut rec = InteractionRecorder {
        spectral: Spectral::new(&cfg.grid),
        damping: cfg.problem.damping,
        current: vec![Complex64::default(); len],
        scratch: Vec::with_capacity(len),
        points: Vec::new(),
        fields: Vec::new(),
    };
    let mut checkpoints = vec![t1];
    checkpoints.extend_from_slice(times);
    let res = solve(&c, &mut rec, checkpoints)?;
    if !res.outcome.is_global() {
        return Err(ExperimentError::Precondition(format!(
            "scattering probe needs a global run to t2 = {t2}: {:?}",
            res.outcome
        )));
    }
    rec.close(&res.final_field);

    let a = cfg.problem.damping;
    let sp = Spectral::new(&cfg.grid);
    // u₊ = e^{-it₂Δ} v(t₂)
    let v2 = res.final_field.values().iter().map(|z| z * (a * t2).exp()).collect();
    let v2 = Field::new(cfg.grid, v2, t2)?;
    let u_plus = crate::solver::free_propagate(&v2, -t2);

    let mut tail = vec![Complex64::default(); len];
    let mut series = Vec::with_capacity(rec.points.len());
    for k in (0..rec.points.len()).rev() {
        let deficit = sp.h1_norm_sq(&tail).sqrt();
        let deficit_direct = scattering_deficit(&rec.fields[k], &u_plus, a)?;
        series.push(ScatterPoint {
            t: rec.points[k].0,
            deficit,
            deficit_direct,
        });
        for (s, d) in tail.iter_mut().zip(&rec.points[k].1) {
            *s += d;
        }
    }
    series.reverse();
    let at_t1 = series
        .iter()
        .find(|p| p.t == t1)
        .copied()
        .ok_or_else(|| ExperimentError::Precondition("run did not land on t1".into()))?;

    let n = cfg.problem.dimension;
    let alpha = cfg.problem.alpha();
    let exponents = strichartz_exponents(n).unwrap_or_else(|| {
        let r = alpha + 2.0;
        (4.0 * r / (n as f64 * alpha), r)
    });
    let window: Vec<Field> = rec
        .fields
        .iter()
        .filter(|f| f.time() >= t1 && f.time() <= t2)
        .map(|f| {
            let s = (a * f.time()).exp();
            Field::new(cfg.grid, f.values().iter().map(|z| z * s).collect(), f.time())
        })
        .collect::<Result<_, _>>()?;
    let strichartz = strichartz_norm(&window, exponents.0, exponents.1)?;
    Ok(ScatterReport {
        t1,
        t2,
        outcome: res.outcome,
        max_grad_ratio: res.max_grad_ratio,
        cauchy_increment: at_t1.deficit,
        cauchy_increment_direct: at_t1.deficit_direct,
        series,
        exponents,
        strichartz,
        samples: res.samples,
    })
}

/// Output of one scenario.
#[derive(Clone, Debug)]
pub enum ScenarioReport {
    Simulate(SimulationReport),
    VerifyIdentities(IdentityReport),
    CriteriaVsOutcome(CriteriaReport),
    Threshold(ThresholdResult),
    ScatterProbe(ScatterReport),
}

impl ScenarioReport {
    /// Whether every monitored tolerance held.
    pub fn passed(&self) -> bool {
        match self {
            ScenarioReport::VerifyIdentities(r) => r.passed,
            ScenarioReport::CriteriaVsOutcome(r) => r.passed,
            _ => true,
        }
    }

    pub fn samples(&self) -> Option<&[DiagnosticSample]> {
        match self {
            ScenarioReport::Simulate(r) => Some(&r.samples),
            ScenarioReport::VerifyIdentities(r) => Some(&r.samples),
            ScenarioReport::ScatterProbe(r) => Some(&r.samples),
            _ => None,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let v = match self {
            ScenarioReport::Simulate(r) => serde_json::to_value(r),
            ScenarioReport::VerifyIdentities(r) => serde_json::to_value(r),
            ScenarioReport::CriteriaVsOutcome(r) => serde_json::to_value(r),
            ScenarioReport::Threshold(r) => serde_json::to_value(r),
            ScenarioReport::ScatterProbe(r) => serde_json::to_value(r),
        };
        v.expect("reports serialize")
    }
}

/// Runs the scenario named in the config.
pub fn run_scenario(cfg: &RunConfig) -> Result<ScenarioReport, ExperimentError> {
    Ok(match cfg.scenario {
        Scenario::Simulate => ScenarioReport::Simulate(simulate(cfg)?),
        Scenario::VerifyIdentities => ScenarioReport::VerifyIdentities(verify_identities(cfg)?),
        Scenario::CriteriaVsOutcome => ScenarioReport::CriteriaVsOutcome(criteria_vs_outcome(cfg)?),
        Scenario::Threshold => {
            let t = cfg.threshold.expect("validated");
            ScenarioReport::Threshold(threshold_bisection(cfg, t.a_lo, t.a_hi, t.width)?)
        }
        Scenario::ScatterProbe => {
            let s = cfg.scatter.expect("validated");
            ScenarioReport::ScatterProbe(scattering_probe(cfg, s.t1, s.t2)?)
        }
    })
}
