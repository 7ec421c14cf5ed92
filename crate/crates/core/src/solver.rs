//! Strang-split pseudospectral integrator for `i u_t + Δu + i a u = μ|u|^α u`.
//!
//! The nonlinear substep `u ← u exp(-iμ|u|^α τ)` is exact because it keeps
//! `|u|` fixed; the linear substep is exact in Fourier space and carries the
//! damping, so the discrete mass obeys `∥u(t)∥ = e^{-at}∥u₀∥` to rounding.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cutoff::RadialCutoff;
use crate::diagnostics::{boundary_mass_fraction, DiagnosticSample, Probe};
use crate::model::{Field, ModelError, ProblemSpec};
use crate::spectral::Spectral;

/// Largest `|a t|` accepted by [`change_variable`].
pub const MAX_EXPONENT: f64 = 700.0;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("grid of the initial data does not match dimension {0}")]
    Dimension(usize),
    #[error("non-finite field at t = {0}")]
    NonFinite(f64),
    #[error("exponent a·t = {0} too large for the change of variable")]
    Overflow(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn default_grad_factor() -> f64 {
    1e4
}

fn default_tail() -> f64 {
    1e-6
}

fn default_stride() -> usize {
    1
}

fn default_true() -> bool {
    true
}

fn default_box_mass() -> f64 {
    1e-8
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub dt_init: f64,
    pub dt_min: f64,
    pub t_final: f64,
    #[serde(default)]
    pub adapt: bool,
    #[serde(default = "default_grad_factor")]
    pub blowup_grad_factor: f64,
    #[serde(default = "default_tail")]
    pub tail_threshold: f64,
    #[serde(default = "default_stride")]
    pub sample_stride: usize,
    /// `false` drops the nonlinear substeps (free damped flow).
    #[serde(default = "default_true")]
    pub nonlinear: bool,
    /// Mass fraction near the box boundary that raises the boundary flag.
    #[serde(default = "default_box_mass")]
    pub box_mass_threshold: f64,
}

impl SolverConfig {
    pub fn fixed(dt: f64, t_final: f64) -> Self {
        Self {
            dt_init: dt,
            dt_min: dt,
            t_final,
            adapt: false,
            blowup_grad_factor: default_grad_factor(),
            tail_threshold: default_tail(),
            sample_stride: 1,
            nonlinear: true,
            box_mass_threshold: default_box_mass(),
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let pos = |x: f64| x.is_finite() && x > 0.0;
        if !pos(self.dt_init) || !pos(self.dt_min) || !pos(self.t_final) {
            return Err(SolverError::Config("dt_init, dt_min and t_final must be positive".into()));
        }
        if self.dt_min > self.dt_init {
            return Err(SolverError::Config("dt_min exceeds dt_init".into()));
        }
        if !pos(self.blowup_grad_factor) || !pos(self.tail_threshold) || !pos(self.box_mass_threshold) {
            return Err(SolverError::Config("thresholds must be positive".into()));
        }
        if self.sample_stride == 0 {
            return Err(SolverError::Config("sample_stride must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BlowUpReason {
    GradientGrowth,
    AmplitudeGrowth,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum RunOutcome {
    GlobalToT { t: f64 },
    BlowUpDetected { t_detect: f64, reason: BlowUpReason },
    ResolutionLoss { t: f64, tail: f64 },
}

impl RunOutcome {
    pub fn is_blowup(&self) -> bool {
        matches!(self, RunOutcome::BlowUpDetected { .. })
    }

    pub fn is_global(&self) -> bool {
        matches!(self, RunOutcome::GlobalToT { .. })
    }

    pub fn time(&self) -> f64 {
        match *self {
            RunOutcome::GlobalToT { t } => t,
            RunOutcome::BlowUpDetected { t_detect, .. } => t_detect,
            RunOutcome::ResolutionLoss { t, .. } => t,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub outcome: RunOutcome,
    /// Samples at `t = 0` and after every `sample_stride` steps.
    pub samples: Vec<DiagnosticSample>,
    pub final_sample: DiagnosticSample,
    pub final_field: Field,
    pub steps: usize,
    /// Largest `∥∇u(t)∥/∥∇u₀∥` over all steps.
    pub max_grad_ratio: f64,
    /// First sample time at which the boundary mass fraction exceeded its threshold.
    pub boundary_flag: Option<f64>,
}

/// Callbacks on the run's own thread.
pub trait Observer {
    fn on_sample(&mut self, _u: &Field, _sample: &DiagnosticSample) {}
    /// Called when the run lands exactly on a requested checkpoint time.
    fn on_checkpoint(&mut self, _u: &Field) {}
    /// Whether [`Observer::on_increment`] should be fed.
    fn wants_increments(&self) -> bool {
        false
    }
    /// Change `u·(exp(-iμ|u|^α τ) - 1)` made by a nonlinear substep at time `t`.
    fn on_increment(&mut self, _t: f64, _increment: &[Complex64]) {}
}

impl Observer for () {}

/// Extra run controls.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub cutoff: Option<RadialCutoff>,
    /// Times the integrator must land on exactly.
    pub checkpoints: Vec<f64>,
}

/// Splitting integrator with its transform workspace.
pub struct Stepper {
    spec: ProblemSpec,
    spectral: Spectral,
    nonlinear: bool,
    cached_dt: f64,
    linear: Vec<Complex64>,
    increment: Vec<Complex64>,
}

impl Stepper {
    pub fn new(grid: &crate::model::Grid, spec: &ProblemSpec, nonlinear: bool) -> Self {
        Self {
            spec: *spec,
            spectral: Spectral::new(grid),
            nonlinear,
            cached_dt: f64::NAN,
            linear: Vec::new(),
            increment: Vec::new(),
        }
    }

    pub fn spectral(&mut self) -> &mut Spectral {
        &mut self.spectral
    }

    fn nonlinear_half(&mut self, u: &mut [Complex64], t: f64, tau: f64, obs: &mut dyn Observer) {
        if !self.nonlinear {
            return;
        }
        let half_alpha = 0.5 * self.spec.alpha();
        let mu = self.spec.mu();
        if obs.wants_increments() {
            self.increment.clear();
            for z in u.iter_mut() {
                let theta = -mu * z.norm_sqr().powf(half_alpha) * tau;
                // exp(iθ) - 1 without cancellation
                let s = (0.5 * theta).sin();
                let em1 = Complex64::new(-2.0 * s * s, theta.sin());
                let inc = *z * em1;
                self.increment.push(inc);
                *z += inc;
            }
            obs.on_increment(t, &self.increment);
        } else {
            for z in u.iter_mut() {
                let theta = -mu * z.norm_sqr().powf(half_alpha) * tau;
                *z *= Complex64::from_polar(1.0, theta);
            }
        }
    }

    fn linear_step(&mut self, u: &mut [Complex64], dt: f64) {
        if dt != self.cached_dt {
            let a = self.spec.damping;
            self.linear = self
                .spectral
                .k_squared()
                .iter()
                .map(|k2| Complex64::from_polar((-a * dt).exp(), -k2 * dt))
                .collect();
            self.cached_dt = dt;
        }
        self.spectral.forward(u);
        for (z, m) in u.iter_mut().zip(&self.linear) {
            *z *= m;
        }
        self.spectral.inverse(u);
    }

    /// One Strang step from `t` to `t + dt`.
    pub fn step(&mut self, u: &mut [Complex64], t: f64, dt: f64, obs: &mut dyn Observer) {
        self.nonlinear_half(u, t, 0.5 * dt, obs);
        self.linear_step(u, dt);
        self.nonlinear_half(u, t + dt, 0.5 * dt, obs);
    }
}

/// A single Strang step of the full equation.
pub fn strang_step(u: &Field, dt: f64, spec: &ProblemSpec) -> Result<Field, SolverError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(SolverError::Config(format!("dt must be positive, got {dt}")));
    }
    let mut stepper = Stepper::new(u.grid(), spec, true);
    let mut vals = u.values().to_vec();
    stepper.step(&mut vals, u.time(), dt, &mut ());
    Field::new(*u.grid(), vals, u.time() + dt).map_err(|_| SolverError::NonFinite(u.time() + dt))
}

/// `e^{itΔ}u`, exact in Fourier space.
pub fn free_propagate(u: &Field, t: f64) -> Field {
    let mut sp = Spectral::new(u.grid());
    let mut vals = u.values().to_vec();
    sp.forward(&mut vals);
    sp.apply_free_phase(&mut vals, t);
    sp.inverse(&mut vals);
    Field::new(*u.grid(), vals, u.time()).expect("unit-modulus multiplier keeps the field finite")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// `v = e^{at} u`
    ToV,
    /// `u = e^{-at} v`
    ToU,
}

pub fn change_variable(u: &Field, t: f64, a: f64, direction: Direction) -> Result<Field, SolverError> {
    let x = a * t;
    if !x.is_finite() || x.abs() > MAX_EXPONENT {
        return Err(SolverError::Overflow(x));
    }
    let s = match direction {
        Direction::ToV => x.exp(),
        Direction::ToU => (-x).exp(),
    };
    let vals = u.values().iter().map(|z| z * s).collect();
    Ok(Field::new(*u.grid(), vals, u.time())?)
}

/// Step size `dt_init/(1 + (max|u|/max|u₀|)^α)` before clamping.
pub fn raw_adapted_dt(sup: f64, sup0: f64, cfg: &SolverConfig, spec: &ProblemSpec) -> f64 {
    let ratio = if sup0 > 0.0 { sup / sup0 } else { 1.0 };
    cfg.dt_init / (1.0 + ratio.powf(spec.alpha()))
}

pub fn adapt_dt(u: &Field, u0: &Field, cfg: &SolverConfig, spec: &ProblemSpec) -> f64 {
    raw_adapted_dt(u.sup_abs(), u0.sup_abs(), cfg, spec).clamp(cfg.dt_min, cfg.dt_init)
}

fn growth_reason(grad_ratio: f64, amp_ratio: f64, factor: f64) -> Option<BlowUpReason> {
    if grad_ratio > factor {
        Some(BlowUpReason::GradientGrowth)
    } else if amp_ratio > factor {
        Some(BlowUpReason::AmplitudeGrowth)
    } else {
        None
    }
}

/// Threshold test of `u` against `u₀`.
pub fn detect_blowup(u: &Field, u0: &Field, cfg: &SolverConfig) -> Option<BlowUpReason> {
    let g = crate::diagnostics::gradient_norm_sq(u).sqrt();
    let g0 = crate::diagnostics::gradient_norm_sq(u0).sqrt();
    let sup0 = u0.sup_abs();
    let grad_ratio = if g0 > 0.0 { g / g0 } else { 0.0 };
    let amp_ratio = if sup0 > 0.0 { u.sup_abs() / sup0 } else { 0.0 };
    growth_reason(grad_ratio, amp_ratio, cfg.blowup_grad_factor)
}

/// Integrates from `u0` (taken at `t = 0`) to `cfg.t_final` or detection.
pub fn run(
    u0: &Field,
    spec: &ProblemSpec,
    cfg: &SolverConfig,
    cutoff: Option<&RadialCutoff>,
) -> Result<RunResult, SolverError> {
    let opts = RunOptions {
        cutoff: cutoff.cloned(),
        checkpoints: Vec::new(),
    };
    run_with(u0, spec, cfg, &opts, &mut ())
}

pub fn run_with(
    u0: &Field,
    spec: &ProblemSpec,
    cfg: &SolverConfig,
    opts: &RunOptions,
    obs: &mut dyn Observer,
) -> Result<RunResult, SolverError> {
    cfg.validate()?;
    let grid = *u0.grid();
    if grid.dim() != spec.dimension {
        return Err(SolverError::Dimension(spec.dimension));
    }
    let mut probe = Probe::new(&grid, spec, opts.cutoff.as_ref());
    let mut stepper = Stepper::new(&grid, spec, cfg.nonlinear);
    let mut checkpoints: Vec<f64> = opts
        .checkpoints
        .iter()
        .copied()
        .filter(|&c| c > 0.0 && c < cfg.t_final)
        .collect();
    checkpoints.sort_by(f64::total_cmp);
    checkpoints.dedup();
    let mut next_checkpoint = 0;

    let mut u = u0.values().to_vec();
    let field0 = Field::new(grid, u.clone(), 0.0)?;
    let first = probe.sample(&field0);
    let grad0 = first.grad_sq.sqrt();
    let sup0 = first.sup_abs;
    obs.on_sample(&field0, &first);
    let mut samples = vec![first];
    let mut boundary_flag = None;
    if boundary_mass_fraction(&field0) > cfg.box_mass_threshold {
        boundary_flag = Some(0.0);
    }

    let mut t = 0.0;
    let mut steps = 0usize;
    let mut max_grad_ratio: f64 = 1.0;
    let mut sup = sup0;
    let end_tol = 1e-12 * cfg.t_final;
    let outcome = loop {
        if t >= cfg.t_final - end_tol {
            break RunOutcome::GlobalToT { t: cfg.t_final };
        }
        let target = checkpoints.get(next_checkpoint).copied().unwrap_or(cfg.t_final);
        let mut t_next = if cfg.adapt {
            let raw = raw_adapted_dt(sup, sup0, cfg, spec);
            if raw < cfg.dt_min {
                let hat = stepper.spectral().spectrum(&u);
                let tail = stepper.spectral().tail_fraction(&hat);
                break RunOutcome::ResolutionLoss { t, tail };
            }
            t + raw.min(cfg.dt_init)
        } else {
            ((t / cfg.dt_init + 1e-9).floor() + 1.0) * cfg.dt_init
        };
        let mut landed = false;
        if t_next >= target - end_tol {
            t_next = target;
            landed = target < cfg.t_final;
        }
        let dt = t_next - t;
        stepper.step(&mut u, t, dt, obs);
        t = t_next;
        steps += 1;

        if u.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(SolverError::NonFinite(t));
        }
        let hat = stepper.spectral().spectrum(&u);
        let grad = stepper.spectral().parseval_gradient(&hat).sqrt();
        sup = u.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let grad_ratio = if grad0 > 0.0 { grad / grad0 } else { 0.0 };
        max_grad_ratio = max_grad_ratio.max(grad_ratio);
        let amp_ratio = if sup0 > 0.0 { sup / sup0 } else { 0.0 };

        let at_sample = steps.is_multiple_of(cfg.sample_stride);
        if at_sample || landed {
            let field = Field::new(grid, u.clone(), t)?;
            if at_sample {
                let s = probe.sample(&field);
                if boundary_flag.is_none() && boundary_mass_fraction(&field) > cfg.box_mass_threshold {
                    boundary_flag = Some(t);
                }
                obs.on_sample(&field, &s);
                samples.push(s);
            }
            if landed {
                obs.on_checkpoint(&field);
                next_checkpoint += 1;
            }
        }
        if let Some(reason) = growth_reason(grad_ratio, amp_ratio, cfg.blowup_grad_factor) {
            break RunOutcome::BlowUpDetected { t_detect: t, reason };
        }
        let tail = stepper.spectral().tail_fraction(&hat);
        if tail > cfg.tail_threshold {
            break RunOutcome::ResolutionLoss { t, tail };
        }
    };
    if let Some(b) = boundary_flag {
        log::warn!("mass reached the box boundary region at t = {b}");
    }
    let final_field = Field::new(grid, u, t)?;
    let final_sample = probe.sample(&final_field);
    Ok(RunResult {
        outcome,
        samples,
        final_sample,
        final_field,
        steps,
        max_grad_ratio,
        boundary_flag,
    })
}
