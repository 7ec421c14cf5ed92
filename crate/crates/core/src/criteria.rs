//! Sufficient conditions for finite-time blow-up at small damping and the
//! negativity time of the governing virial quadratics.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ProblemSpec, Sign, CLASSIFY_TOL};

/// Relative size below which `V² - cEI` counts as zero.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CriteriaError {
    #[error("the weighted variance must be non-negative, got {0}")]
    NegativeVariance(f64),
    #[error("non-finite functional value")]
    NonFinite,
}

/// Which criterion a verdict refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    MassCriticalWeighted,
    SupercriticalWeighted,
    EnergyCriticalWeighted,
    MassCriticalRadial,
    SupercriticalRadial,
    EnergyCriticalRadial,
}

impl Theorem {
    pub const ALL: [Theorem; 6] = [
        Theorem::MassCriticalWeighted,
        Theorem::SupercriticalWeighted,
        Theorem::EnergyCriticalWeighted,
        Theorem::MassCriticalRadial,
        Theorem::SupercriticalRadial,
        Theorem::EnergyCriticalRadial,
    ];

    pub fn is_radial(self) -> bool {
        matches!(
            self,
            Theorem::MassCriticalRadial | Theorem::SupercriticalRadial | Theorem::EnergyCriticalRadial
        )
    }

    /// Whether `(N, α, μ)` lies in the range covered by this criterion.
    pub fn applies_to(self, spec: &ProblemSpec) -> bool {
        if spec.mu != Sign::Focusing {
            return false;
        }
        let n = spec.dimension;
        let mass = spec.cmp_mass_critical();
        let energy = spec.cmp_energy_critical();
        match self {
            Theorem::MassCriticalWeighted => mass == Ordering::Equal,
            Theorem::SupercriticalWeighted => mass == Ordering::Greater && energy == Ordering::Less,
            Theorem::EnergyCriticalWeighted => n >= 3 && energy == Ordering::Equal,
            Theorem::MassCriticalRadial => n >= 2 && mass == Ordering::Equal,
            Theorem::SupercriticalRadial => match n {
                2 => mass == Ordering::Greater && spec.alpha() <= 4.0 + CLASSIFY_TOL,
                n if n >= 3 => mass == Ordering::Greater && energy == Ordering::Less,
                _ => false,
            },
            Theorem::EnergyCriticalRadial => n >= 3 && energy == Ordering::Equal,
        }
    }

    /// Coefficient `c` of the discriminant condition `W + √(cEJ) < 0`.
    fn discriminant_coeff(self, spec: &ProblemSpec) -> f64 {
        let n = spec.dimension as f64;
        match self {
            Theorem::MassCriticalRadial => 8.0,
            Theorem::SupercriticalRadial => 2.0 * n * spec.alpha(),
            Theorem::EnergyCriticalRadial => 8.0 * n / (n - 2.0),
            _ => 2.0,
        }
    }

    /// Coefficient of `E t²` in the negative-energy quadratic of the radial argument.
    fn negative_energy_coeff(self, spec: &ProblemSpec) -> f64 {
        let n = spec.dimension as f64;
        match self {
            Theorem::MassCriticalRadial => 6.0,
            Theorem::SupercriticalRadial => n * spec.alpha(),
            Theorem::EnergyCriticalRadial => 4.0 * n / (n - 2.0),
            _ => 8.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    NegativeEnergy,
    ZeroEnergyNegativeMomentum,
    PositiveEnergyDiscriminant,
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionVerdict {
    pub theorem: Theorem,
    pub applicable: bool,
    pub branch: Branch,
    pub predicted_blowup: bool,
    pub t_star: Option<f64>,
    pub delta_used: Option<f64>,
    /// `V² - cEI` vanished to rounding with `E > 0`; not predicted.
    pub boundary: bool,
    /// Coefficients `(c0, c1, c2)` of the governing quadratic.
    pub quadratic: Option<[f64; 3]>,
}

impl CriterionVerdict {
    fn silent(theorem: Theorem, applicable: bool) -> Self {
        Self {
            theorem,
            applicable,
            branch: Branch::None,
            predicted_blowup: false,
            t_star: None,
            delta_used: None,
            boundary: false,
            quadratic: None,
        }
    }
}

/// Smallest `t ≥ 0` after which `c0 + c1 t + c2 t²` turns negative, if it ever does
/// and stays so for some positive time interval. A negative `c0` gives `0`.
pub fn negativity_time(c0: f64, c1: f64, c2: f64) -> Option<f64> {
    if c0 < 0.0 {
        return Some(0.0);
    }
    if c2 == 0.0 {
        return if c1 < 0.0 { Some(-c0 / c1) } else { None };
    }
    if c0 == 0.0 {
        // q = t (c1 + c2 t)
        return if c1 < 0.0 || (c1 == 0.0 && c2 < 0.0) {
            Some(0.0)
        } else if c2 < 0.0 {
            Some(-c1 / c2)
        } else {
            None
        };
    }
    let disc = c1 * c1 - 4.0 * c0 * c2;
    if c2 > 0.0 && (disc <= 0.0 || c1 >= 0.0) {
        return None;
    }
    // c0 > 0: either c2 < 0 (one positive root) or c2 > 0 with two positive roots
    let q = -0.5 * (c1 + c1.signum() * disc.sqrt());
    let (r1, r2) = if q != 0.0 { (q / c2, c0 / q) } else { ((-c0 / c2).sqrt(), -(-c0 / c2).sqrt()) };
    let (lo, hi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
    Some(if c2 > 0.0 { lo } else { hi })
}

fn check_inputs(e: f64, v: f64, i: f64) -> Result<(), CriteriaError> {
    if !(e.is_finite() && v.is_finite() && i.is_finite()) {
        return Err(CriteriaError::NonFinite);
    }
    if i < 0.0 {
        return Err(CriteriaError::NegativeVariance(i));
    }
    Ok(())
}

/// The `E > 0` condition in discriminant form: `V < 0` and `V² - c E I > 0`.
pub fn positive_energy_condition(e: f64, v: f64, i: f64, c: f64) -> bool {
    v < 0.0 && v * v - c * e * i > 0.0
}

/// The `E > 0` condition in the form `V + √(cEI) < 0`.
pub fn positive_energy_condition_sqrt(e: f64, v: f64, i: f64, c: f64) -> bool {
    v + (c * e * i).sqrt() < 0.0
}

fn near_boundary(e: f64, v: f64, i: f64, c: f64) -> bool {
    let scale = (v * v).max(c * e * i);
    (v * v - c * e * i).abs() <= BOUNDARY_TOL * scale
}

/// Criterion on finite-variance data, built on `f(t) = I + 4Vt + 8Et²`.
pub fn sigma_criterion(e: f64, v: f64, i: f64) -> Result<CriterionVerdict, CriteriaError> {
    sigma_verdict(Theorem::MassCriticalWeighted, e, v, i)
}

fn sigma_verdict(theorem: Theorem, e: f64, v: f64, i: f64) -> Result<CriterionVerdict, CriteriaError> {
    check_inputs(e, v, i)?;
    let mut out = CriterionVerdict::silent(theorem, true);
    let quad = [i, 4.0 * v, 8.0 * e];
    let branch = if e < 0.0 {
        Branch::NegativeEnergy
    } else if e == 0.0 {
        if v < 0.0 {
            Branch::ZeroEnergyNegativeMomentum
        } else {
            Branch::None
        }
    } else if v < 0.0 && near_boundary(e, v, i, 2.0) {
        out.boundary = true;
        Branch::None
    } else if positive_energy_condition(e, v, i, 2.0) {
        Branch::PositiveEnergyDiscriminant
    } else {
        Branch::None
    };
    if branch != Branch::None {
        out.branch = branch;
        out.t_star = negativity_time(quad[0], quad[1], quad[2]);
        out.predicted_blowup = out.t_star.is_some();
        out.quadratic = Some(quad);
    }
    Ok(out)
}

/// Weighted criterion tagged with `theorem`, gated by the power range.
pub fn weighted_criterion(
    e: f64,
    v: f64,
    i: f64,
    spec: &ProblemSpec,
    theorem: Theorem,
) -> Result<CriterionVerdict, CriteriaError> {
    if theorem.is_radial() || !theorem.applies_to(spec) {
        check_inputs(e, v, i)?;
        return Ok(CriterionVerdict::silent(theorem, false));
    }
    sigma_verdict(theorem, e, v, i)
}

/// Localized criterion for radial data, built on the cutoff functionals `J, W`.
pub fn radial_criterion(
    e: f64,
    w: f64,
    j: f64,
    spec: &ProblemSpec,
    theorem: Theorem,
    radial: bool,
) -> Result<CriterionVerdict, CriteriaError> {
    check_inputs(e, w, j)?;
    if !(radial && theorem.is_radial() && theorem.applies_to(spec)) {
        return Ok(CriterionVerdict::silent(theorem, false));
    }
    let c = theorem.discriminant_coeff(spec);
    let mut out = CriterionVerdict::silent(theorem, true);
    let (branch, c2, delta) = if e < 0.0 {
        (Branch::NegativeEnergy, theorem.negative_energy_coeff(spec) * e, None)
    } else if e == 0.0 {
        if w < 0.0 {
            let delta = if j > 0.0 { 0.5 * (w * w / j).min(1.0) } else { 0.5 };
            (Branch::ZeroEnergyNegativeMomentum, delta, Some(delta))
        } else {
            (Branch::None, 0.0, None)
        }
    } else if w < 0.0 && near_boundary(e, w, j, c) {
        out.boundary = true;
        (Branch::None, 0.0, None)
    } else if positive_energy_condition(e, w, j, c) {
        let delta = if j > 0.0 {
            (0.5 * (w * w / (c * e * j) - 1.0)).min(1.0)
        } else {
            1.0
        };
        (Branch::PositiveEnergyDiscriminant, c * (1.0 + delta) * e, Some(delta))
    } else {
        (Branch::None, 0.0, None)
    };
    if branch != Branch::None {
        let quad = [j, 2.0 * w, c2];
        out.branch = branch;
        out.delta_used = delta;
        out.t_star = negativity_time(quad[0], quad[1], quad[2]);
        out.predicted_blowup = out.t_star.is_some();
        out.quadratic = Some(quad);
    }
    Ok(out)
}

/// Functionals a verdict set is computed from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriteriaInputs {
    pub energy: f64,
    pub i_weight: f64,
    pub v_momentum: f64,
    pub j_local: Option<f64>,
    pub w_local: Option<f64>,
    pub radial: bool,
}

/// Verdicts of every criterion applicable to `spec`.
pub fn applicable_verdicts(inputs: &CriteriaInputs, spec: &ProblemSpec) -> Result<Vec<CriterionVerdict>, CriteriaError> {
    let mut out = Vec::new();
    for theorem in Theorem::ALL {
        if !theorem.applies_to(spec) {
            continue;
        }
        if theorem.is_radial() {
            if let (Some(j), Some(w), true) = (inputs.j_local, inputs.w_local, inputs.radial) {
                out.push(radial_criterion(inputs.energy, w, j, spec, theorem, true)?);
            }
        } else {
            out.push(weighted_criterion(
                inputs.energy,
                inputs.v_momentum,
                inputs.i_weight,
                spec,
                theorem,
            )?);
        }
    }
    Ok(out)
}
