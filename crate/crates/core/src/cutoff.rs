//! Radial virial cutoffs `χ_R(r) = R² θ(r/R)`.
//!
//! Two profiles are provided:
//!
//! * [`CutoffKind::MassCriticalTheta`]: `θ = ∫₀^r ϑ`, with
//!   `ϑ(r) = 2r` on `[0, 1]`, `2[r - (r-1)³]` on `(1, 1+1/√3]`, a decreasing
//!   completion on `(1+1/√3, 2)` and `0` beyond. The completion is a cubic
//!   Hermite bridge by default; a quintic bridge that also matches `ϑ''` is
//!   available through [`Completion::Quintic`].
//! * [`CutoffKind::GenericTheta`]: `θ = r²` on `[0, 1]`, `θ = 2` for `r ≥ 2`,
//!   joined by the quintic with matching value, slope and curvature at both
//!   ends. It satisfies `θ'' ≤ 2` everywhere.
//!
//! Every profile is stored as exact polynomial pieces, so all derivatives up
//! to fourth order are available in closed form.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Left end of the completion interval, `1 + 1/√3`.
pub const KNEE: f64 = 1.0 + 0.577_350_269_189_625_8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CutoffError {
    #[error("radius must be non-negative, got {0}")]
    NegativeRadius(f64),
    #[error("cutoff scale must be positive and finite, got {0}")]
    Scale(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CutoffKind {
    #[default]
    MassCriticalTheta,
    GenericTheta,
}

/// How `ϑ` is continued on `(1+1/√3, 2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Completion {
    #[default]
    Hermite,
    Quintic,
}

/// Polynomial in `s = (ρ - start)/scale`, valid for `ρ ∈ [start, end)`.
#[derive(Clone, Debug, PartialEq)]
struct Piece {
    start: f64,
    end: f64,
    scale: f64,
    coeffs: Vec<f64>,
}

impl Piece {
    /// Value and the first four derivatives with respect to `ρ`.
    fn eval(&self, rho: f64) -> [f64; 5] {
        let s = (rho - self.start) / self.scale;
        let mut out = [0.0; 5];
        let mut c = self.coeffs.clone();
        let mut factor = 1.0;
        for slot in out.iter_mut() {
            *slot = c.iter().rev().fold(0.0, |acc, &a| acc * s + a) * factor;
            c = c.iter().enumerate().skip(1).map(|(i, a)| i as f64 * a).collect();
            factor /= self.scale;
        }
        out
    }
}

/// Value of `ϑ` at the knee, `2 + 4/(3√3)`.
fn knee_value() -> f64 {
    let d = KNEE - 1.0;
    2.0 * (KNEE - d * d * d)
}

fn knee_theta() -> f64 {
    let d = KNEE - 1.0;
    KNEE * KNEE - d.powi(4) / 2.0
}

/// Coefficients `[c3, c4, c5]` of the quintic bridge for `ϑ` on the knee interval,
/// in `s ∈ [0, 1]`, given `p(0), p''(0)/2` and `p'(0) = 0`, vanishing to second order at `s = 1`.
fn quintic_bridge(p0: f64, p1: f64, p2: f64) -> [f64; 3] {
    // Solve [[1,1,1],[3,4,5],[6,12,20]] c = rhs by Cramer's rule.
    let rhs = [-(p0 + p1 + p2), -(p1 + 2.0 * p2), -(2.0 * p2)];
    let m = [[1.0, 1.0, 1.0], [3.0, 4.0, 5.0], [6.0, 12.0, 20.0]];
    let det3 = |a: [[f64; 3]; 3]| {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    };
    let det = det3(m);
    let mut out = [0.0; 3];
    for (col, slot) in out.iter_mut().enumerate() {
        let mut a = m;
        for row in 0..3 {
            a[row][col] = rhs[row];
        }
        *slot = det3(a) / det;
    }
    out
}

/// Coefficients of the quintic completion of `ϑ` in `s = (ρ - KNEE)/(2 - KNEE)`.
fn quintic_vartheta_coeffs() -> [f64; 6] {
    let h = 2.0 - KNEE;
    let p0 = knee_value();
    let p2 = -12.0 * (KNEE - 1.0) * h * h / 2.0;
    let [c3, c4, c5] = quintic_bridge(p0, 0.0, p2);
    [p0, 0.0, p2, c3, c4, c5]
}

/// The profile `ϑ` with the chosen completion.
pub fn vartheta(r: f64, completion: Completion) -> Result<f64, CutoffError> {
    if r.is_nan() || r < 0.0 {
        return Err(CutoffError::NegativeRadius(r));
    }
    Ok(if r <= 1.0 {
        2.0 * r
    } else if r <= KNEE {
        2.0 * (r - (r - 1.0).powi(3))
    } else if r < 2.0 {
        let s = (r - KNEE) / (2.0 - KNEE);
        match completion {
            Completion::Hermite => knee_value() * (1.0 - 3.0 * s * s + 2.0 * s * s * s),
            Completion::Quintic => quintic_vartheta_coeffs()
                .iter()
                .rev()
                .fold(0.0, |acc, &c| acc * s + c),
        }
    } else {
        0.0
    })
}

/// `θ(r)` of the given kind (the mass-critical profile uses the Hermite completion).
pub fn theta(r: f64, kind: CutoffKind) -> Result<f64, CutoffError> {
    let cutoff = RadialCutoff::new(1.0, kind, Completion::Hermite)?;
    if r.is_nan() || r < 0.0 {
        return Err(CutoffError::NegativeRadius(r));
    }
    Ok(cutoff.profile(r)[0])
}

/// Quantities of `χ_R` at one radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutoffEvaluation {
    pub r: f64,
    pub chi: f64,
    pub d1: f64,
    pub d2: f64,
    pub laplacian: f64,
    pub bilaplacian: f64,
    /// `2 - χ''`
    pub chi1: f64,
    /// `2N - Δχ`
    pub chi2: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RadialCutoff {
    radius: f64,
    kind: CutoffKind,
    completion: Completion,
    pieces: Vec<Piece>,
}

impl RadialCutoff {
    pub fn new(radius: f64, kind: CutoffKind, completion: Completion) -> Result<Self, CutoffError> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(CutoffError::Scale(radius));
        }
        let pieces = match kind {
            CutoffKind::MassCriticalTheta => mass_critical_pieces(completion),
            CutoffKind::GenericTheta => generic_pieces(),
        };
        Ok(Self {
            radius,
            kind,
            completion,
            pieces,
        })
    }

    /// Mass-critical profile with the default completion.
    pub fn mass_critical(radius: f64) -> Result<Self, CutoffError> {
        Self::new(radius, CutoffKind::MassCriticalTheta, Completion::Hermite)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn kind(&self) -> CutoffKind {
        self.kind
    }

    pub fn completion(&self) -> Completion {
        self.completion
    }

    /// Radii (in units of `R`) where the polynomial pieces meet.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.pieces.iter().skip(1).map(|p| p.start).collect()
    }

    /// `θ` and its first four derivatives at `ρ = r/R`.
    pub fn profile(&self, rho: f64) -> [f64; 5] {
        let piece = self
            .pieces
            .iter()
            .rev()
            .find(|p| rho >= p.start)
            .unwrap_or(&self.pieces[0]);
        piece.eval(rho)
    }

    /// Left and right limits of the profile derivatives at `ρ`.
    pub fn one_sided(&self, rho: f64) -> ([f64; 5], [f64; 5]) {
        let idx = self.pieces.iter().rposition(|p| rho >= p.start).unwrap_or(0);
        let right = self.pieces[idx].eval(rho);
        let left = if idx > 0 && self.pieces[idx].start == rho {
            self.pieces[idx - 1].eval(rho)
        } else {
            right
        };
        (left, right)
    }

    /// `χ_R(r)`.
    pub fn value(&self, r: f64) -> f64 {
        self.radius * self.radius * self.profile(r / self.radius)[0]
    }

    /// `χ_R`, its radial derivatives and the derived quantities at radius `r` in dimension `n`.
    pub fn evaluate(&self, r: f64, n: usize) -> Result<CutoffEvaluation, CutoffError> {
        if r.is_nan() || r < 0.0 {
            return Err(CutoffError::NegativeRadius(r));
        }
        Ok(self.evaluate_unchecked(r, n))
    }

    pub(crate) fn evaluate_unchecked(&self, r: f64, n: usize) -> CutoffEvaluation {
        let big_r = self.radius;
        let rho = r / big_r;
        let p = self.profile(rho);
        let chi = big_r * big_r * p[0];
        let d1 = big_r * p[1];
        let d2 = p[2];
        let d3 = p[3] / big_r;
        let d4 = p[4] / (big_r * big_r);
        let nm1 = n as f64 - 1.0;
        let (laplacian, bilaplacian) = if rho <= 1.0 {
            // χ = r² exactly on the inner ball
            (2.0 * n as f64, 0.0)
        } else {
            let lap = d2 + nm1 * d1 / r;
            let bilap = d4 + 2.0 * nm1 * d3 / r + nm1 * (n as f64 - 3.0) * (d2 / (r * r) - d1 / (r * r * r));
            (lap, bilap)
        };
        CutoffEvaluation {
            r,
            chi,
            d1,
            d2,
            laplacian,
            bilaplacian,
            chi1: 2.0 - d2,
            chi2: 2.0 * n as f64 - laplacian,
        }
    }
}

fn mass_critical_pieces(completion: Completion) -> Vec<Piece> {
    let h = 2.0 - KNEE;
    let v = knee_value();
    let t1 = knee_theta();
    let (bridge, plateau) = match completion {
        Completion::Hermite => {
            // ϑ = v (1 - 3s² + 2s³)  ⇒  θ = θ₁ + v h (s - s³ + s⁴/2)
            let vh = v * h;
            (vec![t1, vh, 0.0, -vh, 0.5 * vh], t1 + 0.5 * vh)
        }
        Completion::Quintic => {
            let c = quintic_vartheta_coeffs();
            let mut coeffs = vec![t1];
            coeffs.extend(c.iter().enumerate().map(|(i, a)| h * a / (i as f64 + 1.0)));
            let plateau = coeffs.iter().sum();
            (coeffs, plateau)
        }
    };
    vec![
        Piece {
            start: 0.0,
            end: 1.0,
            scale: 1.0,
            coeffs: vec![0.0, 0.0, 1.0],
        },
        // θ = ρ² - (ρ-1)⁴/2 in s = ρ - 1
        Piece {
            start: 1.0,
            end: KNEE,
            scale: 1.0,
            coeffs: vec![1.0, 2.0, 1.0, 0.0, -0.5],
        },
        Piece {
            start: KNEE,
            end: 2.0,
            scale: h,
            coeffs: bridge,
        },
        Piece {
            start: 2.0,
            end: f64::INFINITY,
            scale: 1.0,
            coeffs: vec![plateau],
        },
    ]
}

fn generic_pieces() -> Vec<Piece> {
    vec![
        Piece {
            start: 0.0,
            end: 1.0,
            scale: 1.0,
            coeffs: vec![0.0, 0.0, 1.0],
        },
        // 1 + 2s + s² - 5s³ + 4s⁴ - s⁵: matches r² to second order at s = 0 and 2 at s = 1
        Piece {
            start: 1.0,
            end: 2.0,
            scale: 1.0,
            coeffs: vec![1.0, 2.0, 1.0, -5.0, 4.0, -1.0],
        },
        Piece {
            start: 2.0,
            end: f64::INFINITY,
            scale: 1.0,
            coeffs: vec![2.0],
        },
    ]
}

/// `evaluate_cutoff` in free-function form.
pub fn evaluate_cutoff(cutoff: &RadialCutoff, r: f64, n: usize) -> Result<CutoffEvaluation, CutoffError> {
    cutoff.evaluate(r, n)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PositivityReport {
    pub min_margin: f64,
    pub argmin: f64,
    /// Radius of the worst violation, if the margin drops below `-1e-12`.
    pub violating: Option<f64>,
    pub passed: bool,
}

/// Margin tolerance for [`verify_positivity`].
pub const POSITIVITY_TOL: f64 = 1e-12;

/// Radii sampled by [`verify_positivity`]: a uniform grid over `[0, 4R]` plus the breakpoints.
pub fn positivity_radii(cutoff: &RadialCutoff, samples: usize) -> Vec<f64> {
    let top = 4.0 * cutoff.radius();
    let samples = samples.max(2);
    let mut radii: Vec<f64> = (0..samples).map(|i| top * i as f64 / (samples - 1) as f64).collect();
    radii.extend(cutoff.breakpoints().iter().map(|b| b * cutoff.radius()));
    radii.sort_by(f64::total_cmp);
    radii
}

/// `χ₁ - Cε χ₂^{N/2}` at one radius (a negative `χ₂` from rounding is clamped to zero).
pub fn positivity_margin(eval: &CutoffEvaluation, n: usize, eps: f64, constant: f64) -> f64 {
    eval.chi1 - constant * eps * eval.chi2.max(0.0).powf(n as f64 / 2.0)
}

pub fn verify_positivity(
    cutoff: &RadialCutoff,
    n: usize,
    eps: f64,
    constant: f64,
    samples: usize,
) -> PositivityReport {
    let mut min_margin = f64::INFINITY;
    let mut argmin = 0.0;
    for r in positivity_radii(cutoff, samples) {
        let m = positivity_margin(&cutoff.evaluate_unchecked(r, n), n, eps, constant);
        if m < min_margin {
            min_margin = m;
            argmin = r;
        }
    }
    let passed = min_margin >= -POSITIVITY_TOL;
    PositivityReport {
        min_margin,
        argmin,
        violating: (!passed).then_some(argmin),
        passed,
    }
}

/// Largest `ε` (to relative precision `1e-10`) for which [`verify_positivity`] passes.
pub fn largest_passing_eps(cutoff: &RadialCutoff, n: usize, constant: f64, samples: usize) -> f64 {
    let passes = |eps: f64| verify_positivity(cutoff, n, eps, constant, samples).passed;
    let mut lo = 0.0;
    let mut hi = 1.0;
    while passes(hi) {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return f64::INFINITY;
        }
    }
    while hi - lo > 1e-10 * hi {
        let mid = 0.5 * (lo + hi);
        if passes(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT3: f64 = 1.732_050_807_568_877_2;

    #[test]
    fn vartheta_examples() {
        assert_eq!(vartheta(1.0, Completion::Hermite).unwrap(), 2.0);
        assert_eq!(vartheta(2.5, Completion::Hermite).unwrap(), 0.0);
        let expected = 2.0 + 4.0 / (3.0 * SQRT3);
        assert!((vartheta(KNEE, Completion::Hermite).unwrap() - expected).abs() < 1e-14);
        assert!((expected - 2.7698).abs() < 1e-4);
        assert!(vartheta(-0.1, Completion::Hermite).is_err());
    }

    #[test]
    fn theta_examples() {
        assert!((theta(1.0, CutoffKind::MassCriticalTheta).unwrap() - 1.0).abs() < 1e-15);
        let r: f64 = 1.2;
        let expected = r * r - (r - 1.0).powi(4) / 2.0;
        assert!((expected - 1.4392).abs() < 1e-12);
        assert!((theta(r, CutoffKind::MassCriticalTheta).unwrap() - expected).abs() < 1e-14);
        assert_eq!(theta(3.0, CutoffKind::GenericTheta).unwrap(), 2.0);
        assert!(theta(-1.0, CutoffKind::GenericTheta).is_err());
    }

    #[test]
    fn inner_ball_is_quadratic() {
        let c = RadialCutoff::mass_critical(2.0).unwrap();
        for &r in &[0.0, 0.5, 1.3, 2.0] {
            let e = c.evaluate(r, 3).unwrap();
            assert!((e.chi - r * r).abs() < 1e-13);
            assert!(e.chi1.abs() < 1e-13);
            assert!(e.chi2.abs() < 1e-13);
        }
    }

    #[test]
    fn knee_region_closed_forms() {
        let big_r = 1.7;
        let c = RadialCutoff::mass_critical(big_r).unwrap();
        for &rho in &[1.05, 1.3, 1.5, KNEE] {
            let e = c.evaluate(rho * big_r, 2).unwrap();
            let s = rho - 1.0;
            assert!((e.chi1 - 6.0 * s * s).abs() < 1e-12, "rho={rho}");
        }
        // N = 2, ρ = 1.5: χ₂ = 6s² + 2s³/ρ with s = 1/2
        let e = c.evaluate(1.5 * big_r, 2).unwrap();
        assert!((e.chi2 - 5.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn bridges_are_decreasing() {
        for completion in [Completion::Hermite, Completion::Quintic] {
            for i in 1..1000 {
                let r = KNEE + (2.0 - KNEE) * i as f64 / 1000.0;
                let c = RadialCutoff::new(1.0, CutoffKind::MassCriticalTheta, completion).unwrap();
                assert!(c.profile(r)[2] < 0.0, "{completion:?} at {r}");
            }
        }
    }

    #[test]
    fn positivity_examples() {
        let c = RadialCutoff::mass_critical(1.0).unwrap();
        let rep = verify_positivity(&c, 2, 0.1, 1.0, 4001);
        assert!(rep.passed, "{rep:?}");
        let rep = verify_positivity(&c, 3, 10.0, 1.0, 4001);
        assert!(!rep.passed);
        assert!(rep.violating.is_some());
        for rho in [1.2, 1.4, KNEE] {
            let e = c.evaluate(rho, 3).unwrap();
            assert!(positivity_margin(&e, 3, 10.0, 1.0) < 0.0, "rho={rho}");
        }
        let eps = largest_passing_eps(&c, 2, 1.0, 4001);
        assert!(eps >= 0.1 && eps.is_finite());
        assert!(!verify_positivity(&c, 2, eps * 1.01, 1.0, 4001).passed);
    }

    #[test]
    fn margin_vanishes_on_inner_ball() {
        let c = RadialCutoff::mass_critical(3.0).unwrap();
        for i in 0..=30 {
            let r = 3.0 * i as f64 / 30.0;
            let e = c.evaluate(r, 3).unwrap();
            assert!(positivity_margin(&e, 3, 123.0, 1.0).abs() < 1e-10);
        }
    }
}
