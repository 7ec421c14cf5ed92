//! Scalar functionals of discrete fields and the identity-residual monitors.
//!
//! Positions are measured from the box center. Gradients are spectral,
//! `L^p` norms use the pointwise rule `h^d Σ|u|^p`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cutoff::RadialCutoff;
use crate::model::{Field, Grid, ProblemSpec};
use crate::spectral::Spectral;

/// Mass fraction beyond `0.4 L` above which the weighted functionals are flagged.
pub const BOUNDARY_MASS_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("Lebesgue exponent must be at least 1, got {0}")]
    Exponent(f64),
    #[error("series lengths differ: {0} vs {1}")]
    Length(usize, usize),
    #[error("fields live on different grids")]
    GridMismatch,
}

/// One row of the diagnostic time series.
///
/// `i_weight`, `v_momentum`, `j_local`, `w_local` are evaluated on `u(t)`;
/// `h_energy`, `v_chi`, `dv_chi`, `d2v_chi_rhs` on `v(t) = e^{at} u(t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticSample {
    pub t: f64,
    pub mass: f64,
    pub grad_sq: f64,
    pub pot: f64,
    pub energy: f64,
    pub k_functional: f64,
    pub h_energy: f64,
    pub i_weight: f64,
    pub v_momentum: f64,
    pub j_local: f64,
    pub w_local: f64,
    pub v_chi: f64,
    pub dv_chi: f64,
    pub d2v_chi_rhs: f64,
    pub sup_abs: f64,
    pub tail: f64,
}

/// Column order of the CSV series.
pub const CSV_COLUMNS: [&str; 16] = [
    "t",
    "mass",
    "grad_sq",
    "pot",
    "energy",
    "k_functional",
    "h_energy",
    "i_weight",
    "v_momentum",
    "j_local",
    "w_local",
    "v_chi",
    "dv_chi",
    "d2v_chi_rhs",
    "sup_abs",
    "tail",
];

impl DiagnosticSample {
    pub fn to_row(&self) -> [f64; 16] {
        [
            self.t,
            self.mass,
            self.grad_sq,
            self.pot,
            self.energy,
            self.k_functional,
            self.h_energy,
            self.i_weight,
            self.v_momentum,
            self.j_local,
            self.w_local,
            self.v_chi,
            self.dv_chi,
            self.d2v_chi_rhs,
            self.sup_abs,
            self.tail,
        ]
    }

    pub fn from_row(row: &[f64]) -> Option<Self> {
        if row.len() != 16 {
            return None;
        }
        Some(Self {
            t: row[0],
            mass: row[1],
            grad_sq: row[2],
            pot: row[3],
            energy: row[4],
            k_functional: row[5],
            h_energy: row[6],
            i_weight: row[7],
            v_momentum: row[8],
            j_local: row[9],
            w_local: row[10],
            v_chi: row[11],
            dv_chi: row[12],
            d2v_chi_rhs: row[13],
            sup_abs: row[14],
            tail: row[15],
        })
    }

    pub fn is_finite(&self) -> bool {
        self.to_row().iter().all(|x| x.is_finite())
    }
}

/// Writes the header and one line per sample. Floats use the shortest round-trip form.
pub fn write_csv(samples: &[DiagnosticSample], mut out: impl std::io::Write) -> std::io::Result<()> {
    writeln!(out, "{}", CSV_COLUMNS.join(","))?;
    for s in samples {
        let row: Vec<String> = s.to_row().iter().map(|x| format!("{x:?}")).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Weight of a virial functional.
#[derive(Clone, Debug, PartialEq)]
pub enum VirialWeight {
    /// `χ = |x|²`
    Quadratic,
    Radial(RadialCutoff),
}

/// Pointwise tables of a radial weight.
#[derive(Clone, Debug)]
struct WeightTable {
    chi: Vec<f64>,
    /// `χ'/r`, so that `∇χ = (χ'/r) x`
    slope: Vec<f64>,
    /// `χ'' - χ'/r`
    bend: Vec<f64>,
    lap: Vec<f64>,
    /// whether `Δ²χ` must be taken into account
    fourth_order: bool,
}

impl WeightTable {
    fn new(grid: &Grid, weight: &VirialWeight) -> Self {
        let n = grid.dim();
        match weight {
            VirialWeight::Quadratic => {
                let chi = grid.radii().map(|r| r * r).collect();
                Self {
                    chi,
                    slope: vec![2.0; grid.len()],
                    bend: vec![0.0; grid.len()],
                    lap: vec![2.0 * n as f64; grid.len()],
                    fourth_order: false,
                }
            }
            VirialWeight::Radial(c) => {
                if 2.0 * c.radius() > 0.5 * grid.length() {
                    log::warn!(
                        "cutoff support 2R = {} exceeds half the box; the weight is not periodic",
                        2.0 * c.radius()
                    );
                }
                let mut t = Self {
                    chi: Vec::with_capacity(grid.len()),
                    slope: Vec::with_capacity(grid.len()),
                    bend: Vec::with_capacity(grid.len()),
                    lap: Vec::with_capacity(grid.len()),
                    fourth_order: true,
                };
                for r in grid.radii() {
                    let e = c.evaluate_unchecked(r, n);
                    let slope = if r > 0.0 { e.d1 / r } else { e.d2 };
                    t.chi.push(e.chi);
                    t.slope.push(slope);
                    t.bend.push(e.d2 - slope);
                    t.lap.push(e.laplacian);
                }
                t
            }
        }
    }
}

/// Raw virial integrals of a field for one weight.
#[derive(Clone, Copy, Debug, Default)]
struct VirialParts {
    action: f64,
    first: f64,
    /// `-∫Δ²χ|u|² + 4Σ∫∂²χ Re(∂u ∂ū)`
    quadratic: f64,
    /// `∫Δχ |u|^{α+2}`
    lap_pot: f64,
}

/// Reusable evaluator for all functionals on one grid.
pub struct Probe {
    spec: ProblemSpec,
    spectral: Spectral,
    positions: Vec<[f64; 3]>,
    radii: Vec<f64>,
    quadratic: WeightTable,
    local: Option<WeightTable>,
}

impl Probe {
    pub fn new(grid: &Grid, spec: &ProblemSpec, cutoff: Option<&RadialCutoff>) -> Self {
        Self {
            spec: *spec,
            spectral: Spectral::new(grid),
            positions: (0..grid.len()).map(|i| grid.position(i)).collect(),
            radii: grid.radii().collect(),
            quadratic: WeightTable::new(grid, &VirialWeight::Quadratic),
            local: cutoff.map(|c| WeightTable::new(grid, &VirialWeight::Radial(c.clone()))),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.spectral.grid()
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn spectral(&mut self) -> &mut Spectral {
        &mut self.spectral
    }

    fn pot_of(&self, u: &[Complex64]) -> f64 {
        let half = 0.5 * (self.spec.alpha() + 2.0);
        self.grid().cell_volume() * u.iter().map(|z| z.norm_sqr().powf(half)).sum::<f64>()
    }

    fn virial_parts(&mut self, u: &[Complex64], grad: &[Vec<Complex64>], table: Option<usize>) -> VirialParts {
        let dim = self.grid().dim();
        let h = self.grid().cell_volume();
        let half = 0.5 * (self.spec.alpha() + 2.0);
        let w = match table {
            None => &self.quadratic,
            Some(_) => self.local.as_ref().expect("cutoff table"),
        };
        let mut p = VirialParts::default();
        for (i, z) in u.iter().enumerate() {
            let m = z.norm_sqr();
            let x = &self.positions[i];
            let mut x_dot_grad = Complex64::default();
            let mut x_dot_cur = 0.0;
            let mut grad_sq = 0.0;
            for a in 0..dim {
                let g = grad[a][i];
                x_dot_grad += x[a] * g;
                x_dot_cur += x[a] * (g * z.conj()).im;
                grad_sq += g.norm_sqr();
            }
            let r = self.radii[i];
            let radial_sq = if r > 0.0 { x_dot_grad.norm_sqr() / (r * r) } else { 0.0 };
            p.action += w.chi[i] * m;
            p.first += 2.0 * w.slope[i] * x_dot_cur;
            p.quadratic += 4.0 * (w.slope[i] * grad_sq + w.bend[i] * radial_sq);
            p.lap_pot += w.lap[i] * m.powf(half);
        }
        if w.fourth_order {
            // -∫Δ²χ|u|² = -∫Δχ Δ(|u|²); the weight is only C² across the knee
            let mut dens: Vec<Complex64> = u.iter().map(|z| Complex64::new(z.norm_sqr(), 0.0)).collect();
            self.spectral.forward(&mut dens);
            for (d, k2) in dens.iter_mut().zip(self.spectral.k_squared()) {
                *d *= -k2;
            }
            self.spectral.inverse(&mut dens);
            let w = self.local.as_ref().expect("cutoff table");
            p.quadratic -= w.lap.iter().zip(&dens).map(|(l, d)| l * d.re).sum::<f64>();
        }
        p.action *= h;
        p.first *= h;
        p.quadratic *= h;
        p.lap_pot *= h;
        p
    }

    /// All diagnostics of `u` at its own time stamp.
    pub fn sample(&mut self, u: &Field) -> DiagnosticSample {
        let t = u.time();
        let vals = u.values();
        let hat = self.spectral.spectrum(vals);
        let mass = self.grid().cell_volume() * vals.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let grad_sq = self.spectral.parseval_gradient(&hat);
        let tail = self.spectral.tail_fraction(&hat);
        let grad = self.spectral.gradient_from_spectrum(&hat);
        let pot = self.pot_of(vals);
        let alpha = self.spec.alpha();
        let mu = self.spec.mu();
        let a = self.spec.damping;
        let energy = 0.5 * grad_sq + mu * pot / (alpha + 2.0);
        let k_functional = grad_sq + mu * pot;
        let quad = self.virial_parts(vals, &grad, None);
        let (i_weight, v_momentum) = (quad.action, 0.25 * quad.first);
        let local = if self.local.is_some() {
            self.virial_parts(vals, &grad, Some(0))
        } else {
            quad
        };
        // without a cutoff χ = |x|², so J = I and W = 2V
        let (j_local, w_local) = (local.action, 0.5 * local.first);
        // every v-functional below is e^{2at} times its u-counterpart
        let s = (2.0 * a * t).exp();
        let nonlinear = mu * 2.0 * alpha / (alpha + 2.0) * local.lap_pot;
        DiagnosticSample {
            t,
            mass,
            grad_sq,
            pot,
            energy,
            k_functional,
            h_energy: s * energy,
            i_weight,
            v_momentum,
            j_local,
            w_local,
            v_chi: s * local.action,
            dv_chi: s * local.first,
            d2v_chi_rhs: s * (local.quadratic + nonlinear),
            sup_abs: u.sup_abs(),
            tail,
        }
    }
}

/// `h^d Σ|u|²`.
pub fn mass(u: &Field) -> f64 {
    u.grid().cell_volume() * u.values().iter().map(|z| z.norm_sqr()).sum::<f64>()
}

/// `∫|∇u|²` by spectral differentiation.
pub fn gradient_norm_sq(u: &Field) -> f64 {
    let mut sp = Spectral::new(u.grid());
    let hat = sp.spectrum(u.values());
    sp.parseval_gradient(&hat)
}

/// `h^d Σ|u|^p`.
pub fn lebesgue_pow(u: &Field, p: f64) -> f64 {
    u.grid().cell_volume() * u.values().iter().map(|z| z.norm().powf(p)).sum::<f64>()
}

/// `(E, K)` of `u`.
pub fn energy_e(u: &Field, spec: &ProblemSpec) -> (f64, f64) {
    let g = gradient_norm_sq(u);
    let pot = lebesgue_pow(u, spec.alpha() + 2.0);
    let mu = spec.mu();
    (0.5 * g + mu * pot / (spec.alpha() + 2.0), g + mu * pot)
}

/// `H(v, t) = ½∥∇v∥² + μ e^{-aαt}/(α+2) ∥v∥^{α+2}`.
pub fn energy_h(v: &Field, t: f64, spec: &ProblemSpec) -> f64 {
    let g = gradient_norm_sq(v);
    let pot = lebesgue_pow(v, spec.alpha() + 2.0);
    let alpha = spec.alpha();
    0.5 * g + spec.mu() * (-spec.damping * alpha * t).exp() / (alpha + 2.0) * pot
}

/// Fraction of the mass outside the ball of radius `0.4 L`.
pub fn boundary_mass_fraction(u: &Field) -> f64 {
    u.mass_fraction_outside(0.4 * u.grid().length())
}

fn warn_boundary(u: &Field) {
    let frac = boundary_mass_fraction(u);
    if frac > BOUNDARY_MASS_TOL {
        log::warn!("boundary mass fraction {frac:.3e}: weighted functionals unreliable");
    }
}

fn first_parts(u: &Field, weight: &VirialWeight) -> (f64, f64) {
    let spec = ProblemSpec::new(u.grid().dim(), crate::model::Power::new(2.0).expect("power"), crate::model::Sign::Focusing, 0.0)
        .expect("valid spec");
    let cutoff = match weight {
        VirialWeight::Quadratic => None,
        VirialWeight::Radial(c) => Some(c),
    };
    let mut probe = Probe::new(u.grid(), &spec, cutoff);
    let grad = probe.spectral.gradient(u.values());
    let p = probe.virial_parts(u.values(), &grad, cutoff.map(|_| 0));
    (p.action, p.first)
}

/// `(I, V) = (∥xu∥², ∫x·Im(∇u ū))`.
pub fn weighted_iv(u: &Field) -> (f64, f64) {
    warn_boundary(u);
    let (i, dv) = first_parts(u, &VirialWeight::Quadratic);
    (i, 0.25 * dv)
}

/// `(J, W) = (∫χ_R|u|², ∫∇χ_R·Im(∇u ū))`.
pub fn localized_jw(u: &Field, cutoff: &RadialCutoff) -> (f64, f64) {
    warn_boundary(u);
    let (j, dw) = first_parts(u, &VirialWeight::Radial(cutoff.clone()));
    (j, 0.5 * dw)
}

/// `(V_χ, dV_χ/dt)` of the field `v`, the derivative taken from the field itself.
pub fn virial_action(v: &Field, weight: &VirialWeight) -> (f64, f64) {
    first_parts(v, weight)
}

/// Right side of the second-derivative virial identity at time `t`.
pub fn virial_second_rhs(v: &Field, t: f64, spec: &ProblemSpec, weight: &VirialWeight) -> f64 {
    let cutoff = match weight {
        VirialWeight::Quadratic => None,
        VirialWeight::Radial(c) => Some(c),
    };
    let mut probe = Probe::new(v.grid(), spec, cutoff);
    let grad = probe.spectral.gradient(v.values());
    let p = probe.virial_parts(v.values(), &grad, cutoff.map(|_| 0));
    let alpha = spec.alpha();
    p.quadratic + spec.mu() * 2.0 * alpha / (alpha + 2.0) * (-spec.damping * alpha * t).exp() * p.lap_pot
}

/// Cumulative trapezoid `∫_{t_0}^{t_i} y`.
pub fn cumulative_trapezoid(t: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(y.len());
    let mut acc = 0.0;
    for i in 0..y.len() {
        if i > 0 {
            acc += 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
        }
        out.push(acc);
    }
    out
}

/// `e^{-aαs}∥v(s)∥^{α+2}` along the series (equal to `e^{2as}∥u(s)∥^{α+2}`).
fn damped_pot(samples: &[DiagnosticSample], spec: &ProblemSpec) -> Vec<f64> {
    samples
        .iter()
        .map(|s| (2.0 * spec.damping * s.t).exp() * s.pot)
        .collect()
}

/// `H(v(t)) - E(u₀) + aαμ/(α+2) ∫₀ᵗ e^{-aαs}∥v∥^{α+2}` along the series.
pub fn energy_identity_residual(samples: &[DiagnosticSample], spec: &ProblemSpec) -> Vec<f64> {
    let Some(first) = samples.first() else {
        return Vec::new();
    };
    let alpha = spec.alpha();
    let t: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let integral = cumulative_trapezoid(&t, &damped_pot(samples, spec));
    let coeff = spec.damping * alpha * spec.mu() / (alpha + 2.0);
    samples
        .iter()
        .zip(&integral)
        .map(|(s, int)| s.h_energy - first.energy + coeff * int)
        .collect()
}

/// Triple cumulative trapezoid of `c e^{-ρσ} g(σ)`.
pub fn triple_integral(t: &[f64], g: &[f64], c: f64, rho: f64) -> Vec<f64> {
    let y: Vec<f64> = t.iter().zip(g).map(|(s, v)| c * (-rho * s).exp() * v).collect();
    let once = cumulative_trapezoid(t, &y);
    let twice = cumulative_trapezoid(t, &once);
    cumulative_trapezoid(t, &twice)
}

/// Triple integral of `c e^{-ρσ}∥v(σ)∥^{α+2}` along the series.
pub fn damping_triple_integral(samples: &[DiagnosticSample], spec: &ProblemSpec, c: f64, rho: f64) -> Vec<f64> {
    let t: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let a = spec.damping;
    let alpha = spec.alpha();
    let pot_v: Vec<f64> = samples
        .iter()
        .map(|s| (a * (alpha + 2.0) * s.t).exp() * s.pot)
        .collect();
    triple_integral(&t, &pot_v, c, rho)
}

/// `e^{at}∥u(t) - e^{-at}e^{itΔ}u₊∥_{H¹}`, with `t` the time stamp of `u`.
pub fn scattering_deficit(u: &Field, u_plus: &Field, damping: f64) -> Result<f64, DiagnosticsError> {
    if u.grid() != u_plus.grid() {
        return Err(DiagnosticsError::GridMismatch);
    }
    let t = u.time();
    let mut sp = Spectral::new(u.grid());
    let mut free = sp.spectrum(u_plus.values());
    sp.apply_free_phase(&mut free, t);
    let scale = (damping * t).exp();
    let mut diff = sp.spectrum(u.values());
    for (d, f) in diff.iter_mut().zip(&free) {
        *d = scale * *d - f;
    }
    Ok(sp.h1_norm_sq(&diff).sqrt())
}

/// `∥f∥_{L^r} + ∥|∇f|∥_{L^r}`.
pub fn sobolev_w1r(sp: &mut Spectral, f: &Field, r: f64) -> f64 {
    let h = f.grid().cell_volume();
    let grad = sp.gradient(f.values());
    let lr = (h * f.values().iter().map(|z| z.norm().powf(r)).sum::<f64>()).powf(1.0 / r);
    let gr = (h * (0..f.values().len())
        .map(|i| grad.iter().map(|g| g[i].norm_sqr()).sum::<f64>().powf(0.5 * r))
        .sum::<f64>())
    .powf(1.0 / r);
    lr + gr
}

/// Discrete `L^q_t W^{1,r}_x` norm of a time series of fields (trapezoid in time).
pub fn strichartz_norm(fields: &[Field], q: f64, r: f64) -> Result<f64, DiagnosticsError> {
    if q.is_nan() || q < 1.0 {
        return Err(DiagnosticsError::Exponent(q));
    }
    if r.is_nan() || r < 1.0 {
        return Err(DiagnosticsError::Exponent(r));
    }
    let Some(first) = fields.first() else {
        return Ok(0.0);
    };
    if fields.iter().any(|f| f.grid() != first.grid()) {
        return Err(DiagnosticsError::GridMismatch);
    }
    let mut sp = Spectral::new(first.grid());
    let t: Vec<f64> = fields.iter().map(Field::time).collect();
    let y: Vec<f64> = fields.iter().map(|f| sobolev_w1r(&mut sp, f, r).powf(q)).collect();
    let total = cumulative_trapezoid(&t, &y).last().copied().unwrap_or(0.0);
    Ok(total.powf(1.0 / q))
}

/// Admissible pair `(γ, ρ) = (2N/(N-2), 2N²/(N²-2N+4))` for `N ≥ 3`.
pub fn strichartz_exponents(n: usize) -> Option<(f64, f64)> {
    (n >= 3).then(|| {
        let n = n as f64;
        (2.0 * n / (n - 2.0), 2.0 * n * n / (n * n - 2.0 * n + 4.0))
    })
}
