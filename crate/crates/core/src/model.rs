//! Problem parameters, criticality classes, periodic grids and fields.
//!
//! A [`ProblemSpec`] fixes the equation
//!
//! ```text
//! i u_t + Δu + i a u = μ |u|^α u,   x ∈ ℝ^N
//! ```
//!
//! and a [`Grid`] is the periodic box `[-L/2, L/2)^d` that stands in for `ℝ^N`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Tolerance for boundary comparisons of a non-rational exponent.
pub const CLASSIFY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("dimension must be at least 1")]
    Dimension,
    #[error("nonlinearity power must be positive and finite, got {0}")]
    Power(f64),
    #[error("invalid exponent literal `{0}`")]
    PowerLiteral(String),
    #[error("focusing sign must be +1 or -1, got {0}")]
    Sign(i64),
    #[error("damping must be finite and non-negative, got {0}")]
    Damping(f64),
    #[error("grid point count {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("grid extent must be positive and finite, got {0}")]
    Extent(f64),
    #[error("computational dimension must be 1, 2 or 3, got {0}")]
    GridDimension(usize),
    #[error("expected {expected} values, got {got}")]
    ValueCount { expected: usize, got: usize },
    #[error("field contains a non-finite value at index {0}")]
    NonFinite(usize),
    #[error("gaussian width must be positive, got {0}")]
    Width(f64),
}

/// Nonlinearity power α, optionally carried as an exact ratio `p/q`.
///
/// Serializes as a JSON number, or as the string `"p/q"` when the ratio is known.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Power {
    value: f64,
    ratio: Option<(u64, u64)>,
}

impl Power {
    pub fn new(value: f64) -> Result<Self, ModelError> {
        if !(value.is_finite() && value > 0.0) {
            return Err(ModelError::Power(value));
        }
        Ok(Self { value, ratio: None })
    }

    pub fn ratio(p: u64, q: u64) -> Result<Self, ModelError> {
        if p == 0 || q == 0 {
            return Err(ModelError::PowerLiteral(format!("{p}/{q}")));
        }
        Ok(Self {
            value: p as f64 / q as f64,
            ratio: Some((p, q)),
        })
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn as_ratio(&self) -> Option<(u64, u64)> {
        self.ratio
    }

    /// Compares α with `num/den` exactly when possible.
    fn cmp_ratio(&self, num: u64, den: u64) -> std::cmp::Ordering {
        match self.ratio {
            Some((p, q)) => (p as u128 * den as u128).cmp(&(num as u128 * q as u128)),
            None => {
                let target = num as f64 / den as f64;
                if (self.value - target).abs() <= CLASSIFY_TOL * target.max(1.0) {
                    std::cmp::Ordering::Equal
                } else {
                    self.value.partial_cmp(&target).unwrap()
                }
            }
        }
    }
}

impl fmt::Display for Power {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.ratio {
            Some((p, q)) => write!(f, "{p}/{q}"),
            None => write!(f, "{}", self.value),
        }
    }
}

impl FromStr for Power {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p = p.trim().parse::<u64>();
            let q = q.trim().parse::<u64>();
            match (p, q) {
                (Ok(p), Ok(q)) => Power::ratio(p, q),
                _ => Err(ModelError::PowerLiteral(s.to_string())),
            }
        } else {
            let v = s
                .parse::<f64>()
                .map_err(|_| ModelError::PowerLiteral(s.to_string()))?;
            Power::new(v)
        }
    }
}

impl Serialize for Power {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self.ratio {
            Some(_) => serializer.serialize_str(&self.to_string()),
            None => serializer.serialize_f64(self.value),
        }
    }
}

impl<'de> Deserialize<'de> for Power {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Num(v) => Power::new(v).map_err(serde::de::Error::custom),
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Focusing (`μ = -1`) or defocusing (`μ = +1`) nonlinearity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Focusing,
    Defocusing,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Focusing => -1.0,
            Sign::Defocusing => 1.0,
        }
    }

    pub fn from_int(mu: i64) -> Result<Self, ModelError> {
        match mu {
            -1 => Ok(Sign::Focusing),
            1 => Ok(Sign::Defocusing),
            other => Err(ModelError::Sign(other)),
        }
    }

    pub fn as_int(self) -> i64 {
        match self {
            Sign::Focusing => -1,
            Sign::Defocusing => 1,
        }
    }
}

impl Serialize for Sign {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_i64(self.as_int())
    }
}

impl<'de> Deserialize<'de> for Sign {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let mu = i64::deserialize(deserializer)?;
        Sign::from_int(mu).map_err(serde::de::Error::custom)
    }
}

/// Equation parameters `(N, α, μ, a)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct ProblemSpec {
    pub dimension: usize,
    pub alpha: Power,
    pub mu: Sign,
    pub damping: f64,
}

#[derive(Deserialize)]
struct RawSpec {
    dimension: usize,
    alpha: Power,
    mu: Sign,
    damping: f64,
}

impl TryFrom<RawSpec> for ProblemSpec {
    type Error = ModelError;

    fn try_from(raw: RawSpec) -> Result<Self, Self::Error> {
        ProblemSpec::new(raw.dimension, raw.alpha, raw.mu, raw.damping)
    }
}

impl ProblemSpec {
    pub fn new(dimension: usize, alpha: Power, mu: Sign, damping: f64) -> Result<Self, ModelError> {
        if dimension == 0 {
            return Err(ModelError::Dimension);
        }
        if !(damping.is_finite() && damping >= 0.0) {
            return Err(ModelError::Damping(damping));
        }
        Ok(Self {
            dimension,
            alpha,
            mu,
            damping,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.value()
    }

    pub fn mu(&self) -> f64 {
        self.mu.value()
    }

    pub fn with_damping(&self, damping: f64) -> Result<Self, ModelError> {
        Self::new(self.dimension, self.alpha, self.mu, damping)
    }

    pub fn class(&self) -> CriticalityClass {
        classify(self)
    }

    /// Upper energy-critical power `4/(N-2)`, infinite for `N ≤ 2`.
    pub fn energy_critical_power(&self) -> f64 {
        if self.dimension >= 3 {
            4.0 / (self.dimension as f64 - 2.0)
        } else {
            f64::INFINITY
        }
    }

    /// Exact comparison of α with `4/N`.
    pub fn cmp_mass_critical(&self) -> std::cmp::Ordering {
        self.alpha.cmp_ratio(4, self.dimension as u64)
    }

    /// Exact comparison of α with `4/(N-2)`; `Less` for `N ≤ 2`.
    pub fn cmp_energy_critical(&self) -> std::cmp::Ordering {
        if self.dimension <= 2 {
            std::cmp::Ordering::Less
        } else {
            self.alpha.cmp_ratio(4, self.dimension as u64 - 2)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CriticalityClass {
    MassSubcritical,
    MassCritical,
    MassSupercriticalEnergySubcritical,
    EnergyCritical,
    EnergySupercritical,
}

pub fn classify(spec: &ProblemSpec) -> CriticalityClass {
    use std::cmp::Ordering::*;
    match spec.cmp_mass_critical() {
        Less => CriticalityClass::MassSubcritical,
        Equal => CriticalityClass::MassCritical,
        Greater => match spec.cmp_energy_critical() {
            Less => CriticalityClass::MassSupercriticalEnergySubcritical,
            Equal => CriticalityClass::EnergyCritical,
            Greater => CriticalityClass::EnergySupercritical,
        },
    }
}

/// Periodic Cartesian box `[-L/2, L/2)^d` with `n` points per axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid")]
pub struct Grid {
    length: f64,
    points: usize,
    dim: usize,
}

#[derive(Deserialize)]
struct RawGrid {
    length: f64,
    points: usize,
    dim: usize,
}

impl TryFrom<RawGrid> for Grid {
    type Error = ModelError;

    fn try_from(raw: RawGrid) -> Result<Self, Self::Error> {
        make_grid(raw.length, raw.points, raw.dim)
    }
}

pub fn make_grid(length: f64, points: usize, dim: usize) -> Result<Grid, ModelError> {
    if !(length.is_finite() && length > 0.0) {
        return Err(ModelError::Extent(length));
    }
    if !points.is_power_of_two() || points < 2 {
        return Err(ModelError::NotPowerOfTwo(points));
    }
    if !(1..=3).contains(&dim) {
        return Err(ModelError::GridDimension(dim));
    }
    Ok(Grid {
        length,
        points,
        dim,
    })
}

impl Grid {
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Points per axis.
    pub fn points(&self) -> usize {
        self.points
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.points as f64
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Coordinate of index `i` along one axis, measured from the box center.
    pub fn coordinate(&self, i: usize) -> f64 {
        -0.5 * self.length + i as f64 * self.spacing()
    }

    /// Angular wavenumber of FFT index `i` along one axis.
    pub fn wavenumber(&self, i: usize) -> f64 {
        let n = self.points as i64;
        let j = i as i64;
        let m = if j < n / 2 { j } else { j - n };
        2.0 * PI / self.length * m as f64
    }

    pub fn max_wavenumber(&self) -> f64 {
        PI / self.spacing()
    }

    /// Multi-index of a flat row-major index (unused axes are zero).
    pub fn unravel(&self, flat: usize) -> [usize; 3] {
        let n = self.points;
        let mut idx = [0usize; 3];
        let mut rem = flat;
        for axis in (0..self.dim).rev() {
            idx[axis] = rem % n;
            rem /= n;
        }
        idx
    }

    /// Physical position of a flat index (unused axes are zero).
    pub fn position(&self, flat: usize) -> [f64; 3] {
        let idx = self.unravel(flat);
        let mut x = [0.0; 3];
        for axis in 0..self.dim {
            x[axis] = self.coordinate(idx[axis]);
        }
        x
    }

    /// Iterator over `|x|` for every grid point, in storage order.
    pub fn radii(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| {
            let x = self.position(i);
            (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
        })
    }
}

/// Complex field on a grid at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<Complex64>,
    time: f64,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<Complex64>, time: f64) -> Result<Self, ModelError> {
        if values.len() != grid.len() {
            return Err(ModelError::ValueCount {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(ModelError::NonFinite(i));
        }
        Ok(Self { grid, values, time })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
            time: 0.0,
        }
    }

    /// Samples `f(x)` at every grid point.
    pub fn from_fn(grid: Grid, time: f64, mut f: impl FnMut([f64; 3]) -> Complex64) -> Result<Self, ModelError> {
        let values = (0..grid.len()).map(|i| f(grid.position(i))).collect();
        Self::new(grid, values, time)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Fraction of `∫|u|²` carried outside the ball of radius `radius`.
    pub fn mass_fraction_outside(&self, radius: f64) -> f64 {
        let mut outside = 0.0;
        let mut total = 0.0;
        for (z, r) in self.values.iter().zip(self.grid.radii()) {
            let m = z.norm_sqr();
            total += m;
            if r > radius {
                outside += m;
            }
        }
        if total > 0.0 {
            outside / total
        } else {
            0.0
        }
    }
}

/// Boundary value tolerance for Gaussian data, relative to the amplitude.
pub const GAUSSIAN_EDGE_TOL: f64 = 1e-12;

/// Centered Gaussian `A exp(-|x|²/(2σ²)) exp(i b |x|²)`.
pub fn gaussian_data(grid: &Grid, amplitude: f64, width: f64, chirp: f64) -> Result<Field, ModelError> {
    if !(width.is_finite() && width > 0.0) {
        return Err(ModelError::Width(width));
    }
    let edge = 0.5 * grid.length();
    let edge_value = (-edge * edge / (2.0 * width * width)).exp();
    if edge_value > GAUSSIAN_EDGE_TOL {
        log::warn!(
            "gaussian data truncated by the box: boundary value {:.3e} of the amplitude",
            edge_value
        );
    }
    Field::from_fn(*grid, 0.0, |x| {
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        Complex64::from_polar(amplitude * (-r2 / (2.0 * width * width)).exp(), chirp * r2)
    })
}
