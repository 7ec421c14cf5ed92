//! Multi-dimensional FFTs and spectral derivatives on a periodic [`Grid`].

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::model::Grid;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// FFT plans and wavenumber tables for one grid. Not shared between threads;
/// each run builds its own.
pub struct Spectral {
    grid: Grid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Per-axis wavenumbers, Nyquist included.
    k: Vec<f64>,
    /// Per-axis wavenumbers with the Nyquist mode zeroed, for odd derivatives.
    k_odd: Vec<f64>,
    /// `|k|²` for every flat index.
    k2: Vec<f64>,
    line: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Spectral {
    pub fn new(grid: &Grid) -> Self {
        let n = grid.points();
        let (forward, inverse) = PLANNER.with(|p| {
            let mut p = p.borrow_mut();
            (p.plan_fft_forward(n), p.plan_fft_inverse(n))
        });
        let k: Vec<f64> = (0..n).map(|i| grid.wavenumber(i)).collect();
        let mut k_odd = k.clone();
        k_odd[n / 2] = 0.0;
        let k2 = (0..grid.len())
            .map(|flat| {
                let idx = grid.unravel(flat);
                (0..grid.dim()).map(|a| k[idx[a]] * k[idx[a]]).sum()
            })
            .collect();
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            grid: *grid,
            forward,
            inverse,
            k,
            k_odd,
            k2,
            line: vec![Complex64::default(); n],
            scratch: vec![Complex64::default(); scratch_len],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `|k|²` per flat spectral index.
    pub fn k_squared(&self) -> &[f64] {
        &self.k2
    }

    /// Wavenumber along `axis` of flat spectral index `flat`, Nyquist zeroed.
    pub fn k_odd(&self, flat: usize, axis: usize) -> f64 {
        self.k_odd[self.grid.unravel(flat)[axis]]
    }

    /// Unnormalized forward transform in place.
    pub fn forward(&mut self, data: &mut [Complex64]) {
        let fft = Arc::clone(&self.forward);
        self.transform(&*fft, data);
    }

    /// Inverse transform in place, normalized so that `inverse(forward(u)) = u`.
    pub fn inverse(&mut self, data: &mut [Complex64]) {
        let fft = Arc::clone(&self.inverse);
        self.transform(&*fft, data);
        let scale = 1.0 / self.grid.len() as f64;
        for z in data.iter_mut() {
            *z *= scale;
        }
    }

    fn transform(&mut self, fft: &dyn Fft<f64>, data: &mut [Complex64]) {
        let n = self.grid.points();
        let d = self.grid.dim();
        debug_assert_eq!(data.len(), self.grid.len());
        // last axis is contiguous
        fft.process_with_scratch(data, &mut self.scratch);
        for axis in 0..d.saturating_sub(1) {
            let stride = n.pow((d - 1 - axis) as u32);
            let block = stride * n;
            for start in (0..data.len()).step_by(block) {
                for offset in 0..stride {
                    let base = start + offset;
                    for (j, slot) in self.line.iter_mut().enumerate() {
                        *slot = data[base + j * stride];
                    }
                    fft.process_with_scratch(&mut self.line, &mut self.scratch);
                    for (j, slot) in self.line.iter().enumerate() {
                        data[base + j * stride] = *slot;
                    }
                }
            }
        }
    }

    /// Spectrum of `u` (unnormalized).
    pub fn spectrum(&mut self, u: &[Complex64]) -> Vec<Complex64> {
        let mut hat = u.to_vec();
        self.forward(&mut hat);
        hat
    }

    /// Gradient components `∂_j u`, one vector per axis.
    pub fn gradient(&mut self, u: &[Complex64]) -> Vec<Vec<Complex64>> {
        let hat = self.spectrum(u);
        self.gradient_from_spectrum(&hat)
    }

    pub fn gradient_from_spectrum(&mut self, hat: &[Complex64]) -> Vec<Vec<Complex64>> {
        let i = Complex64::new(0.0, 1.0);
        (0..self.grid.dim())
            .map(|axis| {
                let mut comp: Vec<Complex64> = hat
                    .iter()
                    .enumerate()
                    .map(|(flat, z)| i * self.k_odd(flat, axis) * z)
                    .collect();
                self.inverse(&mut comp);
                comp
            })
            .collect()
    }

    /// Laplacian of `u`.
    pub fn laplacian(&mut self, u: &[Complex64]) -> Vec<Complex64> {
        let mut hat = self.spectrum(u);
        for (z, k2) in hat.iter_mut().zip(&self.k2) {
            *z *= -k2;
        }
        self.inverse(&mut hat);
        hat
    }

    /// `∫|u|²` evaluated from an unnormalized spectrum (Parseval).
    pub fn parseval_mass(&self, hat: &[Complex64]) -> f64 {
        let norm = self.grid.cell_volume() / self.grid.len() as f64;
        norm * hat.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    /// `∫|∇u|²` from an unnormalized spectrum.
    pub fn parseval_gradient(&self, hat: &[Complex64]) -> f64 {
        let norm = self.grid.cell_volume() / self.grid.len() as f64;
        norm * hat
            .iter()
            .zip(&self.k2)
            .map(|(z, k2)| k2 * z.norm_sqr())
            .sum::<f64>()
    }

    /// Discrete `‖u‖²_{H¹} = ∫(1+|k|²)|û|²` from an unnormalized spectrum.
    pub fn h1_norm_sq(&self, hat: &[Complex64]) -> f64 {
        self.parseval_mass(hat) + self.parseval_gradient(hat)
    }

    /// Fraction of `Σ|û|²` carried by modes with some `|k_j|` above two thirds of the
    /// grid's maximum wavenumber.
    pub fn tail_fraction(&self, hat: &[Complex64]) -> f64 {
        let cut = 2.0 / 3.0 * self.grid.max_wavenumber();
        let mut tail = 0.0;
        let mut total = 0.0;
        for (flat, z) in hat.iter().enumerate() {
            let m = z.norm_sqr();
            total += m;
            let idx = self.grid.unravel(flat);
            if (0..self.grid.dim()).any(|a| self.k[idx[a]].abs() > cut) {
                tail += m;
            }
        }
        if total > 0.0 {
            tail / total
        } else {
            0.0
        }
    }

    /// Multiplies the spectrum by `exp(-i|k|² t)`.
    pub fn apply_free_phase(&self, hat: &mut [Complex64], t: f64) {
        for (z, k2) in hat.iter_mut().zip(&self.k2) {
            *z *= Complex64::from_polar(1.0, -k2 * t);
        }
    }
}
