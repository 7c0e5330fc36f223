//! Sampled periodic functions on uniform grids in one or two dimensions,
//! their Fourier spectra and spectral derivatives.
//!
//! The torus of period `L` stands in for ℝⁿ: test functions are supported
//! well inside one period and every operator uses the torus frequencies
//! ξ = k / L with k ∈ [-N/2, N/2)ⁿ.

mod fft;
pub mod testfn;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use fft::{fft_forward, fft_inverse, spectral_gradient};
pub(crate) use fft::synthesize as fft_synthesize;
pub use testfn::{make_function, Parity, TestFunctionDescriptor, TestFunctionKind};

/// Uniform periodic grid: `dim` axes with `points` samples each over a
/// period `period`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    points: usize,
    period: f64,
}

impl GridSpec {
    pub fn new(dim: usize, points: usize, period: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!("dimension must be 1 or 2, got {dim}")));
        }
        if points < 8 || !points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be a power of two >= 8, got {points}"
            )));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidGrid(format!("period must be positive, got {period}")));
        }
        Ok(Self { dim, points, period })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Grid spacing h = L / N.
    pub fn spacing(&self) -> f64 {
        self.period / self.points as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Total number of samples, Nⁿ.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Torus volume Lⁿ.
    pub fn volume(&self) -> f64 {
        self.period.powi(self.dim as i32)
    }

    /// Multi-index of a flat (row-major) index. Axis 0 varies slowest.
    pub fn multi_index(&self, flat: usize) -> [usize; 2] {
        match self.dim {
            1 => [flat, 0],
            _ => [flat / self.points, flat % self.points],
        }
    }

    pub fn flat_index(&self, idx: [usize; 2]) -> usize {
        match self.dim {
            1 => idx[0],
            _ => idx[0] * self.points + idx[1],
        }
    }

    /// Physical coordinates x_k = k L / N of a flat index (unused axes are 0).
    pub fn coords(&self, flat: usize) -> [f64; 2] {
        let h = self.spacing();
        let [i, j] = self.multi_index(flat);
        match self.dim {
            1 => [i as f64 * h, 0.0],
            _ => [i as f64 * h, j as f64 * h],
        }
    }

    /// Signed integer frequency of FFT-ordered index `i` on one axis.
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.points as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Integer frequency vector of a flat spectral index.
    pub fn frequency(&self, flat: usize) -> [i64; 2] {
        let [i, j] = self.multi_index(flat);
        match self.dim {
            1 => [self.wavenumber(i), 0],
            _ => [self.wavenumber(i), self.wavenumber(j)],
        }
    }

    /// Physical frequency ξ = k / L of a flat spectral index.
    pub fn xi(&self, flat: usize) -> [f64; 2] {
        let k = self.frequency(flat);
        [k[0] as f64 / self.period, k[1] as f64 / self.period]
    }

    /// Whether any component of the frequency is the Nyquist value -N/2.
    pub fn is_nyquist(&self, flat: usize) -> bool {
        let nyq = -(self.points as i64) / 2;
        let k = self.frequency(flat);
        k[..self.dim].contains(&nyq)
    }

    /// Flat index of the frequency -k (modulo N on every axis).
    pub fn negated_index(&self, flat: usize) -> usize {
        let n = self.points;
        let [i, j] = self.multi_index(flat);
        let neg = |a: usize| (n - a) % n;
        match self.dim {
            1 => neg(i),
            _ => neg(i) * n + neg(j),
        }
    }

    /// Periodic displacement x - y reduced to [-L/2, L/2) per axis.
    pub fn periodic_delta(&self, x: f64, y: f64) -> f64 {
        let l = self.period;
        let mut d = (x - y) % l;
        if d >= 0.5 * l {
            d -= l;
        } else if d < -0.5 * l {
            d += l;
        }
        d
    }
}

/// Real samples of a function on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    spec: GridSpec,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} samples, got {}",
                spec.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                op: format!("GridFunction::new (sample {i})"),
            });
        }
        Ok(Self { spec, values })
    }

    pub(crate) fn from_vec_unchecked(spec: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), spec.len());
        Self { spec, values }
    }

    pub fn zeros(spec: GridSpec) -> Self {
        Self {
            spec,
            values: vec![0.0; spec.len()],
        }
    }

    pub fn constant(spec: GridSpec, c: f64) -> Self {
        Self {
            spec,
            values: vec![c; spec.len()],
        }
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(spec: GridSpec, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values = (0..spec.len()).map(|i| f(spec.coords(i))).collect();
        Self { spec, values }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.spec, other.spec)));
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            spec: self.spec,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.spec, other.spec, "grid mismatch");
        Self {
            spec: self.spec,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn add(&self, other: &GridFunction) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFunction) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    /// Pointwise product.
    pub fn mul(&self, other: &GridFunction) -> Self {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    /// Average over the torus.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn remove_mean(&self) -> Self {
        let m = self.mean();
        self.map(|v| v - m)
    }

    /// Riemann-sum pairing Σ f g hⁿ.
    pub fn pairing(&self, other: &GridFunction) -> f64 {
        assert_eq!(self.spec, other.spec, "grid mismatch");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * self.spec.cell_volume()
    }

    /// L² norm with cell volume weighting.
    pub fn l2(&self) -> f64 {
        self.pairing(self).sqrt()
    }

    /// Root mean square, ‖f‖₂ / L^{n/2}.
    pub fn rms(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Relative L² distance ‖self − other‖₂ / ‖other‖₂ (absolute when `other` vanishes).
    pub fn rel_l2_error(&self, reference: &GridFunction) -> f64 {
        let diff = self.sub(reference).l2();
        let norm = reference.l2();
        if norm > 0.0 {
            diff / norm
        } else {
            diff
        }
    }

    /// Relative L∞ distance max|self − other| / max|other|.
    pub fn rel_linf_error(&self, reference: &GridFunction) -> f64 {
        let diff = self.sub(reference).max_abs();
        let norm = reference.max_abs();
        if norm > 0.0 {
            diff / norm
        } else {
            diff
        }
    }

    /// Cyclic shift by an integer number of cells per axis: out(x) = self(x − shift·h).
    pub fn shifted(&self, shift: [i64; 2]) -> Self {
        let spec = self.spec;
        let n = spec.points as i64;
        let values = (0..spec.len())
            .map(|flat| {
                let [i, j] = spec.multi_index(flat);
                let si = (i as i64 - shift[0]).rem_euclid(n) as usize;
                let sj = (j as i64 - shift[1]).rem_euclid(n) as usize;
                self.values[spec.flat_index([si, sj])]
            })
            .collect();
        Self { spec, values }
    }
}

/// Fourier coefficients c_k = N^{-n} Σ_j f(x_j) e^{-2πi k·j/N}, stored in FFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    spec: GridSpec,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(spec: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != spec.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} coefficients, got {}",
                spec.len(),
                coeffs.len()
            )));
        }
        Ok(Self { spec, coeffs })
    }

    pub fn zeros(spec: GridSpec) -> Self {
        Self {
            spec,
            coeffs: vec![Complex64::new(0.0, 0.0); spec.len()],
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Flat index of the integer frequency `k` (components in [-N/2, N/2)).
    pub fn index_of(&self, k: &[i64]) -> usize {
        let n = self.spec.points as i64;
        let wrap = |c: i64| c.rem_euclid(n) as usize;
        match self.spec.dim {
            1 => wrap(k[0]),
            _ => wrap(k[0]) * self.spec.points + wrap(k[1]),
        }
    }

    pub fn coeff(&self, k: &[i64]) -> Complex64 {
        self.coeffs[self.index_of(k)]
    }

    pub fn set_coeff(&mut self, k: &[i64], value: Complex64) {
        let i = self.index_of(k);
        self.coeffs[i] = value;
    }

    /// max_k |c(−k) − conj(c(k))|.
    pub fn max_asymmetry(&self) -> f64 {
        (0..self.coeffs.len())
            .map(|i| {
                let j = self.spec.negated_index(i);
                (self.coeffs[j] - self.coeffs[i].conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Lⁿ Σ |c_k|², equal to ‖f‖₂² by Parseval.
    pub fn energy(&self) -> f64 {
        self.spec.volume() * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }
}
