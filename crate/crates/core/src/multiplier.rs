//! Fourier-multiplier operators on the torus: Riesz/Hilbert transforms,
//! fractional Laplacians (2π|ξ|)^s, Riesz potentials (2π|ξ|)^{-s} and
//! generic symbols such as the Bessel lift (1 + |ξ|²)^{σ/2}.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{fft_forward, GridFunction, GridSpec, Spectrum};

/// Default relative tolerance on the mean accepted by [`riesz_potential`].
pub const MEAN_TOL: f64 = 1e-8;

/// Bound on the imaginary residual accepted by [`apply_symbol`], relative to
/// the larger of ‖f‖₂ and ‖Tf‖₂. Roundoff grows with the output for unbounded symbols.
const IMAG_RESIDUAL_TOL: f64 = 1e-10;

/// Relative deviation from m(−ξ) = conj(m(ξ)) tolerated at non-Nyquist frequencies.
const SYMBOL_SYMMETRY_TOL: f64 = 1e-12;

type SymbolFn = dyn Fn([f64; 2]) -> Complex64 + Send + Sync;

/// A multiplier ξ ↦ m(ξ) with an explicitly declared value at ξ = 0.
#[derive(Clone)]
pub struct SymbolDescriptor {
    name: String,
    at_zero: Complex64,
    map: Arc<SymbolFn>,
}

impl std::fmt::Debug for SymbolDescriptor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SymbolDescriptor")
            .field("name", &self.name)
            .field("at_zero", &self.at_zero)
            .finish()
    }
}

fn norm(xi: [f64; 2]) -> f64 {
    (xi[0] * xi[0] + xi[1] * xi[1]).sqrt()
}

impl SymbolDescriptor {
    /// `map` receives the physical frequency ξ = k / L and is never called at ξ = 0.
    pub fn new(
        name: impl Into<String>,
        at_zero: Complex64,
        map: impl Fn([f64; 2]) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            at_zero,
            map: Arc::new(map),
        }
    }

    pub fn real(name: impl Into<String>, at_zero: f64, map: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(name, Complex64::new(at_zero, 0.0), move |xi| Complex64::new(map(xi), 0.0))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, xi: [f64; 2]) -> Complex64 {
        if xi[0] == 0.0 && xi[1] == 0.0 {
            self.at_zero
        } else {
            (self.map)(xi)
        }
    }

    pub fn identity() -> Self {
        Self::real("identity", 1.0, |_| 1.0)
    }

    /// −iξ_j/|ξ| on axis `j` (0-based), zero at the origin.
    pub fn riesz(axis: usize) -> Self {
        Self::new(format!("riesz[{axis}]"), Complex64::new(0.0, 0.0), move |xi| {
            Complex64::new(0.0, -xi[axis] / norm(xi))
        })
    }

    /// (2π|ξ|)^s.
    pub fn frac_laplacian(s: f64) -> Self {
        Self::real(format!("frac_laplacian({s})"), 0.0, move |xi| (2.0 * PI * norm(xi)).powf(s))
    }

    /// (2π|ξ|)^{-s}, zero at the origin.
    pub fn riesz_potential(s: f64) -> Self {
        Self::real(format!("riesz_potential({s})"), 0.0, move |xi| (2.0 * PI * norm(xi)).powf(-s))
    }

    /// Inhomogeneous lift (1 + |ξ|²)^{σ/2}.
    pub fn bessel(sigma: f64) -> Self {
        Self::real(format!("bessel({sigma})"), 1.0, move |xi| {
            (1.0 + xi[0] * xi[0] + xi[1] * xi[1]).powf(0.5 * sigma)
        })
    }

    /// Tabulates the symbol on the spectral grid, symmetrizing the Nyquist
    /// entries so that real input stays real.
    fn tabulate(&self, spec: &GridSpec) -> Result<Vec<Complex64>> {
        let raw: Vec<Complex64> = (0..spec.len()).map(|i| self.eval(spec.xi(i))).collect();
        let scale = raw.iter().fold(0.0f64, |m, c| m.max(c.norm())).max(f64::MIN_POSITIVE);
        let mut out = raw.clone();
        for i in 0..spec.len() {
            let j = spec.negated_index(i);
            if spec.is_nyquist(i) {
                out[i] = 0.5 * (raw[i] + raw[j].conj());
                continue;
            }
            let dev = (raw[j] - raw[i].conj()).norm();
            if dev > SYMBOL_SYMMETRY_TOL * scale {
                let k = spec.frequency(i);
                return Err(Error::SymbolNotHermitian {
                    k: k[..spec.dim()].to_vec(),
                    deviation: dev,
                });
            }
        }
        Ok(out)
    }
}

/// Multiplies an already transformed spectrum by a tabulated symbol and synthesizes.
pub(crate) fn synthesize_real(spectrum: &Spectrum, symbol: &[Complex64], reference_norm: f64) -> Result<GridFunction> {
    let spec = *spectrum.spec();
    let coeffs: Vec<Complex64> = spectrum.coeffs().iter().zip(symbol).map(|(c, m)| c * m).collect();
    let data = crate::grid::fft_synthesize(&spec, &coeffs);
    let (mut imag2, mut real2) = (0.0, 0.0);
    let values: Vec<f64> = data
        .into_iter()
        .map(|c| {
            imag2 += c.im * c.im;
            real2 += c.re * c.re;
            c.re
        })
        .collect();
    let residual = (imag2 * spec.cell_volume()).sqrt();
    let out_norm = (real2 * spec.cell_volume()).sqrt();
    let bound = IMAG_RESIDUAL_TOL * reference_norm.max(out_norm).max(f64::MIN_POSITIVE);
    if residual > bound && residual > 1e-300 {
        return Err(Error::ImaginaryResidual { residual, bound });
    }
    GridFunction::new(spec, values)
}

pub fn apply_symbol(f: &GridFunction, m: &SymbolDescriptor) -> Result<GridFunction> {
    let table = m.tabulate(f.spec())?;
    let spectrum = fft_forward(f);
    synthesize_real(&spectrum, &table, f.l2())
}

/// R_j f for axis `j` (0-based); the Hilbert transform in one dimension.
pub fn riesz_transform(f: &GridFunction, axis: usize) -> Result<GridFunction> {
    if axis >= f.spec().dim() {
        return Err(Error::range(
            "riesz_transform",
            format!("axis {axis} not in 0..{}", f.spec().dim()),
        ));
    }
    apply_symbol(f, &SymbolDescriptor::riesz(axis))
}

pub fn hilbert_transform(f: &GridFunction) -> Result<GridFunction> {
    if f.spec().dim() != 1 {
        return Err(Error::Unsupported("the Hilbert transform is one-dimensional".into()));
    }
    riesz_transform(f, 0)
}

/// (−Δ)^{s/2} f.
pub fn frac_laplacian(f: &GridFunction, s: f64) -> Result<GridFunction> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::range("frac_laplacian", format!("order s = {s} must be > 0")));
    }
    apply_symbol(f, &SymbolDescriptor::frac_laplacian(s))
}

/// I^s f, rejecting inputs whose mean is not negligible.
pub fn riesz_potential(f: &GridFunction, s: f64) -> Result<GridFunction> {
    riesz_potential_with_tol(f, s, MEAN_TOL)
}

pub fn riesz_potential_with_tol(f: &GridFunction, s: f64, tol: f64) -> Result<GridFunction> {
    let n = f.spec().dim() as f64;
    if !(s > 0.0 && s < n) {
        return Err(Error::range("riesz_potential", format!("order s = {s} must lie in (0, {n})")));
    }
    let mean = f.mean();
    if mean.abs() > tol * f.rms() {
        return Err(Error::NonzeroMean { mean, tol });
    }
    apply_symbol(f, &SymbolDescriptor::riesz_potential(s))
}

/// Subtracts the mean and returns it, for callers that project before I^s.
pub fn project_mean_zero(f: &GridFunction) -> (GridFunction, f64) {
    let m = f.mean();
    (f.map(|v| v - m), m)
}
