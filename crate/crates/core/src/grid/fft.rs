use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use super::{GridFunction, GridSpec, Spectrum};
use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Relative asymmetry admitted by [`fft_inverse`] before a spectrum is
/// declared non-Hermitian.
pub(crate) const HERMITIAN_TOL: f64 = 1e-12;

/// Unnormalized in-place transform over every axis.
pub(crate) fn transform(spec: &GridSpec, data: &mut [Complex64], direction: FftDirection) {
    let n = spec.points();
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft(n, direction));
    match spec.dim() {
        1 => fft.process(data),
        _ => {
            // rows are contiguous
            fft.process(data);
            let mut column = vec![Complex64::new(0.0, 0.0); n];
            for j in 0..n {
                for i in 0..n {
                    column[i] = data[i * n + j];
                }
                fft.process(&mut column);
                for i in 0..n {
                    data[i * n + j] = column[i];
                }
            }
        }
    }
}

pub fn fft_forward(f: &GridFunction) -> Spectrum {
    let spec = *f.spec();
    let mut data: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform(&spec, &mut data, FftDirection::Forward);
    let norm = 1.0 / spec.len() as f64;
    for c in &mut data {
        *c *= norm;
    }
    Spectrum::from_parts(spec, data)
}

/// Complex synthesis Σ_k c_k e^{2πi k·j/N} without any symmetry check.
pub(crate) fn synthesize(spec: &GridSpec, coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut data = coeffs.to_vec();
    transform(spec, &mut data, FftDirection::Inverse);
    data
}

pub fn fft_inverse(s: &Spectrum) -> Result<GridFunction> {
    let scale = s.coeffs().iter().fold(0.0f64, |m, c| m.max(c.norm()));
    let asym = s.max_asymmetry();
    if asym > HERMITIAN_TOL * scale {
        return Err(Error::NonHermitian { max_asymmetry: asym });
    }
    let data = synthesize(s.spec(), s.coeffs());
    let values = data.into_iter().map(|c| c.re).collect();
    GridFunction::new(*s.spec(), values)
}

/// ∂_j f for every axis j, via the multiplier 2πi k_j / L. The Nyquist
/// coefficient contributes nothing.
pub fn spectral_gradient(f: &GridFunction) -> Vec<GridFunction> {
    let spec = *f.spec();
    let spectrum = fft_forward(f);
    (0..spec.dim())
        .map(|axis| {
            let coeffs: Vec<Complex64> = spectrum
                .coeffs()
                .iter()
                .enumerate()
                .map(|(i, &c)| {
                    if spec.is_nyquist(i) {
                        return Complex64::new(0.0, 0.0);
                    }
                    let xi = spec.xi(i)[axis];
                    c * Complex64::new(0.0, 2.0 * PI * xi)
                })
                .collect();
            let values = synthesize(&spec, &coeffs).into_iter().map(|c| c.re).collect();
            GridFunction::from_vec_unchecked(spec, values)
        })
        .collect()
}

impl Spectrum {
    pub(crate) fn from_parts(spec: GridSpec, coeffs: Vec<Complex64>) -> Self {
        Spectrum::new(spec, coeffs).expect("length matches by construction")
    }
}
