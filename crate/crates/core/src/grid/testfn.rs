//! Reproducible smooth test functions with translate / dilate / amplitude
//! modifiers.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{GridFunction, GridSpec};
use crate::error::{Error, Result};

/// Gaussian-type profiles are treated as supported within this many widths.
const GAUSSIAN_EXTENT: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TestFunctionKind {
    /// exp(−|x − c|² / w²)
    Gaussian { center: [f64; 2], width: f64 },
    /// w ∂_{axis} exp(−|x − c|² / w²); odd about `center`, hence mean zero.
    GaussianDerivative { center: [f64; 2], width: f64, axis: usize },
    /// exp(1 − 1/(1 − ρ²)) for ρ = |x − c| / r < 1, zero outside.
    SmoothBump { center: [f64; 2], radius: f64 },
    /// sin(2π k·x / L)
    Sine { k: [i64; 2] },
    /// Gaussian window of width `width` times a random trigonometric
    /// polynomial with |k|_∞ ≤ `max_k` on the wavelength scale 4·width.
    RandomBandlimited {
        seed: u64,
        max_k: u32,
        center: [f64; 2],
        width: f64,
        #[serde(default)]
        parity: Parity,
    },
    Constant { value: f64 },
}

/// Symmetry of a random band-limited function about its center.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parity {
    #[default]
    Any,
    /// cosine modes only
    Even,
    /// sine modes only; mean zero
    Odd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestFunctionDescriptor {
    pub kind: TestFunctionKind,
    #[serde(default)]
    pub translate: [f64; 2],
    #[serde(default = "one")]
    pub dilate: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
}

fn one() -> f64 {
    1.0
}

impl TestFunctionDescriptor {
    pub fn new(kind: TestFunctionKind) -> Self {
        Self {
            kind,
            translate: [0.0; 2],
            dilate: 1.0,
            amplitude: 1.0,
        }
    }

    pub fn gaussian(center: [f64; 2], width: f64) -> Self {
        Self::new(TestFunctionKind::Gaussian { center, width })
    }

    pub fn gaussian_derivative(center: [f64; 2], width: f64, axis: usize) -> Self {
        Self::new(TestFunctionKind::GaussianDerivative { center, width, axis })
    }

    pub fn bump(center: [f64; 2], radius: f64) -> Self {
        Self::new(TestFunctionKind::SmoothBump { center, radius })
    }

    pub fn sine(k: [i64; 2]) -> Self {
        Self::new(TestFunctionKind::Sine { k })
    }

    pub fn random_bandlimited(seed: u64, max_k: u32, center: [f64; 2], width: f64) -> Self {
        Self::new(TestFunctionKind::RandomBandlimited {
            seed,
            max_k,
            center,
            width,
            parity: Parity::Any,
        })
    }

    /// Restricts a random band-limited descriptor to the given parity; other kinds are unchanged.
    pub fn with_parity(mut self, p: Parity) -> Self {
        if let TestFunctionKind::RandomBandlimited { parity, .. } = &mut self.kind {
            *parity = p;
        }
        self
    }

    pub fn constant(value: f64) -> Self {
        Self::new(TestFunctionKind::Constant { value })
    }

    pub fn translated(mut self, tau: [f64; 2]) -> Self {
        self.translate[0] += tau[0];
        self.translate[1] += tau[1];
        self
    }

    pub fn scaled(mut self, a: f64) -> Self {
        self.amplitude *= a;
        self
    }

    /// Dilation about the descriptor's own center.
    pub fn dilated(mut self, lambda: f64) -> Self {
        self.dilate *= lambda;
        self
    }

    /// The function x ↦ f(p + (x − p)/μ): dilation by μ about the point `p`.
    pub fn dilated_about(mut self, mu: f64, p: [f64; 2]) -> Self {
        let c = self.base_center();
        for a in 0..2 {
            let eff = c[a] + self.translate[a];
            self.translate[a] = p[a] + mu * (eff - p[a]) - c[a];
        }
        self.dilate *= mu;
        self
    }

    fn base_center(&self) -> [f64; 2] {
        match &self.kind {
            TestFunctionKind::Gaussian { center, .. }
            | TestFunctionKind::GaussianDerivative { center, .. }
            | TestFunctionKind::SmoothBump { center, .. }
            | TestFunctionKind::RandomBandlimited { center, .. } => *center,
            TestFunctionKind::Sine { .. } | TestFunctionKind::Constant { .. } => [0.0; 2],
        }
    }

    /// Center after translation.
    pub fn center(&self) -> [f64; 2] {
        let c = self.base_center();
        [c[0] + self.translate[0], c[1] + self.translate[1]]
    }

    /// Radius of the (effective) support after dilation, if localized.
    pub fn extent(&self) -> Option<f64> {
        let lam = self.dilate;
        match &self.kind {
            TestFunctionKind::SmoothBump { radius, .. } => Some(radius * lam),
            TestFunctionKind::Gaussian { width, .. }
            | TestFunctionKind::GaussianDerivative { width, .. }
            | TestFunctionKind::RandomBandlimited { width, .. } => Some(GAUSSIAN_EXTENT * width * lam),
            TestFunctionKind::Sine { .. } | TestFunctionKind::Constant { .. } => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, TestFunctionKind::Constant { .. })
    }

    fn validate(&self, spec: &GridSpec) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidDescriptor(msg));
        if !(self.dilate.is_finite() && self.dilate > 0.0) {
            return bad(format!("dilation must be positive, got {}", self.dilate));
        }
        if !self.amplitude.is_finite() {
            return bad("amplitude must be finite".into());
        }
        match &self.kind {
            TestFunctionKind::Gaussian { width, .. }
            | TestFunctionKind::GaussianDerivative { width, .. }
            | TestFunctionKind::RandomBandlimited { width, .. }
                if !(*width > 0.0) =>
            {
                return bad(format!("width must be positive, got {width}"));
            }
            TestFunctionKind::SmoothBump { radius, .. } if !(*radius > 0.0) => {
                return bad(format!("radius must be positive, got {radius}"));
            }
            TestFunctionKind::GaussianDerivative { axis, .. } if *axis >= spec.dim() => {
                return bad(format!("derivative axis {axis} out of range for n = {}", spec.dim()));
            }
            TestFunctionKind::Sine { k } => {
                for &kj in &k[..spec.dim()] {
                    let ratio = kj as f64 / self.dilate;
                    if (ratio - ratio.round()).abs() > 1e-12 {
                        return bad(format!(
                            "sine k = {kj} dilated by {} is not periodic on the grid",
                            self.dilate
                        ));
                    }
                }
            }
            _ => {}
        }
        if let Some(r) = self.extent() {
            if 2.0 * r >= spec.period() {
                return bad(format!(
                    "support diameter {:.4} (dilate {}) exceeds the period {}",
                    2.0 * r,
                    self.dilate,
                    spec.period()
                ));
            }
        }
        Ok(())
    }
}

/// Random trigonometric coefficients: (k, amplitude, phase).
fn random_modes(seed: u64, max_k: u32, dim: usize) -> Vec<([f64; 2], f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = max_k as i64;
    let mut modes = Vec::new();
    let second: Vec<i64> = if dim == 1 { vec![0] } else { (-k..=k).collect() };
    for k0 in 0..=k {
        for &k1 in &second {
            // one representative of each ±k pair, excluding k = 0
            if k0 == 0 && k1 <= 0 {
                continue;
            }
            let amp: f64 = rng.gen_range(-1.0..1.0);
            let phase: f64 = rng.gen_range(0.0..2.0 * PI);
            modes.push(([k0 as f64, k1 as f64], amp, phase));
        }
    }
    modes
}

pub fn make_function(desc: &TestFunctionDescriptor, spec: &GridSpec) -> Result<GridFunction> {
    desc.validate(spec)?;
    let dim = spec.dim();
    let lam = desc.dilate;
    let amp = desc.amplitude;
    let c = desc.center();
    // displacement from the effective center, undilated
    let local = |x: [f64; 2]| -> [f64; 2] {
        let mut y = [0.0; 2];
        for a in 0..dim {
            y[a] = spec.periodic_delta(x[a], c[a]) / lam;
        }
        y
    };
    let norm2 = |y: [f64; 2]| y[0] * y[0] + y[1] * y[1];

    let f = match &desc.kind {
        TestFunctionKind::Gaussian { width, .. } => {
            let w = *width;
            GridFunction::from_fn(*spec, |x| amp * (-norm2(local(x)) / (w * w)).exp())
        }
        TestFunctionKind::GaussianDerivative { width, axis, .. } => {
            let w = *width;
            let axis = *axis;
            GridFunction::from_fn(*spec, |x| {
                let y = local(x);
                amp * (-2.0 * y[axis] / w) * (-norm2(y) / (w * w)).exp()
            })
        }
        TestFunctionKind::SmoothBump { radius, .. } => {
            let r = *radius;
            GridFunction::from_fn(*spec, |x| {
                let rho2 = norm2(local(x)) / (r * r);
                if rho2 < 1.0 {
                    amp * (1.0 - 1.0 / (1.0 - rho2)).exp()
                } else {
                    0.0
                }
            })
        }
        TestFunctionKind::Sine { k } => {
            let l = spec.period();
            let tau = desc.translate;
            GridFunction::from_fn(*spec, |x| {
                let mut phase = 0.0;
                for a in 0..dim {
                    phase += k[a] as f64 * (x[a] - tau[a]) / lam;
                }
                amp * (2.0 * PI * phase / l).sin()
            })
        }
        TestFunctionKind::RandomBandlimited {
            seed,
            max_k,
            width,
            parity,
            ..
        } => {
            let w = *width;
            let modes = random_modes(*seed, *max_k, dim);
            let norm = 1.0 / (modes.len().max(1) as f64).sqrt();
            let wavelength = 4.0 * w;
            GridFunction::from_fn(*spec, |x| {
                let y = local(x);
                let window = (-norm2(y) / (w * w)).exp();
                let poly: f64 = modes
                    .iter()
                    .map(|(k, a, th)| {
                        let arg = 2.0 * PI * (k[0] * y[0] + k[1] * y[1]) / wavelength;
                        match parity {
                            Parity::Any => a * (arg + th).cos(),
                            Parity::Even => a * arg.cos(),
                            Parity::Odd => a * arg.sin(),
                        }
                    })
                    .sum();
                amp * window * poly * norm
            })
        }
        TestFunctionKind::Constant { value } => GridFunction::constant(*spec, amp * value),
    };
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_sampled_exactly() {
        let spec = GridSpec::new(1, 64, 1.0).unwrap();
        let f = make_function(&TestFunctionDescriptor::sine([1, 0]), &spec).unwrap();
        for (i, &v) in f.values().iter().enumerate() {
            let x = i as f64 / 64.0;
            assert!((v - (2.0 * PI * x).sin()).abs() < 1e-15);
        }
    }

    #[test]
    fn gaussian_peaks_at_center() {
        let spec = GridSpec::new(1, 128, 1.0).unwrap();
        let f = make_function(&TestFunctionDescriptor::gaussian([0.5, 0.0], 1.0 / 16.0), &spec).unwrap();
        let argmax = f
            .values()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(argmax, 64);
        assert!((f.max() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn parity_of_random_bandlimited() {
        let spec = GridSpec::new(2, 32, 1.0).unwrap();
        let base = TestFunctionDescriptor::random_bandlimited(4, 2, [0.5, 0.5], 0.08);
        let even = make_function(&base.clone().with_parity(Parity::Even), &spec).unwrap();
        let odd = make_function(&base.with_parity(Parity::Odd), &spec).unwrap();
        for i in 0..spec.len() {
            let [a, b] = spec.multi_index(i);
            let mirror = spec.flat_index([(32 - a) % 32, (32 - b) % 32]);
            assert!((even.values()[i] - even.values()[mirror]).abs() < 1e-14);
            assert!((odd.values()[i] + odd.values()[mirror]).abs() < 1e-14);
        }
        assert!(odd.mean().abs() < 1e-15);
        assert!(odd.max_abs() > 0.1 && even.max_abs() > 0.1);
    }

    #[test]
    fn random_bandlimited_is_deterministic() {
        let spec = GridSpec::new(2, 32, 1.0).unwrap();
        let d = TestFunctionDescriptor::random_bandlimited(7, 3, [0.5, 0.5], 0.08);
        let a = make_function(&d, &spec).unwrap();
        let b = make_function(&d, &spec).unwrap();
        assert_eq!(a.values(), b.values());
        let other = make_function(&TestFunctionDescriptor::random_bandlimited(8, 3, [0.5, 0.5], 0.08), &spec).unwrap();
        assert_ne!(a.values(), other.values());
    }

    #[test]
    fn oversized_support_rejected() {
        let spec = GridSpec::new(1, 64, 1.0).unwrap();
        let d = TestFunctionDescriptor::bump([0.5, 0.0], 0.3).dilated(2.0);
        let err = make_function(&d, &spec).unwrap_err();
        assert!(err.to_string().contains("exceeds the period"), "{err}");
    }

    #[test]
    fn non_periodic_sine_dilation_rejected() {
        let spec = GridSpec::new(1, 64, 1.0).unwrap();
        let d = TestFunctionDescriptor::sine([1, 0]).dilated(2.0);
        assert!(make_function(&d, &spec).is_err());
        let d = TestFunctionDescriptor::sine([2, 0]).dilated(2.0);
        let f = make_function(&d, &spec).unwrap();
        let g = make_function(&TestFunctionDescriptor::sine([1, 0]), &spec).unwrap();
        assert!(f.sub(&g).max_abs() < 1e-14);
    }

    #[test]
    fn dilation_about_point_matches_substitution() {
        let spec = GridSpec::new(1, 256, 1.0).unwrap();
        let base = TestFunctionDescriptor::bump([0.45, 0.0], 0.05);
        let p = [0.5, 0.0];
        let mu = 2.0;
        let f = make_function(&base.clone().dilated_about(mu, p), &spec).unwrap();
        let expected = GridFunction::from_fn(spec, |x| {
            let y = p[0] + (x[0] - p[0]) / mu;
            let rho2 = ((y - 0.45) / 0.05).powi(2);
            if rho2 < 1.0 {
                (1.0 - 1.0 / (1.0 - rho2)).exp()
            } else {
                0.0
            }
        });
        assert!(f.sub(&expected).max_abs() < 1e-14);
    }

    #[test]
    fn gaussian_derivative_has_zero_mean() {
        let spec = GridSpec::new(1, 256, 1.0).unwrap();
        let f = make_function(&TestFunctionDescriptor::gaussian_derivative([0.5, 0.0], 0.05, 0), &spec).unwrap();
        assert!(f.mean().abs() < 1e-15);
    }
}
