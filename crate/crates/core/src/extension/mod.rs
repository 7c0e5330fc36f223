//! Generalized Poisson extensions F(x, t) = P^s_t f(x) on the upper half-space
//! over the torus, their derivatives, and consistency diagnostics.

mod symbol;

pub use symbol::{s_poisson_symbol, symbol_row, PoissonSymbol, RadialGrid, SymbolRow, SYMBOL_TOL};

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{fft_forward, GridFunction, GridSpec, Spectrum};
use crate::multiplier::{frac_laplacian, synthesize_real};

/// Minimum number of heights accepted by [`TLevels::log_spaced`].
pub const MIN_LEVELS: usize = 16;

/// Ascending heights t₁ < … < t_M with trapezoid weights in u = ln t,
/// so that ∫ g(t) dt ≈ Σ wᵢ tᵢ g(tᵢ).
#[derive(Debug, Clone, PartialEq)]
pub struct TLevels {
    heights: Vec<f64>,
    weights: Vec<f64>,
}

impl TLevels {
    /// `count` geometrically spaced heights in [t_min, t_max]; requires
    /// t_min ≥ h/8, t_max ≤ 4L and count ≥ 16.
    pub fn log_spaced(spec: &GridSpec, t_min: f64, t_max: f64, count: usize) -> Result<Self> {
        let h = spec.spacing();
        let l = spec.period();
        if !(t_min >= h / 8.0 * (1.0 - 1e-12)) {
            return Err(Error::range("t_levels", format!("t_min = {t_min} is below h/8 = {}", h / 8.0)));
        }
        if !(t_max <= 4.0 * l * (1.0 + 1e-12)) {
            return Err(Error::range("t_levels", format!("t_max = {t_max} exceeds 4L = {}", 4.0 * l)));
        }
        if !(t_max > t_min) {
            return Err(Error::range("t_levels", format!("t_max = {t_max} must exceed t_min = {t_min}")));
        }
        if count < MIN_LEVELS {
            return Err(Error::range("t_levels", format!("{count} levels given, at least {MIN_LEVELS} needed")));
        }
        let du = (t_max / t_min).ln() / (count - 1) as f64;
        let heights = (0..count).map(|i| t_min * (du * i as f64).exp()).collect();
        Ok(Self::from_heights_unchecked(heights))
    }

    /// The default truncation for a grid: h/4 ≤ t ≤ 2L with eight levels per unit of ln t.
    pub fn default_for(spec: &GridSpec) -> Self {
        let t_min = spec.spacing() / 4.0;
        let t_max = 2.0 * spec.period();
        let count = (((t_max / t_min).ln() * 8.0).ceil() as usize + 1).max(MIN_LEVELS);
        Self::log_spaced(spec, t_min, t_max, count).expect("default levels satisfy the invariants")
    }

    fn from_heights_unchecked(heights: Vec<f64>) -> Self {
        let m = heights.len();
        let mut weights = vec![0.0; m];
        for i in 0..m.saturating_sub(1) {
            let du = (heights[i + 1] / heights[i]).ln();
            weights[i] += 0.5 * du;
            weights[i + 1] += 0.5 * du;
        }
        Self { heights, weights }
    }

    /// Inserts the geometric midpoint between neighbouring heights, halving the ln t spacing.
    pub fn refined(&self) -> Self {
        let mut heights = Vec::with_capacity(2 * self.heights.len() - 1);
        for w in self.heights.windows(2) {
            heights.push(w[0]);
            heights.push((w[0] * w[1]).sqrt());
        }
        heights.push(*self.heights.last().expect("non-empty"));
        Self::from_heights_unchecked(heights)
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.heights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heights.is_empty()
    }

    pub fn t_min(&self) -> f64 {
        self.heights[0]
    }

    pub fn t_max(&self) -> f64 {
        *self.heights.last().expect("non-empty")
    }

    /// ∫ g dt over [t₁, t_M] from samples g(tᵢ).
    pub fn integrate(&self, samples: &[f64]) -> f64 {
        samples
            .iter()
            .zip(&self.heights)
            .zip(&self.weights)
            .map(|((g, t), w)| g * t * w)
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DerivativeFlags {
    pub time: bool,
    pub space: bool,
}

impl DerivativeFlags {
    pub const NONE: Self = Self {
        time: false,
        space: false,
    };
    pub const ALL: Self = Self { time: true, space: true };
}

/// Which quantity of an extension field a functional consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldSelector {
    Value,
    TimeDerivative,
    SpatialGradient,
    /// (∇_x F, ∂_t F), the full gradient in n + 1 variables.
    FullGradient,
}

/// F on every level, optionally with ∂_tF and ∂_{x_j}F.
#[derive(Debug, Clone)]
pub struct ExtensionField {
    spec: GridSpec,
    s: f64,
    levels: TLevels,
    values: Vec<GridFunction>,
    time_derivative: Option<Vec<GridFunction>>,
    gradient: Option<Vec<Vec<GridFunction>>>,
}

impl ExtensionField {
    /// Assembles a field from precomputed level data, checking shapes.
    pub fn from_levels(
        s: f64,
        levels: TLevels,
        values: Vec<GridFunction>,
        time_derivative: Option<Vec<GridFunction>>,
        gradient: Option<Vec<Vec<GridFunction>>>,
    ) -> Result<Self> {
        let spec = *values
            .first()
            .ok_or_else(|| Error::Degenerate("extension field without levels".into()))?
            .spec();
        let m = levels.len();
        let same = |v: &GridFunction| v.spec() == &spec;
        let ok = values.len() == m
            && values.iter().all(same)
            && time_derivative.as_ref().is_none_or(|d| d.len() == m && d.iter().all(same))
            && gradient
                .as_ref()
                .is_none_or(|g| g.len() == m && g.iter().all(|l| l.len() == spec.dim() && l.iter().all(same)));
        if !ok {
            return Err(Error::GridMismatch("level arrays differ in shape".into()));
        }
        Ok(Self {
            spec,
            s,
            levels,
            values,
            time_derivative,
            gradient,
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn levels(&self) -> &TLevels {
        &self.levels
    }

    pub fn value(&self, level: usize) -> &GridFunction {
        &self.values[level]
    }

    pub fn time_derivative(&self, level: usize) -> Result<&GridFunction> {
        self.time_derivative
            .as_ref()
            .map(|d| &d[level])
            .ok_or_else(|| Error::MissingField("time derivative of the extension".into()))
    }

    pub fn gradient(&self, level: usize) -> Result<&[GridFunction]> {
        self.gradient
            .as_ref()
            .map(|g| g[level].as_slice())
            .ok_or_else(|| Error::MissingField("spatial gradient of the extension".into()))
    }

    /// Pointwise |selected quantity|² at one level.
    pub fn squared_magnitude(&self, level: usize, selector: FieldSelector) -> Result<Vec<f64>> {
        let sq = |g: &GridFunction| g.values().iter().map(|v| v * v).collect::<Vec<f64>>();
        let add = |mut acc: Vec<f64>, g: &GridFunction| {
            for (a, v) in acc.iter_mut().zip(g.values()) {
                *a += v * v;
            }
            acc
        };
        Ok(match selector {
            FieldSelector::Value => sq(self.value(level)),
            FieldSelector::TimeDerivative => sq(self.time_derivative(level)?),
            FieldSelector::SpatialGradient => {
                let g = self.gradient(level)?;
                g.iter().fold(vec![0.0; self.spec.len()], add)
            }
            FieldSelector::FullGradient => {
                let g = self.gradient(level)?;
                let acc = g.iter().fold(vec![0.0; self.spec.len()], add);
                add(acc, self.time_derivative(level)?)
            }
        })
    }

    /// Multiplies every level of every stored quantity by `weight(t)`.
    pub fn weighted(&self, weight: impl Fn(f64) -> f64) -> Self {
        let w: Vec<f64> = self.levels.heights().iter().map(|&t| weight(t)).collect();
        let scale_all = |v: &Vec<GridFunction>| v.iter().zip(&w).map(|(g, &a)| g.scale(a)).collect::<Vec<_>>();
        Self {
            spec: self.spec,
            s: self.s,
            levels: self.levels.clone(),
            values: scale_all(&self.values),
            time_derivative: self.time_derivative.as_ref().map(scale_all),
            gradient: self.gradient.as_ref().map(|g| {
                g.iter()
                    .zip(&w)
                    .map(|(l, &a)| l.iter().map(|c| c.scale(a)).collect())
                    .collect()
            }),
        }
    }
}

fn radius(xi: [f64; 2]) -> f64 {
    (xi[0] * xi[0] + xi[1] * xi[1]).sqrt()
}

/// F(·, t), and optionally ∂_tF(·, t) and ∇_xF(·, t), from the spectrum of f.
fn level_data(
    spectrum: &Spectrum,
    symbol: &PoissonSymbol,
    t: f64,
    flags: DerivativeFlags,
    reference_norm: f64,
) -> Result<(GridFunction, Option<GridFunction>, Option<Vec<GridFunction>>)> {
    let spec = *spectrum.spec();
    let mut m = Vec::with_capacity(spec.len());
    let mut dt = Vec::with_capacity(if flags.time { spec.len() } else { 0 });
    for i in 0..spec.len() {
        let r = t * radius(spec.xi(i));
        m.push(Complex64::new(symbol.value(r)?, 0.0));
        if flags.time {
            dt.push(Complex64::new(symbol.q(r)? / t, 0.0));
        }
    }
    let value = synthesize_real(spectrum, &m, reference_norm)?;
    let time = if flags.time {
        Some(synthesize_real(spectrum, &dt, reference_norm)?)
    } else {
        None
    };
    let grad = if flags.space {
        let mut out = Vec::with_capacity(spec.dim());
        for axis in 0..spec.dim() {
            let sym: Vec<Complex64> = (0..spec.len())
                .map(|i| {
                    if spec.is_nyquist(i) {
                        Complex64::new(0.0, 0.0)
                    } else {
                        m[i] * Complex64::new(0.0, 2.0 * PI * spec.xi(i)[axis])
                    }
                })
                .collect();
            out.push(synthesize_real(spectrum, &sym, reference_norm)?);
        }
        Some(out)
    } else {
        None
    };
    Ok((value, time, grad))
}

/// F(·, t) = P^s_t f on every level of `levels`.
pub fn extend_field(
    f: &GridFunction,
    symbol: &PoissonSymbol,
    levels: &TLevels,
    flags: DerivativeFlags,
) -> Result<ExtensionField> {
    let spectrum = fft_forward(f);
    let norm = f.l2();
    let per_level = levels
        .heights()
        .par_iter()
        .map(|&t| level_data(&spectrum, symbol, t, flags, norm))
        .collect::<Result<Vec<_>>>()?;
    let mut values = Vec::with_capacity(levels.len());
    let mut time = flags.time.then(Vec::new);
    let mut grad = flags.space.then(Vec::new);
    for (v, d, g) in per_level {
        values.push(v);
        if let (Some(acc), Some(d)) = (time.as_mut(), d) {
            acc.push(d);
        }
        if let (Some(acc), Some(g)) = (grad.as_mut(), g) {
            acc.push(g);
        }
    }
    Ok(ExtensionField {
        spec: *f.spec(),
        s: symbol.s(),
        levels: levels.clone(),
        values,
        time_derivative: time,
        gradient: grad,
    })
}

/// Per-height result of [`boundary_limit_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryLevel {
    pub t: f64,
    /// Least-squares ratio of −t^{1−s}∂_tF to (−Δ)^{s/2}f at this height.
    pub c_t: f64,
    /// ‖g_t − c_t (−Δ)^{s/2} f‖₂ / ‖(−Δ)^{s/2} f‖₂.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryLimit {
    /// Extrapolated t → 0 value.
    pub c: f64,
    pub levels: Vec<BoundaryLevel>,
}

/// Geometrically spaced heights spanning [h/4, 2h], suitable for [`boundary_limit_check`].
/// Above 2h the expansion in t loses accuracy for content near the Nyquist band.
pub fn boundary_heights(spec: &GridSpec, count: usize) -> Vec<f64> {
    let h = spec.spacing();
    let (lo, hi) = (h / 4.0, 2.0 * h);
    (0..count)
        .map(|i| lo * (hi / lo).powf(i as f64 / (count.max(2) - 1) as f64))
        .collect()
}

/// Measures c in lim_{t→0} −t^{1−s}∂_tF(·, t) = c (−Δ)^{s/2} f.
///
/// c_t behaves like c + a t^{2−s} + b t² + d t^{4−s} for small t; the
/// expansion is fitted by least squares and its constant term returned.
pub fn boundary_limit_check(f: &GridFunction, symbol: &PoissonSymbol, small_ts: &[f64]) -> Result<BoundaryLimit> {
    let spec = *f.spec();
    let h = spec.spacing();
    let s = symbol.s();
    if small_ts.len() < 4 {
        return Err(Error::range("boundary_limit_check", "at least four heights are needed"));
    }
    for &t in small_ts {
        if !(t >= h / 4.0 * (1.0 - 1e-12) && t <= 8.0 * h * (1.0 + 1e-12)) {
            return Err(Error::range("boundary_limit_check", format!("height {t} outside [h/4, 8h]")));
        }
    }
    let target = frac_laplacian(f, s)?;
    let tnorm2 = target.pairing(&target);
    if !(tnorm2.sqrt() > 1e-12 * f.l2().max(f64::MIN_POSITIVE)) {
        return Err(Error::Degenerate("(−Δ)^{s/2} f vanishes; the boundary constant is undetermined".into()));
    }
    let spectrum = fft_forward(f);
    let flags = DerivativeFlags {
        time: true,
        space: false,
    };
    let levels = small_ts
        .par_iter()
        .map(|&t| {
            let (_, dt, _) = level_data(&spectrum, symbol, t, flags, f.l2())?;
            let g = dt.expect("requested").scale(-t.powf(1.0 - s));
            let c_t = g.pairing(&target) / tnorm2;
            let residual = g.sub(&target.scale(c_t)).l2() / tnorm2.sqrt();
            Ok(BoundaryLevel { t, c_t, residual })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut exponents: Vec<f64> = vec![0.0];
    for e in [2.0 - s, 2.0, 4.0 - s] {
        if exponents.iter().all(|&x| (x - e).abs() > 0.05) {
            exponents.push(e);
        }
    }
    let rows = levels.len();
    let a = DMatrix::from_fn(rows, exponents.len(), |i, j| (levels[i].t / h).powf(exponents[j]));
    let b = DVector::from_iterator(rows, levels.iter().map(|l| l.c_t));
    let coef = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::Degenerate(format!("boundary fit failed: {e}")))?;
    Ok(BoundaryLimit { c: coef[0], levels })
}

/// Residual of div(t^{1−s}∇F) = 0 at one interior height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelResidual {
    pub t: f64,
    /// ‖∂_t(t^{1−s}∂_tF) + t^{1−s}Δ_xF‖₂ / ‖t^{1−s}∇F‖₂ (0 when the gradient vanishes).
    pub residual: f64,
}

/// Spectral Δ_x and a three-point non-uniform difference in t applied to
/// w = t^{1−s}∂_tF, at every interior level.
pub fn s_harmonicity_residual(field: &ExtensionField) -> Result<Vec<LevelResidual>> {
    let m = field.levels.len();
    if m < 3 {
        return Err(Error::range("s_harmonicity_residual", format!("{m} levels given, at least 3 needed")));
    }
    let spec = field.spec;
    let s = field.s;
    let ts = field.levels.heights();
    let w: Vec<GridFunction> = (0..m)
        .map(|i| Ok(field.time_derivative(i)?.scale(ts[i].powf(1.0 - s))))
        .collect::<Result<_>>()?;
    let lap: Vec<Complex64> = (0..spec.len())
        .map(|i| {
            let xi = spec.xi(i);
            Complex64::new(-4.0 * PI * PI * (xi[0] * xi[0] + xi[1] * xi[1]), 0.0)
        })
        .collect();
    (1..m - 1)
        .into_par_iter()
        .map(|i| {
            let (t0, t1, t2) = (ts[i - 1], ts[i], ts[i + 1]);
            let (h1, h2) = (t1 - t0, t2 - t1);
            let c0 = -h2 / (h1 * (h1 + h2));
            let c1 = (h2 - h1) / (h1 * h2);
            let c2 = h1 / (h2 * (h1 + h2));
            let dw = w[i - 1].scale(c0).add(&w[i].scale(c1)).add(&w[i + 1].scale(c2));
            let f = &field.values[i];
            let weight = t1.powf(1.0 - s);
            let lap_f = synthesize_real(&fft_forward(f), &lap, f.l2())?.scale(weight);
            let residual = dw.add(&lap_f).l2();
            let grad: f64 = crate::grid::spectral_gradient(f)
                .iter()
                .map(|g| g.scale(weight).l2().powi(2))
                .sum::<f64>()
                + w[i].l2().powi(2);
            let scale = grad.sqrt();
            Ok(LevelResidual {
                t: t1,
                residual: if scale > 0.0 { residual / scale } else { 0.0 },
            })
        })
        .collect()
}

/// Per-level sup norms of the k-th gradient of an extension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRow {
    pub t: f64,
    /// sup_x |∇^k F(·, t)|.
    pub sup: f64,
    /// t^k · sup, bounded by C‖f‖_∞.
    pub scaled_linf: f64,
    /// t^{n+k} · sup, bounded by C‖f‖₁.
    pub scaled_l1: f64,
}

/// k = 0 uses F; k = 1 uses the full gradient (∇_xF, ∂_tF).
pub fn decay_profile(field: &ExtensionField, k: usize) -> Result<Vec<DecayRow>> {
    let selector = match k {
        0 => FieldSelector::Value,
        1 => FieldSelector::FullGradient,
        _ => return Err(Error::range("decay_profile", format!("k = {k} must be 0 or 1"))),
    };
    let n = field.spec.dim() as i32;
    field
        .levels
        .heights()
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let sup = field
                .squared_magnitude(i, selector)?
                .into_iter()
                .fold(0.0f64, f64::max)
                .sqrt();
            Ok(DecayRow {
                t,
                sup,
                scaled_linf: t.powi(k as i32) * sup,
                scaled_l1: t.powi(n + k as i32) * sup,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_function, TestFunctionDescriptor};
    use crate::multiplier::hilbert_transform;

    fn classical() -> PoissonSymbol {
        s_poisson_symbol(1.0, 1, RadialGrid::with_r_max(12.0)).unwrap()
    }

    fn levels(spec: &GridSpec) -> TLevels {
        TLevels::log_spaced(spec, spec.spacing() / 2.0, spec.period(), 24).unwrap()
    }

    #[test]
    fn levels_enforce_invariants() {
        let spec = GridSpec::new(1, 64, 1.0).unwrap();
        assert!(TLevels::log_spaced(&spec, 1.0 / 1024.0, 1.0, 16).is_err());
        assert!(TLevels::log_spaced(&spec, 0.01, 5.0, 16).is_err());
        assert!(TLevels::log_spaced(&spec, 0.01, 1.0, 8).is_err());
        let l = TLevels::log_spaced(&spec, 0.01, 1.0, 16).unwrap();
        // ∫_{0.01}^{1} dt, trapezoid in ln t
        let ones = vec![1.0; 16];
        assert!((l.integrate(&ones) - 0.99).abs() < 1e-2);
        let r = l.refined();
        assert_eq!(r.len(), 31);
        assert_eq!(r.heights()[2], l.heights()[1]);
        let d = TLevels::default_for(&spec);
        assert!(d.len() >= MIN_LEVELS && d.t_min() >= spec.spacing() / 8.0);
    }

    #[test]
    fn constant_data_extends_to_constant() {
        let spec = GridSpec::new(2, 16, 1.0).unwrap();
        let sym = s_poisson_symbol(0.6, 2, RadialGrid::with_r_max(12.0)).unwrap();
        let f = GridFunction::constant(spec, 2.5);
        let field = extend_field(&f, &sym, &levels(&spec), DerivativeFlags::ALL).unwrap();
        for i in 0..field.levels().len() {
            assert!(field.value(i).sub(&f).max_abs() < 1e-13);
            assert!(field.time_derivative(i).unwrap().max_abs() < 1e-13);
        }
        let res = s_harmonicity_residual(&field).unwrap();
        assert!(res.iter().all(|r| r.residual == 0.0));
    }

    #[test]
    fn classical_single_mode() {
        let l = 2.0;
        let spec = GridSpec::new(1, 64, l).unwrap();
        let f = make_function(&TestFunctionDescriptor::sine([1, 0]), &spec).unwrap();
        let lv = levels(&spec);
        let field = extend_field(&f, &classical(), &lv, DerivativeFlags::ALL).unwrap();
        for (i, &t) in lv.heights().iter().enumerate() {
            let decay = (-2.0 * PI * t / l).exp();
            assert!(field.value(i).rel_linf_error(&f.scale(decay)) < 1e-8);
            let dt = field.time_derivative(i).unwrap();
            assert!(dt.rel_linf_error(&f.scale(-2.0 * PI / l * decay)) < 1e-8);
        }
    }

    #[test]
    fn classical_time_derivative_is_minus_extended_half_laplacian() {
        let spec = GridSpec::new(1, 256, 1.0).unwrap();
        let f = make_function(&TestFunctionDescriptor::gaussian([0.5, 0.0], 0.05), &spec).unwrap();
        let sym = classical();
        let lv = levels(&spec);
        let field = extend_field(&f, &sym, &lv, DerivativeFlags::ALL).unwrap();
        let half = extend_field(&frac_laplacian(&f, 1.0).unwrap(), &sym, &lv, DerivativeFlags::NONE).unwrap();
        let hf = extend_field(&hilbert_transform(&f).unwrap(), &sym, &lv, DerivativeFlags::ALL).unwrap();
        for i in 0..lv.len() {
            let dt = field.time_derivative(i).unwrap();
            assert!(dt.rel_l2_error(&half.value(i).scale(-1.0)) < 1e-8);
            // ∂_t P_t H f = ∂_x P_t f
            let lhs = hf.time_derivative(i).unwrap();
            assert!(lhs.rel_l2_error(&field.gradient(i).unwrap()[0]) < 1e-8);
        }
    }

    #[test]
    fn semigroup_and_maximum_principle() {
        let spec = GridSpec::new(1, 128, 1.0).unwrap();
        let f = make_function(&TestFunctionDescriptor::bump([0.4, 0.0], 0.1), &spec).unwrap();
        let sym = classical();
        let t1 = 0.03;
        let t2 = 0.05;
        let one = |g: &GridFunction, t: f64| {
            let lv = TLevels::from_heights_unchecked(vec![t]);
            extend_field(g, &sym, &lv, DerivativeFlags::NONE).unwrap().value(0).clone()
        };
        let composed = one(&one(&f, t1), t2);
        assert!(composed.rel_l2_error(&one(&f, t1 + t2)) < 1e-8);
        let s_sym = s_poisson_symbol(0.5, 1, RadialGrid::with_r_max(12.0)).unwrap();
        let field = extend_field(&f, &s_sym, &levels(&spec), DerivativeFlags::NONE).unwrap();
        for i in 0..field.levels().len() {
            let v = field.value(i);
            assert!(v.min() >= f.min() - 1e-10 && v.max() <= f.max() + 1e-10);
        }
    }

    #[test]
    fn boundary_constant_classical_is_one() {
        let spec = GridSpec::new(1, 256, 1.0).unwrap();
        let f = make_function(&TestFunctionDescriptor::gaussian([0.5, 0.0], 0.06), &spec).unwrap();
        let out = boundary_limit_check(&f, &classical(), &boundary_heights(&spec, 10)).unwrap();
        assert!((out.c - 1.0).abs() < 1e-3, "c = {}", out.c);
        assert!(boundary_limit_check(&GridFunction::constant(spec, 1.0), &classical(), &boundary_heights(&spec, 10)).is_err());
        assert!(boundary_limit_check(&f, &classical(), &[0.5, 0.6, 0.7, 0.8]).is_err());
    }

    #[test]
    fn boundary_constant_matches_bessel_expansion() {
        // m_s(ρ) = 1 − Γ(1−s/2)/Γ(1+s/2) (ρ/2)^s + … gives c = 2^{1−s} Γ(1−s/2)/Γ(s/2)
        let spec = GridSpec::new(1, 256, 1.0).unwrap();
        let f = make_function(&TestFunctionDescriptor::gaussian([0.5, 0.0], 0.06), &spec).unwrap();
        for s in [0.4, 0.5, 1.5, 1.7] {
            let sym = s_poisson_symbol(s, 1, RadialGrid::default()).unwrap();
            let c = boundary_limit_check(&f, &sym, &boundary_heights(&spec, 10)).unwrap().c;
            let exact = 2f64.powf(1.0 - s) * crate::special::gamma(1.0 - s / 2.0) / crate::special::gamma(s / 2.0);
            assert!((c / exact - 1.0).abs() < 1e-3, "s = {s}: {c} vs {exact}");
        }
    }

    #[test]
    fn residual_is_second_order_in_t() {
        let spec = GridSpec::new(1, 128, 1.0).unwrap();
        let f = make_function(&TestFunctionDescriptor::gaussian([0.5, 0.0], 0.08), &spec).unwrap();
        let sym = s_poisson_symbol(0.6, 1, RadialGrid::with_r_max(25.0)).unwrap();
        let coarse = TLevels::log_spaced(&spec, spec.spacing(), 0.5, 17).unwrap();
        let fine = coarse.refined();
        let rc = s_harmonicity_residual(&extend_field(&f, &sym, &coarse, DerivativeFlags::ALL).unwrap()).unwrap();
        let rf = s_harmonicity_residual(&extend_field(&f, &sym, &fine, DerivativeFlags::ALL).unwrap()).unwrap();
        // coarse level k is fine level 2k; residuals start at level 1
        let ratio = rc[5].residual / rf[11].residual;
        assert!((rc[5].t - rf[11].t).abs() < 1e-15);
        assert!((ratio - 4.0).abs() < 0.8, "ratio {ratio}");
    }

    #[test]
    fn decay_of_classical_single_mode_gradient() {
        let l = 1.0;
        let spec = GridSpec::new(1, 64, l).unwrap();
        let f = make_function(&TestFunctionDescriptor::sine([1, 0]), &spec).unwrap();
        let lv = TLevels::log_spaced(&spec, spec.spacing(), 2.0, 64).unwrap();
        let field = extend_field(&f, &classical(), &lv, DerivativeFlags::ALL).unwrap();
        let rows = decay_profile(&field, 1).unwrap();
        // |∇F| = (2π/L) e^{−2πt/L} on a single mode, so t|∇F| peaks at e^{−1}
        let peak = rows.iter().map(|r| r.scaled_linf).fold(0.0, f64::max);
        assert!(peak <= (-1.0f64).exp() + 1e-9 && peak > 0.99 * (-1.0f64).exp());
        let flat = decay_profile(&extend_field(&GridFunction::constant(spec, 1.0), &classical(), &lv, DerivativeFlags::NONE).unwrap(), 0).unwrap();
        assert!(flat.iter().all(|r| (r.sup - 1.0).abs() < 1e-12));
    }
}
