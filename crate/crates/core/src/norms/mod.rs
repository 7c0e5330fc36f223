//! Scalar functionals: Lebesgue and Lorentz norms, Slobodeckij, Hölder and
//! BMO seminorms, the maximal function, square functions, Carleson tent
//! suprema and the Besov/Triebel–Lizorkin functionals built on extensions.

mod balls;
mod cones;
mod spaces;

pub use balls::{bmo_seminorm, maximal_function, maximal_function_with, RadiusSet, TentFamily};
pub use cones::{
    carleson_sup, cone_sup, square_function, tent_pairing_bound_check, SquareMode, TentPairing,
};
pub use spaces::{space_functional, SpaceDerivative, SpaceKind, SpaceParams};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{spectral_gradient, GridFunction, GridSpec};

/// (Σ |f|^p hⁿ)^{1/p}; p = ∞ gives max |f|.
pub fn lp_norm(f: &GridFunction, p: f64) -> Result<f64> {
    if p == f64::INFINITY {
        return Ok(f.max_abs());
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::range("lp_norm", format!("p = {p} must lie in [1, ∞]")));
    }
    let sum: f64 = f.values().iter().map(|v| v.abs().powf(p)).sum();
    Ok((sum * f.spec().cell_volume()).powf(1.0 / p))
}

/// Lorentz exponents (p, q) with p ∈ (1, ∞], q ∈ [1, ∞] and q = ∞ whenever p = ∞.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLorentz")]
pub struct LorentzExponents {
    p: f64,
    q: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLorentz {
    p: f64,
    q: f64,
}

impl TryFrom<RawLorentz> for LorentzExponents {
    type Error = Error;

    fn try_from(raw: RawLorentz) -> Result<Self> {
        Self::new(raw.p, raw.q)
    }
}

impl LorentzExponents {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p > 1.0) {
            return Err(Error::range("lorentz", format!("p = {p} must lie in (1, ∞]")));
        }
        if !(q >= 1.0) {
            return Err(Error::range("lorentz", format!("q = {q} must lie in [1, ∞]")));
        }
        if p == f64::INFINITY && q != f64::INFINITY {
            return Err(Error::range("lorentz", "p = ∞ requires q = ∞"));
        }
        Ok(Self { p, q })
    }

    /// L^{(p,p)} = Lᵖ.
    pub fn diagonal(p: f64) -> Result<Self> {
        Self::new(p, p)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }
}

/// ‖f‖_{(p,q)} = (∫ (t^{1/p} f*(t))^q dt/t)^{1/q}, with the decreasing
/// rearrangement f* a step function of step width hⁿ, integrated exactly.
pub fn lorentz_norm(f: &GridFunction, e: LorentzExponents) -> f64 {
    let c = f.spec().cell_volume();
    let mut v: Vec<f64> = f.values().iter().map(|x| x.abs()).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    let (p, q) = (e.p, e.q);
    if p == f64::INFINITY {
        return v.first().copied().unwrap_or(0.0);
    }
    if q == f64::INFINITY {
        return v
            .iter()
            .enumerate()
            .map(|(i, &x)| x * ((i + 1) as f64 * c).powf(1.0 / p))
            .fold(0.0, f64::max);
    }
    let a = q / p;
    // ∫_{(i−1)c}^{ic} t^{a−1} dt = (c^a / a)(i^a − (i−1)^a)
    let mut sum = 0.0;
    for (idx, &x) in v.iter().enumerate() {
        if x == 0.0 {
            break;
        }
        let i = (idx + 1) as f64;
        let step = if idx == 0 { 1.0 } else { -i.powf(a) * (a * (-1.0 / i).ln_1p()).exp_m1() };
        sum += x.powf(q) * step;
    }
    (sum * c.powf(a) / a).powf(1.0 / q)
}

/// Torus distance between two displacement indices, in physical units.
pub(crate) fn displacement_length(spec: &GridSpec, d: usize) -> f64 {
    let n = spec.points() as i64;
    let h = spec.spacing();
    let [a, b] = spec.multi_index(d);
    let wrap = |k: usize| {
        let k = k as i64;
        (k.min(n - k)) as f64 * h
    };
    match spec.dim() {
        1 => wrap(a),
        _ => wrap(a).hypot(wrap(b)),
    }
}

/// Applies `visit(d, f(x + d) − f(x))` style sums over all non-zero displacements.
fn displacement_fold<T: Send>(
    f: &GridFunction,
    per_displacement: impl Fn(f64, &mut dyn Iterator<Item = f64>) -> T + Sync,
) -> Vec<T> {
    let spec = *f.spec();
    let n = spec.points();
    let v = f.values();
    (1..spec.len())
        .into_par_iter()
        .map(|d| {
            let dist = displacement_length(&spec, d);
            let [di, dj] = spec.multi_index(d);
            let mut diffs = (0..spec.len()).map(|x| {
                let [xi, xj] = spec.multi_index(x);
                let y = spec.flat_index([(xi + di) % n, (xj + dj) % n]);
                v[y] - v[x]
            });
            per_displacement(dist, &mut diffs)
        })
        .collect()
}

/// Gagliardo seminorm (∬ |f(x) − f(y)|^p / |x − y|^{n+νp} dx dy)^{1/p}
/// with the torus distance and the diagonal cells left out.
pub fn slobodeckij_seminorm(f: &GridFunction, nu: f64, p: f64) -> Result<f64> {
    let spec = *f.spec();
    if !(nu > 0.0 && nu < 1.0) {
        return Err(Error::range("slobodeckij_seminorm", format!("ν = {nu} must lie in (0, 1)")));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::range("slobodeckij_seminorm", format!("p = {p} must lie in [1, ∞)")));
    }
    let limit = if spec.dim() == 1 { 4096 } else { 96 };
    if spec.points() > limit {
        return Err(Error::range(
            "slobodeckij_seminorm",
            format!("N = {} exceeds {limit} for n = {}", spec.points(), spec.dim()),
        ));
    }
    let expo = spec.dim() as f64 + nu * p;
    let parts = displacement_fold(f, |dist, diffs| {
        let s: f64 = diffs.map(|d| d.abs().powf(p)).sum();
        s * dist.powf(-expo)
    });
    let w = spec.cell_volume();
    Ok((parts.iter().sum::<f64>() * w * w).powf(1.0 / p))
}

/// sup |f(x) − f(y)| / |x − y|^ν for ν < 1, and ‖∇f‖_∞ (spectral) for ν = 1.
pub fn holder_seminorm(f: &GridFunction, nu: f64) -> Result<f64> {
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(Error::range("holder_seminorm", format!("ν = {nu} must lie in (0, 1]")));
    }
    if nu == 1.0 {
        let grad = spectral_gradient(f);
        let sup = (0..f.spec().len())
            .map(|i| grad.iter().map(|g| g.values()[i].powi(2)).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        return Ok(sup);
    }
    let parts = displacement_fold(f, |dist, diffs| diffs.map(f64::abs).fold(0.0, f64::max) / dist.powf(nu));
    Ok(parts.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_function, TestFunctionDescriptor};
    use std::f64::consts::PI;

    fn grid1(n: usize, l: f64) -> GridSpec {
        GridSpec::new(1, n, l).unwrap()
    }

    #[test]
    fn lp_of_constant_and_sine() {
        let spec = GridSpec::new(2, 16, 3.0).unwrap();
        let c = GridFunction::constant(spec, -2.0);
        assert!((lp_norm(&c, 2.0).unwrap() - 2.0 * 3.0).abs() < 1e-12);
        assert!((lp_norm(&c, 1.5).unwrap() - 2.0 * 9f64.powf(1.0 / 1.5)).abs() < 1e-12);
        let spec = grid1(64, 1.0);
        let s = GridFunction::from_fn(spec, |x| (2.0 * PI * x[0]).sin());
        let sup = lp_norm(&s, f64::INFINITY).unwrap();
        assert!(sup <= 1.0 && sup >= (PI / 64.0).cos());
        assert!(lp_norm(&s, 0.5).is_err());
        assert_eq!(lp_norm(&GridFunction::zeros(spec), 3.0).unwrap(), 0.0);
    }

    #[test]
    fn lorentz_indicator_formula() {
        let spec = grid1(128, 2.0);
        let ind = GridFunction::from_fn(spec, |x| if x[0] < 0.75 { 1.0 } else { 0.0 });
        let m = 48.0 * spec.spacing();
        for &(p, q) in &[(2.0, 1.0), (3.0, 7.0), (1.5, 1.5), (4.0, 2.0)] {
            let e = LorentzExponents::new(p, q).unwrap();
            let exact = (p / q).powf(1.0 / q) * m.powf(1.0 / p);
            assert!((lorentz_norm(&ind, e) - exact).abs() / exact < 1e-12, "p={p} q={q}");
        }
        let weak = LorentzExponents::new(2.0, f64::INFINITY).unwrap();
        assert!((lorentz_norm(&ind, weak) - m.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn lorentz_diagonal_is_lebesgue() {
        let spec = GridSpec::new(2, 32, 1.0).unwrap();
        let f = make_function(&TestFunctionDescriptor::random_bandlimited(4, 3, [0.5, 0.5], 0.1), &spec).unwrap();
        for &p in &[1.5, 2.0, 3.7] {
            let l = lorentz_norm(&f, LorentzExponents::diagonal(p).unwrap());
            assert!((l - lp_norm(&f, p).unwrap()).abs() / l < 1e-12);
        }
        let inf = LorentzExponents::new(f64::INFINITY, f64::INFINITY).unwrap();
        assert_eq!(lorentz_norm(&f, inf), f.max_abs());
    }

    #[test]
    fn lorentz_exponent_constraints() {
        assert!(LorentzExponents::new(f64::INFINITY, 2.0).is_err());
        assert!(LorentzExponents::new(1.0, 2.0).is_err());
        assert!(LorentzExponents::new(2.0, 0.5).is_err());
        let parsed: std::result::Result<LorentzExponents, _> = serde_json::from_str(r#"{"p": 2.0, "q": 0.1}"#);
        assert!(parsed.is_err());
    }

    #[test]
    fn seminorms_vanish_on_constants_and_scale() {
        let spec = grid1(128, 1.0);
        let c = GridFunction::constant(spec, 4.0);
        assert_eq!(slobodeckij_seminorm(&c, 0.4, 2.0).unwrap(), 0.0);
        assert_eq!(holder_seminorm(&c, 0.5).unwrap(), 0.0);
        assert_eq!(holder_seminorm(&c, 1.0).unwrap(), 0.0);
        let f = make_function(&TestFunctionDescriptor::bump([0.5, 0.0], 0.2), &spec).unwrap();
        let a = -2.5;
        let fa = f.scale(a);
        for (x, y) in [
            (slobodeckij_seminorm(&fa, 0.4, 2.0).unwrap(), slobodeckij_seminorm(&f, 0.4, 2.0).unwrap()),
            (holder_seminorm(&fa, 0.6).unwrap(), holder_seminorm(&f, 0.6).unwrap()),
        ] {
            assert!((x - a.abs() * y).abs() / x < 1e-12);
        }
    }

    #[test]
    fn holder_lipschitz_of_sine() {
        let l = 2.0;
        let spec = grid1(256, l);
        let s = GridFunction::from_fn(spec, |x| (2.0 * PI * x[0] / l).sin());
        let v = holder_seminorm(&s, 1.0).unwrap();
        assert!((v - 2.0 * PI / l).abs() / v < 1e-3);
    }

    #[test]
    fn slobodeckij_dilation_homogeneity() {
        let spec = grid1(2048, 1.0);
        let d = TestFunctionDescriptor::bump([0.5, 0.0], 0.03);
        let f = make_function(&d, &spec).unwrap();
        let g = make_function(&d.clone().dilated(2.0), &spec).unwrap();
        let (nu, p) = (0.6, 2.0);
        // [f(·/λ)] = λ^{n/p − ν} [f]
        let ratio = slobodeckij_seminorm(&g, nu, p).unwrap() / slobodeckij_seminorm(&f, nu, p).unwrap();
        let expected = 2f64.powf(1.0 / p - nu);
        assert!((ratio / expected - 1.0).abs() < 0.03, "{ratio} vs {expected}");
        assert!(slobodeckij_seminorm(&GridFunction::zeros(GridSpec::new(2, 128, 1.0).unwrap()), 0.5, 2.0).is_err());
    }
}
