//! Commutators of Riesz transforms, fractional Laplacians and Riesz potentials
//! with pointwise multiplication, the fractional Leibniz defect, the 1-D
//! double commutator, Jacobian pairings and the Hardy-duality pairing.

mod harness;

pub use harness::{
    standard_family, verify_estimate, EstimateDescriptor, EstimateId, EstimateParams, HarnessConfig, ParamOverrides,
    RatioReport, Sample, SampleRecord, ZeroRhsRecord,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extension::{extend_field, DerivativeFlags, ExtensionField, PoissonSymbol, TLevels};
use crate::grid::{spectral_gradient, GridFunction};
use crate::multiplier::{frac_laplacian, hilbert_transform, project_mean_zero, riesz_potential, riesz_transform};
use crate::norms::{bmo_seminorm, lorentz_norm, LorentzExponents, TentFamily};

fn check_same(a: &GridFunction, b: &GridFunction) -> Result<()> {
    a.same_grid(b)
}

/// [R_j, φ]f = R_j(φf) − φ R_j f, axis 0-based.
pub fn crw_commutator(phi: &GridFunction, f: &GridFunction, axis: usize) -> Result<GridFunction> {
    check_same(phi, f)?;
    Ok(riesz_transform(&phi.mul(f), axis)?.sub(&phi.mul(&riesz_transform(f, axis)?)))
}

/// [(−Δ)^{s/2}, φ]f for s ∈ (0, 1).
pub fn fl_commutator(phi: &GridFunction, f: &GridFunction, s: f64) -> Result<GridFunction> {
    check_same(phi, f)?;
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::range("fl_commutator", format!("s = {s} must lie in (0, 1)")));
    }
    Ok(frac_laplacian(&phi.mul(f), s)?.sub(&phi.mul(&frac_laplacian(f, s)?)))
}

/// [I^s, φ]u together with the means removed before each potential.
#[derive(Debug, Clone)]
pub struct PotentialCommutator {
    pub value: GridFunction,
    /// Mean of φu removed before I^s(φu).
    pub product_mean: f64,
    /// Mean of u removed before I^s u.
    pub input_mean: f64,
}

/// [I^s, φ]u = I^s(φu) − φ I^s u with both arguments of I^s projected to mean zero.
pub fn riesz_potential_commutator(phi: &GridFunction, u: &GridFunction, s: f64) -> Result<PotentialCommutator> {
    check_same(phi, u)?;
    let n = phi.spec().dim() as f64;
    if !(s > 0.0 && s < 1.0f64.min(n)) {
        return Err(Error::range("riesz_potential_commutator", format!("s = {s} must lie in (0, 1)")));
    }
    let (pu, product_mean) = project_mean_zero(&phi.mul(u));
    let (u0, input_mean) = project_mean_zero(u);
    let value = riesz_potential(&pu, s)?.sub(&phi.mul(&riesz_potential(&u0, s)?));
    Ok(PotentialCommutator {
        value,
        product_mean,
        input_mean,
    })
}

/// H_s(f, g) = (−Δ)^{s/2}(fg) − (−Δ)^{s/2}f · g − f · (−Δ)^{s/2}g for s ∈ (0, 1].
pub fn leibniz_defect(f: &GridFunction, g: &GridFunction, s: f64) -> Result<GridFunction> {
    check_same(f, g)?;
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::range("leibniz_defect", format!("s = {s} must lie in (0, 1]")));
    }
    let fg = frac_laplacian(&f.mul(g), s)?;
    Ok(fg.sub(&frac_laplacian(f, s)?.mul(g)).sub(&f.mul(&frac_laplacian(g, s)?)))
}

fn hilbert_commutator(phi: &GridFunction, f: &GridFunction) -> Result<GridFunction> {
    Ok(hilbert_transform(&phi.mul(f))?.sub(&phi.mul(&hilbert_transform(f)?)))
}

/// (D₁, D₂) with D₁ = [H, φ](−Δ)^{1/2}f − [H, f](−Δ)^{1/2}φ and
/// D₂ = H([H, φ](−Δ)^{1/2}f + [H, f](−Δ)^{1/2}φ).
pub fn double_commutator_1d(phi: &GridFunction, f: &GridFunction) -> Result<(GridFunction, GridFunction)> {
    check_same(phi, f)?;
    if phi.spec().dim() != 1 {
        return Err(Error::Unsupported("the double commutator is one-dimensional".into()));
    }
    let a = hilbert_commutator(phi, &frac_laplacian(f, 1.0)?)?;
    let b = hilbert_commutator(f, &frac_laplacian(phi, 1.0)?)?;
    let d1 = a.sub(&b);
    let d2 = hilbert_transform(&a.add(&b))?;
    Ok((d1, d2))
}

/// How ∫ φ det ∇u is evaluated.
#[derive(Debug, Clone, Copy)]
pub enum JacobianMethod<'a> {
    /// Riemann sum of φ det ∇u with spectral derivatives.
    Boundary,
    /// −∫∫ det(∇Φ, ∇U¹, ∇U²) over the truncated half-space, with harmonic
    /// extensions built from a classical (s = 1, n = 2) symbol.
    Extension {
        symbol: &'a PoissonSymbol,
        levels: &'a TLevels,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JacobianValue {
    pub value: f64,
    /// Bound on the part of the t-integral outside the levels (0 for the boundary method).
    pub truncation_remainder: f64,
}

fn det3(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])
}

fn full_gradient(field: &ExtensionField, level: usize, x: usize) -> Result<[f64; 3]> {
    let g = field.gradient(level)?;
    Ok([g[0].values()[x], g[1].values()[x], field.time_derivative(level)?.values()[x]])
}

/// ∫ φ det ∇u for u = (u¹, u²) on a two-dimensional grid.
pub fn jacobian_pairing(phi: &GridFunction, u: [&GridFunction; 2], method: JacobianMethod<'_>) -> Result<JacobianValue> {
    check_same(phi, u[0])?;
    check_same(phi, u[1])?;
    let spec = *phi.spec();
    if spec.dim() != 2 {
        return Err(Error::Unsupported("the Jacobian pairing is implemented for n = 2".into()));
    }
    match method {
        JacobianMethod::Boundary => {
            let g1 = spectral_gradient(u[0]);
            let g2 = spectral_gradient(u[1]);
            let det = g1[0].mul(&g2[1]).sub(&g1[1].mul(&g2[0]));
            Ok(JacobianValue {
                value: phi.pairing(&det),
                truncation_remainder: 0.0,
            })
        }
        JacobianMethod::Extension { symbol, levels } => {
            if symbol.s() != 1.0 || symbol.dim() != 2 {
                return Err(Error::range("jacobian_pairing", "the extension method needs the classical symbol with n = 2"));
            }
            let fields = [phi, u[0], u[1]]
                .iter()
                .map(|g| extend_field(g, symbol, levels, DerivativeFlags::ALL))
                .collect::<Result<Vec<_>>>()?;
            let w = spec.cell_volume();
            let slice: Vec<f64> = (0..levels.len())
                .map(|i| {
                    let mut acc = 0.0;
                    for x in 0..spec.len() {
                        acc += det3(
                            full_gradient(&fields[0], i, x)?,
                            full_gradient(&fields[1], i, x)?,
                            full_gradient(&fields[2], i, x)?,
                        );
                    }
                    Ok(acc * w)
                })
                .collect::<Result<_>>()?;
            let peak = slice.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let last = slice.last().copied().unwrap_or(0.0).abs();
            if last > 1e-6 * peak {
                return Err(Error::range(
                    "jacobian_pairing",
                    format!("t_max = {} too small: the integrand is still {:.1e} of its peak", levels.t_max(), last / peak.max(f64::MIN_POSITIVE)),
                ));
            }
            let t1 = levels.t_min();
            // the strip (0, t₁) by its left-rectangle value, the rest by the level weights
            let value = -(levels.integrate(&slice) + t1 * slice[0]);
            let truncation_remainder = t1 * slice[0].abs() + levels.t_max() * last;
            Ok(JacobianValue {
                value,
                truncation_remainder,
            })
        }
    }
}

/// Both sides of |∫ (−Δ)^{s/2}H_s(φ, f) g| ≤ C ‖(−Δ)^{s/2}φ‖_{(p,q)} ‖(−Δ)^{s/2}f‖_{(p',q')} [g]_BMO.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HardyDuality {
    pub lhs: f64,
    pub rhs: f64,
    /// lhs / rhs, or 0 when the right side vanishes.
    pub ratio: f64,
}

pub fn hardy_duality_check(
    phi: &GridFunction,
    f: &GridFunction,
    g: &GridFunction,
    s: f64,
    exponents: LorentzExponents,
    tents: &TentFamily,
) -> Result<HardyDuality> {
    check_same(phi, g)?;
    let conj = |x: f64| if x == f64::INFINITY { 1.0 } else { x / (x - 1.0) };
    if exponents.p() == f64::INFINITY {
        return Err(Error::range("hardy_duality_check", "p must be finite"));
    }
    let dual = LorentzExponents::new(conj(exponents.p()), conj(exponents.q()))?;
    let defect = leibniz_defect(phi, f, s)?;
    let lhs = frac_laplacian(&defect, s)?.pairing(g).abs();
    let rhs = lorentz_norm(&frac_laplacian(phi, s)?, exponents)
        * lorentz_norm(&frac_laplacian(f, s)?, dual)
        * bmo_seminorm(g, tents);
    let ratio = if rhs > 0.0 { lhs / rhs } else { 0.0 };
    Ok(HardyDuality { lhs, rhs, ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::{s_poisson_symbol, RadialGrid};
    use crate::grid::{make_function, GridSpec, TestFunctionDescriptor};

    fn one_d() -> (GridSpec, GridFunction, GridFunction, GridFunction) {
        let spec = GridSpec::new(1, 256, 1.0).unwrap();
        let phi = make_function(&TestFunctionDescriptor::bump([0.45, 0.0], 0.15), &spec).unwrap();
        let f = make_function(&TestFunctionDescriptor::gaussian([0.55, 0.0], 0.05), &spec).unwrap();
        let g = make_function(&TestFunctionDescriptor::random_bandlimited(3, 3, [0.5, 0.0], 0.08), &spec).unwrap();
        (spec, phi, f, g)
    }

    #[test]
    fn constant_multipliers_give_zero() {
        let (spec, _, f, g) = one_d();
        let c = GridFunction::constant(spec, 1.7);
        assert!(crw_commutator(&c, &f, 0).unwrap().max_abs() < 1e-12);
        assert!(fl_commutator(&c, &f, 0.4).unwrap().max_abs() < 1e-12);
        let u = f.sub(&g);
        assert!(riesz_potential_commutator(&c, &u, 0.3).unwrap().value.max_abs() < 1e-12);
        assert!(leibniz_defect(&f, &c, 0.7).unwrap().max_abs() < 1e-12);
        let (d1, d2) = double_commutator_1d(&c, &f).unwrap();
        assert!(d1.max_abs() < 1e-12 && d2.max_abs() < 1e-12);
    }

    #[test]
    fn structural_identities() {
        let (spec, phi, f, g) = one_d();
        let w = spec.cell_volume();
        // R is antisymmetric, so [R, φ] is symmetric
        let a = crw_commutator(&phi, &f, 0).unwrap().pairing(&g);
        let b = f.pairing(&crw_commutator(&phi, &g, 0).unwrap());
        assert!((a - b).abs() <= 1e-10 * a.abs().max(w), "{a} vs {b}");
        // [fL, φ]1 = fL φ
        let one = GridFunction::constant(spec, 1.0);
        let lhs = fl_commutator(&phi, &one, 0.6).unwrap();
        assert!(lhs.rel_l2_error(&frac_laplacian(&phi, 0.6).unwrap()) < 1e-12);
        // [fL, φ]f + φ fL f = fL(φf)
        let sum = fl_commutator(&phi, &f, 0.6).unwrap().add(&phi.mul(&frac_laplacian(&f, 0.6).unwrap()));
        assert!(sum.rel_l2_error(&frac_laplacian(&phi.mul(&f), 0.6).unwrap()) < 1e-12);
        // H_s symmetric
        let h1 = leibniz_defect(&phi, &f, 0.8).unwrap();
        assert!(h1.rel_l2_error(&leibniz_defect(&f, &phi, 0.8).unwrap()) < 1e-14);
        // D₁ antisymmetric, D₂ symmetric, D₁(f, f) = 0
        let (d1, d2) = double_commutator_1d(&phi, &f).unwrap();
        let (e1, e2) = double_commutator_1d(&f, &phi).unwrap();
        assert!(d1.add(&e1).max_abs() <= 1e-12 * d1.max_abs());
        assert!(d2.rel_l2_error(&e2) < 1e-12);
        assert!(double_commutator_1d(&f, &f).unwrap().0.max_abs() < 1e-14);
    }

    #[test]
    fn potential_commutator_duality() {
        let (_, phi, f, g) = one_d();
        let (u, _) = project_mean_zero(&f);
        let (v, _) = project_mean_zero(&g);
        let s = 0.4;
        // I^s is self-adjoint, so Σ [I^s, φ]u · v = −Σ u · [I^s, φ]v on mean-zero pairs
        // once the projected means are accounted for
        let a = riesz_potential_commutator(&phi, &u, s).unwrap();
        let b = riesz_potential_commutator(&phi, &v, s).unwrap();
        let lhs = a.value.pairing(&v);
        let rhs = u.pairing(&b.value);
        assert!((lhs + rhs).abs() <= 1e-10 * lhs.abs().max(rhs.abs()));
        assert!(a.input_mean.abs() < 1e-15);
    }

    #[test]
    fn bilinearity() {
        let (_, phi, f, _) = one_d();
        let (a, b) = (1.7, -0.6);
        let base = crw_commutator(&phi, &f, 0).unwrap().scale(a * b);
        assert!(crw_commutator(&phi.scale(a), &f.scale(b), 0).unwrap().rel_l2_error(&base) < 1e-12);
        let base = leibniz_defect(&phi, &f, 0.5).unwrap().scale(a * b);
        assert!(leibniz_defect(&phi.scale(a), &f.scale(b), 0.5).unwrap().rel_l2_error(&base) < 1e-12);
        let base = fl_commutator(&phi, &f, 0.5).unwrap().scale(a * b);
        assert!(fl_commutator(&phi.scale(a), &f.scale(b), 0.5).unwrap().rel_l2_error(&base) < 1e-12);
    }

    #[test]
    fn parameter_ranges() {
        let (_, phi, f, _) = one_d();
        assert!(fl_commutator(&phi, &f, 1.0).is_err());
        assert!(leibniz_defect(&phi, &f, 1.2).is_err());
        assert!(riesz_potential_commutator(&phi, &f, 0.0).is_err());
        let spec2 = GridSpec::new(2, 16, 1.0).unwrap();
        let z = GridFunction::zeros(spec2);
        assert!(double_commutator_1d(&z, &z).is_err());
    }

    #[test]
    fn jacobian_methods_agree() {
        let spec = GridSpec::new(2, 64, 1.0).unwrap();
        let phi = make_function(&TestFunctionDescriptor::bump([0.45, 0.5], 0.3), &spec).unwrap();
        let u1 = make_function(&TestFunctionDescriptor::gaussian([0.5, 0.45], 0.1), &spec).unwrap();
        let u2 = make_function(&TestFunctionDescriptor::gaussian_derivative([0.55, 0.5], 0.1, 0), &spec).unwrap();
        let b = jacobian_pairing(&phi, [&u1, &u2], JacobianMethod::Boundary).unwrap();
        let sym = s_poisson_symbol(1.0, 2, RadialGrid::with_r_max(20.0)).unwrap();
        let lv = TLevels::log_spaced(&spec, spec.spacing() / 8.0, 4.0, 120).unwrap();
        let e = jacobian_pairing(&phi, [&u1, &u2], JacobianMethod::Extension { symbol: &sym, levels: &lv }).unwrap();
        assert!(b.value.abs() > 1e-6);
        assert!((e.value / b.value - 1.0).abs() < 0.05, "{} vs {}", e.value, b.value);
        let c = GridFunction::constant(spec, 2.0);
        assert!(jacobian_pairing(&c, [&u1, &u2], JacobianMethod::Boundary).unwrap().value.abs() < 1e-12);
        assert!(jacobian_pairing(&phi, [&u1, &u1], JacobianMethod::Boundary).unwrap().value.abs() < 1e-12);
    }

    #[test]
    fn hardy_duality_degenerate_cases() {
        let (spec, phi, f, g) = one_d();
        let tents = TentFamily::dyadic(&spec);
        let e = LorentzExponents::diagonal(2.0).unwrap();
        let c = GridFunction::constant(spec, 0.8);
        let zero_g = hardy_duality_check(&phi, &f, &c, 0.5, e, &tents).unwrap();
        assert!(zero_g.lhs < 1e-12 && zero_g.rhs < 1e-12, "{zero_g:?}");
        let zero_phi = hardy_duality_check(&c, &f, &g, 0.5, e, &tents).unwrap();
        assert!(zero_phi.lhs < 1e-12 && zero_phi.rhs < 1e-12, "{zero_phi:?}");
        let live = hardy_duality_check(&phi, &f, &g, 0.5, e, &tents).unwrap();
        assert!(live.ratio > 0.0 && live.ratio.is_finite());
    }
}
