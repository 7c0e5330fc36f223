use fracharm::commutators::{crw_commutator, double_commutator_1d, fl_commutator, leibniz_defect, riesz_potential_commutator};
use fracharm::grid::{make_function, GridFunction, GridSpec, TestFunctionDescriptor};
use fracharm::multiplier::{frac_laplacian, hilbert_transform, project_mean_zero, riesz_potential, riesz_transform};
use fracharm::norms::{lorentz_norm, LorentzExponents};
use fracharm::Result;
use proptest::prelude::*;

fn spec1() -> GridSpec {
    GridSpec::new(1, 128, 1.0).unwrap()
}

fn spec2() -> GridSpec {
    GridSpec::new(2, 32, 1.0).unwrap()
}

fn random(spec: &GridSpec, seed: u64, cx: f64) -> GridFunction {
    let d = TestFunctionDescriptor::random_bandlimited(seed, 3, [cx, 0.5], 0.08);
    make_function(&d, spec).unwrap()
}

fn rel(a: &GridFunction, b: &GridFunction) -> f64 {
    a.sub(b).l2() / b.l2().max(f64::MIN_POSITIVE)
}

type Op = fn(&GridFunction, &GridFunction) -> Result<GridFunction>;

fn ops() -> Vec<(&'static str, Op)> {
    vec![
        ("crw", |p, f| crw_commutator(p, f, 0)),
        ("fl", |p, f| fl_commutator(p, f, 0.6)),
        ("potential", |p, f| riesz_potential_commutator(p, f, 0.4).map(|c| c.value)),
        ("leibniz", |p, f| leibniz_defect(p, f, 0.7)),
        ("double D1", |p, f| double_commutator_1d(p, f).map(|d| d.0)),
        ("double D2", |p, f| double_commutator_1d(p, f).map(|d| d.1)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn commutators_are_bilinear(seed in any::<u64>(), a in 0.2f64..4.0, b in -4.0f64..-0.2, cx in 0.3f64..0.7) {
        let spec = spec1();
        let phi = random(&spec, seed, cx);
        let f = random(&spec, seed.wrapping_add(1), 1.0 - cx);
        for (name, op) in ops() {
            let base = op(&phi, &f).unwrap();
            let scaled = op(&phi.scale(a), &f.scale(b)).unwrap();
            let e = rel(&scaled, &base.scale(a * b));
            prop_assert!(e <= 1e-12, "{}: {:e}", name, e);
        }
    }

    #[test]
    fn commutators_are_additive_in_the_multiplier(seed in any::<u64>()) {
        let spec = spec1();
        let (p1, p2) = (random(&spec, seed, 0.45), random(&spec, seed ^ 0x55, 0.55));
        let f = random(&spec, seed.wrapping_mul(3), 0.5);
        for (name, op) in ops() {
            let sum = op(&p1.add(&p2), &f).unwrap();
            let parts = op(&p1, &f).unwrap().add(&op(&p2, &f).unwrap());
            prop_assert!(rel(&sum, &parts) <= 1e-12, "{}", name);
        }
    }

    #[test]
    fn multipliers_are_linear(seed in any::<u64>(), a in -3.0f64..3.0, s in 0.1f64..1.9) {
        let spec = spec2();
        let f = random(&spec, seed, 0.4);
        let g = random(&spec, seed.wrapping_add(7), 0.6);
        let combo = f.scale(a).add(&g);
        let lhs = frac_laplacian(&combo, s).unwrap();
        let rhs = frac_laplacian(&f, s).unwrap().scale(a).add(&frac_laplacian(&g, s).unwrap());
        prop_assert!(rel(&lhs, &rhs) <= 1e-12);
        for j in 0..2 {
            let lhs = riesz_transform(&combo, j).unwrap();
            let rhs = riesz_transform(&f, j).unwrap().scale(a).add(&riesz_transform(&g, j).unwrap());
            prop_assert!(rel(&lhs, &rhs) <= 1e-12);
        }
    }

    #[test]
    fn integration_by_parts(seed in any::<u64>(), s in 0.1f64..1.9) {
        let spec = spec2();
        let f = random(&spec, seed, 0.4);
        let g = random(&spec, seed.wrapping_add(11), 0.6);
        let scale = f.l2() * g.l2();
        for j in 0..2 {
            let a = riesz_transform(&f, j).unwrap().pairing(&g);
            let b = f.pairing(&riesz_transform(&g, j).unwrap());
            prop_assert!((a + b).abs() <= 1e-12 * scale);
        }
        let a = frac_laplacian(&f, s).unwrap().pairing(&g);
        let b = f.pairing(&frac_laplacian(&g, s).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * scale * (1.0 + a.abs() / scale));
        let (f0, _) = project_mean_zero(&f);
        let (g0, _) = project_mean_zero(&g);
        let a = riesz_potential(&f0, s.min(1.5)).unwrap().pairing(&g0);
        let b = f0.pairing(&riesz_potential(&g0, s.min(1.5)).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * (a.abs() + scale));
    }

    #[test]
    fn lorentz_norm_ignores_rearrangement(seed in any::<u64>(), shift in 0i64..128, p in 1.2f64..6.0, q in 1.0f64..8.0) {
        let spec = spec1();
        let f = random(&spec, seed, 0.5);
        let e = LorentzExponents::new(p, q).unwrap();
        let base = lorentz_norm(&f, e);
        let shifted = lorentz_norm(&f.shifted([shift, 0]), e);
        let mut reversed_values = f.values().to_vec();
        reversed_values.reverse();
        let reversed = lorentz_norm(&GridFunction::new(spec, reversed_values).unwrap(), e);
        let negated = lorentz_norm(&f.scale(-1.0), e);
        for v in [shifted, reversed, negated] {
            prop_assert!((v / base - 1.0).abs() <= 1e-12, "{} vs {}", v, base);
        }
    }
}

#[test]
fn constant_multipliers_are_annihilated() {
    let spec = spec1();
    let f = random(&spec, 9, 0.5);
    let c = GridFunction::constant(spec, 1.7);
    for (name, op) in ops() {
        let v = op(&c, &f).unwrap();
        assert!(v.l2() <= 1e-12 * f.l2(), "{name}: {:e}", v.l2());
    }
    let g = random(&spec2(), 4, 0.5);
    let c2 = GridFunction::constant(spec2(), -0.3);
    for j in 0..2 {
        assert!(crw_commutator(&c2, &g, j).unwrap().l2() <= 1e-12 * g.l2());
    }
}

#[test]
fn hilbert_commutator_pieces_match_in_one_dimension() {
    // in 1-D the Riesz transform is the Hilbert transform
    let spec = spec1();
    let f = random(&spec, 21, 0.5);
    assert!(rel(&riesz_transform(&f, 0).unwrap(), &hilbert_transform(&f).unwrap()) <= 1e-14);
}

/// High-frequency f against a slowly varying φ: R(φf) and φRf nearly cancel.
#[test]
fn crw_commutator_gains_from_cancellation() {
    let spec = GridSpec::new(1, 1024, 1.0).unwrap();
    let mut worst = 0.0f64;
    for (k, width, cx) in [(16, 0.1, 0.5), (24, 0.08, 0.45), (32, 0.12, 0.55), (48, 0.1, 0.4), (64, 0.06, 0.6)] {
        let phi = make_function(&TestFunctionDescriptor::gaussian([cx, 0.0], width), &spec).unwrap();
        let env = make_function(&TestFunctionDescriptor::bump([0.5, 0.0], 0.3), &spec).unwrap();
        let wave = make_function(&TestFunctionDescriptor::sine([k, 0]), &spec).unwrap();
        let f = env.mul(&wave);
        let comm = crw_commutator(&phi, &f, 0).unwrap().l2();
        let parts = riesz_transform(&phi.mul(&f), 0).unwrap().l2() + phi.mul(&riesz_transform(&f, 0).unwrap()).l2();
        worst = worst.max(comm / parts);
    }
    assert!(worst <= 0.9, "worst ratio {worst}");
}

#[test]
fn crw_commutator_pairing_is_symmetric() {
    // R is antisymmetric, so Σ([R, φ]f)g = Σ f([R, φ]g)
    let spec = spec2();
    let phi = random(&spec, 1, 0.5);
    let f = random(&spec, 2, 0.4);
    let g = random(&spec, 3, 0.6);
    for j in 0..2 {
        let a = crw_commutator(&phi, &f, j).unwrap().pairing(&g);
        let b = f.pairing(&crw_commutator(&phi, &g, j).unwrap());
        assert!((a - b).abs() <= 1e-12 * (phi.l2() * f.l2() * g.l2()), "{a} vs {b}");
    }
}
