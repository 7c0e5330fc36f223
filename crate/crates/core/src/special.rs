//! Special functions needed for kernel normalizations: Gamma, Hurwitz and
//! Riemann zeta, and moments of |y|^p over a unit cell.

use std::f64::consts::PI;

/// Gamma function, with the reflection formula for negative arguments.
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

// B_2j / (2j)!
const BERNOULLI_OVER_FACTORIAL: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30_240.0,
    -1.0 / 1_209_600.0,
    1.0 / 47_900_160.0,
    -691.0 / 1_307_674_368_000.0,
    1.0 / 74_724_249_600.0,
    -3617.0 / 10_670_622_842_880_000.0,
    43_867.0 / 5_109_094_217_170_944_000.0,
    -174_611.0 / 802_857_662_698_291_200_000.0,
];

/// Hurwitz zeta ζ(σ, a) = Σ_{k≥0} (k + a)^{-σ} for real σ ≠ 1 and a > 0,
/// analytically continued to σ < 1 through Euler–Maclaurin summation.
pub fn hurwitz_zeta(sigma: f64, a: f64) -> f64 {
    assert!(a > 0.0, "hurwitz_zeta requires a > 0");
    assert!((sigma - 1.0).abs() > 1e-12, "hurwitz_zeta has a pole at 1");
    const HEAD: usize = 24;
    let mut sum = 0.0;
    for k in 0..HEAD {
        sum += (k as f64 + a).powf(-sigma);
    }
    let m = HEAD as f64 + a;
    sum += m.powf(1.0 - sigma) / (sigma - 1.0);
    sum += 0.5 * m.powf(-sigma);
    // rising factorial σ(σ+1)…(σ+2j-2) times m^{-σ-2j+1}
    let mut rising = sigma;
    let mut power = m.powf(-sigma - 1.0);
    for (j, &b) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        sum += b * rising * power;
        let j2 = 2.0 * (j as f64 + 1.0);
        rising *= (sigma + j2 - 1.0) * (sigma + j2);
        power /= m * m;
    }
    sum
}

pub fn riemann_zeta(sigma: f64) -> f64 {
    hurwitz_zeta(sigma, 1.0)
}

/// ∫ over the cell [-1/2, 1/2]^n of |y|^p dy, for p > -n and n ∈ {1, 2}.
pub fn unit_cell_moment(dim: usize, p: f64) -> f64 {
    assert!(p > -(dim as f64), "cell moment diverges for p <= -n");
    match dim {
        1 => 2.0 * 0.5f64.powf(p + 1.0) / (p + 1.0),
        2 => {
            // polar coordinates over one eighth of the square
            let steps = 4000;
            let a = 0.0;
            let b = PI / 4.0;
            let dh = (b - a) / steps as f64;
            let g = |th: f64| (2.0 * th.cos()).powf(-(p + 2.0));
            let mut acc = g(a) + g(b);
            for i in 1..steps {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * g(a + i as f64 * dh);
            }
            8.0 / (p + 2.0) * acc * dh / 3.0
        }
        _ => panic!("unit_cell_moment supports n = 1, 2"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn gamma_known_values() {
        assert!(rel(gamma(0.5), PI.sqrt()) < 1e-13);
        assert!(rel(gamma(1.0), 1.0) < 1e-13);
        assert!(rel(gamma(5.0), 24.0) < 1e-13);
        assert!(rel(gamma(1.5), 0.5 * PI.sqrt()) < 1e-13);
        // Γ(-1/2) = -2√π
        assert!(rel(gamma(-0.5), -2.0 * PI.sqrt()) < 1e-13);
        // Γ(1/3) from reference tables
        assert!(rel(gamma(1.0 / 3.0), 2.678_938_534_707_747_6) < 1e-13);
    }

    #[test]
    fn gamma_recurrence() {
        for &x in &[0.13, 0.71, 1.37, 2.9, 6.2] {
            assert!(rel(gamma(x + 1.0), x * gamma(x)) < 1e-12);
        }
    }

    #[test]
    fn zeta_known_values() {
        assert!(rel(riemann_zeta(2.0), PI * PI / 6.0) < 1e-13);
        assert!(rel(riemann_zeta(4.0), PI.powi(4) / 90.0) < 1e-13);
        assert!(rel(riemann_zeta(0.0), -0.5) < 1e-13);
        assert!(rel(riemann_zeta(-1.0), -1.0 / 12.0) < 1e-12);
        assert!(rel(riemann_zeta(0.5), -1.460_354_508_809_586_8) < 1e-12);
        assert!(rel(riemann_zeta(-0.5), -0.207_886_224_977_354_57) < 1e-11);
    }

    #[test]
    fn hurwitz_half_shift() {
        for &s in &[-0.7, 0.3, 1.6, 2.5] {
            let lhs = hurwitz_zeta(s, 0.5);
            let rhs = (2f64.powf(s) - 1.0) * riemann_zeta(s);
            assert!(rel(lhs, rhs) < 1e-11, "s = {s}");
        }
    }

    #[test]
    fn hurwitz_shift_identity() {
        // ζ(σ, a) = a^{-σ} + ζ(σ, a + 1)
        for &(s, a) in &[(1.3, 0.01), (-0.4, 0.2), (2.7, 0.9)] {
            assert!(rel(hurwitz_zeta(s, a), a.powf(-s) + hurwitz_zeta(s, a + 1.0)) < 1e-11);
        }
    }

    #[test]
    fn cell_moments() {
        assert!(rel(unit_cell_moment(1, 0.0), 1.0) < 1e-14);
        assert!(rel(unit_cell_moment(2, 0.0), 1.0) < 1e-12);
        // ∫ |y|^2 over the unit square = 1/6
        assert!(rel(unit_cell_moment(2, 2.0), 1.0 / 6.0) < 1e-12);
    }
}
