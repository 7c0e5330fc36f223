//! Direct real-space quadratures of the singular-integral forms of the
//! fractional Laplacian, the Hilbert transform and the Riesz potential.
//! These never touch the FFT and serve as independent checks of the
//! multiplier implementations.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec};
use crate::special::{gamma, hurwitz_zeta, riemann_zeta, unit_cell_moment};

/// Half-width, in periods, of the explicit lattice sum used for 2-D periodic kernels.
const LATTICE_RADIUS: i64 = 6;

/// How the cell containing the kernel singularity is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SingularCellRule {
    /// Drop the cell.
    Exclude,
    /// Replace the integrand by its second-order Taylor expansion and integrate exactly.
    SecondDifferenceRegular,
    /// Integrate the kernel exactly over the cell against f(x).
    AnalyticCellAverage,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    /// Treat f as compactly supported inside one period and extended by zero;
    /// otherwise f is periodic and the kernel is periodized exactly.
    pub treat_as_compact: bool,
    pub rule: SingularCellRule,
}

impl QuadratureConfig {
    pub fn periodic(rule: SingularCellRule) -> Self {
        Self {
            treat_as_compact: false,
            rule,
        }
    }

    pub fn compact(rule: SingularCellRule) -> Self {
        Self {
            treat_as_compact: true,
            rule,
        }
    }
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self::periodic(SingularCellRule::SecondDifferenceRegular)
    }
}

/// Quadrature values together with a bound on the part of the integral
/// that lies beyond the integration window and was left out.
#[derive(Debug, Clone)]
pub struct QuadratureOutput {
    pub values: GridFunction,
    pub tail_bound: f64,
}

/// C_{n,s} in (−Δ)^{s/2} f = −½ C ∫ (f(x+y) + f(x−y) − 2f(x)) |y|^{−n−s} dy.
pub fn frac_laplacian_constant(n: usize, s: f64) -> f64 {
    let n = n as f64;
    2f64.powf(s) * gamma(0.5 * (n + s)) / (PI.powf(0.5 * n) * gamma(-0.5 * s).abs())
}

/// C_{n,s} in I^s f = C ∫ f(x−y) |y|^{s−n} dy.
pub fn riesz_potential_constant(n: usize, s: f64) -> f64 {
    let n = n as f64;
    gamma(0.5 * (n - s)) / (2f64.powf(s) * PI.powf(0.5 * n) * gamma(0.5 * s))
}

/// C_n in R_j f = C PV ∫ y_j / |y|^{n+1} f(x−y) dy.
pub fn riesz_transform_constant(n: usize) -> f64 {
    let n = n as f64;
    gamma(0.5 * (n + 1.0)) / PI.powf(0.5 * (n + 1.0))
}

/// ∫ over the complement of [−1, 1]² of |x|^{−2−p} dx, for p > 0.
fn square_exterior_integral(p: f64) -> f64 {
    let steps = 400;
    let b = PI / 4.0;
    let dh = b / steps as f64;
    let g = |th: f64| th.cos().powf(p);
    let mut acc = g(0.0) + g(b);
    for i in 1..steps {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i as f64 * dh);
    }
    8.0 / p * acc * dh / 3.0
}

/// Kernel table indexed by cyclic displacement, with the origin entry zeroed.
struct Table {
    spec: GridSpec,
    values: Vec<f64>,
}

impl Table {
    fn periodic(spec: GridSpec, kernel: impl Fn([f64; 2]) -> f64 + Sync) -> Self {
        let values = (0..spec.len())
            .into_par_iter()
            .map(|d| if d == 0 { 0.0 } else { kernel(spec.coords(d)) })
            .collect();
        Self { spec, values }
    }

    /// Σ_d g(f(x+d), f(x)) K(d) hⁿ for every x, periodic wrap.
    fn apply(&self, f: &GridFunction, g: impl Fn(f64, f64) -> f64 + Sync) -> Vec<f64> {
        let spec = self.spec;
        let n = spec.points();
        let w = spec.cell_volume();
        let fv = f.values();
        (0..spec.len())
            .into_par_iter()
            .map(|x| {
                let [xi, xj] = spec.multi_index(x);
                let fx = fv[x];
                let mut acc = 0.0;
                for (d, &k) in self.values.iter().enumerate() {
                    if k == 0.0 {
                        continue;
                    }
                    let [di, dj] = spec.multi_index(d);
                    let y = spec.flat_index([(xi + di) % n, (xj + dj) % n]);
                    acc += g(fv[y], fx) * k;
                }
                acc * w
            })
            .collect()
    }
}

/// Same as [`Table::apply`] but over displacements in (−N, N)ⁿ, f extended by zero.
fn apply_compact(
    f: &GridFunction,
    kernel: impl Fn([f64; 2]) -> f64 + Sync,
    g: impl Fn(f64, f64) -> f64 + Sync,
) -> Vec<f64> {
    let spec = *f.spec();
    let n = spec.points() as i64;
    let h = spec.spacing();
    let w = spec.cell_volume();
    let span = 2 * n - 1;
    let rows = if spec.dim() == 1 { 1 } else { span };
    // kernel[(a + n - 1) * rows + (b + n - 1)] for displacement (a, b)
    let table: Vec<f64> = (0..span * rows)
        .into_par_iter()
        .map(|idx| {
            let (a, b) = if spec.dim() == 1 {
                (idx - (n - 1), 0)
            } else {
                (idx / span - (n - 1), idx % span - (n - 1))
            };
            if a == 0 && b == 0 {
                0.0
            } else {
                kernel([a as f64 * h, b as f64 * h])
            }
        })
        .collect();
    let fv = f.values();
    (0..spec.len())
        .into_par_iter()
        .map(|x| {
            let [xi, xj] = spec.multi_index(x);
            let (xi, xj) = (xi as i64, xj as i64);
            let fx = fv[x];
            let mut acc = 0.0;
            let b_range = if spec.dim() == 1 { 0..1 } else { -(n - 1)..n };
            for a in -(n - 1)..n {
                for b in b_range.clone() {
                    let k = if spec.dim() == 1 {
                        table[(a + n - 1) as usize]
                    } else {
                        table[((a + n - 1) * span + (b + n - 1)) as usize]
                    };
                    if k == 0.0 {
                        continue;
                    }
                    let (ti, tj) = (xi + a, xj + b);
                    let fy = if (0..n).contains(&ti) && (0..n).contains(&tj) {
                        fv[spec.flat_index([ti as usize, tj as usize])]
                    } else {
                        0.0
                    };
                    acc += g(fy, fx) * k;
                }
            }
            acc * w
        })
        .collect()
}

/// Five-point (three-point in 1-D) periodic Laplacian.
fn discrete_laplacian(f: &GridFunction) -> Vec<f64> {
    let spec = *f.spec();
    let h2 = spec.spacing().powi(2);
    let mut out = vec![0.0; spec.len()];
    for axis in 0..spec.dim() {
        let mut shift = [0i64; 2];
        shift[axis] = 1;
        let fwd = f.shifted(shift);
        shift[axis] = -1;
        let bwd = f.shifted(shift);
        for (i, o) in out.iter_mut().enumerate() {
            *o += (fwd.values()[i] + bwd.values()[i] - 2.0 * f.values()[i]) / h2;
        }
    }
    out
}

/// Periodized |y|^{−n−s} on the torus.
fn periodic_power_kernel(spec: GridSpec, s: f64) -> impl Fn([f64; 2]) -> f64 + Sync {
    let l = spec.period();
    let dim = spec.dim();
    let tail = square_exterior_integral(s) * ((LATTICE_RADIUS as f64 + 0.5) * l).powf(-s) / (l * l);
    move |y: [f64; 2]| match dim {
        1 => {
            let a = y[0] / l;
            l.powf(-1.0 - s) * (hurwitz_zeta(1.0 + s, a) + hurwitz_zeta(1.0 + s, 1.0 - a))
        }
        _ => {
            let mut acc = tail;
            for m0 in -LATTICE_RADIUS..=LATTICE_RADIUS {
                for m1 in -LATTICE_RADIUS..=LATTICE_RADIUS {
                    let a = y[0] + m0 as f64 * l;
                    let b = y[1] + m1 as f64 * l;
                    acc += (a * a + b * b).powf(-0.5 * (2.0 + s));
                }
            }
            acc
        }
    }
}

/// Zero-mean periodization of |y|^{s−n}, up to an additive constant.
fn periodic_potential_kernel(spec: GridSpec, s: f64) -> impl Fn([f64; 2]) -> f64 + Sync {
    let l = spec.period();
    let dim = spec.dim();
    let tail_coeff = (s - 2.0).powi(2) / (4.0 * l * l)
        * ((LATTICE_RADIUS as f64 + 0.5) * l).powf(s - 2.0)
        * square_exterior_integral(2.0 - s);
    move |y: [f64; 2]| match dim {
        1 => {
            let a = y[0] / l;
            l.powf(s - 1.0) * (hurwitz_zeta(1.0 - s, a) + hurwitz_zeta(1.0 - s, 1.0 - a))
        }
        _ => {
            let mut acc = tail_coeff * (y[0] * y[0] + y[1] * y[1]);
            for m0 in -LATTICE_RADIUS..=LATTICE_RADIUS {
                for m1 in -LATTICE_RADIUS..=LATTICE_RADIUS {
                    let a = y[0] + m0 as f64 * l;
                    let b = y[1] + m1 as f64 * l;
                    acc += (a * a + b * b).powf(0.5 * (s - 2.0));
                    if m0 != 0 || m1 != 0 {
                        let c = (m0 * m0 + m1 * m1) as f64 * l * l;
                        acc -= c.powf(0.5 * (s - 2.0));
                    }
                }
            }
            acc
        }
    }
}

fn power_kernel(dim: usize, p: f64) -> impl Fn([f64; 2]) -> f64 + Sync {
    move |y: [f64; 2]| {
        let r2 = if dim == 1 { y[0] * y[0] } else { y[0] * y[0] + y[1] * y[1] };
        r2.powf(0.5 * p)
    }
}

/// (−Δ)^{s/2} f from the second-difference integral.
pub fn frac_laplacian_quadrature(f: &GridFunction, s: f64, cfg: QuadratureConfig) -> Result<QuadratureOutput> {
    if !(s > 0.0 && s < 2.0) {
        return Err(Error::range("frac_laplacian_quadrature", format!("s = {s} must lie in (0, 2)")));
    }
    let spec = *f.spec();
    let n = spec.dim();
    let c = frac_laplacian_constant(n, s);
    let h = spec.spacing();
    // −½ Σ (f(x+y) + f(x−y) − 2f(x)) K = −Σ (f(x+y) − f(x)) K for even K
    let diff = |fy: f64, fx: f64| fy - fx;
    let (raw, tail_bound) = if cfg.treat_as_compact {
        let raw = apply_compact(f, power_kernel(n, -(n as f64) - s), diff);
        // beyond the window (−L, L)ⁿ only the −2f(x) term remains
        let l = spec.period();
        let exterior = if n == 1 { 2.0 * l.powf(-s) / s } else { square_exterior_integral(s) * l.powf(-s) };
        (raw, c * f.max_abs() * exterior)
    } else {
        let table = Table::periodic(spec, periodic_power_kernel(spec, s));
        (table.apply(f, diff), 0.0)
    };
    let mut values: Vec<f64> = raw.iter().map(|v| -c * v).collect();
    match cfg.rule {
        SingularCellRule::Exclude => {}
        SingularCellRule::SecondDifferenceRegular => {
            let lap = discrete_laplacian(f);
            let moment = h.powf(2.0 - s) * unit_cell_moment(n, 2.0 - n as f64 - s) / n as f64;
            for (v, l) in values.iter_mut().zip(&lap) {
                *v -= 0.5 * c * l * moment;
            }
        }
        SingularCellRule::AnalyticCellAverage => {
            return Err(Error::Unsupported(
                "the second-difference integrand has no f(x)-proportional cell term; use second-difference-regular".into(),
            ))
        }
    }
    finish("frac_laplacian_quadrature", spec, values, tail_bound)
}

/// H f = PV ∫ f(x−y) / (πy) dy on the torus, by symmetric pairing with the y = 0 cell excluded.
pub fn hilbert_pv_quadrature(f: &GridFunction) -> Result<GridFunction> {
    let spec = *f.spec();
    if spec.dim() != 1 {
        return Err(Error::Unsupported("principal-value quadrature is one-dimensional".into()));
    }
    let n = spec.points();
    let l = spec.period();
    let h = spec.spacing();
    // Σ_m 1/(π(y + mL)) = cot(πy/L)/L
    let kernel: Vec<f64> = (1..n / 2).map(|j| (PI * j as f64 / n as f64).tan().recip() / l).collect();
    let fv = f.values();
    let values: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut acc = 0.0;
            for (idx, &k) in kernel.iter().enumerate() {
                let j = idx + 1;
                acc += (fv[(x + n - j) % n] - fv[(x + j) % n]) * k;
            }
            acc * h
        })
        .collect();
    finish("hilbert_pv_quadrature", spec, values, 0.0).map(|o| o.values)
}

/// I^s f = C ∫ f(x−y)|y|^{s−n} dy.
pub fn riesz_potential_quadrature(f: &GridFunction, s: f64, cfg: QuadratureConfig) -> Result<QuadratureOutput> {
    let spec = *f.spec();
    let n = spec.dim();
    if !(s > 0.0 && s < n as f64) {
        return Err(Error::range("riesz_potential_quadrature", format!("s = {s} must lie in (0, {n})")));
    }
    let c = riesz_potential_constant(n, s);
    let h = spec.spacing();
    let l = spec.period();
    let take = |fy: f64, _fx: f64| fy;
    let (raw, regular_at_origin) = if cfg.treat_as_compact {
        (apply_compact(f, power_kernel(n, s - n as f64), take), 0.0)
    } else {
        let table = Table::periodic(spec, periodic_potential_kernel(spec, s));
        // value at y = 0 of the periodized kernel minus |y|^{s−n}
        let reg = if n == 1 { 2.0 * l.powf(s - 1.0) * riemann_zeta(1.0 - s) } else { 0.0 };
        (table.apply(f, take), reg)
    };
    let mut values: Vec<f64> = raw.iter().map(|v| c * v).collect();
    let cell = h.powf(s) * unit_cell_moment(n, s - n as f64) + regular_at_origin * spec.cell_volume();
    match cfg.rule {
        SingularCellRule::Exclude => {}
        SingularCellRule::AnalyticCellAverage => {
            for (v, fx) in values.iter_mut().zip(f.values()) {
                *v += c * fx * cell;
            }
        }
        SingularCellRule::SecondDifferenceRegular => {
            let lap = discrete_laplacian(f);
            let second = h.powf(s + 2.0) * unit_cell_moment(n, s + 2.0 - n as f64) / (2.0 * n as f64);
            for ((v, fx), lp) in values.iter_mut().zip(f.values()).zip(&lap) {
                *v += c * (fx * cell + lp * second);
            }
        }
    }
    finish("riesz_potential_quadrature", spec, values, 0.0)
}

fn finish(op: &str, spec: GridSpec, values: Vec<f64>, tail_bound: f64) -> Result<QuadratureOutput> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { op: op.into() });
    }
    Ok(QuadratureOutput {
        values: GridFunction::new(spec, values)?,
        tail_bound,
    })
}
