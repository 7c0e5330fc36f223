//! The `ops-check` suite: exact spectral identities, the classical Poisson
//! symbol, and multiplier versus quadrature fractional Laplacians.

use std::f64::consts::PI;

use fracharm::grid::{make_function, spectral_gradient};
use fracharm::multiplier::{frac_laplacian, hilbert_transform, riesz_potential, riesz_transform};
use fracharm::singular::{frac_laplacian_quadrature, QuadratureConfig};
use fracharm::{GridFunction, GridSpec, TestFunctionDescriptor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::failure::Failure;
use crate::symbols;

pub const IDENTITY_TOL: f64 = 1e-10;
pub const SYMBOL_TOL: f64 = 1e-6;

/// Relative L∞ tolerance between the multiplier and quadrature fractional
/// Laplacians of a Gaussian on N points. Coarse grids cannot resolve the
/// kernel singularity, so the tolerance widens below N = 256.
pub fn oracle_tolerance(points: usize) -> f64 {
    match points {
        256.. => 2e-2,
        64..=255 => 5e-2,
        16..=63 => 0.15,
        _ => 0.5,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub name: String,
    pub grid: String,
    pub error: f64,
    pub tol: f64,
}

impl CheckRow {
    pub fn pass(&self) -> bool {
        self.error <= self.tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpsOptions {
    pub dim: usize,
    pub points: usize,
    pub period: f64,
    pub seed: u64,
    pub tolerance_scale: f64,
}

impl OpsOptions {
    pub fn default_points(dim: usize) -> usize {
        if dim == 1 {
            256
        } else {
            64
        }
    }
}

fn grid_label(spec: &GridSpec) -> String {
    format!("n={} N={}", spec.dim(), spec.points())
}

/// Mean-zero trigonometric polynomial with random coefficients on |k|_∞ ≤ kmax.
fn trig_poly(spec: GridSpec, kmax: i64, seed: u64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ky: Vec<i64> = if spec.dim() == 1 { vec![0] } else { (-kmax..=kmax).collect() };
    let mut modes = Vec::new();
    for kx in -kmax..=kmax {
        for &k2 in &ky {
            if (kx, k2) > (0, 0) {
                modes.push((kx as f64, k2 as f64, rng.gen_range(-1.0..1.0), rng.gen_range(0.0..2.0 * PI)));
            }
        }
    }
    let l = spec.period();
    GridFunction::from_fn(spec, |x| {
        modes
            .iter()
            .map(|&(a, b, c, ph)| c * (2.0 * PI * (a * x[0] + b * x[1]) / l + ph).cos())
            .sum()
    })
}

fn op<T>(name: &str, r: fracharm::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| Failure::numerical(name, e))
}

fn identities(spec: GridSpec, seed: u64, tol: f64) -> Result<Vec<CheckRow>, Failure> {
    let n = spec.dim();
    let cap = if n == 1 { 40 } else { 12 };
    let kmax = (spec.points() as i64 / 2 - 1).clamp(1, cap);
    let f = trig_poly(spec, kmax, seed);
    let label = grid_label(&spec);
    let row = |name: &str, error: f64| CheckRow {
        name: name.into(),
        grid: label.clone(),
        error,
        tol,
    };
    let mut rows = Vec::new();

    if n == 1 {
        let hh = op("hilbert_transform", hilbert_transform(&op("hilbert_transform", hilbert_transform(&f))?))?;
        rows.push(row("H∘H = −Id", hh.rel_l2_error(&f.scale(-1.0))));
    }
    let mut sum = GridFunction::zeros(spec);
    for j in 0..n {
        let r = op("riesz_transform", riesz_transform(&f, j))?;
        sum = sum.add(&op("riesz_transform", riesz_transform(&r, j))?);
    }
    rows.push(row("Σ R_j² = −Id", sum.rel_l2_error(&f.scale(-1.0))));

    let mut worst = 0.0f64;
    for (a, b) in [(0.3, 0.5), (0.7, 1.1), (1.0, 1.0)] {
        let composed = op("frac_laplacian", frac_laplacian(&op("frac_laplacian", frac_laplacian(&f, a))?, b))?;
        worst = worst.max(composed.rel_l2_error(&op("frac_laplacian", frac_laplacian(&f, a + b))?));
    }
    rows.push(row("fractional Laplacian semigroup", worst));

    let mut worst = 0.0f64;
    for s in [0.3, 0.5, 0.9] {
        let back = op("riesz_potential", riesz_potential(&op("frac_laplacian", frac_laplacian(&f, s))?, s))?;
        worst = worst.max(back.rel_l2_error(&f));
    }
    rows.push(row("I^s ∘ (−Δ)^{s/2} = Id", worst));

    let lap = op("frac_laplacian", frac_laplacian(&f, 2.0))?;
    let grad = spectral_gradient(&f);
    let mut worst = 0.0f64;
    for (j, gj) in grad.iter().enumerate().take(n) {
        let second = spectral_gradient(gj);
        for (k, d2) in second.iter().enumerate().take(n) {
            let rr = op("riesz_transform", riesz_transform(&op("riesz_transform", riesz_transform(&lap, k))?, j))?;
            worst = worst.max(d2.rel_l2_error(&rr));
        }
    }
    rows.push(row("∂_j∂_k = R_jR_k(−Δ)", worst));
    Ok(rows)
}

fn classical_symbol(dim: usize, tol: f64) -> Result<CheckRow, Failure> {
    let sym = symbols::load(1.0, dim)?;
    let mut worst = (op("symbol value", sym.value(0.0))? - 1.0).abs();
    let top = sym.r_max().min(5.0);
    let count = 2000;
    for i in 0..=count {
        let r = sym.r_min() + (top - sym.r_min()) * i as f64 / count as f64;
        let exact = (-2.0 * PI * r).exp();
        worst = worst.max((op("symbol value", sym.value(r))? / exact - 1.0).abs());
    }
    Ok(CheckRow {
        name: "classical Poisson symbol = e^{−2πr}".into(),
        grid: format!("n={dim} r ≤ {top}"),
        error: worst,
        tol,
    })
}

fn oracle(points: usize, period: f64, scale: f64) -> Result<Vec<CheckRow>, Failure> {
    let spec = GridSpec::new(1, points, period).map_err(|e| Failure::Config(e.to_string()))?;
    // wide enough to be sampled on coarse grids, narrow enough to fit the period
    let w = (0.05 * period).max(2.0 * spec.spacing()).min(0.12 * period);
    let f = op(
        "gaussian",
        make_function(&TestFunctionDescriptor::gaussian([0.5 * period, 0.0], w), &spec),
    )?;
    let tol = oracle_tolerance(points) * scale;
    [0.3, 0.7, 1.5]
        .iter()
        .map(|&s| {
            let q = op("frac_laplacian_quadrature", frac_laplacian_quadrature(&f, s, QuadratureConfig::default()))?;
            let m = op("frac_laplacian", frac_laplacian(&f, s))?;
            Ok(CheckRow {
                name: format!("multiplier vs quadrature, s = {s}"),
                grid: grid_label(&spec),
                error: q.values.rel_linf_error(&m),
                tol,
            })
        })
        .collect()
}

pub fn run_checks(o: &OpsOptions) -> Result<Vec<CheckRow>, Failure> {
    if !(o.tolerance_scale.is_finite() && o.tolerance_scale > 0.0) {
        return Err(Failure::Config(format!("--tolerance-scale must be positive, got {}", o.tolerance_scale)));
    }
    let spec = GridSpec::new(o.dim, o.points, o.period).map_err(|e| Failure::Config(e.to_string()))?;
    let mut rows = identities(spec, o.seed, IDENTITY_TOL * o.tolerance_scale)?;
    rows.push(classical_symbol(o.dim, SYMBOL_TOL * o.tolerance_scale)?);
    rows.extend(oracle(o.points, o.period, o.tolerance_scale)?);
    Ok(rows)
}

pub fn render(rows: &[CheckRow]) -> String {
    let width = rows.iter().map(|r| r.name.chars().count()).max().unwrap_or(0).max(5);
    let gwidth = rows.iter().map(|r| r.grid.chars().count()).max().unwrap_or(0).max(4);
    let pad = |s: &str, w: usize| format!("{s}{}", " ".repeat(w.saturating_sub(s.chars().count())));
    let mut out = format!("{}  {}  {:>9}  {:>9}  status\n", pad("check", width), pad("grid", gwidth), "error", "tol");
    for r in rows {
        out.push_str(&format!(
            "{}  {}  {:>9.2e}  {:>9.2e}  {}\n",
            pad(&r.name, width),
            pad(&r.grid, gwidth),
            r.error,
            r.tol,
            if r.pass() { "pass" } else { "FAIL" }
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_is_monotone_and_matches_the_fine_grid_value() {
        assert_eq!(oracle_tolerance(2048), 2e-2);
        assert_eq!(oracle_tolerance(256), 2e-2);
        let sizes = [8, 16, 32, 64, 128, 256, 4096];
        for w in sizes.windows(2) {
            assert!(oracle_tolerance(w[0]) >= oracle_tolerance(w[1]));
        }
    }

    #[test]
    fn tiny_grid_still_reports_every_check() {
        let o = OpsOptions {
            dim: 1,
            points: 8,
            period: 1.0,
            seed: 1,
            tolerance_scale: 1.0,
        };
        let rows = run_checks(&o).unwrap();
        assert_eq!(rows.len(), 9);
        assert!(rows.iter().all(|r| r.pass()), "{}", render(&rows));
        assert!(rows.iter().filter(|r| r.name.starts_with("multiplier")).all(|r| r.tol == 0.5));
    }

    #[test]
    fn two_dimensional_suite_passes() {
        let o = OpsOptions {
            dim: 2,
            points: 32,
            period: 1.0,
            seed: 3,
            tolerance_scale: 1.0,
        };
        let rows = run_checks(&o).unwrap();
        assert!(rows.iter().all(|r| r.pass()), "{}", render(&rows));
        assert!(!rows.iter().any(|r| r.name.starts_with("H∘H")));
    }
}
