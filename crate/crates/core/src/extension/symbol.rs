//! The radial Fourier symbol r ↦ m_s(r) of the generalized Poisson kernel,
//!
//!   m_s(r) = Γ(s/2)^{-1} ∫_0^∞ λ^{s/2} e^{−λ − π²r²/λ} dλ/λ,
//!
//! tabulated with its first two derivatives and interpolated in log–log
//! coordinates.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::special::ln_gamma;

/// Relative accuracy requested from every tabulated quadrature.
pub const SYMBOL_TOL: f64 = 1e-13;
pub const DEFAULT_R_MIN: f64 = 1e-6;
pub const DEFAULT_R_MAX: f64 = 30.0;
const DEFAULT_STEP: f64 = 0.02;

const CACHE_MAGIC: &str = "fracharm-poisson-symbol";
const CACHE_VERSION: &str = "v1";

/// Radii at which the symbol is tabulated: geometric with ratio 1 + step
/// until the spacing reaches `step`, uniform with spacing `step` after that.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub step: f64,
}

impl Default for RadialGrid {
    fn default() -> Self {
        Self {
            r_min: DEFAULT_R_MIN,
            r_max: DEFAULT_R_MAX,
            step: DEFAULT_STEP,
        }
    }
}

impl RadialGrid {
    pub fn with_r_max(r_max: f64) -> Self {
        Self {
            r_max,
            ..Self::default()
        }
    }

    fn radii(&self) -> Result<Vec<f64>> {
        if !(self.r_min > 0.0 && self.r_max > self.r_min && self.step > 0.0 && self.step < 1.0) {
            return Err(Error::range(
                "s_poisson_symbol",
                format!("bad radial grid r_min={} r_max={} step={}", self.r_min, self.r_max, self.step),
            ));
        }
        let mut out = vec![self.r_min];
        let mut r = self.r_min;
        while r < self.r_max {
            let dr = (r * self.step).min(self.step);
            r = (r + dr).min(self.r_max);
            out.push(r);
        }
        Ok(out)
    }
}

/// ln J_a(b), J_a(b) = ∫_0^∞ λ^a e^{−λ − b/λ} dλ, for b > 0 or a > −1.
///
/// After λ = e^u the integrand e^{φ(u)} is unimodal; the window is cut where
/// φ has dropped by 60 and the trapezoid rule is refined until stable.
pub(crate) fn ln_j(a: f64, b: f64, r: f64) -> Result<f64> {
    let phi = |u: f64| (a + 1.0) * u - u.exp() - b * (-u).exp();
    let a1 = a + 1.0;
    let disc = (a1 * a1 + 4.0 * b).sqrt();
    let peak_exp = if a1 >= 0.0 { 0.5 * (a1 + disc) } else { 2.0 * b / (disc - a1) };
    if !(peak_exp > 0.0) {
        return Err(Error::QuadratureDivergence { r });
    }
    let u0 = peak_exp.ln();
    let top = phi(u0);
    let edge = |dir: f64| -> Result<f64> {
        let mut step = 1.0;
        let mut u = u0;
        for _ in 0..200 {
            u += dir * step;
            if phi(u) < top - 60.0 {
                return Ok(u);
            }
            step *= 1.5;
        }
        Err(Error::QuadratureDivergence { r })
    };
    let lo = edge(-1.0)?;
    let hi = edge(1.0)?;
    let g = |u: f64| (phi(u) - top).exp();
    let mut intervals = 64usize;
    let mut dh = (hi - lo) / intervals as f64;
    let mut sum = 0.5 * (g(lo) + g(hi)) + (1..intervals).map(|i| g(lo + i as f64 * dh)).sum::<f64>();
    let mut estimate = sum * dh;
    for _ in 0..16 {
        // add midpoints
        let mids: f64 = (0..intervals).map(|i| g(lo + (i as f64 + 0.5) * dh)).sum();
        sum += mids;
        intervals *= 2;
        dh *= 0.5;
        let refined = sum * dh;
        let change = (refined - estimate).abs() / refined.abs();
        estimate = refined;
        if change <= SYMBOL_TOL {
            return Ok(estimate.ln() + top);
        }
    }
    Err(Error::QuadratureDivergence { r })
}

/// Values of the symbol and of q(r) = r m'(r) together with their r-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolRow {
    pub r: f64,
    pub m: f64,
    pub dm: f64,
    pub q: f64,
    pub dq: f64,
}

/// Evaluates one row by direct quadrature, for r > 0.
pub fn symbol_row(s: f64, r: f64) -> Result<SymbolRow> {
    if !(s > 0.0 && s < 2.0) {
        return Err(Error::range("s_poisson_symbol", format!("s = {s} must lie in (0, 2)")));
    }
    let lg = ln_gamma(0.5 * s);
    let a = 0.5 * s - 1.0;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::range("s_poisson_symbol", format!("radius {r} must be positive")));
    }
    let b = (std::f64::consts::PI * r).powi(2);
    let j0 = ln_j(a, b, r)?;
    let j1 = ln_j(a - 1.0, b, r)?;
    let j2 = ln_j(a - 2.0, b, r)?;
    let m = (j0 - lg).exp();
    // m' = −2π²r J_{a−1}/Γ,  m'' = −(2π²/Γ)(J_{a−1} − 2b J_{a−2})
    let two_pi2 = 2.0 * std::f64::consts::PI.powi(2);
    let dm = -two_pi2 * r * (j1 - lg).exp();
    let ddm = -two_pi2 * ((j1 - lg).exp() - 2.0 * b * (j2 - lg).exp());
    let q = r * dm;
    let dq = dm + r * ddm;
    for v in [m, dm, q, dq] {
        if !v.is_finite() {
            return Err(Error::QuadratureDivergence { r });
        }
    }
    Ok(SymbolRow { r, m, dm, q, dq })
}

/// Tabulated m_s with an interpolant for m_s and for q.
///
/// Both ln m and ln(−q) are interpolated as functions of ln r by cubic
/// Hermite polynomials with exact end slopes. Beyond `r_max` both vanish.
#[derive(Debug, Clone)]
pub struct PoissonSymbol {
    s: f64,
    dim: usize,
    grid: RadialGrid,
    rows: Vec<SymbolRow>,
    x: Vec<f64>,
    ln_m: Vec<f64>,
    slope_m: Vec<f64>,
    ln_q: Vec<f64>,
    slope_q: Vec<f64>,
}

/// Builds the table. `dim` only keys the cache: the radial profile is the same in every dimension.
pub fn s_poisson_symbol(s: f64, dim: usize, grid: RadialGrid) -> Result<PoissonSymbol> {
    if !(s > 0.0 && s < 2.0) {
        return Err(Error::range("s_poisson_symbol", format!("s = {s} must lie in (0, 2)")));
    }
    use rayon::prelude::*;
    let rows = grid
        .radii()?
        .into_par_iter()
        .map(|r| symbol_row(s, r))
        .collect::<Result<Vec<_>>>()?;
    PoissonSymbol::from_rows(s, dim, grid, rows)
}

/// Hermite interpolation on [x0, x1] with values y and slopes d.
fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * h * d0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * h * d1
}

/// Fritsch–Carlson: scale slopes so that each cubic piece stays monotone.
fn limit_slopes(x: &[f64], y: &[f64], d: &mut [f64]) {
    for i in 0..x.len().saturating_sub(1) {
        let delta = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
        if delta == 0.0 {
            continue;
        }
        let a = d[i] / delta;
        let b = d[i + 1] / delta;
        let norm2 = a * a + b * b;
        if norm2 > 9.0 {
            let tau = 3.0 / norm2.sqrt();
            d[i] = tau * a * delta;
            d[i + 1] = tau * b * delta;
        }
    }
}

impl PoissonSymbol {
    fn from_rows(s: f64, dim: usize, grid: RadialGrid, rows: Vec<SymbolRow>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::Degenerate("symbol table needs at least two rows".into()));
        }
        let x: Vec<f64> = rows.iter().map(|r| r.r.ln()).collect();
        let ln_m: Vec<f64> = rows.iter().map(|r| r.m.ln()).collect();
        let ln_q: Vec<f64> = rows.iter().map(|r| (-r.q).ln()).collect();
        // d ln m / d ln r = q/m, d ln(−q) / d ln r = r q'/q
        let mut slope_m: Vec<f64> = rows.iter().map(|r| r.q / r.m).collect();
        let slope_q: Vec<f64> = rows.iter().map(|r| r.r * r.dq / r.q).collect();
        if ln_m.iter().chain(&ln_q).chain(&slope_m).chain(&slope_q).any(|v| !v.is_finite()) {
            return Err(Error::Degenerate("symbol table contains non-positive m or non-negative q".into()));
        }
        limit_slopes(&x, &ln_m, &mut slope_m);
        Ok(Self {
            s,
            dim,
            grid,
            rows,
            x,
            ln_m,
            slope_m,
            ln_q,
            slope_q,
        })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn r_min(&self) -> f64 {
        self.grid.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.grid.r_max
    }

    pub fn rows(&self) -> &[SymbolRow] {
        &self.rows
    }

    fn locate(&self, r: f64) -> Result<Option<(usize, f64)>> {
        if r > self.r_max() {
            return Ok(None);
        }
        if r < self.r_min() {
            return Err(Error::OutsideTable {
                r,
                r_min: self.r_min(),
                r_max: self.r_max(),
            });
        }
        let x = r.ln();
        let i = match self.x.partition_point(|&v| v <= x) {
            0 => 0,
            p => (p - 1).min(self.x.len() - 2),
        };
        Ok(Some((i, x)))
    }

    /// m_s(r) for r = 0 or r ∈ [r_min, ∞).
    pub fn value(&self, r: f64) -> Result<f64> {
        if r == 0.0 {
            return Ok(1.0);
        }
        Ok(match self.locate(r)? {
            None => 0.0,
            Some((i, x)) => hermite(
                self.x[i],
                self.x[i + 1],
                self.ln_m[i],
                self.ln_m[i + 1],
                self.slope_m[i],
                self.slope_m[i + 1],
                x,
            )
            .exp(),
        })
    }

    /// q(r) = r m_s'(r). The height derivative of the extension symbol is
    /// ∂_t m_s(tρ) = q(tρ)/t.
    pub fn q(&self, r: f64) -> Result<f64> {
        if r == 0.0 {
            return Ok(0.0);
        }
        Ok(match self.locate(r)? {
            None => 0.0,
            Some((i, x)) => -hermite(
                self.x[i],
                self.x[i + 1],
                self.ln_q[i],
                self.ln_q[i + 1],
                self.slope_q[i],
                self.slope_q[i + 1],
                x,
            )
            .exp(),
        })
    }

    /// Serializes the table as text: one header line, then `r m dm q dq`
    /// per row in shortest round-trip form.
    pub fn to_cache_string(&self) -> String {
        let mut out = format!(
            "{CACHE_MAGIC} {CACHE_VERSION} n={} s={} r_max={} tol={} rows={}\n",
            self.dim,
            self.s,
            self.grid.r_max,
            SYMBOL_TOL,
            self.rows.len()
        );
        out.push_str(&format!("# r_min={} step={}\n", self.grid.r_min, self.grid.step));
        for row in &self.rows {
            let _ = writeln!(out, "{} {} {} {} {}", row.r, row.m, row.dm, row.q, row.dq);
        }
        out
    }

    pub fn parse_cache(text: &str, source: &str) -> Result<Self> {
        let bad = |reason: String| Error::Cache {
            path: source.to_string(),
            reason,
        };
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
        let mut fields = header.split_whitespace();
        if fields.next() != Some(CACHE_MAGIC) {
            return Err(bad("missing header".into()));
        }
        if fields.next() != Some(CACHE_VERSION) {
            return Err(bad("unsupported version".into()));
        }
        let mut key = std::collections::HashMap::new();
        for f in fields {
            let (k, v) = f.split_once('=').ok_or_else(|| bad(format!("malformed header field {f:?}")))?;
            key.insert(k, v);
        }
        let get = |k: &str| -> Result<f64> {
            key.get(k)
                .ok_or_else(|| bad(format!("header lacks {k}")))?
                .parse::<f64>()
                .map_err(|e| bad(format!("header field {k}: {e}")))
        };
        let dim = get("n")? as usize;
        let s = get("s")?;
        let r_max = get("r_max")?;
        let count = get("rows")? as usize;
        let grid_line = lines.next().ok_or_else(|| bad("missing grid line".into()))?;
        let mut r_min = None;
        let mut step = None;
        for f in grid_line.trim_start_matches('#').split_whitespace() {
            match f.split_once('=') {
                Some(("r_min", v)) => r_min = v.parse::<f64>().ok(),
                Some(("step", v)) => step = v.parse::<f64>().ok(),
                _ => return Err(bad(format!("malformed grid field {f:?}"))),
            }
        }
        let grid = RadialGrid {
            r_min: r_min.ok_or_else(|| bad("grid line lacks r_min".into()))?,
            r_max,
            step: step.ok_or_else(|| bad("grid line lacks step".into()))?,
        };
        let mut rows = Vec::with_capacity(count);
        for (lineno, line) in lines.enumerate() {
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|v| v.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| bad(format!("row {}: {e}", lineno + 1)))?;
            if vals.len() != 5 {
                return Err(bad(format!("row {} has {} columns, expected 5", lineno + 1, vals.len())));
            }
            rows.push(SymbolRow {
                r: vals[0],
                m: vals[1],
                dm: vals[2],
                q: vals[3],
                dq: vals[4],
            });
        }
        if rows.len() != count {
            return Err(bad(format!("expected {count} rows, found {}", rows.len())));
        }
        if rows.windows(2).any(|w| !(w[1].r > w[0].r)) {
            return Err(bad("radii are not increasing".into()));
        }
        Self::from_rows(s, dim, grid, rows).map_err(|e| bad(e.to_string()))
    }

    /// File name used inside a cache directory for the given key.
    pub fn cache_file_name(dim: usize, s: f64, r_max: f64) -> String {
        format!("poisson-n{dim}-s{s}-rmax{r_max}-tol{SYMBOL_TOL}.txt")
    }

    /// Loads the table from `dir` if present, otherwise builds and stores it.
    pub fn load_or_build(dir: &Path, s: f64, dim: usize, grid: RadialGrid) -> Result<Self> {
        let path: PathBuf = dir.join(Self::cache_file_name(dim, s, grid.r_max));
        if path.exists() {
            let text = std::fs::read_to_string(&path)?;
            let table = Self::parse_cache(&text, &path.display().to_string())?;
            if table.s != s || table.dim != dim || table.grid != grid {
                return Err(Error::Cache {
                    path: path.display().to_string(),
                    reason: "key does not match the requested table".into(),
                });
            }
            return Ok(table);
        }
        let table = s_poisson_symbol(s, dim, grid)?;
        std::fs::create_dir_all(dir)?;
        std::fs::write(&path, table.to_cache_string())?;
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn small_grid() -> RadialGrid {
        RadialGrid {
            r_min: 1e-4,
            r_max: 6.0,
            step: 0.05,
        }
    }

    #[test]
    fn gamma_integral_at_zero_shift() {
        // J_a(0) = Γ(a + 1)
        for &a in &[-0.6, 0.0, 1.5] {
            let v = ln_j(a, 0.0, 0.0).unwrap();
            assert!((v - ln_gamma(a + 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn half_order_bessel_closed_form() {
        // J_{−1/2}(b) = √π e^{−2√b}
        for &b in &[1e-6, 0.3, 4.0, 100.0] {
            let v = ln_j(-0.5, b, 0.0).unwrap();
            let exact = 0.5 * PI.ln() - 2.0 * b.sqrt();
            assert!((v - exact).abs() < 1e-12, "b = {b}");
        }
    }

    #[test]
    fn classical_rows_are_exponential() {
        for &r in &[1e-5, 0.01, 0.4, 2.0, 5.0] {
            let row = symbol_row(1.0, r).unwrap();
            let e = (-2.0 * PI * r).exp();
            assert!((row.m - e).abs() / e < 1e-12);
            assert!((row.dm + 2.0 * PI * e).abs() / (2.0 * PI * e) < 1e-12);
            assert!((row.q + 2.0 * PI * r * e).abs() / (2.0 * PI * r * e) < 1e-12);
        }
    }

    #[test]
    fn rows_solve_the_radial_equation() {
        // m'' + (1 − s)/r m' − 4π² m = 0
        for &s in &[0.3, 0.8, 1.5] {
            for &r in &[0.01, 0.2, 1.0, 3.0] {
                let row = symbol_row(s, r).unwrap();
                let ddm = (row.dq - row.dm) / r;
                let res = ddm + (1.0 - s) / r * row.dm - 4.0 * PI * PI * row.m;
                let scale = ddm.abs() + 4.0 * PI * PI * row.m;
                assert!(res.abs() / scale < 1e-10, "s = {s}, r = {r}");
            }
        }
    }

    #[test]
    fn interpolant_accuracy_and_monotonicity() {
        let grid = RadialGrid {
            step: DEFAULT_STEP,
            ..small_grid()
        };
        let sym = s_poisson_symbol(0.7, 1, grid).unwrap();
        assert_eq!(sym.value(0.0).unwrap(), 1.0);
        let mut prev = 1.0;
        for i in 0..400 {
            let r = 1e-4 * (5.99f64 / 1e-4).powf(i as f64 / 399.0);
            let v = sym.value(r).unwrap();
            assert!(v < prev);
            prev = v;
        }
        for &r in &[3e-4, 0.0123, 0.77, 2.345, 5.5] {
            let row = symbol_row(0.7, r).unwrap();
            assert!((sym.value(r).unwrap() - row.m).abs() / row.m < 1e-8, "m at {r}");
            assert!((sym.q(r).unwrap() - row.q).abs() / row.q.abs() < 1e-8, "q at {r}");
        }
        assert_eq!(sym.value(7.0).unwrap(), 0.0);
        assert!(matches!(sym.value(1e-5), Err(Error::OutsideTable { .. })));
    }

    #[test]
    fn cache_round_trip_is_exact() {
        let sym = s_poisson_symbol(1.3, 2, small_grid()).unwrap();
        let text = sym.to_cache_string();
        let back = PoissonSymbol::parse_cache(&text, "mem").unwrap();
        assert_eq!(back.rows(), sym.rows());
        assert_eq!(back.to_cache_string(), text);
    }

    #[test]
    fn corrupt_cache_names_source() {
        let sym = s_poisson_symbol(1.3, 1, small_grid()).unwrap();
        let mut text = sym.to_cache_string();
        text.push_str("1 2 3\n");
        match PoissonSymbol::parse_cache(&text, "/tmp/x.txt") {
            Err(Error::Cache { path, .. }) => assert_eq!(path, "/tmp/x.txt"),
            other => panic!("expected cache error, got {other:?}"),
        }
        assert!(PoissonSymbol::parse_cache("garbage", "g").is_err());
    }

    #[test]
    fn order_out_of_range() {
        assert!(s_poisson_symbol(2.0, 1, small_grid()).is_err());
        assert!(symbol_row(0.0, 1.0).is_err());
    }
}
