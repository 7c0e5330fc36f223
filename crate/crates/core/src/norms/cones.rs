//! Functionals over cones {|y − x| < t} and tents {|y − x| < r − t} of an
//! extension field: square functions, Carleson suprema, the tent pairing and
//! the nontangential supremum.
//!
//! Cone and tent integrals in y use the exact overlap of each cell with the
//! periodic disc (1-D) or a 16 × 16 sub-sampling of partially covered cells
//! (2-D), applied by FFT convolution. The t-integrals use the level weights.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::f64::consts::PI;

use super::balls::TentFamily;
use crate::error::{Error, Result};
use crate::extension::{ExtensionField, FieldSelector};
use crate::grid::{fft_forward, GridFunction, GridSpec};
use crate::multiplier::synthesize_real;

const SUBSAMPLE: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SquareMode {
    /// (∫ t^a |G(x, t)|² dt)^{1/2}
    Regular,
    /// (∫∫_{|y−x|<t} t^a |G(y, t)|² dy dt)^{1/2}
    Nontangential,
}

/// Measure of {y ∈ cell d : |y + mL| < ρ for some image m}, summed over images.
fn disc_weights(spec: &GridSpec, rho: f64) -> Vec<f64> {
    let n = spec.points();
    let h = spec.spacing();
    let l = spec.period();
    let images = (rho / l).ceil() as i64 + 1;
    let signed = |k: usize| if k < n / 2 { k as i64 } else { k as i64 - n as i64 };
    match spec.dim() {
        1 => (0..n)
            .map(|d| {
                (-images..=images)
                    .map(|m| {
                        let c = signed(d) as f64 * h + m as f64 * l;
                        ((c + 0.5 * h).min(rho) - (c - 0.5 * h).max(-rho)).max(0.0)
                    })
                    .sum()
            })
            .collect(),
        _ => {
            let half_diag = h * std::f64::consts::FRAC_1_SQRT_2;
            let cell = h * h;
            (0..spec.len())
                .into_par_iter()
                .map(|d| {
                    let [a, b] = spec.multi_index(d);
                    let (ca, cb) = (signed(a) as f64 * h, signed(b) as f64 * h);
                    let mut w = 0.0;
                    for mi in -images..=images {
                        let x = ca + mi as f64 * l;
                        if x.abs() - 0.5 * h >= rho {
                            continue;
                        }
                        for mj in -images..=images {
                            let y = cb + mj as f64 * l;
                            let dist = x.hypot(y);
                            if dist + half_diag <= rho {
                                w += cell;
                            } else if dist - half_diag < rho {
                                let mut hits = 0usize;
                                for p in 0..SUBSAMPLE {
                                    let u = x + ((p as f64 + 0.5) / SUBSAMPLE as f64 - 0.5) * h;
                                    for q in 0..SUBSAMPLE {
                                        let v = y + ((q as f64 + 0.5) / SUBSAMPLE as f64 - 0.5) * h;
                                        if u * u + v * v < rho * rho {
                                            hits += 1;
                                        }
                                    }
                                }
                                w += cell * hits as f64 / (SUBSAMPLE * SUBSAMPLE) as f64;
                            }
                        }
                    }
                    w
                })
                .collect()
        }
    }
}

/// x ↦ ∫_{|y−x|<ρ} g(y) dy on the torus.
fn disc_integral(g: &GridFunction, rho: f64) -> Result<GridFunction> {
    let spec = *g.spec();
    if rho <= 0.0 {
        return Ok(GridFunction::zeros(spec));
    }
    let w = GridFunction::from_vec_unchecked(spec, disc_weights(&spec, rho));
    let scale = spec.len() as f64;
    let symbol: Vec<Complex64> = fft_forward(&w)
        .coeffs()
        .iter()
        .map(|c| Complex64::new(c.re * scale, 0.0))
        .collect();
    synthesize_real(&fft_forward(g), &symbol, g.l2())
}

fn squared(field: &ExtensionField, level: usize, selector: FieldSelector) -> Result<GridFunction> {
    Ok(GridFunction::from_vec_unchecked(*field.spec(), field.squared_magnitude(level, selector)?))
}

/// Regular or nontangential square function of the selected quantity with weight t^a.
pub fn square_function(
    field: &ExtensionField,
    selector: FieldSelector,
    mode: SquareMode,
    weight_exponent: f64,
) -> Result<GridFunction> {
    let spec = *field.spec();
    let levels = field.levels();
    let per_level = (0..levels.len())
        .into_par_iter()
        .map(|i| {
            let t = levels.heights()[i];
            let g2 = squared(field, i, selector)?;
            let g2 = match mode {
                SquareMode::Regular => g2,
                SquareMode::Nontangential => disc_integral(&g2, t)?,
            };
            Ok(g2.scale(levels.weights()[i] * t * t.powf(weight_exponent)))
        })
        .collect::<Result<Vec<_>>>()?;
    let total = per_level.iter().fold(GridFunction::zeros(spec), |acc, g| acc.add(g));
    Ok(total.map(|v| v.max(0.0).sqrt()))
}

fn ball_measure(spec: &GridSpec, r: f64) -> f64 {
    match spec.dim() {
        1 => 2.0 * r,
        _ => PI * r * r,
    }
}

/// sup over tents of (|B|⁻¹ ∫∫_{T(B)} t^w |G|² dy dt)^{1/2}, tents taken from `tents`.
pub fn carleson_sup(field: &ExtensionField, w: f64, selector: FieldSelector, tents: &TentFamily) -> Result<f64> {
    let spec = *field.spec();
    let levels = field.levels();
    let centers = tents.centers(&spec);
    let g2: Vec<GridFunction> = (0..levels.len())
        .map(|i| squared(field, i, selector))
        .collect::<Result<_>>()?;
    let sups = tents
        .radii()
        .par_iter()
        .map(|&r| {
            let mut acc = GridFunction::zeros(spec);
            for (i, &t) in levels.heights().iter().enumerate() {
                if t >= r {
                    break;
                }
                let part = disc_integral(&g2[i], r - t)?;
                acc = acc.add(&part.scale(levels.weights()[i] * t * t.powf(w)));
            }
            let best = centers.iter().map(|&x| acc.values()[x]).fold(0.0, f64::max);
            Ok((best.max(0.0) / ball_measure(&spec, r)).sqrt())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(sups.into_iter().fold(0.0, f64::max))
}

/// Both sides of ∫∫|ΦG| dy dt/t ≤ C · carleson(Φ) · ‖nontangential square of G‖₁.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TentPairing {
    pub lhs: f64,
    /// sup over tents of (|B|⁻¹ ∫∫_{T(B)} |Φ|² dy dt/t)^{1/2}
    pub carleson: f64,
    /// ‖(∫∫_{|y−x|<t} |G|² dy dt/t^{n+1})^{1/2}‖₁
    pub square_l1: f64,
    /// lhs / (carleson · square_l1); 0 when the left side vanishes.
    pub ratio: f64,
}

pub fn tent_pairing_bound_check(
    phi: &ExtensionField,
    phi_selector: FieldSelector,
    g: &ExtensionField,
    g_selector: FieldSelector,
    tents: &TentFamily,
) -> Result<TentPairing> {
    let spec = *phi.spec();
    if g.spec() != &spec || g.levels() != phi.levels() {
        return Err(Error::GridMismatch("tent pairing needs both fields on the same grid and levels".into()));
    }
    let levels = phi.levels();
    let mut lhs = 0.0;
    for i in 0..levels.len() {
        let a = phi.squared_magnitude(i, phi_selector)?;
        let b = g.squared_magnitude(i, g_selector)?;
        let cross: f64 = a.iter().zip(&b).map(|(x, y)| (x * y).sqrt()).sum();
        // dt/t against Σ wᵢ tᵢ
        lhs += levels.weights()[i] * cross * spec.cell_volume();
    }
    let carleson = carleson_sup(phi, -1.0, phi_selector, tents)?;
    let square = square_function(g, g_selector, SquareMode::Nontangential, -(spec.dim() as f64) - 1.0)?;
    let square_l1 = square.values().iter().sum::<f64>() * spec.cell_volume();
    let ratio = if lhs == 0.0 { 0.0 } else { lhs / (carleson * square_l1) };
    if !ratio.is_finite() {
        return Err(Error::NonFinite {
            op: "tent_pairing_bound_check".into(),
        });
    }
    Ok(TentPairing {
        lhs,
        carleson,
        square_l1,
        ratio,
    })
}

/// Cyclic sliding maximum of `row` over windows [j − w, j + w].
fn window_max(row: &[f64], w: usize) -> Vec<f64> {
    let n = row.len();
    if 2 * w + 1 >= n {
        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        return vec![m; n];
    }
    let mut out = vec![0.0; n];
    let mut dq: VecDeque<usize> = VecDeque::new();
    // position p covers index p mod n; window for j ends at j + w
    for p in 0..n + 2 * w {
        let v = row[p % n];
        while dq.back().is_some_and(|&b| row[b % n] <= v) {
            dq.pop_back();
        }
        dq.push_back(p);
        if p >= 2 * w {
            let start = p - 2 * w;
            while dq.front().is_some_and(|&f| f < start) {
                dq.pop_front();
            }
            out[(start + w) % n] = row[dq.front().copied().expect("non-empty") % n];
        }
    }
    out
}

/// x ↦ sup over levels t and cells y with |y − x| < t of |G(y, t)|.
pub fn cone_sup(field: &ExtensionField, selector: FieldSelector) -> Result<GridFunction> {
    let spec = *field.spec();
    let n = spec.points();
    let h = spec.spacing();
    let levels = field.levels();
    let per_level = (0..levels.len())
        .into_par_iter()
        .map(|i| {
            let t = levels.heights()[i];
            let g: Vec<f64> = field.squared_magnitude(i, selector)?.into_iter().map(f64::sqrt).collect();
            // half-width in cells of the disc row at offset distance d2
            let reach = |d2: f64| -> Option<usize> {
                if d2 >= t * t {
                    return None;
                }
                let w = ((t * t - d2).sqrt() / h).ceil() as usize;
                Some(if (w as f64 * h).powi(2) + d2 >= t * t { w.saturating_sub(1) } else { w })
            };
            Ok(match spec.dim() {
                1 => window_max(&g, reach(0.0).expect("t > 0")),
                _ => {
                    let mut out = vec![0.0f64; spec.len()];
                    let mut cache: Vec<Option<(usize, Vec<f64>)>> = Vec::new();
                    for di in 0..n {
                        let wrap = di.min(n - di) as f64 * h;
                        let Some(w) = reach(wrap * wrap) else { continue };
                        let rows = match cache.iter().flatten().find(|(cw, _)| *cw == w) {
                            Some((_, r)) => r.clone(),
                            None => {
                                let r: Vec<f64> = (0..n).flat_map(|row| window_max(&g[row * n..(row + 1) * n], w)).collect();
                                cache.push(Some((w, r.clone())));
                                r
                            }
                        };
                        for xi in 0..n {
                            let src = (xi + di) % n;
                            for xj in 0..n {
                                let v = rows[src * n + xj];
                                let o = &mut out[xi * n + xj];
                                if v > *o {
                                    *o = v;
                                }
                            }
                        }
                    }
                    out
                }
            })
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let mut best = vec![0.0f64; spec.len()];
    for level in per_level {
        for (b, v) in best.iter_mut().zip(level) {
            *b = b.max(v);
        }
    }
    Ok(GridFunction::from_vec_unchecked(spec, best))
}
