//! Discrete balls on the torus: BMO seminorm and Hardy–Littlewood maximal function.
//!
//! A cell belongs to the ball B(x, r) when its center lies at torus distance
//! strictly less than r from x; the smallest ball, r = h, is the cell itself.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadiusSet {
    /// 2^m h for m = 0..log₂(N/2).
    Dyadic,
    /// k h for k = 1..N/2.
    Linear,
}

/// Centers and radii over which ball and tent suprema are taken.
#[derive(Debug, Clone, PartialEq)]
pub struct TentFamily {
    radii: Vec<f64>,
    stride: usize,
}

impl TentFamily {
    pub fn new(spec: &GridSpec, set: RadiusSet) -> Self {
        let h = spec.spacing();
        let half = spec.points() / 2;
        let radii = match set {
            RadiusSet::Dyadic => (0..=half.trailing_zeros()).map(|m| h * (1usize << m) as f64).collect(),
            RadiusSet::Linear => (1..=half).map(|k| h * k as f64).collect(),
        };
        Self { radii, stride: 1 }
    }

    pub fn dyadic(spec: &GridSpec) -> Self {
        Self::new(spec, RadiusSet::Dyadic)
    }

    /// Arbitrary radii in (0, L/2].
    pub fn with_radii(spec: &GridSpec, mut radii: Vec<f64>) -> Result<Self> {
        let half = 0.5 * spec.period();
        if let Some(&r) = radii.iter().find(|&&r| !(r > 0.0 && r <= half * (1.0 + 1e-12))) {
            return Err(Error::range("tent_family", format!("radius {r} outside (0, L/2]")));
        }
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        Ok(Self { radii, stride: 1 })
    }

    /// Keeps every `stride`-th center along each axis.
    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride.max(1);
        self
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub(crate) fn centers(&self, spec: &GridSpec) -> Vec<usize> {
        (0..spec.len())
            .filter(|&i| spec.multi_index(i).iter().take(spec.dim()).all(|&k| k % self.stride == 0))
            .collect()
    }
}

/// Row segments (row offset, half-width) covering the discrete ball of radius r.
fn ball_rows(spec: &GridSpec, r: f64) -> Vec<(usize, usize)> {
    let n = spec.points();
    let h = spec.spacing();
    let reach = |d2: f64| -> Option<usize> {
        if d2 >= r * r {
            return None;
        }
        let w = ((r * r - d2).sqrt() / h).ceil() as usize;
        let w = if (w as f64 * h).powi(2) + d2 >= r * r { w.saturating_sub(1) } else { w };
        Some(w.min((n - 1) / 2))
    };
    if spec.dim() == 1 {
        reach(0.0).map(|w| vec![(0, w)]).unwrap_or_default()
    } else {
        (0..n)
            .filter_map(|di| {
                let wrap = di.min(n - di) as f64 * h;
                reach(wrap * wrap).map(|w| (di, w))
            })
            .collect()
    }
}

/// Each row of f repeated three times, so that any cyclic window is a contiguous slice.
fn tripled_rows(spec: &GridSpec, v: &[f64]) -> Vec<Vec<f64>> {
    let n = spec.points();
    let rows = if spec.dim() == 1 { 1 } else { n };
    (0..rows)
        .map(|row| (0..3 * n).map(|k| v[row * n + k % n]).collect())
        .collect()
}

/// sup over the family of |B|⁻¹ Σ_B |f − f_B| hⁿ.
pub fn bmo_seminorm(f: &GridFunction, tents: &TentFamily) -> f64 {
    let spec = *f.spec();
    let n = spec.points();
    let rows = tripled_rows(&spec, f.values());
    let centers = tents.centers(&spec);
    tents
        .radii()
        .iter()
        .map(|&r| {
            let shape = ball_rows(&spec, r);
            let k = shape.iter().map(|&(_, w)| 2 * w + 1).sum::<usize>() as f64;
            centers
                .par_iter()
                .map(|&x| {
                    let [xi, xj] = spec.multi_index(x);
                    let (row0, col) = if spec.dim() == 1 { (0, xi) } else { (xi, xj) };
                    let segment = |di: usize, w: usize| {
                        let row = &rows[(row0 + di) % rows.len()];
                        &row[col + n - w..=col + n + w]
                    };
                    let mean = shape.iter().map(|&(di, w)| segment(di, w).iter().sum::<f64>()).sum::<f64>() / k;
                    shape
                        .iter()
                        .map(|&(di, w)| segment(di, w).iter().map(|v| (v - mean).abs()).sum::<f64>())
                        .sum::<f64>()
                        / k
                })
                .reduce(|| 0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// Mf(x) = sup_r |B(x, r)|⁻¹ Σ_B |f| hⁿ over every radius k h, k = 1..N/2.
pub fn maximal_function(f: &GridFunction) -> GridFunction {
    maximal_function_with(f, &TentFamily::new(f.spec(), RadiusSet::Linear))
}

/// Maximal function over the radii of `tents`, at every grid point. Balls
/// large enough to cover the torus are the torus itself, so the global
/// average of |f| always takes part.
pub fn maximal_function_with(f: &GridFunction, tents: &TentFamily) -> GridFunction {
    let spec = *f.spec();
    let n = spec.points();
    let abs: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
    let global = abs.iter().sum::<f64>() / abs.len() as f64;
    // cyclic prefix sums along the last axis
    let rows = if spec.dim() == 1 { 1 } else { n };
    let prefix: Vec<Vec<f64>> = (0..rows)
        .map(|row| {
            let mut p = vec![0.0; 3 * n + 1];
            for k in 0..3 * n {
                p[k + 1] = p[k] + abs[row * n + k % n];
            }
            p
        })
        .collect();
    let shapes: Vec<Vec<(usize, usize)>> = tents.radii().iter().map(|&r| ball_rows(&spec, r)).collect();
    let values = (0..spec.len())
        .into_par_iter()
        .map(|x| {
            let [xi, xj] = spec.multi_index(x);
            let (row0, col) = if spec.dim() == 1 { (0, xi) } else { (xi, xj) };
            shapes
                .iter()
                .filter(|s| !s.is_empty())
                .map(|shape| {
                    let mut sum = 0.0;
                    let mut count = 0usize;
                    for &(di, w) in shape {
                        let row = (row0 + di) % rows;
                        let p = &prefix[row];
                        let lo = col + n - w;
                        sum += p[lo + 2 * w + 1] - p[lo];
                        count += 2 * w + 1;
                    }
                    sum / count as f64
                })
                .fold(global, f64::max)
        })
        .collect();
    GridFunction::from_vec_unchecked(spec, values)
}
