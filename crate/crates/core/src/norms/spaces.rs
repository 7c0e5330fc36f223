//! Continuous Besov and Triebel–Lizorkin functionals built from the
//! s-harmonic extension, with t truncated to the supplied levels.

use serde::{Deserialize, Serialize};

use super::lp_norm;
use crate::error::{Error, Result};
use crate::extension::{extend_field, DerivativeFlags, FieldSelector, PoissonSymbol, TLevels};
use crate::grid::GridFunction;
use crate::multiplier::frac_laplacian;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceKind {
    /// L^q(dt) of Lᵖ(dx)
    Besov,
    /// Lᵖ(dx) of L^q(dt)
    Triebel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "type")]
pub enum SpaceDerivative {
    /// t^{β} P_t (−Δ)^{β/2} f, with 0 < β ≤ 1.
    FracLaplacian { beta: f64 },
    /// t ∂_t P_t f
    Time,
    /// t |∇_x P_t f|
    Space,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceParams {
    pub kind: SpaceKind,
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
    pub derivative: SpaceDerivative,
}

impl SpaceParams {
    fn check(&self, s: f64) -> Result<()> {
        let op = "space_functional";
        if !(self.p > 0.0 && self.q > 0.0) {
            return Err(Error::range(op, format!("p = {}, q = {} must lie in (0, ∞]", self.p, self.q)));
        }
        if self.kind == SpaceKind::Triebel && self.p == f64::INFINITY {
            return Err(Error::range(op, "the Triebel–Lizorkin form requires p ≠ ∞"));
        }
        match self.derivative {
            SpaceDerivative::FracLaplacian { beta } => {
                if !(beta > self.alpha.max(0.0)) {
                    return Err(Error::range(op, format!("β = {beta} must exceed max(α, 0) with α = {}", self.alpha)));
                }
                if beta > 1.0 {
                    return Err(Error::range(op, format!("β = {beta} must not exceed 1")));
                }
            }
            SpaceDerivative::Time => {
                if !(self.alpha < s) {
                    return Err(Error::range(op, format!("α = {} must be below s = {s} for the t-derivative", self.alpha)));
                }
            }
            SpaceDerivative::Space => {
                if !(self.alpha < 1.0) {
                    return Err(Error::range(op, format!("α = {} must be below 1 for the x-gradient", self.alpha)));
                }
            }
        }
        if !self.alpha.is_finite() {
            return Err(Error::range(op, "α must be finite"));
        }
        Ok(())
    }
}

/// The Besov or Triebel–Lizorkin functional of f with the integrand
/// |t^{−1/q−α+γ} D P_t f|, where D and γ come from `params.derivative`.
pub fn space_functional(
    f: &GridFunction,
    params: &SpaceParams,
    symbol: &PoissonSymbol,
    levels: &TLevels,
) -> Result<f64> {
    params.check(symbol.s())?;
    let spec = *f.spec();
    let (field, selector, gamma) = match params.derivative {
        SpaceDerivative::FracLaplacian { beta } => {
            let g = frac_laplacian(f, beta)?;
            (extend_field(&g, symbol, levels, DerivativeFlags::NONE)?, FieldSelector::Value, beta)
        }
        SpaceDerivative::Time => {
            let flags = DerivativeFlags {
                time: true,
                space: false,
            };
            (extend_field(f, symbol, levels, flags)?, FieldSelector::TimeDerivative, 1.0)
        }
        SpaceDerivative::Space => {
            let flags = DerivativeFlags {
                time: false,
                space: true,
            };
            (extend_field(f, symbol, levels, flags)?, FieldSelector::SpatialGradient, 1.0)
        }
    };
    let (p, q) = (params.p, params.q);
    let inv_q = if q == f64::INFINITY { 0.0 } else { 1.0 / q };
    let expo = -inv_q - params.alpha + gamma;
    let ts = levels.heights();
    // |G(·, tᵢ)| per level
    let slices: Vec<GridFunction> = (0..levels.len())
        .map(|i| {
            let m = field.squared_magnitude(i, selector)?;
            let w = ts[i].powf(expo);
            Ok(GridFunction::from_vec_unchecked(spec, m.into_iter().map(|v| v.sqrt() * w).collect()))
        })
        .collect::<Result<_>>()?;
    let value = match params.kind {
        SpaceKind::Besov => {
            let inner: Vec<f64> = slices.iter().map(|g| lp_power(g, p)).collect::<Result<_>>()?;
            if q == f64::INFINITY {
                inner.into_iter().fold(0.0, f64::max)
            } else {
                let samples: Vec<f64> = inner.iter().map(|v| v.powf(q)).collect();
                levels.integrate(&samples).powf(1.0 / q)
            }
        }
        SpaceKind::Triebel => {
            let inner: Vec<f64> = (0..spec.len())
                .map(|x| {
                    let col = slices.iter().map(|g| g.values()[x]);
                    if q == f64::INFINITY {
                        col.fold(0.0, f64::max)
                    } else {
                        let samples: Vec<f64> = col.map(|v| v.powf(q)).collect();
                        levels.integrate(&samples).powf(1.0 / q)
                    }
                })
                .collect();
            lp_power(&GridFunction::from_vec_unchecked(spec, inner), p)?
        }
    };
    if !value.is_finite() {
        return Err(Error::NonFinite {
            op: "space_functional".into(),
        });
    }
    Ok(value)
}

/// (Σ |g|^p hⁿ)^{1/p} for any p ∈ (0, ∞].
fn lp_power(g: &GridFunction, p: f64) -> Result<f64> {
    if p >= 1.0 {
        return lp_norm(g, p);
    }
    let sum: f64 = g.values().iter().map(|v| v.abs().powf(p)).sum();
    Ok((sum * g.spec().cell_volume()).powf(1.0 / p))
}
