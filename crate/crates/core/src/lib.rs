//! Numerical harness for fractional harmonic extensions, singular integrals
//! and commutator estimates on periodic grids.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod commutators;
pub mod extension;
pub mod grid;
pub mod multiplier;
pub mod norms;
pub mod singular;
pub mod special;

pub use error::{Error, Result};
pub use grid::{GridFunction, GridSpec, Spectrum, TestFunctionDescriptor, TestFunctionKind};
