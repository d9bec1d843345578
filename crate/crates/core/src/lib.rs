//! Scattering data, bound-state ladders and squeezed point-interaction limits
//! of a one-dimensional double-layer potential.
//!
//! Potentials are in nm⁻² and lengths in nm (ħ²/2m* = 1); see [`structure::UnitSystem`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bound;
pub mod error;
pub mod kernels;
pub mod limits;
pub mod oracle;
mod par;
pub mod roots;
pub mod squeeze;
pub mod structure;
pub mod xfer;

pub use error::{Error, ErrorKind, Result};
pub use structure::{convert_energy, validate_spec, DoubleLayerSpec, LayerSpec, UnitSystem, Wavenumber};
