//! Shrinking targets on the Przytycki–Urbański family of self-affine fractals.
//!
//! The crate is organised bottom-up: [`symbolic`] holds codings and the two
//! iterated function systems, [`scales`] the integer scale functions and the
//! closed-form dimension values, [`bernoulli`] the projected Bernoulli
//! convolution, [`septrans`] the separation and transversality scanners, and
//! [`targets`] the covers, Cantor measures and probes built on top of them.

pub mod bernoulli;
pub mod cli;
pub mod error;
pub mod fit;
pub mod scales;
pub mod septrans;
pub mod symbolic;
pub mod targets;

pub use error::{Error, Result};
pub use symbolic::{CylinderRect, Params, Point, Regime, SymbolWord};
