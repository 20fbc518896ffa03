//! Lumped-parameter simulator for variable-flux memory motors.
//!
//! A pole carries one high-coercivity (HCF) magnet and two low-coercivity
//! (LCF) magnets. Each magnet is discretized into elements that follow a
//! rounded-knee major loop and a single active recoil line. Elements are
//! solved against current-shifted load lines, a five-interval
//! magnetization protocol is run, and four magnetization-state (MS)
//! measures are reported over the `(i_d, i_q)` plane.
//!
//! Units are SI throughout: fields in A/m, flux densities in tesla,
//! currents in amperes, flux linkage in weber.

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod config;
pub mod error;
pub mod heatmap;
pub mod material;
pub mod metrics;
pub mod motor;
pub mod protocol;
pub mod sweep;

pub use error::{Error, Result};

/// Permeability of free space, H/m.
pub const MU_0: f64 = 4.0e-7 * std::f64::consts::PI;
