//! Simulation and analysis toolkit for flux-biased dc-SQUID array
//! transmission lines as analogue space-times.
//!
//! A travelling flux pulse lowers the propagation velocity of the array
//! behind its front. When the pulse moves faster than the biased line but
//! slower than the unbiased one, the comoving frame contains a horizon, and
//! the velocity gradient there sets a Hawking temperature.
//!
//! Modules:
//! - [`circuit`]: junction and SQUID physics, validity audit, SQUID ODEs
//! - [`bias`]: the space-time flux bias
//! - [`lattice`]: time-domain solver for the discrete line
//! - [`geometry`]: effective metric, horizons, temperature and photon budget
//! - [`dispersion`]: analytic and measured dispersion
//! - [`experiments`]: canned reproductions, trapping demo, parameter sweeps
//! - [`config`]: JSON run configuration

pub mod bias;
pub mod circuit;
pub mod config;
pub mod constants;
pub mod dispersion;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod io;
pub mod lattice;
pub mod numeric;

pub use error::{Error, Result};
