//! Paracontrolled calculus on the two-dimensional torus.
//!
//! The crate is organized bottom-up:
//!
//! * [`field`], [`partition`], [`timefield`]: Fourier representation,
//!   Littlewood-Paley blocks and Besov-Holder norm estimators.
//! * [`calculus`]: products, paraproducts, the commutator `C`, Riesz
//!   transforms and derivatives.
//! * [`semigroup`]: the fractional heat semigroup and the Duhamel map `I`.
//! * [`noise`], [`enhance`]: mollified space-time white noise, the
//!   stationary Ornstein-Uhlenbeck process and its enhancement to a driver.
//! * [`solver`]: the paracontrolled fixed-point system and the classical
//!   mild reference solver.
//! * [`config`], [`experiments`], [`snapshot`]: the command-line harness.

pub mod calculus;
pub mod config;
pub mod enhance;
pub mod error;
mod fft;
pub mod experiments;
pub mod field;
pub mod partition;
pub mod noise;
pub mod semigroup;
pub mod snapshot;
pub mod solver;
pub mod timefield;

pub use error::{Error, Result};
pub use field::{Grid, SpectralField};
pub use partition::DyadicPartition;
pub use timefield::{TimeField, TimeNormKind, TimeNormSpec};
