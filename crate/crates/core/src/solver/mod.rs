//! The paracontrolled fixed-point problem for `(v, w)` and the classical
//! mild solver used to cross-check it.
//!
//! With a driver in hand the unknown is split as `u = X + Y + v + w`, and
//! `(v, w)` solves `(v, w) = M(v, w)`. [`picard_solve`] iterates `M` from
//! zero; [`reconstruct`] returns `u`.

mod classical;
mod exponents;
mod maps;
mod picard;

use crate::field::SpectralField;
use crate::timefield::TimeField;

pub use classical::{classical_mild_solve, nonlinearity, Forcing};
pub use exponents::{exponents, Exponents};
pub use maps::{com, f_map, g_map, g_terms, m_map, phi, reconstruct, GTerms, Instant};
pub use picard::{picard_solve, solution_norms, PicardOptions, SolverReport};

/// A pair `(v, w)` with its initial data.
#[derive(Debug, Clone)]
pub struct SolutionPair {
    pub v: TimeField,
    pub w: TimeField,
    pub v0: SpectralField,
    pub w0: SpectralField,
    pub exponents: Exponents,
}

/// Sup-in-time distance between two pairs, `max(|v - v'|, |w - w'|)`.
pub fn pair_distance(a: &SolutionPair, b: &SolutionPair) -> crate::Result<f64> {
    Ok(a.v.sup_diff(&b.v)?.max(a.w.sup_diff(&b.w)?))
}
