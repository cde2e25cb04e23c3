use std::collections::BTreeMap;

use serde::Serialize;

use crate::enhance::Driver;
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::partition::DyadicPartition;
use crate::timefield::{weighted_l_norm, TimeField};

use super::maps::m_map;
use super::{Exponents, SolutionPair};

/// Stopping and restart rules of the Picard iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Sup norm of an iterate beyond which `T` is halved.
    pub blowup: f64,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 50, blowup: 1e6 }
    }
}

/// Outcome of [`picard_solve`]. `residuals` belong to the final attempt.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverReport {
    #[serde(rename = "T_star")]
    pub t_star: f64,
    pub iterations: usize,
    pub residuals: Vec<f64>,
    pub norms: BTreeMap<String, f64>,
    pub converged: bool,
    pub halvings: usize,
}

enum Attempt {
    Converged(SolutionPair, Vec<f64>),
    Failed,
}

fn attempt(
    driver: &Driver,
    v0: &SpectralField,
    w0: &SpectralField,
    exps: &Exponents,
    opts: &PicardOptions,
) -> Result<Attempt> {
    let grid = driver.grid();
    let zero = TimeField::zeros(grid, driver.x.t0(), driver.dt(), driver.len());
    let mut cur = SolutionPair {
        v: zero.clone(),
        w: zero,
        v0: v0.clone(),
        w0: w0.clone(),
        exponents: *exps,
    };
    let mut residuals = Vec::new();
    for _ in 0..opts.max_iter {
        let next = m_map(driver, &cur.v, &cur.w, v0, w0, exps)?;
        let size = next.v.sup_norm().max(next.w.sup_norm());
        if !(size <= opts.blowup) {
            return Ok(Attempt::Failed);
        }
        let r = next.v.sup_diff(&cur.v)?.max(next.w.sup_diff(&cur.w)?);
        residuals.push(r);
        cur = next;
        if r < opts.tol {
            return Ok(Attempt::Converged(cur, residuals));
        }
    }
    Ok(Attempt::Failed)
}

/// Picard iteration `(v, w) <- M(v, w)` from `(0, 0)` on `[0, T]`, halving
/// `T` on divergence or blow-up.
pub fn picard_solve(
    driver: &Driver,
    v0: &SpectralField,
    w0: &SpectralField,
    exps: &Exponents,
    t_request: f64,
    opts: &PicardOptions,
) -> Result<(SolutionPair, SolverReport)> {
    if !(t_request > 0.0 && t_request <= 1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!("T = {t_request} not in (0, 1]")));
    }
    if !(opts.tol > 0.0) || opts.max_iter == 0 {
        return Err(Error::InvalidParameter("tol must be positive and max_iter nonzero".into()));
    }
    let dt = driver.dt();
    let available = driver.len() - 1;
    let mut steps = (t_request / dt).round() as usize;
    if steps > available {
        return Err(Error::InvalidParameter(format!(
            "T = {t_request} exceeds the driver horizon {}",
            available as f64 * dt
        )));
    }
    let mut halvings = 0;
    loop {
        if steps < 4 {
            return Err(Error::NoLocalSolution { min_t: 4.0 * dt });
        }
        let d = driver.truncate(steps + 1);
        if let Attempt::Converged(sol, residuals) = attempt(&d, v0, w0, exps, opts)? {
            let norms = solution_norms(&sol, exps)?;
            let report = SolverReport {
                t_star: steps as f64 * dt,
                iterations: residuals.len(),
                residuals,
                norms,
                converged: true,
                halvings,
            };
            return Ok((sol, report));
        }
        steps /= 2;
        halvings += 1;
    }
}

/// Weighted norms of `v` and `w` in their solution spaces, from `t = dt` on.
pub fn solution_norms(sol: &SolutionPair, exps: &Exponents) -> Result<BTreeMap<String, f64>> {
    let part = DyadicPartition::new(sol.v.grid());
    let (ev, av, dv) = exps.v_space();
    let (ew, aw, dw) = exps.w_space();
    let mut norms = BTreeMap::new();
    norms.insert("v".to_string(), weighted_l_norm(&sol.v, ev, av, dv, exps.theta, &part)?);
    norms.insert("w".to_string(), weighted_l_norm(&sol.w, ew, aw, dw, exps.theta, &part)?);
    norms.insert("v_sup".to_string(), sol.v.sup_norm());
    norms.insert("w_sup".to_string(), sol.w.sup_norm());
    Ok(norms)
}
