//! Littlewood-Paley analysis: the dyadic partition of unity, blocks, and
//! Besov-Holder (`B^alpha_{inf,inf}`) norm estimators.

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Grid, SpectralField};
use crate::fft::Fft2;

fn bump(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

/// Smooth radial cutoff: `1` on `[0, 1]`, `0` on `[4/3, inf)`, C-infinity
/// and nonincreasing in between.
pub fn psi(r: f64) -> f64 {
    let a = bump(4.0 / 3.0 - r);
    let b = bump(r - 1.0);
    if b == 0.0 {
        1.0
    } else if a == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// Multipliers `rho_j`, `j = -1..=j_max`, evaluated on every retained mode.
#[derive(Debug, Clone)]
pub struct DyadicPartition {
    grid: Grid,
    j_max: i32,
    rho: Vec<Vec<f64>>,
}

impl DyadicPartition {
    /// `rho_{-1}(k) = psi(|k|)`, `rho_j(k) = psi(2^{-j-1}|k|) - psi(2^{-j}|k|)`;
    /// `j_max` is the smallest `j` with `2^{j+1} >= max |k|`, so the
    /// telescoping sum reaches one on the whole grid.
    pub fn new(grid: Grid) -> Self {
        let k_max = grid.k_max();
        let mut j_max = 0;
        while 2f64.powi(j_max + 1) < k_max {
            j_max += 1;
        }
        let abs_k = grid.abs_k_table();
        let mut rho = Vec::with_capacity(j_max as usize + 2);
        rho.push(abs_k.iter().map(|&r| psi(r)).collect());
        for j in 0..=j_max {
            let outer = 2f64.powi(-j - 1);
            let inner = 2f64.powi(-j);
            rho.push(
                abs_k
                    .iter()
                    .map(|&r| psi(outer * r) - psi(inner * r))
                    .collect(),
            );
        }
        Self { grid, j_max, rho }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    /// Number of blocks, `j_max + 2`.
    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    /// Multiplier table of block `j`.
    pub fn rho(&self, j: i32) -> Result<&[f64]> {
        self.check(j)?;
        Ok(&self.rho[(j + 1) as usize])
    }

    fn check(&self, j: i32) -> Result<()> {
        if j < -1 || j > self.j_max {
            return Err(Error::BlockOutOfRange { j, j_max: self.j_max });
        }
        Ok(())
    }

    /// `Delta_j f`.
    pub fn block(&self, f: &SpectralField, j: i32) -> Result<SpectralField> {
        Ok(f.mul_real_table(self.rho(j)?))
    }

    /// `S_j f = sum_{m <= j-1} Delta_m f`. `S_{-1} f = 0`.
    pub fn low_pass(&self, f: &SpectralField, j: i32) -> Result<SpectralField> {
        if j < -1 || j > self.j_max + 1 {
            return Err(Error::BlockOutOfRange { j, j_max: self.j_max });
        }
        let mut out = SpectralField::zeros(f.grid());
        for m in -1..j {
            out += &self.block(f, m)?;
        }
        Ok(out)
    }

    /// `Delta_j f`, or `S_j f` when `cumulative` is set.
    pub fn lp_block(&self, f: &SpectralField, j: i32, cumulative: bool) -> Result<SpectralField> {
        if cumulative {
            self.low_pass(f, j)
        } else {
            self.block(f, j)
        }
    }

    /// Lattice suprema `max_x |Delta_j f(x)|` for `j = -1..=j_max` (index `j + 1`).
    pub fn block_sups(&self, f: &SpectralField) -> Vec<f64> {
        let n = self.grid.n();
        let plan = Fft2::plan(n);
        let mut sups = vec![0.0; self.rho.len()];
        // Two real blocks per complex transform.
        let mut j = 0;
        while j < self.rho.len() {
            let second = j + 1 < self.rho.len();
            let mut data: Vec<Complex64> = f
                .coeffs()
                .iter()
                .enumerate()
                .map(|(idx, c)| {
                    let a = c * self.rho[j][idx];
                    if second {
                        let b = c * self.rho[j + 1][idx];
                        a + Complex64::new(-b.im, b.re)
                    } else {
                        a
                    }
                })
                .collect();
            plan.inverse(&mut data);
            sups[j] = data.iter().fold(0.0f64, |m, c| m.max(c.re.abs()));
            if second {
                sups[j + 1] = data.iter().fold(0.0f64, |m, c| m.max(c.im.abs()));
            }
            j += 2;
        }
        sups
    }

    /// Estimator of `||f||_{C^alpha}`: `max_j 2^{j alpha} max_x |Delta_j f(x)|`.
    pub fn besov_norm(&self, f: &SpectralField, alpha: f64) -> f64 {
        besov_from_sups(&self.block_sups(f), alpha)
    }

    /// Empirical regularity exponent: minus the least-squares slope of
    /// `log2 max|Delta_j f|` against `j` over `[j_lo, j_hi]`.
    pub fn fit_regularity(&self, f: &SpectralField, j_lo: i32, j_hi: i32) -> Result<f64> {
        if j_lo < 1 || j_hi > self.j_max - 1 || j_hi - j_lo < 3 {
            return Err(Error::InvalidFitRange {
                lo: j_lo,
                hi: j_hi,
                j_max: self.j_max,
            });
        }
        fit_slope(&self.block_sups(f), j_lo, j_hi)
    }
}

/// `max_j 2^{j alpha} sups[j + 1]`.
pub fn besov_from_sups(sups: &[f64], alpha: f64) -> f64 {
    sups.iter()
        .enumerate()
        .map(|(i, s)| 2f64.powf((i as f64 - 1.0) * alpha) * s)
        .fold(0.0, f64::max)
}

/// Regularity fit on a precomputed block profile (index `j + 1`), without the
/// range preconditions of [`DyadicPartition::fit_regularity`].
pub fn fit_slope(sups: &[f64], j_lo: i32, j_hi: i32) -> Result<f64> {
    let pts: Vec<(f64, f64)> = (j_lo..=j_hi)
        .map(|j| (j as f64, sups[(j + 1) as usize]))
        .collect();
    if pts.iter().any(|&(_, s)| !(s > 0.0)) {
        return Err(Error::NoSignal);
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1.log2()).sum::<f64>() / m;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(x, s) in &pts {
        sxy += (x - mx) * (s.log2() - my);
        sxx += (x - mx) * (x - mx);
    }
    Ok(-sxy / sxx)
}
