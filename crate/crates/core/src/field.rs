//! Fourier representation of real fields on the torus `T^2 = R^2 / Z^2`.
//!
//! A [`SpectralField`] stores the `n x n` coefficients `u_hat(k)` in FFT order,
//! normalized so that `u_hat(k) = \int u e_{-k} dx` for the band-limited
//! interpolant of the lattice samples. Axis 0 carries `k^1` (and `x^1`),
//! axis 1 carries `k^2`.
//!
//! Nyquist modes (`k^i = -n/2`) are kept by the plain transforms so that the
//! lattice round trip is exact, but they are dropped by every nonlinear
//! operation and by odd multipliers (derivatives, Riesz transforms): on the
//! lattice they cannot carry a real odd mode.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::Fft2;

/// Resolution of the torus discretization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    n: usize,
    pad_num: usize,
    pad_den: usize,
}

impl Grid {
    /// Grid with the default 3/2 padding used for alias-free products.
    pub fn new(n: usize) -> Result<Self> {
        Self::with_padding(n, 3, 2)
    }

    pub fn with_padding(n: usize, pad_num: usize, pad_den: usize) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n = {n} must be a power of two >= 16"
            )));
        }
        if pad_den == 0 || 2 * pad_num < 3 * pad_den {
            return Err(Error::InvalidGrid(format!(
                "pad factor {pad_num}/{pad_den} below 3/2"
            )));
        }
        if (n * pad_num) % pad_den != 0 || (n * pad_num / pad_den) % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "pad factor {pad_num}/{pad_den} does not give an even padded size for n = {n}"
            )));
        }
        Ok(Self { n, pad_num, pad_den })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of lattice points / coefficients.
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Size of the padded lattice used for products.
    pub fn padded(&self) -> usize {
        self.n * self.pad_num / self.pad_den
    }

    /// Signed frequency of FFT index `a`.
    #[inline]
    pub fn freq(&self, a: usize) -> i64 {
        let n = self.n as i64;
        let a = a as i64;
        if a < n / 2 {
            a
        } else {
            a - n
        }
    }

    /// FFT index of signed frequency `k` (taken modulo `n`).
    #[inline]
    pub fn index_of(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    /// `(k^1, k^2)` for flat coefficient index `idx`.
    #[inline]
    pub fn wavevector(&self, idx: usize) -> (i64, i64) {
        (self.freq(idx / self.n), self.freq(idx % self.n))
    }

    #[inline]
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let h = self.n / 2;
        idx / self.n == h || idx % self.n == h
    }

    /// Largest retained `|k|`, i.e. `(n/2) sqrt 2`.
    pub fn k_max(&self) -> f64 {
        (self.n as f64 / 2.0) * std::f64::consts::SQRT_2
    }

    /// Euclidean `|k|` for every coefficient index.
    pub fn abs_k_table(&self) -> Vec<f64> {
        (0..self.len())
            .map(|idx| {
                let (k1, k2) = self.wavevector(idx);
                ((k1 * k1 + k2 * k2) as f64).sqrt()
            })
            .collect()
    }
}

/// Complex Fourier coefficients of a real field.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeff: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            coeff: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        let mut f = Self::zeros(grid);
        f.coeff[0] = Complex64::new(c, 0.0);
        f
    }

    /// Wrap raw coefficients in FFT order. The caller is responsible for
    /// Hermitian symmetry.
    pub fn from_coeffs(grid: Grid, coeff: Vec<Complex64>) -> Result<Self> {
        if coeff.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: coeff.len(),
            });
        }
        Ok(Self { grid, coeff })
    }

    /// Forward transform of row-major lattice samples `u(i/n, j/n)`.
    pub fn from_physical(grid: Grid, samples: &[f64]) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: samples.len(),
            });
        }
        let mut data: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Fft2::plan(grid.n).forward(&mut data);
        let scale = 1.0 / grid.len() as f64;
        for c in &mut data {
            *c *= scale;
        }
        // Exact symmetrization; removes the rounding-level imaginary parts.
        let mut f = Self { grid, coeff: data };
        f.symmetrize();
        Ok(f)
    }

    /// Sample a function of `(x^1, x^2)` on the lattice and transform.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n;
        let h = 1.0 / n as f64;
        let samples: Vec<f64> = (0..grid.len())
            .map(|idx| f((idx / n) as f64 * h, (idx % n) as f64 * h))
            .collect();
        Self::from_physical(grid, &samples).expect("lattice size matches grid")
    }

    /// Inverse transform to row-major lattice samples.
    pub fn to_physical(&self) -> Vec<f64> {
        let mut data = self.coeff.clone();
        Fft2::plan(self.grid.n).inverse(&mut data);
        data.into_iter().map(|c| c.re).collect()
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeff
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeff
    }

    /// Coefficient of signed mode `(k1, k2)`.
    pub fn mode(&self, k1: i64, k2: i64) -> Complex64 {
        self.coeff[self.grid.index_of(k1) * self.grid.n + self.grid.index_of(k2)]
    }

    /// Set mode `k` and its Hermitian partner `-k`.
    pub fn set_mode(&mut self, k1: i64, k2: i64, c: Complex64) {
        let n = self.grid.n;
        let a = self.grid.index_of(k1) * n + self.grid.index_of(k2);
        let b = self.grid.index_of(-k1) * n + self.grid.index_of(-k2);
        if a == b {
            self.coeff[a] = Complex64::new(c.re, 0.0);
        } else {
            self.coeff[a] = c;
            self.coeff[b] = c.conj();
        }
    }

    /// Spatial mean, i.e. the zero mode.
    pub fn mean(&self) -> f64 {
        self.coeff[0].re
    }

    /// Lattice supremum `max_x |u(x)|`.
    pub fn sup_norm(&self) -> f64 {
        self.to_physical().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|u_hat(k) - conj(u_hat(-k))|`; zero for a real field.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.n;
        let mut worst: f64 = 0.0;
        for idx in 0..self.grid.len() {
            let (k1, k2) = self.grid.wavevector(idx);
            let partner = self.grid.index_of(-k1) * n + self.grid.index_of(-k2);
            worst = worst.max((self.coeff[idx] - self.coeff[partner].conj()).norm());
        }
        worst
    }

    /// Replace each coefficient by the average with its conjugate partner.
    pub fn symmetrize(&mut self) {
        let n = self.grid.n;
        for idx in 0..self.grid.len() {
            let (k1, k2) = self.grid.wavevector(idx);
            let partner = self.grid.index_of(-k1) * n + self.grid.index_of(-k2);
            if partner < idx {
                continue;
            }
            let avg = 0.5 * (self.coeff[idx] + self.coeff[partner].conj());
            self.coeff[idx] = avg;
            self.coeff[partner] = avg.conj();
        }
    }

    /// Zero the Nyquist rows and columns.
    pub fn drop_nyquist(&mut self) {
        let grid = self.grid;
        for (idx, c) in self.coeff.iter_mut().enumerate() {
            if grid.is_nyquist(idx) {
                *c = Complex64::default();
            }
        }
    }

    /// Largest coefficient modulus on the Nyquist rows and columns.
    pub fn nyquist_content(&self) -> f64 {
        self.coeff
            .iter()
            .enumerate()
            .filter(|(idx, _)| self.grid.is_nyquist(*idx))
            .fold(0.0, |m, (_, c)| m.max(c.norm()))
    }

    /// Coefficientwise multiplication by a real multiplier table.
    pub fn mul_real_table(&self, table: &[f64]) -> Self {
        debug_assert_eq!(table.len(), self.coeff.len());
        Self {
            grid: self.grid,
            coeff: self.coeff.iter().zip(table).map(|(c, m)| c * m).collect(),
        }
    }

    /// Apply a Fourier multiplier `m(k1, k2)`. When `odd` is set the Nyquist
    /// modes are zeroed so the output stays real.
    pub fn apply_multiplier(&self, odd: bool, m: impl Fn(i64, i64) -> Complex64) -> Self {
        let grid = self.grid;
        let coeff = self
            .coeff
            .iter()
            .enumerate()
            .map(|(idx, c)| {
                if odd && grid.is_nyquist(idx) {
                    return Complex64::default();
                }
                let (k1, k2) = grid.wavevector(idx);
                c * m(k1, k2)
            })
            .collect();
        Self { grid, coeff }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            grid: self.grid,
            coeff: self.coeff.iter().map(|c| c * s).collect(),
        }
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: f64, other: &SpectralField) {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        for (a, b) in self.coeff.iter_mut().zip(&other.coeff) {
            *a += b * s;
        }
    }

    /// Largest coefficient modulus of `self - other`.
    pub fn max_coeff_diff(&self, other: &SpectralField) -> f64 {
        self.coeff
            .iter()
            .zip(&other.coeff)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn check_same_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch {
                left: self.grid.n,
                right: other.grid.n,
            });
        }
        Ok(())
    }

    /// Padded-lattice samples of the field (Nyquist modes excluded).
    pub(crate) fn to_padded(&self) -> Vec<f64> {
        let mut data = self.embed_padded();
        Fft2::plan(self.grid.padded()).inverse(&mut data);
        data.into_iter().map(|c| c.re).collect()
    }

    /// Padded-lattice samples of two fields from a single complex transform.
    pub(crate) fn to_padded_pair(a: &SpectralField, b: &SpectralField) -> (Vec<f64>, Vec<f64>) {
        debug_assert_eq!(a.grid, b.grid);
        let mut data = a.embed_padded();
        let other = b.embed_padded();
        for (d, o) in data.iter_mut().zip(other) {
            *d += Complex64::new(-o.im, o.re);
        }
        Fft2::plan(a.grid.padded()).inverse(&mut data);
        data.into_iter().map(|c| (c.re, c.im)).unzip()
    }

    /// Transform padded samples back and truncate to the Nyquist-free band.
    pub(crate) fn from_padded(grid: Grid, samples: &[f64]) -> Self {
        let m = grid.padded();
        debug_assert_eq!(samples.len(), m * m);
        let mut data: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Fft2::plan(m).forward(&mut data);
        let scale = 1.0 / (m * m) as f64;
        let mut coeff = vec![Complex64::default(); grid.len()];
        for (idx, c) in coeff.iter_mut().enumerate() {
            if grid.is_nyquist(idx) {
                continue;
            }
            let (k1, k2) = grid.wavevector(idx);
            let p = (k1.rem_euclid(m as i64) as usize) * m + k2.rem_euclid(m as i64) as usize;
            *c = data[p] * scale;
        }
        let mut f = Self { grid, coeff };
        f.symmetrize();
        f
    }

    /// Padded-lattice samples of `table_j * self` for each multiplier table,
    /// two tables per complex transform.
    pub(crate) fn padded_filtered(&self, tables: &[&[f64]]) -> Vec<Vec<f64>> {
        let m = self.grid.padded();
        let plan = Fft2::plan(m);
        let mut out = Vec::with_capacity(tables.len());
        for chunk in tables.chunks(2) {
            let mut data = vec![Complex64::default(); m * m];
            for (idx, c) in self.coeff.iter().enumerate() {
                if self.grid.is_nyquist(idx) {
                    continue;
                }
                let (k1, k2) = self.grid.wavevector(idx);
                let p = (k1.rem_euclid(m as i64) as usize) * m + k2.rem_euclid(m as i64) as usize;
                let a = c * chunk[0][idx];
                data[p] = match chunk.get(1) {
                    Some(tb) => {
                        let b = c * tb[idx];
                        a + Complex64::new(-b.im, b.re)
                    }
                    None => a,
                };
            }
            plan.inverse(&mut data);
            if chunk.len() == 2 {
                let (re, im): (Vec<f64>, Vec<f64>) = data.into_iter().map(|c| (c.re, c.im)).unzip();
                out.push(re);
                out.push(im);
            } else {
                out.push(data.into_iter().map(|c| c.re).collect());
            }
        }
        out
    }

    fn embed_padded(&self) -> Vec<Complex64> {
        let m = self.grid.padded();
        let mut data = vec![Complex64::default(); m * m];
        for (idx, c) in self.coeff.iter().enumerate() {
            if self.grid.is_nyquist(idx) {
                continue;
            }
            let (k1, k2) = self.grid.wavevector(idx);
            let p = (k1.rem_euclid(m as i64) as usize) * m + k2.rem_euclid(m as i64) as usize;
            data[p] = *c;
        }
        data
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        assert_eq!(self.grid, rhs.grid, "grid mismatch");
        SpectralField {
            grid: self.grid,
            coeff: self.coeff.iter().zip(&rhs.coeff).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        assert_eq!(self.grid, rhs.grid, "grid mismatch");
        SpectralField {
            grid: self.grid,
            coeff: self.coeff.iter().zip(&rhs.coeff).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, s: f64) -> SpectralField {
        self.scale(s)
    }
}

impl AddAssign<&SpectralField> for SpectralField {
    fn add_assign(&mut self, rhs: &SpectralField) {
        self.axpy(1.0, rhs);
    }
}

impl SubAssign<&SpectralField> for SpectralField {
    fn sub_assign(&mut self, rhs: &SpectralField) {
        self.axpy(-1.0, rhs);
    }
}

/// Random real field with independent Gaussian coefficients on `|k| <= k_cut`,
/// amplitude `(1 + |k|)^{-decay}`, Nyquist-free. Deterministic in `seed`.
pub fn random_field(grid: Grid, seed: u64, k_cut: f64, decay: f64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SpectralField::zeros(grid);
    let h = grid.n() as i64 / 2;
    for k1 in -h + 1..h {
        for k2 in 0..h {
            if k2 == 0 && k1 < 0 {
                continue;
            }
            let r = ((k1 * k1 + k2 * k2) as f64).sqrt();
            let (g1, g2) = gaussian_pair(&mut rng);
            if r > k_cut {
                continue;
            }
            let amp = (1.0 + r).powf(-decay);
            let c = if k1 == 0 && k2 == 0 {
                Complex64::new(amp * g1, 0.0)
            } else {
                Complex64::new(amp * g1, amp * g2) * std::f64::consts::FRAC_1_SQRT_2
            };
            f.set_mode(k1, k2, c);
        }
    }
    f
}

/// Two independent standard normals from two 64-bit words (Box-Muller).
pub(crate) fn gaussian_pair(rng: &mut impl RngCore) -> (f64, f64) {
    let u1 = ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
    let u2 = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    let r = (-2.0 * u1.ln()).sqrt();
    let phi = 2.0 * std::f64::consts::PI * u2;
    (r * phi.cos(), r * phi.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::new(16).unwrap()
    }

    #[test]
    fn constant_field_has_only_zero_mode() {
        let f = SpectralField::from_fn(grid(), |_, _| 2.5);
        assert!((f.mode(0, 0).re - 2.5).abs() < 1e-14);
        for idx in 1..grid().len() {
            assert!(f.coeffs()[idx].norm() < 1e-14);
        }
    }

    #[test]
    fn cosine_has_two_half_modes() {
        let two_pi = 2.0 * std::f64::consts::PI;
        let f = SpectralField::from_fn(grid(), |x1, _| (two_pi * x1).cos());
        assert!((f.mode(1, 0).re - 0.5).abs() < 1e-14);
        assert!((f.mode(-1, 0).re - 0.5).abs() < 1e-14);
        let mut g = f.clone();
        g.set_mode(1, 0, Complex64::default());
        assert!(g.coeffs().iter().all(|c| c.norm() < 1e-14));
    }

    #[test]
    fn random_lattice_round_trip() {
        let g = Grid::new(32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let samples: Vec<f64> = (0..g.len()).map(|_| gaussian_pair(&mut rng).0).collect();
        let back = SpectralField::from_physical(g, &samples).unwrap().to_physical();
        let scale = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let err = samples.iter().zip(&back).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err / scale <= 1e-12, "round trip error {err}");
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let err = SpectralField::from_physical(grid(), &[0.0; 10]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 256, got: 10 }));
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(12).is_err());
        assert!(Grid::new(8).is_err());
        assert!(Grid::with_padding(16, 5, 4).is_err());
        assert_eq!(Grid::new(64).unwrap().padded(), 96);
        assert_eq!(Grid::with_padding(16, 2, 1).unwrap().padded(), 32);
    }

    #[test]
    fn padded_pair_matches_single_transforms() {
        let g = grid();
        let a = random_field(g, 1, 6.0, 0.0);
        let b = random_field(g, 2, 6.0, 0.0);
        let (pa, pb) = SpectralField::to_padded_pair(&a, &b);
        let (sa, sb) = (a.to_padded(), b.to_padded());
        for i in 0..pa.len() {
            assert!((pa[i] - sa[i]).abs() < 1e-12);
            assert!((pb[i] - sb[i]).abs() < 1e-12);
        }
        let back = SpectralField::from_padded(g, &pa);
        assert!(back.max_coeff_diff(&a) < 1e-14);
    }

    #[test]
    fn random_field_is_real_and_nyquist_free() {
        let f = random_field(Grid::new(32).unwrap(), 9, 100.0, 1.0);
        assert!(f.hermitian_defect() < 1e-15);
        assert_eq!(f.nyquist_content(), 0.0);
    }
}
