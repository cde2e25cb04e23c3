//! Bony calculus on the torus: alias-free products, the paraproducts
//! `f < g`, `f > g` and the resonant product `f o g`, the commutator `C`,
//! Riesz transforms and derivatives.
//!
//! Paraproducts are evaluated from the padded-lattice samples of every
//! Littlewood-Paley block ([`Blocks`]); with those in hand each paraproduct
//! is a pointwise sum, accumulated in an [`Accumulator`] and transformed back
//! once. Block sums always run in ascending `j`.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use crate::error::Result;
use crate::field::{Grid, SpectralField};
use crate::partition::DyadicPartition;

/// Which piece of the Bony decomposition `fg = f<g + f o g + f>g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Para {
    /// `f < g = sum_{j >= 1} S_{j-1} f Delta_j g`
    Lt,
    /// `f > g = g < f`
    Gt,
    /// `f o g = sum_{|j1 - j2| <= 1} Delta_{j1} f Delta_{j2} g`
    Resonant,
}

/// Padded-lattice samples of every block `Delta_j f` and of `f` itself.
#[derive(Debug, Clone)]
pub struct Blocks {
    grid: Grid,
    blocks: Vec<Vec<f64>>,
    full: Vec<f64>,
}

impl Blocks {
    pub fn new(f: &SpectralField, part: &DyadicPartition) -> Self {
        assert_eq!(f.grid(), part.grid(), "grid mismatch");
        let tables: Vec<&[f64]> = (-1..=part.j_max()).map(|j| part.rho(j).unwrap()).collect();
        let blocks = f.padded_filtered(&tables);
        let mut full = vec![0.0; blocks[0].len()];
        for b in &blocks {
            for (acc, v) in full.iter_mut().zip(b) {
                *acc += v;
            }
        }
        Self { grid: f.grid(), blocks, full }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Samples of `Delta_j f`, `j = -1..=j_max`.
    pub fn block(&self, j: i32) -> &[f64] {
        &self.blocks[(j + 1) as usize]
    }

    /// Samples of `f`.
    pub fn full(&self) -> &[f64] {
        &self.full
    }

    fn count(&self) -> usize {
        self.blocks.len()
    }
}

/// Padded-lattice samples of a field, for plain products.
pub fn padded(f: &SpectralField) -> Vec<f64> {
    f.to_padded()
}

/// Accumulates products on the padded lattice; [`Accumulator::finish`]
/// transforms back and truncates to the retained band.
#[derive(Debug, Clone)]
pub struct Accumulator {
    grid: Grid,
    buf: Vec<f64>,
}

impl Accumulator {
    pub fn new(grid: Grid) -> Self {
        let m = grid.padded();
        Self { grid, buf: vec![0.0; m * m] }
    }

    /// `+= s * a * b` for padded samples `a`, `b`.
    pub fn add_product(&mut self, s: f64, a: &[f64], b: &[f64]) {
        for ((acc, x), y) in self.buf.iter_mut().zip(a).zip(b) {
            *acc += s * x * y;
        }
    }

    /// `+= s * (f < g)`.
    pub fn add_lt(&mut self, s: f64, f: &Blocks, g: &Blocks) {
        debug_assert_eq!(f.grid, g.grid);
        let mut low = vec![0.0; self.buf.len()];
        // low = S_{j-1} f = sum_{m <= j-2} Delta_m f, paired with Delta_j g for j >= 1.
        for j in 1..(g.count() as i32 - 1) {
            for (l, v) in low.iter_mut().zip(f.block(j - 2)) {
                *l += v;
            }
            let gb = g.block(j);
            for ((acc, x), y) in self.buf.iter_mut().zip(&low).zip(gb) {
                *acc += s * x * y;
            }
        }
    }

    /// `+= s * (f > g)`.
    pub fn add_gt(&mut self, s: f64, f: &Blocks, g: &Blocks) {
        self.add_lt(s, g, f);
    }

    /// `+= s * (f o g)`.
    pub fn add_resonant(&mut self, s: f64, f: &Blocks, g: &Blocks) {
        debug_assert_eq!(f.grid, g.grid);
        let nb = f.count() as i32;
        for j1 in -1..(nb - 1) {
            let fb = f.block(j1);
            for j2 in (j1 - 1).max(-1)..=(j1 + 1).min(nb - 2) {
                let gb = g.block(j2);
                for ((acc, x), y) in self.buf.iter_mut().zip(fb).zip(gb) {
                    *acc += s * x * y;
                }
            }
        }
    }

    pub fn add_para(&mut self, s: f64, mode: Para, f: &Blocks, g: &Blocks) {
        match mode {
            Para::Lt => self.add_lt(s, f, g),
            Para::Gt => self.add_gt(s, f, g),
            Para::Resonant => self.add_resonant(s, f, g),
        }
    }

    pub fn finish(self) -> SpectralField {
        SpectralField::from_padded(self.grid, &self.buf)
    }
}

/// Exact (alias-free) product, truncated to the retained band.
pub fn product(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    f.check_same_grid(g)?;
    let (pf, pg) = SpectralField::to_padded_pair(f, g);
    let mut acc = Accumulator::new(f.grid());
    acc.add_product(1.0, &pf, &pg);
    Ok(acc.finish())
}

/// `f < g`, `f > g` or `f o g`.
pub fn paraproduct(
    f: &SpectralField,
    g: &SpectralField,
    mode: Para,
    part: &DyadicPartition,
) -> Result<SpectralField> {
    f.check_same_grid(g)?;
    let (bf, bg) = (Blocks::new(f, part), Blocks::new(g, part));
    let mut acc = Accumulator::new(f.grid());
    acc.add_para(1.0, mode, &bf, &bg);
    Ok(acc.finish())
}

/// `C(f, g, h) = (f < g) o h - f (g o h)`.
pub fn commutator(
    f: &SpectralField,
    g: &SpectralField,
    h: &SpectralField,
    part: &DyadicPartition,
) -> Result<SpectralField> {
    f.check_same_grid(g)?;
    f.check_same_grid(h)?;
    let bh = Blocks::new(h, part);
    let fg = paraproduct(f, g, Para::Lt, part)?;
    let mut acc = Accumulator::new(f.grid());
    acc.add_resonant(1.0, &Blocks::new(&fg, part), &bh);
    let gh = {
        let mut inner = Accumulator::new(f.grid());
        inner.add_resonant(1.0, &Blocks::new(g, part), &bh);
        inner.finish()
    };
    let (pf, pgh) = SpectralField::to_padded_pair(f, &gh);
    acc.add_product(-1.0, &pf, &pgh);
    Ok(acc.finish())
}

/// Riesz transform `R_l`, multiplier `i k_l / |k|` (zero at `k = 0`).
pub fn riesz(f: &SpectralField, l: usize) -> SpectralField {
    assert!(l == 1 || l == 2, "component must be 1 or 2");
    f.apply_multiplier(true, |k1, k2| {
        if k1 == 0 && k2 == 0 {
            return Complex64::default();
        }
        let kl = if l == 1 { k1 } else { k2 } as f64;
        let r = ((k1 * k1 + k2 * k2) as f64).sqrt();
        Complex64::new(0.0, kl / r)
    })
}

/// `R^perp f = (R_2 f, -R_1 f)`.
pub fn riesz_perp(f: &SpectralField) -> [SpectralField; 2] {
    [riesz(f, 2), -&riesz(f, 1)]
}

/// `partial_l f`, multiplier `2 pi i k_l`.
pub fn partial(f: &SpectralField, l: usize) -> SpectralField {
    assert!(l == 1 || l == 2, "component must be 1 or 2");
    f.apply_multiplier(true, |k1, k2| {
        let kl = if l == 1 { k1 } else { k2 } as f64;
        Complex64::new(0.0, 2.0 * PI * kl)
    })
}

/// `grad f = (partial_1 f, partial_2 f)`.
pub fn gradient(f: &SpectralField) -> [SpectralField; 2] {
    [partial(f, 1), partial(f, 2)]
}

/// `R_l (f < g) - f < R_l g`.
pub fn riesz_para_comm(
    f: &SpectralField,
    g: &SpectralField,
    l: usize,
    part: &DyadicPartition,
) -> Result<SpectralField> {
    let left = riesz(&paraproduct(f, g, Para::Lt, part)?, l);
    let right = paraproduct(f, &riesz(g, l), Para::Lt, part)?;
    Ok(&left - &right)
}

/// `sum_i a_i . b_i` for 2-vectors of fields, as a plain product.
pub fn dot(a: &[SpectralField; 2], b: &[SpectralField; 2]) -> Result<SpectralField> {
    a[0].check_same_grid(&b[0])?;
    let (p0, q0) = SpectralField::to_padded_pair(&a[0], &b[0]);
    let (p1, q1) = SpectralField::to_padded_pair(&a[1], &b[1]);
    let mut acc = Accumulator::new(a[0].grid());
    acc.add_product(1.0, &p0, &q0);
    acc.add_product(1.0, &p1, &q1);
    Ok(acc.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::random_field;

    fn setup(n: usize) -> (Grid, DyadicPartition) {
        let g = Grid::new(n).unwrap();
        (g, DyadicPartition::new(g))
    }

    fn cos1(grid: Grid) -> SpectralField {
        SpectralField::from_fn(grid, |x1, _| (2.0 * PI * x1).cos())
    }

    /// Direct convolution `sum_k f(k) g(m - k)` restricted to the Nyquist-free band.
    fn convolution(f: &SpectralField, g: &SpectralField) -> SpectralField {
        let grid = f.grid();
        let h = grid.n() as i64 / 2;
        let mut out = SpectralField::zeros(grid);
        for m1 in -h + 1..h {
            for m2 in -h + 1..h {
                let mut s = Complex64::default();
                for k1 in -h + 1..h {
                    for k2 in -h + 1..h {
                        let (l1, l2) = (m1 - k1, m2 - k2);
                        if l1.abs() >= h || l2.abs() >= h {
                            continue;
                        }
                        s += f.mode(k1, k2) * g.mode(l1, l2);
                    }
                }
                let idx = grid.index_of(m1) * grid.n() + grid.index_of(m2);
                out.coeffs_mut()[idx] = s;
            }
        }
        out
    }

    #[test]
    fn product_identity_and_cosine_square() {
        let (g, _) = setup(16);
        let f = random_field(g, 1, 10.0, 0.0);
        let one = SpectralField::constant(g, 1.0);
        assert!(product(&one, &f).unwrap().max_coeff_diff(&f) < 1e-14 * f.sup_norm());

        let c = cos1(g);
        let sq = product(&c, &c).unwrap();
        let expect = SpectralField::from_fn(g, |x1, _| 0.5 + 0.5 * (4.0 * PI * x1).cos());
        assert!(sq.max_coeff_diff(&expect) < 1e-14);
    }

    #[test]
    fn product_matches_direct_convolution() {
        let (g, _) = setup(16);
        let f = random_field(g, 5, 100.0, 0.0);
        let h = random_field(g, 6, 100.0, 0.0);
        let fast = product(&f, &h).unwrap();
        let slow = convolution(&f, &h);
        let scale = f.coeffs().iter().map(|c| c.norm()).sum::<f64>()
            * h.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!(fast.max_coeff_diff(&slow) <= 1e-12 * scale);
    }

    #[test]
    fn bony_decomposition_is_exact() {
        let (g, part) = setup(32);
        for seed in 0..5 {
            let f = random_field(g, 2 * seed, 100.0, 0.3);
            let h = random_field(g, 2 * seed + 1, 100.0, 0.3);
            let whole = product(&f, &h).unwrap();
            let mut sum = paraproduct(&f, &h, Para::Lt, &part).unwrap();
            sum += &paraproduct(&f, &h, Para::Resonant, &part).unwrap();
            sum += &paraproduct(&f, &h, Para::Gt, &part).unwrap();
            let err = (&whole - &sum).sup_norm();
            assert!(err <= 1e-10 * f.sup_norm() * h.sup_norm(), "seed {seed}: {err}");
        }
    }

    #[test]
    fn low_times_block_two_is_pure_paraproduct() {
        let (g, part) = setup(32);
        let c = cos1(g);
        // |k| = 8 sits entirely in block 2.
        let mut h = SpectralField::zeros(g);
        h.set_mode(8, 0, Complex64::new(0.3, -0.2));
        h.set_mode(0, 8, Complex64::new(-0.1, 0.4));
        let fg = product(&c, &h).unwrap();
        assert!(paraproduct(&c, &h, Para::Lt, &part).unwrap().max_coeff_diff(&fg) < 1e-15);
        assert!(paraproduct(&c, &h, Para::Resonant, &part).unwrap().sup_norm() < 1e-15);
        assert!(paraproduct(&c, &h, Para::Gt, &part).unwrap().sup_norm() < 1e-15);
    }

    #[test]
    fn constant_left_factor() {
        let (g, part) = setup(32);
        let cst = 1.7;
        let f = SpectralField::constant(g, cst);
        let h = random_field(g, 3, 100.0, 0.0);
        let low = &part.block(&h, -1).unwrap() + &part.block(&h, 0).unwrap();
        let gt = paraproduct(&f, &h, Para::Gt, &part).unwrap();
        let res = paraproduct(&f, &h, Para::Resonant, &part).unwrap();
        let lt = paraproduct(&f, &h, Para::Lt, &part).unwrap();
        assert!(gt.sup_norm() < 1e-14);
        assert!(res.max_coeff_diff(&low.scale(cst)) < 1e-14);
        assert!(lt.max_coeff_diff(&(&h - &low).scale(cst)) < 1e-14);
    }

    #[test]
    fn commutator_vanishes_with_zero_argument() {
        let (g, part) = setup(16);
        let f = random_field(g, 1, 100.0, 0.0);
        let h = random_field(g, 2, 100.0, 0.0);
        let z = SpectralField::zeros(g);
        // Packing two real fields per transform leaks roundoff into the zero slot.
        assert!(commutator(&f, &z, &h, &part).unwrap().sup_norm() < 1e-14 * f.sup_norm() * h.sup_norm());
        assert!(commutator(&f, &h, &z, &part).unwrap().sup_norm() < 1e-14 * f.sup_norm() * h.sup_norm());
    }

    #[test]
    fn commutator_with_unit_left_factor() {
        let (g, part) = setup(16);
        let one = SpectralField::constant(g, 1.0);
        let a = random_field(g, 11, 100.0, 0.0);
        let b = random_field(g, 12, 100.0, 0.0);
        let direct = &paraproduct(&paraproduct(&one, &a, Para::Lt, &part).unwrap(), &b, Para::Resonant, &part)
            .unwrap()
            - &paraproduct(&a, &b, Para::Resonant, &part).unwrap();
        let c = commutator(&one, &a, &b, &part).unwrap();
        assert!(c.max_coeff_diff(&direct) < 1e-13 * a.sup_norm() * b.sup_norm());
    }

    #[test]
    fn riesz_and_derivative_multipliers() {
        let (g, _) = setup(16);
        let c = cos1(g);
        let sin = SpectralField::from_fn(g, |x1, _| (2.0 * PI * x1).sin());
        assert!(riesz(&c, 1).max_coeff_diff(&sin.scale(-1.0)) < 1e-14);
        assert!(riesz(&c, 2).sup_norm() < 1e-15);
        assert!(partial(&c, 1).max_coeff_diff(&sin.scale(-2.0 * PI)) < 1e-13);
        let k = SpectralField::constant(g, 3.0);
        assert_eq!(riesz(&k, 1).sup_norm(), 0.0);
        assert_eq!(riesz(&k, 2).sup_norm(), 0.0);
    }

    #[test]
    fn riesz_square_sum_is_minus_identity_off_mean() {
        let (g, _) = setup(32);
        let f = random_field(g, 21, 100.0, 0.0);
        let s = &riesz(&riesz(&f, 1), 1) + &riesz(&riesz(&f, 2), 2);
        let expect = (&f - &SpectralField::constant(g, f.mean())).scale(-1.0);
        assert!(s.max_coeff_diff(&expect) < 1e-14);
    }

    #[test]
    fn transport_velocity_is_divergence_free() {
        let (g, _) = setup(32);
        let f = random_field(g, 22, 100.0, 0.0);
        let [u1, u2] = riesz_perp(&f);
        let div = &partial(&u1, 1) + &partial(&u2, 2);
        assert!(div.coeffs().iter().all(|c| c.norm() < 1e-12));
    }

    #[test]
    fn leibniz_rule_for_paraproduct() {
        let (g, part) = setup(32);
        let f = random_field(g, 31, 100.0, 0.5);
        let h = random_field(g, 32, 100.0, 0.5);
        for l in 1..=2 {
            let lhs = partial(&paraproduct(&f, &h, Para::Lt, &part).unwrap(), l);
            let rhs = &paraproduct(&partial(&f, l), &h, Para::Lt, &part).unwrap()
                + &paraproduct(&f, &partial(&h, l), Para::Lt, &part).unwrap();
            assert!((&lhs - &rhs).sup_norm() < 1e-10 * lhs.sup_norm().max(1.0));
        }
    }

    #[test]
    fn riesz_para_comm_matches_composition() {
        let (g, part) = setup(16);
        let f = random_field(g, 41, 100.0, 0.0);
        let h = random_field(g, 42, 100.0, 0.0);
        let z = SpectralField::zeros(g);
        assert_eq!(riesz_para_comm(&f, &z, 1, &part).unwrap().sup_norm(), 0.0);
        for l in 1..=2 {
            let direct = &riesz(&paraproduct(&f, &h, Para::Lt, &part).unwrap(), l)
                - &paraproduct(&f, &riesz(&h, l), Para::Lt, &part).unwrap();
            let c = riesz_para_comm(&f, &h, l, &part).unwrap();
            assert!(c.max_coeff_diff(&direct) <= 1e-12);
        }
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let a = SpectralField::zeros(Grid::new(16).unwrap());
        let b = SpectralField::zeros(Grid::new(32).unwrap());
        assert!(product(&a, &b).is_err());
    }
}
