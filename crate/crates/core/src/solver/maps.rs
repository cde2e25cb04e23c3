//! The maps `Phi`, `com`, `F`, `G` and `M` of the paracontrolled system.
//!
//! Vector contractions follow one convention throughout: with
//! `R^perp = (R^perp_1, R^perp_2) = (R_2, -R_1)` and `Phi_j = R^perp_j U`,
//! a double contraction such as `C(Phi, R^perp V, grad X)` means
//! `sum_{i,j} C(Phi_j, R^perp_i V_j, d_i X)`.

use crate::calculus::{padded, partial, riesz_perp, Accumulator, Blocks, Para};
use crate::enhance::Driver;
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::partition::DyadicPartition;
use crate::semigroup::{Dissipation, Integrator};
use crate::timefield::TimeField;

use super::{Exponents, SolutionPair};

fn check(driver: &Driver, v: &TimeField, w: &TimeField) -> Result<()> {
    driver.x.check_aligned(v)?;
    driver.x.check_aligned(w)
}

fn check_index(driver: &Driver, m: usize) -> Result<()> {
    if m >= driver.len() {
        return Err(Error::TimeIndexOutOfRange { index: m, len: driver.len() });
    }
    Ok(())
}

/// `R^perp_i f` for `i = 1, 2`.
fn rperp(f: &SpectralField) -> [SpectralField; 2] {
    riesz_perp(f)
}

/// `d_i f` for `i = 1, 2`.
fn grad(f: &SpectralField) -> [SpectralField; 2] {
    [partial(f, 1), partial(f, 2)]
}

/// `Phi = R^perp(Y + v + w)` at sample `m`.
pub fn phi(driver: &Driver, v: &TimeField, w: &TimeField, m: usize) -> Result<[SpectralField; 2]> {
    check(driver, v, w)?;
    check_index(driver, m)?;
    let u = &(&driver.y.values()[m] + &v.values()[m]) + &w.values()[m];
    Ok(rperp(&u))
}

fn phi_all(driver: &Driver, v: &TimeField, w: &TimeField) -> Result<Vec<[SpectralField; 2]>> {
    (0..driver.len()).map(|m| phi(driver, v, w, m)).collect()
}

/// `sum_i Phi_i < d_i X` at one instant.
fn f_instant(phi: &[SpectralField; 2], x: &SpectralField, part: &DyadicPartition) -> SpectralField {
    let dx = grad(x);
    let mut acc = Accumulator::new(x.grid());
    for i in 0..2 {
        acc.add_lt(1.0, &Blocks::new(&phi[i], part), &Blocks::new(&dx[i], part));
    }
    acc.finish()
}

/// `sum_j Phi_j < V_j` at one instant.
fn phi_lt_v(phi: &[SpectralField; 2], v: [&SpectralField; 2], part: &DyadicPartition) -> SpectralField {
    let mut acc = Accumulator::new(phi[0].grid());
    for j in 0..2 {
        acc.add_lt(1.0, &Blocks::new(&phi[j], part), &Blocks::new(v[j], part));
    }
    acc.finish()
}

fn driver_v(driver: &Driver, m: usize) -> [&SpectralField; 2] {
    [&driver.v[0].values()[m], &driver.v[1].values()[m]]
}

/// `F(v, w) = Phi < grad X`.
pub fn f_map(driver: &Driver, v: &TimeField, w: &TimeField) -> Result<TimeField> {
    check(driver, v, w)?;
    let part = DyadicPartition::new(driver.grid());
    let values = phi_all(driver, v, w)?
        .iter()
        .zip(driver.x.values())
        .map(|(p, x)| f_instant(p, x, &part))
        .collect();
    TimeField::new(driver.x.t0(), driver.dt(), values)
}

/// `P_t v0 + I[F(v, w)]_t`.
fn m1(driver: &Driver, v: &TimeField, w: &TimeField, v0: &SpectralField, theta: f64) -> Result<TimeField> {
    let f = f_map(driver, v, w)?;
    let integ = Integrator::new(driver.grid(), Dissipation::damped(theta)?, driver.dt())?;
    integ.integrate_from(&f, Some(v0))
}

/// `com(v, w)_t = P_t v0 + I[Phi < grad X]_t - Phi_t < V_t`.
pub fn com(driver: &Driver, v: &TimeField, w: &TimeField, v0: &SpectralField, exps: &Exponents) -> Result<TimeField> {
    let m1 = m1(driver, v, w, v0, exps.theta)?;
    com_from_m1(driver, v, w, &m1)
}

fn com_from_m1(driver: &Driver, v: &TimeField, w: &TimeField, m1: &TimeField) -> Result<TimeField> {
    let part = DyadicPartition::new(driver.grid());
    let phis = phi_all(driver, v, w)?;
    let values = (0..driver.len())
        .map(|m| &m1.values()[m] - &phi_lt_v(&phis[m], driver_v(driver, m), &part))
        .collect();
    TimeField::new(driver.x.t0(), driver.dt(), values)
}

/// The ten term groups of `G` at one instant.
#[derive(Debug, Clone)]
pub struct GTerms {
    pub t: [SpectralField; 10],
}

impl GTerms {
    pub fn sum(&self) -> SpectralField {
        let mut s = self.t[0].clone();
        for t in &self.t[1..] {
            s += t;
        }
        s
    }
}

/// Everything `G` needs at one instant.
pub struct Instant<'a> {
    pub x: &'a SpectralField,
    pub v: [&'a SpectralField; 2],
    pub y: &'a SpectralField,
    pub z: &'a SpectralField,
    pub w: [&'a SpectralField; 2],
    pub zhat: &'a SpectralField,
    pub what: [&'a SpectralField; 2],
    /// The unknowns `v`, `w` and `com(v, w)` at this instant.
    pub sv: &'a SpectralField,
    pub sw: &'a SpectralField,
    pub com: &'a SpectralField,
}

impl<'a> Instant<'a> {
    pub fn of(driver: &'a Driver, v: &'a TimeField, w: &'a TimeField, com: &'a TimeField, m: usize) -> Self {
        Self {
            x: &driver.x.values()[m],
            v: driver_v(driver, m),
            y: &driver.y.values()[m],
            z: &driver.z.values()[m],
            w: [&driver.w[0].values()[m], &driver.w[1].values()[m]],
            zhat: &driver.zhat.values()[m],
            what: [&driver.what[0].values()[m], &driver.what[1].values()[m]],
            sv: &v.values()[m],
            sw: &w.values()[m],
            com: &com.values()[m],
        }
    }
}

/// `C(f, g, h) = (f < g) o h - f (g o h)` from precomputed blocks, also
/// returning `f < g`.
fn commutator_blocks(
    f: &Blocks,
    g: &Blocks,
    h: &Blocks,
    part: &DyadicPartition,
) -> (SpectralField, SpectralField) {
    let grid = f.grid();
    let mut lt = Accumulator::new(grid);
    lt.add_lt(1.0, f, g);
    let fg = lt.finish();
    let mut inner = Accumulator::new(grid);
    inner.add_resonant(1.0, g, h);
    let gh = inner.finish();
    let mut acc = Accumulator::new(grid);
    acc.add_resonant(1.0, &Blocks::new(&fg, part), h);
    acc.add_product(-1.0, f.full(), &padded(&gh));
    (acc.finish(), fg)
}

/// `T_1 .. T_10` at one instant, each assembled from its definition.
pub fn g_terms(s: &Instant, part: &DyadicPartition) -> GTerms {
    let grid = s.x.grid();
    let b = |f: &SpectralField| Blocks::new(f, part);
    let u = &(s.y + s.sv) + s.sw;
    let phi = rperp(&u);
    let phi_b = [b(&phi[0]), b(&phi[1])];
    let dx = grad(s.x);
    let dx_b = [b(&dx[0]), b(&dx[1])];
    let rx = rperp(s.x);
    let rx_b = [b(&rx[0]), b(&rx[1])];
    // rv[i][j] = R^perp_i V_j, dv[i][j] = d_i V_j
    let rv_j = [rperp(s.v[0]), rperp(s.v[1])];
    let dv_j = [grad(s.v[0]), grad(s.v[1])];
    let rv_b: Vec<Vec<Blocks>> = (0..2).map(|i| (0..2).map(|j| b(&rv_j[j][i])).collect()).collect();
    let dv_b: Vec<Vec<Blocks>> = (0..2).map(|i| (0..2).map(|j| b(&dv_j[j][i])).collect()).collect();

    // T1 = sum_i Phi_i d_i (Y + v + w)
    let du = grad(&u);
    let mut acc = Accumulator::new(grid);
    for i in 0..2 {
        acc.add_product(1.0, phi_b[i].full(), &padded(&du[i]));
    }
    let t1 = acc.finish();

    // T2 = sum_ij C(Phi_j, R^perp_i V_j, d_i X) + C(Phi_j, d_i V_j, R^perp_i X)
    let mut t2 = SpectralField::zeros(grid);
    let mut phi_lt_rv = vec![vec![SpectralField::zeros(grid), SpectralField::zeros(grid)]; 2];
    let mut phi_lt_dv = vec![vec![SpectralField::zeros(grid), SpectralField::zeros(grid)]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let (c, fg) = commutator_blocks(&phi_b[j], &rv_b[i][j], &dx_b[i], part);
            t2 += &c;
            phi_lt_rv[i][j] = fg;
            let (c, fg) = commutator_blocks(&phi_b[j], &dv_b[i][j], &rx_b[i], part);
            t2 += &c;
            phi_lt_dv[i][j] = fg;
        }
    }

    // T3 = sum_i Phi_i > d_i X
    let mut acc = Accumulator::new(grid);
    for i in 0..2 {
        acc.add_para(1.0, Para::Gt, &phi_b[i], &dx_b[i]);
    }
    let t3 = acc.finish();

    // T4 = sum_i R^perp_i w o d_i X ;  T5 = sum_i R^perp_i X d_i w
    let rw = rperp(s.sw);
    let dw = grad(s.sw);
    let mut acc4 = Accumulator::new(grid);
    let mut acc5 = Accumulator::new(grid);
    for i in 0..2 {
        acc4.add_resonant(1.0, &b(&rw[i]), &dx_b[i]);
        acc5.add_product(1.0, rx_b[i].full(), &padded(&dw[i]));
    }
    let (t4, t5) = (acc4.finish(), acc5.finish());

    // T6 = sum_ij {R^perp_i (Phi_j < V_j) - Phi_j < R^perp_i V_j} o d_i X
    let v_b = [b(s.v[0]), b(s.v[1])];
    let phi_lt_v: Vec<SpectralField> = (0..2)
        .map(|j| {
            let mut acc = Accumulator::new(grid);
            acc.add_lt(1.0, &phi_b[j], &v_b[j]);
            acc.finish()
        })
        .collect();
    let mut acc = Accumulator::new(grid);
    for i in 0..2 {
        let mut d = SpectralField::zeros(grid);
        for j in 0..2 {
            d += &rperp(&phi_lt_v[j])[i];
            d -= &phi_lt_rv[i][j];
        }
        acc.add_resonant(1.0, &b(&d), &dx_b[i]);
    }
    let t6 = acc.finish();

    // T7 = sum_ij R^perp_i X (d_i Phi_j < V_j)
    let dphi = [grad(&phi[0]), grad(&phi[1])];
    let mut acc = Accumulator::new(grid);
    for i in 0..2 {
        let mut inner = Accumulator::new(grid);
        for j in 0..2 {
            inner.add_lt(1.0, &b(&dphi[j][i]), &v_b[j]);
        }
        acc.add_product(1.0, rx_b[i].full(), &padded(&inner.finish()));
    }
    let t7 = acc.finish();

    // T8 = sum_ij R^perp_i X (< + >) (Phi_j < d_i V_j) + sum_j Phi_j What_j + sum_j Phi_j W_j
    let mut acc = Accumulator::new(grid);
    for i in 0..2 {
        let h = &phi_lt_dv[i][0] + &phi_lt_dv[i][1];
        let hb = b(&h);
        acc.add_para(1.0, Para::Lt, &rx_b[i], &hb);
        acc.add_para(1.0, Para::Gt, &rx_b[i], &hb);
    }
    for j in 0..2 {
        acc.add_product(1.0, phi_b[j].full(), &padded(s.what[j]));
        acc.add_product(1.0, phi_b[j].full(), &padded(s.w[j]));
    }
    let t8 = acc.finish();

    // T9 = Z + Zhat + X + Y + v + w
    let t9 = &(&(&(&(s.z + s.zhat) + s.x) + s.y) + s.sv) + s.sw;

    // T10 = sum_i R^perp_i com o d_i X + R^perp_i X d_i com
    let rc = rperp(s.com);
    let dc = grad(s.com);
    let mut acc = Accumulator::new(grid);
    for i in 0..2 {
        acc.add_resonant(1.0, &b(&rc[i]), &dx_b[i]);
        acc.add_product(1.0, rx_b[i].full(), &padded(&dc[i]));
    }
    let t10 = acc.finish();

    GTerms { t: [t1, t2, t3, t4, t5, t6, t7, t8, t9, t10] }
}

fn g_from_com(driver: &Driver, v: &TimeField, w: &TimeField, com: &TimeField) -> Result<TimeField> {
    let part = DyadicPartition::new(driver.grid());
    let values = (0..driver.len())
        .map(|m| g_terms(&Instant::of(driver, v, w, com, m), &part).sum())
        .collect();
    TimeField::new(driver.x.t0(), driver.dt(), values)
}

/// `G(v, w) = T_1 + ... + T_10`.
pub fn g_map(
    driver: &Driver,
    v: &TimeField,
    w: &TimeField,
    v0: &SpectralField,
    exps: &Exponents,
) -> Result<TimeField> {
    let c = com(driver, v, w, v0, exps)?;
    g_from_com(driver, v, w, &c)
}

/// `M(v, w) = (P v0 + I[F(v, w)], P w0 + I[G(v, w)])`.
pub fn m_map(
    driver: &Driver,
    v: &TimeField,
    w: &TimeField,
    v0: &SpectralField,
    w0: &SpectralField,
    exps: &Exponents,
) -> Result<SolutionPair> {
    check(driver, v, w)?;
    let new_v = m1(driver, v, w, v0, exps.theta)?;
    let c = com_from_m1(driver, v, w, &new_v)?;
    let g = g_from_com(driver, v, w, &c)?;
    let integ = Integrator::new(driver.grid(), Dissipation::damped(exps.theta)?, driver.dt())?;
    let new_w = integ.integrate_from(&g, Some(w0))?;
    Ok(SolutionPair { v: new_v, w: new_w, v0: v0.clone(), w0: w0.clone(), exponents: *exps })
}

/// `u = X + Y + v + w`.
pub fn reconstruct(driver: &Driver, v: &TimeField, w: &TimeField) -> Result<TimeField> {
    check(driver, v, w)?;
    driver.x.add(&driver.y)?.add(v)?.add(w)
}
