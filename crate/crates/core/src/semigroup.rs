//! Fractional heat semigroup `e^{-t((-Delta)^{theta/2} + shift)}` and the
//! Duhamel map `I[u]_t = \int_0^t P_{t-s} u_s ds`.
//!
//! Every operator here is diagonal in Fourier space with rate
//! `lambda(k) = (2 pi |k|)^theta + shift`. Time integration uses the exact
//! exponential integrator for forcing that is piecewise linear between
//! samples; explicit time stepping of the semigroup is never used since
//! `lambda(k)` is huge at high `k`.

use std::f64::consts::PI;

use crate::calculus::{paraproduct, Para};
use crate::error::{Error, Result};
use crate::field::{Grid, SpectralField};
use crate::partition::DyadicPartition;
use crate::timefield::TimeField;

/// Order `theta` of the fractional Laplacian and the damping shift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dissipation {
    pub theta: f64,
    /// `0.0` for `e^{-t(-Delta)^{theta/2}}`, `1.0` for `P_t^{theta/2}`.
    pub shift: f64,
}

impl Dissipation {
    pub fn new(theta: f64, shift: f64) -> Result<Self> {
        if !(theta > 0.0 && theta <= 2.0) {
            return Err(Error::InvalidParameter(format!("theta = {theta} not in (0, 2]")));
        }
        if shift != 0.0 && shift != 1.0 {
            return Err(Error::InvalidParameter(format!("shift = {shift} must be 0 or 1")));
        }
        Ok(Self { theta, shift })
    }

    /// The damped semigroup `P_t^{theta/2}` (shift 1).
    pub fn damped(theta: f64) -> Result<Self> {
        Self::new(theta, 1.0)
    }

    /// The pure fractional heat semigroup (shift 0).
    pub fn pure(theta: f64) -> Result<Self> {
        Self::new(theta, 0.0)
    }

    #[inline]
    pub fn rate(&self, abs_k: f64) -> f64 {
        (2.0 * PI * abs_k).powf(self.theta) + self.shift
    }

    /// `lambda(k)` on every coefficient of `grid`.
    pub fn rate_table(&self, grid: Grid) -> Vec<f64> {
        grid.abs_k_table().into_iter().map(|r| self.rate(r)).collect()
    }
}

/// `e^{-t lambda(k)} f_hat(k)`.
pub fn propagate(f: &SpectralField, t: f64, d: Dissipation) -> Result<SpectralField> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let table: Vec<f64> = d.rate_table(f.grid()).into_iter().map(|l| (-t * l).exp()).collect();
    Ok(f.mul_real_table(&table))
}

/// `phi_1(z) = (e^z - 1) / z`.
pub fn phi1(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0
    } else {
        z.exp_m1() / z
    }
}

/// `phi_2(z) = (e^z - 1 - z) / z^2`.
pub fn phi2(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        0.5 + z / 6.0 + z * z / 24.0 + z * z * z / 120.0
    } else {
        (z.exp_m1() - z) / (z * z)
    }
}

/// Per-mode weights of one exponential-integrator step of size `dt`.
#[derive(Debug, Clone)]
pub struct Integrator {
    grid: Grid,
    dt: f64,
    decay: Vec<f64>,
    /// weight of `u_m`: `dt (phi_1 - phi_2)`
    w_prev: Vec<f64>,
    /// weight of `u_{m+1}`: `dt phi_2`
    w_next: Vec<f64>,
}

impl Integrator {
    pub fn new(grid: Grid, d: Dissipation, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::NonPositiveStep(dt));
        }
        let rates = d.rate_table(grid);
        let decay = rates.iter().map(|l| (-l * dt).exp()).collect();
        let w_prev = rates
            .iter()
            .map(|l| dt * (phi1(-l * dt) - phi2(-l * dt)))
            .collect();
        let w_next = rates.iter().map(|l| dt * phi2(-l * dt)).collect();
        Ok(Self { grid, dt, decay, w_prev, w_next })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// `acc <- e^{-lambda dt} acc + dt [phi_1 u_prev + phi_2 (u_next - u_prev)]`.
    pub fn step(&self, acc: &mut SpectralField, u_prev: &SpectralField, u_next: &SpectralField) {
        let (a, p, q) = (acc.coeffs_mut(), u_prev.coeffs(), u_next.coeffs());
        for i in 0..a.len() {
            a[i] = a[i] * self.decay[i] + p[i] * self.w_prev[i] + q[i] * self.w_next[i];
        }
    }

    /// `acc <- e^{-lambda dt} acc`.
    pub fn decay(&self, acc: &mut SpectralField) {
        for (a, e) in acc.coeffs_mut().iter_mut().zip(&self.decay) {
            *a *= e;
        }
    }

    /// Decay table `e^{-lambda(k) dt}`.
    pub fn decay_table(&self) -> &[f64] {
        &self.decay
    }

    /// `I[u]` over the samples of `u`, starting from `initial` (zero by default)
    /// at `u.t0()`.
    pub fn integrate_from(&self, u: &TimeField, initial: Option<&SpectralField>) -> Result<TimeField> {
        self.check(u)?;
        let mut acc = initial.cloned().unwrap_or_else(|| SpectralField::zeros(u.grid()));
        let mut out = Vec::with_capacity(u.len());
        out.push(acc.clone());
        for w in u.values().windows(2) {
            self.step(&mut acc, &w[0], &w[1]);
            out.push(acc.clone());
        }
        TimeField::new(u.t0(), u.dt(), out)
    }

    /// `t -> P_{t - t0} f` on the sampling of `like`.
    pub fn propagate_along(&self, f: &SpectralField, like: &TimeField) -> Result<TimeField> {
        self.check(like)?;
        let mut acc = f.clone();
        let mut out = Vec::with_capacity(like.len());
        out.push(acc.clone());
        for _ in 1..like.len() {
            self.decay(&mut acc);
            out.push(acc.clone());
        }
        TimeField::new(like.t0(), like.dt(), out)
    }

    fn check(&self, u: &TimeField) -> Result<()> {
        if (u.dt() - self.dt).abs() > 1e-12 * self.dt {
            return Err(Error::TimeMismatch(format!(
                "integrator step {} but trajectory step {}",
                self.dt,
                u.dt()
            )));
        }
        if u.grid() != self.grid {
            return Err(Error::GridMismatch {
                left: self.grid.n(),
                right: u.grid().n(),
            });
        }
        Ok(())
    }
}

/// `I[u]` with `I[u]_{t0} = 0`.
pub fn integrate_i(u: &TimeField, d: Dissipation) -> Result<TimeField> {
    Integrator::new(u.grid(), d, u.dt())?.integrate_from(u, None)
}

/// `[e^{-t A}, f <] g = e^{-tA}(f < g) - f < e^{-tA} g`.
pub fn semigroup_para_comm(
    f: &SpectralField,
    g: &SpectralField,
    t: f64,
    d: Dissipation,
    part: &DyadicPartition,
) -> Result<SpectralField> {
    let left = propagate(&paraproduct(f, g, Para::Lt, part)?, t, d)?;
    let right = paraproduct(f, &propagate(g, t, d)?, Para::Lt, part)?;
    Ok(&left - &right)
}

/// Compensated norms `t^delta ||e^{-tA} f||_{C^{alpha + theta delta}}` on `t_grid`.
pub fn schauder_probe(
    f: &SpectralField,
    d: Dissipation,
    alpha: f64,
    delta: f64,
    t_grid: &[f64],
    part: &DyadicPartition,
) -> Result<Vec<(f64, f64)>> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::InvalidParameter(format!("delta = {delta} not in [0, 1]")));
    }
    t_grid
        .iter()
        .map(|&t| {
            if !(t > 0.0) {
                return Err(Error::InvalidParameter(format!("probe time {t} must be positive")));
            }
            let p = propagate(f, t, d)?;
            Ok((t, t.powf(delta) * part.besov_norm(&p, alpha + d.theta * delta)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::random_field;
    use rustfft::num_complex::Complex64;

    fn grid() -> Grid {
        Grid::new(16).unwrap()
    }

    fn cos1(g: Grid) -> SpectralField {
        SpectralField::from_fn(g, |x1, _| (2.0 * PI * x1).cos())
    }

    #[test]
    fn propagate_identity_and_single_mode() {
        let g = grid();
        let f = random_field(g, 1, 100.0, 0.0);
        let d = Dissipation::pure(2.0).unwrap();
        assert_eq!(propagate(&f, 0.0, d).unwrap(), f);
        let c = cos1(g);
        let p = propagate(&c, 1.0, d).unwrap();
        let expect = (-4.0 * PI * PI).exp();
        assert!((p.mode(1, 0).re - 0.5 * expect).abs() < 1e-30);
        assert!(propagate(&c, -0.1, d).is_err());
    }

    #[test]
    fn semigroup_law() {
        let g = grid();
        let f = random_field(g, 2, 100.0, 0.0);
        let d = Dissipation::damped(1.8).unwrap();
        let a = propagate(&propagate(&f, 0.01, d).unwrap(), 0.02, d).unwrap();
        let b = propagate(&f, 0.03, d).unwrap();
        assert!(a.max_coeff_diff(&b) < 1e-12);
    }

    #[test]
    fn phi_functions_are_continuous_across_series_switch() {
        for z in [-1.0001e-4, -0.9999e-4, 1e-4 * 0.9999, 1.0001e-4] {
            let exact1 = (z as f64).exp_m1() / z;
            assert!((phi1(z) - exact1).abs() < 1e-12);
            assert!((phi2(z) - 0.5 - z / 6.0).abs() < 1e-8);
        }
        assert_eq!(phi1(0.0), 1.0);
        assert_eq!(phi2(0.0), 0.5);
    }

    #[test]
    fn duhamel_of_constant_forcing() {
        let g = grid();
        let c = cos1(g);
        let d = Dissipation::damped(2.0).unwrap();
        let dt = 1e-3;
        let u = TimeField::from_fn(0.0, dt, 101, |_| c.clone()).unwrap();
        let i = integrate_i(&u, d).unwrap();
        let lambda = 4.0 * PI * PI + 1.0;
        let coeff = i.last().mode(1, 0).re * 2.0;
        let expect = (1.0 - (-lambda * 0.1).exp()) / lambda;
        assert!((coeff - expect).abs() < 1e-14);
        assert!((expect - 0.0242732).abs() < 1e-7);
        assert!(i.values()[0].sup_norm() == 0.0);
    }

    #[test]
    fn duhamel_of_zero_is_zero() {
        let g = grid();
        let d = Dissipation::damped(2.0).unwrap();
        let u = TimeField::zeros(g, 0.0, 0.01, 10);
        assert_eq!(integrate_i(&u, d).unwrap().sup_norm(), 0.0);
    }

    #[test]
    fn duhamel_residual_is_second_order() {
        // Smooth forcing u_t = sin(3t) e_k; midpoint residual of the ODE
        // y' = -lambda y + u must scale like dt^2.
        let g = grid();
        let d = Dissipation::damped(1.9).unwrap();
        let lambda = d.rate(1.0);
        let residual = |dt: f64| {
            let steps = (0.2 / dt).round() as usize;
            let forcing = |t: f64| {
                let mut f = SpectralField::zeros(g);
                f.set_mode(1, 0, Complex64::new((3.0 * t).sin() + 1.0, 0.0));
                f
            };
            let u = TimeField::from_fn(0.0, dt, steps + 1, forcing).unwrap();
            let i = integrate_i(&u, d).unwrap();
            let mut worst: f64 = 0.0;
            for m in 0..steps {
                let (a, b) = (i.values()[m].mode(1, 0).re, i.values()[m + 1].mode(1, 0).re);
                let t_mid = (m as f64 + 0.5) * dt;
                let r = (b - a) / dt + lambda * 0.5 * (a + b) - ((3.0 * t_mid).sin() + 1.0);
                worst = worst.max(r.abs());
            }
            worst
        };
        let (r1, r2) = (residual(4e-3), residual(2e-3));
        let order = (r1 / r2).log2();
        assert!(order > 1.8, "observed order {order} ({r1}, {r2})");
    }

    #[test]
    fn integrate_is_linear() {
        let g = grid();
        let d = Dissipation::damped(2.0).unwrap();
        let a = TimeField::from_fn(0.0, 0.01, 8, |t| random_field(g, (t * 1e4) as u64, 100.0, 0.0)).unwrap();
        let b = TimeField::from_fn(0.0, 0.01, 8, |t| random_field(g, 7 + (t * 1e4) as u64, 100.0, 0.0)).unwrap();
        let lhs = integrate_i(&a.add(&b.scale(2.5)).unwrap(), d).unwrap();
        let rhs = integrate_i(&a, d).unwrap().add(&integrate_i(&b, d).unwrap().scale(2.5)).unwrap();
        assert!(lhs.sup_diff(&rhs).unwrap() < 1e-14);
    }

    #[test]
    fn semigroup_commutator_edge_cases() {
        let g = Grid::new(32).unwrap();
        let part = DyadicPartition::new(g);
        let d = Dissipation::pure(2.0).unwrap();
        let f = random_field(g, 3, 100.0, 0.0);
        let h = random_field(g, 4, 100.0, 0.0);
        assert!(semigroup_para_comm(&f, &h, 0.0, d, &part).unwrap().sup_norm() < 1e-13);
        let cst = SpectralField::constant(g, 2.0);
        assert!(semigroup_para_comm(&cst, &h, 0.01, d, &part).unwrap().sup_norm() < 1e-13);
    }

    #[test]
    fn semigroup_commutator_vanishes_linearly() {
        let g = Grid::new(32).unwrap();
        let part = DyadicPartition::new(g);
        let d = Dissipation::pure(2.0).unwrap();
        let f = random_field(g, 5, 100.0, 1.0);
        let h = random_field(g, 6, 100.0, 1.0);
        // The largest rate on the grid is ~2e4, so t = 1e-7 is deep in the
        // regime where the commutator is linear in t.
        let c1 = semigroup_para_comm(&f, &h, 1e-7, d, &part).unwrap().sup_norm();
        let c2 = semigroup_para_comm(&f, &h, 1e-6, d, &part).unwrap().sup_norm();
        let order = (c2 / c1).log10();
        assert!(order > 0.9 && order < 1.1, "observed exponent {order}");
    }

    #[test]
    fn schauder_probe_single_mode_closed_form() {
        let g = Grid::new(32).unwrap();
        let part = DyadicPartition::new(g);
        let d = Dissipation::pure(2.0).unwrap();
        // |k| = 8 is a pure block-2 mode with lattice amplitude 1.
        let mut f = SpectralField::zeros(g);
        f.set_mode(8, 0, Complex64::new(0.5, 0.0));
        let (alpha, delta) = (-1.2, 0.5);
        let ts = [1e-4, 1e-3, 1e-2];
        let probe = schauder_probe(&f, d, alpha, delta, &ts, &part).unwrap();
        for (t, v) in probe {
            let lambda = (2.0 * PI * 8.0).powi(2);
            let expect = t.powf(delta) * (-t * lambda).exp() * 2f64.powf(2.0 * (alpha + 2.0 * delta));
            assert!((v - expect).abs() <= 1e-12 * expect.max(1e-300), "t = {t}: {v} vs {expect}");
        }
        let flat = schauder_probe(&f, d, alpha, 0.0, &ts, &part).unwrap();
        let base = part.besov_norm(&f, alpha);
        assert!(flat.iter().all(|&(_, v)| v <= base + 1e-15));
    }
}
