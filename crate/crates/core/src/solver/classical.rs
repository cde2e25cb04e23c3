use crate::enhance::transport_self;
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::noise::{Mollifier, NoisePath, OuStepper};
use crate::semigroup::{Dissipation, Integrator};
use crate::timefield::TimeField;

/// Additive forcing of the classical solver, supplied as per-step increments.
pub enum Forcing<'a> {
    /// The OU innovations that also build `X` from this noise (pathwise coupling).
    Ou { noise: &'a NoisePath, moll: Mollifier },
    /// A deterministic field sampled on `[0, T]`, integrated exactly as a
    /// piecewise-linear function of time.
    Smooth(&'a TimeField),
}

/// `N(u) = R^perp u . grad u + u`.
pub fn nonlinearity(u: &SpectralField) -> SpectralField {
    &transport_self(u) + u
}

/// First-order exponential Euler for the mild equation
/// `u = P u0 + I[R^perp u . grad u + u + xi]`:
/// `u_{m+1} = e^{-lambda dt} u_m + dt phi_1(-lambda dt) N(u_m) + eta_m`.
pub fn classical_mild_solve(
    forcing: Forcing,
    u0: &SpectralField,
    theta: f64,
    t_final: f64,
    dt: f64,
) -> Result<TimeField> {
    let grid = u0.grid();
    let d = Dissipation::damped(theta)?;
    let integ = Integrator::new(grid, d, dt)?;
    let steps = (t_final / dt).round() as usize;
    if steps == 0 {
        return Err(Error::EmptyTimeRange);
    }
    let ou = match &forcing {
        Forcing::Ou { noise, moll } => {
            if noise.grid() != grid {
                return Err(Error::GridMismatch { left: grid.n(), right: noise.grid().n() });
            }
            if (noise.dt() - dt).abs() > 1e-12 * dt || noise.n_steps() < steps {
                return Err(Error::TimeMismatch("noise path does not cover [0, T] at this dt".into()));
            }
            Some(OuStepper::new(grid, d, dt, Some(moll)))
        }
        Forcing::Smooth(xi) => {
            if xi.grid() != grid {
                return Err(Error::GridMismatch { left: grid.n(), right: xi.grid().n() });
            }
            if (xi.dt() - dt).abs() > 1e-12 * dt || xi.len() < steps + 1 || xi.t0() != 0.0 {
                return Err(Error::TimeMismatch("forcing does not cover [0, T] at this dt".into()));
            }
            None
        }
    };
    let mut out = Vec::with_capacity(steps + 1);
    let mut u = u0.clone();
    out.push(u.clone());
    for m in 0..steps {
        let sup = u.sup_norm();
        if !(sup * dt <= 0.5) {
            return Err(Error::StepSize(sup * dt));
        }
        let n = nonlinearity(&u);
        integ.step(&mut u, &n, &n);
        match &forcing {
            Forcing::Ou { noise, .. } => {
                let g = noise.gaussians(noise.n_burn() + m + 1);
                u += &ou.as_ref().unwrap().innovation(&g);
            }
            Forcing::Smooth(xi) => {
                let mut eta = SpectralField::zeros(grid);
                integ.step(&mut eta, &xi.values()[m], &xi.values()[m + 1]);
                u += &eta;
            }
        }
        out.push(u.clone());
    }
    TimeField::new(0.0, dt, out)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use rustfft::num_complex::Complex64;

    use super::*;
    use crate::experiments::smooth_data;
    use crate::field::{random_field, Grid};
    use crate::noise::sample_noise;

    #[test]
    fn transport_has_zero_mean() {
        let grid = Grid::new(32).unwrap();
        for seed in 0..5 {
            let u = random_field(grid, seed, f64::INFINITY, 1.0);
            let u = u.scale(1.0 / u.sup_norm());
            assert!((&nonlinearity(&u) - &u).mean().abs() < 1e-12);
        }
    }

    #[test]
    fn zero_data_stays_zero() {
        let grid = Grid::new(16).unwrap();
        let xi = TimeField::zeros(grid, 0.0, 1e-3, 101);
        let u = classical_mild_solve(Forcing::Smooth(&xi), &SpectralField::zeros(grid), 2.0, 0.1, 1e-3).unwrap();
        assert_eq!(u.sup_norm(), 0.0);
    }

    #[test]
    fn single_mode_is_linear() {
        // R^perp e_k . grad e_k = 0, so u(k) solves y' = -(lambda - 1) y
        let grid = Grid::new(16).unwrap();
        let mut u0 = SpectralField::zeros(grid);
        u0.set_mode(1, 1, Complex64::new(0.3, 0.1));
        let lambda = (2.0 * PI * 2f64.sqrt()).powi(2) + 1.0;
        let exact = (-(lambda - 1.0) * 0.1f64).exp();
        let err = |dt: f64| {
            let xi = TimeField::zeros(grid, 0.0, dt, (0.1 / dt).round() as usize + 1);
            let u = classical_mild_solve(Forcing::Smooth(&xi), &u0, 2.0, 0.1, dt).unwrap();
            (u.last().mode(1, 1) / u0.mode(1, 1) - exact).norm() / exact
        };
        let (e1, e2) = (err(1e-3), err(5e-4));
        assert!(e1 < 0.05, "{e1}");
        assert!((e1 / e2 - 2.0).abs() < 0.2, "{}", e1 / e2);
    }

    #[test]
    fn first_order_in_dt() {
        // errors at dt and dt/2 against a reference eight times finer than the finer run
        let grid = Grid::new(16).unwrap();
        let (t, dt) = (0.1, 2e-3);
        let run = |h: f64| {
            let steps = (t / h).round() as usize;
            let (x0, xi) = smooth_data(grid, h, steps, 3.0).unwrap();
            classical_mild_solve(Forcing::Smooth(&xi), &x0, 2.0, t, h).unwrap().last().clone()
        };
        let reference = run(dt / 16.0);
        let e1 = (&run(dt) - &reference).sup_norm();
        let e2 = (&run(dt / 2.0) - &reference).sup_norm();
        let ratio = e1 / e2;
        assert!((1.7..=2.3).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn ou_forcing_follows_x_at_small_amplitude() {
        // with u0 = X(0) the solution is X plus the response to N(u) = O(|X|)
        let grid = Grid::new(16).unwrap();
        let noise = sample_noise(grid, 1e-3, 0.0, 0.05, 3).unwrap();
        let moll = Mollifier::bump(0.2).unwrap();
        let x = crate::noise::ou_path(&noise, 2.0, &moll).unwrap();
        let u = classical_mild_solve(Forcing::Ou { noise: &noise, moll }, &x.values()[0], 2.0, 0.05, 1e-3).unwrap();
        assert_eq!(u.len(), 51);
        let gap = (u.last() - x.last()).sup_norm();
        assert!(gap > 0.0 && gap < 0.1 * x.sup_norm(), "{gap}");
        let too_long = classical_mild_solve(Forcing::Ou { noise: &noise, moll }, &x.values()[0], 2.0, 0.1, 1e-3);
        assert!(matches!(too_long, Err(Error::TimeMismatch(_))));
    }
}
