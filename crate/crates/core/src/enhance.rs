//! The driver `(X, V, Y, Z, W, Zhat, What)` built from an OU path (the
//! stationary enhancement) or from a smooth deterministic forcing (the
//! natural enhancement), and the order-zero chaos tables of the quadratic
//! components.

use std::f64::consts::PI;

use serde::Serialize;

use crate::calculus::{gradient, padded, partial, riesz, riesz_perp, Accumulator, Blocks};
use crate::error::{Error, Result};
use crate::field::{Grid, SpectralField};
use crate::noise::{ChiProfile, Mollifier, NoisePath, OuStream};
use crate::partition::DyadicPartition;
use crate::semigroup::{Dissipation, Integrator};
use crate::timefield::{time_norm, TimeField, TimeNormSpec};

/// Driver components; the vector ones (`V`, `W`, `What`) are normed as the
/// max over their two entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Component {
    X,
    V,
    Y,
    Z,
    W,
    Zhat,
    What,
}

impl Component {
    pub const ALL: [Component; 7] = [
        Component::X,
        Component::V,
        Component::Y,
        Component::Z,
        Component::W,
        Component::Zhat,
        Component::What,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Component::X => "X",
            Component::V => "V",
            Component::Y => "Y",
            Component::Z => "Z",
            Component::W => "W",
            Component::Zhat => "Zhat",
            Component::What => "What",
        }
    }

    /// Spatial regularity exponent of the limiting component (chaos order
    /// times `theta/2 - 1` plus the integration gain).
    pub fn regularity(self, theta: f64) -> f64 {
        match self {
            Component::X => theta / 2.0 - 1.0,
            Component::V => 1.5 * theta - 2.0,
            Component::Y => 2.0 * theta - 3.0,
            Component::W | Component::What => 2.0 * theta - 4.0,
            Component::Z | Component::Zhat => 2.5 * theta - 5.0,
        }
    }
}

/// How a driver was produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriverMeta {
    pub theta: f64,
    pub eps: Option<f64>,
    pub chi: Option<ChiProfile>,
    pub seed: Option<u64>,
    pub t_burn: f64,
}

/// The seven driver components on a common time grid starting at `t = 0`.
#[derive(Debug, Clone)]
pub struct Driver {
    pub x: TimeField,
    pub v: [TimeField; 2],
    pub y: TimeField,
    pub z: TimeField,
    pub w: [TimeField; 2],
    pub zhat: TimeField,
    pub what: [TimeField; 2],
    pub meta: DriverMeta,
}

impl Driver {
    pub fn grid(&self) -> Grid {
        self.x.grid()
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.x.dt()
    }

    /// The scalar fields making up a component (one or two).
    pub fn parts(&self, c: Component) -> Vec<&TimeField> {
        match c {
            Component::X => vec![&self.x],
            Component::V => self.v.iter().collect(),
            Component::Y => vec![&self.y],
            Component::Z => vec![&self.z],
            Component::W => self.w.iter().collect(),
            Component::Zhat => vec![&self.zhat],
            Component::What => self.what.iter().collect(),
        }
    }

    /// Estimated `C_T C^alpha` norm of a component.
    pub fn norm(&self, c: Component, alpha: f64, part: &DyadicPartition) -> Result<f64> {
        let mut best: f64 = 0.0;
        for u in self.parts(c) {
            best = best.max(time_norm(u, TimeNormSpec::ct(alpha), part)?);
        }
        Ok(best)
    }

    /// `C_T C^alpha` norm of the difference of a component between two drivers.
    pub fn diff_norm(&self, other: &Driver, c: Component, alpha: f64, part: &DyadicPartition) -> Result<f64> {
        let mut best: f64 = 0.0;
        for (a, b) in self.parts(c).into_iter().zip(other.parts(c)) {
            best = best.max(time_norm(&a.sub(b)?, TimeNormSpec::ct(alpha), part)?);
        }
        Ok(best)
    }

    /// Norms of every component at `regularity - kappa`.
    pub fn norm_snapshot(&self, kappa: f64, part: &DyadicPartition) -> Result<Vec<(Component, f64)>> {
        Component::ALL
            .iter()
            .map(|&c| Ok((c, self.norm(c, c.regularity(self.meta.theta) - kappa, part)?)))
            .collect()
    }

    /// Every component multiplied by `s` (not an enhancement of `s X`).
    pub fn scaled(&self, s: f64) -> Driver {
        let sc = |u: &TimeField| u.scale(s);
        Driver {
            x: sc(&self.x),
            v: [sc(&self.v[0]), sc(&self.v[1])],
            y: sc(&self.y),
            z: sc(&self.z),
            w: [sc(&self.w[0]), sc(&self.w[1])],
            zhat: sc(&self.zhat),
            what: [sc(&self.what[0]), sc(&self.what[1])],
            meta: self.meta.clone(),
        }
    }

    /// The driver restricted to its first `len` samples.
    pub fn truncate(&self, len: usize) -> Driver {
        let tr = |u: &TimeField| u.truncate(len);
        Driver {
            x: tr(&self.x),
            v: [tr(&self.v[0]), tr(&self.v[1])],
            y: tr(&self.y),
            z: tr(&self.z),
            w: [tr(&self.w[0]), tr(&self.w[1])],
            zhat: tr(&self.zhat),
            what: [tr(&self.what[0]), tr(&self.what[1])],
            meta: self.meta.clone(),
        }
    }
}

/// Quadratic components at one instant.
#[derive(Debug, Clone)]
pub struct Quadratic {
    pub z: SpectralField,
    pub w: [SpectralField; 2],
    pub zhat: SpectralField,
    pub what: [SpectralField; 2],
}

/// `Z`, `W`, `Zhat`, `What` from `X`, `V`, `Y` at one instant.
pub fn quadratic_components(
    x: &SpectralField,
    v: &[SpectralField; 2],
    y: &SpectralField,
    part: &DyadicPartition,
) -> Quadratic {
    let grid = x.grid();
    let b = |f: &SpectralField| Blocks::new(f, part);
    let (dx1, dx2) = (b(&partial(x, 1)), b(&partial(x, 2)));
    let (r1x, r2x) = (b(&riesz(x, 1)), b(&riesz(x, 2)));

    // Z = R2 Y o d1 X - R1 Y o d2 X
    let mut acc = Accumulator::new(grid);
    acc.add_resonant(1.0, &b(&riesz(y, 2)), &dx1);
    acc.add_resonant(-1.0, &b(&riesz(y, 1)), &dx2);
    let z = acc.finish();

    // Zhat = d1 Y . R2 X - d2 Y . R1 X
    let mut acc = Accumulator::new(grid);
    acc.add_product(1.0, &padded(&partial(y, 1)), r2x.full());
    acc.add_product(-1.0, &padded(&partial(y, 2)), r1x.full());
    let zhat = acc.finish();

    let mut w = Vec::with_capacity(2);
    let mut what = Vec::with_capacity(2);
    for vi in v {
        // W_i = R2 V_i o d1 X - R1 V_i o d2 X
        let mut acc = Accumulator::new(grid);
        acc.add_resonant(1.0, &b(&riesz(vi, 2)), &dx1);
        acc.add_resonant(-1.0, &b(&riesz(vi, 1)), &dx2);
        w.push(acc.finish());
        // What_i = R2 X o d1 V_i - R1 X o d2 V_i
        let mut acc = Accumulator::new(grid);
        acc.add_resonant(1.0, &r2x, &b(&partial(vi, 1)));
        acc.add_resonant(-1.0, &r1x, &b(&partial(vi, 2)));
        what.push(acc.finish());
    }
    let [w0, w1]: [SpectralField; 2] = w.try_into().unwrap();
    let [h0, h1]: [SpectralField; 2] = what.try_into().unwrap();
    Quadratic { z, w: [w0, w1], zhat, what: [h0, h1] }
}

/// `R^perp X . grad X = R2 X d1 X - R1 X d2 X`.
pub fn transport_self(x: &SpectralField) -> SpectralField {
    let [p1, p2] = riesz_perp(x);
    let [d1, d2] = gradient(x);
    let (a1, b1) = SpectralField::to_padded_pair(&p1, &d1);
    let (a2, b2) = SpectralField::to_padded_pair(&p2, &d2);
    let mut acc = Accumulator::new(x.grid());
    acc.add_product(1.0, &a1, &b1);
    acc.add_product(1.0, &a2, &b2);
    acc.finish()
}

/// Sampling of the enhancement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnhanceOptions {
    /// Keep every `record_stride`-th step of `[0, T]`; the integrals always
    /// use every step.
    pub record_stride: usize,
    /// Required `lambda_min t_burn`, where `lambda_min = (2 pi)^theta + 1` is
    /// the slowest rate forced by `grad X` and `R^perp X . grad X` (both have
    /// zero mean).
    pub min_relaxation: f64,
}

impl Default for EnhanceOptions {
    fn default() -> Self {
        Self { record_stride: 1, min_relaxation: 10.0 }
    }
}

/// Slowest relaxation rate of `V` and `Y`.
pub fn forced_rate(theta: f64) -> f64 {
    (2.0 * PI).powf(theta) + 1.0
}

/// Check that a burn-in of length `t_burn` relaxes `V` and `Y` by `e^{-min_relaxation}`.
pub fn check_burn_in(theta: f64, t_burn: f64, min_relaxation: f64) -> Result<()> {
    let achieved = forced_rate(theta) * t_burn;
    if achieved + 1e-9 < min_relaxation {
        return Err(Error::InsufficientBurnIn(format!(
            "t_burn = {t_burn} gives relaxation {achieved:.3} < {min_relaxation}; need t_burn >= {:.4}",
            min_relaxation / forced_rate(theta)
        )));
    }
    Ok(())
}

/// Streaming enhancer: feed `X` one sample at a time.
struct Enhancer {
    part: DyadicPartition,
    integ: Integrator,
    v: [SpectralField; 2],
    y: SpectralField,
    prev: Option<([SpectralField; 2], SpectralField)>,
    stride: usize,
    steps_since_zero: Option<usize>,
    rec: Records,
}

#[derive(Default)]
struct Records {
    x: Vec<SpectralField>,
    v: [Vec<SpectralField>; 2],
    y: Vec<SpectralField>,
    z: Vec<SpectralField>,
    w: [Vec<SpectralField>; 2],
    zhat: Vec<SpectralField>,
    what: [Vec<SpectralField>; 2],
}

impl Enhancer {
    fn new(grid: Grid, d: Dissipation, dt: f64, stride: usize, v0: [SpectralField; 2], y0: SpectralField) -> Result<Self> {
        if stride == 0 {
            return Err(Error::InvalidParameter("record stride must be positive".into()));
        }
        Ok(Self {
            part: DyadicPartition::new(grid),
            integ: Integrator::new(grid, d, dt)?,
            v: v0,
            y: y0,
            prev: None,
            stride,
            steps_since_zero: None,
            rec: Records::default(),
        })
    }

    /// Advance `V`, `Y` to the time of `x`; `at_or_after_zero` marks `t >= 0`.
    fn push(&mut self, x: &SpectralField, at_or_after_zero: bool) {
        let grad = gradient(x);
        let nl = transport_self(x);
        if let Some((pg, pn)) = &self.prev {
            for i in 0..2 {
                self.integ.step(&mut self.v[i], &pg[i], &grad[i]);
            }
            self.integ.step(&mut self.y, pn, &nl);
        }
        self.prev = Some((grad, nl));
        if at_or_after_zero {
            let s = self.steps_since_zero.map_or(0, |s| s + 1);
            self.steps_since_zero = Some(s);
            if s % self.stride == 0 {
                self.record(x);
            }
        }
    }

    fn record(&mut self, x: &SpectralField) {
        let q = quadratic_components(x, &self.v, &self.y, &self.part);
        let r = &mut self.rec;
        r.x.push(x.clone());
        r.y.push(self.y.clone());
        r.z.push(q.z);
        r.zhat.push(q.zhat);
        for i in 0..2 {
            r.v[i].push(self.v[i].clone());
        }
        let [w0, w1] = q.w;
        let [h0, h1] = q.what;
        r.w[0].push(w0);
        r.w[1].push(w1);
        r.what[0].push(h0);
        r.what[1].push(h1);
    }

    fn finish(self, dt: f64, meta: DriverMeta) -> Result<Driver> {
        let step = dt * self.stride as f64;
        let tf = |v: Vec<SpectralField>| TimeField::new(0.0, step, v);
        let Records { x, v, y, z, w, zhat, what } = self.rec;
        let [v0, v1] = v;
        let [w0, w1] = w;
        let [h0, h1] = what;
        Ok(Driver {
            x: tf(x)?,
            v: [tf(v0)?, tf(v1)?],
            y: tf(y)?,
            z: tf(z)?,
            w: [tf(w0)?, tf(w1)?],
            zhat: tf(zhat)?,
            what: [tf(h0)?, tf(h1)?],
            meta,
        })
    }
}

/// Index of `t = 0` in a trajectory starting at `t0 <= 0`.
fn zero_index(x: &TimeField) -> Result<usize> {
    let z = -x.t0() / x.dt();
    if x.t0() > 0.0 || (z - z.round()).abs() > 1e-9 {
        return Err(Error::TimeMismatch(format!(
            "t = 0 is not a sample of the trajectory (t0 = {}, dt = {})",
            x.t0(),
            x.dt()
        )));
    }
    let z = z.round() as usize;
    if z + 1 >= x.len() {
        return Err(Error::EmptyTimeRange);
    }
    Ok(z)
}

/// Stationary enhancement of an OU path given on `[-t_burn, T]`: `V`, `Y`
/// start from zero at `-t_burn` and the burn-in is discarded.
pub fn enhance(x: &TimeField, theta: f64, moll: Option<&Mollifier>, opts: &EnhanceOptions) -> Result<Driver> {
    let d = Dissipation::damped(theta)?;
    let z = zero_index(x)?;
    let t_burn = z as f64 * x.dt();
    check_burn_in(theta, t_burn, opts.min_relaxation)?;
    let grid = x.grid();
    let zero = SpectralField::zeros(grid);
    let mut e = Enhancer::new(grid, d, x.dt(), opts.record_stride, [zero.clone(), zero.clone()], zero)?;
    for (m, xm) in x.values().iter().enumerate() {
        e.push(xm, m >= z);
    }
    e.finish(
        x.dt(),
        DriverMeta {
            theta,
            eps: moll.map(|m| m.eps),
            chi: moll.map(|m| m.chi),
            seed: None,
            t_burn,
        },
    )
}

/// Stationary enhancements of one noise path under several mollifiers
/// (common random numbers). The raw OU path is generated once.
pub fn enhance_noise(
    noise: &NoisePath,
    theta: f64,
    molls: &[Mollifier],
    opts: &EnhanceOptions,
) -> Result<Vec<Driver>> {
    let d = Dissipation::damped(theta)?;
    check_burn_in(theta, noise.t_burn(), opts.min_relaxation)?;
    if noise.n_steps() == 0 {
        return Err(Error::EmptyTimeRange);
    }
    let grid = noise.grid();
    let tables: Vec<Vec<f64>> = molls.iter().map(|m| m.table(grid)).collect();
    let zero = SpectralField::zeros(grid);
    let mut enhancers = molls
        .iter()
        .map(|_| Enhancer::new(grid, d, noise.dt(), opts.record_stride, [zero.clone(), zero.clone()], zero.clone()))
        .collect::<Result<Vec<_>>>()?;
    for (m, raw) in OuStream::new(noise, theta, None)?.enumerate() {
        for (e, table) in enhancers.iter_mut().zip(&tables) {
            e.push(&raw.mul_real_table(table), m >= noise.n_burn());
        }
    }
    enhancers
        .into_iter()
        .zip(molls)
        .map(|(e, m)| {
            e.finish(
                noise.dt(),
                DriverMeta {
                    theta,
                    eps: Some(m.eps),
                    chi: Some(m.chi),
                    seed: Some(noise.seed()),
                    t_burn: noise.t_burn(),
                },
            )
        })
        .collect()
}

/// Natural enhancement of a smooth input: `X = P X0 + I[xi]`,
/// `V = P V0 + I[grad X]`, `Y = P Y0 + I[R^perp X . grad X]` on the
/// sampling of `xi` (which must start at `t = 0`).
pub fn natural_enhancement(
    x0: &SpectralField,
    xi: &TimeField,
    v0: &[SpectralField; 2],
    y0: &SpectralField,
    theta: f64,
) -> Result<Driver> {
    if xi.t0() != 0.0 {
        return Err(Error::TimeMismatch(format!("forcing starts at {} instead of 0", xi.t0())));
    }
    let d = Dissipation::damped(theta)?;
    let x = Integrator::new(xi.grid(), d, xi.dt())?.integrate_from(xi, Some(x0))?;
    let mut e = Enhancer::new(xi.grid(), d, xi.dt(), 1, v0.clone(), y0.clone())?;
    for xm in x.values() {
        e.push(xm, true);
    }
    e.finish(xi.dt(), DriverMeta { theta, eps: None, chi: None, seed: None, t_burn: 0.0 })
}

/// Which antisymmetric combination a Pi_0 table describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Pi0Kind {
    Y,
    What,
    W,
}

impl Pi0Kind {
    pub fn name(self) -> &'static str {
        match self {
            Pi0Kind::Y => "Y",
            Pi0Kind::What => "What",
            Pi0Kind::W => "W",
        }
    }
}

/// A Fourier symbol `i^ipow * weight * mono` with an integer monomial in `k`.
#[derive(Debug, Clone, Copy)]
struct Symbol {
    ipow: u32,
    weight: f64,
    mono: i64,
}

impl Symbol {
    fn riesz(k: (i64, i64), l: usize) -> Self {
        let r = ((k.0 * k.0 + k.1 * k.1) as f64).sqrt();
        Self { ipow: 1, weight: 1.0 / r, mono: if l == 1 { k.0 } else { k.1 } }
    }

    fn deriv(k: (i64, i64), l: usize) -> Self {
        Self { ipow: 1, weight: 2.0 * PI, mono: if l == 1 { k.0 } else { k.1 } }
    }

    fn times(self, o: Symbol) -> Symbol {
        Symbol { ipow: self.ipow + o.ipow, weight: self.weight * o.weight, mono: self.mono * o.mono }
    }
}

/// Per-mode summands of `E[first term] - E[second term]` for the mode pair
/// `(k, -k)`, from the closed-form stationary covariances
/// `E|X(k)|^2 = chi^2 / (2 lambda)` and `E[X(-k) V_i(k)] = 2 pi i k_i chi^2 / (4 lambda^2)`.
/// The two terms always carry the same power of `i` and the same real
/// weight, which is factored out; the stored value is
/// `weight * (mono_first - mono_second)`. One table for `Y`, one per
/// component `i` for `What` and `W`.
pub fn pi0_summand(kind: Pi0Kind, theta: f64, moll: &Mollifier, grid: Grid) -> Result<Vec<Vec<f64>>> {
    let d = Dissipation::damped(theta)?;
    let part = DyadicPartition::new(grid);
    let chi = moll.table(grid);
    let rho: Vec<&[f64]> = (-1..=part.j_max()).map(|j| part.rho(j).unwrap()).collect();
    let resonant = |idx: usize| {
        let mut s = 0.0;
        for a in 0..rho.len() {
            for b in a.saturating_sub(1)..(a + 2).min(rho.len()) {
                s += rho[a][idx] * rho[b][idx];
            }
        }
        s
    };
    let components = if kind == Pi0Kind::Y { 1 } else { 2 };
    let mut out = vec![vec![0.0; grid.len()]; components];
    for idx in 0..grid.len() {
        let k = grid.wavevector(idx);
        if (k.0 == 0 && k.1 == 0) || grid.is_nyquist(idx) {
            continue;
        }
        let neg = (-k.0, -k.1);
        let lambda = d.rate(((k.0 * k.0 + k.1 * k.1) as f64).sqrt());
        let c2 = chi[idx] * chi[idx];
        for (i, row) in out.iter_mut().enumerate() {
            let (first, second, cov) = match kind {
                // R2 X(k) d1 X(-k) - R1 X(k) d2 X(-k)
                Pi0Kind::Y => (
                    Symbol::riesz(k, 2).times(Symbol::deriv(neg, 1)),
                    Symbol::riesz(k, 1).times(Symbol::deriv(neg, 2)),
                    c2 / (2.0 * lambda),
                ),
                // R2 X(-k) o d1 V_i(k) - R1 X(-k) o d2 V_i(k)
                Pi0Kind::What => (
                    Symbol::riesz(neg, 2).times(Symbol::deriv(k, 1)).times(Symbol::deriv(k, i + 1)),
                    Symbol::riesz(neg, 1).times(Symbol::deriv(k, 2)).times(Symbol::deriv(k, i + 1)),
                    resonant(idx) * c2 / (4.0 * lambda * lambda),
                ),
                // R2 V_i(k) o d1 X(-k) - R1 V_i(k) o d2 X(-k)
                Pi0Kind::W => (
                    Symbol::riesz(k, 2).times(Symbol::deriv(k, i + 1)).times(Symbol::deriv(neg, 1)),
                    Symbol::riesz(k, 1).times(Symbol::deriv(k, i + 1)).times(Symbol::deriv(neg, 2)),
                    resonant(idx) * c2 / (4.0 * lambda * lambda),
                ),
            };
            debug_assert_eq!(first.ipow, second.ipow);
            debug_assert_eq!(first.weight.to_bits(), second.weight.to_bits());
            row[idx] = first.weight * cov * (first.mono - second.mono) as f64;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{ou_path, sample_noise};
    use crate::semigroup::integrate_i;
    use rustfft::num_complex::Complex64;

    #[test]
    fn zero_input_gives_zero_driver() {
        let g = Grid::new(16).unwrap();
        let x = TimeField::zeros(g, -1.0, 0.01, 111);
        let drv = enhance(&x, 2.0, None, &EnhanceOptions::default()).unwrap();
        assert_eq!(drv.len(), 11);
        for c in Component::ALL {
            for u in drv.parts(c) {
                assert_eq!(u.sup_norm(), 0.0, "{}", c.name());
            }
        }
    }

    #[test]
    fn insufficient_burn_in_is_rejected() {
        let g = Grid::new(16).unwrap();
        let x = TimeField::zeros(g, -0.1, 0.01, 20);
        assert!(matches!(
            enhance(&x, 2.0, None, &EnhanceOptions::default()),
            Err(Error::InsufficientBurnIn(_))
        ));
        assert!(check_burn_in(2.0, 0.25, 10.0).is_ok());
        assert!(check_burn_in(1.8, 0.25, 10.0).is_err());
    }

    #[test]
    fn single_x_mode_has_no_transport() {
        let g = Grid::new(16).unwrap();
        let x = TimeField::from_fn(-0.5, 0.005, 151, |t| {
            let mut f = SpectralField::zeros(g);
            f.set_mode(1, 0, Complex64::new(0.5 * (1.0 + t).cos(), 0.0));
            f
        })
        .unwrap();
        let drv = enhance(&x, 2.0, None, &EnhanceOptions::default()).unwrap();
        assert!(drv.y.sup_norm() < 1e-15);
        assert!(drv.zhat.sup_norm() < 1e-15);
        assert!(drv.v[0].sup_norm() > 1e-3);
        assert_eq!(drv.v[1].sup_norm(), 0.0);
    }

    #[test]
    fn driver_relation_holds() {
        let g = Grid::new(16).unwrap();
        let noise = sample_noise(g, 2e-3, 0.26, 0.05, 5).unwrap();
        let moll = Mollifier::bump(0.2).unwrap();
        let x = ou_path(&noise, 2.0, &moll).unwrap();
        let drv = enhance(&x, 2.0, Some(&moll), &EnhanceOptions::default()).unwrap();
        let d = Dissipation::damped(2.0).unwrap();
        for i in 0..2 {
            let grad = drv.x.map(|f| gradient(f)[i].clone());
            let integ = Integrator::new(g, d, drv.dt()).unwrap();
            let free = integ.propagate_along(drv.v[i].values().first().unwrap(), &grad).unwrap();
            let rhs = free.add(&integrate_i(&grad, d).unwrap()).unwrap();
            let err = drv.v[i].sup_diff(&rhs).unwrap();
            assert!(err <= 1e-8 * drv.v[i].sup_norm(), "component {i}: {err}");
        }
    }

    #[test]
    fn streamed_and_stored_enhancements_agree() {
        let g = Grid::new(16).unwrap();
        let noise = sample_noise(g, 2e-3, 0.26, 0.02, 9).unwrap();
        let moll = Mollifier::bump(0.25).unwrap();
        let x = ou_path(&noise, 2.0, &moll).unwrap();
        let opts = EnhanceOptions { record_stride: 5, ..Default::default() };
        let a = enhance(&x, 2.0, Some(&moll), &opts).unwrap();
        let b = enhance_noise(&noise, 2.0, &[moll], &opts).unwrap().remove(0);
        assert_eq!(a.len(), 3);
        for c in Component::ALL {
            for (u, v) in a.parts(c).into_iter().zip(b.parts(c)) {
                assert!(u.sup_diff(v).unwrap() <= 1e-13 * (1.0 + u.sup_norm()));
            }
        }
    }

    #[test]
    fn pi0_tables_vanish() {
        let g = Grid::new(32).unwrap();
        let moll = Mollifier::bump(0.1).unwrap();
        for kind in [Pi0Kind::Y, Pi0Kind::What, Pi0Kind::W] {
            for table in pi0_summand(kind, 2.0, &moll, g).unwrap() {
                assert!(table.iter().all(|v| v.to_bits() == 0 || *v == 0.0));
            }
        }
    }
}
