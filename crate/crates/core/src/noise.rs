//! Mollified space-time white noise and its stationary Ornstein-Uhlenbeck
//! process `X = I[xi]`.
//!
//! The Gaussians behind a path are addressed by `(seed, step, mode)`: each
//! step is a ChaCha stream and each half-lattice mode owns a fixed window of
//! that stream, so any window of steps or subset of modes can be regenerated
//! on its own and the same draws serve every grid size and every `eps`.

use std::f64::consts::PI;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{gaussian_pair, Grid, SpectralField};
use crate::semigroup::Dissipation;
use crate::timefield::TimeField;

/// Radial cut-off profile `chi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChiProfile {
    /// `exp(1 - 1 / (1 - r^2))` for `r < 1`.
    Bump,
    /// `cos^2(pi r / 2)` for `r < 1`.
    CosineTaper,
}

impl ChiProfile {
    pub fn eval(self, r: f64) -> f64 {
        if r >= 1.0 {
            return 0.0;
        }
        match self {
            ChiProfile::Bump => (1.0 - 1.0 / (1.0 - r * r)).exp(),
            ChiProfile::CosineTaper => (0.5 * PI * r).cos().powi(2),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ChiProfile::Bump => "bump",
            ChiProfile::CosineTaper => "cosine_taper",
        }
    }
}

/// Fourier cut-off `k -> chi(eps k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mollifier {
    pub eps: f64,
    pub chi: ChiProfile,
}

impl Mollifier {
    pub fn new(eps: f64, chi: ChiProfile) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::InvalidParameter(format!("eps = {eps} not in (0, 1]")));
        }
        Ok(Self { eps, chi })
    }

    pub fn bump(eps: f64) -> Result<Self> {
        Self::new(eps, ChiProfile::Bump)
    }

    pub fn factor(&self, abs_k: f64) -> f64 {
        self.chi.eval(self.eps * abs_k)
    }

    /// `chi(eps k)` on every coefficient of `grid`; zero on Nyquist modes.
    pub fn table(&self, grid: Grid) -> Vec<f64> {
        grid.abs_k_table()
            .into_iter()
            .enumerate()
            .map(|(idx, r)| if grid.is_nyquist(idx) { 0.0 } else { self.factor(r) })
            .collect()
    }
}

/// Grid-independent index of a half-lattice mode (`k2 > 0`, or `k2 = 0` and
/// `k1 >= 0`): Cantor pairing of the zigzag code of `k1` with `k2`.
pub fn mode_id(k1: i64, k2: i64) -> u64 {
    debug_assert!(k2 > 0 || (k2 == 0 && k1 >= 0));
    let a = if k1 >= 0 { 2 * k1 as u64 } else { (-2 * k1 - 1) as u64 };
    let b = k2 as u64;
    (a + b) * (a + b + 1) / 2 + b
}

/// Unit Gaussians `g_m(k)` on `[-t_burn, T]`, generated on demand.
#[derive(Debug, Clone)]
pub struct NoisePath {
    grid: Grid,
    dt: f64,
    n_burn: usize,
    n_steps: usize,
    seed: u64,
}

impl NoisePath {
    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Burn-in steps before `t = 0`.
    pub fn n_burn(&self) -> usize {
        self.n_burn
    }

    /// Steps on `[0, T]`.
    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn t_burn(&self) -> f64 {
        self.n_burn as f64 * self.dt
    }

    pub fn t_final(&self) -> f64 {
        self.n_steps as f64 * self.dt
    }

    /// Number of sample indices, `n_burn + n_steps + 1`.
    pub fn len(&self) -> usize {
        self.n_burn + self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Time of sample index `m` (index 0 is `-t_burn`).
    pub fn time(&self, m: usize) -> f64 {
        (m as f64 - self.n_burn as f64) * self.dt
    }

    /// Gaussians of sample index `m`: index 0 seeds the stationary initial
    /// value, index `m + 1` drives the step `m -> m + 1`. Hermitian, real at
    /// `k = 0`, zero on Nyquist modes; `E|g(k)|^2 = 1`.
    pub fn gaussians(&self, m: usize) -> SpectralField {
        let step = m as i64 - self.n_burn as i64;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(step as u64);
        let mut f = SpectralField::zeros(self.grid);
        let h = self.grid.n() as i64 / 2;
        for k2 in 0..h {
            for k1 in -h + 1..h {
                if k2 == 0 && k1 < 0 {
                    continue;
                }
                f.set_mode(k1, k2, Self::draw(&mut rng, k1, k2));
            }
        }
        f
    }

    /// The Gaussian of a single mode; agrees with [`NoisePath::gaussians`].
    pub fn gaussian_at(&self, m: usize, k1: i64, k2: i64) -> Complex64 {
        let (k1, k2, conj) = if k2 > 0 || (k2 == 0 && k1 >= 0) {
            (k1, k2, false)
        } else {
            (-k1, -k2, true)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream((m as i64 - self.n_burn as i64) as u64);
        let g = Self::draw(&mut rng, k1, k2);
        if conj {
            g.conj()
        } else {
            g
        }
    }

    fn draw(rng: &mut ChaCha8Rng, k1: i64, k2: i64) -> Complex64 {
        // Two u64 per mode = four 32-bit words.
        rng.set_word_pos(mode_id(k1, k2) as u128 * 4);
        let (a, b) = gaussian_pair(rng);
        if k1 == 0 && k2 == 0 {
            Complex64::new(a, 0.0)
        } else {
            Complex64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
        }
    }

    /// Physical-space noise increment field for sample `m` (for inspection).
    pub fn physical(&self, m: usize) -> Vec<f64> {
        self.gaussians(m).to_physical()
    }
}

/// Noise on `[-t_burn, T]` with step `dt`; both lengths are rounded to whole steps.
pub fn sample_noise(grid: Grid, dt: f64, t_burn: f64, t_final: f64, seed: u64) -> Result<NoisePath> {
    if !(dt > 0.0) {
        return Err(Error::NonPositiveStep(dt));
    }
    if t_burn < 0.0 || t_final < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "t_burn = {t_burn}, T = {t_final} must be nonnegative"
        )));
    }
    Ok(NoisePath {
        grid,
        dt,
        n_burn: (t_burn / dt).round() as usize,
        n_steps: (t_final / dt).round() as usize,
        seed,
    })
}

/// Per-mode coefficients of the exact AR(1) recursion of the OU process.
#[derive(Debug, Clone)]
pub struct OuStepper {
    decay: Vec<f64>,
    innov: Vec<f64>,
    stat: Vec<f64>,
}

impl OuStepper {
    pub fn new(grid: Grid, d: Dissipation, dt: f64, moll: Option<&Mollifier>) -> Self {
        let chi = moll.map(|m| m.table(grid)).unwrap_or_else(|| vec![1.0; grid.len()]);
        let rates = d.rate_table(grid);
        let mut decay = Vec::with_capacity(rates.len());
        let mut innov = Vec::with_capacity(rates.len());
        let mut stat = Vec::with_capacity(rates.len());
        for (l, c) in rates.iter().zip(&chi) {
            decay.push((-l * dt).exp());
            innov.push(c * (-(-2.0 * l * dt).exp_m1() / (2.0 * l)).sqrt());
            stat.push(c / (2.0 * l).sqrt());
        }
        Self { decay, innov, stat }
    }

    /// Stationary initial value `chi sqrt(1 / (2 lambda)) g`.
    pub fn initial(&self, g: &SpectralField) -> SpectralField {
        g.mul_real_table(&self.stat)
    }

    /// The innovation `eta_m = chi sqrt((1 - e^{-2 lambda dt}) / (2 lambda)) g`.
    pub fn innovation(&self, g: &SpectralField) -> SpectralField {
        g.mul_real_table(&self.innov)
    }

    /// `x <- e^{-lambda dt} x + eta`.
    pub fn step(&self, x: &mut SpectralField, g: &SpectralField) {
        let (a, b) = (x.coeffs_mut(), g.coeffs());
        for i in 0..a.len() {
            a[i] = a[i] * self.decay[i] + b[i] * self.innov[i];
        }
    }
}

/// Iterator over `X_{t_m}`, `m = 0..noise.len()`, starting at `-t_burn`.
pub struct OuStream<'a> {
    noise: &'a NoisePath,
    stepper: OuStepper,
    state: Option<SpectralField>,
    m: usize,
}

impl<'a> OuStream<'a> {
    pub fn new(noise: &'a NoisePath, theta: f64, moll: Option<&Mollifier>) -> Result<Self> {
        let d = Dissipation::damped(theta)?;
        Ok(Self {
            noise,
            stepper: OuStepper::new(noise.grid(), d, noise.dt(), moll),
            state: None,
            m: 0,
        })
    }
}

impl Iterator for OuStream<'_> {
    type Item = SpectralField;

    fn next(&mut self) -> Option<SpectralField> {
        if self.m >= self.noise.len() {
            return None;
        }
        let g = self.noise.gaussians(self.m);
        match &mut self.state {
            None => self.state = Some(self.stepper.initial(&g)),
            Some(x) => self.stepper.step(x, &g),
        }
        self.m += 1;
        self.state.clone()
    }
}

/// `X^eps` on `[-t_burn, T]` (all samples, including the burn-in).
pub fn ou_path(noise: &NoisePath, theta: f64, moll: &Mollifier) -> Result<TimeField> {
    let values: Vec<SpectralField> = OuStream::new(noise, theta, Some(moll))?.collect();
    TimeField::new(-noise.t_burn(), noise.dt(), values)
}
