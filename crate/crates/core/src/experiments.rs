//! The verification experiments behind the CLI subcommands and the
//! acceptance suite. Each returns plain rows that serialize to CSV.

use std::f64::consts::PI;
use std::path::Path;

use serde::Serialize;

use crate::calculus::{paraproduct, product, Para};
use crate::enhance::{
    enhance_noise, natural_enhancement, pi0_summand, Component, Driver, EnhanceOptions, Pi0Kind,
};
use crate::error::{Error, Result};
use crate::field::{random_field, Grid, SpectralField};
use crate::noise::{sample_noise, ChiProfile, Mollifier, OuStream};
use crate::partition::{fit_slope, DyadicPartition};
use crate::semigroup::{schauder_probe, Dissipation};
use crate::solver::{
    classical_mild_solve, exponents, nonlinearity, picard_solve, reconstruct, Exponents, Forcing, PicardOptions,
    SolverReport,
};
use crate::timefield::TimeField;

/// Seed of replicate `index` under `master` (SplitMix64 finalizer).
pub fn seed_for(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index + 1));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let m = mean(xs);
    let n = xs.len() as f64;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, my) = (mean(xs), mean(ys));
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

// ---------------------------------------------------------------------------
// Smooth driver and the consistency experiment

/// Band-limited initial value and forcing for the smooth experiments.
pub fn smooth_data(grid: Grid, dt: f64, steps: usize, amp: f64) -> Result<(SpectralField, TimeField)> {
    let tau = 2.0 * PI;
    let x0 = SpectralField::from_fn(grid, |a, b| {
        amp * ((tau * a).cos() + 0.6 * (tau * (a + b)).sin() + 0.4 * (tau * (2.0 * b - a)).cos())
    });
    let xi = TimeField::from_fn(0.0, dt, steps + 1, |t| {
        SpectralField::from_fn(grid, |a, b| {
            amp * ((tau * b).sin() * (1.0 + 0.5 * (4.0 * t).cos())
                + 0.5 * (tau * (a + 2.0 * b)).cos() * (3.0 * t).sin())
        })
    })?;
    Ok((x0, xi))
}

/// Natural enhancement of [`smooth_data`] with `V0 = Y0 = 0`.
pub fn smooth_driver(grid: Grid, theta: f64, dt: f64, t_final: f64, amp: f64) -> Result<(Driver, TimeField)> {
    let steps = (t_final / dt).round() as usize;
    let (x0, xi) = smooth_data(grid, dt, steps, amp)?;
    let zero = SpectralField::zeros(grid);
    let driver = natural_enhancement(&x0, &xi, &[zero.clone(), zero.clone()], &zero, theta)?;
    Ok((driver, xi))
}

#[derive(Debug, Clone, Serialize)]
pub struct ConsistencyRow {
    pub dt: f64,
    pub t_star: f64,
    pub iterations: usize,
    pub rel_diff: f64,
    pub abs_diff: f64,
}

/// Paracontrolled reconstruction against the classical mild solver on the
/// smooth driver, with `v0 = w0 = 0` and `u0 = X0 + Y0`.
pub fn consistency_run(
    grid: Grid,
    exps: &Exponents,
    dt: f64,
    t_final: f64,
    amp: f64,
    opts: &PicardOptions,
) -> Result<(ConsistencyRow, SolverReport)> {
    let (driver, xi) = smooth_driver(grid, exps.theta, dt, t_final, amp)?;
    let zero = SpectralField::zeros(grid);
    let (sol, report) = picard_solve(&driver, &zero, &zero, exps, t_final, opts)?;
    let u = reconstruct(&driver.truncate(sol.v.len()), &sol.v, &sol.w)?;
    let u0 = &driver.x.values()[0] + &driver.y.values()[0];
    let classical = classical_mild_solve(Forcing::Smooth(&xi), &u0, exps.theta, report.t_star, dt)?;
    let (a, b) = (u.last(), classical.last());
    let abs_diff = (a - b).sup_norm();
    let row = ConsistencyRow {
        dt,
        t_star: report.t_star,
        iterations: report.iterations,
        rel_diff: abs_diff / b.sup_norm(),
        abs_diff,
    };
    Ok((row, report))
}

/// Contraction ratios `r_k / r_{k-1}` of a residual history.
pub fn residual_ratios(residuals: &[f64]) -> Vec<f64> {
    residuals.windows(2).map(|w| w[1] / w[0]).collect()
}

// ---------------------------------------------------------------------------
// OU law

#[derive(Debug, Clone, Serialize)]
pub struct OuLawRow {
    pub k1: i64,
    pub k2: i64,
    pub var_est: f64,
    pub var_stderr: f64,
    pub var_ref: f64,
    pub ac_est: f64,
    pub ac_stderr: f64,
    pub ac_ref: f64,
}

impl OuLawRow {
    pub fn var_z(&self) -> f64 {
        (self.var_est - self.var_ref) / self.var_stderr
    }

    pub fn ac_z(&self) -> f64 {
        (self.ac_est - self.ac_ref) / self.ac_stderr
    }
}

/// Stationary variance and lag-1 autocorrelation of `X(k)` for every
/// half-lattice mode with `0 < |k| <= k_max`. Seeds are the independent
/// replicates: the variance error bar is the spread of per-seed time
/// averages, the autocorrelation uses the pooled ratio with a jackknife
/// over seeds.
pub fn ou_law(
    grid: Grid,
    theta: f64,
    moll: &Mollifier,
    dt: f64,
    t_final: f64,
    seeds: &[u64],
    k_max: f64,
) -> Result<Vec<OuLawRow>> {
    if seeds.len() < 2 {
        return Err(Error::InvalidParameter("need at least two seeds".into()));
    }
    let d = Dissipation::damped(theta)?;
    let h = grid.n() as i64 / 2;
    let modes: Vec<(i64, i64)> = (0..h)
        .flat_map(|k2| (-h + 1..h).map(move |k1| (k1, k2)))
        .filter(|&(k1, k2)| {
            let r = ((k1 * k1 + k2 * k2) as f64).sqrt();
            (k2 > 0 || k1 > 0) && r <= k_max
        })
        .collect();
    // per seed, per mode: (sum |x|^2 over t, sum Re x_{t+1} conj x_t, sum |x_t|^2 over t < last, count)
    let mut acc = vec![vec![(0.0, 0.0, 0.0, 0usize); modes.len()]; seeds.len()];
    for (s, &seed) in seeds.iter().enumerate() {
        let noise = sample_noise(grid, dt, 0.0, t_final, seed)?;
        let mut prev: Option<SpectralField> = None;
        for x in OuStream::new(&noise, theta, Some(moll))? {
            for (i, &(k1, k2)) in modes.iter().enumerate() {
                let c = x.mode(k1, k2);
                let a = &mut acc[s][i];
                a.0 += c.norm_sqr();
                a.3 += 1;
                if let Some(p) = &prev {
                    let q = p.mode(k1, k2);
                    a.1 += (c * q.conj()).re;
                    a.2 += q.norm_sqr();
                }
            }
            prev = Some(x);
        }
    }
    let mut rows = Vec::with_capacity(modes.len());
    for (i, &(k1, k2)) in modes.iter().enumerate() {
        let r = ((k1 * k1 + k2 * k2) as f64).sqrt();
        let lambda = d.rate(r);
        let chi = moll.factor(r);
        let per_seed: Vec<f64> = acc.iter().map(|a| a[i].0 / a[i].3 as f64).collect();
        let (var_est, var_stderr) = mean_stderr(&per_seed);
        let (num, den): (f64, f64) = acc.iter().fold((0.0, 0.0), |(n, d), a| (n + a[i].1, d + a[i].2));
        let ac_est = num / den;
        let loo: Vec<f64> = acc.iter().map(|a| (num - a[i].1) / (den - a[i].2)).collect();
        let nseeds = seeds.len() as f64;
        let loo_mean = mean(&loo);
        let ac_stderr = ((nseeds - 1.0) / nseeds * loo.iter().map(|v| (v - loo_mean).powi(2)).sum::<f64>()).sqrt();
        rows.push(OuLawRow {
            k1,
            k2,
            var_est,
            var_stderr,
            var_ref: chi * chi / (2.0 * lambda),
            ac_est,
            ac_stderr,
            ac_ref: (-lambda * dt).exp(),
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Order-zero chaos

#[derive(Debug, Clone, Serialize)]
pub struct Pi0TableRow {
    pub kind: String,
    pub component: usize,
    pub modes: usize,
    pub max_abs_summand: f64,
}

/// Max `|Pi_0 summand|` of every table.
pub fn pi0_tables(theta: f64, moll: &Mollifier, grid: Grid) -> Result<Vec<Pi0TableRow>> {
    let mut rows = Vec::new();
    for kind in [Pi0Kind::Y, Pi0Kind::What, Pi0Kind::W] {
        for (i, table) in pi0_summand(kind, theta, moll, grid)?.iter().enumerate() {
            rows.push(Pi0TableRow {
                kind: kind.name().to_string(),
                component: i + 1,
                modes: table.len(),
                max_abs_summand: table.iter().fold(0.0, |m, v| m.max(v.abs())),
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct Pi0MeanRow {
    pub field: String,
    pub x1: usize,
    pub x2: usize,
    pub mean: f64,
    pub stderr: f64,
}

impl Pi0MeanRow {
    pub fn z(&self) -> f64 {
        self.mean / self.stderr
    }
}

/// The eight lattice probe points.
pub fn probe_points(n: usize) -> Vec<(usize, usize)> {
    (0..8).map(|i| ((i * n) / 8, (3 * i * n / 8 + n / 16) % n)).collect()
}

/// Monte-Carlo means of `Y`, `What_i`, `W_i` at the probe points at time `T`.
#[allow(clippy::too_many_arguments)]
pub fn pi0_monte_carlo(
    grid: Grid,
    theta: f64,
    moll: &Mollifier,
    dt: f64,
    t_burn: f64,
    t_final: f64,
    seeds: &[u64],
    opts: &EnhanceOptions,
) -> Result<Vec<Pi0MeanRow>> {
    let steps = (t_final / dt).round() as usize;
    let opts = EnhanceOptions { record_stride: steps.max(1), ..*opts };
    let names = ["Y", "What1", "What2", "W1", "W2"];
    let points = probe_points(grid.n());
    let mut samples = vec![vec![Vec::with_capacity(seeds.len()); points.len()]; names.len()];
    for &seed in seeds {
        let noise = sample_noise(grid, dt, t_burn, t_final, seed)?;
        let drv = enhance_noise(&noise, theta, &[*moll], &opts)?.remove(0);
        let fields = [&drv.y, &drv.what[0], &drv.what[1], &drv.w[0], &drv.w[1]];
        for (f, tf) in fields.iter().enumerate() {
            let phys = tf.last().to_physical();
            for (p, &(a, b)) in points.iter().enumerate() {
                samples[f][p].push(phys[a * grid.n() + b]);
            }
        }
    }
    let mut rows = Vec::new();
    for (f, name) in names.iter().enumerate() {
        for (p, &(a, b)) in points.iter().enumerate() {
            let (m, se) = mean_stderr(&samples[f][p]);
            rows.push(Pi0MeanRow { field: name.to_string(), x1: a, x2: b, mean: m, stderr: se });
        }
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Regularity slopes

#[derive(Debug, Clone, Serialize)]
pub struct RegularityRow {
    pub theta: f64,
    pub component: String,
    pub seed: u64,
    pub slope: f64,
    pub reference: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegularitySummary {
    pub theta: f64,
    pub component: String,
    pub mean_slope: f64,
    pub stderr: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub valid_seeds: usize,
}

/// Allowed deviation of the fitted slope from the reference exponent.
pub fn regularity_tolerance(c: Component) -> f64 {
    match c {
        Component::X | Component::V => 0.2,
        Component::Y | Component::W | Component::What => 0.25,
        Component::Z | Component::Zhat => 0.3,
    }
}

/// Fitted block-decay slopes of every component at time `T`, one row per
/// seed. A component without signal in the fit range gets `NaN`.
#[allow(clippy::too_many_arguments)]
pub fn regularity(
    grid: Grid,
    theta: f64,
    moll: &Mollifier,
    dt: f64,
    t_burn: f64,
    t_final: f64,
    seeds: &[u64],
    fit: (i32, i32),
    opts: &EnhanceOptions,
) -> Result<Vec<RegularityRow>> {
    let part = DyadicPartition::new(grid);
    if fit.0 < 1 || fit.1 > part.j_max() - 1 || fit.1 - fit.0 < 3 {
        return Err(Error::InvalidFitRange { lo: fit.0, hi: fit.1, j_max: part.j_max() });
    }
    let steps = (t_final / dt).round() as usize;
    let opts = EnhanceOptions { record_stride: steps.max(1), ..*opts };
    let mut rows = Vec::new();
    for &seed in seeds {
        let noise = sample_noise(grid, dt, t_burn, t_final, seed)?;
        let drv = enhance_noise(&noise, theta, &[*moll], &opts)?.remove(0);
        for c in Component::ALL {
            // slope of the vector component: fit the max over entries
            let mut sups = vec![0.0f64; part.len()];
            for u in drv.parts(c) {
                for (s, b) in sups.iter_mut().zip(part.block_sups(u.last())) {
                    *s = s.max(b);
                }
            }
            let slope = match fit_slope(&sups, fit.0, fit.1) {
                Ok(v) => v,
                Err(Error::NoSignal) => f64::NAN,
                Err(e) => return Err(e),
            };
            rows.push(RegularityRow {
                theta,
                component: c.name().to_string(),
                seed,
                slope,
                reference: c.regularity(theta),
            });
        }
    }
    Ok(rows)
}

/// Seed averages of [`regularity`] rows. Seeds with no signal are left out
/// of the mean (and counted in `valid_seeds`).
pub fn summarize_regularity(rows: &[RegularityRow]) -> Vec<RegularitySummary> {
    let mut out = Vec::new();
    for c in Component::ALL {
        let sel: Vec<&RegularityRow> = rows.iter().filter(|r| r.component == c.name()).collect();
        if sel.is_empty() {
            continue;
        }
        let valid: Vec<f64> = sel.iter().map(|r| r.slope).filter(|s| s.is_finite()).collect();
        let (m, se) = if valid.len() >= 2 {
            mean_stderr(&valid)
        } else {
            (f64::NAN, f64::NAN)
        };
        out.push(RegularitySummary {
            theta: sel[0].theta,
            component: c.name().to_string(),
            mean_slope: m,
            stderr: se,
            reference: sel[0].reference,
            tolerance: regularity_tolerance(c),
            valid_seeds: valid.len(),
        });
    }
    out
}

// ---------------------------------------------------------------------------
// eps-Cauchy convergence and chi-independence

#[derive(Debug, Clone, Serialize)]
pub struct CauchyRow {
    pub component: String,
    pub eps: f64,
    pub seed: u64,
    pub alpha: f64,
    pub norm: f64,
    /// `||C^eps - C^{eps/2}||`; `NaN` when `eps/2` is not in the list.
    pub diff_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CauchySummary {
    pub component: String,
    pub monotone_seeds: usize,
    pub seeds: usize,
    pub rate: f64,
}

/// Drivers for every `eps` from one noise path per seed (common random
/// numbers); norms in `C_T C^{regularity - alpha_shift}`.
#[allow(clippy::too_many_arguments)]
pub fn eps_convergence(
    grid: Grid,
    theta: f64,
    chi: ChiProfile,
    eps_list: &[f64],
    seeds: &[u64],
    dt: f64,
    t_burn: f64,
    t_final: f64,
    alpha_shift: f64,
    opts: &EnhanceOptions,
) -> Result<Vec<CauchyRow>> {
    if seeds.is_empty() {
        return Err(Error::InvalidParameter("empty seed list".into()));
    }
    let molls = eps_list.iter().map(|&e| Mollifier::new(e, chi)).collect::<Result<Vec<_>>>()?;
    let part = DyadicPartition::new(grid);
    let mut rows = Vec::new();
    for &seed in seeds {
        let noise = sample_noise(grid, dt, t_burn, t_final, seed)?;
        let drivers = enhance_noise(&noise, theta, &molls, opts)?;
        for c in Component::ALL {
            let alpha = c.regularity(theta) - alpha_shift;
            for (i, &eps) in eps_list.iter().enumerate() {
                let half = eps_list.iter().position(|&e| (e - eps / 2.0).abs() < 1e-12 * eps);
                let diff_norm = match half {
                    Some(h) => drivers[i].diff_norm(&drivers[h], c, alpha, &part)?,
                    None => f64::NAN,
                };
                let _ = i;
                rows.push(CauchyRow {
                    component: c.name().to_string(),
                    eps,
                    seed,
                    alpha,
                    norm: drivers[i].norm(c, alpha, &part)?,
                    diff_norm,
                });
            }
        }
    }
    Ok(rows)
}

/// Per component: seeds whose Cauchy differences strictly decrease as `eps`
/// decreases, and the least-squares slope of `log(mean diff)` on `log eps`.
pub fn summarize_cauchy(rows: &[CauchyRow]) -> Vec<CauchySummary> {
    let mut out = Vec::new();
    for c in Component::ALL {
        let sel: Vec<&CauchyRow> = rows
            .iter()
            .filter(|r| r.component == c.name() && r.diff_norm.is_finite())
            .collect();
        if sel.is_empty() {
            continue;
        }
        let mut seeds: Vec<u64> = sel.iter().map(|r| r.seed).collect();
        seeds.dedup();
        let mut eps: Vec<f64> = sel.iter().map(|r| r.eps).collect();
        eps.sort_by(|a, b| b.partial_cmp(a).unwrap());
        eps.dedup();
        let mut monotone = 0;
        for &s in &seeds {
            let diffs: Vec<f64> = eps
                .iter()
                .filter_map(|&e| sel.iter().find(|r| r.seed == s && r.eps == e).map(|r| r.diff_norm))
                .collect();
            if diffs.windows(2).all(|w| w[1] < w[0]) {
                monotone += 1;
            }
        }
        let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
        let ys: Vec<f64> = eps
            .iter()
            .map(|&e| {
                let v: Vec<f64> = sel.iter().filter(|r| r.eps == e).map(|r| r.diff_norm).collect();
                mean(&v).ln()
            })
            .collect();
        out.push(CauchySummary {
            component: c.name().to_string(),
            monotone_seeds: monotone,
            seeds: seeds.len(),
            rate: if xs.len() >= 2 { ls_slope(&xs, &ys) } else { f64::NAN },
        });
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct ChiRow {
    pub component: String,
    pub eps: f64,
    pub profile_diff: f64,
    pub cauchy_diff: f64,
    pub ratio: f64,
}

/// Seed-mean of `||C^eps_bump - C^eps_cosine||` against the seed-mean of
/// `||C^eps_bump - C^{eps/2}_bump||`, per component.
#[allow(clippy::too_many_arguments)]
pub fn chi_independence(
    grid: Grid,
    theta: f64,
    eps: f64,
    seeds: &[u64],
    dt: f64,
    t_burn: f64,
    t_final: f64,
    alpha_shift: f64,
    opts: &EnhanceOptions,
) -> Result<Vec<ChiRow>> {
    if seeds.is_empty() {
        return Err(Error::InvalidParameter("empty seed list".into()));
    }
    let molls = [
        Mollifier::new(eps, ChiProfile::Bump)?,
        Mollifier::new(eps, ChiProfile::CosineTaper)?,
        Mollifier::new(eps / 2.0, ChiProfile::Bump)?,
    ];
    let part = DyadicPartition::new(grid);
    let mut prof = vec![0.0; Component::ALL.len()];
    let mut cauchy = vec![0.0; Component::ALL.len()];
    for &seed in seeds {
        let noise = sample_noise(grid, dt, t_burn, t_final, seed)?;
        let d = enhance_noise(&noise, theta, &molls, opts)?;
        for (i, c) in Component::ALL.iter().enumerate() {
            let alpha = c.regularity(theta) - alpha_shift;
            prof[i] += d[0].diff_norm(&d[1], *c, alpha, &part)? / seeds.len() as f64;
            cauchy[i] += d[0].diff_norm(&d[2], *c, alpha, &part)? / seeds.len() as f64;
        }
    }
    Ok(Component::ALL
        .iter()
        .enumerate()
        .map(|(i, c)| ChiRow {
            component: c.name().to_string(),
            eps,
            profile_diff: prof[i],
            cauchy_diff: cauchy[i],
            ratio: prof[i] / cauchy[i],
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Schauder probe

#[derive(Debug, Clone, Serialize)]
pub struct SchauderRow {
    pub t: f64,
    pub seed: u64,
    pub value: f64,
}

/// Compensated norms of `e^{-t(-Delta)^{theta/2}} f` for white-noise `f`.
pub fn schauder_experiment(
    grid: Grid,
    theta: f64,
    alpha: f64,
    delta: f64,
    t_grid: &[f64],
    seeds: &[u64],
) -> Result<Vec<SchauderRow>> {
    let d = Dissipation::pure(theta)?;
    let part = DyadicPartition::new(grid);
    let mut rows = Vec::new();
    for &seed in seeds {
        let f = random_field(grid, seed, f64::INFINITY, 0.0);
        for (t, value) in schauder_probe(&f, d, alpha, delta, t_grid, &part)? {
            rows.push(SchauderRow { t, seed, value });
        }
    }
    Ok(rows)
}

/// `count` log-spaced times on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// `max / min` of the seed-mean compensated-norm curve.
pub fn schauder_ratio(rows: &[SchauderRow]) -> f64 {
    let mut ts: Vec<f64> = rows.iter().map(|r| r.t).collect();
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ts.dedup();
    let curve: Vec<f64> = ts
        .iter()
        .map(|&t| mean(&rows.iter().filter(|r| r.t == t).map(|r| r.value).collect::<Vec<_>>()))
        .collect();
    let max = curve.iter().cloned().fold(f64::MIN, f64::max);
    let min = curve.iter().cloned().fold(f64::MAX, f64::min);
    max / min
}

// ---------------------------------------------------------------------------
// Deterministic invariants

/// Max over `trials` random band-limited pairs of
/// `|fg - (f<g + f o g + f>g)|_inf / (|f|_inf |g|_inf)`.
pub fn bony_defect(grid: Grid, trials: usize, master: u64) -> Result<f64> {
    let part = DyadicPartition::new(grid);
    let k_cut = grid.n() as f64 / 3.0;
    let mut worst = 0.0f64;
    for i in 0..trials as u64 {
        let f = random_field(grid, seed_for(master, 2 * i), k_cut, 0.5);
        let g = random_field(grid, seed_for(master, 2 * i + 1), k_cut, 0.5);
        let mut sum = paraproduct(&f, &g, Para::Lt, &part)?;
        sum += &paraproduct(&f, &g, Para::Resonant, &part)?;
        sum += &paraproduct(&f, &g, Para::Gt, &part)?;
        let defect = (&product(&f, &g)? - &sum).sup_norm() / (f.sup_norm() * g.sup_norm());
        worst = worst.max(defect);
    }
    Ok(worst)
}

/// `max_k |sum_j rho_j(k) - 1|` over the retained modes.
pub fn partition_defect(grid: Grid) -> Result<f64> {
    let part = DyadicPartition::new(grid);
    let mut sum = vec![0.0; grid.len()];
    for j in -1..=part.j_max() {
        for (s, r) in sum.iter_mut().zip(part.rho(j)?) {
            *s += r;
        }
    }
    Ok((0..grid.len())
        .filter(|&i| !grid.is_nyquist(i))
        .map(|i| (sum[i] - 1.0).abs())
        .fold(0.0, f64::max))
}

/// `max |mean(N(u) - u)|` over random fields with `|u|_inf = 1`.
pub fn transport_mean_defect(grid: Grid, trials: usize, master: u64) -> f64 {
    (0..trials as u64)
        .map(|i| {
            let u = random_field(grid, seed_for(master, i), f64::INFINITY, 1.0);
            let u = u.scale(1.0 / u.sup_norm());
            (&nonlinearity(&u) - &u).mean().abs()
        })
        .fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// CSV output

/// Writes `rows` with a header line. Floats use the shortest round-trip
/// representation, so equal inputs give byte-identical files.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualRow {
    pub iteration: usize,
    pub residual: f64,
    pub ratio: f64,
}

pub fn residual_rows(residuals: &[f64]) -> Vec<ResidualRow> {
    residuals
        .iter()
        .enumerate()
        .map(|(i, &r)| ResidualRow {
            iteration: i + 1,
            residual: r,
            ratio: if i == 0 { f64::NAN } else { r / residuals[i - 1] },
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Self-test

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Check { name: name.to_string(), value, threshold, passed: value <= threshold }
    }
}

/// File names written by [`selftest`].
pub const SELFTEST_FILES: [&str; 5] = [
    "eps_convergence.csv",
    "regularity.csv",
    "schauder.csv",
    "residual_decay.csv",
    "checks.csv",
];

/// The invariant suite at desk scale (n = 32, theta = 2 unless noted). Writes
/// the CSVs behind the four figure kinds plus `checks.csv`; every file is a
/// function of `master` alone.
pub fn selftest(out_dir: &Path, master: u64) -> Result<Vec<Check>> {
    std::fs::create_dir_all(out_dir)?;
    let theta = 2.0;
    let g32 = Grid::new(32)?;
    let seeds = |tag: u64, count: u64| -> Vec<u64> { (0..count).map(|i| seed_for(master ^ tag, i)).collect() };
    let mut checks = Vec::new();

    checks.push(Check::at_most("bony_identity", bony_defect(g32, 20, master)?, 1e-10));
    let part_defect = [16, 32, 64, 128]
        .iter()
        .map(|&n| partition_defect(Grid::new(n)?))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    checks.push(Check::at_most("partition_exactness", part_defect, 1e-12));
    checks.push(Check::at_most("transport_zero_mean", transport_mean_defect(g32, 8, master), 1e-12));

    let moll = Mollifier::bump(0.1)?;
    let pi0 = pi0_tables(theta, &moll, g32)?.iter().fold(0.0f64, |m, r| m.max(r.max_abs_summand));
    checks.push(Check::at_most("pi0_tables", pi0, 0.0));

    let ou = ou_law(Grid::new(16)?, theta, &moll, 1e-3, 0.5, &seeds(1, 8), 4.0)?;
    let ou_z = ou.iter().map(|r| r.var_z().abs().max(r.ac_z().abs())).fold(0.0, f64::max);
    checks.push(Check::at_most("ou_law_max_z", ou_z, 5.0));

    // residual decay on the smooth driver
    let exps = exponents(theta, 0.01, 0.025)?;
    let (driver, _) = smooth_driver(Grid::new(16)?, theta, 2.5e-3, 0.25, 1.0)?;
    let zero = SpectralField::zeros(driver.grid());
    let (_, report) = picard_solve(&driver, &zero, &zero, &exps, 0.25, &PicardOptions::default())?;
    let ratios = residual_ratios(&report.residuals);
    let worst_ratio = ratios.iter().skip(1).cloned().fold(0.0, f64::max);
    checks.push(Check::at_most("picard_ratio_from_iteration_3", worst_ratio, 0.8));
    checks.push(Check::at_most(
        "picard_final_residual",
        *report.residuals.last().unwrap_or(&f64::INFINITY),
        1e-8,
    ));
    write_csv(&out_dir.join("residual_decay.csv"), &residual_rows(&report.residuals))?;

    let opts = EnhanceOptions { record_stride: 5, ..Default::default() };
    let cauchy = eps_convergence(g32, theta, ChiProfile::Bump, &[0.8, 0.4, 0.2, 0.1], &seeds(2, 4), 1e-3, 0.25, 0.05, 0.1, &opts)?;
    let finite = cauchy.iter().all(|r| r.norm.is_finite());
    checks.push(Check::at_most("eps_convergence_finite", if finite { 0.0 } else { 1.0 }, 0.0));
    write_csv(&out_dir.join("eps_convergence.csv"), &cauchy)?;

    let reg = regularity(Grid::new(128)?, theta, &Mollifier::bump(0.01)?, 1e-3, 0.25, 0.002, &seeds(3, 2), (2, 5), &EnhanceOptions::default())?;
    write_csv(&out_dir.join("regularity.csv"), &reg)?;

    let schauder = schauder_experiment(Grid::new(64)?, theta, -1.2, 0.5, &log_grid(1e-3, 1.0, 13), &seeds(4, 4))?;
    checks.push(Check::at_most("schauder_max_over_min", schauder_ratio(&schauder), 20.0));
    write_csv(&out_dir.join("schauder.csv"), &schauder)?;

    write_csv(&out_dir.join("checks.csv"), &checks)?;
    Ok(checks)
}
