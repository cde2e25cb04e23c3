//! Uniformly sampled trajectories and the weighted time-Besov norms used to
//! measure drivers and solutions.

use crate::error::{Error, Result};
use crate::field::{Grid, SpectralField};
use crate::partition::DyadicPartition;

/// Samples `values[m]` at `t_m = t0 + m dt`.
#[derive(Debug, Clone)]
pub struct TimeField {
    t0: f64,
    dt: f64,
    values: Vec<SpectralField>,
}

impl TimeField {
    pub fn new(t0: f64, dt: f64, values: Vec<SpectralField>) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::NonPositiveStep(dt));
        }
        if values.len() < 2 {
            return Err(Error::InvalidParameter(
                "a trajectory needs at least two samples".into(),
            ));
        }
        let grid = values[0].grid();
        if values.iter().any(|v| v.grid() != grid) {
            return Err(Error::TimeMismatch("samples on different grids".into()));
        }
        Ok(Self { t0, dt, values })
    }

    /// Trajectory of `len` zero fields.
    pub fn zeros(grid: Grid, t0: f64, dt: f64, len: usize) -> Self {
        Self {
            t0,
            dt,
            values: vec![SpectralField::zeros(grid); len.max(2)],
        }
    }

    pub fn from_fn(t0: f64, dt: f64, len: usize, f: impl Fn(f64) -> SpectralField) -> Result<Self> {
        Self::new(t0, dt, (0..len).map(|m| f(t0 + m as f64 * dt)).collect())
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn grid(&self) -> Grid {
        self.values[0].grid()
    }

    pub fn time(&self, m: usize) -> f64 {
        self.t0 + m as f64 * self.dt
    }

    pub fn t_final(&self) -> f64 {
        self.time(self.len() - 1)
    }

    pub fn values(&self) -> &[SpectralField] {
        &self.values
    }

    pub fn get(&self, m: usize) -> Result<&SpectralField> {
        self.values.get(m).ok_or(Error::TimeIndexOutOfRange {
            index: m,
            len: self.values.len(),
        })
    }

    pub fn last(&self) -> &SpectralField {
        self.values.last().expect("non-empty trajectory")
    }

    pub fn into_values(self) -> Vec<SpectralField> {
        self.values
    }

    /// Same sampling (start, step, length and grid).
    pub fn check_aligned(&self, other: &TimeField) -> Result<()> {
        let same = self.len() == other.len()
            && (self.t0 - other.t0).abs() <= 1e-12 * self.dt
            && (self.dt - other.dt).abs() <= 1e-12 * self.dt
            && self.grid() == other.grid();
        if same {
            Ok(())
        } else {
            Err(Error::TimeMismatch(format!(
                "[{}, {}; {}] vs [{}, {}; {}]",
                self.t0,
                self.len(),
                self.dt,
                other.t0,
                other.len(),
                other.dt
            )))
        }
    }

    /// Apply `f` to every sample.
    pub fn map(&self, f: impl Fn(&SpectralField) -> SpectralField) -> TimeField {
        TimeField {
            t0: self.t0,
            dt: self.dt,
            values: self.values.iter().map(f).collect(),
        }
    }

    /// Combine two aligned trajectories samplewise.
    pub fn zip_with(
        &self,
        other: &TimeField,
        f: impl Fn(&SpectralField, &SpectralField) -> SpectralField,
    ) -> Result<TimeField> {
        self.check_aligned(other)?;
        Ok(TimeField {
            t0: self.t0,
            dt: self.dt,
            values: self.values.iter().zip(&other.values).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, other: &TimeField) -> Result<TimeField> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &TimeField) -> Result<TimeField> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> TimeField {
        self.map(|v| v.scale(s))
    }

    /// First `len` samples.
    pub fn truncate(&self, len: usize) -> TimeField {
        TimeField {
            t0: self.t0,
            dt: self.dt,
            values: self.values[..len.clamp(2, self.len())].to_vec(),
        }
    }

    /// Samples from index `from` on, with the time origin shifted accordingly.
    pub fn tail(&self, from: usize) -> TimeField {
        TimeField {
            t0: self.time(from),
            dt: self.dt,
            values: self.values[from..].to_vec(),
        }
    }

    /// Every `stride`-th sample.
    pub fn subsample(&self, stride: usize) -> TimeField {
        let stride = stride.max(1);
        TimeField {
            t0: self.t0,
            dt: self.dt * stride as f64,
            values: self.values.iter().step_by(stride).cloned().collect(),
        }
    }

    /// `max_m max_x |u_m(x) - v_m(x)|`.
    pub fn sup_diff(&self, other: &TimeField) -> Result<f64> {
        self.check_aligned(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).sup_norm())
            .fold(0.0, f64::max))
    }

    /// `max_m max_x |u_m(x)|`.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.sup_norm()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeNormKind {
    /// `sup_t ||u_t||_{C^alpha}`
    CT,
    /// `sup_{s<t} ||u_t - u_s||_{C^alpha} / (t-s)^delta`
    CTdelta,
    /// `sup_t t^eta ||u_t||_{C^alpha}`
    ETeta,
    /// `sup_{s<t} s^eta ||u_t - u_s||_{C^alpha} / (t-s)^delta`
    ETetadelta,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeNormSpec {
    pub kind: TimeNormKind,
    pub alpha: f64,
    pub eta: f64,
    pub delta: f64,
    /// Use every sample pair instead of dyadic gaps only.
    pub all_pairs: bool,
}

impl TimeNormSpec {
    pub fn ct(alpha: f64) -> Self {
        Self { kind: TimeNormKind::CT, alpha, eta: 0.0, delta: 1.0, all_pairs: false }
    }

    pub fn ct_delta(alpha: f64, delta: f64) -> Self {
        Self { kind: TimeNormKind::CTdelta, alpha, eta: 0.0, delta, all_pairs: false }
    }

    pub fn et_eta(alpha: f64, eta: f64) -> Self {
        Self { kind: TimeNormKind::ETeta, alpha, eta, delta: 1.0, all_pairs: false }
    }

    pub fn et_eta_delta(alpha: f64, eta: f64, delta: f64) -> Self {
        Self { kind: TimeNormKind::ETetadelta, alpha, eta, delta, all_pairs: false }
    }

    pub fn exhaustive(mut self) -> Self {
        self.all_pairs = true;
        self
    }
}

/// Estimate a weighted time-Besov norm over the samples with `t > 0`.
///
/// Holder quotients use the pairs `(t_m, t_m - 2^r dt)` unless
/// `spec.all_pairs` is set.
pub fn time_norm(u: &TimeField, spec: TimeNormSpec, part: &DyadicPartition) -> Result<f64> {
    let positive: Vec<usize> = (0..u.len()).filter(|&m| u.time(m) > 0.0).collect();
    if positive.is_empty() {
        return Err(Error::EmptyTimeRange);
    }
    if !(spec.eta >= 0.0) {
        return Err(Error::InvalidParameter(format!("eta = {} < 0", spec.eta)));
    }
    match spec.kind {
        TimeNormKind::CT | TimeNormKind::ETeta => {
            let eta = if spec.kind == TimeNormKind::ETeta { spec.eta } else { 0.0 };
            Ok(positive
                .iter()
                .map(|&m| u.time(m).powf(eta) * part.besov_norm(&u.values[m], spec.alpha))
                .fold(0.0, f64::max))
        }
        TimeNormKind::CTdelta | TimeNormKind::ETetadelta => {
            if !(spec.delta > 0.0 && spec.delta <= 1.0) {
                return Err(Error::InvalidParameter(format!("delta = {} not in (0, 1]", spec.delta)));
            }
            if positive.len() < 3 {
                return Err(Error::InvalidParameter(
                    "Holder-in-time norms need at least three positive-time samples".into(),
                ));
            }
            let eta = if spec.kind == TimeNormKind::ETetadelta { spec.eta } else { 0.0 };
            let first = positive[0];
            let mut best: f64 = 0.0;
            for &m in &positive {
                let partners: Vec<usize> = if spec.all_pairs {
                    (first..m).collect()
                } else {
                    (0..)
                        .map(|r| 1usize << r)
                        .take_while(|&gap| gap <= m - first)
                        .map(|gap| m - gap)
                        .collect()
                };
                for s in partners {
                    let (ts, tt) = (u.time(s), u.time(m));
                    let diff = &u.values[m] - &u.values[s];
                    let q = ts.powf(eta) * part.besov_norm(&diff, spec.alpha)
                        / (tt - ts).powf(spec.delta);
                    best = best.max(q);
                }
            }
            Ok(best)
        }
    }
}

/// `L^{alpha, delta}_T = C_T C^alpha  cap  C^delta_T C^{alpha - theta delta}` (sum of the two).
pub fn l_norm(u: &TimeField, alpha: f64, delta: f64, theta: f64, part: &DyadicPartition) -> Result<f64> {
    Ok(time_norm(u, TimeNormSpec::ct(alpha), part)?
        + time_norm(u, TimeNormSpec::ct_delta(alpha - theta * delta, delta), part)?)
}

/// `L^{eta, alpha, delta}_T = E^eta C^alpha  cap  E^{eta,delta} C^{alpha - theta delta}
/// cap  C_T C^{alpha - theta eta}` (sum of the three).
pub fn weighted_l_norm(
    u: &TimeField,
    eta: f64,
    alpha: f64,
    delta: f64,
    theta: f64,
    part: &DyadicPartition,
) -> Result<f64> {
    Ok(time_norm(u, TimeNormSpec::et_eta(alpha, eta), part)?
        + time_norm(u, TimeNormSpec::et_eta_delta(alpha - theta * delta, eta, delta), part)?
        + time_norm(u, TimeNormSpec::ct(alpha - theta * eta), part)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::random_field;

    fn setup() -> (Grid, DyadicPartition, SpectralField) {
        let grid = Grid::new(16).unwrap();
        let two_pi = 2.0 * std::f64::consts::PI;
        let cos = SpectralField::from_fn(grid, |x1, _| (two_pi * x1).cos());
        (grid, DyadicPartition::new(grid), cos)
    }

    #[test]
    fn constant_in_time_has_zero_holder_seminorm() {
        let (_, part, cos) = setup();
        let u = TimeField::from_fn(0.0, 0.1, 11, |_| cos.clone()).unwrap();
        let v = time_norm(&u, TimeNormSpec::ct_delta(0.0, 0.5), &part).unwrap();
        assert_eq!(v, 0.0);
        let v = time_norm(&u, TimeNormSpec::et_eta_delta(0.0, 1.0, 0.5).exhaustive(), &part).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn linear_growth_ct_norm() {
        let (_, part, cos) = setup();
        let u = TimeField::from_fn(0.0, 0.1, 11, |t| cos.scale(t)).unwrap();
        let v = time_norm(&u, TimeNormSpec::ct(1.0), &part).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn weighted_norm_peaks_at_final_time() {
        let (_, part, cos) = setup();
        let u = TimeField::from_fn(0.0, 0.1, 11, |_| cos.clone()).unwrap();
        let v = time_norm(&u, TimeNormSpec::et_eta(1.0, 1.0), &part).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn holder_quotient_of_linear_path() {
        // ||u_t - u_s|| / (t - s) = ||cos||_{C^1} = 0.5 for every pair.
        let (_, part, cos) = setup();
        let u = TimeField::from_fn(0.0, 0.1, 11, |t| cos.scale(t)).unwrap();
        let dyadic = time_norm(&u, TimeNormSpec::ct_delta(1.0, 1.0), &part).unwrap();
        let full = time_norm(&u, TimeNormSpec::ct_delta(1.0, 1.0).exhaustive(), &part).unwrap();
        assert!((dyadic - 0.5).abs() < 1e-9);
        assert!((full - 0.5).abs() < 1e-9);
    }

    #[test]
    fn dyadic_pairs_never_exceed_exhaustive() {
        let (grid, part, _) = setup();
        let u = TimeField::from_fn(0.0, 0.05, 17, |t| random_field(grid, (t * 1000.0) as u64, 8.0, 1.0))
            .unwrap();
        let spec = TimeNormSpec::ct_delta(-0.5, 0.3);
        let dyadic = time_norm(&u, spec, &part).unwrap();
        let full = time_norm(&u, spec.exhaustive(), &part).unwrap();
        assert!(dyadic <= full + 1e-15);
    }

    #[test]
    fn empty_range_is_an_error() {
        let (grid, part, _) = setup();
        let u = TimeField::zeros(grid, -1.0, 0.1, 5);
        assert!(matches!(
            time_norm(&u, TimeNormSpec::ct(0.0), &part),
            Err(Error::EmptyTimeRange)
        ));
    }

    #[test]
    fn alignment_checks() {
        let (grid, _, _) = setup();
        let a = TimeField::zeros(grid, 0.0, 0.1, 5);
        let b = TimeField::zeros(grid, 0.0, 0.1, 6);
        assert!(a.add(&b).is_err());
        assert!(TimeField::new(0.0, 0.0, vec![SpectralField::zeros(grid); 3]).is_err());
        assert_eq!(a.subsample(2).len(), 3);
        assert!((a.subsample(2).dt() - 0.2).abs() < 1e-15);
    }
}
