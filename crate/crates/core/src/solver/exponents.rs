use serde::Serialize;

use crate::error::{Error, Result};

/// Exponents of the solution space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Exponents {
    pub theta: f64,
    pub kappa: f64,
    pub kappa_prime: f64,
    /// Numerator `4 theta - 7` of `rho = (4 theta - 7) / (10^100 theta)`.
    pub rho_numerator: f64,
    /// `rho` as used in floating point: it underflows the margin it models, so 0.
    pub rho: f64,
    pub q: f64,
    pub q_prime: f64,
    pub eta: f64,
}

impl Exponents {
    /// `rho` written out exactly.
    pub fn rho_display(&self) -> String {
        format!("{} / (10^100 * {})", self.rho_numerator, self.theta)
    }

    /// `(eta, alpha, delta)` of the space holding `v`.
    pub fn v_space(&self) -> (f64, f64, f64) {
        let (t, kp) = (self.theta, self.kappa_prime);
        (self.q - kp, 1.5 * t - 2.0 - kp, 1.0 - kp / t)
    }

    /// `(eta, alpha, delta)` of the space holding `w`.
    pub fn w_space(&self) -> (f64, f64, f64) {
        let (t, k, kp) = (self.theta, self.kappa, self.kappa_prime);
        (self.q_prime - kp + k, 3.5 * t - 5.0 - t * kp, 1.0 - kp)
    }
}

/// Solution-space exponents for `theta in (7/4, 2]` and
/// `0 < kappa < kappa'` with `kappa / kappa' in (1/3, 2/3)`.
pub fn exponents(theta: f64, kappa: f64, kappa_prime: f64) -> Result<Exponents> {
    if !(theta > 1.75 && theta <= 2.0) {
        return Err(Error::ThetaOutOfRange(theta));
    }
    if !(kappa > 0.0 && kappa_prime > kappa) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < kappa < kappa', got kappa = {kappa}, kappa' = {kappa_prime}"
        )));
    }
    let ratio = kappa / kappa_prime;
    if !(ratio > 1.0 / 3.0 && ratio < 2.0 / 3.0) {
        return Err(Error::KappaRatio(ratio));
    }
    let rho = 0.0;
    let (q, q_prime) = if theta > 11.0 / 6.0 {
        (2.0 - 5.0 / (2.0 * theta), 1.0)
    } else {
        (5.0 - 8.0 / theta - 2.0 * rho, 7.0 - 11.0 / theta - 3.0 * rho)
    };
    let eta = -(1.5 * theta - 2.0 - theta * q + (theta - 1.0) * kappa) / theta;
    let e = Exponents {
        theta,
        kappa,
        kappa_prime,
        rho_numerator: 4.0 * theta - 7.0,
        rho,
        q,
        q_prime,
        eta,
    };
    if !(q > 0.0 && q < 1.0 && q_prime > 0.0 && q_prime <= 1.0) {
        return Err(Error::InvalidParameter(format!("q = {q}, q' = {q_prime} out of range")));
    }
    if q_prime < 5.0 / theta - 3.0 + 2.0 * q - 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "q' = {q_prime} violates q' >= 5/theta - 3 + 2q"
        )));
    }
    Ok(e)
}
