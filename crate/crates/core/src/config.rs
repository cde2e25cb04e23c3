//! Run configuration: a flat TOML file, every key optional.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Grid;
use crate::noise::{ChiProfile, Mollifier};
use crate::solver::{exponents, Exponents, PicardOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub theta: f64,
    pub kappa: f64,
    pub kappa_prime: f64,
    pub grid_n: usize,
    pub dt: f64,
    pub t_final: f64,
    pub t_burn: f64,
    pub eps_list: Vec<f64>,
    /// Number of replicates; seed `i` is derived from the master seed.
    pub seeds: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub out_dir: PathBuf,
    pub chi_profile: ChiProfile,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            theta: 2.0,
            kappa: 0.01,
            kappa_prime: 0.025,
            grid_n: 64,
            dt: 1e-3,
            t_final: 0.25,
            t_burn: 10.0,
            eps_list: vec![0.8, 0.4, 0.2, 0.1],
            seeds: 16,
            tol: 1e-8,
            max_iter: 50,
            out_dir: PathBuf::from("out"),
            chi_profile: ChiProfile::Bump,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.exponents()?;
        Grid::new(self.grid_n).map_err(|e| Error::Config(format!("grid_n: {e}")))?;
        if !(self.dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final > 0.0 && self.t_final <= 1.0) {
            return Err(Error::Config(format!("t_final must lie in (0, 1], got {}", self.t_final)));
        }
        if self.t_final < 4.0 * self.dt {
            return Err(Error::Config("t_final must cover at least 4 steps".into()));
        }
        if !(self.t_burn >= 0.0) {
            return Err(Error::Config(format!("t_burn must be non-negative, got {}", self.t_burn)));
        }
        if self.eps_list.is_empty() || self.eps_list.iter().any(|&e| !(e > 0.0)) {
            return Err(Error::Config("eps_list must be a non-empty list of positive numbers".into()));
        }
        if self.eps_list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("eps_list must be strictly decreasing".into()));
        }
        if self.seeds == 0 {
            return Err(Error::Config("seeds must be at least 1".into()));
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(Error::Config("tol must be positive and max_iter at least 1".into()));
        }
        Ok(())
    }

    pub fn exponents(&self) -> Result<Exponents> {
        exponents(self.theta, self.kappa, self.kappa_prime)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid_n)
    }

    pub fn mollifiers(&self) -> Result<Vec<Mollifier>> {
        self.eps_list.iter().map(|&e| Mollifier::new(e, self.chi_profile)).collect()
    }

    pub fn picard(&self) -> PicardOptions {
        PicardOptions { tol: self.tol, max_iter: self.max_iter, ..Default::default() }
    }
}
