//! WebAssembly bindings for the browser demo in `www/`.
//!
//! A [`Demo`] holds one stationary Ornstein-Uhlenbeck field `X` on the torus
//! and advances it with the exact AR(1) update. The page can show `X`, a
//! single block `Delta_j X`, or the transport term `R^perp X . grad X`.

use paraqg::calculus::{partial, riesz_perp, product};
use paraqg::noise::{sample_noise, Mollifier, NoisePath, OuStepper};
use paraqg::semigroup::Dissipation;
use paraqg::{DyadicPartition, Grid, SpectralField};
use wasm_bindgen::prelude::*;

const DT: f64 = 1e-3;

/// What to draw.
#[wasm_bindgen]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum View {
    Field = 0,
    Block = 1,
    Transport = 2,
}

#[wasm_bindgen]
pub struct Demo {
    part: DyadicPartition,
    noise: NoisePath,
    stepper: OuStepper,
    x: SpectralField,
    m: usize,
}

impl Demo {
    pub fn create(n: usize, theta: f64, eps: f64, seed: u64) -> paraqg::Result<Demo> {
        let grid = Grid::new(n)?;
        let moll = Mollifier::bump(eps)?;
        let noise = sample_noise(grid, DT, 0.0, DT, seed)?;
        let stepper = OuStepper::new(grid, Dissipation::damped(theta)?, DT, Some(&moll));
        let x = stepper.initial(&noise.gaussians(0));
        Ok(Demo { part: DyadicPartition::new(grid), noise, stepper, x, m: 0 })
    }

    pub fn field(&self, view: View, j: i32) -> paraqg::Result<SpectralField> {
        match view {
            View::Field => Ok(self.x.clone()),
            View::Block => self.part.block(&self.x, j),
            View::Transport => {
                let r = riesz_perp(&self.x);
                let mut t = product(&r[0], &partial(&self.x, 1))?;
                t += &product(&r[1], &partial(&self.x, 2))?;
                Ok(t)
            }
        }
    }
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(n: usize, theta: f64, eps: f64, seed: u32) -> Result<Demo, JsError> {
        Demo::create(n, theta, eps, seed as u64).map_err(|e| JsError::new(&e.to_string()))
    }

    /// Advance `X` by `steps` exact OU steps of size `1e-3`.
    pub fn advance(&mut self, steps: u32) {
        for _ in 0..steps {
            self.m += 1;
            let g = self.noise.gaussians(self.m);
            self.stepper.step(&mut self.x, &g);
        }
    }

    pub fn time(&self) -> f64 {
        self.m as f64 * DT
    }

    pub fn n(&self) -> usize {
        self.x.grid().n()
    }

    pub fn j_max(&self) -> i32 {
        self.part.j_max()
    }

    /// `n * n * 4` bytes of RGBA, diverging colour scale symmetric about zero.
    pub fn rgba(&self, view: View, j: i32) -> Result<Vec<u8>, JsError> {
        let f = self.field(view, j).map_err(|e| JsError::new(&e.to_string()))?;
        Ok(to_rgba(&f.to_physical()))
    }

    /// `log2 |Delta_j f|_inf` for `j = -1..=j_max` (`-inf` for empty blocks),
    /// with `f = X` unless the transport term is shown.
    pub fn block_sups(&self, view: View) -> Vec<f64> {
        let f = match view {
            View::Transport => self.field(view, 0).unwrap_or_else(|_| self.x.clone()),
            _ => self.x.clone(),
        };
        self.part.block_sups(&f).iter().map(|s| s.log2()).collect()
    }
}

/// Blue (negative) through white to red (positive), scaled by the sup norm.
pub fn to_rgba(samples: &[f64]) -> Vec<u8> {
    let scale = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut out = Vec::with_capacity(4 * samples.len());
    for &v in samples {
        let s = if scale > 0.0 { (v / scale).clamp(-1.0, 1.0) } else { 0.0 };
        let fade = |c: f64| (255.0 * (1.0 - s.abs() * c)).round() as u8;
        let (r, g, b) = if s >= 0.0 { (255, fade(0.85), fade(1.0)) } else { (fade(1.0), fade(0.85), 255) };
        out.extend_from_slice(&[r, g, b, 255]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colour_scale() {
        let px = to_rgba(&[-2.0, 0.0, 2.0]);
        assert_eq!(&px[0..4], &[0, 38, 255, 255]);
        assert_eq!(&px[4..8], &[255, 255, 255, 255]);
        assert_eq!(&px[8..12], &[255, 38, 0, 255]);
        assert_eq!(to_rgba(&[0.0; 4]), vec![255; 16]);
    }

    #[test]
    fn views_have_grid_size() {
        let mut d = Demo::create(32, 2.0, 0.1, 7).unwrap();
        d.advance(5);
        assert!((d.time() - 0.005).abs() < 1e-15);
        for view in [View::Field, View::Block, View::Transport] {
            let f = d.field(view, 2).unwrap();
            assert_eq!(to_rgba(&f.to_physical()).len(), 32 * 32 * 4);
        }
        assert!(d.field(View::Block, 99).is_err());
        assert_eq!(d.part.block_sups(&d.x).len(), d.j_max() as usize + 2);
    }

    #[test]
    fn transport_has_zero_mean() {
        let d = Demo::create(32, 1.9, 0.05, 1).unwrap();
        let t = d.field(View::Transport, 0).unwrap();
        assert!(t.mean().abs() < 1e-12 * t.sup_norm().max(1.0));
    }

    #[test]
    fn same_seed_same_path() {
        let mut a = Demo::create(16, 2.0, 0.2, 3).unwrap();
        let mut b = Demo::create(16, 2.0, 0.2, 3).unwrap();
        a.advance(3);
        b.advance(1);
        b.advance(2);
        assert_eq!(a.x.max_coeff_diff(&b.x), 0.0);
    }
}
