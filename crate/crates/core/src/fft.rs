//! Square two-dimensional FFTs with a process-wide plan cache.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub(crate) struct Fft2 {
    m: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    /// Shared plan for an `m x m` transform.
    pub(crate) fn plan(m: usize) -> Arc<Fft2> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Fft2>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("fft plan cache poisoned");
        guard
            .entry(m)
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                Arc::new(Fft2 {
                    m,
                    fwd: planner.plan_fft_forward(m),
                    inv: planner.plan_fft_inverse(m),
                })
            })
            .clone()
    }

    /// Unnormalized forward transform (kernel `e^{-2 pi i k.x}`), row-major in place.
    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        self.run(self.fwd.as_ref(), data);
    }

    /// Unnormalized inverse transform (kernel `e^{+2 pi i k.x}`).
    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        self.run(self.inv.as_ref(), data);
    }

    fn run(&self, fft: &dyn Fft<f64>, data: &mut [Complex64]) {
        let m = self.m;
        assert_eq!(data.len(), m * m);
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(data, &mut scratch);
        transpose(data, m);
        fft.process_with_scratch(data, &mut scratch);
        transpose(data, m);
    }
}

fn transpose(data: &mut [Complex64], m: usize) {
    for i in 0..m {
        for j in (i + 1)..m {
            data.swap(i * m + j, j * m + i);
        }
    }
}
