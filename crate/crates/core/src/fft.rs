//! Single-axis DFTs over [`ComplexTensor`]s.
//!
//! Forward transforms are unnormalized with kernel `exp(-2πi lk/N)`; inverse
//! transforms carry the `1/N` factor. Any axis length is accepted.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::Result;
use crate::tensor::ComplexTensor;

/// Fibers gathered per batch when the axis is not contiguous.
const GATHER_WIDTH: usize = 32;

pub trait FftProvider: Send + Sync {
    /// In-place unnormalized forward DFT of every fiber along `axis`.
    fn forward(&self, t: &mut ComplexTensor, axis: usize) -> Result<()>;

    /// In-place inverse DFT (with `1/N`) of every fiber along `axis`.
    fn inverse(&self, t: &mut ComplexTensor, axis: usize) -> Result<()>;
}

/// [`FftProvider`] backed by `rustfft`, with plans cached per length and direction.
pub struct RustFftProvider {
    plans: Mutex<PlanCache>,
}

struct PlanCache {
    planner: FftPlanner<f64>,
    plans: HashMap<(usize, bool), Arc<dyn Fft<f64>>>,
}

impl std::fmt::Debug for RustFftProvider {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RustFftProvider").finish_non_exhaustive()
    }
}

impl Default for RustFftProvider {
    fn default() -> Self {
        Self {
            plans: Mutex::new(PlanCache {
                planner: FftPlanner::new(),
                plans: HashMap::new(),
            }),
        }
    }
}

impl RustFftProvider {
    pub fn new() -> Self {
        Self::default()
    }

    fn plan(&self, len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
        let forward = direction == FftDirection::Forward;
        let mut cache = self.plans.lock().expect("fft plan cache poisoned");
        let PlanCache { planner, plans } = &mut *cache;
        plans
            .entry((len, forward))
            .or_insert_with(|| planner.plan_fft(len, direction))
            .clone()
    }

    fn transform(&self, t: &mut ComplexTensor, axis: usize, direction: FftDirection) -> Result<()> {
        t.check_axis(axis)?;
        let (outer, n, inner) = t.axis_layout(axis);
        if n == 1 {
            return Ok(());
        }
        let fft = self.plan(n, direction);
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        let data = t.data_mut();

        if inner == 1 {
            fft.process_with_scratch(data, &mut scratch);
        } else {
            let width = inner.min(GATHER_WIDTH);
            let mut buf = vec![Complex64::default(); width * n];
            for o in 0..outer {
                let slab = &mut data[o * n * inner..(o + 1) * n * inner];
                for start in (0..inner).step_by(width) {
                    let w = width.min(inner - start);
                    for j in 0..n {
                        let row = &slab[j * inner + start..j * inner + start + w];
                        for (q, z) in row.iter().enumerate() {
                            buf[q * n + j] = *z;
                        }
                    }
                    fft.process_with_scratch(&mut buf[..w * n], &mut scratch);
                    for j in 0..n {
                        let row = &mut slab[j * inner + start..j * inner + start + w];
                        for (q, z) in row.iter_mut().enumerate() {
                            *z = buf[q * n + j];
                        }
                    }
                }
            }
        }

        if direction == FftDirection::Inverse {
            let scale = 1.0 / n as f64;
            for z in data.iter_mut() {
                *z *= scale;
            }
        }
        Ok(())
    }
}

impl FftProvider for RustFftProvider {
    fn forward(&self, t: &mut ComplexTensor, axis: usize) -> Result<()> {
        self.transform(t, axis, FftDirection::Forward)
    }

    fn inverse(&self, t: &mut ComplexTensor, axis: usize) -> Result<()> {
        self.transform(t, axis, FftDirection::Inverse)
    }
}

/// Process-wide provider used by the free functions and default constructors.
pub fn default_provider() -> Arc<RustFftProvider> {
    static PROVIDER: OnceLock<Arc<RustFftProvider>> = OnceLock::new();
    PROVIDER.get_or_init(|| Arc::new(RustFftProvider::new())).clone()
}

pub fn fft_axis(t: &mut ComplexTensor, axis: usize) -> Result<()> {
    default_provider().forward(t, axis)
}

pub fn ifft_axis(t: &mut ComplexTensor, axis: usize) -> Result<()> {
    default_provider().inverse(t, axis)
}

/// Forward transform along every axis.
pub fn fft_all(provider: &dyn FftProvider, t: &mut ComplexTensor) -> Result<()> {
    (0..t.ndim()).try_for_each(|axis| provider.forward(t, axis))
}
