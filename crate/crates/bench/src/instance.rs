//! Seeded random test instances.
//!
//! Draws come from ChaCha20 seeded with `seed_from_u64(seed)`. The generator lags use
//! stream 0 and the input vector stream 1, so the two never share key-stream blocks.
//! Each complex value consumes two `u64` words `a, b` and is one Box–Muller pair:
//! `u1 = ((a >> 11) + 1)·2^-53`, `u2 = (b >> 11)·2^-53`,
//! `re = σ·sqrt(-2 ln u1)·cos(2π u2)`, `im = σ·sqrt(-2 ln u1)·sin(2π u2)`, σ² = variance.
//! Lags are drawn in row-major order of the `(2n_1-1) × … × (2n_d-1)` lag tensor and
//! the vector in row-major order of its shape.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use splitfft::kernel::{GeneratorSpec, Symmetry};
use splitfft::ComplexTensor;

use crate::error::{BenchError, Result};

pub const LAG_STREAM: u64 = 0;
pub const VECTOR_STREAM: u64 = 1;

/// Source of zero-mean complex Gaussians with a fixed per-component variance.
pub struct GaussianSource {
    rng: ChaCha20Rng,
    sigma: f64,
}

impl GaussianSource {
    pub fn new(seed: u64, stream: u64, variance: f64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self {
            rng,
            sigma: variance.sqrt(),
        }
    }

    pub fn sample(&mut self) -> Complex64 {
        let u1 = ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let r = self.sigma * (-2.0 * u1.ln()).sqrt();
        let (sin, cos) = (2.0 * PI * u2).sin_cos();
        Complex64::new(r * cos, r * sin)
    }

    pub fn tensor(&mut self, shape: &[usize]) -> Result<ComplexTensor> {
        Ok(ComplexTensor::from_fn(shape, |_| self.sample())?)
    }
}

/// Replaces each lag by `(t_m ± t_{m'})/2`, where `m'` negates the lag along one level,
/// for every level in turn. The result is even (or odd) in each level separately.
pub fn symmetrize(lags: &mut ComplexTensor, sign: f64) {
    let shape = lags.shape().to_vec();
    for axis in 0..shape.len() {
        let outer: usize = shape[..axis].iter().product();
        let len = shape[axis];
        let inner: usize = shape[axis + 1..].iter().product();
        let data = lags.data_mut();
        for o in 0..outer {
            let base = o * len * inner;
            for i in 0..len.div_ceil(2) {
                let j = len - 1 - i;
                for q in 0..inner {
                    let a = data[base + i * inner + q];
                    let b = data[base + j * inner + q];
                    data[base + i * inner + q] = (a + sign * b) * 0.5;
                    data[base + j * inner + q] = (b + sign * a) * 0.5;
                }
            }
        }
    }
}

/// Deterministic random generator and input vector for the given level sizes.
pub fn make_instance(
    levels: &[usize],
    seed: u64,
    variance: f64,
    symmetry: Symmetry,
) -> Result<(GeneratorSpec, ComplexTensor)> {
    if !(variance >= 0.0 && variance.is_finite()) {
        return Err(BenchError::Usage(format!("invalid variance {variance}")));
    }
    let lag_shape: Vec<usize> = levels.iter().map(|&n| (2 * n).saturating_sub(1)).collect();
    let mut lags = GaussianSource::new(seed, LAG_STREAM, variance).tensor(&lag_shape)?;
    if let Some(sign) = symmetry.mirror_sign() {
        symmetrize(&mut lags, sign);
    }
    let g = GeneratorSpec::new(levels.to_vec(), lags.into_data(), symmetry)?;
    let v = GaussianSource::new(seed, VECTOR_STREAM, variance).tensor(levels)?;
    Ok((g, v))
}

/// Random input vector for a generator loaded from elsewhere.
pub fn make_vector(levels: &[usize], seed: u64, variance: f64) -> Result<ComplexTensor> {
    GaussianSource::new(seed, VECTOR_STREAM, variance).tensor(levels)
}
