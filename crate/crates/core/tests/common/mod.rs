#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use splitfft::kernel::{GeneratorSpec, Symmetry};
use splitfft::ComplexTensor;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Direct O(N²) DFT with kernel exp(-2πi lk/N).
pub fn dft(v: &[Complex64]) -> Vec<Complex64> {
    let n = v.len();
    (0..n)
        .map(|l| {
            v.iter()
                .enumerate()
                .map(|(k, x)| x * Complex64::from_polar(1.0, -2.0 * PI * ((l * k) % n) as f64 / n as f64))
                .sum()
        })
        .collect()
}

/// Direct multidimensional DFT over a row-major tensor.
pub fn dft_nd(t: &ComplexTensor) -> ComplexTensor {
    let shape = t.shape().to_vec();
    let mut out = t.clone();
    for axis in 0..shape.len() {
        let outer: usize = shape[..axis].iter().product();
        let n = shape[axis];
        let inner: usize = shape[axis + 1..].iter().product();
        let src = out.clone();
        for o in 0..outer {
            for q in 0..inner {
                let fiber: Vec<_> = (0..n).map(|j| src.data()[(o * n + j) * inner + q]).collect();
                for (j, z) in dft(&fiber).into_iter().enumerate() {
                    out.data_mut()[(o * n + j) * inner + q] = z;
                }
            }
        }
    }
    out
}

pub fn random_tensor(rng: &mut ChaCha8Rng, shape: &[usize]) -> ComplexTensor {
    ComplexTensor::from_fn(shape, |_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).unwrap()
}

/// Random generator, symmetrized level by level for the requested mode.
pub fn random_generator(rng: &mut ChaCha8Rng, levels: &[usize], symmetry: Symmetry) -> GeneratorSpec {
    let shape: Vec<usize> = levels.iter().map(|&n| 2 * n - 1).collect();
    let mut lags = random_tensor(rng, &shape);
    if let Some(sign) = symmetry.mirror_sign() {
        for axis in 0..shape.len() {
            let src = lags.clone();
            let outer: usize = shape[..axis].iter().product();
            let len = shape[axis];
            let inner: usize = shape[axis + 1..].iter().product();
            for o in 0..outer {
                for i in 0..len {
                    for q in 0..inner {
                        let a = src.data()[(o * len + i) * inner + q];
                        let b = src.data()[(o * len + len - 1 - i) * inner + q];
                        lags.data_mut()[(o * len + i) * inner + q] = (a + sign * b) * 0.5;
                    }
                }
            }
        }
    }
    GeneratorSpec::new(levels.to_vec(), lags.into_data(), symmetry).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
