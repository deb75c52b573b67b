//! Reference methods: the standard full circulant embedding and a dense oracle.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{default_provider, fft_all, FftProvider};
use crate::kernel::{embed_generator, GeneratorSpec, Storage, Symmetry};
use crate::meter::AllocationMeter;
use crate::split::{Counters, RunMetrics};
use crate::tensor::{self, ComplexTensor};

/// Largest `s` the dense oracle materializes by default (an `s × s` matrix).
pub const DEFAULT_ORACLE_CAP: usize = 4096;

/// Position `j` of a length-`2n` spectrum folded onto `0..=n`.
fn half_spectrum_table(n: usize) -> Vec<(usize, bool)> {
    (0..2 * n)
        .map(|j| if j <= n { (j, false) } else { (2 * n - j, true) })
        .collect()
}

/// Matvec through the fully embedded `2^d·s` circulant.
pub struct EmbedOperator {
    levels: Vec<usize>,
    symmetry: Symmetry,
    storage: Storage,
    spectrum: ComplexTensor,
    provider: Arc<dyn FftProvider>,
    mem_limit: Option<usize>,
}

impl std::fmt::Debug for EmbedOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EmbedOperator")
            .field("levels", &self.levels)
            .field("storage", &self.storage)
            .finish_non_exhaustive()
    }
}

impl EmbedOperator {
    pub fn new(g: &GeneratorSpec, s0: Complex64, storage: Storage) -> Result<Self> {
        Self::with_provider(g, s0, storage, default_provider())
    }

    /// Precomputes the DFT of the embedded generator. Mirror-compressed storage keeps
    /// only indices `0..=n_l` per level, valid for (skew-)symmetric generators.
    pub fn with_provider(
        g: &GeneratorSpec,
        s0: Complex64,
        storage: Storage,
        provider: Arc<dyn FftProvider>,
    ) -> Result<Self> {
        let e = embed_generator(g, s0)?;
        let mut spectrum = e.tensor().try_clone()?;
        fft_all(&*provider, &mut spectrum)?;
        if storage == Storage::MirrorCompressed {
            if g.symmetry() == Symmetry::General {
                return Err(Error::InvalidMode(
                    "mirror-compressed storage needs a symmetric or skew generator".into(),
                ));
            }
            if g.symmetry() == Symmetry::Skew && s0 != Complex64::new(0.0, 0.0) {
                return Err(Error::InvalidSymmetry {
                    mode: "skew",
                    detail: format!("padding value {s0} breaks odd mirror symmetry"),
                });
            }
            let half: Vec<usize> = g.levels().iter().map(|&n| n + 1).collect();
            spectrum = ComplexTensor::from_fn(&half, |i| spectrum.get(i))?;
        }
        Ok(Self {
            levels: g.levels().to_vec(),
            symmetry: g.symmetry(),
            storage,
            spectrum,
            provider,
            mem_limit: None,
        })
    }

    pub fn with_mem_limit(mut self, elems: usize) -> Self {
        self.mem_limit = Some(elems);
        self
    }

    pub fn kernel_elems(&self) -> usize {
        self.spectrum.len()
    }

    pub fn apply(&self, v: &ComplexTensor) -> Result<(ComplexTensor, RunMetrics)> {
        if v.shape() != self.levels.as_slice() {
            return Err(Error::ShapeMismatch {
                expected: self.levels.clone(),
                found: v.shape().to_vec(),
            });
        }
        let meter = match self.mem_limit {
            Some(limit) => AllocationMeter::with_limit(limit),
            None => AllocationMeter::new(),
        };
        let counters = Counters::default();
        let d = self.levels.len();
        let padded_shape: Vec<usize> = self.levels.iter().map(|&n| 2 * n).collect();

        let _padded_lease = meter.track(padded_shape.iter().product())?;
        let mut padded = ComplexTensor::zeros(&padded_shape)?;
        let mut idx = vec![0usize; d];
        for z in v.data() {
            let at = padded.offset(&idx);
            padded.data_mut()[at] = *z;
            tensor::advance(&mut idx, &self.levels);
        }

        for axis in 0..d {
            self.provider.forward(&mut padded, axis)?;
        }
        Counters::add(&counters.fft_fwd, d);

        match self.storage {
            Storage::Full => {
                for (x, t) in padded.data_mut().iter_mut().zip(self.spectrum.data()) {
                    *x *= t;
                }
            }
            Storage::MirrorCompressed => {
                let tables: Vec<_> = self.levels.iter().map(|&n| half_spectrum_table(n)).collect();
                let sign = self.symmetry.mirror_sign().unwrap_or(1.0);
                let data = padded.data_mut();
                crate::kernel::for_each_unfolded(&self.spectrum, &tables, sign, |i, t| data[i] *= t);
            }
        }
        Counters::add(&counters.kernel_mults, padded.len());

        for axis in 0..d {
            self.provider.inverse(&mut padded, axis)?;
        }
        Counters::add(&counters.fft_inv, d);

        let _out_lease = meter.track(v.len())?;
        let y = ComplexTensor::from_fn(&self.levels, |i| padded.get(i))?;
        let metrics = counters.snapshot(&self.levels, meter.peak(), self.spectrum.len());
        Ok((y, metrics))
    }
}

/// Full-embedding matvec with zero padding and full spectrum storage.
pub fn toe_mul_embed(g: &GeneratorSpec, v: &ComplexTensor) -> Result<(ComplexTensor, RunMetrics)> {
    EmbedOperator::new(g, Complex64::new(0.0, 0.0), Storage::Full)?.apply(v)
}

/// Dense `s × s` multilevel Toeplitz matrix, `T[j,k] = t_{m(j) - m(k)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseToeplitzMatrix {
    size: usize,
    entries: Vec<Complex64>,
}

impl DenseToeplitzMatrix {
    /// Assembles the matrix lag by lag from the generator.
    pub fn from_generator(g: &GeneratorSpec, cap: usize) -> Result<Self> {
        let levels = g.levels();
        let s = g.size();
        if s > cap {
            return Err(Error::OracleCap { size: s, cap });
        }
        let mut entries = Vec::with_capacity(s * s);
        let mut row = vec![0usize; levels.len()];
        let mut lag = vec![0isize; levels.len()];
        for _ in 0..s {
            let mut col = vec![0usize; levels.len()];
            for _ in 0..s {
                for l in 0..levels.len() {
                    lag[l] = row[l] as isize - col[l] as isize;
                }
                entries.push(g.lag(&lag));
                tensor::advance(&mut col, levels);
            }
            tensor::advance(&mut row, levels);
        }
        Ok(Self { size: s, entries })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        self.entries[j * self.size + k]
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.size).all(|j| (0..j).all(|k| self.get(j, k) == self.get(k, j)))
    }

    pub fn matvec(&self, v: &ComplexTensor) -> Result<ComplexTensor> {
        if v.len() != self.size {
            return Err(Error::DataLength {
                expected: self.size,
                found: v.len(),
            });
        }
        let data = self
            .entries
            .chunks_exact(self.size)
            .map(|row| row.iter().zip(v.data()).map(|(a, x)| a * x).sum())
            .collect();
        ComplexTensor::new(v.shape().to_vec(), data)
    }
}

pub fn naive_matvec(g: &GeneratorSpec, v: &ComplexTensor) -> Result<ComplexTensor> {
    naive_matvec_capped(g, v, DEFAULT_ORACLE_CAP)
}

pub fn naive_matvec_capped(g: &GeneratorSpec, v: &ComplexTensor, cap: usize) -> Result<ComplexTensor> {
    if v.shape() != g.levels() {
        return Err(Error::ShapeMismatch {
            expected: g.levels().to_vec(),
            found: v.shape().to_vec(),
        });
    }
    DenseToeplitzMatrix::from_generator(g, cap)?.matvec(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::relative_error;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn g2x2() -> GeneratorSpec {
        GeneratorSpec::new(vec![2], vec![c(2., 0.), c(1., 0.), c(3., 0.)], Symmetry::General).unwrap()
    }

    fn pseudo(shape: &[usize], salt: f64) -> ComplexTensor {
        ComplexTensor::from_fn(shape, |i| {
            let x = i.iter().enumerate().map(|(l, &k)| (l + 2) as f64 * k as f64).sum::<f64>();
            c((x * 1.3 + salt).sin(), (x * 0.7 - salt).cos())
        })
        .unwrap()
    }

    #[test]
    fn two_by_two() {
        let v = ComplexTensor::new(vec![2], vec![c(1., 0.), c(1., 0.)]).unwrap();
        let want = [c(3., 0.), c(4., 0.)];
        let dense = naive_matvec(&g2x2(), &v).unwrap();
        assert_eq!(dense.data(), &want);
        let (y, m) = toe_mul_embed(&g2x2(), &v).unwrap();
        for (a, b) in y.data().iter().zip(&want) {
            assert!((a - b).norm() < 1e-12);
        }
        assert_eq!((m.fft_fwd, m.fft_inv, m.kernel_mults, m.phase_mults), (1, 1, 4, 0));
        assert_eq!(m.peak_elems, 4 + 2);
    }

    #[test]
    fn dense_layout() {
        let d = DenseToeplitzMatrix::from_generator(&g2x2(), 16).unwrap();
        assert_eq!(d.get(0, 0), c(1., 0.));
        assert_eq!(d.get(0, 1), c(2., 0.));
        assert_eq!(d.get(1, 0), c(3., 0.));
        assert!(!d.is_symmetric());
    }

    #[test]
    fn identity_generator() {
        let g = GeneratorSpec::identity(&[3, 2]).unwrap();
        let v = pseudo(&[3, 2], 0.1);
        let (y, _) = toe_mul_embed(&g, &v).unwrap();
        assert!(relative_error(&y, &v).unwrap() < 1e-14);
    }

    #[test]
    fn zero_vector() {
        let g = GeneratorSpec::from_fn(&[3, 2], Symmetry::General, |m| c(m[0] as f64, 1.)).unwrap();
        let v = ComplexTensor::zeros(&[3, 2]).unwrap();
        assert!(naive_matvec(&g, &v).unwrap().data().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn symmetric_generator_gives_symmetric_matrix() {
        let g = GeneratorSpec::from_fn(&[3, 4], Symmetry::Symmetric, |m| {
            c((m[0].abs() + 2 * m[1].abs()) as f64, (m[0] * m[0]) as f64)
        })
        .unwrap();
        assert!(DenseToeplitzMatrix::from_generator(&g, 64).unwrap().is_symmetric());
    }

    #[test]
    fn embed_matches_dense_in_two_levels() {
        let g = GeneratorSpec::from_fn(&[3, 3], Symmetry::General, |m| {
            c((m[0] * 3 + m[1]) as f64 * 0.5, (m[0] - m[1] * m[1]) as f64)
        })
        .unwrap();
        let v = pseudo(&[3, 3], 0.4);
        let (y, _) = toe_mul_embed(&g, &v).unwrap();
        let want = naive_matvec(&g, &v).unwrap();
        assert!(relative_error(&y, &want).unwrap() < 1e-10);
    }

    #[test]
    fn compressed_embed_spectrum_matches_full() {
        for sym in [Symmetry::Symmetric, Symmetry::Skew] {
            let sign = if sym == Symmetry::Skew { -1.0 } else { 1.0 };
            let g = GeneratorSpec::from_fn(&[4, 3], sym, |m| {
                let f = |x: isize| if x < 0 { sign * ((-x) as f64 + 0.5) } else if x == 0 { if sign < 0.0 { 0.0 } else { 2.0 } } else { x as f64 + 0.5 };
                let p = f(m[0]) * f(m[1]);
                c(p, -0.3 * p)
            })
            .unwrap();
            let v = pseudo(&[4, 3], 1.1);
            let full = EmbedOperator::new(&g, c(0., 0.), Storage::Full).unwrap();
            let half = EmbedOperator::new(&g, c(0., 0.), Storage::MirrorCompressed).unwrap();
            assert_eq!(half.kernel_elems(), 5 * 4);
            let (a, _) = full.apply(&v).unwrap();
            let (b, _) = half.apply(&v).unwrap();
            assert!(relative_error(&b, &a).unwrap() < 1e-12, "{sym}");
        }
    }

    #[test]
    fn oracle_cap() {
        let g = GeneratorSpec::identity(&[5, 5]).unwrap();
        let v = ComplexTensor::zeros(&[5, 5]).unwrap();
        assert_eq!(
            naive_matvec_capped(&g, &v, 24),
            Err(Error::OracleCap { size: 25, cap: 24 })
        );
    }
}
