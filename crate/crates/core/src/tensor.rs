//! Dense d-level complex tensors and the elementwise primitives the engines share.
//!
//! Storage is row-major with level 0 outermost: the last level has unit stride.
//! Level (axis) indices are zero-based throughout the crate.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::MAX_LEVELS;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexTensor {
    shape: Vec<usize>,
    data: Vec<Complex64>,
}

pub(crate) fn validate_shape(shape: &[usize]) -> Result<usize> {
    if shape.is_empty() || shape.len() > MAX_LEVELS || shape.contains(&0) {
        return Err(Error::InvalidShape(shape.to_vec()));
    }
    shape
        .iter()
        .try_fold(1usize, |acc, &n| acc.checked_mul(n))
        .ok_or_else(|| Error::Resource(format!("shape {shape:?} overflows usize")))
}

pub(crate) fn try_with_capacity(len: usize) -> Result<Vec<Complex64>> {
    let mut data = Vec::new();
    data.try_reserve_exact(len).map_err(|e| {
        Error::Resource(format!("cannot allocate {len} complex elements: {e}"))
    })?;
    Ok(data)
}

/// Allocates `len` zeros, reporting allocator failure as a resource error.
pub(crate) fn try_zeroed(len: usize) -> Result<Vec<Complex64>> {
    let mut data = try_with_capacity(len)?;
    data.resize(len, Complex64::new(0.0, 0.0));
    Ok(data)
}

impl ComplexTensor {
    pub fn new(shape: Vec<usize>, data: Vec<Complex64>) -> Result<Self> {
        let len = validate_shape(&shape)?;
        if data.len() != len {
            return Err(Error::DataLength {
                expected: len,
                found: data.len(),
            });
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Result<Self> {
        let len = validate_shape(shape)?;
        Ok(Self {
            shape: shape.to_vec(),
            data: try_zeroed(len)?,
        })
    }

    /// Builds a tensor by evaluating `f` at every multi-index in storage order.
    pub fn from_fn(shape: &[usize], mut f: impl FnMut(&[usize]) -> Complex64) -> Result<Self> {
        let len = validate_shape(shape)?;
        let mut data = Vec::with_capacity(len);
        let mut idx = vec![0usize; shape.len()];
        for _ in 0..len {
            data.push(f(&idx));
            advance(&mut idx, shape);
        }
        Ok(Self {
            shape: shape.to_vec(),
            data,
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn try_clone(&self) -> Result<Self> {
        let mut data = try_with_capacity(self.data.len())?;
        data.extend_from_slice(&self.data);
        Ok(Self {
            shape: self.shape.clone(),
            data,
        })
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        offset(&self.shape, idx)
    }

    pub fn get(&self, idx: &[usize]) -> Complex64 {
        self.data[self.offset(idx)]
    }

    pub(crate) fn check_axis(&self, axis: usize) -> Result<()> {
        if axis >= self.ndim() {
            return Err(Error::AxisOutOfRange {
                axis,
                ndim: self.ndim(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch {
                expected: self.shape.clone(),
                found: other.shape.clone(),
            });
        }
        Ok(())
    }

    /// `(outer, n, inner)` for a fiber decomposition along `axis`.
    pub(crate) fn axis_layout(&self, axis: usize) -> (usize, usize, usize) {
        axis_layout(&self.shape, axis)
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

pub(crate) fn axis_layout(shape: &[usize], axis: usize) -> (usize, usize, usize) {
    let outer = shape[..axis].iter().product();
    let inner = shape[axis + 1..].iter().product();
    (outer, shape[axis], inner)
}

pub(crate) fn offset(shape: &[usize], idx: &[usize]) -> usize {
    idx.iter()
        .zip(shape)
        .fold(0usize, |acc, (&i, &n)| acc * n + i)
}

/// Row-major odometer increment; wraps to all zeros after the last index.
pub(crate) fn advance(idx: &mut [usize], shape: &[usize]) {
    for l in (0..shape.len()).rev() {
        idx[l] += 1;
        if idx[l] < shape[l] {
            return;
        }
        idx[l] = 0;
    }
}

/// `exp(-iπk/n)` for `k in 0..n`, or the conjugates.
pub fn phase_factors(n: usize, conjugate: bool) -> Vec<Complex64> {
    let sign = if conjugate { 1.0 } else { -1.0 };
    (0..n)
        .map(|k| Complex64::from_polar(1.0, sign * PI * k as f64 / n as f64))
        .collect()
}

/// Multiplies entry `k` along `axis` by `exp(-iπk/n)` (its conjugate when `conjugate`).
///
/// Under the forward kernel `exp(-2πi lk/N)` the DFT of the shifted fiber is the odd
/// half of the DFT of the fiber zero-padded to twice its length.
pub fn phase_shift_axis(t: &mut ComplexTensor, axis: usize, conjugate: bool) -> Result<()> {
    t.check_axis(axis)?;
    let (outer, n, inner) = t.axis_layout(axis);
    let phases = phase_factors(n, conjugate);
    for o in 0..outer {
        let slab = &mut t.data[o * n * inner..(o + 1) * n * inner];
        for (row, p) in slab.chunks_exact_mut(inner).zip(&phases) {
            for z in row {
                *z *= p;
            }
        }
    }
    Ok(())
}

/// `a + alpha * b`, elementwise.
pub fn scale_add(a: &ComplexTensor, b: &ComplexTensor, alpha: Complex64) -> Result<ComplexTensor> {
    a.check_same_shape(b)?;
    let mut out = a.try_clone()?;
    for (x, y) in out.data.iter_mut().zip(&b.data) {
        *x += alpha * y;
    }
    Ok(out)
}

/// `‖a − b‖₂ / ‖b‖₂`; zero when both are zero, infinite when only `b` is.
pub fn relative_error(a: &ComplexTensor, b: &ComplexTensor) -> Result<f64> {
    a.check_same_shape(b)?;
    let diff = a
        .data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let scale = b.norm();
    Ok(if diff == 0.0 {
        0.0
    } else if scale == 0.0 {
        f64::INFINITY
    } else {
        diff / scale
    })
}
