//! Matrix-free multilevel (block) Toeplitz matrix-vector products.
//!
//! The split engine ([`split`]) evaluates `y = T v` for a d-level Toeplitz operator
//! without ever materializing the `2^d`-times larger circulant embedding: each level
//! is split into even/odd Fourier branches that are transformed, multiplied by the
//! matching parity block of the kernel spectrum, and merged back level by level.
//! [`baseline`] holds the standard full-embedding method and a dense oracle, and
//! [`analysis`] the closed-form cost and memory models both are compared against.
//!
//! ```
//! use num_complex::Complex64;
//! use splitfft::kernel::{embed_generator, precompute_spectra, GeneratorSpec, PrecomputeStrategy, Symmetry};
//! use splitfft::{fft::default_provider, split::{toe_mul_split, ExecutionPolicy}, ComplexTensor};
//!
//! let c = |re| Complex64::new(re, 0.0);
//! // T = [[1, 2], [3, 1]]: lags t_{-1} = 2, t_0 = 1, t_{+1} = 3
//! let g = GeneratorSpec::new(vec![2], vec![c(2.0), c(1.0), c(3.0)], Symmetry::General).unwrap();
//! let e = embed_generator(&g, c(0.0)).unwrap();
//! let k = precompute_spectra(&e, PrecomputeStrategy::Branchwise, &*default_provider()).unwrap();
//! let v = ComplexTensor::new(vec![2], vec![c(1.0), c(1.0)]).unwrap();
//! let (y, metrics) = toe_mul_split(&k, &v, ExecutionPolicy::lazy()).unwrap();
//! assert!((y.data()[0] - c(3.0)).norm() < 1e-12 && (y.data()[1] - c(4.0)).norm() < 1e-12);
//! assert_eq!(metrics.fft_fwd, 2);
//! ```

pub mod analysis;
pub mod baseline;
mod error;
pub mod fft;
pub mod kernel;
pub mod meter;
pub mod split;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::ComplexTensor;

/// Most Toeplitz levels a tensor may have.
pub const MAX_LEVELS: usize = 8;
