//! Multilevel Toeplitz generators, their circulant embedding and the parity-indexed
//! kernel spectra used by the engines.

mod embed;
mod generator;
pub mod io;
mod spectra;

pub use embed::{embed_generator, EmbeddedGenerator};
pub use generator::{GeneratorSpec, Symmetry};
pub use spectra::{
    compress_spectra, next_id, precompute_spectra, BranchId, KernelSpectra, PrecomputeStrategy,
    Storage,
};
pub(crate) use spectra::for_each_unfolded;
