//! Engine construction shared by the verify and bench commands.

use std::sync::Arc;

use num_complex::Complex64;
use splitfft::baseline::EmbedOperator;
use splitfft::fft::default_provider;
use splitfft::kernel::{
    compress_spectra, embed_generator, precompute_spectra, GeneratorSpec, PrecomputeStrategy, Storage,
};
use splitfft::split::{ExecutionPolicy, SplitOperator};

use crate::error::Result;

/// Padding value used for every embedding built here.
pub const PADDING: Complex64 = Complex64::new(0.0, 0.0);

pub fn build_split(g: &GeneratorSpec, compressed: bool, policy: ExecutionPolicy) -> Result<SplitOperator> {
    let provider = default_provider();
    let e = embed_generator(g, PADDING)?;
    let mut k = precompute_spectra(&e, PrecomputeStrategy::FullFft, &*provider)?;
    if compressed {
        k = compress_spectra(&k, g)?;
    }
    Ok(SplitOperator::with_provider(Arc::new(k), policy, provider)?)
}

pub fn build_embed(g: &GeneratorSpec, compressed: bool) -> Result<EmbedOperator> {
    let storage = if compressed { Storage::MirrorCompressed } else { Storage::Full };
    Ok(EmbedOperator::with_provider(g, PADDING, storage, default_provider())?)
}
