//! Parity-indexed Fourier blocks of the embedded generator.
//!
//! Block `b` holds the DFT of the embedded generator sampled at `2k_l + b_l` along
//! every level `l`, where `b_l` is bit `l` of the [`BranchId`]. For (skew-)symmetric
//! generators each level's spectrum is (odd-)mirror symmetric, `f_j = ±f_{2n-j}`,
//! so within a parity block the even half pairs `k ↔ n-k` and the odd half pairs
//! `k ↔ n-1-k`. Mirror-compressed storage keeps only the first half (plus fixed
//! points) along each level, `n + 1` values per level across both parities.

use std::fmt;

use num_complex::Complex64;

use super::embed::EmbeddedGenerator;
use super::generator::{GeneratorSpec, Symmetry};
use crate::error::{Error, Result};
use crate::fft::{self, FftProvider};
use crate::tensor::{self, phase_shift_axis, ComplexTensor};

/// Bitmask of per-level parities; bit `l` set means odd Fourier coefficients along level `l`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BranchId(u32);

impl BranchId {
    pub const ROOT: BranchId = BranchId(0);

    pub fn new(bits: u32, ndim: usize) -> Result<Self> {
        if ndim < 32 && bits >> ndim != 0 {
            return Err(Error::InvalidArgument(format!(
                "branch id {bits:#b} has bits beyond {ndim} levels"
            )));
        }
        Ok(Self(bits))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_odd(self, level: usize) -> bool {
        self.0 >> level & 1 == 1
    }

    /// Identifier of the odd child produced by splitting `level`.
    pub fn next(self, level: usize) -> Result<Self> {
        if self.is_odd(level) {
            return Err(Error::BranchLevelSet { id: self.0, level });
        }
        Ok(Self(self.0 | 1 << level))
    }

    /// All `2^ndim` identifiers in ascending order.
    pub fn all(ndim: usize) -> impl Iterator<Item = BranchId> {
        (0..1u32 << ndim).map(BranchId)
    }
}

impl fmt::Debug for BranchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BranchId({:#b})", self.0)
    }
}

pub fn next_id(b: BranchId, level: usize) -> Result<BranchId> {
    b.next(level)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Storage {
    Full,
    MirrorCompressed,
}

impl Storage {
    pub fn as_str(self) -> &'static str {
        match self {
            Storage::Full => "full",
            Storage::MirrorCompressed => "compressed",
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            Storage::Full => 0,
            Storage::MirrorCompressed => 1,
        }
    }

    pub(crate) fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(Storage::Full),
            1 => Ok(Storage::MirrorCompressed),
            other => Err(Error::Format(format!("unknown storage code {other}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecomputeStrategy {
    /// One `2^d·s`-point transform of the embedded generator, then de-interleave.
    FullFft,
    /// Fold and transform level by level, mirroring the split recursion.
    Branchwise,
}

/// Stored length of a parity block along a level of size `n`.
pub(crate) fn folded_len(n: usize, odd: bool) -> usize {
    if odd {
        n.div_ceil(2)
    } else {
        n / 2 + 1
    }
}

/// For each position `k` of a parity block, the stored position and whether it is mirrored.
pub(crate) fn fold_table(n: usize, odd: bool) -> Vec<(usize, bool)> {
    let kept = folded_len(n, odd);
    (0..n)
        .map(|k| {
            if k < kept {
                (k, false)
            } else if odd {
                (n - 1 - k, true)
            } else {
                (n - k, true)
            }
        })
        .collect()
}

/// Visits every position of the full tensor described by `tables`, in row-major order,
/// with the value reconstructed from `stored`. `sign` is applied once per mirrored level.
pub(crate) fn for_each_unfolded(
    stored: &ComplexTensor,
    tables: &[Vec<(usize, bool)>],
    sign: f64,
    mut f: impl FnMut(usize, Complex64),
) {
    let d = tables.len();
    let stored_shape = stored.shape();
    let mut strides = vec![1usize; d];
    for l in (0..d.saturating_sub(1)).rev() {
        strides[l] = strides[l + 1] * stored_shape[l + 1];
    }
    let outer_shape: Vec<usize> = tables[..d - 1].iter().map(Vec::len).collect();
    let outer_len: usize = outer_shape.iter().product();
    let last = &tables[d - 1];
    let data = stored.data();
    let mut idx = vec![0usize; d - 1];
    let mut pos = 0usize;
    for _ in 0..outer_len {
        let mut base = 0usize;
        let mut flips = 0u32;
        for (l, &k) in idx.iter().enumerate() {
            let (s, m) = tables[l][k];
            base += s * strides[l];
            flips += m as u32;
        }
        for &(s, m) in last {
            let mut z = data[base + s];
            if sign < 0.0 && (flips + m as u32) % 2 == 1 {
                z = -z;
            }
            f(pos, z);
            pos += 1;
        }
        tensor::advance(&mut idx, &outer_shape);
    }
}

/// The `2^d` parity blocks `T[bId]` consumed by the split engine's leaves.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpectra {
    levels: Vec<usize>,
    symmetry: Symmetry,
    storage: Storage,
    padding: Complex64,
    blocks: Vec<ComplexTensor>,
}

impl KernelSpectra {
    /// Assembles spectra from raw blocks (in [`BranchId`] order), checking block shapes.
    pub fn from_parts(
        levels: Vec<usize>,
        symmetry: Symmetry,
        storage: Storage,
        padding: Complex64,
        blocks: Vec<ComplexTensor>,
    ) -> Result<Self> {
        tensor::validate_shape(&levels)?;
        let d = levels.len();
        if blocks.len() != 1 << d {
            return Err(Error::KernelIntegrity(format!(
                "expected {} blocks, found {}",
                1 << d,
                blocks.len()
            )));
        }
        if storage == Storage::MirrorCompressed && symmetry == Symmetry::General {
            return Err(Error::InvalidMode(
                "mirror-compressed storage needs a symmetric or skew kernel".into(),
            ));
        }
        let spectra = Self {
            levels,
            symmetry,
            storage,
            padding,
            blocks,
        };
        for b in BranchId::all(d) {
            let want = spectra.stored_shape(b);
            let got = spectra.blocks[b.index()].shape();
            if got != want.as_slice() {
                return Err(Error::KernelIntegrity(format!(
                    "block {b:?} has shape {got:?}, expected {want:?}"
                )));
            }
        }
        Ok(spectra)
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn ndim(&self) -> usize {
        self.levels.len()
    }

    pub fn size(&self) -> usize {
        self.levels.iter().product()
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn storage(&self) -> Storage {
        self.storage
    }

    pub fn padding(&self) -> Complex64 {
        self.padding
    }

    /// Block `b` as stored (compressed shape in mirror-compressed mode).
    pub fn stored_block(&self, b: BranchId) -> Result<&ComplexTensor> {
        self.blocks.get(b.index()).ok_or_else(|| {
            Error::KernelIntegrity(format!(
                "no block {b:?} in a {}-level kernel",
                self.levels.len()
            ))
        })
    }

    pub fn blocks(&self) -> &[ComplexTensor] {
        &self.blocks
    }

    /// Complex elements held across all blocks.
    pub fn stored_elems(&self) -> usize {
        self.blocks.iter().map(ComplexTensor::len).sum()
    }

    fn stored_shape(&self, b: BranchId) -> Vec<usize> {
        self.levels
            .iter()
            .enumerate()
            .map(|(l, &n)| match self.storage {
                Storage::Full => n,
                Storage::MirrorCompressed => folded_len(n, b.is_odd(l)),
            })
            .collect()
    }

    fn fold_tables(&self, b: BranchId) -> Vec<Vec<(usize, bool)>> {
        self.levels
            .iter()
            .enumerate()
            .map(|(l, &n)| fold_table(n, b.is_odd(l)))
            .collect()
    }

    fn mirror_sign(&self) -> f64 {
        self.symmetry.mirror_sign().unwrap_or(1.0)
    }

    /// Full-size parity block `b`, reconstructed when storage is compressed.
    pub fn expand_block(&self, b: BranchId) -> Result<ComplexTensor> {
        let stored = self.stored_block(b)?;
        if self.storage == Storage::Full {
            return stored.try_clone();
        }
        let mut out = ComplexTensor::zeros(&self.levels)?;
        let data = out.data_mut();
        for_each_unfolded(stored, &self.fold_tables(b), self.mirror_sign(), |i, z| {
            data[i] = z
        });
        Ok(out)
    }

    /// `v ∘ T[b]` in place, reading compressed blocks through the mirror map.
    pub fn multiply_into(&self, v: &mut ComplexTensor, b: BranchId) -> Result<()> {
        if v.shape() != self.levels.as_slice() {
            return Err(Error::ShapeMismatch {
                expected: self.levels.clone(),
                found: v.shape().to_vec(),
            });
        }
        let stored = self.stored_block(b)?;
        match self.storage {
            Storage::Full => {
                for (x, t) in v.data_mut().iter_mut().zip(stored.data()) {
                    *x *= t;
                }
            }
            Storage::MirrorCompressed => {
                let data = v.data_mut();
                for_each_unfolded(stored, &self.fold_tables(b), self.mirror_sign(), |i, t| {
                    data[i] *= t
                });
            }
        }
        Ok(())
    }
}

pub fn precompute_spectra(
    e: &EmbeddedGenerator,
    strategy: PrecomputeStrategy,
    provider: &dyn FftProvider,
) -> Result<KernelSpectra> {
    let levels = e.levels().to_vec();
    let d = levels.len();
    let blocks = match strategy {
        PrecomputeStrategy::FullFft => {
            let mut full = e.tensor().try_clone()?;
            fft::fft_all(provider, &mut full)?;
            let mut src = vec![0usize; d];
            BranchId::all(d)
                .map(|b| {
                    ComplexTensor::from_fn(&levels, |k| {
                        for l in 0..d {
                            src[l] = 2 * k[l] + b.is_odd(l) as usize;
                        }
                        full.get(&src)
                    })
                })
                .collect::<Result<Vec<_>>>()?
        }
        PrecomputeStrategy::Branchwise => {
            let mut slots: Vec<Option<ComplexTensor>> = vec![None; 1 << d];
            branchwise(provider, e.tensor(), &levels, 0, BranchId::ROOT, &mut slots)?;
            slots
                .into_iter()
                .map(|b| b.expect("every leaf visited"))
                .collect()
        }
    };
    KernelSpectra::from_parts(levels, e.symmetry(), Storage::Full, e.padding(), blocks)
}

/// Halves the level of size `2n` into `n` by `u_j = t_j ± t_{j+n}`.
fn fold_axis(t: &ComplexTensor, axis: usize, odd: bool) -> Result<ComplexTensor> {
    let (outer, two_n, inner) = t.axis_layout(axis);
    let n = two_n / 2;
    let mut shape = t.shape().to_vec();
    shape[axis] = n;
    let mut out = ComplexTensor::zeros(&shape)?;
    let src = t.data();
    let dst = out.data_mut();
    let sign = if odd { -1.0 } else { 1.0 };
    for o in 0..outer {
        for j in 0..n {
            let lo = (o * two_n + j) * inner;
            let hi = (o * two_n + j + n) * inner;
            let at = (o * n + j) * inner;
            for q in 0..inner {
                dst[at + q] = src[lo + q] + sign * src[hi + q];
            }
        }
    }
    Ok(out)
}

fn branchwise(
    provider: &dyn FftProvider,
    t: &ComplexTensor,
    levels: &[usize],
    level: usize,
    id: BranchId,
    slots: &mut [Option<ComplexTensor>],
) -> Result<()> {
    if level == levels.len() {
        slots[id.index()] = Some(t.try_clone()?);
        return Ok(());
    }
    for odd in [false, true] {
        let mut folded = fold_axis(t, level, odd)?;
        let child = if odd {
            phase_shift_axis(&mut folded, level, false)?;
            id.next(level)?
        } else {
            id
        };
        provider.forward(&mut folded, level)?;
        branchwise(provider, &folded, levels, level + 1, child, slots)?;
    }
    Ok(())
}

/// Keeps only the non-redundant half of each block along every level.
pub fn compress_spectra(k: &KernelSpectra, g: &GeneratorSpec) -> Result<KernelSpectra> {
    if k.storage != Storage::Full {
        return Err(Error::InvalidMode("spectra are already compressed".into()));
    }
    if g.symmetry() == Symmetry::General || g.symmetry() != k.symmetry {
        return Err(Error::InvalidMode(format!(
            "compression needs a symmetric or skew generator matching the kernel (generator: {}, kernel: {})",
            g.symmetry(),
            k.symmetry
        )));
    }
    if g.levels() != k.levels() {
        return Err(Error::ShapeMismatch {
            expected: k.levels.clone(),
            found: g.levels().to_vec(),
        });
    }
    g.check_symmetry()?;
    if g.symmetry() == Symmetry::Skew && k.padding != Complex64::new(0.0, 0.0) {
        return Err(Error::InvalidSymmetry {
            mode: "skew",
            detail: format!("padding value {} breaks odd mirror symmetry", k.padding),
        });
    }
    let blocks = BranchId::all(k.ndim())
        .map(|b| {
            let shape: Vec<usize> = k
                .levels
                .iter()
                .enumerate()
                .map(|(l, &n)| folded_len(n, b.is_odd(l)))
                .collect();
            let full = &k.blocks[b.index()];
            ComplexTensor::from_fn(&shape, |i| full.get(i))
        })
        .collect::<Result<Vec<_>>>()?;
    KernelSpectra::from_parts(
        k.levels.clone(),
        k.symmetry,
        Storage::MirrorCompressed,
        k.padding,
        blocks,
    )
}
