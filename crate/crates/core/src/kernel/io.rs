//! Binary kernel file format.
//!
//! ```text
//! magic    4 bytes  "BTKS"
//! version  u32 LE   1
//! d        u32 LE
//! n_l      u64 LE   × d
//! symmetry u8       0 general, 1 symmetric, 2 skew
//! storage  u8       0 full, 1 mirror-compressed
//! blocks            2^d blocks in ascending BranchId order; each block row-major,
//!                   each element as little-endian f64 re then im
//! ```
//!
//! Bit `l` of a block's BranchId is the parity along level `l` (level 0 outermost).
//! Compressed blocks keep `n/2 + 1` (even) or `ceil(n/2)` (odd) entries per level.
//! The padding value is not stored; read kernels report zero padding.

use std::io::{Read, Write};

use num_complex::Complex64;

use super::generator::Symmetry;
use super::spectra::{folded_len, BranchId, KernelSpectra, Storage};
use crate::error::{Error, Result};
use crate::tensor::ComplexTensor;
use crate::MAX_LEVELS;

pub const MAGIC: [u8; 4] = *b"BTKS";
pub const VERSION: u32 = 1;

fn io_err(e: std::io::Error) -> Error {
    Error::Format(e.to_string())
}

pub fn write_kernel(mut w: impl Write, k: &KernelSpectra) -> Result<()> {
    w.write_all(&MAGIC).map_err(io_err)?;
    w.write_all(&VERSION.to_le_bytes()).map_err(io_err)?;
    w.write_all(&(k.ndim() as u32).to_le_bytes()).map_err(io_err)?;
    for &n in k.levels() {
        w.write_all(&(n as u64).to_le_bytes()).map_err(io_err)?;
    }
    w.write_all(&[k.symmetry().code(), k.storage().code()])
        .map_err(io_err)?;
    for block in k.blocks() {
        for z in block.data() {
            w.write_all(&z.re.to_le_bytes()).map_err(io_err)?;
            w.write_all(&z.im.to_le_bytes()).map_err(io_err)?;
        }
    }
    Ok(())
}

fn read_array<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf).map_err(io_err)?;
    Ok(buf)
}

pub fn read_kernel(mut r: impl Read) -> Result<KernelSpectra> {
    if read_array::<4>(&mut r)? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(read_array(&mut r)?);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let d = u32::from_le_bytes(read_array(&mut r)?) as usize;
    if d == 0 || d > MAX_LEVELS {
        return Err(Error::Format(format!("unsupported level count {d}")));
    }
    let levels = (0..d)
        .map(|_| {
            let n = u64::from_le_bytes(read_array(&mut r)?);
            usize::try_from(n).map_err(|_| Error::Format(format!("level size {n} too large")))
        })
        .collect::<Result<Vec<_>>>()?;
    let [sym, storage] = read_array::<2>(&mut r)?;
    let symmetry = Symmetry::from_code(sym)?;
    let storage = Storage::from_code(storage)?;

    let blocks = BranchId::all(d)
        .map(|b| {
            let shape: Vec<usize> = levels
                .iter()
                .enumerate()
                .map(|(l, &n)| match storage {
                    Storage::Full => n,
                    Storage::MirrorCompressed => folded_len(n, b.is_odd(l)),
                })
                .collect();
            let mut t = ComplexTensor::zeros(&shape)?;
            for z in t.data_mut() {
                let re = f64::from_le_bytes(read_array(&mut r)?);
                let im = f64::from_le_bytes(read_array(&mut r)?);
                *z = Complex64::new(re, im);
            }
            Ok(t)
        })
        .collect::<Result<Vec<_>>>()?;
    KernelSpectra::from_parts(levels, symmetry, storage, Complex64::new(0.0, 0.0), blocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fft::default_provider;
    use crate::kernel::{
        compress_spectra, embed_generator, precompute_spectra, GeneratorSpec, PrecomputeStrategy,
    };

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn header_bytes_are_exact() {
        let g = GeneratorSpec::new(vec![1], vec![c(1.5, -2.0)], Symmetry::General).unwrap();
        let e = embed_generator(&g, c(0., 0.)).unwrap();
        let k = precompute_spectra(&e, PrecomputeStrategy::FullFft, &*default_provider()).unwrap();
        let mut bytes = Vec::new();
        write_kernel(&mut bytes, &k).unwrap();
        let mut want = Vec::new();
        want.extend_from_slice(b"BTKS");
        want.extend_from_slice(&1u32.to_le_bytes());
        want.extend_from_slice(&1u32.to_le_bytes());
        want.extend_from_slice(&1u64.to_le_bytes());
        want.extend_from_slice(&[0, 0]);
        // block 0 = t_0, block 1 = s_0 = 0 (DFT of [t_0, 0] is [t_0, t_0]) -- both equal t_0
        for _ in 0..2 {
            want.extend_from_slice(&1.5f64.to_le_bytes());
            want.extend_from_slice(&(-2.0f64).to_le_bytes());
        }
        assert_eq!(bytes, want);
    }

    #[test]
    fn round_trip_full_and_compressed() {
        let g = GeneratorSpec::from_fn(&[3, 4], Symmetry::Symmetric, |m| {
            c((m[0] * m[0]) as f64 + 0.5, (m[1].abs() as f64).sqrt())
        })
        .unwrap();
        let e = embed_generator(&g, c(0., 0.)).unwrap();
        let full = precompute_spectra(&e, PrecomputeStrategy::FullFft, &*default_provider()).unwrap();
        let packed = compress_spectra(&full, &g).unwrap();
        for k in [full, packed] {
            let mut bytes = Vec::new();
            write_kernel(&mut bytes, &k).unwrap();
            assert_eq!(bytes.len(), 4 + 4 + 4 + 8 * 2 + 2 + 16 * k.stored_elems());
            let back = read_kernel(bytes.as_slice()).unwrap();
            assert_eq!(back, k);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(read_kernel(&b"NOPE"[..]), Err(Error::Format(_))));
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"BTKS");
        bytes.extend_from_slice(&2u32.to_le_bytes());
        assert!(matches!(read_kernel(bytes.as_slice()), Err(Error::Format(_))));
        // truncated payload
        let g = GeneratorSpec::new(vec![2], vec![c(1., 0.); 3], Symmetry::General).unwrap();
        let e = embed_generator(&g, c(0., 0.)).unwrap();
        let k = precompute_spectra(&e, PrecomputeStrategy::FullFft, &*default_provider()).unwrap();
        let mut bytes = Vec::new();
        write_kernel(&mut bytes, &k).unwrap();
        bytes.truncate(bytes.len() - 3);
        assert!(read_kernel(bytes.as_slice()).is_err());
    }
}
