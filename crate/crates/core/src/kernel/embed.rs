use num_complex::Complex64;

use super::generator::{GeneratorSpec, Symmetry};
use crate::error::Result;
use crate::tensor::ComplexTensor;

/// First column of the multilevel circulant embedding of a [`GeneratorSpec`].
///
/// Along every level the layout is `[t_0, t_1, …, t_{n-1}, s_0, t_{-(n-1)}, …, t_{-1}]`;
/// every entry with some coordinate equal to `n_l` holds the padding value `s_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedGenerator {
    levels: Vec<usize>,
    tensor: ComplexTensor,
    padding: Complex64,
    symmetry: Symmetry,
}

impl EmbeddedGenerator {
    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn tensor(&self) -> &ComplexTensor {
        &self.tensor
    }

    pub fn padding(&self) -> Complex64 {
        self.padding
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }
}

pub fn embed_generator(g: &GeneratorSpec, s0: Complex64) -> Result<EmbeddedGenerator> {
    let levels = g.levels().to_vec();
    let shape: Vec<usize> = levels.iter().map(|&n| 2 * n).collect();
    let mut m = vec![0isize; levels.len()];
    let tensor = ComplexTensor::from_fn(&shape, |idx| {
        for (l, (&i, &n)) in idx.iter().zip(&levels).enumerate() {
            if i == n {
                return s0;
            }
            m[l] = if i < n {
                i as isize
            } else {
                i as isize - 2 * n as isize
            };
        }
        g.lag(&m)
    })?;
    Ok(EmbeddedGenerator {
        levels,
        tensor,
        padding: s0,
        symmetry: g.symmetry(),
    })
}
