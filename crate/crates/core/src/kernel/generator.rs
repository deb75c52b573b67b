use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{self, ComplexTensor};

/// Level-wise symmetry of the Toeplitz coefficients.
///
/// `Symmetric` means `t` is even in every level index separately (mirror-symmetric
/// about the zero lag of each level); `Skew` means odd in every level index
/// separately, which forces every coefficient with a zero lag component to vanish.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    #[default]
    General,
    Symmetric,
    Skew,
}

impl Symmetry {
    pub fn as_str(self) -> &'static str {
        match self {
            Symmetry::General => "general",
            Symmetry::Symmetric => "symmetric",
            Symmetry::Skew => "skew",
        }
    }

    /// `+1` for symmetric, `-1` for skew; `None` for general.
    pub fn mirror_sign(self) -> Option<f64> {
        match self {
            Symmetry::General => None,
            Symmetry::Symmetric => Some(1.0),
            Symmetry::Skew => Some(-1.0),
        }
    }

    pub(crate) fn code(self) -> u8 {
        self as u8
    }

    pub(crate) fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(Symmetry::General),
            1 => Ok(Symmetry::Symmetric),
            2 => Ok(Symmetry::Skew),
            other => Err(Error::Format(format!("unknown symmetry code {other}"))),
        }
    }
}

impl fmt::Display for Symmetry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Symmetry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(Symmetry::General),
            "symmetric" => Ok(Symmetry::Symmetric),
            "skew" => Ok(Symmetry::Skew),
            other => Err(Error::InvalidMode(format!("unknown symmetry '{other}'"))),
        }
    }
}

/// Coefficients `t_m`, `m_l ∈ [-(n_l-1), n_l-1]`, of a d-level Toeplitz operator.
///
/// Lags are stored as a tensor of shape `(2n_1-1) × … × (2n_d-1)`; lag `m_l` sits at
/// position `m_l + n_l - 1` along level `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    levels: Vec<usize>,
    lags: ComplexTensor,
    symmetry: Symmetry,
}

/// Relative tolerance for the construction-time symmetry check.
const SYMMETRY_TOL: f64 = 1e-12;

pub(crate) fn lag_shape(levels: &[usize]) -> Vec<usize> {
    levels.iter().map(|&n| 2 * n - 1).collect()
}

impl GeneratorSpec {
    pub fn new(levels: Vec<usize>, lags: Vec<Complex64>, symmetry: Symmetry) -> Result<Self> {
        tensor::validate_shape(&levels)?;
        let lags = ComplexTensor::new(lag_shape(&levels), lags)?;
        let spec = Self {
            levels,
            lags,
            symmetry,
        };
        spec.check_symmetry()?;
        Ok(spec)
    }

    /// Builds a generator from a function of the signed multi-lag.
    pub fn from_fn(
        levels: &[usize],
        symmetry: Symmetry,
        mut f: impl FnMut(&[isize]) -> Complex64,
    ) -> Result<Self> {
        tensor::validate_shape(levels)?;
        let mut m = vec![0isize; levels.len()];
        let lags = ComplexTensor::from_fn(&lag_shape(levels), |i| {
            for (l, (&i, &n)) in i.iter().zip(levels).enumerate() {
                m[l] = i as isize - (n as isize - 1);
            }
            f(&m)
        })?;
        let spec = Self {
            levels: levels.to_vec(),
            lags,
            symmetry,
        };
        spec.check_symmetry()?;
        Ok(spec)
    }

    /// The identity operator: `t_0 = 1`, every other lag zero.
    pub fn identity(levels: &[usize]) -> Result<Self> {
        Self::from_fn(levels, Symmetry::Symmetric, |m| {
            if m.iter().all(|&x| x == 0) {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn ndim(&self) -> usize {
        self.levels.len()
    }

    /// Total vector length `s = ∏ n_l`.
    pub fn size(&self) -> usize {
        self.levels.iter().product()
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn lags(&self) -> &ComplexTensor {
        &self.lags
    }

    /// Coefficient at signed multi-lag `m`. Panics if a component is out of range.
    pub fn lag(&self, m: &[isize]) -> Complex64 {
        let shape = self.lags.shape();
        let off = m.iter().zip(&self.levels).zip(shape).fold(
            0usize,
            |acc, ((&m, &n), &len)| {
                let i = m + n as isize - 1;
                assert!(
                    (0..len as isize).contains(&i),
                    "lag {m} out of range for level of size {n}"
                );
                acc * len + i as usize
            },
        );
        self.lags.data()[off]
    }

    /// Verifies the declared symmetry level by level.
    pub fn check_symmetry(&self) -> Result<()> {
        let Some(sign) = self.symmetry.mirror_sign() else {
            return Ok(());
        };
        let scale = self
            .lags
            .data()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        let tol = SYMMETRY_TOL * scale;
        let shape = self.lags.shape().to_vec();
        for axis in 0..shape.len() {
            let (outer, len, inner) = tensor::axis_layout(&shape, axis);
            for o in 0..outer {
                for i in 0..len {
                    let mirrored = len - 1 - i;
                    for q in 0..inner {
                        let a = self.lags.data()[(o * len + i) * inner + q];
                        let b = self.lags.data()[(o * len + mirrored) * inner + q];
                        if (a - sign * b).norm() > tol {
                            let lag = i as isize - (self.levels[axis] as isize - 1);
                            return Err(Error::InvalidSymmetry {
                                mode: self.symmetry.as_str(),
                                detail: format!(
                                    "level {axis}: t at lag {lag} = {a}, mirrored = {b}"
                                ),
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let file = GeneratorFile {
            levels: self.levels.clone(),
            lags: self.lags.data().iter().map(|z| [z.re, z.im]).collect(),
            symmetry: self.symmetry,
        };
        serde_json::to_string_pretty(&file).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GeneratorFile =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        let lags = file
            .lags
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        Self::new(file.levels, lags, file.symmetry)
    }
}

/// JSON fixture layout: lags in row-major order as `[re, im]` pairs.
#[derive(Debug, Serialize, Deserialize)]
struct GeneratorFile {
    levels: Vec<usize>,
    lags: Vec<[f64; 2]>,
    symmetry: Symmetry,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn lag_lookup() {
        // t_{-1} = 2, t_0 = 1, t_{+1} = 3
        let g = GeneratorSpec::new(
            vec![2],
            vec![c(2., 0.), c(1., 0.), c(3., 0.)],
            Symmetry::General,
        )
        .unwrap();
        assert_eq!(g.lag(&[-1]), c(2., 0.));
        assert_eq!(g.lag(&[0]), c(1., 0.));
        assert_eq!(g.lag(&[1]), c(3., 0.));
        assert_eq!(g.size(), 2);
    }

    #[test]
    fn symmetric_validation() {
        let ok = GeneratorSpec::new(
            vec![2],
            vec![c(3., 1.), c(1., 0.), c(3., 1.)],
            Symmetry::Symmetric,
        );
        assert!(ok.is_ok());
        let bad = GeneratorSpec::new(
            vec![2],
            vec![c(2., 0.), c(1., 0.), c(3., 0.)],
            Symmetry::Symmetric,
        );
        assert!(matches!(bad, Err(Error::InvalidSymmetry { .. })));
    }

    #[test]
    fn skew_forces_zero_centre() {
        let bad = GeneratorSpec::new(
            vec![2],
            vec![c(-3., 0.), c(1., 0.), c(3., 0.)],
            Symmetry::Skew,
        );
        assert!(matches!(bad, Err(Error::InvalidSymmetry { mode: "skew", .. })));
        let ok = GeneratorSpec::new(
            vec![2],
            vec![c(-3., 0.), c(0., 0.), c(3., 0.)],
            Symmetry::Skew,
        );
        assert!(ok.is_ok());
    }

    #[test]
    fn symmetry_is_checked_per_level() {
        // even in m_0 but odd in m_1: neither mode holds
        let mixed = GeneratorSpec::from_fn(&[3, 3], Symmetry::Symmetric, |m| {
            c((m[0] * m[0]) as f64 * m[1] as f64, 0.)
        });
        assert!(mixed.is_err());
        let even = GeneratorSpec::from_fn(&[3, 2], Symmetry::Symmetric, |m| {
            c((m[0] * m[0] + 2 * m[1].abs()) as f64, 1.0)
        });
        assert!(even.is_ok());
        let odd = GeneratorSpec::from_fn(&[3, 2], Symmetry::Skew, |m| {
            c((m[0] * m[1]) as f64, 0.5 * (m[0] * m[1]) as f64)
        });
        assert!(odd.is_ok());
    }

    #[test]
    fn json_round_trip() {
        let g = GeneratorSpec::from_fn(&[2, 3], Symmetry::General, |m| {
            c(m[0] as f64 + 0.25, m[1] as f64 * -0.5)
        })
        .unwrap();
        let text = g.to_json().unwrap();
        assert!(text.contains("\"symmetry\": \"general\""));
        assert_eq!(GeneratorSpec::from_json(&text).unwrap(), g);
    }

    #[test]
    fn json_fixture_format() {
        let text = r#"{"levels":[2],"lags":[[1,0],[5,0],[1,0]],"symmetry":"symmetric"}"#;
        let g = GeneratorSpec::from_json(text).unwrap();
        assert_eq!(g.lag(&[0]), c(5., 0.));
        let wrong_len = r#"{"levels":[2],"lags":[[1,0]],"symmetry":"general"}"#;
        assert!(matches!(
            GeneratorSpec::from_json(wrong_len),
            Err(Error::DataLength { .. })
        ));
        let asym = r#"{"levels":[2],"lags":[[1,0],[5,0],[2,0]],"symmetry":"symmetric"}"#;
        assert!(GeneratorSpec::from_json(asym).is_err());
    }
}
