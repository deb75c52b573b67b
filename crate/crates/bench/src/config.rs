use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;
use splitfft::kernel::Symmetry;
use splitfft::split::ExecutionPolicy;

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(BenchError::Usage(format!("unknown format `{other}`"))),
        }
    }
}

/// Kernel storage used by the engines under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StorageChoice {
    /// Mirror-compressed for symmetric and skew generators, full otherwise.
    Auto,
    Full,
    Compressed,
}

impl FromStr for StorageChoice {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Self::Auto),
            "full" => Ok(Self::Full),
            "compressed" => Ok(Self::Compressed),
            other => Err(BenchError::Usage(format!("unknown storage `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchConfig {
    pub dims: Vec<usize>,
    pub sizes: Vec<usize>,
    pub seed: u64,
    /// Variance of each real and imaginary part. Zero is accepted and yields all-zero instances.
    pub variance: f64,
    pub repetitions: usize,
    pub policy: ExecutionPolicy,
    pub symmetry: Symmetry,
    pub storage: StorageChoice,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub oracle_cap: usize,
    /// Working-set limit in complex elements for each engine run.
    pub mem_limit: Option<usize>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            dims: vec![1, 2, 3],
            sizes: vec![4, 8],
            seed: 0,
            variance: 1.0,
            repetitions: 1,
            policy: ExecutionPolicy::lazy(),
            symmetry: Symmetry::General,
            storage: StorageChoice::Auto,
            format: OutputFormat::Csv,
            out: None,
            oracle_cap: splitfft::baseline::DEFAULT_ORACLE_CAP,
            mem_limit: None,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.sizes.is_empty() {
            return Err(BenchError::Usage("need at least one dimension and one size".into()));
        }
        if let Some(&d) = self.dims.iter().find(|&&d| d == 0 || d > splitfft::MAX_LEVELS) {
            return Err(BenchError::Usage(format!(
                "dimension {d} outside 1..={}",
                splitfft::MAX_LEVELS
            )));
        }
        if let Some(&n) = self.sizes.iter().find(|&&n| n < 2) {
            return Err(BenchError::Usage(format!("size {n} is below 2")));
        }
        if self.repetitions == 0 {
            return Err(BenchError::Usage("repetitions must be >= 1".into()));
        }
        if !(self.variance >= 0.0 && self.variance.is_finite()) {
            return Err(BenchError::Usage(format!("invalid variance {}", self.variance)));
        }
        Ok(())
    }

    pub fn compressed(&self) -> Result<bool> {
        match (self.storage, self.symmetry) {
            (StorageChoice::Full, _) => Ok(false),
            (StorageChoice::Auto, s) => Ok(s != Symmetry::General),
            (StorageChoice::Compressed, Symmetry::General) => Err(BenchError::Usage(
                "compressed storage needs --symmetry symmetric or skew".into(),
            )),
            (StorageChoice::Compressed, _) => Ok(true),
        }
    }

    /// Every `(d, n)` case in run order.
    pub fn cases(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.dims
            .iter()
            .flat_map(move |&d| self.sizes.iter().map(move |&n| (d, n)))
    }
}

/// Parses a comma-separated size list. Items are `N`, an inclusive range `A..B`,
/// or `p2:A..B` for the powers `2^A..=2^B`.
pub fn parse_sizes(text: &str) -> Result<Vec<usize>> {
    let bad = || BenchError::Usage(format!("cannot parse size list `{text}`"));
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (pow2, body) = match item.strip_prefix("p2:") {
            Some(rest) => (true, rest),
            None => (false, item),
        };
        let (lo, hi) = match body.split_once("..") {
            Some((a, b)) => (a.parse::<usize>().map_err(|_| bad())?, b.parse::<usize>().map_err(|_| bad())?),
            None => {
                let v = body.parse::<usize>().map_err(|_| bad())?;
                (v, v)
            }
        };
        if lo > hi || (pow2 && hi >= usize::BITS as usize) {
            return Err(bad());
        }
        out.extend((lo..=hi).map(|v| if pow2 { 1usize << v } else { v }));
    }
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_lists() {
        assert_eq!(parse_sizes("4,8").unwrap(), vec![4, 8]);
        assert_eq!(parse_sizes("2..5").unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(parse_sizes("p2:1..4, 15").unwrap(), vec![2, 4, 8, 16, 15]);
        assert!(parse_sizes("").is_err());
        assert!(parse_sizes("5..2").is_err());
        assert!(parse_sizes("x").is_err());
    }

    #[test]
    fn validation() {
        assert!(BenchConfig::default().validate().is_ok());
        let bad = [
            BenchConfig { sizes: vec![1], ..Default::default() },
            BenchConfig { dims: vec![0], ..Default::default() },
            BenchConfig { repetitions: 0, ..Default::default() },
            BenchConfig { variance: -1.0, ..Default::default() },
            BenchConfig { variance: f64::NAN, ..Default::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn storage_choice() {
        let mut cfg = BenchConfig::default();
        assert!(!cfg.compressed().unwrap());
        cfg.storage = StorageChoice::Compressed;
        assert!(cfg.compressed().is_err());
        cfg.symmetry = Symmetry::Skew;
        assert!(cfg.compressed().unwrap());
        cfg.storage = StorageChoice::Auto;
        assert!(cfg.compressed().unwrap());
    }

    #[test]
    fn cases_in_order() {
        let cfg = BenchConfig { dims: vec![1, 2], sizes: vec![3, 4], ..Default::default() };
        assert_eq!(cfg.cases().collect::<Vec<_>>(), vec![(1, 3), (1, 4), (2, 3), (2, 4)]);
    }
}
