use serde::Serialize;
use splitfft::baseline::naive_matvec_capped;
use splitfft::kernel::GeneratorSpec;
use splitfft::tensor::relative_error;
use splitfft::Error;

use crate::config::BenchConfig;
use crate::engines::{build_embed, build_split};
use crate::error::Result;
use crate::instance::{make_instance, make_vector};

/// Largest relative error accepted between any two methods.
pub const TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyRecord {
    pub levels: Vec<usize>,
    pub symmetry: String,
    pub seed: u64,
    pub status: Status,
    pub err_split_naive: Option<f64>,
    pub err_split_embed: Option<f64>,
    pub err_embed_naive: Option<f64>,
}

impl VerifyRecord {
    pub fn max_error(&self) -> f64 {
        [self.err_split_naive, self.err_split_embed, self.err_embed_naive]
            .into_iter()
            .flatten()
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub tolerance: f64,
    pub records: Vec<VerifyRecord>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.status != Status::Fail)
    }

    pub fn max_error(&self) -> f64 {
        self.records.iter().map(VerifyRecord::max_error).fold(0.0, f64::max)
    }
}

/// Checks one generator and vector against the dense oracle and the embedding baseline.
pub fn verify_instance(
    g: &GeneratorSpec,
    v: &splitfft::ComplexTensor,
    cfg: &BenchConfig,
) -> Result<VerifyRecord> {
    let mut record = VerifyRecord {
        levels: g.levels().to_vec(),
        symmetry: g.symmetry().to_string(),
        seed: cfg.seed,
        status: Status::Skipped,
        err_split_naive: None,
        err_split_embed: None,
        err_embed_naive: None,
    };
    let reference = match naive_matvec_capped(g, v, cfg.oracle_cap) {
        Ok(y) => y,
        Err(Error::OracleCap { size, cap }) => {
            eprintln!(
                "warning: skipping {:?}: size {size} exceeds oracle cap {cap}",
                g.levels()
            );
            return Ok(record);
        }
        Err(e) => return Err(e.into()),
    };
    let compressed = cfg.compressed()?;
    let (y_split, _) = build_split(g, compressed, cfg.policy)?.apply(v)?;
    let (y_embed, _) = build_embed(g, compressed)?.apply(v)?;
    record.err_split_naive = Some(relative_error(&y_split, &reference)?);
    record.err_split_embed = Some(relative_error(&y_split, &y_embed)?);
    record.err_embed_naive = Some(relative_error(&y_embed, &reference)?);
    record.status = if record.max_error() <= TOLERANCE { Status::Pass } else { Status::Fail };
    Ok(record)
}

/// Runs every `(d, n)` case of the config, or the single supplied generator.
pub fn cmd_verify(cfg: &BenchConfig, generator: Option<&GeneratorSpec>) -> Result<VerifyReport> {
    cfg.validate()?;
    let mut records = Vec::new();
    match generator {
        Some(g) => {
            let v = make_vector(g.levels(), cfg.seed, cfg.variance)?;
            records.push(verify_instance(g, &v, cfg)?);
        }
        None => {
            for (d, n) in cfg.cases() {
                let (g, v) = make_instance(&vec![n; d], cfg.seed, cfg.variance, cfg.symmetry)?;
                records.push(verify_instance(&g, &v, cfg)?);
            }
        }
    }
    Ok(VerifyReport {
        tolerance: TOLERANCE,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use splitfft::kernel::Symmetry;

    #[test]
    fn seeded_case_passes() {
        let cfg = BenchConfig { dims: vec![2], sizes: vec![4], seed: 7, ..Default::default() };
        let report = cmd_verify(&cfg, None).unwrap();
        assert!(report.passed());
        assert_eq!(report.records.len(), 1);
        assert!(report.max_error() < 1e-12);
    }

    #[test]
    fn zero_variance_passes_with_zero_error() {
        let cfg = BenchConfig { dims: vec![1, 2], sizes: vec![3], variance: 0.0, ..Default::default() };
        let report = cmd_verify(&cfg, None).unwrap();
        assert!(report.passed());
        assert_eq!(report.max_error(), 0.0);
    }

    #[test]
    fn oracle_cap_skips() {
        let cfg = BenchConfig { dims: vec![2], sizes: vec![3, 9], oracle_cap: 50, ..Default::default() };
        let report = cmd_verify(&cfg, None).unwrap();
        assert_eq!(report.records[0].status, Status::Pass);
        assert_eq!(report.records[1].status, Status::Skipped);
        assert!(report.passed());
    }

    #[test]
    fn symmetric_modes_pass() {
        for symmetry in [Symmetry::Symmetric, Symmetry::Skew] {
            let cfg = BenchConfig { dims: vec![1, 2, 3], sizes: vec![3, 4], symmetry, ..Default::default() };
            assert!(cmd_verify(&cfg, None).unwrap().passed());
        }
    }
}
