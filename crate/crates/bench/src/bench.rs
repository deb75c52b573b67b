use std::io::Write;
use std::time::Instant;

use serde::Serialize;
use splitfft::analysis::{ratios, reconcile, Reconciliation};
use splitfft::split::RunMetrics;
use splitfft::Error;

use crate::config::BenchConfig;
use crate::engines::{build_embed, build_split};
use crate::error::Result;
use crate::instance::make_instance;

pub const CSV_HEADER: [&str; 13] = [
    "run_id", "d", "n", "method", "policy", "symmetry", "seed", "rep", "wall_ns", "fft_fwd",
    "fft_inv", "mults", "peak_elems",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Split,
    Embed,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Split => "split",
            Method::Embed => "embed",
        }
    }
}

/// One timed matvec. `metrics` and `wall_ns` are absent when the run failed.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub run_id: u64,
    pub d: usize,
    pub n: usize,
    pub method: Method,
    pub policy: String,
    pub symmetry: String,
    pub seed: u64,
    pub rep: usize,
    pub wall_ns: Option<u64>,
    pub metrics: Option<RunMetrics>,
    pub error: Option<String>,
}

impl BenchRow {
    pub fn failed(&self) -> bool {
        self.metrics.is_none()
    }

    fn csv_record(&self) -> [String; 13] {
        let opt = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
        let m = self.metrics.as_ref();
        [
            self.run_id.to_string(),
            self.d.to_string(),
            self.n.to_string(),
            self.method.as_str().to_string(),
            self.policy.clone(),
            self.symmetry.clone(),
            self.seed.to_string(),
            self.rep.to_string(),
            match (self.wall_ns, m) {
                (Some(ns), Some(_)) => ns.to_string(),
                _ => "failed".to_string(),
            },
            opt(m.map(|m| m.fft_fwd)),
            opt(m.map(|m| m.fft_inv)),
            opt(m.map(RunMetrics::mults)),
            opt(m.map(|m| m.peak_elems)),
        ]
    }
}

/// Wall-clock statistics over the successful repetitions of one method.
#[derive(Debug, Clone, Serialize)]
pub struct MethodSummary {
    pub precompute_ns: Option<u64>,
    pub kernel_elems: Option<u64>,
    pub peak_elems: Option<u64>,
    pub completed: usize,
    pub failed: usize,
    pub wall_min_ns: Option<f64>,
    pub wall_median_ns: Option<f64>,
    pub wall_mean_ns: Option<f64>,
    /// Unbiased sample variance; zero for a single repetition.
    pub wall_variance_ns2: Option<f64>,
}

impl MethodSummary {
    fn new(precompute_ns: Option<u64>, rows: &[&BenchRow]) -> Self {
        let mut walls: Vec<f64> = rows.iter().filter_map(|r| r.wall_ns).map(|x| x as f64).collect();
        walls.sort_by(f64::total_cmp);
        let last = rows.iter().rev().find_map(|r| r.metrics.as_ref());
        let completed = walls.len();
        let (min, median, mean, variance) = if completed == 0 {
            (None, None, None, None)
        } else {
            let mean = walls.iter().sum::<f64>() / completed as f64;
            let variance = if completed > 1 {
                walls.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (completed - 1) as f64
            } else {
                0.0
            };
            let median = if completed % 2 == 1 {
                walls[completed / 2]
            } else {
                0.5 * (walls[completed / 2 - 1] + walls[completed / 2])
            };
            (Some(walls[0]), Some(median), Some(mean), Some(variance))
        };
        Self {
            precompute_ns,
            kernel_elems: last.map(|m| m.kernel_elems),
            peak_elems: last.map(|m| m.peak_elems),
            completed,
            failed: rows.len() - completed,
            wall_min_ns: min,
            wall_median_ns: median,
            wall_mean_ns: mean,
            wall_variance_ns2: variance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseSummary {
    pub d: usize,
    pub n: usize,
    pub storage: &'static str,
    pub split: MethodSummary,
    pub embed: MethodSummary,
    /// Median embed time over median split time.
    pub wall_ratio: Option<f64>,
    /// Model values and measured counter ratios; absent if either method failed throughout.
    pub reconciliation: Option<Reconciliation>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub rows: Vec<BenchRow>,
    pub summary: Vec<CaseSummary>,
}

fn is_resource(e: &Error) -> bool {
    matches!(e, Error::Resource(_))
}

fn elapsed_ns(t: Instant) -> u64 {
    t.elapsed().as_nanos().min(u64::MAX as u128) as u64
}

/// Kernel elements the engines will hold for a uniform `n^d` case.
fn kernel_estimate(d: usize, n: usize, compressed: bool) -> Option<usize> {
    if compressed {
        (n + 1).checked_pow(d as u32)
    } else {
        n.checked_pow(d as u32)?.checked_mul(1 << d)
    }
}

trait Operator {
    fn run(&self, v: &splitfft::ComplexTensor) -> splitfft::Result<RunMetrics>;
}

impl Operator for splitfft::split::SplitOperator {
    fn run(&self, v: &splitfft::ComplexTensor) -> splitfft::Result<RunMetrics> {
        self.apply(v).map(|(_, m)| m)
    }
}

impl Operator for splitfft::baseline::EmbedOperator {
    fn run(&self, v: &splitfft::ComplexTensor) -> splitfft::Result<RunMetrics> {
        self.apply(v).map(|(_, m)| m)
    }
}

/// Outcome of building one engine: the operator and its precompute time, or the failure text.
type Built = std::result::Result<(Box<dyn Operator>, u64), String>;

fn build(
    cfg: &BenchConfig,
    d: usize,
    n: usize,
    compressed: bool,
    make: impl FnOnce(Option<usize>) -> splitfft::Result<Box<dyn Operator>>,
) -> Result<Built> {
    let working_limit = match (cfg.mem_limit, kernel_estimate(d, n, compressed)) {
        (None, _) => None,
        (Some(limit), Some(kernel)) if kernel <= limit => Some(limit - kernel),
        (Some(limit), _) => return Ok(Err(format!("kernel storage exceeds memory limit {limit}"))),
    };
    let t = Instant::now();
    match make(working_limit) {
        Ok(op) => Ok(Ok((op, elapsed_ns(t)))),
        Err(e) if is_resource(&e) => Ok(Err(e.to_string())),
        Err(e) => Err(e.into()),
    }
}

/// Times split and embed matvecs for every case and repetition.
///
/// Each engine is built once per case (timed as precompute) and applied once untimed
/// before the measured repetitions. Resource failures mark rows failed and the run goes on.
pub fn cmd_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let compressed = cfg.compressed()?;
    let symmetry = cfg.symmetry.to_string();
    let mut rows = Vec::new();
    let mut summary = Vec::new();

    for (d, n) in cfg.cases() {
        let levels = vec![n; d];
        let (g, v) = match make_instance(&levels, cfg.seed, cfg.variance, cfg.symmetry) {
            Ok(inst) => inst,
            Err(crate::error::BenchError::Core(e)) if is_resource(&e) => {
                eprintln!("warning: d={d} n={n}: {e}");
                continue;
            }
            Err(e) => return Err(e),
        };
        let split = build(cfg, d, n, compressed, |limit| {
            let op = build_split(&g, compressed, cfg.policy).map_err(core_error)?;
            Ok(Box::new(match limit {
                Some(l) => op.with_mem_limit(l),
                None => op,
            }) as Box<dyn Operator>)
        })?;
        let embed = build(cfg, d, n, compressed, |limit| {
            let op = build_embed(&g, compressed).map_err(core_error)?;
            Ok(Box::new(match limit {
                Some(l) => op.with_mem_limit(l),
                None => op,
            }) as Box<dyn Operator>)
        })?;
        for (op, _) in [&split, &embed].into_iter().flatten() {
            // untimed warm-up; failures show up again in the measured runs
            let _ = op.run(&v);
        }

        let first = rows.len();
        for rep in 0..cfg.repetitions {
            for (method, built) in [(Method::Split, &split), (Method::Embed, &embed)] {
                let mut row = BenchRow {
                    run_id: rows.len() as u64,
                    d,
                    n,
                    method,
                    policy: match method {
                        Method::Split => cfg.policy.label().to_string(),
                        Method::Embed => "none".to_string(),
                    },
                    symmetry: symmetry.clone(),
                    seed: cfg.seed,
                    rep,
                    wall_ns: None,
                    metrics: None,
                    error: None,
                };
                match built {
                    Ok((op, _)) => {
                        let t = Instant::now();
                        match op.run(&v) {
                            Ok(m) => {
                                row.wall_ns = Some(elapsed_ns(t));
                                row.metrics = Some(m);
                            }
                            Err(e) if is_resource(&e) => row.error = Some(e.to_string()),
                            Err(e) => return Err(e.into()),
                        }
                    }
                    Err(msg) => row.error = Some(msg.clone()),
                }
                if let Some(e) = &row.error {
                    eprintln!("warning: d={d} n={n} {} rep {rep} failed: {e}", method.as_str());
                }
                rows.push(row);
            }
        }

        let case_rows = &rows[first..];
        let pick = |m: Method| case_rows.iter().filter(|r| r.method == m).collect::<Vec<_>>();
        let precompute = |b: &Built| b.as_ref().ok().map(|(_, ns)| *ns);
        let split_summary = MethodSummary::new(precompute(&split), &pick(Method::Split));
        let embed_summary = MethodSummary::new(precompute(&embed), &pick(Method::Embed));
        let last = |m: Method| case_rows.iter().rev().filter(|r| r.method == m).find_map(|r| r.metrics.clone());
        let reconciliation = match (last(Method::Split), last(Method::Embed)) {
            (Some(s), Some(e)) => Some(reconcile(&ratios(n as f64, d as u32)?, &s, &e)?),
            _ => None,
        };
        summary.push(CaseSummary {
            d,
            n,
            storage: if compressed { "compressed" } else { "full" },
            wall_ratio: match (embed_summary.wall_median_ns, split_summary.wall_median_ns) {
                (Some(e), Some(s)) if s > 0.0 => Some(e / s),
                _ => None,
            },
            split: split_summary,
            embed: embed_summary,
            reconciliation,
        });
    }
    Ok(BenchReport {
        config: cfg.clone(),
        rows,
        summary,
    })
}

fn core_error(e: crate::error::BenchError) -> Error {
    match e {
        crate::error::BenchError::Core(e) => e,
        other => Error::InvalidArgument(other.to_string()),
    }
}

pub fn write_csv(rows: &[BenchRow], w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_HEADER)?;
    for row in rows {
        out.write_record(row.csv_record())?;
    }
    out.flush()?;
    Ok(())
}

/// Human-readable per-case summary.
pub fn write_summary_text(summary: &[CaseSummary], mut w: impl Write) -> Result<()> {
    writeln!(
        w,
        "{:>2} {:>6} {:>14} {:>14} {:>8} {:>8} {:>8} {:>9}",
        "d", "n", "split_med_ns", "embed_med_ns", "wall", "peak", "peak+k", "counters"
    )?;
    let num = |x: Option<f64>, p: usize| x.map(|v| format!("{v:.p$}")).unwrap_or_else(|| "-".into());
    for c in summary {
        let r = c.reconciliation.as_ref();
        writeln!(
            w,
            "{:>2} {:>6} {:>14} {:>14} {:>8} {:>8} {:>8} {:>9}",
            c.d,
            c.n,
            num(c.split.wall_median_ns, 0),
            num(c.embed.wall_median_ns, 0),
            num(c.wall_ratio, 3),
            num(r.map(|r| r.working_peak_ratio), 3),
            num(r.map(|r| r.peak_ratio), 3),
            r.map(|r| if r.counters_match { "ok" } else { "MISMATCH" }).unwrap_or("-"),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use splitfft::kernel::Symmetry;

    fn small() -> BenchConfig {
        BenchConfig { dims: vec![1, 2], sizes: vec![4, 5], repetitions: 3, ..Default::default() }
    }

    #[test]
    fn row_cardinality_and_ids() {
        let report = cmd_bench(&small()).unwrap();
        assert_eq!(report.rows.len(), 4 * 3 * 2);
        assert!(report.rows.iter().enumerate().all(|(i, r)| r.run_id == i as u64));
        assert_eq!(report.summary.len(), 4);
        let split_rows = report.rows.iter().filter(|r| r.method == Method::Split).count();
        assert_eq!(split_rows, 12);
    }

    #[test]
    fn split_rows_satisfy_counter_invariants() {
        let report = cmd_bench(&small()).unwrap();
        for row in &report.rows {
            let m = row.metrics.as_ref().unwrap();
            let s = m.size();
            let p = 1u64 << row.d;
            match row.method {
                Method::Split => {
                    assert_eq!((m.fft_fwd, m.fft_inv), (2 * p - 2, 2 * p - 2));
                    assert_eq!(m.mults(), p * s + 2 * (p - 1) * s);
                    assert!(m.peak_elems <= (row.d as u64 + 1) * s);
                }
                Method::Embed => {
                    assert_eq!(row.policy, "none");
                    assert!(m.peak_elems >= p * s);
                }
            }
        }
        assert!(report.summary.iter().all(|c| c.reconciliation.as_ref().unwrap().counters_match));
    }

    #[test]
    fn csv_is_deterministic_apart_from_wall_time() {
        let strip = |rows: &[BenchRow]| {
            let mut buf = Vec::new();
            let mut rows = rows.to_vec();
            rows.iter_mut().for_each(|r| r.wall_ns = Some(0));
            write_csv(&rows, &mut buf).unwrap();
            String::from_utf8(buf).unwrap()
        };
        let a = cmd_bench(&small()).unwrap();
        let b = cmd_bench(&small()).unwrap();
        let text = strip(&a.rows);
        assert_eq!(text, strip(&b.rows));
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
    }

    #[test]
    fn memory_limit_marks_rows_failed() {
        // split needs 2s working + 2s kernel = 16, embed needs 3s + 2s = 20
        let cfg = BenchConfig {
            dims: vec![1],
            sizes: vec![4],
            repetitions: 2,
            mem_limit: Some(18),
            ..Default::default()
        };
        let report = cmd_bench(&cfg).unwrap();
        let failed: Vec<_> = report.rows.iter().map(|r| (r.method, r.failed())).collect();
        assert_eq!(
            failed,
            vec![(Method::Split, false), (Method::Embed, true), (Method::Split, false), (Method::Embed, true)]
        );
        let mut buf = Vec::new();
        write_csv(&report.rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().nth(2).unwrap().ends_with(",failed,,,,"));
        assert!(report.summary[0].reconciliation.is_none());
        assert_eq!(report.summary[0].embed.failed, 2);

        let tiny = BenchConfig { mem_limit: Some(4), ..cfg };
        assert!(cmd_bench(&tiny).unwrap().rows.iter().all(BenchRow::failed));
    }

    #[test]
    fn summary_statistics() {
        let row = |ns| BenchRow {
            run_id: 0,
            d: 1,
            n: 2,
            method: Method::Split,
            policy: "lazy".into(),
            symmetry: "general".into(),
            seed: 0,
            rep: 0,
            wall_ns: Some(ns),
            metrics: Some(RunMetrics {
                levels: vec![2],
                fft_fwd: 2,
                fft_inv: 2,
                kernel_mults: 4,
                phase_mults: 4,
                peak_elems: 4,
                kernel_elems: 4,
            }),
            error: None,
        };
        let rows = [row(10), row(40), row(20), row(30)];
        let s = MethodSummary::new(Some(5), &rows.iter().collect::<Vec<_>>());
        assert_eq!(s.wall_min_ns, Some(10.0));
        assert_eq!(s.wall_median_ns, Some(25.0));
        assert_eq!(s.wall_mean_ns, Some(25.0));
        assert_eq!(s.wall_variance_ns2, Some(500.0 / 3.0));
        assert_eq!(s.completed, 4);
    }

    #[test]
    fn symmetric_bench_uses_compressed_kernels() {
        let cfg = BenchConfig { dims: vec![2], sizes: vec![4], symmetry: Symmetry::Symmetric, ..Default::default() };
        let report = cmd_bench(&cfg).unwrap();
        assert_eq!(report.summary[0].storage, "compressed");
        assert_eq!(report.summary[0].split.kernel_elems, Some(25));
        assert_eq!(report.summary[0].embed.kernel_elems, Some(25));
    }
}
