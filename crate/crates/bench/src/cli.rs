use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use splitfft::kernel::{GeneratorSpec, Symmetry};
use splitfft::split::ExecutionPolicy;

use crate::bench::{cmd_bench, write_csv, write_summary_text};
use crate::config::{parse_sizes, BenchConfig, OutputFormat, StorageChoice};
use crate::error::{BenchError, Result, EXIT_OK, EXIT_VERIFY_FAILED};
use crate::predict::{cmd_predict, table1, write_reports, write_table1};
use crate::verify::{cmd_verify, Status};

#[derive(Debug, Parser)]
#[command(name = "splitfft", version, about = "Split-FFT block-Toeplitz matvec: verify, bench, predict")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compare split, embed and dense results on seeded random instances.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Generator JSON file to verify instead of random instances.
        #[arg(long)]
        generator: Option<PathBuf>,
    },
    /// Time split and embed matvecs and emit one row per run.
    Bench {
        #[command(flatten)]
        common: CommonArgs,
        /// Working plus kernel storage limit per engine, in complex elements.
        #[arg(long)]
        mem_limit: Option<usize>,
    },
    /// Model complexity and memory ratios.
    Predict {
        /// `table1` prints the asymptotic ratios for d = 2..6.
        preset: Option<Preset>,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        dims: Vec<usize>,
        #[arg(long, default_value = "4,8,16")]
        sizes: String,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Preset {
    Table1,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PolicyArg {
    Lazy,
    Parallel,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SymmetryArg {
    General,
    Symmetric,
    Skew,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StorageArg {
    Auto,
    Full,
    Compressed,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Numbers of Toeplitz levels, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    pub dims: Vec<usize>,
    /// Level sizes: `N`, `A..B` (inclusive) or `p2:A..B` (powers of two), comma separated.
    #[arg(long, default_value = "4,8")]
    pub sizes: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Variance of the real and imaginary parts of every coefficient.
    #[arg(long, default_value_t = 1.0)]
    pub variance: f64,
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    #[arg(long, value_enum, default_value = "lazy")]
    pub policy: PolicyArg,
    /// Task budget for the parallel policy; defaults to the available cores.
    #[arg(long)]
    pub tasks: Option<usize>,
    #[arg(long, value_enum, default_value = "general")]
    pub symmetry: SymmetryArg,
    #[arg(long, value_enum, default_value = "auto")]
    pub storage: StorageArg,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Largest operator size checked against the dense oracle.
    #[arg(long, default_value_t = splitfft::baseline::DEFAULT_ORACLE_CAP)]
    pub oracle_cap: usize,
}

impl CommonArgs {
    pub fn to_config(&self) -> Result<BenchConfig> {
        let policy = match self.policy {
            PolicyArg::Lazy => ExecutionPolicy::lazy(),
            PolicyArg::Parallel => {
                let tasks = self
                    .tasks
                    .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
                ExecutionPolicy::parallel(tasks).map_err(|e| BenchError::Usage(e.to_string()))?
            }
        };
        let cfg = BenchConfig {
            dims: self.dims.clone(),
            sizes: parse_sizes(&self.sizes)?,
            seed: self.seed,
            variance: self.variance,
            repetitions: self.reps,
            policy,
            symmetry: match self.symmetry {
                SymmetryArg::General => Symmetry::General,
                SymmetryArg::Symmetric => Symmetry::Symmetric,
                SymmetryArg::Skew => Symmetry::Skew,
            },
            storage: match self.storage {
                StorageArg::Auto => StorageChoice::Auto,
                StorageArg::Full => StorageChoice::Full,
                StorageArg::Compressed => StorageChoice::Compressed,
            },
            format: self.format.into(),
            out: self.out.clone(),
            oracle_cap: self.oracle_cap,
            mem_limit: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

/// `results.csv` -> `results.summary.json`.
pub fn summary_path(out: &Path) -> PathBuf {
    out.with_extension("summary.json")
}

fn run_verify(common: &CommonArgs, generator: Option<&Path>) -> Result<u8> {
    let cfg = common.to_config()?;
    let g = match generator {
        Some(path) => Some(GeneratorSpec::from_json(&std::fs::read_to_string(path)?)?),
        None => None,
    };
    let report = cmd_verify(&cfg, g.as_ref())?;
    let mut w = open_output(cfg.out.as_deref())?;
    match cfg.format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut w, &report)?;
            writeln!(w)?;
        }
        OutputFormat::Csv => {
            let mut out = csv::Writer::from_writer(&mut w);
            out.write_record(["levels", "symmetry", "seed", "status", "err_split_naive", "err_split_embed", "err_embed_naive"])?;
            for r in &report.records {
                let levels = r.levels.iter().map(usize::to_string).collect::<Vec<_>>().join("x");
                let err = |e: Option<f64>| e.map(|x| format!("{x:.3e}")).unwrap_or_default();
                let status = serde_json::to_value(r.status)?.as_str().unwrap_or_default().to_string();
                out.write_record([
                    levels,
                    r.symmetry.clone(),
                    r.seed.to_string(),
                    status,
                    err(r.err_split_naive),
                    err(r.err_split_embed),
                    err(r.err_embed_naive),
                ])?;
            }
            out.flush()?;
        }
    }
    w.flush()?;
    let skipped = report.records.iter().filter(|r| r.status == Status::Skipped).count();
    eprintln!(
        "{}: {} instances, {skipped} skipped, max relative error {:.3e} (tolerance {:.0e})",
        if report.passed() { "PASS" } else { "FAIL" },
        report.records.len(),
        report.max_error(),
        report.tolerance,
    );
    Ok(if report.passed() { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

fn run_bench(common: &CommonArgs, mem_limit: Option<usize>) -> Result<u8> {
    let cfg = BenchConfig {
        mem_limit,
        ..common.to_config()?
    };
    let report = cmd_bench(&cfg)?;
    let mut w = open_output(cfg.out.as_deref())?;
    match cfg.format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut w, &report)?;
            writeln!(w)?;
        }
        OutputFormat::Csv => {
            write_csv(&report.rows, &mut w)?;
            if let Some(out) = &cfg.out {
                let file = BufWriter::new(File::create(summary_path(out))?);
                serde_json::to_writer_pretty(file, &report.summary)?;
            }
        }
    }
    w.flush()?;
    write_summary_text(&report.summary, io::stderr().lock())?;
    Ok(EXIT_OK)
}

fn run_predict(
    preset: Option<Preset>,
    dims: &[usize],
    sizes: &str,
    format: OutputFormat,
    out: Option<&Path>,
) -> Result<u8> {
    let mut w = open_output(out)?;
    match preset {
        Some(Preset::Table1) => write_table1(&table1(), format, &mut w)?,
        None => write_reports(&cmd_predict(dims, &parse_sizes(sizes)?)?, format, &mut w)?,
    }
    w.flush()?;
    Ok(EXIT_OK)
}

pub fn run(cli: Cli) -> Result<u8> {
    match &cli.command {
        Command::Verify { common, generator } => run_verify(common, generator.as_deref()),
        Command::Bench { common, mem_limit } => run_bench(common, *mem_limit),
        Command::Predict {
            preset,
            dims,
            sizes,
            format,
            out,
        } => run_predict(*preset, dims, sizes, (*format).into(), out.as_deref()),
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn parses_flags() {
        let cli = Cli::try_parse_from([
            "splitfft", "bench", "--dims", "2,3", "--sizes", "p2:2..3", "--policy", "parallel", "--tasks", "4",
            "--symmetry", "skew", "--reps", "2", "--mem-limit", "1000",
        ])
        .unwrap();
        let Command::Bench { common, mem_limit } = cli.command else { panic!() };
        let cfg = common.to_config().unwrap();
        assert_eq!(cfg.dims, vec![2, 3]);
        assert_eq!(cfg.sizes, vec![4, 8]);
        assert_eq!(cfg.policy, ExecutionPolicy::parallel(4).unwrap());
        assert_eq!(cfg.symmetry, Symmetry::Skew);
        assert_eq!(mem_limit, Some(1000));
    }

    #[test]
    fn rejects_bad_values() {
        assert!(Cli::try_parse_from(["splitfft", "bench", "--policy", "eager"]).is_err());
        assert!(Cli::try_parse_from(["splitfft", "frobnicate"]).is_err());
        let cli = Cli::try_parse_from(["splitfft", "verify", "--sizes", "1"]).unwrap();
        let Command::Verify { common, .. } = cli.command else { panic!() };
        assert!(matches!(common.to_config(), Err(BenchError::Usage(_))));
    }

    #[test]
    fn summary_sits_next_to_output() {
        assert_eq!(summary_path(Path::new("out/r.csv")), PathBuf::from("out/r.summary.json"));
    }
}
