//! Closed-form operation-count and peak-memory models for the two methods, and
//! their reconciliation against instrumented runs.
//!
//! With `s = n^d` and an FFT cost of `m₂·log₂(m₁)`:
//!
//! ```text
//! C_embed = 2^{d+1} s log₂(2^d s) + 2^d s
//! C_split = 2(2^d − 1) s (2 log₂ n + 1) + 2^d s
//! R_c     = C_embed / C_split            → d / (2 − 2^{1−d})   as n → ∞
//! R_m     = 2^{d+1} s / ((d+1) s + 2^d s) = 2 / ((d+1) 2^{−d} + 1)
//! R_m,sym = (2^d + 1) / (d + 2)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::split::RunMetrics;

fn check_domain(n: f64, d: u32, min_n: f64) -> Result<()> {
    if n.is_nan() || n < min_n || !n.is_finite() || d == 0 {
        return Err(Error::InvalidArgument(format!(
            "model needs n >= {min_n} and d >= 1 (got n = {n}, d = {d})"
        )));
    }
    Ok(())
}

pub fn complexity_embed(n: f64, d: u32) -> Result<f64> {
    check_domain(n, d, 1.0)?;
    let s = n.powi(d as i32);
    let big = 2f64.powi(d as i32) * s;
    Ok(2.0 * big * big.log2() + big)
}

pub fn complexity_split(n: f64, d: u32) -> Result<f64> {
    check_domain(n, d, 1.0)?;
    let s = n.powi(d as i32);
    let p = 2f64.powi(d as i32);
    Ok(2.0 * (p - 1.0) * s * (2.0 * n.log2() + 1.0) + p * s)
}

pub fn r_c_asymptote(d: u32) -> f64 {
    d as f64 / (2.0 - 2f64.powi(1 - d as i32))
}

pub fn r_m(d: u32) -> f64 {
    2.0 / ((d as f64 + 1.0) * 2f64.powi(-(d as i32)) + 1.0)
}

pub fn r_m_sym(d: u32) -> f64 {
    (2f64.powi(d as i32) + 1.0) / (d as f64 + 2.0)
}

/// `(d log₂(2n) + 1) / ((1 − 2^{−d})(2 log₂ n + 1) + 1)`: the commonly quoted
/// simplified ratio. It shares the asymptote of `C_embed / C_split` but is not
/// equal to it at finite `n`; kept for comparison.
pub fn r_c_simplified(n: f64, d: u32) -> f64 {
    let d_f = d as f64;
    (d_f * (2.0 * n).log2() + 1.0)
        / ((1.0 - 2f64.powi(-(d as i32))) * (2.0 * n.log2() + 1.0) + 1.0)
}

/// Rounds to two decimals, halves away from zero.
pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub d: u32,
    pub n: f64,
    /// Set when `n` is the geometric mean of unequal level sizes.
    pub n_is_geometric_mean: bool,
    pub c_embed: f64,
    pub c_split: f64,
    pub r_c: f64,
    pub r_c_simplified: f64,
    pub r_c_asymptote: f64,
    pub r_m: f64,
    pub r_m_sym: f64,
}

/// `C_embed / s` and `C_split / s`, finite for any representable `n`.
fn costs_per_element(n: f64, d: u32) -> (f64, f64) {
    let p = 2f64.powi(d as i32);
    let embed = p * (2.0 * d as f64 * (2.0 * n).log2() + 1.0);
    let split = 2.0 * (p - 1.0) * (2.0 * n.log2() + 1.0) + p;
    (embed, split)
}

pub fn ratios(n: f64, d: u32) -> Result<ComplexityReport> {
    check_domain(n, d, 2.0)?;
    let c_embed = complexity_embed(n, d)?;
    let c_split = complexity_split(n, d)?;
    let (embed_per_s, split_per_s) = costs_per_element(n, d);
    Ok(ComplexityReport {
        d,
        n,
        n_is_geometric_mean: false,
        c_embed,
        c_split,
        r_c: embed_per_s / split_per_s,
        r_c_simplified: r_c_simplified(n, d),
        r_c_asymptote: r_c_asymptote(d),
        r_m: r_m(d),
        r_m_sym: r_m_sym(d),
    })
}

/// Model report for a possibly non-uniform shape, using the geometric-mean level size.
pub fn ratios_for_shape(levels: &[usize]) -> Result<ComplexityReport> {
    if levels.is_empty() {
        return Err(Error::InvalidArgument("empty shape".into()));
    }
    let d = levels.len() as u32;
    let log_mean = levels.iter().map(|&n| (n as f64).ln()).sum::<f64>() / levels.len() as f64;
    let uniform = levels.iter().all(|&n| n == levels[0]);
    let n = if uniform { levels[0] as f64 } else { log_mean.exp() };
    let mut report = ratios(n, d)?;
    report.n_is_geometric_mean = !uniform;
    Ok(report)
}

/// Model values next to measured counters of a split and an embed run on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reconciliation {
    pub levels: Vec<usize>,
    pub model: ComplexityReport,
    /// Expected split counts: `2^{d+1} − 2` transforms each way, `2^d s` kernel
    /// multiplies and `2(2^d − 1) s` phase multiplies.
    pub expected_fft_calls: u64,
    pub expected_kernel_mults: u64,
    pub expected_phase_mults: u64,
    pub counters_match: bool,
    /// Embed over split, elementwise multiplies.
    pub mult_ratio: f64,
    /// Embed over split, single-axis transform calls.
    pub fft_call_ratio: f64,
    /// Embed over split, working vectors plus kernel storage.
    pub peak_ratio: f64,
    /// Embed over split, working vectors only.
    pub working_peak_ratio: f64,
}

pub fn reconcile(
    model: &ComplexityReport,
    split: &RunMetrics,
    embed: &RunMetrics,
) -> Result<Reconciliation> {
    if split.levels != embed.levels {
        return Err(Error::InvalidArgument(format!(
            "runs on different instances: {:?} vs {:?}",
            split.levels, embed.levels
        )));
    }
    if model.d as usize != split.levels.len() {
        return Err(Error::InvalidArgument(format!(
            "model for d = {} does not match a {}-level run",
            model.d,
            split.levels.len()
        )));
    }
    let s = split.size();
    let p = 1u64 << split.levels.len();
    let expected_fft_calls = 2 * p - 2;
    let expected_kernel_mults = p * s;
    let expected_phase_mults = 2 * (p - 1) * s;
    let counters_match = split.fft_fwd == expected_fft_calls
        && split.fft_inv == expected_fft_calls
        && split.kernel_mults == expected_kernel_mults
        && split.phase_mults == expected_phase_mults;
    let ratio = |a: u64, b: u64| a as f64 / b as f64;
    Ok(Reconciliation {
        levels: split.levels.clone(),
        model: model.clone(),
        expected_fft_calls,
        expected_kernel_mults,
        expected_phase_mults,
        counters_match,
        mult_ratio: ratio(embed.mults(), split.mults()),
        fft_call_ratio: ratio(embed.fft_fwd + embed.fft_inv, split.fft_fwd + split.fft_inv),
        peak_ratio: ratio(embed.total_peak(), split.total_peak()),
        working_peak_ratio: ratio(embed.peak_elems, split.peak_elems),
    })
}

/// One row of the asymptotic table: `(d, R_c∞, R_m, R_m,sym)` for `d = 2..=6`.
pub fn table1() -> Vec<(u32, f64, f64, f64)> {
    (2..=6)
        .map(|d| (d, r_c_asymptote(d), r_m(d), r_m_sym(d)))
        .collect()
}
