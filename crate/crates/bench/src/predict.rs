use std::io::Write;

use serde::Serialize;
use splitfft::analysis::{r_c_asymptote, r_m, r_m_sym, ratios, round2, ComplexityReport};

use crate::config::OutputFormat;
use crate::error::Result;

/// Dimensions covered by the asymptotic table preset.
pub const TABLE1_DIMS: std::ops::RangeInclusive<u32> = 2..=6;

pub fn cmd_predict(dims: &[usize], sizes: &[usize]) -> Result<Vec<ComplexityReport>> {
    let mut out = Vec::new();
    for &d in dims {
        for &n in sizes {
            out.push(ratios(n as f64, d as u32)?);
        }
    }
    Ok(out)
}

pub fn write_reports(reports: &[ComplexityReport], format: OutputFormat, mut w: impl Write) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut out = csv::Writer::from_writer(w);
            for r in reports {
                out.serialize(r)?;
            }
            out.flush()?;
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut w, reports)?;
            writeln!(w)?;
        }
    }
    Ok(())
}

/// Asymptotic ratios per dimension, rounded to two decimals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table1 {
    pub d: Vec<u32>,
    pub r_c: Vec<f64>,
    pub r_m: Vec<f64>,
    pub r_m_sym: Vec<f64>,
}

pub fn table1() -> Table1 {
    let d: Vec<u32> = TABLE1_DIMS.collect();
    let row = |f: fn(u32) -> f64| d.iter().map(|&d| round2(f(d))).collect();
    Table1 {
        r_c: row(r_c_asymptote),
        r_m: row(r_m),
        r_m_sym: row(r_m_sym),
        d,
    }
}

pub fn write_table1(t: &Table1, format: OutputFormat, mut w: impl Write) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut out = csv::Writer::from_writer(w);
            let header = std::iter::once("d".to_string()).chain(t.d.iter().map(u32::to_string));
            out.write_record(header)?;
            for (name, values) in [("R_c", &t.r_c), ("R_m", &t.r_m), ("R_m,sym", &t.r_m_sym)] {
                let cells = std::iter::once(name.to_string()).chain(values.iter().map(|v| format!("{v:.2}")));
                out.write_record(cells)?;
            }
            out.flush()?;
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut w, t)?;
            writeln!(w)?;
        }
    }
    Ok(())
}
