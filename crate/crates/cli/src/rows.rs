//! The shared result schema: one row per (config, q, seed) trial, emitted
//! as CSV (header + RFC-4180 quoting via the csv crate) or as a JSON array
//! with identical keys.

use std::io::Write;

use ffincidence::theorems::BoundReport;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct ResultRow {
    pub run_id: String,
    pub q: u32,
    pub d1: usize,
    pub d2: usize,
    pub theorem_id: String,
    pub seed: u64,
    pub lhs: u64,
    pub main_term: f64,
    pub bound_term: f64,
    pub discrepancy: f64,
    pub ratio: f64,
    pub hypothesis_ok: bool,
    pub elapsed_ms: u64,
}

impl ResultRow {
    pub fn from_report(
        run_id: &str,
        q: u32,
        d1: usize,
        d2: usize,
        seed: u64,
        report: &BoundReport,
        elapsed_ms: u64,
    ) -> ResultRow {
        ResultRow {
            run_id: run_id.to_string(),
            q,
            d1,
            d2,
            theorem_id: report.theorem_id.clone(),
            seed,
            lhs: report.lhs,
            main_term: report.main_term,
            bound_term: report.bound_term,
            discrepancy: report.discrepancy,
            ratio: report.ratio,
            hypothesis_ok: report.hypothesis_ok,
            elapsed_ms,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Option<OutputFormat> {
        match s {
            "csv" => Some(OutputFormat::Csv),
            "json" => Some(OutputFormat::Json),
            _ => None,
        }
    }
}

pub fn write_rows<W: Write>(
    out: W,
    format: OutputFormat,
    rows: &[ResultRow],
) -> Result<(), Box<dyn std::error::Error>> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out)?;
        }
    }
    Ok(())
}
