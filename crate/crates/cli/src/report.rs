//! Front report files written by `psl export-front`.

use std::path::Path;

use anyhow::{Context, Result};
use psl_core::campaign::{write_atomic, FrontReport};
use serde::Serialize;

pub const SAMPLES_FILE: &str = "front_samples.csv";
pub const FRONT_FILE: &str = "predicted_front.csv";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Serialize)]
pub struct ReportSummary<'a> {
    pub problem: &'a str,
    pub samples: usize,
    pub predicted_front_size: usize,
    pub hypervolume: f64,
    pub reference_hypervolume: Option<f64>,
    pub reference: Option<psl_core::campaign::FrontReference>,
    pub relative_hv_difference: Option<f64>,
}

fn csv_bytes(header: Vec<String>, rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    Ok(w.into_inner().context("flushing CSV")?)
}

/// Writes the per-sample table, the non-dominated predicted front and a
/// JSON summary into `dir`.
pub fn write_report(dir: &Path, report: &FrontReport) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let first = report.samples.first().context("empty front report")?;
    let (m, n) = (first.lambda.len(), first.x.len());
    let mut header = Vec::new();
    header.extend((1..=m).map(|i| format!("lambda{i}")));
    header.extend((1..=n).map(|i| format!("x{i}")));
    header.extend((1..=m).map(|i| format!("mean{i}")));
    header.extend((1..=m).map(|i| format!("std{i}")));
    header.push("non_dominated".into());
    let rows = report.samples.iter().map(|s| {
        s.lambda
            .iter()
            .chain(&s.x)
            .chain(&s.mean)
            .chain(&s.std)
            .map(|v| v.to_string())
            .chain(std::iter::once(s.non_dominated.to_string()))
            .collect()
    });
    write_atomic(dir.join(SAMPLES_FILE), &csv_bytes(header, rows)?)?;

    let front_header = (1..=m).map(|i| format!("f{i}")).collect();
    let front_rows = report.predicted_front.iter().map(|p| p.iter().map(|v| v.to_string()).collect());
    write_atomic(dir.join(FRONT_FILE), &csv_bytes(front_header, front_rows)?)?;

    let summary = ReportSummary {
        problem: &report.problem,
        samples: report.samples.len(),
        predicted_front_size: report.predicted_front.len(),
        hypervolume: report.hypervolume,
        reference_hypervolume: report.reference_hypervolume,
        reference: report.reference,
        relative_hv_difference: report.relative_hv_difference,
    };
    write_atomic(dir.join(SUMMARY_FILE), &serde_json::to_vec_pretty(&summary)?)?;
    Ok(())
}
