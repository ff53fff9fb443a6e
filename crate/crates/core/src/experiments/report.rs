//! CSV renderings of experiment results. Numbers use the shortest
//! round-tripping decimal form and lines end in `\n`.

use std::io::{self, Write};

use super::bach::BachReport;
use super::folk::{FolkReport, GridCell, GridReport};
use super::{ExperimentConfig, TraceRow};

pub fn write_bach_report(out: &mut impl Write, report: &BachReport) -> io::Result<()> {
    writeln!(out, "section_index,accuracy")?;
    for (i, a) in report.section_accuracies.iter().enumerate() {
        writeln!(out, "{i},{a}")?;
    }
    writeln!(out, "mean,{}", report.mean)?;
    writeln!(out, "std,{}", report.std)
}

pub const GRID_HEADER: &str = "rep,seg,param,equalize,metric,k,accuracy";

fn param(p: Option<f64>) -> String {
    p.map(|v| v.to_string()).unwrap_or_default()
}

/// One row for a single configured folk run.
pub fn write_folk_report(out: &mut impl Write, config: &ExperimentConfig, report: &FolkReport) -> io::Result<()> {
    writeln!(out, "{GRID_HEADER}")?;
    let param = match config.fixed_length {
        Some(_) if config.representation == super::Representation::Wavelet => config.rep_support_samples.to_string(),
        _ => param(config.segmentation.param()),
    };
    writeln!(
        out,
        "{},{},{},{},{},{},{}",
        config.representation,
        config.segmentation.name(),
        param,
        config.equalization,
        config.metric,
        config.k,
        report.accuracy
    )
}

fn grid_row(out: &mut impl Write, c: &GridCell) -> io::Result<()> {
    let accuracy = match &c.accuracy {
        Ok(a) => a.to_string(),
        Err(e) => format!("error: {}", e.replace([',', '\n'], ";")),
    };
    writeln!(
        out,
        "{},{},{},{},{},{},{}",
        c.representation,
        c.segmentation.name(),
        param(c.segmentation.param()),
        c.equalization,
        c.metric,
        c.k,
        accuracy
    )
}

pub fn write_grid_report(out: &mut impl Write, report: &GridReport) -> io::Result<()> {
    writeln!(out, "{GRID_HEADER}")?;
    report.cells.iter().try_for_each(|c| grid_row(out, c))
}

pub fn write_trace(out: &mut impl Write, rows: &[TraceRow]) -> io::Result<()> {
    writeln!(out, "item_id,true,predicted,nearest_distance")?;
    for r in rows {
        writeln!(out, "{},{},{},{}", r.item_id, r.truth, r.predicted, r.nearest_distance)?;
    }
    Ok(())
}

/// Trace of every grid cell, prefixed with the cell's coordinates.
pub fn write_grid_trace(out: &mut impl Write, report: &GridReport) -> io::Result<()> {
    writeln!(out, "rep,seg,param,equalize,metric,k,item_id,true,predicted,nearest_distance")?;
    for c in &report.cells {
        for r in &c.trace {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                c.representation,
                c.segmentation.name(),
                param(c.segmentation.param()),
                c.equalization,
                c.metric,
                c.k,
                r.item_id,
                r.truth,
                r.predicted,
                r.nearest_distance
            )?;
        }
    }
    Ok(())
}

/// Fraction of trace rows whose prediction matches the truth.
pub fn rescore(rows: &[TraceRow]) -> f64 {
    rows.iter().filter(|r| r.is_correct()).count() as f64 / rows.len() as f64
}
