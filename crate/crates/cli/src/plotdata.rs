//! Pivots a results file into `x,series,y` triples.
//!
//! The experiment kind is taken from the file stem (`rreq_sweep.csv` and so
//! on, as written by the runner). Only rows with status `ok` are plotted, so
//! infeasible points leave gaps in their series.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use crate::error::{CliError, Result};
use crate::experiment::{read_results, ExperimentKind, ResultRow, Status};

#[derive(Debug, Clone, PartialEq)]
pub struct PlotPoint {
    pub x: f64,
    pub series: String,
    pub y: f64,
}

pub fn kind_of(results: &Path) -> Result<ExperimentKind> {
    let stem = results.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
    stem.parse().map_err(|_| CliError::UnknownKind(stem.to_string()))
}

/// Histogram kinds count rows per iteration number; all others plot P_D
/// against the sweep value, one series per scheme label (per estimator for
/// `map_accuracy`).
pub fn pivot(kind: ExperimentKind, rows: &[ResultRow]) -> Vec<PlotPoint> {
    let ok = rows.iter().filter(|r| r.status == Status::Ok);
    match kind {
        ExperimentKind::ConvergenceHistogram => {
            let mut counts: BTreeMap<(usize, &str), usize> = BTreeMap::new();
            for r in ok {
                if let Some(it) = r.iters {
                    *counts.entry((it, r.scheme.as_str())).or_default() += 1;
                }
            }
            counts
                .into_iter()
                .map(|((it, series), n)| PlotPoint { x: it as f64, series: series.to_string(), y: n as f64 })
                .collect()
        }
        _ => ok
            .filter_map(|r| {
                let series = match kind {
                    ExperimentKind::MapAccuracy => r.estimator.to_string(),
                    _ => r.scheme.clone(),
                };
                r.pd.map(|y| PlotPoint { x: r.sweep_value, series, y })
            })
            .collect(),
    }
}

pub fn write_plotdata<W: Write>(out: W, points: &[PlotPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "series", "y"])?;
    for p in points {
        w.write_record([p.x.to_string(), p.series.clone(), p.y.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `results`, pivots it and writes the triples to `out`. Returns the
/// number of points written.
pub fn emit_plotdata(results: &Path, out: &Path) -> Result<usize> {
    let kind = kind_of(results)?;
    let rows = read_results(results)?;
    let points = pivot(kind, &rows);
    write_plotdata(std::fs::File::create(out)?, &points)?;
    Ok(points.len())
}
