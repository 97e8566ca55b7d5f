//! Radio-map estimators of large-scale path loss: a gridded map built from
//! measurement samples and a per-transmitter log-distance curve fit.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::channel::{PathLossSource, PropagationField};
use crate::error::{Error, Result};
use crate::scenario::Position;

/// Inverse-distance weighting exponent.
const IDW_POWER: i32 = 2;
/// IDW neighbourhood radius, in cells.
const IDW_RADIUS_CELLS: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsiSample {
    pub tx_id: String,
    #[serde(rename = "x_m")]
    pub x: f64,
    #[serde(rename = "y_m")]
    pub y: f64,
    pub pathloss_db: f64,
}

impl CsiSample {
    pub fn rx(&self) -> Position {
        Position::new(self.x, self.y)
    }
}

/// Path-loss measurements tagged with their transmitter.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CsiDataset {
    pub samples: Vec<CsiSample>,
}

impl CsiDataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn by_tx(&self) -> BTreeMap<&str, Vec<&CsiSample>> {
        let mut out: BTreeMap<&str, Vec<&CsiSample>> = BTreeMap::new();
        for s in &self.samples {
            out.entry(s.tx_id.as_str()).or_default().push(s);
        }
        out
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for s in &self.samples {
            w.serialize(s)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Reads a `tx_id,x_m,y_m,pathloss_db` CSV file.
pub fn ingest_dataset(path: impl AsRef<Path>) -> Result<CsiDataset> {
    read_dataset(std::fs::File::open(path)?)
}

pub fn read_dataset<R: Read>(input: R) -> Result<CsiDataset> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = rdr.headers()?.clone();
    let expected = ["tx_id", "x_m", "y_m", "pathloss_db"];
    if header.len() == 0 {
        return Err(Error::Dataset("empty file".into()));
    }
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::Dataset(format!("expected header `{}`, found `{}`", expected.join(","), header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut samples = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::DatasetRow { line, reason: e.to_string() }
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let sample: CsiSample =
            rec.deserialize(Some(&header)).map_err(|e| Error::DatasetRow { line, reason: e.to_string() })?;
        if !(sample.x.is_finite() && sample.y.is_finite() && sample.pathloss_db.is_finite()) {
            return Err(Error::DatasetRow { line, reason: "non-finite value".into() });
        }
        samples.push(sample);
    }
    if samples.is_empty() {
        return Err(Error::Dataset("no samples".into()));
    }
    Ok(CsiDataset { samples })
}

/// Samples the ground-truth field for each transmitter on a regular grid
/// over `bounds = [x_min, y_min, x_max, y_max]`. Points coinciding with a
/// transmitter are skipped.
pub fn sample_field(
    field: &PropagationField,
    transmitters: &[(String, Position)],
    bounds: [f64; 4],
    spacing: f64,
) -> Result<CsiDataset> {
    let nx = ((bounds[2] - bounds[0]) / spacing).round() as usize + 1;
    let ny = ((bounds[3] - bounds[1]) / spacing).round() as usize + 1;
    let mut samples = Vec::with_capacity(transmitters.len() * nx * ny);
    for (id, tx) in transmitters {
        for r in 0..ny {
            for c in 0..nx {
                let rx = Position::new(bounds[0] + c as f64 * spacing, bounds[1] + r as f64 * spacing);
                if rx.distance(tx) < 1e-9 {
                    continue;
                }
                samples.push(CsiSample { tx_id: id.clone(), x: rx.x, y: rx.y, pathloss_db: field.pathloss_db(tx, &rx)? });
            }
        }
    }
    Ok(CsiDataset { samples })
}

/// One transmitter's gridded path loss. Node (row, col) sits at
/// `origin + (col · cell, row · cell)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridLayer {
    pub origin: Position,
    pub cell_m: f64,
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

impl GridLayer {
    pub fn node(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn node_position(&self, row: usize, col: usize) -> Position {
        Position::new(self.origin.x + col as f64 * self.cell_m, self.origin.y + row as f64 * self.cell_m)
    }

    /// Bilinear interpolation; `None` outside the grid.
    pub fn interpolate(&self, p: &Position) -> Option<f64> {
        let fx = (p.x - self.origin.x) / self.cell_m;
        let fy = (p.y - self.origin.y) / self.cell_m;
        let eps = 1e-9;
        let (max_c, max_r) = ((self.cols - 1) as f64, (self.rows - 1) as f64);
        if !(fx >= -eps && fy >= -eps && fx <= max_c + eps && fy <= max_r + eps) {
            return None;
        }
        let fx = fx.clamp(0.0, max_c);
        let fy = fy.clamp(0.0, max_r);
        let c0 = (fx.floor() as usize).min(self.cols.saturating_sub(2));
        let r0 = (fy.floor() as usize).min(self.rows.saturating_sub(2));
        let c1 = (c0 + 1).min(self.cols - 1);
        let r1 = (r0 + 1).min(self.rows - 1);
        let (u, v) = (fx - c0 as f64, fy - r0 as f64);
        Some(
            self.node(r0, c0) * (1.0 - u) * (1.0 - v)
                + self.node(r0, c1) * u * (1.0 - v)
                + self.node(r1, c0) * (1.0 - u) * v
                + self.node(r1, c1) * u * v,
        )
    }

    /// `row,col,pathloss_db` CSV.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["row", "col", "pathloss_db"])?;
        for r in 0..self.rows {
            for c in 0..self.cols {
                w.write_record([r.to_string(), c.to_string(), self.node(r, c).to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Gridded radio map, one layer per transmitter.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    pub layers: BTreeMap<String, GridLayer>,
}

impl GridMap {
    pub fn layer(&self, tx_id: &str) -> Result<&GridLayer> {
        self.layers.get(tx_id).ok_or_else(|| Error::UnknownTransmitter(tx_id.into()))
    }

    pub fn query(&self, tx_id: &str, rx: &Position) -> Result<f64> {
        self.layer(tx_id)?
            .interpolate(rx)
            .ok_or_else(|| Error::OutOfBounds { tx_id: tx_id.into(), x: rx.x, y: rx.y })
    }
}

impl PathLossSource for GridMap {
    fn pathloss_db(&self, tx_id: &str, _tx: &Position, rx: &Position) -> Result<f64> {
        self.query(tx_id, rx)
    }
}

/// Builds one layer per transmitter over the bounding box of its samples.
///
/// A node takes the mean of samples lying on it; otherwise the inverse-square
/// distance weighted mean of samples within three cells; otherwise the
/// nearest sample.
pub fn build_grid_map(data: &CsiDataset, cell_m: f64) -> Result<GridMap> {
    if !(cell_m > 0.0) {
        return Err(Error::InvalidArgument(format!("cell size must be positive, got {cell_m}")));
    }
    if data.is_empty() {
        return Err(Error::Dataset("no samples".into()));
    }
    let mut layers = BTreeMap::new();
    for (tx, samples) in data.by_tx() {
        layers.insert(tx.to_string(), build_layer(&samples, cell_m));
    }
    Ok(GridMap { layers })
}

fn build_layer(samples: &[&CsiSample], cell: f64) -> GridLayer {
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for s in samples {
        x0 = x0.min(s.x);
        y0 = y0.min(s.y);
        x1 = x1.max(s.x);
        y1 = y1.max(s.y);
    }
    let cols = ((x1 - x0) / cell - 1e-9).ceil().max(0.0) as usize + 1;
    let rows = ((y1 - y0) / cell - 1e-9).ceil().max(0.0) as usize + 1;
    let origin = Position::new(x0, y0);

    // Bucket samples by nearest node.
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); rows * cols];
    for (k, s) in samples.iter().enumerate() {
        let c = (((s.x - x0) / cell).round() as usize).min(cols - 1);
        let r = (((s.y - y0) / cell).round() as usize).min(rows - 1);
        buckets[r * cols + c].push(k);
    }
    let reach = IDW_RADIUS_CELLS as isize;
    let radius = IDW_RADIUS_CELLS * cell;
    let on_node = 1e-9 * cell;

    let mut values = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            let node = Position::new(x0 + c as f64 * cell, y0 + r as f64 * cell);
            let (mut exact_sum, mut exact_n) = (0.0, 0usize);
            let (mut wsum, mut vsum) = (0.0, 0.0);
            for dr in -reach..=reach {
                for dc in -reach..=reach {
                    let (rr, cc) = (r as isize + dr, c as isize + dc);
                    if rr < 0 || cc < 0 || rr >= rows as isize || cc >= cols as isize {
                        continue;
                    }
                    for &k in &buckets[rr as usize * cols + cc as usize] {
                        let s = samples[k];
                        let d = node.distance(&s.rx());
                        if d <= on_node {
                            exact_sum += s.pathloss_db;
                            exact_n += 1;
                        } else if d <= radius {
                            let w = d.powi(-IDW_POWER);
                            wsum += w;
                            vsum += w * s.pathloss_db;
                        }
                    }
                }
            }
            values[r * cols + c] = if exact_n > 0 {
                exact_sum / exact_n as f64
            } else if wsum > 0.0 {
                vsum / wsum
            } else {
                nearest(samples, &node)
            };
        }
    }
    GridLayer { origin, cell_m: cell, rows, cols, values }
}

fn nearest(samples: &[&CsiSample], p: &Position) -> f64 {
    let mut best = (f64::INFINITY, 0.0);
    for s in samples {
        let d = p.distance(&s.rx());
        if d < best.0 {
            best = (d, s.pathloss_db);
        }
    }
    best.1
}

/// L(d) = α log10(d) + 20 log10(f_c) + β, with f_c in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveFitModel {
    pub alpha: f64,
    pub beta: f64,
    pub carrier_ghz: f64,
}

impl CurveFitModel {
    pub fn eval(&self, d: f64) -> f64 {
        self.alpha * d.log10() + 20.0 * (self.carrier_ghz * 1e9).log10() + self.beta
    }
}

/// Curve-fit radio map: one model per transmitter.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveFitMap {
    pub models: BTreeMap<String, (Position, CurveFitModel)>,
}

impl CurveFitMap {
    pub fn query(&self, tx_id: &str, rx: &Position) -> Result<f64> {
        let (tx, m) = self.models.get(tx_id).ok_or_else(|| Error::UnknownTransmitter(tx_id.into()))?;
        let d = tx.distance(rx);
        if !(d > 0.0) {
            return Err(Error::Geometry(format!("query at the position of `{tx_id}`")));
        }
        Ok(m.eval(d))
    }
}

impl PathLossSource for CurveFitMap {
    fn pathloss_db(&self, tx_id: &str, _tx: &Position, rx: &Position) -> Result<f64> {
        self.query(tx_id, rx)
    }
}

/// Least-squares fit of (α, β) on samples at known distances.
pub fn fit_curve(distances_and_losses: &[(f64, f64)], carrier_ghz: f64) -> Result<CurveFitModel> {
    let fc_term = 20.0 * (carrier_ghz * 1e9).log10();
    let mut ata = Matrix2::zeros();
    let mut atb = Vector2::zeros();
    for &(d, l) in distances_and_losses {
        let row = Vector2::new(d.log10(), 1.0);
        ata += row * row.transpose();
        atb += row * (l - fc_term);
    }
    let n = distances_and_losses.len() as f64;
    // Centered variance of log10 d detects a single distinct distance.
    let mean = ata[(0, 1)] / n.max(1.0);
    let var = ata[(0, 0)] / n.max(1.0) - mean * mean;
    if distances_and_losses.len() < 2 || !(var > 1e-12) {
        return Err(Error::RankDeficient("samples span fewer than two distinct distances".into()));
    }
    let sol = ata
        .lu()
        .solve(&atb)
        .ok_or_else(|| Error::RankDeficient("normal equations are singular".into()))?;
    Ok(CurveFitModel { alpha: sol[0], beta: sol[1], carrier_ghz })
}

/// Fits one model per transmitter; positions come from `transmitters`.
pub fn fit_curve_model(
    data: &CsiDataset,
    transmitters: &[(String, Position)],
    carrier_ghz: f64,
) -> Result<CurveFitMap> {
    let mut models = BTreeMap::new();
    for (tx, samples) in data.by_tx() {
        let pos = transmitters
            .iter()
            .find(|(id, _)| id == tx)
            .map(|(_, p)| *p)
            .ok_or_else(|| Error::UnknownTransmitter(tx.into()))?;
        let pts: Vec<(f64, f64)> = samples
            .iter()
            .map(|s| (pos.distance(&s.rx()), s.pathloss_db))
            .filter(|(d, _)| *d > 0.0)
            .collect();
        let model = fit_curve(&pts, carrier_ghz)?;
        if !(model.alpha > 0.0) {
            return Err(Error::RankDeficient(format!("fitted slope for `{tx}` is not positive ({})", model.alpha)));
        }
        models.insert(tx.to_string(), (pos, model));
    }
    Ok(CurveFitMap { models })
}

/// Mean absolute deviation between `map` and the ground truth over `probes`
/// for transmitter `tx`.
pub fn map_error(
    map: &dyn PathLossSource,
    field: &PropagationField,
    tx: (&str, &Position),
    probes: &[Position],
) -> Result<f64> {
    if probes.is_empty() {
        return Err(Error::InvalidArgument("no probe points".into()));
    }
    let mut total = 0.0;
    for p in probes {
        total += (map.pathloss_db(tx.0, tx.1, p)? - field.pathloss_db(tx.1, p)?).abs();
    }
    Ok(total / probes.len() as f64)
}
