//! One allocation for the configured scenario.

use std::fs::File;
use std::path::Path;

use coexist_core::metrics::{detection_probability, detection_threshold, ergodic_rate_approx, ergodic_rate_mc, min_radar_sinr};
use coexist_core::scenario::linear_to_db;
use coexist_core::{allocate, Config, PowerAllocation, SolveReport, Topology};
use serde::Serialize;

use crate::error::Result;
use crate::experiment::{allocate_options, CsiSources, Estimator};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub estimator: Estimator,
    pub r_req: f64,
    /// Smallest radar SINR predicted from the estimated CSI.
    pub gamma: f64,
    /// Ground-truth metrics of the returned allocation.
    pub min_sinr_db: f64,
    pub pd: f64,
    pub rate_ap: f64,
    pub rate_mc: f64,
    pub iters: usize,
    pub converged: bool,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub alloc: PowerAllocation,
    pub report: SolveReport,
    pub summary: Summary,
}

pub fn solve(cfg: &Config, estimator: Estimator, seed: u64) -> Result<SolveOutput> {
    let sources = CsiSources::new(cfg, &[estimator])?;
    let s = &cfg.scenario;
    let csi = sources.csi(estimator, &s.topology, &cfg.antenna)?;
    let truth = sources.csi(Estimator::Truth, &s.topology, &cfg.antenna)?;
    let (alloc, report) = allocate(s, &csi, &allocate_options(cfg))?;
    let limits = &s.limits;
    let sinr = min_radar_sinr(&alloc, &truth, limits.noise_power);
    let mu = detection_threshold(limits.false_alarm_prob, limits.pulses_per_cpi);
    let summary = Summary {
        estimator,
        r_req: limits.r_req,
        gamma: report.min_sinr,
        min_sinr_db: linear_to_db(sinr),
        pd: detection_probability(sinr, mu, limits.pulses_per_cpi),
        rate_ap: ergodic_rate_approx(&alloc, &truth, s.n_c(), limits.noise_power)?,
        rate_mc: ergodic_rate_mc(&alloc, &truth, s.n_c(), limits.noise_power, cfg.run.mc_samples, seed).mean,
        iters: report.iterations,
        converged: report.converged,
        seed,
    };
    Ok(SolveOutput { alloc, report, summary })
}

/// Writes `allocation.csv`, `trace.csv` and `summary.csv` into `dir`.
pub fn write_solve(dir: &Path, out: &SolveOutput) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("allocation.csv"))?;
    w.write_record(["node", "power_w"])?;
    for (j, p) in out.alloc.p_c.iter().enumerate() {
        w.write_record([Topology::bs_id(j), p.to_string()])?;
    }
    for (i, p) in out.alloc.p_r.iter().enumerate() {
        w.write_record([Topology::radar_id(i), p.to_string()])?;
    }
    w.flush()?;

    out.report.write_csv(File::create(dir.join("trace.csv"))?)?;

    let mut w = csv::Writer::from_path(dir.join("summary.csv"))?;
    w.serialize(&out.summary)?;
    w.flush()?;
    Ok(())
}
