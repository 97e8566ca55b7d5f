//! Sweep drivers. Every experiment kind expands into sweep points; each
//! point runs the selected schemes on estimated CSI and scores the resulting
//! allocations on the ground truth.

use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use coexist_core::baselines::{unilateral_c, unilateral_r};
use coexist_core::metrics::{
    detection_probability, detection_threshold, ergodic_rate_approx, ergodic_rate_mc, min_radar_sinr,
};
use coexist_core::radiomap::{map_error, sample_field};
use coexist_core::scenario::linear_to_db;
use coexist_core::waveform::mismatch_sinr_sweep;
use coexist_core::{
    algorithm2, allocate, build_csi_from, build_grid_map, fit_curve_model, AllocateOptions, AntennaPattern,
    BackoffScheme, BaselineOptions, Config, CurveFitMap, GridMap, LargeScaleCsi, MismatchError, PathLossSource,
    Position, PowerAllocation, Scenario, Topology,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Placements closer than this to any transmitter are redrawn.
pub const PLACEMENT_CLEARANCE_M: f64 = 50.0;

/// Results file columns, in order.
pub const RESULT_COLUMNS: [&str; 11] =
    ["sweep_value", "scheme", "estimator", "gamma", "min_sinr_db", "pd", "rate_ap", "rate_mc", "status", "iters", "seed"];

macro_rules! named_enum {
    ($(#[$meta:meta])* $name:ident, $what:literal { $($(#[$vmeta:meta])* $variant:ident => $label:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum $name {
            $($(#[$vmeta])* #[serde(rename = $label)] $variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(&self) -> &'static str {
                match self {
                    $($name::$variant => $label),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = CliError;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($label => Ok($name::$variant),)+
                    _ => Err(CliError::UnknownName { what: $what, value: s.to_string() }),
                }
            }
        }
    };
}

named_enum!(
    /// Where the allocator's large-scale CSI comes from.
    Estimator, "estimator" {
        Truth => "truth",
        Grid => "grid",
        CurveFit => "curvefit",
    }
);

named_enum!(
    /// Allocation schemes compared in the sweeps.
    Scheme, "scheme" {
        Proposed => "proposed",
        Algorithm2Equal => "algorithm2_equal",
        Algorithm2Priority => "algorithm2_priority",
        UnilateralC => "unilateral_c",
        UnilateralR => "unilateral_r",
    }
);

named_enum!(
    ExperimentKind, "experiment kind" {
        ConvergenceHistogram => "convergence_histogram",
        RreqSweep => "rreq_sweep",
        BudgetSweep => "budget_sweep",
        BeamwidthSweep => "beamwidth_sweep",
        MismatchSweep => "mismatch_sweep",
        MapAccuracy => "map_accuracy",
    }
);

named_enum!(
    Status, "status" {
        Ok => "ok",
        /// The rate requirement exceeds what the scheme can reach.
        Infeasible => "infeasible",
        /// A backoff heuristic stopped without meeting the rate.
        RateUnmet => "rate_unmet",
        Failed => "failed",
    }
);

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    /// Ascending sweep values; placement indices for the histogram.
    pub values: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub estimators: Vec<Estimator>,
    pub output: PathBuf,
    pub seed: u64,
}

impl ExperimentSpec {
    /// The standard design of `kind`, with sweep grids taken from `cfg.sweep`
    /// and the results written to `<out_dir>/<kind>.csv`.
    pub fn from_config(kind: ExperimentKind, cfg: &Config, estimator: Estimator, out_dir: &Path) -> Self {
        let sweep = &cfg.sweep;
        let (values, schemes, estimators) = match kind {
            ExperimentKind::ConvergenceHistogram => {
                ((0..sweep.placements).map(|k| k as f64).collect(), vec![Scheme::Proposed], vec![estimator])
            }
            ExperimentKind::RreqSweep => (sweep.r_req.clone(), Scheme::ALL.to_vec(), vec![estimator]),
            ExperimentKind::BudgetSweep => (sweep.r_req.clone(), vec![Scheme::Proposed], vec![estimator]),
            ExperimentKind::BeamwidthSweep => (sweep.theta_3db_deg.clone(), Scheme::ALL.to_vec(), vec![estimator]),
            ExperimentKind::MismatchSweep => (sweep.r_req.clone(), vec![Scheme::Proposed], vec![estimator]),
            ExperimentKind::MapAccuracy => (sweep.r_req.clone(), vec![Scheme::Proposed], Estimator::ALL.to_vec()),
        };
        Self {
            kind,
            values,
            schemes,
            estimators,
            output: out_dir.join(format!("{kind}.csv")),
            seed: cfg.run.seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(CliError::InvalidSpec("sweep values are empty".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(CliError::InvalidSpec("sweep values must be finite".into()));
        }
        if self.values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::InvalidSpec("sweep values must be strictly ascending".into()));
        }
        if self.schemes.is_empty() || self.estimators.is_empty() {
            return Err(CliError::InvalidSpec("at least one scheme and one estimator are required".into()));
        }
        Ok(())
    }
}

/// One results row. `gamma` is what the allocator believed from its CSI;
/// every other metric is evaluated on the ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub sweep_value: f64,
    pub scheme: String,
    pub estimator: Estimator,
    pub gamma: Option<f64>,
    pub min_sinr_db: Option<f64>,
    pub pd: Option<f64>,
    pub rate_ap: Option<f64>,
    pub rate_mc: Option<f64>,
    pub status: Status,
    pub iters: Option<usize>,
    pub seed: u64,
}

/// Ground truth plus the radio maps, built once per run from a regular
/// sampling of the field over the map bounds.
pub struct CsiSources<'a> {
    cfg: &'a Config,
    grid: Option<GridMap>,
    fit: Option<CurveFitMap>,
}

impl<'a> CsiSources<'a> {
    pub fn new(cfg: &'a Config, estimators: &[Estimator]) -> Result<Self> {
        let needs_map = estimators.iter().any(|e| *e != Estimator::Truth);
        if !needs_map {
            return Ok(Self { cfg, grid: None, fit: None });
        }
        let txs = cfg.topology().transmitters();
        let data = sample_field(&cfg.field, &txs, cfg.map.bounds, cfg.map.sample_spacing_m)?;
        let grid = estimators.contains(&Estimator::Grid).then(|| build_grid_map(&data, cfg.map.cell_m)).transpose()?;
        let fit = estimators
            .contains(&Estimator::CurveFit)
            .then(|| fit_curve_model(&data, &txs, cfg.field.carrier_hz / 1e9))
            .transpose()?;
        Ok(Self { cfg, grid, fit })
    }

    pub fn source(&self, estimator: Estimator) -> &dyn PathLossSource {
        match estimator {
            Estimator::Truth => &self.cfg.field,
            Estimator::Grid => self.grid.as_ref().expect("grid map built for this run"),
            Estimator::CurveFit => self.fit.as_ref().expect("curve fit built for this run"),
        }
    }

    pub fn csi(&self, estimator: Estimator, topo: &Topology, pattern: &AntennaPattern) -> Result<LargeScaleCsi> {
        Ok(build_csi_from(self.source(estimator), &self.cfg.field, topo, pattern)?)
    }
}

/// What a scheme produced on the estimated CSI.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub alloc: PowerAllocation,
    pub gamma: f64,
    pub iters: usize,
    pub rate_met: bool,
}

pub fn allocate_options(cfg: &Config) -> AllocateOptions {
    AllocateOptions {
        epsilon: cfg.run.epsilon,
        max_iter: cfg.run.max_iter,
        coupling: cfg.run.coupling,
        ..AllocateOptions::default()
    }
}

pub fn run_scheme(
    scheme: Scheme,
    cfg: &Config,
    scenario: &Scenario,
    csi: &LargeScaleCsi,
) -> coexist_core::Result<Outcome> {
    let opts = allocate_options(cfg);
    let sca = |(alloc, report): (PowerAllocation, coexist_core::SolveReport)| Outcome {
        alloc,
        gamma: report.min_sinr,
        iters: report.iterations,
        rate_met: true,
    };
    let backoff = |scheme: BackoffScheme| -> coexist_core::Result<Outcome> {
        let opts = BaselineOptions { step_w: cfg.sweep.baseline_step_w, ..BaselineOptions::new(scheme) };
        let out = algorithm2(scenario, csi, &opts)?;
        Ok(Outcome {
            gamma: min_radar_sinr(&out.alloc, csi, scenario.limits.noise_power),
            alloc: out.alloc,
            iters: out.steps,
            rate_met: out.rate_met,
        })
    };
    match scheme {
        Scheme::Proposed => allocate(scenario, csi, &opts).map(sca),
        Scheme::UnilateralC => unilateral_c(scenario, csi, &opts).map(sca),
        Scheme::UnilateralR => unilateral_r(scenario, csi, &opts).map(sca),
        Scheme::Algorithm2Equal => backoff(BackoffScheme::EqualBackoff),
        Scheme::Algorithm2Priority => backoff(BackoffScheme::ChannelPriority),
    }
}

/// Shared context for turning outcomes into rows.
struct Scorer<'a> {
    cfg: &'a Config,
    seed: u64,
    sweep_value: f64,
    /// Stream for the Monte Carlo rate of this point's rows.
    mc_seed: u64,
}

impl Scorer<'_> {
    fn row(
        &self,
        scheme: String,
        estimator: Estimator,
        scenario: &Scenario,
        truth: &LargeScaleCsi,
        outcome: &coexist_core::Result<Outcome>,
        truth_sinr: &dyn Fn(&PowerAllocation) -> f64,
    ) -> ResultRow {
        let mut row = ResultRow {
            sweep_value: self.sweep_value,
            scheme,
            estimator,
            gamma: None,
            min_sinr_db: None,
            pd: None,
            rate_ap: None,
            rate_mc: None,
            status: Status::Failed,
            iters: None,
            seed: self.seed,
        };
        let out = match outcome {
            Ok(out) => out,
            Err(coexist_core::Error::InfeasibleRate { .. }) => {
                row.status = Status::Infeasible;
                return row;
            }
            Err(_) => return row,
        };
        let limits = &scenario.limits;
        let (n_c, noise) = (scenario.n_c(), limits.noise_power);
        let sinr = truth_sinr(&out.alloc);
        let mu = detection_threshold(limits.false_alarm_prob, limits.pulses_per_cpi);
        row.gamma = Some(out.gamma);
        row.min_sinr_db = Some(linear_to_db(sinr));
        row.pd = Some(detection_probability(sinr, mu, limits.pulses_per_cpi));
        row.rate_ap = ergodic_rate_approx(&out.alloc, truth, n_c, noise).ok();
        row.rate_mc = Some(ergodic_rate_mc(&out.alloc, truth, n_c, noise, self.cfg.run.mc_samples, self.mc_seed).mean);
        row.iters = Some(out.iters);
        row.status = if out.rate_met { Status::Ok } else { Status::RateUnmet };
        row
    }
}

/// User and target drawn uniformly over `bounds`, redrawn while closer than
/// [`PLACEMENT_CLEARANCE_M`] to any transmitter.
pub fn random_placement<R: Rng>(rng: &mut R, topo: &Topology, bounds: [f64; 4]) -> Topology {
    let mut draw = || loop {
        let p = Position::new(rng.random_range(bounds[0]..bounds[2]), rng.random_range(bounds[1]..bounds[3]));
        if topo.bs_positions.iter().chain(&topo.radar_positions).all(|t| t.distance(&p) >= PLACEMENT_CLEARANCE_M) {
            return p;
        }
    };
    let user_position = draw();
    let target_position = draw();
    Topology { user_position, target_position, ..topo.clone() }
}

fn point_rows(spec: &ExperimentSpec, cfg: &Config, sources: &CsiSources, idx: usize) -> Result<Vec<ResultRow>> {
    let value = spec.values[idx];
    let scorer = Scorer {
        cfg,
        seed: spec.seed,
        sweep_value: value,
        mc_seed: spec.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ idx as u64,
    };
    let base = &cfg.scenario;
    let noise = base.limits.noise_power;
    let mut rows = Vec::new();

    // Schemes on (scenario, topology, pattern) scored with the ideal SINR.
    let mut plain = |scenario: &Scenario, pattern: &AntennaPattern, label: &dyn Fn(Scheme) -> String| -> Result<()> {
        let truth = sources.csi(Estimator::Truth, &scenario.topology, pattern)?;
        let truth_sinr = |a: &PowerAllocation| min_radar_sinr(a, &truth, noise);
        for &est in &spec.estimators {
            let csi = sources.csi(est, &scenario.topology, pattern)?;
            for &scheme in &spec.schemes {
                let out = run_scheme(scheme, cfg, scenario, &csi);
                rows.push(scorer.row(label(scheme), est, scenario, &truth, &out, &truth_sinr));
            }
        }
        Ok(())
    };
    let by_name = |s: Scheme| s.to_string();

    match spec.kind {
        ExperimentKind::ConvergenceHistogram => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(idx as u64);
            let topology = random_placement(&mut rng, &base.topology, cfg.map.bounds);
            let scenario = Scenario { topology, ..base.with_r_req(cfg.sweep.fixed_r_req) };
            plain(&scenario, &cfg.antenna, &by_name)?;
        }
        ExperimentKind::RreqSweep | ExperimentKind::MapAccuracy => {
            plain(&base.with_r_req(value), &cfg.antenna, &by_name)?;
        }
        ExperimentKind::BudgetSweep => {
            for &p_csum in &cfg.sweep.p_csum_w {
                let mut scenario = base.with_r_req(value);
                scenario.limits.p_csum = p_csum;
                plain(&scenario, &cfg.antenna, &|s| format!("{s}_pcsum_{p_csum}"))?;
            }
        }
        ExperimentKind::BeamwidthSweep => {
            let pattern = AntennaPattern { theta_3db_deg: value, ..cfg.antenna.clone() };
            plain(&base.with_r_req(cfg.sweep.fixed_r_req), &pattern, &by_name)?;
        }
        ExperimentKind::MismatchSweep => {
            let scenario = base.with_r_req(value);
            let truth = sources.csi(Estimator::Truth, &scenario.topology, &cfg.antenna)?;
            let tau = cfg.waveform.pulse_duration;
            for &est in &spec.estimators {
                let csi = sources.csi(est, &scenario.topology, &cfg.antenna)?;
                for &scheme in &spec.schemes {
                    let out = run_scheme(scheme, cfg, &scenario, &csi);
                    for &frac in &cfg.sweep.delay_error_frac {
                        for &fd in &cfg.sweep.doppler_hz {
                            let err = [MismatchError::new(frac * tau, fd)];
                            let truth_sinr = |a: &PowerAllocation| {
                                mismatch_sinr_sweep(&scenario, &truth, a, &cfg.waveform, &err)
                                    .iter()
                                    .map(|r| r.sinr)
                                    .fold(f64::INFINITY, f64::min)
                            };
                            let label = format!("{scheme}:dtau={frac}:fd={fd}");
                            rows.push(scorer.row(label, est, &scenario, &truth, &out, &truth_sinr));
                        }
                    }
                }
            }
        }
    }
    Ok(rows)
}

/// Runs every sweep point on the current rayon pool; rows come back in sweep
/// order whatever the completion order.
pub fn collect_rows(spec: &ExperimentSpec, cfg: &Config) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let sources = CsiSources::new(cfg, &spec.estimators)?;
    let per_point: Vec<Vec<ResultRow>> =
        (0..spec.values.len()).into_par_iter().map(|idx| point_rows(spec, cfg, &sources, idx)).collect::<Result<_>>()?;
    Ok(per_point.into_iter().flatten().collect())
}

/// Executes `spec` on a pool of `jobs` workers (all cores when `None`) and
/// writes the results file, plus the per-transmitter map errors for
/// `map_accuracy`. Returns the results path.
pub fn run(spec: &ExperimentSpec, cfg: &Config, jobs: Option<usize>) -> Result<PathBuf> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::InvalidSpec(format!("worker pool: {e}")))?;
    let rows = pool.install(|| collect_rows(spec, cfg))?;
    if let Some(dir) = spec.output.parent() {
        std::fs::create_dir_all(dir)?;
    }
    write_results(File::create(&spec.output)?, &rows)?;
    if spec.kind == ExperimentKind::MapAccuracy {
        let path = spec.output.with_file_name("map_accuracy_errors.csv");
        let errors = pool.install(|| map_errors(cfg, spec.seed))?;
        write_map_errors(File::create(path)?, &errors)?;
    }
    Ok(spec.output.clone())
}

pub fn write_results<W: Write>(out: W, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(RESULT_COLUMNS)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// Mean absolute path-loss error of one estimator for one transmitter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapErrorRow {
    pub tx_id: String,
    pub estimator: Estimator,
    pub mae_db: f64,
}

/// Errors of both radio maps over `cfg.map.probes` uniform probe points,
/// each at least [`PLACEMENT_CLEARANCE_M`] from its transmitter.
pub fn map_errors(cfg: &Config, seed: u64) -> Result<Vec<MapErrorRow>> {
    let estimators = [Estimator::Grid, Estimator::CurveFit];
    let sources = CsiSources::new(cfg, &estimators)?;
    let b = cfg.map.bounds;
    let txs = cfg.topology().transmitters();
    let per_tx: Vec<Vec<MapErrorRow>> = txs
        .par_iter()
        .enumerate()
        .map(|(k, (id, pos))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let mut probes = Vec::with_capacity(cfg.map.probes);
            while probes.len() < cfg.map.probes {
                let p = Position::new(rng.random_range(b[0]..b[2]), rng.random_range(b[1]..b[3]));
                if p.distance(pos) >= PLACEMENT_CLEARANCE_M {
                    probes.push(p);
                }
            }
            estimators
                .iter()
                .map(|&est| {
                    let mae_db = map_error(sources.source(est), &cfg.field, (id, pos), &probes)?;
                    Ok(MapErrorRow { tx_id: id.clone(), estimator: est, mae_db })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(per_tx.into_iter().flatten().collect())
}

pub fn write_map_errors<W: Write>(out: W, rows: &[MapErrorRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(["tx_id", "estimator", "mae_db"])?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
