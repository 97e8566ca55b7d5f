//! TOML scenario files.
//!
//! ```toml
//! [topology]
//! bs = [[604.0, 629.0], [1289.0, 2022.0]]
//! radars = [[-1167.0, 3125.0]]
//! user = [650.0, 1134.0]
//! target = [1360.0, 1000.0]
//! nc = 2
//!
//! [limits]
//! p_cmax_w = 40.0
//! p_rmax_w = 1000.0
//! p_csum_w = 100.0
//! p_rsum_w = 1500.0
//! r_req_bps_hz = 2.0
//! noise_dbm = -107.0
//! pulses_n = 256
//! pfa = 1e-4
//! ```
//!
//! `run`, `field`, `antenna`, `map`, `waveform` and `sweep` are optional
//! sections with defaults.

use std::path::Path;

use serde::Deserialize;

use crate::channel::{free_space_loss_db, AntennaPattern, PropagationField, Screen};
use crate::error::{Error, Result};
use crate::optimizer::Coupling;
use crate::scenario::{dbm_to_watts, Limits, Position, Scenario, Topology};
use crate::waveform::ChirpParams;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTopology {
    bs: Vec<[f64; 2]>,
    radars: Vec<[f64; 2]>,
    user: [f64; 2],
    target: [f64; 2],
    nc: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLimits {
    p_cmax_w: f64,
    p_rmax_w: f64,
    p_csum_w: f64,
    p_rsum_w: f64,
    r_req_bps_hz: f64,
    noise_dbm: f64,
    pulses_n: usize,
    pfa: f64,
}

/// Solver and sampling options.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunOptions {
    pub seed: u64,
    pub mc_samples: usize,
    pub epsilon: f64,
    pub max_iter: usize,
    /// Coefficient of the z/t coupling row: `"nc"` (1/N_c) or `"mc"` (1/M_c).
    pub coupling: Coupling,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { seed: 1, mc_samples: 10_000, epsilon: 1e-3, max_iter: 100, coupling: Coupling::UserAntennas }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawField {
    carrier_ghz: f64,
    reference_loss_db: Option<f64>,
    pathloss_exponent: f64,
    /// `[x1, y1, x2, y2, extra_loss_db]` per screen.
    screens: Vec<[f64; 5]>,
    shadowing_sigma_db: f64,
    shadowing_seed: u64,
    target_gain_db: f64,
}

impl Default for RawField {
    fn default() -> Self {
        Self {
            carrier_ghz: 2.8,
            reference_loss_db: None,
            pathloss_exponent: 3.5,
            screens: Vec::new(),
            shadowing_sigma_db: 0.0,
            shadowing_seed: 0,
            target_gain_db: 0.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawAntenna {
    peak_gain_dbi: f64,
    theta_3db_deg: f64,
    sidelobe_dbi: f64,
}

impl Default for RawAntenna {
    fn default() -> Self {
        Self { peak_gain_dbi: 30.0, theta_3db_deg: 32.0, sidelobe_dbi: -10.0 }
    }
}

/// Radio-map construction settings.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MapOptions {
    /// `[x_min, y_min, x_max, y_max]` in metres.
    pub bounds: [f64; 4],
    pub sample_spacing_m: f64,
    pub cell_m: f64,
    /// Off-grid probe points per transmitter for map-accuracy runs.
    pub probes: usize,
}

impl Default for MapOptions {
    fn default() -> Self {
        Self { bounds: [-1500.0, -1500.0, 3500.0, 3500.0], sample_spacing_m: 25.0, cell_m: 25.0, probes: 500 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawWaveform {
    pulse_duration_s: f64,
    bandwidth_hz: f64,
}

impl Default for RawWaveform {
    fn default() -> Self {
        Self { pulse_duration_s: 2e-6, bandwidth_hz: 5e6 }
    }
}

/// Sweep grids used by the experiment runner.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepOptions {
    pub r_req: Vec<f64>,
    pub p_csum_w: Vec<f64>,
    pub theta_3db_deg: Vec<f64>,
    /// Delay errors as fractions of the pulse duration.
    pub delay_error_frac: Vec<f64>,
    pub doppler_hz: Vec<f64>,
    /// Random placements for the convergence histogram.
    pub placements: usize,
    /// Rate requirement of the budget, beamwidth and mismatch sweeps.
    pub fixed_r_req: f64,
    pub baseline_step_w: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            r_req: vec![0.0, 2.0, 4.0, 6.0, 8.0],
            p_csum_w: vec![50.0, 100.0],
            theta_3db_deg: vec![16.0, 24.0, 32.0, 48.0, 64.0],
            delay_error_frac: vec![0.0, 0.0025, 0.005, 0.01],
            doppler_hz: vec![0.0, 2000.0],
            placements: 100,
            fixed_r_req: 2.0,
            baseline_step_w: 0.5,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    topology: RawTopology,
    limits: RawLimits,
    #[serde(default)]
    run: RunOptions,
    #[serde(default)]
    field: RawField,
    #[serde(default)]
    antenna: RawAntenna,
    #[serde(default)]
    map: MapOptions,
    #[serde(default)]
    waveform: RawWaveform,
    #[serde(default)]
    sweep: SweepOptions,
}

/// A fully validated scenario file.
#[derive(Debug, Clone)]
pub struct Config {
    pub scenario: Scenario,
    pub run: RunOptions,
    pub field: PropagationField,
    pub antenna: AntennaPattern,
    pub map: MapOptions,
    pub waveform: ChirpParams,
    pub sweep: SweepOptions,
}

impl Config {
    pub fn topology(&self) -> &Topology {
        &self.scenario.topology
    }

    pub fn limits(&self) -> &Limits {
        &self.scenario.limits
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<Config> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<Config> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;

    let topology = Topology {
        bs_positions: raw.topology.bs.iter().copied().map(Position::from).collect(),
        radar_positions: raw.topology.radars.iter().copied().map(Position::from).collect(),
        user_position: raw.topology.user.into(),
        target_position: raw.topology.target.into(),
        user_antennas: raw.topology.nc,
    };
    let l = &raw.limits;
    let limits = Limits {
        p_cmax: l.p_cmax_w,
        p_rmax: l.p_rmax_w,
        p_csum: l.p_csum_w,
        p_rsum: l.p_rsum_w,
        r_req: l.r_req_bps_hz,
        noise_power: dbm_to_watts(l.noise_dbm),
        pulses_per_cpi: l.pulses_n,
        false_alarm_prob: l.pfa,
    };
    let scenario = Scenario::new(topology, limits)?;

    if !(raw.run.epsilon > 0.0) {
        return Err(invalid("run.epsilon", "must be positive"));
    }
    if raw.run.max_iter == 0 {
        return Err(invalid("run.max_iter", "must be at least 1"));
    }
    if raw.run.mc_samples == 0 {
        return Err(invalid("run.mc_samples", "must be at least 1"));
    }

    let f = &raw.field;
    if !(f.carrier_ghz > 0.0) {
        return Err(invalid("field.carrier_ghz", "must be positive"));
    }
    let carrier_hz = f.carrier_ghz * 1e9;
    let field = PropagationField {
        reference_loss_db: f.reference_loss_db.unwrap_or_else(|| free_space_loss_db(carrier_hz, 1.0)),
        pathloss_exponent: f.pathloss_exponent,
        screens: f
            .screens
            .iter()
            .map(|s| Screen::new(Position::new(s[0], s[1]), Position::new(s[2], s[3]), s[4]))
            .collect(),
        shadowing_sigma_db: f.shadowing_sigma_db,
        shadowing_seed: f.shadowing_seed,
        carrier_hz,
        target_gain_db: f.target_gain_db,
    };
    field.validate()?;

    let a = &raw.antenna;
    if !(a.theta_3db_deg > 0.0 && a.theta_3db_deg <= 360.0) {
        return Err(invalid("antenna.theta_3db_deg", "must lie in (0, 360]"));
    }
    if a.sidelobe_dbi > a.peak_gain_dbi {
        return Err(invalid("antenna.sidelobe_dbi", "must not exceed the peak gain"));
    }
    let antenna = AntennaPattern {
        peak_gain_dbi: a.peak_gain_dbi,
        theta_3db_deg: a.theta_3db_deg,
        sidelobe_dbi: a.sidelobe_dbi,
        boresight_rad: 0.0,
    };

    let m = &raw.map;
    if !(m.cell_m > 0.0) {
        return Err(invalid("map.cell_m", "must be positive"));
    }
    if !(m.sample_spacing_m > 0.0) {
        return Err(invalid("map.sample_spacing_m", "must be positive"));
    }
    if !(m.bounds[2] > m.bounds[0] && m.bounds[3] > m.bounds[1]) {
        return Err(invalid("map.bounds", "expected [x_min, y_min, x_max, y_max] with max > min"));
    }

    let waveform = ChirpParams::up(raw.waveform.pulse_duration_s, raw.waveform.bandwidth_hz);
    if !(waveform.pulse_duration > 0.0 && waveform.bandwidth > 0.0) {
        return Err(invalid("waveform", "pulse duration and bandwidth must be positive"));
    }

    let sweep = raw.sweep;
    for (key, values) in [
        ("sweep.r_req", &sweep.r_req),
        ("sweep.p_csum_w", &sweep.p_csum_w),
        ("sweep.theta_3db_deg", &sweep.theta_3db_deg),
        ("sweep.delay_error_frac", &sweep.delay_error_frac),
        ("sweep.doppler_hz", &sweep.doppler_hz),
    ] {
        if values.is_empty() || values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid(key, "must be non-empty and strictly increasing"));
        }
    }
    if !(sweep.baseline_step_w > 0.0) {
        return Err(invalid("sweep.baseline_step_w", "must be positive"));
    }

    Ok(Config { scenario, run: raw.run, field, antenna, map: raw.map, waveform, sweep })
}

fn invalid(key: &str, reason: &str) -> Error {
    Error::InvalidConfig { key: key.into(), reason: reason.into() }
}
