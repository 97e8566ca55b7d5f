//! Domain types shared by every module: geometry, power limits, allocations,
//! unit conversions and allocation feasibility checks.
//!
//! All quantities are stored in linear units (watts, power ratios). Decibel
//! values only appear at the I/O boundary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used by every feasibility check.
pub const FEASIBILITY_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Bearing of `other` as seen from `self`, in radians.
    pub fn bearing_to(&self, other: &Position) -> f64 {
        (other.y - self.y).atan2(other.x - self.x)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Position {
    fn from(v: [f64; 2]) -> Self {
        Self::new(v[0], v[1])
    }
}

/// Node placement of the shared-spectrum network.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub bs_positions: Vec<Position>,
    pub radar_positions: Vec<Position>,
    pub user_position: Position,
    pub target_position: Position,
    /// Receive antennas at the interfered user (N_c).
    pub user_antennas: usize,
}

impl Topology {
    pub fn num_bs(&self) -> usize {
        self.bs_positions.len()
    }

    pub fn num_radars(&self) -> usize {
        self.radar_positions.len()
    }

    pub fn bs_id(j: usize) -> String {
        format!("bs{}", j + 1)
    }

    pub fn radar_id(i: usize) -> String {
        format!("radar{}", i + 1)
    }

    /// Identifiers and positions of every transmitter (BSs first, then radars).
    pub fn transmitters(&self) -> Vec<(String, Position)> {
        let bs = self
            .bs_positions
            .iter()
            .enumerate()
            .map(|(j, p)| (Self::bs_id(j), *p));
        let radars = self
            .radar_positions
            .iter()
            .enumerate()
            .map(|(i, p)| (Self::radar_id(i), *p));
        bs.chain(radars).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.bs_positions.is_empty() {
            return Err(invalid("topology.bs", "at least one base station is required"));
        }
        if self.radar_positions.is_empty() {
            return Err(invalid("topology.radars", "at least one radar is required"));
        }
        if self.user_antennas < self.num_bs() {
            return Err(invalid(
                "topology.nc",
                &format!(
                    "N_c >= M_c is required (N_c = {}, M_c = {})",
                    self.user_antennas,
                    self.num_bs()
                ),
            ));
        }
        let all_finite = self
            .bs_positions
            .iter()
            .chain(&self.radar_positions)
            .chain([&self.user_position, &self.target_position])
            .all(Position::is_finite);
        if !all_finite {
            return Err(invalid("topology", "coordinates must be finite"));
        }
        Ok(())
    }
}

/// Power caps, budgets, the rate requirement and detector settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Limits {
    pub p_cmax: f64,
    pub p_rmax: f64,
    pub p_csum: f64,
    pub p_rsum: f64,
    /// Ergodic-rate requirement in bits/s/Hz.
    pub r_req: f64,
    /// Noise power σ² in watts.
    pub noise_power: f64,
    /// Pulses per coherent processing interval (N).
    pub pulses_per_cpi: usize,
    pub false_alarm_prob: f64,
}

impl Limits {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("limits.p_cmax_w", self.p_cmax),
            ("limits.p_rmax_w", self.p_rmax),
            ("limits.p_csum_w", self.p_csum),
            ("limits.p_rsum_w", self.p_rsum),
            ("limits.noise_dbm", self.noise_power),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(key, "must be a positive finite power"));
            }
        }
        if !(self.false_alarm_prob > 0.0 && self.false_alarm_prob < 1.0) {
            return Err(invalid("limits.pfa", "must lie in (0, 1)"));
        }
        if self.pulses_per_cpi < 2 {
            return Err(invalid("limits.pulses_n", "at least 2 pulses are required"));
        }
        if !(self.r_req >= 0.0 && self.r_req.is_finite()) {
            return Err(invalid("limits.r_req_bps_hz", "must be a non-negative rate"));
        }
        Ok(())
    }

    /// Algorithm initialisation value for every BS: min(P_csum / M_c, P_cmax).
    pub fn equal_split_bs(&self, m_c: usize) -> f64 {
        (self.p_csum / m_c as f64).min(self.p_cmax)
    }

    pub fn equal_split_radar(&self, m_r: usize) -> f64 {
        (self.p_rsum / m_r as f64).min(self.p_rmax)
    }
}

/// Topology plus limits: everything the allocators need besides CSI.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub topology: Topology,
    pub limits: Limits,
}

impl Scenario {
    pub fn new(topology: Topology, limits: Limits) -> Result<Self> {
        topology.validate()?;
        limits.validate()?;
        Ok(Self { topology, limits })
    }

    pub fn m_c(&self) -> usize {
        self.topology.num_bs()
    }

    pub fn m_r(&self) -> usize {
        self.topology.num_radars()
    }

    pub fn n_c(&self) -> usize {
        self.topology.user_antennas
    }

    pub fn with_r_req(&self, r_req: f64) -> Self {
        let mut s = self.clone();
        s.limits.r_req = r_req;
        s
    }
}

/// Per-BS and per-radar transmit powers in watts (the diagonals of P_c, P_r).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    pub p_c: Vec<f64>,
    pub p_r: Vec<f64>,
}

impl PowerAllocation {
    pub fn new(p_c: Vec<f64>, p_r: Vec<f64>) -> Self {
        Self { p_c, p_r }
    }

    pub fn zeros(m_c: usize, m_r: usize) -> Self {
        Self::new(vec![0.0; m_c], vec![0.0; m_r])
    }

    /// Both sides at min(P_sum / M, P_max).
    pub fn equal_split(m_c: usize, m_r: usize, limits: &Limits) -> Self {
        Self::new(
            vec![limits.equal_split_bs(m_c); m_c],
            vec![limits.equal_split_radar(m_r); m_r],
        )
    }

    pub fn total_c(&self) -> f64 {
        self.p_c.iter().sum()
    }

    pub fn total_r(&self) -> f64 {
        self.p_r.iter().sum()
    }
}

/// A violated allocation constraint.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NegativeBs { index: usize, value: f64 },
    NegativeRadar { index: usize, value: f64 },
    BsAboveMax { index: usize, value: f64, max: f64 },
    RadarAboveMax { index: usize, value: f64, max: f64 },
    BsBudget { total: f64, budget: f64 },
    RadarBudget { total: f64, budget: f64 },
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    linear_to_db(w) + 30.0
}

fn exceeds(value: f64, bound: f64) -> bool {
    value > bound * (1.0 + FEASIBILITY_RTOL)
}

fn negative(value: f64, scale: f64) -> bool {
    value < -FEASIBILITY_RTOL * scale
}

/// Lists every box or budget constraint the allocation violates.
pub fn validate_allocation(alloc: &PowerAllocation, limits: &Limits) -> Vec<Violation> {
    let mut out = Vec::new();
    for (index, &value) in alloc.p_c.iter().enumerate() {
        if negative(value, limits.p_cmax) {
            out.push(Violation::NegativeBs { index, value });
        } else if exceeds(value, limits.p_cmax) {
            out.push(Violation::BsAboveMax { index, value, max: limits.p_cmax });
        }
    }
    for (index, &value) in alloc.p_r.iter().enumerate() {
        if negative(value, limits.p_rmax) {
            out.push(Violation::NegativeRadar { index, value });
        } else if exceeds(value, limits.p_rmax) {
            out.push(Violation::RadarAboveMax { index, value, max: limits.p_rmax });
        }
    }
    let total_c = alloc.total_c();
    if exceeds(total_c, limits.p_csum) {
        out.push(Violation::BsBudget { total: total_c, budget: limits.p_csum });
    }
    let total_r = alloc.total_r();
    if exceeds(total_r, limits.p_rsum) {
        out.push(Violation::RadarBudget { total: total_r, budget: limits.p_rsum });
    }
    out
}

/// Like [`validate_allocation`] but first checks the vector lengths against
/// the topology.
pub fn validate_allocation_for(
    alloc: &PowerAllocation,
    topology: &Topology,
    limits: &Limits,
) -> Result<Vec<Violation>> {
    if alloc.p_c.len() != topology.num_bs() || alloc.p_r.len() != topology.num_radars() {
        return Err(Error::Dimension(format!(
            "allocation has {}+{} entries, topology needs {}+{}",
            alloc.p_c.len(),
            alloc.p_r.len(),
            topology.num_bs(),
            topology.num_radars()
        )));
    }
    Ok(validate_allocation(alloc, limits))
}

fn invalid(key: &str, reason: &str) -> Error {
    Error::InvalidConfig { key: key.to_string(), reason: reason.to_string() }
}
