//! Random instance generators shared by the integration tests.

#![allow(dead_code)]

use std::path::PathBuf;

use coexist_core::scenario::dbm_to_watts;
use coexist_core::{Config, LargeScaleCsi, Limits, Position, PowerAllocation, Scenario, Topology};
use rand::Rng;

pub fn reference_config() -> Config {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/reference.toml");
    coexist_core::load_config(path).expect("configs/reference.toml")
}

pub fn log_uniform<R: Rng>(rng: &mut R, lo_exp: f64, hi_exp: f64) -> f64 {
    10f64.powf(rng.random_range(lo_exp..hi_exp))
}

pub fn reference_limits(r_req: f64) -> Limits {
    Limits {
        p_cmax: 40.0,
        p_rmax: 1000.0,
        p_csum: 100.0,
        p_rsum: 1500.0,
        r_req,
        noise_power: dbm_to_watts(-107.0),
        pulses_per_cpi: 256,
        false_alarm_prob: 1e-4,
    }
}

/// Scenario whose positions are placeholders; only the dimensions matter
/// when the CSI is supplied directly.
pub fn abstract_scenario(m_c: usize, m_r: usize, n_c: usize, limits: Limits) -> Scenario {
    let topology = Topology {
        bs_positions: (0..m_c).map(|j| Position::new(100.0 * j as f64, 0.0)).collect(),
        radar_positions: (0..m_r).map(|i| Position::new(100.0 * i as f64, 5000.0)).collect(),
        user_position: Position::new(0.0, 1000.0),
        target_position: Position::new(0.0, 3000.0),
        user_antennas: n_c,
    };
    Scenario::new(topology, limits).expect("valid abstract scenario")
}

/// Gains spanning the ranges seen on the reference field.
pub fn random_csi<R: Rng>(rng: &mut R, m_c: usize, m_r: usize) -> LargeScaleCsi {
    let l_c = (0..m_c).map(|_| log_uniform(rng, -15.0, -12.5)).collect();
    let l_c_to_r = (0..m_c).map(|_| (0..m_r).map(|_| log_uniform(rng, -16.5, -13.0)).collect()).collect();
    let l_r_to_c = (0..m_r).map(|_| log_uniform(rng, -18.0, -15.5)).collect();
    let radar = (0..m_r).map(|_| log_uniform(rng, -17.5, -15.5)).collect();
    LargeScaleCsi::from_gains(l_c, l_c_to_r, l_r_to_c, radar)
}

pub fn random_alloc<R: Rng>(rng: &mut R, m_c: usize, m_r: usize, limits: &Limits) -> PowerAllocation {
    let cap_c = limits.p_cmax.min(limits.p_csum / m_c as f64);
    let cap_r = limits.p_rmax.min(limits.p_rsum / m_r as f64);
    PowerAllocation::new(
        (0..m_c).map(|_| rng.random_range(0.0..cap_c)).collect(),
        (0..m_r).map(|_| rng.random_range(0.0..cap_r)).collect(),
    )
}

/// User and target drawn uniformly over `bounds`, at least `clearance`
/// metres from every transmitter.
pub fn random_placement<R: Rng>(rng: &mut R, topo: &Topology, bounds: [f64; 4], clearance: f64) -> Topology {
    let draw = |rng: &mut R| loop {
        let p = Position::new(rng.random_range(bounds[0]..bounds[2]), rng.random_range(bounds[1]..bounds[3]));
        let clear = topo.bs_positions.iter().chain(&topo.radar_positions).all(|t| t.distance(&p) >= clearance);
        if clear {
            return p;
        }
    };
    let user = draw(rng);
    let target = draw(rng);
    Topology { user_position: user, target_position: target, ..topo.clone() }
}
