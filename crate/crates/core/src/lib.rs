//! Radio-map-assisted power allocation for a multi-BS communication network
//! sharing spectrum with a multi-radar sensing network.
//!
//! The crate maximises the smallest radar SINR subject to an ergodic-rate
//! requirement at the interfered user, using only large-scale CSI obtained
//! from a radio map.

pub mod baselines;
pub mod channel;
pub mod config;
pub mod error;
pub mod metrics;
pub mod optimizer;
pub mod radiomap;
pub mod scenario;
pub mod waveform;

pub use baselines::{algorithm2, grid_search_oracle, BackoffScheme, BaselineOptions, BaselineOutcome};
pub use channel::{build_csi, build_csi_from, AntennaPattern, LargeScaleCsi, PathLossSource, PropagationField, Screen};
pub use config::{load_config, parse_config, Config, RunOptions};
pub use error::{Error, Result};
pub use optimizer::{allocate, feasibility_probe, AllocateOptions, Coupling, SolveReport, Variant};
pub use radiomap::{build_grid_map, fit_curve_model, CsiDataset, CurveFitMap, GridMap};
pub use scenario::{Limits, Position, PowerAllocation, Scenario, Topology};
pub use waveform::{ChirpParams, MismatchError};
