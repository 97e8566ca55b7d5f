//! Joint power allocation by successive convex approximation.
//!
//! Each outer iteration refreshes the quadratic-transform weights β, rebuilds
//! a convex surrogate of the max-min SINR problem around the current point
//! and solves it with the log-barrier method in [`barrier`].

pub mod barrier;
mod program;
mod sca;

use serde::{Deserialize, Serialize};

pub use barrier::{BarrierOptions, BarrierSolution, ConvexProgram, Row, SolveStatus, Term};
pub use program::{
    build_subproblem, linearize_big_g, linearize_log_constraint, Anchor, Layout, LinearizedG,
    LinearizedLog, Objective, Subproblem, P_FLOOR,
};
pub use sca::{
    allocate, beta_update, feasibility_probe, feasibility_probe_with, quadratic_transform,
    solve_subproblem, AllocateOptions, IterationState, SolveReport,
};

/// Which power blocks the optimiser may change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// BS and radar powers together.
    Joint,
    /// BS powers only; radars fixed at equal split.
    CommOnly,
    /// Radar powers only; BSs fixed at equal split.
    RadarOnly,
}

impl Variant {
    pub fn optimizes_bs(&self) -> bool {
        matches!(self, Variant::Joint | Variant::CommOnly)
    }

    pub fn optimizes_radar(&self) -> bool {
        matches!(self, Variant::Joint | Variant::RadarOnly)
    }
}

/// Coefficient of Σ t_j in the linearised z/t coupling row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Coupling {
    /// 1/N_c, consistent with the fixed-point equation.
    #[serde(rename = "nc")]
    UserAntennas,
    /// 1/M_c, an alternative coefficient kept for comparison.
    #[serde(rename = "mc")]
    BaseStations,
}
