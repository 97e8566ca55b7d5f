//! Experiment runner for the coexistence power allocator: sweep drivers,
//! results persistence, plot-data pivoting, single solves and the invariant
//! suite behind the `coexist` binary.

pub mod error;
pub mod experiment;
pub mod plotdata;
pub mod solve;
pub mod validate;

pub use error::{CliError, Result};
pub use experiment::{
    collect_rows, read_results, run, write_results, Estimator, ExperimentKind, ExperimentSpec, ResultRow, Scheme,
    Status,
};
pub use plotdata::{emit_plotdata, pivot, PlotPoint};
pub use solve::{solve, write_solve, SolveOutput, Summary};
pub use validate::{validate, Check};
