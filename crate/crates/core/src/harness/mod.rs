//! Run configuration, study drivers and file output used by the `ddhdg`
//! binary and the examples.

pub mod config;
pub mod csv;
pub mod drivers;
pub mod vtk;

pub use config::{Command, DtRule, ProblemKind, RunConfig};
pub use drivers::{
    convergence, project_check, run_convergence, run_example1, run_project_check, simulate,
    Example1Outcome, Example1Run, ProjectionTable, SimulationOutput,
};
