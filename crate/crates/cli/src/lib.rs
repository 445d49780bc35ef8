//! Experiment harness for the `mpgmres` solvers: problem loading, solver runs,
//! sweeps, the SpMV traffic model and CSV/JSON output.

pub mod cli;
pub mod experiment;
pub mod model;
pub mod output;
pub mod sweep;

pub use experiment::{
    load_problem, run_experiment, run_on_problem, ExperimentOutcome, ExperimentSpec, PolySeed,
    Problem, ProblemSource, SolverKind, Summary, VectorInit,
};
pub use model::{spmv_speedup_model, SpmvModel, SpmvModelInput};
pub use sweep::{sweep_restart_sizes, sweep_switch_points, RestartRow, SwitchRow};
