//! ADAPT and ADAFT loops: residual-gradient selection, analytic gradients, BFGS.

mod objective;
mod optimize;
mod solver;

pub use objective::{insertion_gradients, Evaluation, Objective, Param, Step};
pub use optimize::{minimize, OptimizerConfig, Optimum};
pub use solver::{
    energy_and_gradient, records_to_csv, residual_gradients, run, run_problem, select_operators, AnsatzFlavor,
    AnsatzState, CompiledPool, IterationRecord, Layer, Problem, RunOutcome, RunStatus, SolverConfig, STALL_THRESHOLD,
};
