//! Exact statevector simulation.

mod eigen;
mod operator;
mod state;

pub use eigen::{exact_ground_state, lanczos_ground, residual, subspace_eigensystem, DENSE_MAX_QUBITS, RESIDUAL_TOL};
pub use operator::{
    apply, apply_exp, expectation, rayleigh_quotient, variance, variance_compiled, CompiledOperator, Generator,
    TAYLOR_MAX_TERMS, TAYLOR_TOL,
};
pub use state::{ReferenceState, StateVector, MAX_SIM_QUBITS};
