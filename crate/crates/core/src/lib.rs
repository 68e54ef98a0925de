//! Adaptive variational eigensolvers on an exact statevector simulator.
//!
//! The crate covers the whole pipeline: Pauli-string algebra ([`pauli`]),
//! molecular Hamiltonians and operator pools ([`chem`]), statevector
//! arithmetic ([`sim`]), the ADAPT/ADAFT loops ([`adaptive`]), effective
//! Hamiltonian dressing ([`dressing`]) and bond-scan benchmarks ([`bench`]).

pub mod adaptive;
pub mod bench;
pub mod chem;
pub mod dressing;
pub mod error;
pub mod pauli;
pub mod sim;

pub use error::{Error, Result};
pub use pauli::{Pauli, PauliString, PauliSum, C64};
