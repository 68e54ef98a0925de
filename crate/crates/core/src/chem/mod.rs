//! Molecular integrals, second quantization, and operator pools.

mod fcidump;
mod fermion;
mod hamiltonian;
mod pool;

pub use fcidump::{parse_fcidump, MolecularSystem};
pub use fermion::{jordan_wigner, FermionOperator, Ladder};
pub use hamiltonian::{
    build_hamiltonian, fock_sector, hartree_fock_occupation, number_operator, penalized_hamiltonian, s_squared, s_z,
    spin_of, spin_orbital, Spin, SpinOrdering, SPIN_ORDERING,
};
pub use pool::{excitations, make_pool, Excitation, OperatorPool, PoolFlavor};
