//! Fermi-Hubbard ground and excited states with adaptive variational
//! eigensolvers, simulated exactly on a dense statevector.
//!
//! The crate is `no_std` and only needs `alloc`. Everything that touches the
//! filesystem, the command line, or text formats other than the ansatz
//! serialization lives in the `hubbard-adapt` companion crate.
//!
//! Conventions used throughout:
//!
//! * mode `q = 2 * site + spin`, with spin 0 = up and 1 = down, sites
//!   enumerated row-major over the grid;
//! * qubit 0 is the least-significant bit of a basis index and a set bit
//!   means the mode is occupied;
//! * `a_k -> Z_0 ... Z_{k-1} (X_k + i Y_k) / 2` under Jordan-Wigner.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod adapt;
pub mod ansatz;
pub mod error;
pub mod exact;
pub mod fermion;
pub mod greens;
pub mod hubbard;
pub mod linalg;
pub mod optimize;
pub mod pauli;
pub mod space;
pub mod sparse;
pub mod ssvqe;
pub mod state;

pub use num_complex::Complex64;

pub use crate::adapt::{run_adapt, AdaptConfig, AdaptOutcome, StepRecord, StopReason};
pub use crate::ansatz::{Ansatz, InitSpec};
pub use crate::error::{Error, Result};
pub use crate::exact::{ground_state, lowest_k, sector_basis, EigenResult, Sector};
pub use crate::fermion::{FermionOperator, FermionTerm, Ladder};
pub use crate::hubbard::{
    build_hamiltonian, build_pool, momentum_mode, Boundary, GridSpec, HubbardModel, HubbardParams,
    OperatorDescriptor, PoolOperator, Spin,
};
pub use crate::optimize::{minimize, OptimizeConfig, OptimizeResult};
pub use crate::pauli::{jordan_wigner, Pauli, PauliString, QubitOperator};
pub use crate::sparse::{operator_matrix, SparseMatrix};
pub use crate::state::StateVector;

/// Largest number of spin-orbitals (qubits) any routine will build.
pub const MAX_MODES: usize = 14;

/// Coefficients below this magnitude are dropped when operators are merged.
pub const DROP_TOL: f64 = 1e-14;
