//! Truncated Fock-space representation of the stochastic dynamics.
//!
//! A mixed state is the coefficient vector of `Ψ = sum_n psi_n z^n`
//! restricted to a [`TruncationBox`]; `a_i` acts as `∂/∂z_i` and `a_i†` as
//! multiplication by `z_i`.

mod master;
mod operator;
mod space;
mod state;

pub use master::{
    ack_residual, evolve_master, hamiltonian, interior_margin, max_master_step, residual_norms, AckResidual,
    BoundaryPolicy,
};
pub use operator::{annihilation, commutator, creation, linear_observable, number_operator, SparseOperator};
pub use space::{TruncationBox, DENSE_LIMIT, MAX_STATES};
pub use state::{apply_symmetry, coherent_state, MixedState};
