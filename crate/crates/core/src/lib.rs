//! Mass-action reaction networks: structure, deterministic rate equations,
//! the truncated master equation in Fock space, and Gillespie simulation.
//!
//! Numerical types are generic over [`scalar::Real`] (`f32` or `f64`); exact
//! linear algebra for ranks and conservation laws runs over big rationals.
//! The aliases below fix the scalar to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exact;
pub mod fixtures;
pub mod fock;
pub mod net;
pub mod parser;
pub mod rate;
pub mod scalar;
pub mod ssa;
pub mod structure;

pub use error::{CrnError, Result};
pub use net::CountVector;
pub use scalar::Real;

pub type Network = net::Network<f64>;
pub type NetworkF32 = net::Network<f32>;
pub type Transition = net::Transition<f64>;
pub type SparseOperator = fock::SparseOperator<f64>;
pub type MixedState = fock::MixedState<f64>;
pub type Trajectory = rate::Trajectory<f64>;
pub type JumpTrajectory = ssa::JumpTrajectory<f64>;
pub type ComplexBalanceReport = structure::ComplexBalanceReport<f64>;
