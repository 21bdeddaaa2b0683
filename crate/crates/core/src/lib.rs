//! Inductively constructed, fully feasible variational circuits for
//! constrained combinatorial optimization.
//!
//! The crate is organised bottom-up:
//!
//! * [`sim`] – dense statevector simulator (X, H, Ry, CNOT, CSWAP, CRy).
//! * [`circuit`] – gate-level IR with shared/negated parameter references and
//!   CNOT cost accounting.
//! * [`ansatz`] – the parameterized W state, the fully feasible ansatz
//!   families (TSP, assignment, shift scheduling, facility location,
//!   product chain) and the layered hardware-efficient baseline.
//! * [`problems`] – constraint checkers, brute-force oracles, the facility
//!   cost Hamiltonian and its penalized variants.
//! * [`vqe`] – derivative-free variational loop and sampled metrics.
//! * [`experiment`] – the experiment harness behind the `feasvqc` CLI.
//!
//! Qubit `q` is bit `q` of a basis-state index (qubit 0 is least significant).

pub mod ansatz;
pub mod circuit;
mod error;
pub mod experiment;
pub mod problems;
pub mod sim;
pub mod vqe;

pub use error::{Error, Result};
