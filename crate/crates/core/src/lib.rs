//! Quantum-circuit emulation and hybrid quantum-classical algorithm toolkit:
//! dense/sparse state-vector, MPS and partitioned backends, ADAPT-family VQE,
//! QUBO hydration-site optimization, and Szegedy-walk Monte Carlo primitives.

pub mod chemistry;
pub mod error;
pub mod hydration;
pub mod mps;
pub mod oracles;
pub mod partitioned;
pub mod pauli;
pub mod qubo;
pub mod qwalk;
pub mod rng;
pub mod sv;
pub mod vqe;

pub use error::{Error, Result};
