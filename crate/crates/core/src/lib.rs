//! Dense statevector kernels and the random-basis encryption (RBE) toolkit.
//!
//! The crate is `no_std` + `alloc`. Everything here is a pure function over
//! small dense complex vectors (at most [`MAX_QUBITS`] qubits), so results
//! are reproducible from a master seed and safe to share across threads.
//! Parallel execution, file formats and the command line live in the
//! `rbe-lab` companion crate.
//!
//! Module map:
//!
//! * [`qcore`]: statevectors, unitaries, keyed orthonormal bases, density
//!   matrices and measurement.
//! * [`rbe`]: key generation, encryption, decryption, homomorphic gates and
//!   the numerical security checks.
//! * [`weakmeas`]: the `W_ε` coupling and ancilla-based weak measurement.
//! * [`protocols`]: BB84, informed-basis BB84, DL04 and RBE-QKD state
//!   machines, eavesdropping strategies and the key-bit guessing game.
//! * [`entangle`]: locking EPR halves, theft/recovery, secure EPR sharing and
//!   the magic-square game.
#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod entangle;
pub mod error;
pub mod protocols;
pub mod qcore;
pub mod rbe;
pub mod stats;
pub mod stream;
pub mod weakmeas;

pub use error::{Error, Result};
pub use qcore::{DensityMatrix, OrthonormalBasis, StateVector, Unitary, AMPLITUDE_TOL, C64, MAX_QUBITS, UNITARITY_TOL};
