//! Protecting shared entanglement with encryption, and what a thief gets.
//!
//! An EPR pair `Φ+` can be locked by encrypting each half under an
//! independent key, either with the quantum one-time pad (QOTP, a random
//! Pauli `X^{k1} Z^{k2}`) or with RBE. Averaged over keys both locks hide the
//! pair completely. They differ in how often a key-guessing thief recovers a
//! usable pair. The magic-square game measures what a four-qubit resource
//! is worth to its holders.

mod locking;
mod magic_square;

pub use locking::{
    qotp_ensemble_average, qotp_lock, qotp_unlock, rbe_ensemble_average, rbe_lock, rbe_unlock, secure_epr_sharing,
    theft_recovery_experiment, EprPair, EprSharingReport, Interception, QotpKey, TheftResult, TheftScheme,
};
pub use magic_square::{
    locked_resource_utility, magic_square_classical_bound, magic_square_play, magic_square_win_probability,
    ClassicalBound, FourQubitResource, MagicSquareInstance, ResourceLock, UtilityResult,
};

use alloc::vec::Vec;

use crate::qcore::{DensityMatrix, Unitary};
use crate::Result;

/// `(1/|U|) Σ_U U ρ U†` with every `U` acting on `qubit`.
pub(crate) fn average_channel(rho: &DensityMatrix, qubit: usize, unitaries: &[Unitary]) -> Result<DensityMatrix> {
    let w = 1.0 / unitaries.len() as f64;
    let parts: Vec<(f64, DensityMatrix)> =
        unitaries.iter().map(|u| Ok((w, rho.apply(u, &[qubit])?))).collect::<Result<_>>()?;
    DensityMatrix::mixture(&parts)
}
