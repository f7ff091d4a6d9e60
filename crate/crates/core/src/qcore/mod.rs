//! Dense quantum-state kernel.
//!
//! Indexing is big-endian: qubit 0 is the most significant bit of a basis
//! index, so `|q0 q1 … q_{n-1}⟩` has index `Σ q_k 2^{n-1-k}`.

mod basis;
mod density;
mod eigen;
mod matrix;
mod state;
mod unitary;

pub use basis::OrthonormalBasis;
pub use density::DensityMatrix;
pub use eigen::hermitian_eigenvalues;
pub use matrix::CMatrix;
pub use state::{equal_up_to_global_phase, measure_in_basis, outcome_distribution, tensor, StateVector};
pub use unitary::Unitary;

pub use num_complex::Complex64 as C64;

/// Largest supported register. The simulations need at most five qubits
/// (four entangled qubits plus a weak-measurement ancilla).
pub const MAX_QUBITS: usize = 8;

/// Entry-wise tolerance for amplitude comparisons and norm checks.
pub const AMPLITUDE_TOL: f64 = 1e-12;

/// Entry-wise tolerance on `U†U - I` when admitting a matrix as unitary.
pub const UNITARITY_TOL: f64 = 1e-10;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// `e^{iφ}` without pulling in `std` float intrinsics.
pub(crate) fn cis(phi: f64) -> C64 {
    C64::new(libm::cos(phi), libm::sin(phi))
}

pub(crate) fn check_capacity(num_qubits: usize) -> crate::Result<()> {
    if num_qubits > MAX_QUBITS {
        return Err(crate::Error::Capacity { requested: num_qubits, max: MAX_QUBITS });
    }
    Ok(())
}

/// Validates a target list against a register size: in range and distinct.
pub(crate) fn check_targets(targets: &[usize], num_qubits: usize) -> crate::Result<()> {
    for (k, &t) in targets.iter().enumerate() {
        if t >= num_qubits {
            return Err(crate::Error::QubitOutOfRange { qubit: t, num_qubits });
        }
        if targets[..k].contains(&t) {
            return Err(crate::Error::DuplicateTarget(t));
        }
    }
    Ok(())
}

/// Applies a `2^k × 2^k` row-major operator to the listed qubits of a raw
/// amplitude vector over `num_qubits` qubits. Targets are assumed valid.
pub(crate) fn apply_raw(amps: &[C64], num_qubits: usize, op: &[C64], targets: &[usize]) -> alloc::vec::Vec<C64> {
    let k = targets.len();
    let sub_dim = 1usize << k;
    let shifts: alloc::vec::Vec<usize> = targets.iter().map(|&t| num_qubits - 1 - t).collect();
    let mask = shifts.iter().fold(0usize, |m, &s| m | (1 << s));
    let offsets: alloc::vec::Vec<usize> = (0..sub_dim)
        .map(|sub| {
            shifts
                .iter()
                .enumerate()
                .filter(|(pos, _)| (sub >> (k - 1 - pos)) & 1 == 1)
                .fold(0usize, |off, (_, &s)| off | (1 << s))
        })
        .collect();

    let mut out = alloc::vec![ZERO; amps.len()];
    let mut local = alloc::vec![ZERO; sub_dim];
    for base in (0..amps.len()).filter(|i| i & mask == 0) {
        for (slot, &off) in local.iter_mut().zip(&offsets) {
            *slot = amps[base | off];
        }
        for (r, &off) in offsets.iter().enumerate() {
            let row = &op[r * sub_dim..(r + 1) * sub_dim];
            out[base | off] = row.iter().zip(&local).map(|(a, b)| a * b).sum();
        }
    }
    out
}
