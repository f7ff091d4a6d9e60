use alloc::vec::Vec;

use super::{apply_raw, check_capacity, check_targets, hermitian_eigenvalues, CMatrix, StateVector, Unitary, C64};
use crate::{Error, Result};

/// Weight-sum tolerance for ensembles and trace tolerance for density matrices.
const ENSEMBLE_TOL: f64 = 1e-9;
/// Smallest admissible eigenvalue (PSD up to rounding).
const PSD_TOL: f64 = 1e-10;

/// A mixed state: Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    rho: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity.
    pub fn new(rho: CMatrix) -> Result<Self> {
        let dim = rho.dim();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::InvalidDensity("dimension is not a power of two"));
        }
        let num_qubits = dim.trailing_zeros() as usize;
        check_capacity(num_qubits)?;
        let herm = rho.hermiticity_deviation();
        if herm.is_nan() || herm > PSD_TOL {
            return Err(Error::InvalidDensity("not Hermitian"));
        }
        let trace_err = (rho.trace() - C64::new(1.0, 0.0)).norm();
        if trace_err.is_nan() || trace_err > ENSEMBLE_TOL {
            return Err(Error::InvalidDensity("trace is not 1"));
        }
        if hermitian_eigenvalues(&rho).first().is_some_and(|&e| e < -PSD_TOL) {
            return Err(Error::InvalidDensity("not positive semidefinite"));
        }
        Ok(Self { num_qubits, rho })
    }

    pub fn from_state(state: &StateVector) -> Self {
        Self { num_qubits: state.num_qubits(), rho: CMatrix::outer(state.amplitudes(), state.amplitudes()) }
    }

    /// `I / 2^n`.
    pub fn maximally_mixed(num_qubits: usize) -> Result<Self> {
        check_capacity(num_qubits)?;
        let dim = 1usize << num_qubits;
        let rho = CMatrix::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0));
        Ok(Self { num_qubits, rho })
    }

    /// `Σ w_k ρ_k` over a weighted ensemble of density matrices.
    pub fn mixture(ensemble: &[(f64, DensityMatrix)]) -> Result<Self> {
        let first = ensemble.first().ok_or(Error::InvalidEnsemble { weight_sum: 0.0 })?;
        check_weights(ensemble.iter().map(|(w, _)| *w))?;
        let mut acc = CMatrix::zeros(first.1.rho.dim());
        for (w, r) in ensemble {
            acc = acc.add(&r.rho.scale(C64::new(*w, 0.0)))?;
        }
        Ok(Self { num_qubits: first.1.num_qubits, rho: acc })
    }

    /// `Σ w_k |ψ_k⟩⟨ψ_k|`.
    pub fn average(ensemble: &[(f64, StateVector)]) -> Result<Self> {
        let first = ensemble.first().ok_or(Error::InvalidEnsemble { weight_sum: 0.0 })?;
        check_weights(ensemble.iter().map(|(w, _)| *w))?;
        let n = first.1.num_qubits();
        let dim = first.1.dim();
        let mut acc = CMatrix::zeros(dim);
        for (w, s) in ensemble {
            if s.num_qubits() != n {
                return Err(Error::DimensionMismatch { expected: n, found: s.num_qubits() });
            }
            let a = s.amplitudes();
            for r in 0..dim {
                for c in 0..dim {
                    *acc.get_mut(r, c) += a[r] * a[c].conj() * *w;
                }
            }
        }
        Ok(Self { num_qubits: n, rho: acc })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.rho.get(row, col)
    }

    pub fn trace(&self) -> C64 {
        self.rho.trace()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.rho)
    }

    /// `½ ‖ρ - σ‖₁`.
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        let diff = self.rho.sub(&other.rho)?;
        Ok(0.5 * hermitian_eigenvalues(&diff).iter().map(|e| e.abs()).sum::<f64>())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.rho.max_abs_diff(&other.rho)
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn fidelity_with(&self, state: &StateVector) -> Result<f64> {
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: state.dim() });
        }
        let rv = self.rho.mul_vec(state.amplitudes());
        Ok(state.amplitudes().iter().zip(&rv).map(|(a, b)| a.conj() * b).sum::<C64>().re)
    }

    /// `Tr(ρ O)` for an operator on the whole register.
    pub fn expectation(&self, op: &CMatrix) -> Result<C64> {
        Ok(self.rho.matmul(op)?.trace())
    }

    /// `U ρ U†` with `gate` acting on `targets`.
    pub fn apply(&self, gate: &Unitary, targets: &[usize]) -> Result<Self> {
        if gate.num_qubits() != targets.len() {
            return Err(Error::DimensionMismatch { expected: gate.num_qubits(), found: targets.len() });
        }
        check_targets(targets, self.num_qubits)?;
        let half = self.left_apply(gate.matrix().data(), targets);
        let full = Self { num_qubits: self.num_qubits, rho: half.dagger() }.left_apply(gate.matrix().data(), targets);
        Ok(Self { num_qubits: self.num_qubits, rho: full })
    }

    /// `O ρ` for a `2^k` operator on `targets` (no validity checks).
    pub(crate) fn left_apply(&self, op: &[C64], targets: &[usize]) -> CMatrix {
        let dim = self.dim();
        let mut out = CMatrix::zeros(dim);
        let mut col = alloc::vec![C64::new(0.0, 0.0); dim];
        for c in 0..dim {
            for (r, slot) in col.iter_mut().enumerate() {
                *slot = self.rho.get(r, c);
            }
            for (r, v) in apply_raw(&col, self.num_qubits, op, targets).into_iter().enumerate() {
                *out.get_mut(r, c) = v;
            }
        }
        out
    }

    /// Reduced state on `keep` (in the listed order), tracing out the rest.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        check_targets(keep, self.num_qubits)?;
        let n = self.num_qubits;
        let k = keep.len();
        let keep_bits = |i: usize| keep.iter().fold(0usize, |acc, &q| (acc << 1) | ((i >> (n - 1 - q)) & 1));
        let keep_mask = keep.iter().fold(0usize, |m, &q| m | (1 << (n - 1 - q)));
        let mut out = CMatrix::zeros(1 << k);
        for r in 0..self.dim() {
            for c in 0..self.dim() {
                if r & !keep_mask == c & !keep_mask {
                    *out.get_mut(keep_bits(r), keep_bits(c)) += self.rho.get(r, c);
                }
            }
        }
        Ok(Self { num_qubits: k, rho: out })
    }
}

fn check_weights(weights: impl Iterator<Item = f64>) -> Result<()> {
    let mut sum = 0.0;
    for w in weights {
        if w.is_nan() || w < 0.0 {
            return Err(Error::InvalidEnsemble { weight_sum: f64::NAN });
        }
        sum += w;
    }
    if (sum - 1.0).abs() > ENSEMBLE_TOL {
        return Err(Error::InvalidEnsemble { weight_sum: sum });
    }
    Ok(())
}
