//! Weak measurement through an ancilla.
//!
//! `W_ε = √ε · i · CNOT + √(1-ε) · I⊗I` couples a target qubit (control) to a
//! fresh `|0⟩` ancilla (target). Measuring the ancilla in the computational
//! basis yields 1 with probability `ε · P(target = 1)` and disturbs the
//! target by an amount that grows with `ε`.

use alloc::vec::Vec;

use rand::Rng;

use crate::qcore::{CMatrix, OrthonormalBasis, StateVector, Unitary, C64};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "f64", into = "f64"))]
pub struct WeakStrength(f64);

impl WeakStrength {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::InvalidStrength(epsilon));
        }
        Ok(Self(epsilon))
    }

    pub fn epsilon(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for WeakStrength {
    type Error = Error;

    fn try_from(epsilon: f64) -> Result<Self> {
        Self::new(epsilon)
    }
}

impl From<WeakStrength> for f64 {
    fn from(s: WeakStrength) -> f64 {
        s.0
    }
}

pub fn w_epsilon(s: WeakStrength) -> Unitary {
    let eps = s.epsilon();
    let a = Unitary::cnot().matrix().scale(C64::new(0.0, libm::sqrt(eps)));
    let b = CMatrix::identity(4).scale(C64::new(libm::sqrt(1.0 - eps), 0.0));
    Unitary::from_matrix(a.add(&b).expect("4x4")).expect("W_eps is unitary for eps in [0, 1]")
}

/// A sampled weak-measurement result.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakOutcome {
    pub ancilla_bit: u8,
    /// Register after the ancilla has been measured and removed.
    pub post_state: StateVector,
}

/// One exact branch of a weak measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakBranch {
    pub ancilla_bit: u8,
    pub probability: f64,
    pub post_state: StateVector,
}

fn couple(state: &StateVector, target: usize, s: WeakStrength) -> Result<StateVector> {
    if target >= state.num_qubits() {
        return Err(Error::QubitOutOfRange { qubit: target, num_qubits: state.num_qubits() });
    }
    let ancilla = state.num_qubits();
    state.tensor(&StateVector::zero(1)?)?.apply(&w_epsilon(s), &[target, ancilla])
}

/// Samples the ancilla outcome and returns the residual register.
pub fn weak_measure<R: Rng + ?Sized>(
    state: &StateVector,
    target: usize,
    s: WeakStrength,
    rng: &mut R,
) -> Result<WeakOutcome> {
    let coupled = couple(state, target, s)?;
    let (ancilla_bit, post_state) =
        coupled.measure_and_discard(state.num_qubits(), &OrthonormalBasis::computational(), rng)?;
    Ok(WeakOutcome { ancilla_bit, post_state })
}

/// Both outcome branches with their exact probabilities; zero-probability
/// branches are omitted.
pub fn weak_branches(state: &StateVector, target: usize, s: WeakStrength) -> Result<Vec<WeakBranch>> {
    let coupled = couple(state, target, s)?;
    let mut out = Vec::with_capacity(2);
    for bit in 0..2u8 {
        if let Some((probability, post_state)) =
            coupled.discard_branch(state.num_qubits(), &OrthonormalBasis::computational(), bit)?
        {
            out.push(WeakBranch { ancilla_bit: bit, probability, post_state });
        }
    }
    Ok(out)
}
