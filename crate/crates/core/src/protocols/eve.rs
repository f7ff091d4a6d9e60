use alloc::vec::Vec;

use rand::Rng;

use super::transcript::{EventKind, EventLog, RoundRecord};
use crate::qcore::{OrthonormalBasis, StateVector};
use crate::weakmeas::{weak_measure, WeakStrength};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum EveKind {
    None,
    /// One weak coupling on the first leg of the objective qubit.
    WmBb84,
    /// Weak couplings on both legs of the objective qubit; Eve outputs `e1 ⊕ e2`.
    WmDl04,
    /// The two-leg tactic applied to RBE-QKD.
    WmRbe,
    /// Computational-basis measure-and-resend on every qubit, every leg.
    InterceptResend,
}

/// An eavesdropping strategy. The objective qubit is chosen uniformly among
/// the transmissions.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EveStrategy {
    pub kind: EveKind,
    pub epsilon: WeakStrength,
}

pub fn no_eve() -> EveStrategy {
    EveStrategy { kind: EveKind::None, epsilon: WeakStrength::new(0.0).expect("in range") }
}

pub fn intercept_resend() -> EveStrategy {
    EveStrategy { kind: EveKind::InterceptResend, epsilon: WeakStrength::new(1.0).expect("in range") }
}

pub fn wm_attack_bb84(epsilon: f64) -> Result<EveStrategy> {
    Ok(EveStrategy { kind: EveKind::WmBb84, epsilon: WeakStrength::new(epsilon)? })
}

pub fn wm_attack_dl04(epsilon: f64) -> Result<EveStrategy> {
    Ok(EveStrategy { kind: EveKind::WmDl04, epsilon: WeakStrength::new(epsilon)? })
}

pub fn wm_attack_rbe(epsilon: f64) -> Result<EveStrategy> {
    Ok(EveStrategy { kind: EveKind::WmRbe, epsilon: WeakStrength::new(epsilon)? })
}

/// Eve's in-flight state during a run.
pub(crate) struct Interceptor {
    strategy: EveStrategy,
    target: Option<usize>,
    outcomes: Vec<u8>,
}

impl Interceptor {
    pub(crate) fn new<R: Rng + ?Sized>(strategy: &EveStrategy, transmissions: usize, rng: &mut R) -> Self {
        let target = (strategy.kind != EveKind::None).then(|| rng.random_range(0..transmissions));
        Self { strategy: *strategy, target, outcomes: Vec::new() }
    }

    fn touches(&self, round: usize, leg: u8) -> bool {
        match self.strategy.kind {
            EveKind::None => false,
            EveKind::WmBb84 => leg == 0 && Some(round) == self.target,
            EveKind::WmDl04 | EveKind::WmRbe => Some(round) == self.target,
            EveKind::InterceptResend => true,
        }
    }

    /// Passes a qubit in flight through Eve.
    pub(crate) fn intercept<R: Rng + ?Sized>(
        &mut self,
        record: &mut RoundRecord,
        leg: u8,
        qubit: StateVector,
        log: &mut EventLog,
        rng: &mut R,
    ) -> Result<StateVector> {
        if !self.touches(record.index, leg) {
            return Ok(qubit);
        }
        log.push(record, EventKind::Intercepted { leg });
        let (bit, out) = match self.strategy.kind {
            EveKind::InterceptResend => {
                let (bit, post) = qubit.measure_in_basis(0, &OrthonormalBasis::computational(), rng)?;
                (bit, post)
            }
            _ => {
                let o = weak_measure(&qubit, 0, self.strategy.epsilon, rng)?;
                (o.ancilla_bit, o.post_state)
            }
        };
        if Some(record.index) == self.target {
            self.outcomes.push(bit);
        }
        Ok(out)
    }

    /// The recorded target and outcomes; Eve's guess is the XOR of her outcomes.
    pub(crate) fn finish(self) -> Option<(usize, Vec<u8>, u8)> {
        let guess = self.outcomes.iter().fold(0, |acc, b| acc ^ b);
        self.target.map(|t| (t, self.outcomes, guess))
    }
}
