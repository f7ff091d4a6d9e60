//! Closed-form reference curves and exact probability trees for the
//! weak-measurement attacks.

use alloc::vec::Vec;

use super::bb84::prepare;
use crate::qcore::{OrthonormalBasis, StateVector, Unitary};
use crate::rbe::{enc, KeySpace};
use crate::weakmeas::{weak_branches, WeakStrength};
use crate::Result;

/// Reference values as functions of the coupling strength `ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AnalyticCurves {
    /// `1/2 + ε/8`.
    pub bb84_success: f64,
    /// `ε/4`.
    pub bb84_detect: f64,
    /// Reference closed form `1/2 + (6ε² - 3ε³) / (16 - 8ε)` for the DL04 attack. The
    /// exact two-coupling enumeration in [`dl04_attack_tree`] gives
    /// `1/2 + ε²/2` instead.
    pub dl04_success: f64,
    /// `ε/4`.
    pub dl04_detect: f64,
}

pub fn analytic_curves(epsilon: f64) -> Result<AnalyticCurves> {
    let e = WeakStrength::new(epsilon)?.epsilon();
    Ok(AnalyticCurves {
        bb84_success: 0.5 + e / 8.0,
        bb84_detect: e / 4.0,
        dl04_success: 0.5 + (6.0 * e * e - 3.0 * e * e * e) / (16.0 - 8.0 * e),
        dl04_detect: e / 4.0,
    })
}

/// One leaf of the BB84 attack tree, conditioned on `a = c`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Bb84AttackLeaf {
    pub a: u8,
    /// Alice's bit.
    pub b: u8,
    /// Eve's ancilla outcome.
    pub y: u8,
    /// Bob's outcome.
    pub x: u8,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Bb84AttackTree {
    pub epsilon: f64,
    pub leaves: Vec<Bb84AttackLeaf>,
}

impl Bb84AttackTree {
    pub fn total_mass(&self) -> f64 {
        self.leaves.iter().map(|l| l.probability).sum()
    }

    /// Mass of `b = x = y`.
    pub fn eve_correct_mass(&self) -> f64 {
        self.leaves.iter().filter(|l| l.b == l.x && l.b == l.y).map(|l| l.probability).sum()
    }

    /// Mass of `x ≠ b`.
    pub fn bob_error_mass(&self) -> f64 {
        self.leaves.iter().filter(|l| l.b != l.x).map(|l| l.probability).sum()
    }

    /// Mass of a single `(a, b, y, x)` leaf (0 if absent).
    pub fn leaf(&self, a: u8, b: u8, y: u8, x: u8) -> f64 {
        self.leaves.iter().filter(|l| (l.a, l.b, l.y, l.x) == (a, b, y, x)).map(|l| l.probability).sum()
    }
}

/// The exact outcome tree of the single-coupling BB84 attack with `a = c`.
pub fn fig8_tree(epsilon: f64) -> Result<Bb84AttackTree> {
    let s = WeakStrength::new(epsilon)?;
    let mut leaves = Vec::with_capacity(16);
    for a in 0..2u8 {
        let bob_basis = if a == 1 { OrthonormalBasis::hadamard() } else { OrthonormalBasis::computational() };
        for b in 0..2u8 {
            for br in weak_branches(&prepare(a, b), 0, s)? {
                for x in 0..2u8 {
                    let px = br.post_state.outcome_probability(0, &bob_basis, x)?;
                    leaves.push(Bb84AttackLeaf { a, b, y: br.ancilla_bit, x, probability: 0.25 * br.probability * px });
                }
            }
        }
    }
    Ok(Bb84AttackTree { epsilon: s.epsilon(), leaves })
}

/// Exact statistics of a two-coupling attack on a two-way protocol,
/// conditioned on the objective qubit being used for the key.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TwoLegAttackTree {
    pub epsilon: f64,
    /// `P(e1 ⊕ e2 = Alice's bit)`.
    pub sender_match: f64,
    /// `P(e1 ⊕ e2 = Alice's bit = Bob's decoded bit)`.
    pub strict_win: f64,
    /// `P(Bob's decoded bit ≠ Alice's bit)`.
    pub bob_error: f64,
}

#[derive(Default)]
struct TwoLegAcc {
    sender: f64,
    strict: f64,
    error: f64,
}

impl TwoLegAcc {
    /// Runs both couplings around `flip` and Bob's final measurement in `basis`.
    /// `decode` maps Bob's raw outcome to his key bit.
    #[allow(clippy::too_many_arguments)]
    fn add(
        &mut self,
        weight: f64,
        start: &StateVector,
        flip: Option<&Unitary>,
        basis: &OrthonormalBasis,
        message: u8,
        decode: impl Fn(u8) -> u8,
        s: WeakStrength,
    ) -> Result<()> {
        for b1 in weak_branches(start, 0, s)? {
            let mid = match flip {
                Some(u) => b1.post_state.apply(u, &[0])?,
                None => b1.post_state,
            };
            for b2 in weak_branches(&mid, 0, s)? {
                let p = weight * b1.probability * b2.probability;
                let guess = b1.ancilla_bit ^ b2.ancilla_bit;
                for y in 0..2u8 {
                    let py = p * b2.post_state.outcome_probability(0, basis, y)?;
                    let bob = decode(y);
                    if guess == message {
                        self.sender += py;
                        if bob == message {
                            self.strict += py;
                        }
                    }
                    if bob != message {
                        self.error += py;
                    }
                }
            }
        }
        Ok(())
    }

    fn finish(self, epsilon: f64) -> TwoLegAttackTree {
        TwoLegAttackTree { epsilon, sender_match: self.sender, strict_win: self.strict, bob_error: self.error }
    }
}

/// Exact branch enumeration of the DL04 attack over Bob's `(a, b)` and
/// Alice's `c`.
pub fn dl04_attack_tree(epsilon: f64) -> Result<TwoLegAttackTree> {
    let s = WeakStrength::new(epsilon)?;
    let u = Unitary::dl04_u();
    let mut acc = TwoLegAcc::default();
    for a in 0..2u8 {
        let basis = if a == 1 { OrthonormalBasis::hadamard() } else { OrthonormalBasis::computational() };
        for b in 0..2u8 {
            for c in 0..2u8 {
                let flip = (c == 1).then_some(&u);
                acc.add(0.125, &prepare(a, b), flip, &basis, c, |y| y ^ b, s)?;
            }
        }
    }
    Ok(acc.finish(s.epsilon()))
}

/// Exact branch enumeration of the two-coupling attack on RBE-QKD, averaged
/// over the `2N` keys of a discrete key space, Bob's `b′` and Alice's `b`.
pub fn rbe_attack_tree(epsilon: f64, key_space_n: u32) -> Result<TwoLegAttackTree> {
    let s = WeakStrength::new(epsilon)?;
    let keys = KeySpace::discrete(key_space_n)?.keys().expect("discrete");
    let x = Unitary::x();
    let weight = 0.25 / keys.len() as f64;
    let mut acc = TwoLegAcc::default();
    for key in &keys {
        let basis = key.basis();
        for bp in 0..2u8 {
            let start = enc(bp, key).into_state();
            for b in 0..2u8 {
                let flip = (b == 1).then_some(&x);
                acc.add(weight, &start, flip, &basis, b, |y| y ^ bp, s)?;
            }
        }
    }
    Ok(acc.finish(s.epsilon()))
}
