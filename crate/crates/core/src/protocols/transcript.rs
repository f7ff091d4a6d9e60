use alloc::vec::Vec;

use super::Protocol;
use crate::rbe::RbeKey;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Party {
    Alice,
    Bob,
    Eve,
}

/// What a public announcement disclosed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Announcement {
    PrepBasis,
    MeasBasis,
    CheckSelection,
    Key,
    Outcome,
    PrepBit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum EventKind {
    Sent { leg: u8, by: Party },
    Intercepted { leg: u8 },
    Delivered { leg: u8, to: Party },
    ReceiptConfirmed,
    Measured { leg: u8, by: Party },
    Announced { by: Party, what: Announcement },
}

/// An event with its position in the run-wide ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Event {
    pub seq: u64,
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub kind: EventKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum RoundRole {
    /// Sifted out (BB84 with `a ≠ c`).
    Discarded,
    /// Consumed by the eavesdropping check.
    Check,
    /// Contributes one bit to the final key.
    Key,
}

/// Everything that happened to one transmission.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RoundRecord {
    pub index: usize,
    /// Preparation basis `a` (BB84, DL04).
    pub prep_basis: Option<u8>,
    /// Prepared bit: Alice's `b` in BB84, Bob's `b` in DL04, Bob's `b′` in RBE-QKD.
    pub prep_bit: u8,
    /// Encryption key of this position (RBE-QKD).
    pub key: Option<RbeKey>,
    /// Bob's basis `c` in BB84, Alice's check basis in DL04.
    pub meas_basis: Option<u8>,
    /// Bob's outcome in BB84, Alice's check outcome in DL04 and RBE-QKD.
    pub outcome: Option<u8>,
    /// Alice's bit on the return leg (DL04 `c`, RBE-QKD `b_i`).
    pub message_bit: Option<u8>,
    /// Bob's decoded bit after the return leg.
    pub decoded: Option<u8>,
    pub role: RoundRole,
    /// Whether a check on this round could be compared (same basis).
    pub compared: bool,
    pub mismatch: bool,
    pub events: Vec<Event>,
}

impl RoundRecord {
    pub(crate) fn new(index: usize, prep_bit: u8) -> Self {
        Self {
            index,
            prep_basis: None,
            prep_bit,
            key: None,
            meas_basis: None,
            outcome: None,
            message_bit: None,
            decoded: None,
            role: RoundRole::Key,
            compared: false,
            mismatch: false,
            events: Vec::new(),
        }
    }

    fn first(&self, pred: impl Fn(&EventKind) -> bool) -> Option<u64> {
        self.events.iter().find(|e| pred(&e.kind)).map(|e| e.seq)
    }
}

/// Eve's view of a run.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EveRecord {
    /// Transmission index of the objective qubit.
    pub target: usize,
    /// Ancilla or measurement outcomes on the objective qubit, one per leg touched.
    pub outcomes: Vec<u8>,
    /// `(e, i)`: guessed bit and its position in the final key; `None` is ⊥.
    pub output: Option<(u8, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Transcript {
    pub protocol: Protocol,
    pub rounds: Vec<RoundRecord>,
    pub alice_key: Vec<u8>,
    pub bob_key: Vec<u8>,
    pub aborted: bool,
    pub eve: Option<EveRecord>,
}

/// An announcement or measurement that happened before the information it
/// depends on was available.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CausalityViolation {
    pub round: usize,
    pub event: Event,
}

impl Transcript {
    pub fn key_len(&self) -> usize {
        self.alice_key.len()
    }

    /// Rounds that survived sifting (check or key).
    pub fn usable_rounds(&self) -> usize {
        self.rounds.iter().filter(|r| r.role != RoundRole::Discarded).count()
    }

    pub fn mismatches(&self) -> usize {
        self.rounds.iter().filter(|r| r.mismatch).count()
    }

    pub fn key_position(&self, round: usize) -> Option<usize> {
        if self.rounds.get(round)?.role != RoundRole::Key {
            return None;
        }
        Some(self.rounds[..round].iter().filter(|r| r.role == RoundRole::Key).count())
    }

    /// Checks, per round, that every announcement and first-leg measurement
    /// comes after the first-leg delivery, that basis reveals in the informed
    /// variant follow the receipt confirmation, and that return-leg
    /// measurements follow the return-leg delivery.
    pub fn check_causality(&self) -> core::result::Result<(), CausalityViolation> {
        for r in &self.rounds {
            let delivered = r.first(|k| matches!(k, EventKind::Delivered { leg: 0, .. }));
            let returned = r.first(|k| matches!(k, EventKind::Delivered { leg: 1, .. }));
            let receipt = r.first(|k| matches!(k, EventKind::ReceiptConfirmed));
            for e in &r.events {
                let after = |bound: Option<u64>| bound.is_some_and(|b| e.seq > b);
                let ok = match e.kind {
                    EventKind::Announced { what, .. } => {
                        after(delivered) && (what != Announcement::PrepBasis || receipt.is_none() || after(receipt))
                    }
                    EventKind::Measured { leg: 0, .. } | EventKind::ReceiptConfirmed => after(delivered),
                    EventKind::Measured { .. } => after(returned),
                    EventKind::Delivered { leg: 1, .. } | EventKind::Sent { leg: 1, .. } => after(delivered),
                    _ => true,
                };
                if !ok {
                    return Err(CausalityViolation { round: r.index, event: *e });
                }
            }
        }
        Ok(())
    }
}

/// Hands out strictly increasing sequence numbers.
#[derive(Debug, Default)]
pub(crate) struct EventLog {
    next: u64,
}

impl EventLog {
    pub(crate) fn push(&mut self, round: &mut RoundRecord, kind: EventKind) {
        round.events.push(Event { seq: self.next, kind });
        self.next += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn transcript(events: &[EventKind]) -> Transcript {
        let mut log = EventLog::default();
        let mut r = RoundRecord::new(0, 0);
        for &k in events {
            log.push(&mut r, k);
        }
        Transcript {
            protocol: Protocol::Bb84,
            rounds: alloc::vec![r],
            alice_key: Vec::new(),
            bob_key: Vec::new(),
            aborted: false,
            eve: None,
        }
    }

    #[test]
    fn ordered_round_passes() {
        let t = transcript(&[
            EventKind::Sent { leg: 0, by: Party::Alice },
            EventKind::Delivered { leg: 0, to: Party::Bob },
            EventKind::ReceiptConfirmed,
            EventKind::Announced { by: Party::Alice, what: Announcement::PrepBasis },
            EventKind::Measured { leg: 0, by: Party::Bob },
        ]);
        assert!(t.check_causality().is_ok());
    }

    #[test]
    fn early_announcement_is_flagged() {
        let t = transcript(&[
            EventKind::Sent { leg: 0, by: Party::Alice },
            EventKind::Announced { by: Party::Alice, what: Announcement::PrepBasis },
            EventKind::Delivered { leg: 0, to: Party::Bob },
        ]);
        let v = t.check_causality().unwrap_err();
        assert_eq!(v.event.seq, 1);
    }

    #[test]
    fn basis_before_receipt_is_flagged() {
        let t = transcript(&[
            EventKind::Delivered { leg: 0, to: Party::Bob },
            EventKind::Announced { by: Party::Alice, what: Announcement::PrepBasis },
            EventKind::ReceiptConfirmed,
        ]);
        assert!(t.check_causality().is_err());
    }
}
