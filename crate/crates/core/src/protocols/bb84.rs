//! BB84 and its informed-basis variant.
//!
//! Alice sends `H^a X^b |0⟩`. In plain BB84 Bob measures in a random basis
//! `c` and both bases are announced afterwards; rounds with `a ≠ c` are
//! discarded. In the informed variant Bob confirms receipt, Alice then
//! reveals `a` and Bob measures in it, so no round is discarded.

use alloc::vec::Vec;

use rand::Rng;

use super::eve::Interceptor;
use super::transcript::{Announcement, EveRecord, EventKind, EventLog, Party, RoundRecord, RoundRole, Transcript};
use super::{choose_checks, EveStrategy, Protocol, ProtocolConfig};
use crate::qcore::{OrthonormalBasis, StateVector, Unitary};
use crate::Result;

/// `H^a X^b |0⟩`.
pub(crate) fn prepare(a: u8, b: u8) -> StateVector {
    let q = StateVector::basis_state(1, usize::from(b)).expect("one qubit");
    if a == 1 {
        q.apply(&Unitary::h(), &[0]).expect("one qubit")
    } else {
        q
    }
}

/// Applies `H^c` and measures in the computational basis.
pub(crate) fn measure<R: Rng + ?Sized>(q: &StateVector, c: u8, rng: &mut R) -> Result<u8> {
    let q = if c == 1 { q.apply(&Unitary::h(), &[0])? } else { q.clone() };
    Ok(q.measure_in_basis(0, &OrthonormalBasis::computational(), rng)?.0)
}

fn random_bit<R: Rng + ?Sized>(rng: &mut R) -> u8 {
    u8::from(rng.random::<bool>())
}

pub fn run_bb84<R: Rng + ?Sized>(config: &ProtocolConfig, eve: &EveStrategy, rng: &mut R) -> Result<Transcript> {
    config.expect(Protocol::Bb84)?;
    run(config, eve, false, rng)
}

pub fn run_bb84_informed<R: Rng + ?Sized>(
    config: &ProtocolConfig,
    eve: &EveStrategy,
    rng: &mut R,
) -> Result<Transcript> {
    config.expect(Protocol::Bb84Informed)?;
    run(config, eve, true, rng)
}

fn run<R: Rng + ?Sized>(config: &ProtocolConfig, eve: &EveStrategy, informed: bool, rng: &mut R) -> Result<Transcript> {
    let transmissions = config.transmissions();
    let mut log = EventLog::default();
    let mut interceptor = Interceptor::new(eve, transmissions, rng);
    let mut rounds = Vec::with_capacity(transmissions);

    for index in 0..transmissions {
        let (a, b) = (random_bit(rng), random_bit(rng));
        let mut r = RoundRecord::new(index, b);
        r.prep_basis = Some(a);
        log.push(&mut r, EventKind::Sent { leg: 0, by: Party::Alice });
        let q = interceptor.intercept(&mut r, 0, prepare(a, b), &mut log, rng)?;
        log.push(&mut r, EventKind::Delivered { leg: 0, to: Party::Bob });
        let c = if informed {
            log.push(&mut r, EventKind::ReceiptConfirmed);
            log.push(&mut r, EventKind::Announced { by: Party::Alice, what: Announcement::PrepBasis });
            a
        } else {
            random_bit(rng)
        };
        r.meas_basis = Some(c);
        r.outcome = Some(measure(&q, c, rng)?);
        log.push(&mut r, EventKind::Measured { leg: 0, by: Party::Bob });
        rounds.push(r);
    }

    if !informed {
        for r in &mut rounds {
            log.push(r, EventKind::Announced { by: Party::Alice, what: Announcement::PrepBasis });
            log.push(r, EventKind::Announced { by: Party::Bob, what: Announcement::MeasBasis });
            if r.prep_basis != r.meas_basis {
                r.role = RoundRole::Discarded;
            }
        }
    }

    let usable: Vec<usize> = rounds.iter().filter(|r| r.role != RoundRole::Discarded).map(|r| r.index).collect();
    let checks = choose_checks(&usable, config.check_count(usable.len()), rng);
    let mut aborted = false;
    for &i in &checks {
        let r = &mut rounds[i];
        r.role = RoundRole::Check;
        r.compared = true;
        r.mismatch = r.outcome != Some(r.prep_bit);
        aborted |= r.mismatch;
        log.push(r, EventKind::Announced { by: Party::Alice, what: Announcement::CheckSelection });
        log.push(r, EventKind::Announced { by: Party::Bob, what: Announcement::Outcome });
        log.push(r, EventKind::Announced { by: Party::Alice, what: Announcement::PrepBit });
    }

    let (mut alice_key, mut bob_key) = (Vec::new(), Vec::new());
    if !aborted {
        for r in rounds.iter().filter(|r| r.role == RoundRole::Key) {
            alice_key.push(r.prep_bit);
            bob_key.push(r.outcome.expect("measured"));
        }
    }

    let mut t = Transcript { protocol: config.protocol, rounds, alice_key, bob_key, aborted, eve: None };
    t.eve = interceptor.finish().map(|(target, outcomes, guess)| {
        let output = if t.aborted { None } else { t.key_position(target).map(|i| (guess, i)) };
        EveRecord { target, outcomes, output }
    });
    Ok(t)
}
