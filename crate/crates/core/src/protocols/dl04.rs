//! The two-way DL04 protocol.
//!
//! Bob sends `H^a X^b |0⟩`. Alice measures a random subset for the
//! eavesdropping check, encodes her bit `c` on each remaining qubit by
//! applying `U^c` with `U = [[0, 1], [-1, 0]]` (a bit flip in either basis, up
//! to phase) and returns it. Bob measures in basis `a` and recovers
//! `c = outcome ⊕ b`.

use alloc::vec::Vec;

use rand::Rng;

use super::bb84::{measure, prepare};
use super::eve::Interceptor;
use super::transcript::{Announcement, EveRecord, EventKind, EventLog, Party, RoundRecord, RoundRole, Transcript};
use super::{choose_checks, EveStrategy, Protocol, ProtocolConfig};
use crate::qcore::Unitary;
use crate::Result;

pub fn run_dl04<R: Rng + ?Sized>(config: &ProtocolConfig, eve: &EveStrategy, rng: &mut R) -> Result<Transcript> {
    config.expect(Protocol::Dl04)?;
    let transmissions = config.transmissions();
    let mut log = EventLog::default();
    let mut interceptor = Interceptor::new(eve, transmissions, rng);
    let mut rounds = Vec::with_capacity(transmissions);
    let mut held = Vec::with_capacity(transmissions);

    for index in 0..transmissions {
        let (a, b) = (u8::from(rng.random::<bool>()), u8::from(rng.random::<bool>()));
        let mut r = RoundRecord::new(index, b);
        r.prep_basis = Some(a);
        log.push(&mut r, EventKind::Sent { leg: 0, by: Party::Bob });
        held.push(interceptor.intercept(&mut r, 0, prepare(a, b), &mut log, rng)?);
        log.push(&mut r, EventKind::Delivered { leg: 0, to: Party::Alice });
        rounds.push(r);
    }

    let all: Vec<usize> = (0..transmissions).collect();
    let checks = choose_checks(&all, config.check_count(transmissions), rng);
    let mut aborted = false;
    for &i in &checks {
        let r = &mut rounds[i];
        r.role = RoundRole::Check;
        log.push(r, EventKind::Announced { by: Party::Alice, what: Announcement::CheckSelection });
        let basis = if config.informed_check {
            log.push(r, EventKind::Announced { by: Party::Bob, what: Announcement::PrepBasis });
            r.prep_basis.expect("prepared")
        } else {
            u8::from(rng.random::<bool>())
        };
        r.meas_basis = Some(basis);
        r.outcome = Some(measure(&held[i], basis, rng)?);
        log.push(r, EventKind::Measured { leg: 0, by: Party::Alice });
        log.push(r, EventKind::Announced { by: Party::Alice, what: Announcement::Outcome });
        if !config.informed_check {
            log.push(r, EventKind::Announced { by: Party::Bob, what: Announcement::PrepBasis });
        }
        r.compared = r.meas_basis == r.prep_basis;
        r.mismatch = r.compared && r.outcome != Some(r.prep_bit);
        aborted |= r.mismatch;
    }

    let (mut alice_key, mut bob_key) = (Vec::new(), Vec::new());
    if !aborted {
        let u = Unitary::dl04_u();
        for (r, q) in rounds.iter_mut().zip(held) {
            if r.role != RoundRole::Key {
                continue;
            }
            let c = u8::from(rng.random::<bool>());
            let q = if c == 1 { q.apply(&u, &[0])? } else { q };
            log.push(r, EventKind::Sent { leg: 1, by: Party::Alice });
            let q = interceptor.intercept(r, 1, q, &mut log, rng)?;
            log.push(r, EventKind::Delivered { leg: 1, to: Party::Bob });
            let y = measure(&q, r.prep_basis.expect("prepared"), rng)?;
            log.push(r, EventKind::Measured { leg: 1, by: Party::Bob });
            r.message_bit = Some(c);
            r.decoded = Some(y ^ r.prep_bit);
            alice_key.push(c);
            bob_key.push(y ^ r.prep_bit);
        }
    }

    let mut t = Transcript { protocol: Protocol::Dl04, rounds, alice_key, bob_key, aborted, eve: None };
    t.eve = interceptor.finish().map(|(target, outcomes, guess)| {
        let output = if t.aborted { None } else { t.key_position(target).map(|i| (guess, i)) };
        EveRecord { target, outcomes, output }
    });
    Ok(t)
}
