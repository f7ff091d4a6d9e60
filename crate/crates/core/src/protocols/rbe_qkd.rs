//! QKD built on random-basis encryption.
//!
//! 1. Bob draws `b′ ∈ {0,1}^{2n}` and encrypts every bit under its own fresh key.
//! 2. He sends the ciphertexts to Alice.
//! 3. Alice picks the check positions; Bob reveals their keys.
//! 4. Alice decrypts those, publishes the results and Bob compares them with `b′`.
//! 5. On each remaining position Alice applies a NOT iff her bit `b_i` is 1.
//! 6. She returns the qubits.
//! 7. Bob decrypts to `b″` and outputs `b″ ⊕ b′`, which equals `b`.

use alloc::vec::Vec;

use rand::Rng;

use super::eve::Interceptor;
use super::transcript::{Announcement, EveRecord, EventKind, EventLog, Party, RoundRecord, RoundRole, Transcript};
use super::{choose_checks, EveStrategy, Protocol, ProtocolConfig};
use crate::rbe::{dec, enc, eval_not, gen, Ciphertext};
use crate::Result;

pub fn run_rbe_qkd<R: Rng + ?Sized>(config: &ProtocolConfig, eve: &EveStrategy, rng: &mut R) -> Result<Transcript> {
    config.expect(Protocol::RbeQkd)?;
    let transmissions = config.transmissions();
    let mut log = EventLog::default();
    let mut interceptor = Interceptor::new(eve, transmissions, rng);
    let mut rounds = Vec::with_capacity(transmissions);
    let mut held = Vec::with_capacity(transmissions);

    for index in 0..transmissions {
        let bit = u8::from(rng.random::<bool>());
        let key = gen(&config.key_space, rng)?;
        let mut r = RoundRecord::new(index, bit);
        r.key = Some(key);
        log.push(&mut r, EventKind::Sent { leg: 0, by: Party::Bob });
        let q = interceptor.intercept(&mut r, 0, enc(bit, &key).into_state(), &mut log, rng)?;
        held.push(Ciphertext::from_state(q)?);
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
        log.push(r, EventKind::Announced { by: Party::Bob, what: Announcement::Key });
        let m = dec(&held[i], r.key.as_ref().expect("encrypted"), rng);
        log.push(r, EventKind::Measured { leg: 0, by: Party::Alice });
        log.push(r, EventKind::Announced { by: Party::Alice, what: Announcement::Outcome });
        r.outcome = Some(m);
        r.compared = true;
        r.mismatch = m != r.prep_bit;
        aborted |= r.mismatch;
    }

    let (mut alice_key, mut bob_key) = (Vec::new(), Vec::new());
    if !aborted {
        for (r, c) in rounds.iter_mut().zip(held) {
            if r.role != RoundRole::Key {
                continue;
            }
            let b = u8::from(rng.random::<bool>());
            let c = if b == 1 { eval_not(&c) } else { c };
            log.push(r, EventKind::Sent { leg: 1, by: Party::Alice });
            let c = Ciphertext::from_state(interceptor.intercept(r, 1, c.into_state(), &mut log, rng)?)?;
            log.push(r, EventKind::Delivered { leg: 1, to: Party::Bob });
            let b2 = dec(&c, r.key.as_ref().expect("encrypted"), rng);
            log.push(r, EventKind::Measured { leg: 1, by: Party::Bob });
            r.message_bit = Some(b);
            r.decoded = Some(b2 ^ r.prep_bit);
            alice_key.push(b);
            bob_key.push(b2 ^ r.prep_bit);
        }
    }

    let mut t = Transcript { protocol: Protocol::RbeQkd, rounds, alice_key, bob_key, aborted, eve: None };
    t.eve = interceptor.finish().map(|(target, outcomes, guess)| {
        let output = if t.aborted { None } else { t.key_position(target).map(|i| (guess, i)) };
        EveRecord { target, outcomes, output }
    });
    Ok(t)
}
