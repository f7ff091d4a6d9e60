//! The key-bit guessing game.
//!
//! Each trial is one independent protocol run with Eve attached. Eve wins a
//! trial when she outputs `(e, i)` with `e` equal to both Alice's and Bob's
//! `i`-th key bit. Trials where Eve outputs ⊥ or the run aborts do not count
//! towards her success rate.

use rand::Rng;

use super::eve::{EveKind, EveStrategy};
use super::transcript::{RoundRole, Transcript};
use super::{run_protocol, Protocol, ProtocolConfig};
use crate::stats::{binomial_stderr, ratio};
use crate::stream::{domain, Tally, TrialRunner};
use crate::{Error, Result};

/// Integer counts over a batch of games.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GameTally {
    pub trials: u64,
    pub aborts: u64,
    /// Trials where Eve output a pair rather than ⊥.
    pub eve_outputs: u64,
    /// Outputs with `e = a_i = b_i`.
    pub eve_correct: u64,
    /// Outputs with `e` equal to the sender's key bit (Alice's).
    pub sender_match: u64,
    pub target_checked: u64,
    /// Checked targets whose check could be compared.
    pub target_compared: u64,
    /// Compared targets that showed a mismatch.
    pub detected: u64,
    /// Outputs where Alice's and Bob's key bits differ at `i`.
    pub target_key_errors: u64,
    /// Non-aborted runs whose keys differ.
    pub key_agreement_failures: u64,
    pub usable_rounds: u64,
    pub transmissions: u64,
}

impl GameTally {
    pub fn observe(&mut self, t: &Transcript) {
        self.trials += 1;
        self.aborts += u64::from(t.aborted);
        self.usable_rounds += t.usable_rounds() as u64;
        self.transmissions += t.rounds.len() as u64;
        if !t.aborted && t.alice_key != t.bob_key {
            self.key_agreement_failures += 1;
        }
        let Some(eve) = &t.eve else { return };
        let target = &t.rounds[eve.target];
        if target.role == RoundRole::Check {
            self.target_checked += 1;
            if target.compared {
                self.target_compared += 1;
                self.detected += u64::from(target.mismatch);
            }
        }
        if let Some((e, i)) = eve.output {
            let (a, b) = (t.alice_key[i], t.bob_key[i]);
            self.eve_outputs += 1;
            self.eve_correct += u64::from(e == a && e == b);
            self.sender_match += u64::from(e == a);
            self.target_key_errors += u64::from(a != b);
        }
    }
}

impl Tally for GameTally {
    fn merge(&mut self, o: Self) {
        self.trials += o.trials;
        self.aborts += o.aborts;
        self.eve_outputs += o.eve_outputs;
        self.eve_correct += o.eve_correct;
        self.sender_match += o.sender_match;
        self.target_checked += o.target_checked;
        self.target_compared += o.target_compared;
        self.detected += o.detected;
        self.target_key_errors += o.target_key_errors;
        self.key_agreement_failures += o.key_agreement_failures;
        self.usable_rounds += o.usable_rounds;
        self.transmissions += o.transmissions;
    }
}

/// Game counts with derived rates. Rates with an empty denominator are NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GameResult {
    pub protocol: Protocol,
    pub attack: EveKind,
    pub epsilon: f64,
    pub counts: GameTally,
    /// `eve_correct / eve_outputs`.
    pub conditional_success: f64,
    pub standard_error: f64,
    /// `|conditional_success - 1/2|`.
    pub advantage: f64,
    pub sender_match_rate: f64,
    pub sender_match_stderr: f64,
    /// `detected / target_compared`.
    pub detection_rate: f64,
    pub detection_stderr: f64,
    /// `target_key_errors / eve_outputs`.
    pub bob_error_rate: f64,
    /// `usable_rounds / transmissions`.
    pub usable_fraction: f64,
}

impl GameResult {
    pub fn from_tally(protocol: Protocol, eve: &EveStrategy, counts: GameTally) -> Self {
        let success = ratio(counts.eve_correct, counts.eve_outputs);
        let sender = ratio(counts.sender_match, counts.eve_outputs);
        let detection = ratio(counts.detected, counts.target_compared);
        Self {
            protocol,
            attack: eve.kind,
            epsilon: eve.epsilon.epsilon(),
            counts,
            conditional_success: success,
            standard_error: binomial_stderr(success, counts.eve_outputs),
            advantage: (success - 0.5).abs(),
            sender_match_rate: sender,
            sender_match_stderr: binomial_stderr(sender, counts.eve_outputs),
            detection_rate: detection,
            detection_stderr: binomial_stderr(detection, counts.target_compared),
            bob_error_rate: ratio(counts.target_key_errors, counts.eve_outputs),
            usable_fraction: ratio(counts.usable_rounds, counts.transmissions),
        }
    }
}

/// Plays `trials` independent games.
pub fn key_bit_guessing_game<T: TrialRunner>(
    config: &ProtocolConfig,
    eve: &EveStrategy,
    trials: u64,
    seed: u64,
    runner: &T,
) -> Result<GameResult> {
    config.validate()?;
    if trials == 0 {
        return Err(Error::InvalidArgument("the game needs at least one trial".into()));
    }
    let domain = domain::GAME ^ ((config.protocol as u64) << 32);
    let counts: GameTally = runner.run(seed, domain, trials, |rng, tally: &mut GameTally| {
        tally.observe(&play(config, eve, rng));
    });
    Ok(GameResult::from_tally(config.protocol, eve, counts))
}

fn play<R: Rng + ?Sized>(config: &ProtocolConfig, eve: &EveStrategy, rng: &mut R) -> Transcript {
    run_protocol(config, eve, rng).expect("config validated before the run")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::{dl04_attack_tree, no_eve, wm_attack_bb84, wm_attack_dl04};
    use crate::stats::within_sigma;
    use crate::stream::Sequential;

    #[test]
    fn epsilon_zero_is_a_coin_flip() {
        let cfg = ProtocolConfig::new(Protocol::Bb84Informed, 1);
        let r = key_bit_guessing_game(&cfg, &wm_attack_bb84(0.0).unwrap(), 20_000, 1, &Sequential).unwrap();
        assert!(r.counts.eve_correct <= r.counts.eve_outputs && r.counts.eve_outputs <= r.counts.trials);
        assert!(within_sigma(r.conditional_success, 0.5, r.counts.eve_outputs, 4.0));
        assert_eq!(r.counts.detected, 0);
    }

    #[test]
    fn dl04_full_strength_matches_exact_tree() {
        let cfg = ProtocolConfig::new(Protocol::Dl04, 1);
        let r = key_bit_guessing_game(&cfg, &wm_attack_dl04(1.0).unwrap(), 20_000, 2, &Sequential).unwrap();
        let exact = dl04_attack_tree(1.0).unwrap().sender_match;
        assert!((exact - 1.0).abs() < 1e-12);
        assert!(within_sigma(r.sender_match_rate, exact, r.counts.eve_outputs, 4.0));
    }

    #[test]
    fn honest_games_have_no_eve_and_agree() {
        let cfg = ProtocolConfig::new(Protocol::RbeQkd, 3);
        let r = key_bit_guessing_game(&cfg, &no_eve(), 500, 3, &Sequential).unwrap();
        assert_eq!(r.counts.aborts, 0);
        assert_eq!(r.counts.key_agreement_failures, 0);
        assert_eq!(r.counts.eve_outputs, 0);
        assert!(r.conditional_success.is_nan());
    }

    #[test]
    fn tally_merge_is_additive() {
        let cfg = ProtocolConfig::new(Protocol::Dl04, 1);
        let eve = wm_attack_dl04(0.5).unwrap();
        let a = key_bit_guessing_game(&cfg, &eve, 3000, 9, &Sequential).unwrap();
        let b = key_bit_guessing_game(&cfg, &eve, 3000, 9, &Sequential).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.counts.trials, 3000);
    }
}
