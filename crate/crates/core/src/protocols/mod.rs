//! QKD protocol state machines, eavesdroppers and the key-bit guessing game.
//!
//! Every protocol run produces a [`Transcript`] that records, per
//! transmission, what was prepared, measured and announced, together with an
//! explicitly ordered event log. The channel is noiseless: any mismatch in
//! the eavesdropping check aborts the run.

mod analytic;
mod bb84;
mod dl04;
mod eve;
mod game;
mod rbe_qkd;
mod transcript;

pub use analytic::{
    analytic_curves, dl04_attack_tree, fig8_tree, rbe_attack_tree, AnalyticCurves, Bb84AttackLeaf, Bb84AttackTree,
    TwoLegAttackTree,
};
pub use bb84::{run_bb84, run_bb84_informed};
pub use dl04::run_dl04;
pub use eve::{intercept_resend, no_eve, wm_attack_bb84, wm_attack_dl04, wm_attack_rbe, EveKind, EveStrategy};
pub use game::{key_bit_guessing_game, GameResult, GameTally};
pub use rbe_qkd::run_rbe_qkd;
pub use transcript::{
    Announcement, CausalityViolation, EveRecord, Event, EventKind, Party, RoundRecord, RoundRole, Transcript,
};

use rand::Rng;

use crate::rbe::KeySpace;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Protocol {
    Bb84,
    /// BB84 where Alice reveals her basis once Bob confirms receipt.
    Bb84Informed,
    Dl04,
    RbeQkd,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Bb84 => "bb84",
            Protocol::Bb84Informed => "bb84_informed",
            Protocol::Dl04 => "dl04",
            Protocol::RbeQkd => "rbe_qkd",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProtocolConfig {
    pub protocol: Protocol,
    /// Target key length in bits; sizes the default transmission count.
    pub n: usize,
    /// Key space for RBE-QKD; ignored by the other protocols.
    pub key_space: KeySpace,
    /// Fraction of usable positions consumed by the eavesdropping check.
    pub check_fraction: f64,
    /// DL04 only: Alice measures check qubits in Bob's announced basis
    /// instead of a random one.
    pub informed_check: bool,
    /// Overrides the default transmission count.
    pub transmissions: Option<usize>,
}

impl ProtocolConfig {
    pub fn new(protocol: Protocol, n: usize) -> Self {
        Self {
            protocol,
            n,
            key_space: KeySpace::default(),
            check_fraction: 0.5,
            informed_check: false,
            transmissions: None,
        }
    }

    /// `4n` for BB84 (about half the rounds are sifted away), `2n` otherwise.
    pub fn transmissions(&self) -> usize {
        self.transmissions.unwrap_or(match self.protocol {
            Protocol::Bb84 => 4 * self.n,
            _ => 2 * self.n,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be at least 1"));
        }
        if !(self.check_fraction > 0.0 && self.check_fraction < 1.0) {
            return Err(Error::InvalidConfig("check_fraction must lie in (0, 1)"));
        }
        if self.transmissions == Some(0) {
            return Err(Error::InvalidConfig("transmissions must be at least 1"));
        }
        self.key_space.validate()
    }

    fn expect(&self, protocol: Protocol) -> Result<()> {
        self.validate()?;
        if self.protocol != protocol {
            return Err(Error::InvalidConfig("config protocol does not match the runner"));
        }
        Ok(())
    }

    /// Size of the check set drawn from `usable` positions.
    pub(crate) fn check_count(&self, usable: usize) -> usize {
        (libm::round(self.check_fraction * usable as f64) as usize).min(usable)
    }
}

/// Dispatches on `config.protocol`.
pub fn run_protocol<R: Rng + ?Sized>(config: &ProtocolConfig, eve: &EveStrategy, rng: &mut R) -> Result<Transcript> {
    match config.protocol {
        Protocol::Bb84 => run_bb84(config, eve, rng),
        Protocol::Bb84Informed => run_bb84_informed(config, eve, rng),
        Protocol::Dl04 => run_dl04(config, eve, rng),
        Protocol::RbeQkd => run_rbe_qkd(config, eve, rng),
    }
}

/// Uniformly chosen check positions among `candidates`, without replacement.
pub(crate) fn choose_checks<R: Rng + ?Sized>(candidates: &[usize], k: usize, rng: &mut R) -> alloc::vec::Vec<usize> {
    let mut picked: alloc::vec::Vec<usize> =
        rand::seq::index::sample(rng, candidates.len(), k).into_iter().map(|j| candidates[j]).collect();
    picked.sort_unstable();
    picked
}
