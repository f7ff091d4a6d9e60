use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use rand::Rng;

use super::average_channel;
use crate::qcore::{DensityMatrix, StateVector, Unitary, C64};
use crate::rbe::{gen, KeySpace, RbeKey};
use crate::stats::{binomial_stderr, ratio};
use crate::stream::{domain, Counts, TrialRunner};
use crate::{Error, Result};

/// Two qubits, initially `Φ+ = (|00⟩ + |11⟩)/√2`; qubit 0 is Alice's half.
#[derive(Debug, Clone, PartialEq)]
pub struct EprPair {
    pub state: StateVector,
}

impl EprPair {
    pub fn new() -> Self {
        let r = C64::new(FRAC_1_SQRT_2, 0.0);
        let z = C64::new(0.0, 0.0);
        Self { state: StateVector::from_amplitudes(alloc::vec![r, z, z, r]).expect("normalized") }
    }

    pub fn fidelity_with_phi_plus(&self) -> f64 {
        Self::new().state.fidelity(&self.state).expect("two qubits")
    }

    fn apply_halves(&self, a: &Unitary, b: &Unitary) -> Self {
        let s = self.state.apply(a, &[0]).and_then(|s| s.apply(b, &[1])).expect("single-qubit gates on a pair");
        Self { state: s }
    }
}

impl Default for EprPair {
    fn default() -> Self {
        Self::new()
    }
}

/// One party's pad `X^{x} Z^{z}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QotpKey {
    pub x: u8,
    pub z: u8,
}

impl QotpKey {
    pub fn all() -> [QotpKey; 4] {
        [QotpKey { x: 0, z: 0 }, QotpKey { x: 0, z: 1 }, QotpKey { x: 1, z: 0 }, QotpKey { x: 1, z: 1 }]
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        QotpKey { x: u8::from(rng.random::<bool>()), z: u8::from(rng.random::<bool>()) }
    }

    /// `X^x Z^z`.
    pub fn unitary(&self) -> Unitary {
        let mut u = Unitary::identity(1).expect("one qubit");
        if self.z == 1 {
            u = Unitary::z();
        }
        if self.x == 1 {
            u = Unitary::x().mul(&u).expect("2x2");
        }
        u
    }
}

pub fn qotp_lock(pair: &EprPair, alice: &QotpKey, bob: &QotpKey) -> EprPair {
    pair.apply_halves(&alice.unitary(), &bob.unitary())
}

pub fn qotp_unlock(pair: &EprPair, alice: &QotpKey, bob: &QotpKey) -> EprPair {
    pair.apply_halves(&alice.unitary().dagger(), &bob.unitary().dagger())
}

/// Exact average of the QOTP-locked pair over all 16 key pairs.
pub fn qotp_ensemble_average() -> Result<DensityMatrix> {
    let pair = EprPair::new();
    let mut ensemble = Vec::with_capacity(16);
    for a in QotpKey::all() {
        for b in QotpKey::all() {
            ensemble.push((1.0 / 16.0, qotp_lock(&pair, &a, &b).state));
        }
    }
    DensityMatrix::average(&ensemble)
}

/// `(K_a ⊗ K_b) Φ+`.
pub fn rbe_lock(pair: &EprPair, alice: &RbeKey, bob: &RbeKey) -> EprPair {
    pair.apply_halves(&alice.matrix(), &bob.matrix())
}

pub fn rbe_unlock(pair: &EprPair, alice: &RbeKey, bob: &RbeKey) -> EprPair {
    pair.apply_halves(&alice.matrix().dagger(), &bob.matrix().dagger())
}

/// Exact average of the RBE-locked pair over the discrete key space `K_N`
/// (independent keys per half), computed as the key-averaged channel on
/// Alice's half followed by the one on Bob's half.
pub fn rbe_ensemble_average(n: u32) -> Result<DensityMatrix> {
    let keys = KeySpace::discrete(n)?.keys().expect("discrete");
    let unitaries: Vec<Unitary> = keys.iter().map(RbeKey::matrix).collect();
    let rho = DensityMatrix::from_state(&EprPair::new().state);
    average_channel(&average_channel(&rho, 0, &unitaries)?, 1, &unitaries)
}

/// Locking scheme for a theft experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TheftScheme {
    /// Keys and guesses uniform over the 16 pad pairs.
    Qotp,
    /// Lock keys from `key_space`; each guessed key is uniform over the
    /// discrete grid `K_M` with `M = guess_grid` (both phases).
    Rbe { key_space: KeySpace, guess_grid: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheftResult {
    pub trials: u64,
    pub successes: u64,
    pub rate: f64,
    pub stderr: f64,
    /// Exhaustive-enumeration value, when the lock key space is finite and
    /// small enough to enumerate.
    pub exact: Option<f64>,
}

/// Largest number of (key, guess) combinations enumerated exactly.
const EXACT_LIMIT: u64 = 1 << 24;

/// Thieves holding a locked pair guess both keys, apply the inverse and
/// succeed when the fidelity with `Φ+` reaches `threshold`.
pub fn theft_recovery_experiment<T: TrialRunner>(
    scheme: TheftScheme,
    threshold: f64,
    trials: u64,
    seed: u64,
    runner: &T,
) -> Result<TheftResult> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidArgument(alloc::format!("fidelity threshold {threshold} outside (0, 1]")));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("theft experiment needs at least one trial".into()));
    }
    let guesses = match scheme {
        TheftScheme::Qotp => Vec::new(),
        TheftScheme::Rbe { key_space, guess_grid } => {
            key_space.validate()?;
            KeySpace::discrete(guess_grid)?.keys().expect("discrete")
        }
    };
    let pair = EprPair::new();
    let counts: Counts<1> = runner.run(seed, domain::THEFT, trials, |rng, t: &mut Counts<1>| {
        let recovered = match scheme {
            TheftScheme::Qotp => {
                let locked = qotp_lock(&pair, &QotpKey::random(rng), &QotpKey::random(rng));
                qotp_unlock(&locked, &QotpKey::random(rng), &QotpKey::random(rng))
            }
            TheftScheme::Rbe { key_space, .. } => {
                let ka = gen(&key_space, rng).expect("validated");
                let kb = gen(&key_space, rng).expect("validated");
                let locked = rbe_lock(&pair, &ka, &kb);
                let ga = &guesses[rng.random_range(0..guesses.len())];
                let gb = &guesses[rng.random_range(0..guesses.len())];
                rbe_unlock(&locked, ga, gb)
            }
        };
        if recovered.fidelity_with_phi_plus() >= threshold {
            t.0[0] += 1;
        }
    });
    let successes = counts.0[0];
    let rate = ratio(successes, trials);
    Ok(TheftResult {
        trials,
        successes,
        rate,
        stderr: binomial_stderr(rate, trials),
        exact: exact_theft_rate(scheme, threshold, &guesses),
    })
}

/// Fidelity of `(A ⊗ B) Φ+` with `Φ+` is `|Tr(A Bᵀ)|² / 4`.
fn pair_fidelity(a: &Unitary, b: &Unitary) -> f64 {
    let mut tr = C64::new(0.0, 0.0);
    for r in 0..2 {
        for c in 0..2 {
            tr += a.entry(r, c) * b.entry(r, c);
        }
    }
    tr.norm_sqr() / 4.0
}

fn exact_theft_rate(scheme: TheftScheme, threshold: f64, guesses: &[RbeKey]) -> Option<f64> {
    // residual operator on each half: guess† · key
    let residuals: Vec<Unitary> = match scheme {
        TheftScheme::Qotp => {
            let pads = QotpKey::all();
            pads.iter()
                .flat_map(|k| pads.iter().map(move |g| g.unitary().dagger().mul(&k.unitary()).expect("2x2")))
                .collect()
        }
        TheftScheme::Rbe { key_space: KeySpace::Discrete { n }, .. } => {
            let keys = KeySpace::discrete(n).ok()?.keys()?;
            let per_half = (keys.len() * guesses.len()) as u64;
            if per_half.saturating_mul(per_half) > EXACT_LIMIT {
                return None;
            }
            keys.iter()
                .flat_map(|k| guesses.iter().map(move |g| g.matrix().dagger().mul(&k.matrix()).expect("2x2")))
                .collect()
        }
        TheftScheme::Rbe { key_space: KeySpace::Continuous, .. } => return None,
    };
    let mut hits = 0u64;
    for a in &residuals {
        for b in &residuals {
            hits += u64::from(pair_fidelity(a, b) >= threshold);
        }
    }
    Some(hits as f64 / (residuals.len() * residuals.len()) as f64)
}

/// Who ends up holding the transmitted half.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interception {
    /// Bob receives the half and decrypts it with the key Alice sends him.
    None,
    /// Eve keeps the half in Bob's place and never learns its key.
    WithoutKey,
    /// Eve keeps the half and the key leaks to her.
    KeyLeaked,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EprSharingReport {
    pub interception: Interception,
    /// Fidelity with `Φ+` of the pair shared by Alice and the holder in this
    /// run, after both have decrypted what they can.
    pub fidelity: f64,
    /// The same fidelity averaged over the key ensemble.
    pub average_fidelity: f64,
    /// Trace distance of the key-averaged joint state from `I/4`.
    pub joint_gap: f64,
    /// The holder's qubit averaged over the key ensemble.
    pub holder_state: DensityMatrix,
    /// Trace distance of `holder_state` from `I/2`.
    pub holder_gap: f64,
}

/// Generate `Φ+`, encrypt both halves under independent keys from
/// `key_space`, transmit the second half, reveal the keys to their owners and
/// decrypt. Ensemble averages use the discrete grid (`K_4096` in continuous mode).
pub fn secure_epr_sharing<R: Rng + ?Sized>(
    interception: Interception,
    key_space: &KeySpace,
    rng: &mut R,
) -> Result<EprSharingReport> {
    key_space.validate()?;
    let pair = EprPair::new();
    let (ka, kb) = (gen(key_space, rng)?, gen(key_space, rng)?);
    let locked = rbe_lock(&pair, &ka, &kb);
    let holder_has_key = interception != Interception::WithoutKey;
    let finish = |locked: &EprPair, ka: &RbeKey, kb: &RbeKey| {
        let alice = locked.apply_halves(&ka.matrix().dagger(), &Unitary::identity(1).expect("one qubit"));
        if holder_has_key {
            alice.apply_halves(&Unitary::identity(1).expect("one qubit"), &kb.matrix().dagger())
        } else {
            alice
        }
    };
    let fidelity = finish(&locked, &ka, &kb).fidelity_with_phi_plus();

    let n = match *key_space {
        KeySpace::Discrete { n } => n,
        KeySpace::Continuous => KeySpace::DEFAULT_DISCRETE_N,
    };
    // Alice always undoes her own lock; without the key the holder's half
    // stays under the key-averaged channel.
    let joint = if holder_has_key {
        DensityMatrix::from_state(&pair.state)
    } else {
        let keys = KeySpace::discrete(n)?.keys().expect("discrete");
        let unitaries: Vec<Unitary> = keys.iter().map(RbeKey::matrix).collect();
        average_channel(&DensityMatrix::from_state(&pair.state), 1, &unitaries)?
    };
    let average_fidelity = joint.fidelity_with(&pair.state)?;
    let joint_gap = joint.trace_distance(&DensityMatrix::maximally_mixed(2)?)?;
    let holder_state = joint.partial_trace(&[1])?;
    let holder_gap = holder_state.trace_distance(&DensityMatrix::maximally_mixed(1)?)?;
    Ok(EprSharingReport { interception, fidelity, average_fidelity, joint_gap, holder_state, holder_gap })
}
#[cfg(test)]
mod tests {
    use super::*;
    use crate::rbe::PhaseSign;
    use crate::stream::{batch_rng, Sequential};
    use core::f64::consts::FRAC_PI_2;

    #[test]
    fn qotp_examples() {
        let pair = EprPair::new();
        let zero = QotpKey { x: 0, z: 0 };
        assert_eq!(qotp_lock(&pair, &zero, &zero), pair);
        let xx = qotp_lock(&pair, &QotpKey { x: 1, z: 0 }, &QotpKey { x: 1, z: 0 });
        assert!(xx.state.equal_up_to_global_phase(&pair.state, 1e-12));
        let avg = qotp_ensemble_average().unwrap();
        assert!(avg.max_abs_diff(&DensityMatrix::maximally_mixed(2).unwrap()) < 1e-12);
    }

    #[test]
    fn rbe_lock_examples() {
        let pair = EprPair::new();
        let k = RbeKey::new(0.0, PhaseSign::Plus).unwrap();
        let locked = rbe_lock(&pair, &k, &k);
        // diag(1, -i) on both halves maps Φ+ to Φ-
        let r = C64::new(FRAC_1_SQRT_2, 0.0);
        let phi_minus =
            StateVector::from_amplitudes(alloc::vec![r, C64::new(0.0, 0.0), C64::new(0.0, 0.0), -r]).unwrap();
        assert!(locked.state.equal_up_to_global_phase(&phi_minus, 1e-12));
        let ka = RbeKey::new(1.1, PhaseSign::Minus).unwrap();
        let kb = RbeKey::new(4.0, PhaseSign::Plus).unwrap();
        let back = rbe_unlock(&rbe_lock(&pair, &ka, &kb), &ka, &kb);
        assert!((back.fidelity_with_phi_plus() - 1.0).abs() < 1e-12);
        let wrong = RbeKey::new(1.1 + FRAC_PI_2, PhaseSign::Minus).unwrap();
        assert!(rbe_unlock(&rbe_lock(&pair, &ka, &kb), &wrong, &kb).fidelity_with_phi_plus() < 1.0 - 1e-6);
    }

    #[test]
    fn rbe_average_is_maximally_mixed() {
        let mm = DensityMatrix::maximally_mixed(2).unwrap();
        for n in [2, 3, 64] {
            assert!(rbe_ensemble_average(n).unwrap().max_abs_diff(&mm) < 1e-12);
        }
        assert!(rbe_ensemble_average(1).unwrap().max_abs_diff(&mm) > 0.1);
    }

    #[test]
    fn qotp_theft_oracle_is_one_quarter() {
        let r = theft_recovery_experiment(TheftScheme::Qotp, 1.0 - 1e-9, 4000, 1, &Sequential).unwrap();
        assert!((r.exact.unwrap() - 0.25).abs() < 1e-15);
        assert!(crate::stats::within_sigma(r.rate, 0.25, r.trials, 4.0));
    }

    #[test]
    fn rbe_theft_small_grid() {
        let scheme = TheftScheme::Rbe { key_space: KeySpace::Discrete { n: 4 }, guess_grid: 4 };
        let r = theft_recovery_experiment(scheme, 1.0 - 1e-9, 4000, 2, &Sequential).unwrap();
        let exact = r.exact.unwrap();
        assert!(exact > 0.0 && exact < 0.5);
        assert!(crate::stats::within_sigma(r.rate, exact, r.trials, 4.0));
        assert!(theft_recovery_experiment(TheftScheme::Qotp, 0.0, 1, 1, &Sequential).is_err());
    }

    #[test]
    fn sharing_reports() {
        let mut rng = batch_rng(3, 0, 0);
        let space = KeySpace::Discrete { n: 64 };
        let ok = secure_epr_sharing(Interception::None, &space, &mut rng).unwrap();
        assert!((ok.fidelity - 1.0).abs() < 1e-12 && (ok.average_fidelity - 1.0).abs() < 1e-12);
        let stolen = secure_epr_sharing(Interception::WithoutKey, &space, &mut rng).unwrap();
        assert!(stolen.holder_gap < 1e-12 && stolen.joint_gap < 1e-12);
        assert!((stolen.average_fidelity - 0.25).abs() < 1e-12);
        assert!(ok.joint_gap > 0.7);
        let leaked = secure_epr_sharing(Interception::KeyLeaked, &space, &mut rng).unwrap();
        assert!((leaked.fidelity - 1.0).abs() < 1e-12);
    }
}
