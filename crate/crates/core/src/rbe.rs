//! Random-basis encryption of single qubits.
//!
//! A key `(θ, φ)` with `θ ∈ [0, 2π]` and `φ = ±π/2` names the basis
//! `B(θ, φ)`. Encrypting bit `b` outputs the basis vector `ψ_b`, i.e. column
//! `b` of the change-of-basis unitary `K`; decryption applies `K†` and
//! measures in the computational basis.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::Rng;

use crate::qcore::{DensityMatrix, OrthonormalBasis, StateVector, Unitary, C64};
use crate::stream::{domain, Counts, TrialRunner};
use crate::{Error, Result};

/// Phase-equality tolerance used by the exact checks in this module.
const TOL: f64 = 1e-12;

/// The sign of the key phase `φ = ±π/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum PhaseSign {
    Plus,
    Minus,
}

impl PhaseSign {
    pub fn phi(self) -> f64 {
        match self {
            PhaseSign::Plus => FRAC_PI_2,
            PhaseSign::Minus => -FRAC_PI_2,
        }
    }

    /// `e^{iφ} = ±i`.
    pub fn unit(self) -> C64 {
        match self {
            PhaseSign::Plus => C64::new(0.0, 1.0),
            PhaseSign::Minus => C64::new(0.0, -1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "RawKey"))]
pub struct RbeKey {
    theta: f64,
    phase: PhaseSign,
}

#[cfg(feature = "serde")]
#[derive(serde::Deserialize)]
struct RawKey {
    theta: f64,
    phase: PhaseSign,
}

#[cfg(feature = "serde")]
impl TryFrom<RawKey> for RbeKey {
    type Error = Error;

    fn try_from(k: RawKey) -> Result<Self> {
        RbeKey::new(k.theta, k.phase)
    }
}

impl RbeKey {
    pub fn new(theta: f64, phase: PhaseSign) -> Result<Self> {
        if !(0.0..=TAU).contains(&theta) {
            return Err(Error::InvalidArgument(alloc::format!("key angle {theta} outside [0, 2π]")));
        }
        Ok(Self { theta, phase })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phase(&self) -> PhaseSign {
        self.phase
    }

    pub fn phi(&self) -> f64 {
        self.phase.phi()
    }

    pub fn basis(&self) -> OrthonormalBasis {
        OrthonormalBasis::from_angles(self.theta, self.phi()).expect("key angles are finite")
    }

    /// The encryption unitary `K`.
    pub fn matrix(&self) -> Unitary {
        self.basis().to_unitary()
    }
}

/// Where key angles are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "mode", rename_all = "lowercase"))]
pub enum KeySpace {
    /// `θ` uniform in `[0, 2π)` at 64-bit resolution.
    Continuous,
    /// `θ ∈ {2πn/N : n = 1..N}`.
    Discrete { n: u32 },
}

impl KeySpace {
    pub const DEFAULT_DISCRETE_N: u32 = 4096;

    pub fn discrete(n: u32) -> Result<Self> {
        let s = KeySpace::Discrete { n };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            KeySpace::Discrete { n: 0 } => Err(Error::EmptyKeySpace),
            _ => Ok(()),
        }
    }

    /// All `2N` keys of a discrete space, `None` in continuous mode.
    pub fn keys(&self) -> Option<Vec<RbeKey>> {
        match *self {
            KeySpace::Continuous => None,
            KeySpace::Discrete { n } => Some(discrete_keys(n)),
        }
    }
}

impl Default for KeySpace {
    fn default() -> Self {
        KeySpace::Discrete { n: Self::DEFAULT_DISCRETE_N }
    }
}

fn discrete_keys(n: u32) -> Vec<RbeKey> {
    (1..=n)
        .flat_map(|k| {
            let theta = TAU * f64::from(k) / f64::from(n);
            [PhaseSign::Plus, PhaseSign::Minus].map(|phase| RbeKey { theta, phase })
        })
        .collect()
}

/// Keys of a uniform `θ` grid `{2πk/m : k = 0..m}` with both phases.
fn grid_keys(m: u32) -> Vec<RbeKey> {
    (0..m)
        .flat_map(|k| {
            let theta = TAU * f64::from(k) / f64::from(m);
            [PhaseSign::Plus, PhaseSign::Minus].map(|phase| RbeKey { theta, phase })
        })
        .collect()
}

/// An encrypted qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct Ciphertext {
    qubit: StateVector,
}

impl Ciphertext {
    /// Wraps an arbitrary single-qubit state, e.g. one that went through a channel.
    pub fn from_state(qubit: StateVector) -> Result<Self> {
        if qubit.num_qubits() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, found: qubit.num_qubits() });
        }
        Ok(Self { qubit })
    }

    pub fn qubit(&self) -> &StateVector {
        &self.qubit
    }

    pub fn into_state(self) -> StateVector {
        self.qubit
    }
}

pub fn gen<R: Rng + ?Sized>(space: &KeySpace, rng: &mut R) -> Result<RbeKey> {
    space.validate()?;
    let theta = match *space {
        KeySpace::Continuous => rng.random::<f64>() * TAU,
        KeySpace::Discrete { n } => TAU * f64::from(rng.random_range(1..=n)) / f64::from(n),
    };
    let phase = if rng.random::<bool>() { PhaseSign::Plus } else { PhaseSign::Minus };
    Ok(RbeKey { theta, phase })
}

pub fn enc(bit: u8, key: &RbeKey) -> Ciphertext {
    debug_assert!(bit <= 1);
    Ciphertext { qubit: key.basis().state(bit) }
}

/// `K†` applied to the ciphertext; an honest ciphertext becomes `|b⟩`.
pub fn decrypt_state(c: &Ciphertext, key: &RbeKey) -> StateVector {
    c.qubit.apply(&key.matrix().dagger(), &[0]).expect("single-qubit gate on a single qubit")
}

pub fn dec<R: Rng + ?Sized>(c: &Ciphertext, key: &RbeKey, rng: &mut R) -> u8 {
    let plain = decrypt_state(c, key);
    plain.measure_in_basis(0, &OrthonormalBasis::computational(), rng).expect("qubit 0 exists").0
}

/// Homomorphic NOT: `X ψ0 = e^{iφ} ψ1` and `X ψ1 = -e^{iφ} ψ0`.
pub fn eval_not(c: &Ciphertext) -> Ciphertext {
    Ciphertext { qubit: c.qubit.apply(&Unitary::x(), &[0]).expect("single qubit") }
}

/// Prepends a fresh `|0⟩` and applies `D = CNOT · (H ⊗ I)`.
pub fn eval_d(c: &Ciphertext) -> Result<StateVector> {
    StateVector::zero(1)?.tensor(&c.qubit)?.apply(&Unitary::d_gate(), &[0, 1])
}

/// CNOT with a cleartext control bit and the ciphertext as target.
pub fn eval_cnot(control_bit: u8, c: &Ciphertext) -> Result<StateVector> {
    eval_cn_not(&[control_bit], c)
}

/// `C^n NOT` with cleartext controls (first) and the ciphertext as target (last).
pub fn eval_cn_not(control_bits: &[u8], c: &Ciphertext) -> Result<StateVector> {
    let controls = StateVector::from_bits(control_bits)?;
    let n = control_bits.len();
    let targets: Vec<usize> = (0..=n).collect();
    controls.tensor(&c.qubit)?.apply(&Unitary::cn_not(n)?, &targets)
}

/// Probability of outcome 0 when `H ψ0` is measured in the key basis. For
/// `φ = ±π/2` this is `cos²θ / 2`, which is not 0 or 1 in general: the
/// Hadamard gate has no homomorphic counterpart in this scheme.
pub fn hadamard_probe(key: &RbeKey) -> f64 {
    let b = key.basis();
    let h_psi0 = b.state(0).apply(&Unitary::h(), &[0]).expect("single qubit");
    h_psi0.outcome_probability(0, &b, 0).expect("qubit 0 exists")
}

/// Which of the two decisive key settings a no-go constraint comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoGoCase {
    /// `(θ, φ) = (0, π)`: `ψ0 = |0⟩`, `ψ1 = |1⟩`.
    ThetaZero,
    /// `(θ, φ) = (π, 0)`: `ψ0 = |1⟩`, `ψ1 = |0⟩`.
    ThetaPi,
}

/// One requirement `P |input⟩ ∝ |required⟩` on a candidate homomorphic CNOT.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoGoConstraint {
    pub case: NoGoCase,
    pub input: [u8; 2],
    pub required: [u8; 2],
    /// `|⟨required| P |input⟩|²`.
    pub overlap: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoGoReport {
    pub constraints: [NoGoConstraint; 4],
}

impl NoGoReport {
    pub fn violated(&self) -> impl Iterator<Item = &NoGoConstraint> {
        self.constraints.iter().filter(|c| !c.satisfied)
    }

    pub fn violates_case(&self, case: NoGoCase) -> bool {
        self.violated().any(|c| c.case == case)
    }
}

/// Tests a candidate gate `P` acting on two qubits encrypted under the same
/// key as a homomorphic CNOT (`|ψ_a ψ_b⟩ ↦ |ψ_a ψ_{a⊕b}⟩` up to phase). At
/// `(0, π)` this forces `P|00⟩ ∝ |00⟩`, `P|11⟩ ∝ |10⟩`; at `(π, 0)` it forces
/// `P|11⟩ ∝ |11⟩`, `P|00⟩ ∝ |01⟩`. The first and last contradict each other,
/// so every unitary violates at least one constraint.
pub fn cnot_no_go_witness(candidate: &Unitary) -> Result<NoGoReport> {
    if candidate.num_qubits() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: candidate.num_qubits() });
    }
    let mut out = Vec::with_capacity(4);
    for (case, theta, phi) in [(NoGoCase::ThetaZero, 0.0, PI), (NoGoCase::ThetaPi, PI, 0.0)] {
        let basis = OrthonormalBasis::from_angles(theta, phi)?;
        for (a, b) in [(0u8, 0u8), (1, 1)] {
            let input = basis.state(a).tensor(&basis.state(b))?;
            let want = basis.state(a).tensor(&basis.state(a ^ b))?;
            let overlap = want.fidelity(&input.apply(candidate, &[0, 1])?)?;
            let bits = |s: &StateVector| {
                let idx = (0..4).max_by(|&i, &j| s.amplitude(i).norm().total_cmp(&s.amplitude(j).norm())).unwrap_or(0);
                [(idx >> 1) as u8, (idx & 1) as u8]
            };
            out.push(NoGoConstraint {
                case,
                input: bits(&input),
                required: bits(&want),
                overlap,
                satisfied: overlap >= 1.0 - TOL,
            });
        }
    }
    Ok(NoGoReport { constraints: [out[0], out[1], out[2], out[3]] })
}

/// `|⟨v0|ψ0⟩|²` for key basis `B(θ, φ)` and adversary basis `B(θ0, φ0)`,
/// via the trigonometric closed form.
pub fn zero_outcome_closed_form(theta: f64, phi: f64, theta0: f64, phi0: f64) -> f64 {
    let c2 = |x: f64| {
        let c = libm::cos(x);
        c * c
    };
    0.5 * (c2((theta + theta0) / 2.0)
        + c2((theta - theta0) / 2.0)
        + libm::sin(theta) * libm::sin(theta0) * libm::cos(phi - phi0))
}

/// The same probability from the state vectors.
pub fn zero_outcome_direct(theta: f64, phi: f64, theta0: f64, phi0: f64) -> Result<f64> {
    let key = OrthonormalBasis::from_angles(theta, phi)?;
    let adv = OrthonormalBasis::from_angles(theta0, phi0)?;
    adv.state(0).fidelity(&key.state(0))
}

/// Monte Carlo estimate of the adversary's outcome statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdversaryScan {
    pub trials: u64,
    pub zeros_given_enc0: u64,
    pub zeros_given_enc1: u64,
}

impl AdversaryScan {
    pub fn p0_given_enc0(&self) -> f64 {
        crate::stats::ratio(self.zeros_given_enc0, self.trials)
    }

    pub fn p0_given_enc1(&self) -> f64 {
        crate::stats::ratio(self.zeros_given_enc1, self.trials)
    }
}

/// Each trial encrypts 0 and 1 under independent fresh keys and measures
/// both ciphertexts in `adversary_basis`.
pub fn lemma1_scan<T: TrialRunner>(
    adversary_basis: &OrthonormalBasis,
    space: &KeySpace,
    trials: u64,
    seed: u64,
    runner: &T,
) -> Result<AdversaryScan> {
    space.validate()?;
    if trials == 0 {
        return Err(Error::InvalidArgument("lemma1_scan needs at least one trial".into()));
    }
    let counts: Counts<2> = runner.run(seed, domain::ADVERSARY_SCAN, trials, |rng, t: &mut Counts<2>| {
        for bit in 0..2u8 {
            let key = gen(space, rng).expect("validated key space");
            let c = enc(bit, &key);
            let (outcome, _) = c.qubit.measure_in_basis(0, adversary_basis, rng).expect("qubit 0 exists");
            if outcome == 0 {
                t.0[usize::from(bit)] += 1;
            }
        }
    });
    Ok(AdversaryScan { trials, zeros_given_enc0: counts.0[0], zeros_given_enc1: counts.0[1] })
}

/// Exact key-averaged `(P(0 | Enc 0), P(0 | Enc 1))` over a discrete key space.
pub fn zero_outcome_exact_average(adversary_basis: &OrthonormalBasis, n: u32) -> Result<(f64, f64)> {
    let keys = KeySpace::discrete(n)?.keys().expect("discrete");
    let v0 = adversary_basis.state(0);
    let mut acc = [0.0f64; 2];
    for key in &keys {
        for (bit, slot) in acc.iter_mut().enumerate() {
            *slot += v0.fidelity(enc(bit as u8, key).qubit())?;
        }
    }
    let k = keys.len() as f64;
    Ok((acc[0] / k, acc[1] / k))
}

/// Key-averaged density matrix of `Enc(bit)`. Discrete spaces are averaged
/// exactly; continuous mode integrates on a uniform `θ` grid of
/// `resolution` points (both phases).
pub fn averaged_encryption(space: &KeySpace, resolution: u32, bit: u8) -> Result<DensityMatrix> {
    let keys = match *space {
        KeySpace::Discrete { .. } => space.keys().ok_or(Error::EmptyKeySpace)?,
        KeySpace::Continuous => {
            if resolution < 3 {
                return Err(Error::InvalidArgument("grid integration needs resolution >= 3".into()));
            }
            grid_keys(resolution)
        }
    };
    space.validate()?;
    let w = 1.0 / keys.len() as f64;
    let ensemble: Vec<(f64, StateVector)> = keys.iter().map(|k| (w, enc(bit, k).into_state())).collect();
    DensityMatrix::average(&ensemble)
}

/// Trace distance between the key-averaged encryptions of 0 and 1.
pub fn density_gap(space: &KeySpace, resolution: u32) -> Result<f64> {
    averaged_encryption(space, resolution, 0)?.trace_distance(&averaged_encryption(space, resolution, 1)?)
}
