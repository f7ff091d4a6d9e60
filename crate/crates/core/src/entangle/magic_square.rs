//! The Mermin–Peres magic square.
//!
//! On input row `i` Alice outputs three bits with even parity, on input
//! column `j` Bob outputs three bits with odd parity, and they win when they
//! agree on cell `(i, j)`. No classical strategy wins more than 8/9 of the
//! inputs. Sharing two singlets, each party measures three commuting
//! two-qubit Pauli observables and wins every time.

use alloc::vec::Vec;

use rand::Rng;

use super::average_channel;
use super::locking::QotpKey;
use crate::qcore::{CMatrix, DensityMatrix, StateVector, Unitary, C64};
use crate::rbe::{gen, KeySpace, RbeKey};
use crate::stats::{binomial_stderr, ratio};
use crate::stream::{domain, Counts, TrialRunner};
use crate::{Error, Result};

/// `½(|0011⟩ − |0110⟩ − |1001⟩ + |1100⟩)`: singlets on qubits (0, 2) and
/// (1, 3). Alice holds qubits 0 and 1, Bob holds 2 and 3.
#[derive(Debug, Clone, PartialEq)]
pub struct FourQubitResource {
    pub state: StateVector,
}

impl FourQubitResource {
    pub fn new() -> Self {
        let mut amps = alloc::vec![C64::new(0.0, 0.0); 16];
        amps[0b0011] = C64::new(0.5, 0.0);
        amps[0b0110] = C64::new(-0.5, 0.0);
        amps[0b1001] = C64::new(-0.5, 0.0);
        amps[0b1100] = C64::new(0.5, 0.0);
        Self { state: StateVector::from_amplitudes(amps).expect("normalized") }
    }
}

impl Default for FourQubitResource {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MagicSquareInstance {
    /// Row given to Alice, 1-based.
    pub i: usize,
    /// Column given to Bob, 1-based.
    pub j: usize,
    pub alice_row: [u8; 3],
    pub bob_col: [u8; 3],
    pub win: bool,
}

#[derive(Clone, Copy)]
enum Pauli {
    I,
    X,
    Y,
    Z,
}

fn pauli(p: Pauli) -> Unitary {
    match p {
        Pauli::I => Unitary::identity(1).expect("one qubit"),
        Pauli::X => Unitary::x(),
        Pauli::Y => Unitary::y(),
        Pauli::Z => Unitary::z(),
    }
}

/// Alice's observable table; each row multiplies to `+I`, each column to `-I`.
fn alice_cell(row: usize, col: usize) -> (f64, Pauli, Pauli) {
    use Pauli::*;
    const TABLE: [[(f64, Pauli, Pauli); 3]; 3] = [
        [(1.0, X, I), (1.0, I, X), (1.0, X, X)],
        [(1.0, I, Z), (1.0, Z, I), (1.0, Z, Z)],
        [(-1.0, X, Z), (-1.0, Z, X), (1.0, Y, Y)],
    ];
    TABLE[row][col]
}

/// Bob's table: Alice's with the sign of the weight-one cells flipped, since
/// a singlet anticorrelates every single-qubit Pauli.
fn bob_cell(row: usize, col: usize) -> (f64, Pauli, Pauli) {
    let (s, a, b) = alice_cell(row, col);
    let weight_one = matches!(a, Pauli::I) || matches!(b, Pauli::I);
    (if weight_one { -s } else { s }, a, b)
}

fn observable((sign, a, b): (f64, Pauli, Pauli)) -> CMatrix {
    pauli(a).kron(&pauli(b)).matrix().scale(C64::new(sign, 0.0))
}

/// `(I ± O)/2` for outcome bit 0 (eigenvalue +1) or 1 (eigenvalue −1).
fn projector(obs: &CMatrix, bit: u8) -> CMatrix {
    let s = if bit == 0 { 0.5 } else { -0.5 };
    CMatrix::identity(4).scale(C64::new(0.5, 0.0)).add(&obs.scale(C64::new(s, 0.0))).expect("4x4")
}

/// Measures `obs` on `targets`, sampling the outcome.
fn measure_observable<R: Rng + ?Sized>(
    state: &StateVector,
    obs: &CMatrix,
    targets: &[usize],
    rng: &mut R,
) -> Result<(u8, StateVector)> {
    let branch0 = state.project(&projector(obs, 0), targets)?;
    let p0 = branch0.as_ref().map_or(0.0, |b| b.0);
    if rng.random::<f64>() < p0 {
        return Ok((0, branch0.expect("positive probability").1));
    }
    let (p1, post) = state.project(&projector(obs, 1), targets)?.ok_or(Error::NotNormalized { norm_sqr: p0 })?;
    debug_assert!((p0 + p1 - 1.0).abs() < 1e-9);
    Ok((1, post))
}

/// Plays one round of the quantum strategy on `state` (4 qubits). Alice
/// measures her row, then Bob his column.
fn play_state<R: Rng + ?Sized>(state: &StateVector, i: usize, j: usize, rng: &mut R) -> Result<MagicSquareInstance> {
    if !(1..=3).contains(&i) || !(1..=3).contains(&j) {
        return Err(Error::InvalidArgument(alloc::format!("magic-square input ({i}, {j}) outside 1..=3")));
    }
    if state.num_qubits() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: state.num_qubits() });
    }
    let mut s = state.clone();
    let mut alice_row = [0u8; 3];
    for (col, bit) in alice_row.iter_mut().enumerate() {
        let (b, post) = measure_observable(&s, &observable(alice_cell(i - 1, col)), &[0, 1], rng)?;
        *bit = b;
        s = post;
    }
    let mut bob_col = [0u8; 3];
    for (row, bit) in bob_col.iter_mut().enumerate() {
        let (b, post) = measure_observable(&s, &observable(bob_cell(row, j - 1)), &[2, 3], rng)?;
        *bit = b;
        s = post;
    }
    let win = alice_row[j - 1] == bob_col[i - 1];
    Ok(MagicSquareInstance { i, j, alice_row, bob_col, win })
}

pub fn magic_square_play<R: Rng + ?Sized>(
    resource: &FourQubitResource,
    i: usize,
    j: usize,
    rng: &mut R,
) -> Result<MagicSquareInstance> {
    play_state(&resource.state, i, j, rng)
}

/// Exact win probability of the quantum strategy on a (possibly mixed)
/// 4-qubit state with uniform inputs: `avg_{i,j} (1 + ⟨A_ij ⊗ B_ij⟩) / 2`.
/// All observables involved commute, so only the shared cell matters.
pub fn magic_square_win_probability(rho: &DensityMatrix) -> Result<f64> {
    if rho.num_qubits() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: rho.num_qubits() });
    }
    let mut total = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let joint = observable(alice_cell(i, j)).kron(&observable(bob_cell(i, j)));
            total += 0.5 * (1.0 + rho.expectation(&joint)?.re);
        }
    }
    Ok(total / 9.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalBound {
    pub strategy_pairs: u64,
    pub inputs: u64,
    /// Most inputs won by any deterministic strategy pair.
    pub best_wins: u32,
    pub max_win_probability: f64,
    /// Strategy pairs winning all nine inputs.
    pub perfect_strategies: u64,
}

/// Exhaustive search over deterministic strategies: for each input, each
/// player picks one of the four fillings with the required parity.
pub fn magic_square_classical_bound() -> ClassicalBound {
    const EVEN: [u8; 4] = [0b000, 0b011, 0b101, 0b110];
    const ODD: [u8; 4] = [0b001, 0b010, 0b100, 0b111];
    let bit = |v: u8, k: usize| (v >> (2 - k)) & 1;
    let fillings = |set: [u8; 4]| -> Vec<[u8; 3]> {
        (0..64).map(|m: usize| [set[m & 3], set[(m >> 2) & 3], set[(m >> 4) & 3]]).collect()
    };
    let (alice, bob) = (fillings(EVEN), fillings(ODD));
    let mut best = 0u32;
    let mut perfect = 0u64;
    for rows in &alice {
        for cols in &bob {
            let wins = (0..3)
                .flat_map(|i| (0..3).map(move |j| (i, j)))
                .filter(|&(i, j)| bit(rows[i], j) == bit(cols[j], i))
                .count() as u32;
            best = best.max(wins);
            perfect += u64::from(wins == 9);
        }
    }
    ClassicalBound {
        strategy_pairs: (alice.len() * bob.len()) as u64,
        inputs: 9,
        best_wins: best,
        max_win_probability: f64::from(best) / 9.0,
        perfect_strategies: perfect,
    }
}

/// How the four qubits of the resource are locked before the players use it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResourceLock {
    None,
    /// Every qubit under an independent one-time pad the players do not know.
    QotpUnknownKeys,
    /// Every qubit under an independent RBE key the players do not know.
    RbeUnknownKeys,
    /// RBE-locked and then unlocked with the right keys.
    RbeKnownKeys,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilityResult {
    pub plays: u64,
    pub wins: u64,
    pub win_rate: f64,
    pub stderr: f64,
    /// Exact win probability of the key-averaged resource.
    pub exact: f64,
}

/// Plays the quantum strategy (inputs uniform) on a locked resource whose
/// keys the players ignore.
pub fn locked_resource_utility<T: TrialRunner>(
    lock: ResourceLock,
    key_space: &KeySpace,
    plays: u64,
    seed: u64,
    runner: &T,
) -> Result<UtilityResult> {
    key_space.validate()?;
    if plays == 0 {
        return Err(Error::InvalidArgument("utility needs at least one play".into()));
    }
    let base = FourQubitResource::new().state;
    let counts: Counts<1> = runner.run(seed, domain::MAGIC_SQUARE, plays, |rng, t: &mut Counts<1>| {
        let mut s = base.clone();
        for q in 0..4 {
            s = match lock {
                ResourceLock::None => Ok(s),
                ResourceLock::QotpUnknownKeys => s.apply(&QotpKey::random(rng).unitary(), &[q]),
                ResourceLock::RbeUnknownKeys => s.apply(&gen(key_space, rng).expect("validated").matrix(), &[q]),
                ResourceLock::RbeKnownKeys => {
                    let k = gen(key_space, rng).expect("validated").matrix();
                    s.apply(&k, &[q]).and_then(|s| s.apply(&k.dagger(), &[q]))
                }
            }
            .expect("single-qubit gate on a valid qubit");
        }
        let (i, j) = (rng.random_range(1..=3), rng.random_range(1..=3));
        t.0[0] += u64::from(play_state(&s, i, j, rng).expect("valid inputs").win);
    });
    let wins = counts.0[0];
    let win_rate = ratio(wins, plays);
    Ok(UtilityResult {
        plays,
        wins,
        win_rate,
        stderr: binomial_stderr(win_rate, plays),
        exact: exact_utility(lock, key_space)?,
    })
}

fn exact_utility(lock: ResourceLock, key_space: &KeySpace) -> Result<f64> {
    let unitaries: Vec<Unitary> = match lock {
        ResourceLock::None | ResourceLock::RbeKnownKeys => return Ok(1.0),
        ResourceLock::QotpUnknownKeys => QotpKey::all().iter().map(QotpKey::unitary).collect(),
        ResourceLock::RbeUnknownKeys => {
            let n = match *key_space {
                KeySpace::Discrete { n } => n,
                KeySpace::Continuous => KeySpace::DEFAULT_DISCRETE_N,
            };
            KeySpace::discrete(n)?.keys().expect("discrete").iter().map(RbeKey::matrix).collect()
        }
    };
    let mut rho = DensityMatrix::from_state(&FourQubitResource::new().state);
    for q in 0..4 {
        rho = average_channel(&rho, q, &unitaries)?;
    }
    magic_square_win_probability(&rho)
}
