use alloc::vec::Vec;

use rand::Rng;

use super::{
    apply_raw, check_capacity, check_targets, CMatrix, OrthonormalBasis, Unitary, AMPLITUDE_TOL, C64, ONE, ZERO,
};
use crate::{Error, Result};

/// A normalized pure state on `n ≤ MAX_QUBITS` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        Self::basis_state(num_qubits, 0)
    }

    pub fn basis_state(num_qubits: usize, index: usize) -> Result<Self> {
        check_capacity(num_qubits)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::InvalidArgument(alloc::format!(
                "basis index {index} out of range for {num_qubits} qubits"
            )));
        }
        let mut amps = alloc::vec![ZERO; dim];
        amps[index] = ONE;
        Ok(Self { num_qubits, amps })
    }

    /// `|b0 b1 …⟩` from a slice of 0/1 values.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidArgument(alloc::format!("bit value {b} is not 0 or 1")));
        }
        let index = bits.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b));
        Self::basis_state(bits.len(), index)
    }

    pub fn qubit(amps: [C64; 2]) -> Result<Self> {
        Self::from_amplitudes(amps.to_vec())
    }

    /// Admits an amplitude vector whose squared norm is within `1e-12` of one.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let num_qubits = Self::qubits_for(amps.len())?;
        let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if norm_sqr.is_nan() || (norm_sqr - 1.0).abs() > AMPLITUDE_TOL {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(Self { num_qubits, amps })
    }

    /// Rescales a nonzero amplitude vector to unit norm.
    pub fn normalized(amps: Vec<C64>) -> Result<Self> {
        let num_qubits = Self::qubits_for(amps.len())?;
        let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if !(norm_sqr > 0.0 && norm_sqr.is_finite()) {
            return Err(Error::NotNormalized { norm_sqr });
        }
        let inv = 1.0 / libm::sqrt(norm_sqr);
        Ok(Self { num_qubits, amps: amps.into_iter().map(|a| a * inv).collect() })
    }

    fn qubits_for(len: usize) -> Result<usize> {
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::InvalidArgument(alloc::format!("amplitude vector length {len} is not a power of two")));
        }
        let n = len.trailing_zeros() as usize;
        check_capacity(n)?;
        Ok(n)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amps[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        check_capacity(self.num_qubits + other.num_qubits)?;
        let amps = self.amps.iter().flat_map(|a| other.amps.iter().map(move |b| a * b)).collect();
        Ok(Self { num_qubits: self.num_qubits + other.num_qubits, amps })
    }

    /// Multiplies every amplitude by `e^{iφ}`.
    pub fn with_phase(&self, phi: f64) -> Self {
        let e = super::cis(phi);
        Self { num_qubits: self.num_qubits, amps: self.amps.iter().map(|a| a * e).collect() }
    }

    /// Applies `gate` to `targets`; `targets[0]` is the gate's most significant qubit.
    pub fn apply(&self, gate: &Unitary, targets: &[usize]) -> Result<Self> {
        if gate.num_qubits() != targets.len() {
            return Err(Error::DimensionMismatch { expected: gate.num_qubits(), found: targets.len() });
        }
        check_targets(targets, self.num_qubits)?;
        let amps = apply_raw(&self.amps, self.num_qubits, gate.matrix().data(), targets);
        Ok(Self { num_qubits: self.num_qubits, amps })
    }

    /// Projects `qubit` onto `vector`, returning the unnormalized overlap
    /// amplitudes indexed by the remaining qubits (big-endian, order kept).
    fn contract(&self, qubit: usize, vector: [C64; 2]) -> Vec<C64> {
        let shift = self.num_qubits - 1 - qubit;
        let low = (1usize << shift) - 1;
        let (v0, v1) = (vector[0].conj(), vector[1].conj());
        (0..self.dim() / 2)
            .map(|r| {
                let i0 = ((r & !low) << 1) | (r & low);
                v0 * self.amps[i0] + v1 * self.amps[i0 | (1 << shift)]
            })
            .collect()
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        check_targets(&[qubit], self.num_qubits)
    }

    /// Probability that measuring `qubit` in `basis` yields `outcome`.
    pub fn outcome_probability(&self, qubit: usize, basis: &OrthonormalBasis, outcome: u8) -> Result<f64> {
        self.check_qubit(qubit)?;
        Ok(self.contract(qubit, basis.vector(outcome)).iter().map(|a| a.norm_sqr()).sum())
    }

    /// The post-measurement branch for a given outcome with the qubit kept
    /// (collapsed onto the basis vector). `None` when the outcome has zero
    /// probability.
    pub fn branch(&self, qubit: usize, basis: &OrthonormalBasis, outcome: u8) -> Result<Option<(f64, Self)>> {
        Ok(self.discard_branch(qubit, basis, outcome)?.map(|(p, rest)| {
            let v = basis.state(outcome);
            (p, insert_qubit(&rest, qubit, &v))
        }))
    }

    /// Like [`branch`](Self::branch) but the measured qubit is removed.
    pub fn discard_branch(&self, qubit: usize, basis: &OrthonormalBasis, outcome: u8) -> Result<Option<(f64, Self)>> {
        self.check_qubit(qubit)?;
        if self.num_qubits == 1 {
            let p = self.outcome_probability(qubit, basis, outcome)?;
            return Ok((p > 0.0).then(|| (p, Self { num_qubits: 0, amps: alloc::vec![ONE] })));
        }
        let rest = self.contract(qubit, basis.vector(outcome));
        let p: f64 = rest.iter().map(|a| a.norm_sqr()).sum();
        if p <= 0.0 {
            return Ok(None);
        }
        Ok(Some((p, Self::normalized(rest)?)))
    }

    fn sample_outcome<R: Rng + ?Sized>(&self, qubit: usize, basis: &OrthonormalBasis, rng: &mut R) -> Result<u8> {
        let p0 = self.outcome_probability(qubit, basis, 0)?;
        let p1 = self.outcome_probability(qubit, basis, 1)?;
        let u: f64 = rng.random::<f64>() * (p0 + p1);
        Ok(if u < p0 { 0 } else { 1 })
    }

    /// Projective measurement of one qubit; the qubit stays in the register.
    pub fn measure_in_basis<R: Rng + ?Sized>(
        &self,
        qubit: usize,
        basis: &OrthonormalBasis,
        rng: &mut R,
    ) -> Result<(u8, Self)> {
        let outcome = self.sample_outcome(qubit, basis, rng)?;
        let (_, post) = self.branch(qubit, basis, outcome)?.expect("sampled outcome has positive probability");
        Ok((outcome, post))
    }

    /// Projective measurement of one qubit, which is then traced out.
    pub fn measure_and_discard<R: Rng + ?Sized>(
        &self,
        qubit: usize,
        basis: &OrthonormalBasis,
        rng: &mut R,
    ) -> Result<(u8, Self)> {
        let outcome = self.sample_outcome(qubit, basis, rng)?;
        let (_, post) = self.discard_branch(qubit, basis, outcome)?.expect("sampled outcome has positive probability");
        Ok((outcome, post))
    }

    /// Joint outcome distribution when every qubit `k` is measured in
    /// `bases[k]`. Entry `j` is the probability of the outcome string whose
    /// big-endian index is `j`.
    pub fn outcome_distribution(&self, bases: &[OrthonormalBasis]) -> Result<Vec<f64>> {
        if bases.len() != self.num_qubits {
            return Err(Error::DimensionMismatch { expected: self.num_qubits, found: bases.len() });
        }
        let mut amps = self.amps.clone();
        for (q, b) in bases.iter().enumerate() {
            let k_dag = b.to_unitary().dagger();
            amps = apply_raw(&amps, self.num_qubits, k_dag.matrix().data(), &[q]);
        }
        Ok(amps.iter().map(|a| a.norm_sqr()).collect())
    }

    pub fn equal_up_to_global_phase(&self, other: &Self, tol: f64) -> bool {
        match self.inner(other) {
            Ok(ip) => {
                (1.0 - ip.norm()).abs() <= tol
                    && (self.norm_sqr() - 1.0).abs() <= tol
                    && (other.norm_sqr() - 1.0).abs() <= tol
            }
            Err(_) => false,
        }
    }

    /// Applies a possibly non-unitary operator (e.g. a projector) and
    /// renormalizes. Returns the squared norm before renormalization, or
    /// `None` when the result vanishes.
    pub fn project(&self, op: &CMatrix, targets: &[usize]) -> Result<Option<(f64, Self)>> {
        if op.dim() != 1 << targets.len() {
            return Err(Error::DimensionMismatch { expected: 1 << targets.len(), found: op.dim() });
        }
        check_targets(targets, self.num_qubits)?;
        let amps = apply_raw(&self.amps, self.num_qubits, op.data(), targets);
        let p: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if p <= 0.0 {
            return Ok(None);
        }
        Ok(Some((p, Self::normalized(amps)?)))
    }

    /// Bloch coordinates `(x, y, z)` of a single-qubit state.
    pub fn bloch_vector(&self) -> Result<[f64; 3]> {
        if self.num_qubits != 1 {
            return Err(Error::DimensionMismatch { expected: 1, found: self.num_qubits });
        }
        let (a, b) = (self.amps[0], self.amps[1]);
        let off = a.conj() * b;
        Ok([2.0 * off.re, 2.0 * off.im, a.norm_sqr() - b.norm_sqr()])
    }
}

/// Re-inserts a single-qubit factor at position `qubit`.
fn insert_qubit(rest: &StateVector, qubit: usize, v: &StateVector) -> StateVector {
    let n = rest.num_qubits + 1;
    let shift = n - 1 - qubit;
    let low = (1usize << shift) - 1;
    let mut amps = alloc::vec![ZERO; 1 << n];
    for (r, a) in rest.amps.iter().enumerate() {
        let i0 = ((r & !low) << 1) | (r & low);
        amps[i0] = a * v.amps[0];
        amps[i0 | (1 << shift)] = a * v.amps[1];
    }
    StateVector { num_qubits: n, amps }
}

pub fn tensor(a: &StateVector, b: &StateVector) -> Result<StateVector> {
    a.tensor(b)
}

pub fn measure_in_basis<R: Rng + ?Sized>(
    state: &StateVector,
    qubit: usize,
    basis: &OrthonormalBasis,
    rng: &mut R,
) -> Result<(u8, StateVector)> {
    state.measure_in_basis(qubit, basis, rng)
}

pub fn outcome_distribution(state: &StateVector, bases: &[OrthonormalBasis]) -> Result<Vec<f64>> {
    state.outcome_distribution(bases)
}

pub fn equal_up_to_global_phase(a: &StateVector, b: &StateVector, tol: f64) -> bool {
    a.equal_up_to_global_phase(b, tol)
}
