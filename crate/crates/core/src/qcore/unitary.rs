use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use super::{check_capacity, CMatrix, C64, I, ONE, UNITARITY_TOL, ZERO};
use crate::{Error, Result};

/// A `2^k × 2^k` unitary, checked on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary {
    num_qubits: usize,
    matrix: CMatrix,
}

impl Unitary {
    /// Admits a row-major matrix as a unitary if `max |U†U - I| ≤ 1e-10`.
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self> {
        Self::from_matrix(CMatrix::new(dim, entries)?)
    }

    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        let dim = matrix.dim();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::InvalidArgument(alloc::format!("operator dimension {dim} is not a power of two")));
        }
        let num_qubits = dim.trailing_zeros() as usize;
        check_capacity(num_qubits)?;
        let deviation = unitarity_deviation(&matrix);
        if deviation.is_nan() || deviation > UNITARITY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { num_qubits, matrix })
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        let num_qubits = matrix.dim().trailing_zeros() as usize;
        Self { num_qubits, matrix }
    }

    fn fixed(dim: usize, entries: [C64; 4]) -> Self {
        debug_assert_eq!(dim, 2);
        Self::from_matrix_unchecked(CMatrix::new(dim, entries.to_vec()).expect("2x2"))
    }

    /// Permutation unitary sending basis index `i` to `perm(i)`.
    fn permutation(num_qubits: usize, perm: impl Fn(usize) -> usize) -> Self {
        let dim = 1 << num_qubits;
        let mut m = CMatrix::zeros(dim);
        for col in 0..dim {
            *m.get_mut(perm(col), col) = ONE;
        }
        Self::from_matrix_unchecked(m)
    }

    pub fn identity(num_qubits: usize) -> Result<Self> {
        check_capacity(num_qubits)?;
        Ok(Self::from_matrix_unchecked(CMatrix::identity(1 << num_qubits)))
    }

    pub fn x() -> Self {
        Self::fixed(2, [ZERO, ONE, ONE, ZERO])
    }

    pub fn y() -> Self {
        Self::fixed(2, [ZERO, -I, I, ZERO])
    }

    pub fn z() -> Self {
        Self::fixed(2, [ONE, ZERO, ZERO, -ONE])
    }

    pub fn h() -> Self {
        let s = C64::new(FRAC_1_SQRT_2, 0.0);
        Self::fixed(2, [s, s, s, -s])
    }

    /// The real rotation `U = [[0, 1], [-1, 0]]` used by DL04 to encode a 1.
    pub fn dl04_u() -> Self {
        Self::fixed(2, [ZERO, ONE, -ONE, ZERO])
    }

    /// Controlled-NOT with qubit 0 as control and qubit 1 as target.
    pub fn cnot() -> Self {
        Self::cn_not(1).expect("two qubits fit")
    }

    pub fn swap() -> Self {
        Self::permutation(2, |i| ((i & 1) << 1) | (i >> 1))
    }

    /// `C^n NOT`: qubits `0..n` are controls, qubit `n` is the target.
    pub fn cn_not(controls: usize) -> Result<Self> {
        check_capacity(controls + 1)?;
        let all = (1usize << (controls + 1)) - 2;
        Ok(Self::permutation(controls + 1, |i| if i & all == all { i ^ 1 } else { i }))
    }

    /// `D = CNOT · (H ⊗ I)`, the Bell-pair preparation circuit.
    pub fn d_gate() -> Self {
        let h_i = Self::h().kron(&Self::identity(1).expect("one qubit"));
        Self::cnot().mul(&h_i).expect("same dimension")
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.matrix.get(row, col)
    }

    pub fn dagger(&self) -> Self {
        Self::from_matrix_unchecked(self.matrix.dagger())
    }

    /// Matrix product `self · other` (apply `other` first).
    pub fn mul(&self, other: &Self) -> Result<Self> {
        Ok(Self::from_matrix_unchecked(self.matrix.matmul(&other.matrix)?))
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self::from_matrix_unchecked(self.matrix.kron(&other.matrix))
    }

    /// Multiplies by a global phase `e^{iφ}`.
    pub fn with_phase(&self, phi: f64) -> Self {
        Self::from_matrix_unchecked(self.matrix.scale(super::cis(phi)))
    }

    pub fn unitarity_deviation(&self) -> f64 {
        unitarity_deviation(&self.matrix)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.matrix.max_abs_diff(&other.matrix) <= tol
    }
}

fn unitarity_deviation(m: &CMatrix) -> f64 {
    match m.dagger().matmul(m) {
        Ok(p) => p.max_abs_diff(&CMatrix::identity(m.dim())),
        Err(_) => f64::INFINITY,
    }
}
