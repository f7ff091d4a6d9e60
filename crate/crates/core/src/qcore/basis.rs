use core::f64::consts::PI;

use super::{cis, CMatrix, StateVector, Unitary, C64, ONE, ZERO};
use crate::{Error, Result};

/// The single-qubit basis `B(θ, φ)`:
///
/// ```text
/// ψ0 = ( cos θ/2,  e^{iφ} sin θ/2)
/// ψ1 = ( sin θ/2, -e^{iφ} cos θ/2)
/// ```
///
/// The two vectors are orthonormal for every real `θ`, `φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "BasisAngles", into = "BasisAngles"))]
pub struct OrthonormalBasis {
    theta: f64,
    phi: f64,
    psi: [[C64; 2]; 2],
}

/// Serialized form: the angles alone.
#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
struct BasisAngles {
    theta: f64,
    phi: f64,
}

#[cfg(feature = "serde")]
impl From<OrthonormalBasis> for BasisAngles {
    fn from(b: OrthonormalBasis) -> Self {
        BasisAngles { theta: b.theta, phi: b.phi }
    }
}

#[cfg(feature = "serde")]
impl TryFrom<BasisAngles> for OrthonormalBasis {
    type Error = Error;

    fn try_from(a: BasisAngles) -> Result<Self> {
        if a.theta == 0.0 && a.phi == PI {
            return Ok(Self::computational());
        }
        Self::from_angles(a.theta, a.phi)
    }
}

impl OrthonormalBasis {
    pub fn from_angles(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(Error::InvalidArgument(alloc::format!("basis angles must be finite (θ={theta}, φ={phi})")));
        }
        let (c, s) = (libm::cos(theta / 2.0), libm::sin(theta / 2.0));
        let e = cis(phi);
        let psi = [[C64::new(c, 0.0), e * s], [C64::new(s, 0.0), -e * c]];
        Ok(Self { theta, phi, psi })
    }

    /// `{|0⟩, |1⟩}`, i.e. `B(0, π)` with the rounding residue removed.
    pub fn computational() -> Self {
        Self { theta: 0.0, phi: PI, psi: [[ONE, ZERO], [ZERO, ONE]] }
    }

    /// `{|+⟩, |−⟩}`, i.e. `B(π/2, 0)`.
    pub fn hadamard() -> Self {
        Self::from_angles(PI / 2.0, 0.0).expect("finite angles")
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Amplitudes of `ψ_outcome` (`outcome` is 0 or 1).
    pub fn vector(&self, outcome: u8) -> [C64; 2] {
        self.psi[usize::from(outcome & 1)]
    }

    pub fn state(&self, outcome: u8) -> StateVector {
        StateVector::qubit(self.vector(outcome)).expect("basis vectors are normalized")
    }

    /// The change-of-basis unitary `K` whose columns are `ψ0` and `ψ1`.
    pub fn to_unitary(&self) -> Unitary {
        let [p0, p1] = self.psi;
        let m = CMatrix::new(2, alloc::vec![p0[0], p1[0], p0[1], p1[1]]).expect("2x2");
        Unitary::from_matrix_unchecked(m)
    }

    /// `⟨ψ_a|ψ_b⟩` for `a, b ∈ {0, 1}`.
    pub fn gram(&self) -> [[C64; 2]; 2] {
        let ip = |a: &[C64; 2], b: &[C64; 2]| a[0].conj() * b[0] + a[1].conj() * b[1];
        [
            [ip(&self.psi[0], &self.psi[0]), ip(&self.psi[0], &self.psi[1])],
            [ip(&self.psi[1], &self.psi[0]), ip(&self.psi[1], &self.psi[1])],
        ]
    }
}
