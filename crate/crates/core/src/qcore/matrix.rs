use alloc::vec::Vec;

use super::{C64, ONE, ZERO};
use crate::{Error, Result};

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn new(dim: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: data.len() });
        }
        Ok(Self { dim, data })
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: alloc::vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    /// Outer product `|a⟩⟨b|`.
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        let dim = a.len();
        debug_assert_eq!(dim, b.len());
        let mut data = Vec::with_capacity(dim * dim);
        for x in a {
            for y in b {
                data.push(x * y.conj());
            }
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim + col]
    }

    pub(crate) fn get_mut(&mut self, row: usize, col: usize) -> &mut C64 {
        &mut self.data[row * self.dim + col]
    }

    pub fn dagger(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.data[c * n + r] = self.data[r * n + c].conj();
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        let n = self.dim;
        if other.dim != n {
            return Err(Error::DimensionMismatch { expected: n, found: other.dim });
        }
        let mut out = Self::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] += a * other.data[k * n + c];
                }
            }
        }
        Ok(out)
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (n, m) = (self.dim, other.dim);
        let dim = n * m;
        let mut out = Self::zeros(dim);
        for r1 in 0..n {
            for c1 in 0..n {
                let a = self.data[r1 * n + c1];
                for r2 in 0..m {
                    for c2 in 0..m {
                        out.data[(r1 * m + r2) * dim + c1 * m + c2] = a * other.data[r2 * m + c2];
                    }
                }
            }
        }
        out
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|x| x * factor).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Self { dim: self.dim, data })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim;
        (0..n).map(|r| self.data[r * n..(r + 1) * n].iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    /// Largest entry-wise modulus of `self - other`; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Largest entry-wise modulus of `self - self†`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self.data[r * n + c] - self.data[c * n + r].conj()).norm());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_of_identities_is_identity() {
        let k = CMatrix::identity(2).kron(&CMatrix::identity(4));
        assert_eq!(k, CMatrix::identity(8));
    }

    #[test]
    fn matmul_and_dagger() {
        let a = CMatrix::new(2, alloc::vec![ONE, C64::new(0.0, 1.0), ZERO, ONE]).unwrap();
        let p = a.matmul(&a.dagger()).unwrap();
        assert!((p.get(0, 0) - C64::new(2.0, 0.0)).norm() < 1e-15);
        assert!((p.get(0, 1) - C64::new(0.0, 1.0)).norm() < 1e-15);
        assert_eq!(p.hermiticity_deviation(), 0.0);
    }

    #[test]
    fn rejects_ragged_data() {
        assert!(CMatrix::new(2, alloc::vec![ONE; 3]).is_err());
    }
}
