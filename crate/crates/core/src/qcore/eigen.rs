use alloc::vec::Vec;

use super::CMatrix;

/// Eigenvalues of a Hermitian matrix, ascending.
///
/// `H = A + iB` is embedded as the real symmetric `[[A, -B], [B, A]]`, whose
/// spectrum is that of `H` with every eigenvalue doubled; cyclic Jacobi
/// rotations diagonalize it and every other sorted value is kept.
pub fn hermitian_eigenvalues(h: &CMatrix) -> Vec<f64> {
    let n = h.dim();
    let m = 2 * n;
    let mut a = alloc::vec![0.0f64; m * m];
    for r in 0..n {
        for c in 0..n {
            // symmetrize so small anti-Hermitian noise cannot break Jacobi
            let z = (h.get(r, c) + h.get(c, r).conj()) * 0.5;
            a[r * m + c] = z.re;
            a[(r + n) * m + c + n] = z.re;
            a[(r + n) * m + c] = z.im;
            a[r * m + c + n] = -z.im;
        }
    }
    let mut eig = symmetric_eigenvalues(a, m);
    eig.sort_by(f64::total_cmp);
    eig.into_iter().step_by(2).collect()
}

fn symmetric_eigenvalues(mut a: Vec<f64>, n: usize) -> Vec<f64> {
    let scale: f64 = a.iter().map(|x| x * x).sum();
    for _sweep in 0..64 {
        let off: f64 = (0..n)
            .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| a[p * n + q] * a[p * n + q])
            .sum();
        if off <= 1e-30 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    let t = 1.0 / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                    if theta < 0.0 {
                        -t
                    } else {
                        t
                    }
                };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let (kp, kq) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * kp - s * kq;
                    a[k * n + q] = s * kp + c * kq;
                }
                for k in 0..n {
                    let (pk, qk) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * pk - s * qk;
                    a[q * n + k] = s * pk + c * qk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}
