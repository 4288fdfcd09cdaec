//! Cyclic Jacobi eigensolver for Hermitian matrices.

use num_complex::Complex64;

use super::matrix::{ComplexMatrix, ZERO};
use crate::error::{Error, Result};

/// Off-diagonal Frobenius norm at which a sweep loop stops, relative to
/// `max(1, ‖M‖_F)`.
pub const JACOBI_TOL: f64 = 1e-13;
const MAX_SWEEPS: usize = 100;

/// Hermitian input accepted up to this elementwise `|M - M†|`, scaled by `max(1, max|m_ij|)`.
pub const HERMITIAN_INPUT_TOL: f64 = 1e-12;

/// Eigen-decomposition `M = V diag(λ) V†` with eigenvalues descending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Unitary; column `k` is the eigenvector of `eigenvalues[k]`.
    pub eigenvectors: ComplexMatrix,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        self.eigenvectors.column(k)
    }

    /// `V diag(f(λ)) V†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.dim();
        let v = &self.eigenvectors;
        let fl: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        ComplexMatrix::from_fn(n, n, |i, j| {
            let mut acc = ZERO;
            for k in 0..n {
                if fl[k] != 0.0 {
                    acc += v[(i, k)] * v[(j, k)].conj() * fl[k];
                }
            }
            acc
        })
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map(|l| l)
    }

    pub fn min(&self) -> f64 {
        *self.eigenvalues.last().expect("empty spectrum")
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[0]
    }
}

pub fn hermitian_eig(m: &ComplexMatrix) -> Result<Spectrum> {
    if !m.is_square() {
        return Err(Error::NotSquare(m.rows(), m.cols()));
    }
    let scale = m.as_slice().iter().map(|z| z.norm()).fold(1.0, f64::max);
    let defect = m.hermiticity_defect();
    if defect > HERMITIAN_INPUT_TOL * scale {
        return Err(Error::NotHermitian(defect));
    }
    Ok(jacobi(m.hermitian_part()))
}

/// Eigenvalues only, descending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    hermitian_eig(m).map(|s| s.eigenvalues)
}

fn off_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn jacobi(mut a: ComplexMatrix) -> Spectrum {
    let n = a.rows();
    let mut v = ComplexMatrix::identity(n);
    let tol = JACOBI_TOL * a.frobenius_norm().max(1.0);

    for _ in 0..MAX_SWEEPS {
        if off_norm(&a) <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let b = a[(p, q)];
                let mag = b.norm();
                if mag < 1e-300 {
                    continue;
                }
                // Phase `ē = conj(b)/|b|` makes the (p,q) entry real, then a real
                // rotation annihilates it: J = [[c, s], [-s ē, c ē]].
                let eb = b.conj() / mag;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let e = eb.conj();

                // A <- A J
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - akq * eb * s;
                    a[(k, q)] = akp * s + akq * eb * c;
                }
                // A <- J† A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c - aqk * e * s;
                    a[(q, k)] = apk * s + aqk * e * c;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
                // V <- V J
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * eb * s;
                    v[(k, q)] = vkp * s + vkq * eb * c;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let eigenvalues = order.iter().map(|&k| a[(k, k)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Spectrum { eigenvalues, eigenvectors }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::ONE;
    use crate::rng::SplitMix64;

    fn random_hermitian(n: usize, seed: u64) -> ComplexMatrix {
        let mut rng = SplitMix64::new(seed);
        let g = ComplexMatrix::from_fn(n, n, |_, _| rng.complex_gaussian());
        g.add(&g.adjoint()).scale(0.5)
    }

    #[test]
    fn identity_spectrum() {
        let s = hermitian_eig(&ComplexMatrix::identity(3)).unwrap();
        assert_eq!(s.eigenvalues, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn pauli_x() {
        let x = ComplexMatrix::from_vec(2, 2, vec![ZERO, ONE, ONE, ZERO]).unwrap();
        let s = hermitian_eig(&x).unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-15);
        assert!((s.eigenvalues[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn pauli_y_complex_offdiagonal() {
        let i = Complex64::new(0.0, 1.0);
        let y = ComplexMatrix::from_vec(2, 2, vec![ZERO, -i, i, ZERO]).unwrap();
        let s = hermitian_eig(&y).unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-15);
        assert!(s.reconstruct().max_abs_diff(&y) < 1e-14);
    }

    #[test]
    fn random_six_by_six_reconstructs() {
        for seed in 0..20 {
            let m = random_hermitian(6, seed);
            let s = hermitian_eig(&m).unwrap();
            assert!(s.reconstruct().max_abs_diff(&m) <= 1e-9);
            let vv = s.eigenvectors.adjoint().matmul(&s.eigenvectors);
            assert!(vv.max_abs_diff(&ComplexMatrix::identity(6)) <= 1e-9);
            assert!(s.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn larger_random_reconstructs() {
        let m = random_hermitian(36, 77);
        let s = hermitian_eig(&m).unwrap();
        assert!(s.reconstruct().max_abs_diff(&m) <= 1e-9);
    }

    #[test]
    fn rejects_non_square_and_non_hermitian() {
        let r = ComplexMatrix::zeros(2, 3);
        assert!(matches!(hermitian_eig(&r), Err(Error::NotSquare(2, 3))));
        let m = ComplexMatrix::from_vec(2, 2, vec![ZERO, ONE, ZERO, ZERO]).unwrap();
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian(_))));
    }
}
