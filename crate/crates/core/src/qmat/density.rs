use num_complex::Complex64;

use super::eig::{hermitian_eig, Spectrum};
use super::matrix::{vec_norm, ComplexMatrix, ZERO};
use crate::error::{Error, Result};

/// Elementwise `|M - M†|` allowed on validated states.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Allowed `|Tr ρ - 1|`.
pub const TRACE_TOL: f64 = 1e-10;
/// Smallest eigenvalue accepted is `-POSITIVITY_TOL`.
pub const POSITIVITY_TOL: f64 = 1e-10;
/// Eigenvalues at or below this are outside the support.
pub const SUPPORT_TOL: f64 = 1e-12;
/// Allowed `| ‖ψ‖ - 1 |` on pure states.
pub const NORM_TOL: f64 = 1e-12;

/// Validation tolerances; [`Tolerances::default`] gives the module constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub hermitian: f64,
    pub trace: f64,
    pub positivity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { hermitian: HERMITIAN_TOL, trace: TRACE_TOL, positivity: POSITIVITY_TOL }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Party {
    A,
    B,
}

impl Party {
    pub fn other(self) -> Party {
        match self {
            Party::A => Party::B,
            Party::B => Party::A,
        }
    }
}

/// Bipartite density matrix on `C^dim_a ⊗ C^dim_b`, basis index `a·dim_b + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim_a: usize,
    dim_b: usize,
    mat: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(dim_a: usize, dim_b: usize, mat: ComplexMatrix) -> Result<Self> {
        Self::with_tolerances(dim_a, dim_b, mat, &Tolerances::default())
    }

    pub fn with_tolerances(dim_a: usize, dim_b: usize, mat: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        check_dims(dim_a, dim_b, &mat)?;
        let herm = mat.hermiticity_defect();
        if herm > tol.hermitian {
            return Err(Error::NotHermitian(herm));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > tol.trace || tr.im.abs() > tol.trace {
            return Err(Error::InvalidTrace(tr.re));
        }
        let mat = mat.hermitian_part();
        let min = hermitian_eig(&mat)?.min();
        if min < -tol.positivity {
            return Err(Error::NotPositive(min));
        }
        Ok(Self { dim_a, dim_b, mat })
    }

    /// Wraps a matrix that is a state up to rounding (output of a CP map,
    /// convex combination, ...). Only the Hermitian part is kept.
    pub(crate) fn trusted(dim_a: usize, dim_b: usize, mat: ComplexMatrix) -> Self {
        debug_assert_eq!(mat.rows(), dim_a * dim_b);
        Self { dim_a, dim_b, mat: mat.hermitian_part() }
    }

    /// Wraps a positive matrix and divides by its trace.
    pub(crate) fn trusted_normalized(dim_a: usize, dim_b: usize, mat: ComplexMatrix) -> Self {
        let tr = mat.trace().re;
        Self::trusted(dim_a, dim_b, mat.scale(1.0 / tr))
    }

    pub fn maximally_mixed(dim_a: usize, dim_b: usize) -> Self {
        let n = dim_a * dim_b;
        Self::trusted(dim_a, dim_b, ComplexMatrix::identity(n).scale(1.0 / n as f64))
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dim_a, self.dim_b)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn spectrum(&self) -> Spectrum {
        hermitian_eig(&self.mat).expect("density matrices are Hermitian")
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.spectrum().eigenvalues
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    pub fn purity(&self) -> f64 {
        self.mat.trace_product(&self.mat).re
    }

    /// `Σ pᵢ ρᵢ` over states of equal dimensions; weights are renormalized.
    pub fn mixture(weights: &[f64], states: &[DensityMatrix]) -> Result<Self> {
        let first = states.first().ok_or_else(|| Error::InvalidParameter("empty mixture".into()))?;
        if weights.len() != states.len() {
            return Err(Error::DimensionMismatch { expected: states.len(), got: weights.len() });
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|&w| w < 0.0) || total <= 0.0 {
            return Err(Error::InvalidParameter("mixture weights must be non-negative".into()));
        }
        let mut acc = ComplexMatrix::zeros(first.dim(), first.dim());
        for (w, s) in weights.iter().zip(states) {
            if s.dims() != first.dims() {
                return Err(Error::DimensionMismatch { expected: first.dim(), got: s.dim() });
            }
            acc.add_scaled_in_place(&s.mat, w / total);
        }
        Ok(Self::trusted(first.dim_a, first.dim_b, acc))
    }

    /// `(1-t)·self + t·other`.
    pub fn lerp(&self, other: &DensityMatrix, t: f64) -> DensityMatrix {
        Self::trusted(self.dim_a, self.dim_b, self.mat.lerp(&other.mat, t))
    }

    /// Largest elementwise difference between the two matrices.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.mat.max_abs_diff(&other.mat)
    }
}

fn check_dims(dim_a: usize, dim_b: usize, mat: &ComplexMatrix) -> Result<()> {
    if !mat.is_square() {
        return Err(Error::NotSquare(mat.rows(), mat.cols()));
    }
    if dim_a == 0 || dim_b == 0 || dim_a * dim_b != mat.rows() {
        return Err(Error::DimensionMismatch { expected: dim_a * dim_b, got: mat.rows() });
    }
    Ok(())
}

/// Normalized state vector on `C^dim_a ⊗ C^dim_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dim_a: usize,
    dim_b: usize,
    amps: Vec<Complex64>,
}

impl PureState {
    pub fn new(dim_a: usize, dim_b: usize, amps: Vec<Complex64>) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 || amps.len() != dim_a * dim_b {
            return Err(Error::DimensionMismatch { expected: dim_a * dim_b, got: amps.len() });
        }
        let n = vec_norm(&amps);
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n));
        }
        Ok(Self { dim_a, dim_b, amps })
    }

    /// Scales `amps` to unit norm.
    pub fn normalized(dim_a: usize, dim_b: usize, amps: Vec<Complex64>) -> Result<Self> {
        let n = vec_norm(&amps);
        if n == 0.0 || !n.is_finite() {
            return Err(Error::NotNormalized(n));
        }
        Self::new(dim_a, dim_b, amps.into_iter().map(|z| z / n).collect())
    }

    /// `|a> ⊗ |b>` of two single-party vectors.
    pub fn product(a: &[Complex64], b: &[Complex64]) -> Result<Self> {
        let amps = a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect();
        Self::normalized(a.len(), b.len(), amps)
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::trusted(self.dim_a, self.dim_b, ComplexMatrix::projector(&self.amps))
    }

    /// Reduced state of one party; the result carries `dim_b = 1`.
    pub fn reduced(&self, keep: Party) -> DensityMatrix {
        let (da, db) = (self.dim_a, self.dim_b);
        let amp = |a: usize, b: usize| self.amps[a * db + b];
        let m = match keep {
            Party::A => ComplexMatrix::from_fn(da, da, |i, j| (0..db).map(|b| amp(i, b) * amp(j, b).conj()).sum()),
            Party::B => ComplexMatrix::from_fn(db, db, |i, j| (0..da).map(|a| amp(a, i) * amp(a, j).conj()).sum()),
        };
        let n = m.rows();
        DensityMatrix::trusted(n, 1, m)
    }

    /// `self ⊗ other` with subsystems regrouped as (A₁A₂|B₁B₂).
    pub fn tensor(&self, other: &PureState) -> PureState {
        let perm = copy_regroup_perm(self.dim_a, self.dim_b, other.dim_a, other.dim_b);
        let mut amps = vec![ZERO; perm.len()];
        for (i, x) in self.amps.iter().enumerate() {
            for (j, y) in other.amps.iter().enumerate() {
                amps[perm[i * other.amps.len() + j]] = x * y;
            }
        }
        PureState { dim_a: self.dim_a * other.dim_a, dim_b: self.dim_b * other.dim_b, amps }
    }
}

/// Permutation from the plain Kronecker ordering `(a₁ b₁ a₂ b₂)` to the
/// bipartite ordering `(a₁ a₂ | b₁ b₂)`: `perm[kron_index] = regrouped_index`.
///
/// With `kron_index = ((a₁·db1 + b₁)·da2 + a₂)·db2 + b₂` the target is
/// `(a₁·da2 + a₂)·(db1·db2) + b₁·db2 + b₂`. Every multi-copy path uses this.
pub fn copy_regroup_perm(da1: usize, db1: usize, da2: usize, db2: usize) -> Vec<usize> {
    let mut perm = vec![0; da1 * db1 * da2 * db2];
    for a1 in 0..da1 {
        for b1 in 0..db1 {
            for a2 in 0..da2 {
                for b2 in 0..db2 {
                    let k = ((a1 * db1 + b1) * da2 + a2) * db2 + b2;
                    perm[k] = (a1 * da2 + a2) * (db1 * db2) + b1 * db2 + b2;
                }
            }
        }
    }
    perm
}

/// `a ⊗ b` as a bipartite state on (A₁A₂|B₁B₂).
pub fn tensor_product(a: &DensityMatrix, b: &DensityMatrix) -> DensityMatrix {
    let perm = copy_regroup_perm(a.dim_a, a.dim_b, b.dim_a, b.dim_b);
    let k = a.mat.kron(&b.mat);
    let n = k.rows();
    let mut out = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(perm[i], perm[j])] = k[(i, j)];
        }
    }
    DensityMatrix::trusted(a.dim_a * b.dim_a, a.dim_b * b.dim_b, out)
}

/// `ρ^{⊗n}` for `n ≥ 1`.
pub fn tensor_power(rho: &DensityMatrix, n: usize) -> DensityMatrix {
    assert!(n >= 1);
    (1..n).fold(rho.clone(), |acc, _| tensor_product(&acc, rho))
}

/// Traces out `party`; the remaining party is returned with `dim_b = 1`.
pub fn partial_trace(rho: &DensityMatrix, traced: Party) -> DensityMatrix {
    let (da, db) = rho.dims();
    let m = &rho.mat;
    let out = match traced {
        Party::B => ComplexMatrix::from_fn(da, da, |i, j| (0..db).map(|b| m[(i * db + b, j * db + b)]).sum()),
        Party::A => ComplexMatrix::from_fn(db, db, |i, j| (0..da).map(|a| m[(a * db + i, a * db + j)]).sum()),
    };
    let n = out.rows();
    DensityMatrix::trusted(n, 1, out)
}

/// Partial transpose on `party`. Hermitian with unit trace, not necessarily positive.
pub fn partial_transpose(rho: &DensityMatrix, party: Party) -> ComplexMatrix {
    let (da, db) = rho.dims();
    let n = da * db;
    let m = &rho.mat;
    ComplexMatrix::from_fn(n, n, |r, c| {
        let (a1, b1) = (r / db, r % db);
        let (a2, b2) = (c / db, c % db);
        match party {
            Party::B => m[(a1 * db + b2, a2 * db + b1)],
            Party::A => m[(a2 * db + b1, a1 * db + b2)],
        }
    })
}

/// Shannon entropy in bits of a probability (or eigenvalue) list, `0·log 0 = 0`.
/// Entries at or below zero contribute nothing.
pub fn shannon_bits(p: &[f64]) -> f64 {
    let s: f64 = p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum();
    s.max(0.0)
}

/// Von Neumann entropy in bits.
pub fn vn_entropy(rho: &DensityMatrix) -> f64 {
    shannon_bits(&rho.eigenvalues())
}

/// `S(ρ‖σ) = Tr ρ(log₂ρ − log₂σ)`, or `f64::INFINITY` when the support of `ρ`
/// is not contained in that of `σ`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dims() != sigma.dims() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), got: sigma.dim() });
    }
    let ss = sigma.spectrum();
    Ok(relative_entropy_with(rho, -vn_entropy(rho), &ss))
}

/// Relative entropy given `-S(ρ)` and the spectrum of `σ` precomputed.
pub(crate) fn relative_entropy_with(rho: &DensityMatrix, neg_entropy: f64, sigma: &Spectrum) -> f64 {
    let mut cross = 0.0;
    let mut outside = 0.0;
    for k in 0..sigma.dim() {
        let v = sigma.vector(k);
        let w = rho.mat.expectation(&v).re;
        let mu = sigma.eigenvalues[k];
        if mu > SUPPORT_TOL {
            cross += w * mu.log2();
        } else {
            outside += w;
        }
    }
    if outside > SUPPORT_TOL {
        return f64::INFINITY;
    }
    (neg_entropy - cross).max(0.0)
}

/// `<ψ₊(d)| ρ |ψ₊(d)>` for a `d ⊗ d` state.
pub fn entangled_fidelity(rho: &DensityMatrix) -> Result<f64> {
    let (da, db) = rho.dims();
    if da != db {
        return Err(Error::DimensionMismatch { expected: da, got: db });
    }
    let d = da;
    let mut acc = ZERO;
    for i in 0..d {
        for j in 0..d {
            acc += rho.mat[(i * d + i, j * d + j)];
        }
    }
    Ok(acc.re / d as f64)
}

/// `½‖ρ − σ‖₁`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dims() != sigma.dims() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), got: sigma.dim() });
    }
    let diff = rho.mat.sub(&sigma.mat);
    Ok(0.5 * hermitian_eig(&diff)?.eigenvalues.iter().map(|x| x.abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::ONE;

    fn bell() -> PureState {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        PureState::new(2, 2, vec![ONE * s, ZERO, ZERO, ONE * s]).unwrap()
    }

    fn basis(d: usize, i: usize) -> Vec<Complex64> {
        (0..d).map(|k| if k == i { ONE } else { ZERO }).collect()
    }

    #[test]
    fn validation_rejects_bad_states() {
        let m = ComplexMatrix::identity(4).scale(0.5);
        assert!(matches!(DensityMatrix::new(2, 2, m), Err(Error::InvalidTrace(_))));
        let m = ComplexMatrix::from_real_diagonal(&[1.5, -0.5]);
        assert!(matches!(DensityMatrix::new(2, 1, m), Err(Error::NotPositive(_))));
        let mut m = ComplexMatrix::identity(2).scale(0.5);
        m[(0, 1)] = Complex64::new(0.1, 0.0);
        assert!(matches!(DensityMatrix::new(2, 1, m), Err(Error::NotHermitian(_))));
        assert!(matches!(
            DensityMatrix::new(2, 3, ComplexMatrix::identity(4).scale(0.25)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn overridable_tolerances() {
        let m = ComplexMatrix::identity(2).scale(0.5 + 1e-8);
        assert!(DensityMatrix::new(2, 1, m.clone()).is_err());
        let loose = Tolerances { trace: 1e-6, ..Tolerances::default() };
        assert!(DensityMatrix::with_tolerances(2, 1, m, &loose).is_ok());
    }

    #[test]
    fn tensor_of_maximally_mixed() {
        let r = DensityMatrix::maximally_mixed(2, 2);
        let t = tensor_product(&r, &r);
        assert_eq!(t.dims(), (4, 4));
        assert!(t.matrix().max_abs_diff(&ComplexMatrix::identity(16).scale(1.0 / 16.0)) < 1e-15);
    }

    #[test]
    fn two_bell_pairs_regroup_to_four_dim_max_entangled() {
        let p = bell().density();
        let t = tensor_product(&p, &p);
        // Explicit index check: |ψ₊(4)> = ½ Σ_{a1,a2} |a1 a2>|a1 a2>.
        let mut psi4 = vec![ZERO; 16];
        for i in 0..4 {
            psi4[i * 4 + i] = Complex64::new(0.5, 0.0);
        }
        let f = t.matrix().expectation(&psi4).re;
        assert!((f - 1.0).abs() < 1e-12);
        assert!((entangled_fidelity(&t).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(bell().tensor(&bell()).density(), t);
    }

    #[test]
    fn partial_trace_of_bell() {
        let r = partial_trace(&bell().density(), Party::B);
        assert!(r.matrix().max_abs_diff(&ComplexMatrix::identity(2).scale(0.5)) < 1e-15);
        let r = partial_trace(&bell().density(), Party::A);
        assert!(r.matrix().max_abs_diff(&ComplexMatrix::identity(2).scale(0.5)) < 1e-15);
    }

    #[test]
    fn partial_trace_of_product() {
        let a = DensityMatrix::trusted(2, 1, ComplexMatrix::from_real_diagonal(&[0.3, 0.7]));
        let b = DensityMatrix::trusted(3, 1, ComplexMatrix::from_real_diagonal(&[0.2, 0.2, 0.6]));
        // Join a (2|1) and b (1|3)-shaped as a product on 2⊗3.
        let ab = DensityMatrix::trusted(2, 3, a.matrix().kron(b.matrix()));
        assert!(partial_trace(&ab, Party::B).matrix().max_abs_diff(a.matrix()) < 1e-15);
        assert!(partial_trace(&ab, Party::A).matrix().max_abs_diff(b.matrix()) < 1e-15);
    }

    #[test]
    fn partial_transpose_of_bell_has_negative_eigenvalue() {
        let pt = partial_transpose(&bell().density(), Party::B);
        let ev = hermitian_eig(&pt).unwrap().eigenvalues;
        let expected = [0.5, 0.5, 0.5, -0.5];
        for (a, b) in ev.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        let twice = DensityMatrix::trusted(2, 2, pt);
        assert_eq!(partial_transpose(&twice, Party::B), *bell().density().matrix());
    }

    #[test]
    fn product_state_is_ppt() {
        let s = PureState::product(&[ONE, ONE], &[ONE, Complex64::new(0.0, 1.0)]).unwrap();
        let pt = partial_transpose(&s.density(), Party::B);
        assert!(hermitian_eig(&pt).unwrap().min() >= -1e-10);
    }

    #[test]
    fn entropies() {
        assert!(vn_entropy(&bell().density()).abs() < 1e-12);
        let mixed = DensityMatrix::maximally_mixed(3, 1);
        assert!((vn_entropy(&mixed) - 3f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn relative_entropy_cases() {
        let p = bell().density();
        assert!(relative_entropy(&p, &p).unwrap_or(1.0) < 1e-12);
        let r = relative_entropy(&p, &DensityMatrix::maximally_mixed(2, 2)).unwrap();
        assert!((r - 2.0).abs() < 1e-12);
        let prod = PureState::product(&basis(2, 0), &basis(2, 1)).unwrap().density();
        assert_eq!(relative_entropy(&p, &prod).unwrap(), f64::INFINITY);
        assert!(relative_entropy(&p, &DensityMatrix::maximally_mixed(2, 1)).is_err());
    }

    #[test]
    fn fidelity_cases() {
        assert!((entangled_fidelity(&bell().density()).unwrap() - 1.0).abs() < 1e-15);
        let m = DensityMatrix::maximally_mixed(3, 3);
        assert!((entangled_fidelity(&m).unwrap() - 1.0 / 9.0).abs() < 1e-15);
        assert!(entangled_fidelity(&DensityMatrix::maximally_mixed(2, 3)).is_err());
    }

    #[test]
    fn pure_state_norm_checked() {
        assert!(matches!(PureState::new(1, 2, vec![ONE, ONE]), Err(Error::NotNormalized(_))));
    }
}
