//! State families and seeded samplers.
//!
//! Bell basis ordering used throughout, with `|ψ₊⟩ = (|00⟩+|11⟩)/√2` first so
//! that the first Bell-diagonal weight equals the entangled fidelity:
//!
//! | index | vector |
//! |-------|--------|
//! | 0 | (\|00⟩ + \|11⟩)/√2 |
//! | 1 | (\|00⟩ − \|11⟩)/√2 |
//! | 2 | (\|01⟩ + \|10⟩)/√2 |
//! | 3 | (\|01⟩ − \|10⟩)/√2 |

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qmat::{vec_norm, ComplexMatrix, DensityMatrix, PureState, ONE, ZERO};
use crate::rng::SplitMix64;

/// Parameters of `ϱ(F,d) = p·P₊ + (1−p)·I/d²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsotropicParams {
    pub fidelity: f64,
    pub d: usize,
    /// Mixing weight of `P₊`, `p = (F d² − 1)/(d² − 1)`.
    pub p: f64,
}

impl IsotropicParams {
    pub fn new(fidelity: f64, d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParameter(format!("isotropic local dimension must be >= 2, got {d}")));
        }
        if !(0.0..=1.0).contains(&fidelity) {
            return Err(Error::InvalidParameter(format!("fidelity {fidelity} outside [0, 1]")));
        }
        let d2 = (d * d) as f64;
        let p = (fidelity * d2 - 1.0) / (d2 - 1.0);
        Ok(Self { fidelity, d, p })
    }
}

pub fn maximally_entangled(d: usize) -> Result<PureState> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("local dimension must be >= 2, got {d}")));
    }
    let amp = ONE / (d as f64).sqrt();
    let mut amps = vec![ZERO; d * d];
    for i in 0..d {
        amps[i * d + i] = amp;
    }
    PureState::new(d, d, amps)
}

pub fn isotropic(fidelity: f64, d: usize) -> Result<DensityMatrix> {
    Ok(isotropic_from(&IsotropicParams::new(fidelity, d)?))
}

pub fn isotropic_from(params: &IsotropicParams) -> DensityMatrix {
    let d = params.d;
    let f = params.fidelity;
    let n = d * d;
    // Noise weight on every eigenvector orthogonal to ψ₊.
    let noise = (1.0 - f) / (n - 1) as f64;
    let mut m = ComplexMatrix::identity(n).scale(noise);
    let excess = (f - noise) / d as f64;
    for i in 0..d {
        for j in 0..d {
            m[(i * d + i, j * d + j)] += Complex64::new(excess, 0.0);
        }
    }
    DensityMatrix::trusted(d, d, m)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellDiagonalParams {
    probs: [f64; 4],
}

impl BellDiagonalParams {
    pub fn new(probs: [f64; 4]) -> Result<Self> {
        if probs.iter().any(|&p| p < 0.0 || !p.is_finite()) {
            return Err(Error::InvalidParameter("Bell weights must be non-negative".into()));
        }
        let s: f64 = probs.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("Bell weights sum to {s}, not 1")));
        }
        Ok(Self { probs })
    }

    pub fn probs(&self) -> [f64; 4] {
        self.probs
    }
}

/// The four Bell vectors in the module's ordering.
pub fn bell_basis() -> [PureState; 4] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let v = |a: [f64; 4]| PureState::new(2, 2, a.iter().map(|&x| Complex64::new(x * s, 0.0)).collect()).unwrap();
    [v([1.0, 0.0, 0.0, 1.0]), v([1.0, 0.0, 0.0, -1.0]), v([0.0, 1.0, 1.0, 0.0]), v([0.0, 1.0, -1.0, 0.0])]
}

pub fn bell_diagonal(params: &BellDiagonalParams) -> DensityMatrix {
    let mut m = ComplexMatrix::zeros(4, 4);
    for (p, b) in params.probs.iter().zip(bell_basis()) {
        m.add_scaled_in_place(&ComplexMatrix::projector(b.amplitudes()), *p);
    }
    DensityMatrix::trusted(2, 2, m)
}

/// Weights `<βₖ|ρ|βₖ>` of a two-qubit state in the Bell basis.
pub fn bell_weights(rho: &DensityMatrix) -> Result<[f64; 4]> {
    if rho.dims() != (2, 2) {
        return Err(Error::DimensionMismatch { expected: 4, got: rho.dim() });
    }
    let basis = bell_basis();
    let mut w = [0.0; 4];
    for (k, b) in basis.iter().enumerate() {
        w[k] = rho.matrix().expectation(b.amplitudes()).re;
    }
    Ok(w)
}

pub(crate) fn gaussian_vector(n: usize, rng: &mut SplitMix64) -> Vec<Complex64> {
    (0..n).map(|_| rng.complex_gaussian()).collect()
}

/// Haar-random unit vector of length `n`.
pub fn random_unit_vector(n: usize, rng: &mut SplitMix64) -> Vec<Complex64> {
    let v = gaussian_vector(n, rng);
    let norm = vec_norm(&v);
    v.into_iter().map(|z| z / norm).collect()
}

/// Haar-distributed `rows × cols` isometry (`rows ≥ cols`): Gram–Schmidt QR of
/// a complex Ginibre matrix, drawn row-major, with `diag(R) > 0`.
pub fn haar_isometry(rows: usize, cols: usize, rng: &mut SplitMix64) -> ComplexMatrix {
    assert!(rows >= cols && cols >= 1);
    let g = ComplexMatrix::from_fn(rows, cols, |_, _| rng.complex_gaussian());
    let mut q: Vec<Vec<Complex64>> = Vec::with_capacity(cols);
    for j in 0..cols {
        let mut v = g.column(j);
        // Two passes of modified Gram–Schmidt keep orthogonality at machine precision.
        for _ in 0..2 {
            for qk in &q {
                let proj: Complex64 = qk.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(qk) {
                    *x -= proj * y;
                }
            }
        }
        let n = vec_norm(&v);
        q.push(v.into_iter().map(|z| z / n).collect());
    }
    ComplexMatrix::from_fn(rows, cols, |i, j| q[j][i])
}

pub fn haar_unitary(d: usize, rng: &mut SplitMix64) -> ComplexMatrix {
    haar_isometry(d, d, rng)
}

pub fn random_pure(dim_a: usize, dim_b: usize, seed: u64) -> Result<PureState> {
    random_pure_from(dim_a, dim_b, &mut SplitMix64::new(seed))
}

pub(crate) fn random_pure_from(dim_a: usize, dim_b: usize, rng: &mut SplitMix64) -> Result<PureState> {
    if dim_a == 0 || dim_b == 0 {
        return Err(Error::InvalidParameter("dimensions must be >= 1".into()));
    }
    PureState::normalized(dim_a, dim_b, gaussian_vector(dim_a * dim_b, rng))
}

/// `G G† / Tr(G G†)` for a `(dim_a·dim_b) × rank` complex Ginibre `G`.
pub fn random_density(dim_a: usize, dim_b: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    random_density_from(dim_a, dim_b, rank, &mut SplitMix64::new(seed))
}

pub(crate) fn random_density_from(
    dim_a: usize,
    dim_b: usize,
    rank: usize,
    rng: &mut SplitMix64,
) -> Result<DensityMatrix> {
    let n = dim_a * dim_b;
    if n == 0 || rank == 0 || rank > n {
        return Err(Error::InvalidParameter(format!("rank {rank} outside [1, {n}]")));
    }
    let g = ComplexMatrix::from_fn(n, rank, |_, _| rng.complex_gaussian());
    Ok(DensityMatrix::trusted_normalized(dim_a, dim_b, g.matmul(&g.adjoint())))
}

/// `Σᵢ qᵢ |aᵢ⟩⟨aᵢ| ⊗ |bᵢ⟩⟨bᵢ|` with flat-Dirichlet `q` and Haar factors.
/// Draw order: the `k` weights, then `a₁, b₁, a₂, b₂, …`.
pub fn random_separable(dim_a: usize, dim_b: usize, k: usize, seed: u64) -> Result<DensityMatrix> {
    random_separable_from(dim_a, dim_b, k, &mut SplitMix64::new(seed))
}

pub(crate) fn random_separable_from(
    dim_a: usize,
    dim_b: usize,
    k: usize,
    rng: &mut SplitMix64,
) -> Result<DensityMatrix> {
    if k == 0 || dim_a == 0 || dim_b == 0 {
        return Err(Error::InvalidParameter("need k >= 1 product terms and non-zero dimensions".into()));
    }
    let q = rng.dirichlet(k);
    let n = dim_a * dim_b;
    let mut m = ComplexMatrix::zeros(n, n);
    for w in q {
        let a = random_unit_vector(dim_a, rng);
        let b = random_unit_vector(dim_b, rng);
        let prod = PureState::product(&a, &b)?;
        m.add_scaled_in_place(&ComplexMatrix::projector(prod.amplitudes()), w);
    }
    Ok(DensityMatrix::trusted(dim_a, dim_b, m))
}

/// The five product vectors of the 3⊗3 "tiles" unextendible product basis.
pub fn tiles_vectors() -> [PureState; 5] {
    let c = |x: f64| Complex64::new(x, 0.0);
    let e = |i: usize| {
        let mut v = vec![ZERO; 3];
        v[i] = ONE;
        v
    };
    let diff = |i: usize, j: usize| {
        let mut v = vec![ZERO; 3];
        v[i] = c(1.0);
        v[j] = c(-1.0);
        v
    };
    let sum = vec![c(1.0); 3];
    [
        PureState::product(&e(0), &diff(0, 1)).unwrap(),
        PureState::product(&diff(0, 1), &e(2)).unwrap(),
        PureState::product(&e(2), &diff(1, 2)).unwrap(),
        PureState::product(&diff(1, 2), &e(0)).unwrap(),
        PureState::product(&sum, &sum).unwrap(),
    ]
}

/// `(I − Σⱼ |φⱼ⟩⟨φⱼ|)/4` over the tiles UPB: PPT yet entangled.
pub fn tiles_bound_entangled() -> DensityMatrix {
    let mut m = ComplexMatrix::identity(9);
    for v in tiles_vectors() {
        m.add_scaled_in_place(&ComplexMatrix::projector(v.amplitudes()), -1.0);
    }
    DensityMatrix::trusted(3, 3, m.scale(0.25))
}
