//! Entanglement measures and bounds, all in ebits.
//!
//! | name | quantity | kind |
//! |------|----------|------|
//! | `e_entropy` | entropy of entanglement of a pure state | exact |
//! | `e_f_2q` | entanglement of formation, two-qubit concurrence formula | exact |
//! | `e_f_var` | entanglement of formation by decomposition search | upper bound |
//! | `e_r` | relative entropy of entanglement by Frank–Wolfe | upper bound |
//! | `e_r_iso` | relative entropy of entanglement of an isotropic state | exact |
//! | `log_neg` | logarithmic negativity | exact |
//! | `hashing` | hashing rate of the Bell-diagonal twirl | lower bound on distillable entanglement |

mod eof;
mod registry;
mod rel_ent;

pub use eof::{eof_variational, eof_variational_from, regularized_eof_probe, EnsembleDecomposition, EofOptions};
pub use registry::{registry, EvalConfig, Measure, MeasureRegistryEntry};
pub use rel_ent::{
    rel_ent_entanglement, rel_ent_entanglement_traced, FwOptions, FwTrace, SeparableCertificate, MAX_FW_DIM,
};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qmat::{
    hermitian_eig, hermitian_eigenvalues, partial_transpose, shannon_bits, ComplexMatrix, DensityMatrix, Party,
    PureState, ZERO,
};
use crate::states::bell_weights;

/// How a value relates to the true quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Exact,
    UpperBound,
    LowerBound,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Exact => "exact",
            Kind::UpperBound => "upper_bound",
            Kind::LowerBound => "lower_bound",
        }
    }
}

impl std::fmt::Display for Kind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureResult {
    pub value: f64,
    pub kind: Kind,
    pub iterations: usize,
    /// Optimizer stall or duality gap; zero for exact values.
    pub gap: f64,
}

impl MeasureResult {
    pub fn exact(value: f64) -> Self {
        Self { value, kind: Kind::Exact, iterations: 0, gap: 0.0 }
    }
}

/// `h(x) = −x log₂x − (1−x) log₂(1−x)`, with `0·log 0 = 0`.
pub fn binary_entropy(x: f64) -> f64 {
    shannon_bits(&[x, 1.0 - x])
}

/// Von Neumann entropy of either reduced state.
pub fn entropy_of_entanglement(psi: &PureState) -> MeasureResult {
    MeasureResult::exact(reduced_entropy(psi.amplitudes(), psi.dim_a(), psi.dim_b()))
}

/// Entropy in bits of the reduced state of an unnormalized vector, using
/// the smaller party. 2×2 reductions use the closed-form spectrum.
pub(crate) fn reduced_entropy(v: &[Complex64], da: usize, db: usize) -> f64 {
    let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    if norm2 == 0.0 {
        return 0.0;
    }
    let amp = |a: usize, b: usize| v[a * db + b];
    let (n, m) = (da.min(db), da.max(db));
    let entry = |i: usize, j: usize| -> Complex64 {
        if da <= db {
            (0..m).map(|b| amp(i, b) * amp(j, b).conj()).sum()
        } else {
            (0..m).map(|a| amp(a, i) * amp(a, j).conj()).sum()
        }
    };
    match n {
        1 => 0.0,
        2 => {
            let (a, d, b) = (entry(0, 0).re / norm2, entry(1, 1).re / norm2, entry(0, 1).norm_sqr() / (norm2 * norm2));
            let det = (a * d - b).max(0.0);
            let disc = ((a - d) * (a - d) + 4.0 * b).sqrt();
            let lo = (2.0 * det / (a + d + disc)).max(0.0);
            shannon_bits(&[1.0 - lo, lo])
        }
        _ => {
            let r = ComplexMatrix::from_fn(n, n, |i, j| entry(i, j) / norm2);
            shannon_bits(&hermitian_eigenvalues(&r.hermitian_part()).expect("square"))
        }
    }
}

fn require_two_qubit(rho: &DensityMatrix, measure: &str) -> Result<()> {
    if rho.dims() != (2, 2) {
        return Err(Error::NotApplicable {
            measure: measure.into(),
            reason: format!("needs a 2⊗2 state, got {}⊗{}", rho.dim_a(), rho.dim_b()),
        });
    }
    Ok(())
}

/// Eigenvalues of `ρ` below this are treated as zero when forming `√ρ`.
const SQRT_CLAMP: f64 = 1e-14;
/// Eigenvalues of `√ρ ρ̃ √ρ` below this are treated as zero.
const CONCURRENCE_CLAMP: f64 = 1e-13;

/// Two-qubit concurrence `max(0, λ₁−λ₂−λ₃−λ₄)`, with `λᵢ` the descending square
/// roots of the eigenvalues of `ρρ̃` and `ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    require_two_qubit(rho, "e_f_2q")?;
    let i = Complex64::new(0.0, 1.0);
    let sy = ComplexMatrix::from_vec(2, 2, vec![ZERO, -i, i, ZERO]).unwrap();
    let yy = sy.kron(&sy);
    let flipped = rho.matrix().conj().conjugate_by(&yy);
    let sqrt_rho = rho.spectrum().map(|l| if l > SQRT_CLAMP { l.sqrt() } else { 0.0 });
    let r = sqrt_rho.matmul(&flipped).matmul(&sqrt_rho).hermitian_part();
    let lambdas: Vec<f64> =
        hermitian_eig(&r)?.eigenvalues.iter().map(|&m| if m > CONCURRENCE_CLAMP { m.sqrt() } else { 0.0 }).collect();
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}

/// Entanglement of formation of a two-qubit state, `h((1+√(1−C²))/2)`.
pub fn eof_two_qubit_closed(rho: &DensityMatrix) -> Result<MeasureResult> {
    let c = concurrence(rho)?;
    let x = 0.5 * (1.0 + (1.0 - c * c).max(0.0).sqrt());
    Ok(MeasureResult::exact(binary_entropy(x)))
}

/// `E_r(ϱ(F,d)) = log₂d + F log₂F + (1−F) log₂((1−F)/(d−1))` for `F > 1/d`, zero otherwise.
pub fn er_isotropic_closed(fidelity: f64, d: usize) -> Result<MeasureResult> {
    if !(0.0..=1.0).contains(&fidelity) {
        return Err(Error::InvalidParameter(format!("fidelity {fidelity} outside [0, 1]")));
    }
    if d < 2 {
        return Err(Error::InvalidParameter(format!("local dimension must be >= 2, got {d}")));
    }
    let df = d as f64;
    if fidelity <= 1.0 / df {
        return Ok(MeasureResult::exact(0.0));
    }
    let xlogx = |x: f64| if x > 0.0 { x * x.log2() } else { 0.0 };
    let rest = 1.0 - fidelity;
    let tail = if rest > 0.0 { rest * (rest / (df - 1.0)).log2() } else { 0.0 };
    Ok(MeasureResult::exact((df.log2() + xlogx(fidelity) + tail).max(0.0)))
}

/// `log₂ ‖ρ^{T_B}‖₁`.
pub fn log_negativity(rho: &DensityMatrix) -> MeasureResult {
    let pt = partial_transpose(rho, Party::B);
    let norm: f64 = hermitian_eigenvalues(&pt).expect("partial transpose is Hermitian").iter().map(|x| x.abs()).sum();
    MeasureResult::exact(norm.log2().max(0.0))
}

/// `max(0, 1 − H(w))` with `w` the Bell-basis weights of a two-qubit state.
pub fn hashing_lower_bound(rho: &DensityMatrix) -> Result<MeasureResult> {
    require_two_qubit(rho, "hashing")?;
    let w = bell_weights(rho)?.map(|x| x.max(0.0));
    let value = (1.0 - shannon_bits(&w)).max(0.0);
    Ok(MeasureResult { value, kind: Kind::LowerBound, iterations: 0, gap: 0.0 })
}
