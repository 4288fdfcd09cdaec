//! Entanglement of formation by search over pure-state decompositions.
//!
//! Every size-`m` decomposition of `ρ = W W†` (with `W` the `rank` columns
//! `√λₖ vₖ` of its eigendecomposition) is `ψ̃ᵢ = Σₖ Uᵢₖ wₖ` for some `m × rank`
//! isometry `U`. Left-multiplying `U` by a Givens rotation on rows `(i, j)`
//! mixes only `ψ̃ᵢ` and `ψ̃ⱼ`, so coordinate descent works directly on the
//! subnormalized vectors and the objective `Σ ‖ψ̃ᵢ‖² S(ψ̃ᵢ)` is updated
//! locally.

use num_complex::Complex64;

use super::{reduced_entropy, Kind, MeasureResult};
use crate::error::{Error, Result};
use crate::par::{map_indexed, Exec};
use crate::qmat::{tensor_power, ComplexMatrix, DensityMatrix, PureState, SUPPORT_TOL};
use crate::rng::{trial_seed, SplitMix64};
use crate::states::haar_isometry;

/// Largest local dimension accepted by [`regularized_eof_probe`] after copying.
pub const MAX_COPY_LOCAL_DIM: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EofOptions {
    /// Decomposition size; `None` means `2·rank`.
    pub members: Option<usize>,
    /// Maximum number of pair rotations per restart.
    pub budget: usize,
    pub restarts: usize,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for EofOptions {
    fn default() -> Self {
        Self { members: None, budget: 10_000, restarts: 8, seed: 0, exec: Exec::default() }
    }
}

/// Weights and pure members with `Σ pᵢ |ψᵢ⟩⟨ψᵢ| = ρ`.
#[derive(Debug, Clone)]
pub struct EnsembleDecomposition {
    pub weights: Vec<f64>,
    pub members: Vec<PureState>,
}

impl EnsembleDecomposition {
    pub fn assemble(&self) -> ComplexMatrix {
        let n = self.members[0].amplitudes().len();
        let mut m = ComplexMatrix::zeros(n, n);
        for (p, psi) in self.weights.iter().zip(&self.members) {
            m.add_scaled_in_place(&ComplexMatrix::projector(psi.amplitudes()), *p);
        }
        m
    }

    /// `Σ pᵢ S(Tr_B ψᵢ)`.
    pub fn average_entanglement(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.members)
            .map(|(p, psi)| p * reduced_entropy(psi.amplitudes(), psi.dim_a(), psi.dim_b()))
            .sum()
    }

    /// Member-wise tensor product, members regrouped as (A₁A₂|B₁B₂).
    pub fn tensor(&self, other: &EnsembleDecomposition) -> EnsembleDecomposition {
        let mut weights = Vec::new();
        let mut members = Vec::new();
        for (p, a) in self.weights.iter().zip(&self.members) {
            for (q, b) in other.weights.iter().zip(&other.members) {
                weights.push(p * q);
                members.push(a.tensor(b));
            }
        }
        EnsembleDecomposition { weights, members }
    }

    fn from_vectors(vectors: &[Vec<Complex64>], da: usize, db: usize) -> Self {
        let mut weights = Vec::new();
        let mut members = Vec::new();
        for v in vectors {
            let w: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            if w > 0.0 {
                if let Ok(psi) = PureState::normalized(da, db, v.clone()) {
                    weights.push(w);
                    members.push(psi);
                }
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Self { weights, members }
    }
}

struct Search {
    da: usize,
    db: usize,
    vectors: Vec<Vec<Complex64>>,
    terms: Vec<f64>,
}

impl Search {
    fn new(da: usize, db: usize, vectors: Vec<Vec<Complex64>>) -> Self {
        let terms = vectors.iter().map(|v| weighted_entropy(v, da, db)).collect();
        Self { da, db, vectors, terms }
    }

    fn objective(&self) -> f64 {
        self.terms.iter().sum()
    }

    fn rotated(&self, i: usize, j: usize, theta: f64, phi: f64) -> (Vec<Complex64>, Vec<Complex64>) {
        let (s, c) = theta.sin_cos();
        let e = Complex64::from_polar(1.0, phi);
        let (vi, vj) = (&self.vectors[i], &self.vectors[j]);
        let ni = vi.iter().zip(vj).map(|(a, b)| a * c + e * b * s).collect();
        let nj = vi.iter().zip(vj).map(|(a, b)| -e.conj() * a * s + b * c).collect();
        (ni, nj)
    }

    fn pair_value(&self, i: usize, j: usize, theta: f64, phi: f64) -> f64 {
        let (a, b) = self.rotated(i, j, theta, phi);
        weighted_entropy(&a, self.da, self.db) + weighted_entropy(&b, self.da, self.db)
    }

    /// Best rotation of the pair: coarse grid, then golden refinement in θ and φ.
    /// Returns the improvement applied (zero if none).
    fn optimize_pair(&mut self, i: usize, j: usize) -> f64 {
        use std::f64::consts::{FRAC_PI_2, PI};
        let current = self.terms[i] + self.terms[j];
        let mut best = (current, 0.0, 0.0);
        for ti in 1..8 {
            let theta = -FRAC_PI_2 + ti as f64 * PI / 8.0;
            for pi in 0..4 {
                let phi = pi as f64 * FRAC_PI_2;
                let v = self.pair_value(i, j, theta, phi);
                if v < best.0 {
                    best = (v, theta, phi);
                }
            }
        }
        let (mut theta, mut phi) = (best.1, best.2);
        let step = PI / 8.0;
        let (t, v) = golden_min(|t| self.pair_value(i, j, t, phi), theta - step, theta + step, 1e-7);
        if v < best.0 {
            best.0 = v;
            theta = t;
        }
        let (p, v) = golden_min(|p| self.pair_value(i, j, theta, p), phi - FRAC_PI_2, phi + FRAC_PI_2, 1e-7);
        if v < best.0 {
            best.0 = v;
            phi = p;
        }
        let gain = current - best.0;
        if gain > 0.0 {
            let (a, b) = self.rotated(i, j, theta, phi);
            self.terms[i] = weighted_entropy(&a, self.da, self.db);
            self.terms[j] = weighted_entropy(&b, self.da, self.db);
            self.vectors[i] = a;
            self.vectors[j] = b;
            // Recomputed terms can differ from the search value by rounding.
            (current - self.terms[i] - self.terms[j]).max(0.0)
        } else {
            0.0
        }
    }

    /// Coordinate descent until a sweep stalls or `budget` pair moves are spent.
    /// Returns (moves used, improvement in the last sweep).
    fn run(&mut self, budget: usize, rng: &mut SplitMix64) -> (usize, f64) {
        let m = self.vectors.len();
        let mut pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| ((i + 1)..m).map(move |j| (i, j))).collect();
        let mut moves = 0;
        let mut last_gain = 0.0;
        if pairs.is_empty() {
            return (0, 0.0);
        }
        while moves < budget {
            shuffle(&mut pairs, rng);
            let mut gain = 0.0;
            for &(i, j) in &pairs {
                if moves >= budget {
                    break;
                }
                gain += self.optimize_pair(i, j);
                moves += 1;
            }
            last_gain = gain;
            if gain <= 1e-13 {
                break;
            }
        }
        (moves, last_gain)
    }
}

fn weighted_entropy(v: &[Complex64], da: usize, db: usize) -> f64 {
    let w: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    if w <= 0.0 {
        0.0
    } else {
        w * reduced_entropy(v, da, db)
    }
}

fn shuffle<T>(items: &mut [T], rng: &mut SplitMix64) {
    for i in (1..items.len()).rev() {
        let j = rng.below(i + 1);
        items.swap(i, j);
    }
}

/// Golden-section minimization on `[lo, hi]`; returns `(argmin, min)`.
pub(crate) fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Columns `√λₖ vₖ` of the eigendecomposition restricted to the support.
fn support_columns(rho: &DensityMatrix) -> Vec<Vec<Complex64>> {
    let s = rho.spectrum();
    (0..s.dim())
        .filter(|&k| s.eigenvalues[k] > SUPPORT_TOL)
        .map(|k| s.vector(k).into_iter().map(|z| z * s.eigenvalues[k].sqrt()).collect())
        .collect()
}

fn random_start(cols: &[Vec<Complex64>], m: usize, rng: &mut SplitMix64) -> Vec<Vec<Complex64>> {
    let u = haar_isometry(m, cols.len(), rng);
    let n = cols[0].len();
    (0..m)
        .map(|i| {
            let mut v = vec![Complex64::new(0.0, 0.0); n];
            for (k, w) in cols.iter().enumerate() {
                let c = u[(i, k)];
                for (x, y) in v.iter_mut().zip(w) {
                    *x += c * y;
                }
            }
            v
        })
        .collect()
}

/// Upper bound on `E_f(ρ)` from the best decomposition found.
pub fn eof_variational(rho: &DensityMatrix, opts: &EofOptions) -> Result<(MeasureResult, EnsembleDecomposition)> {
    search(rho, None, opts)
}

/// As [`eof_variational`], with restart 0 starting from `init` (which must decompose `ρ`).
pub fn eof_variational_from(
    rho: &DensityMatrix,
    init: &EnsembleDecomposition,
    opts: &EofOptions,
) -> Result<(MeasureResult, EnsembleDecomposition)> {
    if init.members.iter().any(|m| (m.dim_a(), m.dim_b()) != rho.dims()) {
        return Err(Error::DimensionMismatch { expected: rho.dim(), got: init.members[0].amplitudes().len() });
    }
    let residual = init.assemble().max_abs_diff(rho.matrix());
    if residual > 1e-8 {
        return Err(Error::InvalidParameter(format!("initial decomposition misses the state by {residual:e}")));
    }
    search(rho, Some(init), opts)
}

fn search(
    rho: &DensityMatrix,
    init: Option<&EnsembleDecomposition>,
    opts: &EofOptions,
) -> Result<(MeasureResult, EnsembleDecomposition)> {
    let (da, db) = rho.dims();
    let cols = support_columns(rho);
    let rank = cols.len();
    let m = match init {
        Some(d) => d.members.len(),
        None => opts.members.unwrap_or(2 * rank),
    };
    if m < rank {
        return Err(Error::InvalidParameter(format!("ensemble size {m} below rank {rank}")));
    }
    if rank == 1 {
        let dec = EnsembleDecomposition::from_vectors(&cols, da, db);
        let value = dec.average_entanglement();
        return Ok((MeasureResult { value, kind: Kind::UpperBound, iterations: 0, gap: 0.0 }, dec));
    }

    let restarts = opts.restarts.max(1);
    let runs = map_indexed(restarts, opts.exec, |r| {
        let mut rng = SplitMix64::new(trial_seed(opts.seed, r));
        let start = match (r, init) {
            (0, Some(d)) => d
                .weights
                .iter()
                .zip(&d.members)
                .map(|(p, psi)| psi.amplitudes().iter().map(|z| z * p.sqrt()).collect())
                .collect(),
            _ => random_start(&cols, m, &mut rng),
        };
        let mut s = Search::new(da, db, start);
        let (moves, gap) = s.run(opts.budget, &mut rng);
        (s.objective(), moves, gap, s.vectors)
    });
    // Minimum value; ties keep the lowest restart index.
    let (value, moves, gap, vectors) =
        runs.into_iter().reduce(|best, next| if next.0 < best.0 { next } else { best }).expect("at least one restart");
    let dec = EnsembleDecomposition::from_vectors(&vectors, da, db);
    let value = value.max(0.0);
    Ok((MeasureResult { value, kind: Kind::UpperBound, iterations: moves, gap }, dec))
}

/// `E_f(ρ^{⊗n})/n` for `n ∈ {1, 2}`. The two-copy search starts one restart
/// from the product of the single-copy optimum, so the value never exceeds the
/// single-copy estimate.
pub fn regularized_eof_probe(rho: &DensityMatrix, copies: usize, opts: &EofOptions) -> Result<MeasureResult> {
    if !(1..=2).contains(&copies) {
        return Err(Error::InvalidParameter(format!("copies must be 1 or 2, got {copies}")));
    }
    let (da, db) = rho.dims();
    if da.pow(copies as u32) > MAX_COPY_LOCAL_DIM || db.pow(copies as u32) > MAX_COPY_LOCAL_DIM {
        return Err(Error::TooLarge(format!(
            "{copies} copies of a {da}⊗{db} state exceed local dimension {MAX_COPY_LOCAL_DIM}"
        )));
    }
    let (single, dec) = eof_variational(rho, opts)?;
    if copies == 1 {
        return Ok(single);
    }
    let doubled = tensor_power(rho, 2);
    let (two, _) = eof_variational_from(&doubled, &dec.tensor(&dec), opts)?;
    Ok(MeasureResult {
        value: two.value / 2.0,
        kind: Kind::UpperBound,
        iterations: single.iterations + two.iterations,
        gap: two.gap / 2.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{entropy_of_entanglement, eof_two_qubit_closed};
    use crate::states::{isotropic, random_density, random_pure, random_separable};

    fn quick(seed: u64) -> EofOptions {
        EofOptions { budget: 2_000, restarts: 4, seed, ..EofOptions::default() }
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let (x, v) = golden_min(|x| (x - 0.3).powi(2) + 1.0, 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-6 && (v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pure_state_is_exact() {
        let psi = random_pure(2, 3, 4).unwrap();
        for m in [1, 3, 5] {
            let opts = EofOptions { members: Some(m), ..quick(1) };
            let (r, dec) = eof_variational(&psi.density(), &opts).unwrap();
            assert!((r.value - entropy_of_entanglement(&psi).value).abs() < 1e-12);
            assert!(dec.assemble().max_abs_diff(psi.density().matrix()) < 1e-8);
        }
    }

    #[test]
    fn maximally_mixed_two_qubits_reaches_zero() {
        let rho = DensityMatrix::maximally_mixed(2, 2);
        let (r, _) = eof_variational(&rho, &EofOptions { members: Some(4), ..quick(3) }).unwrap();
        assert!(r.value < 1e-6, "value {}", r.value);
    }

    #[test]
    fn decomposition_reproduces_state() {
        let rho = random_density(2, 2, 3, 8).unwrap();
        let (r, dec) = eof_variational(&rho, &quick(2)).unwrap();
        assert!(dec.assemble().max_abs_diff(rho.matrix()) < 1e-8);
        assert!((dec.average_entanglement() - r.value).abs() < 1e-9);
        assert!((dec.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn close_to_closed_form_and_never_below() {
        for seed in 0..4 {
            let rho = random_density(2, 2, 2 + (seed as usize % 3), 40 + seed).unwrap();
            let exact = eof_two_qubit_closed(&rho).unwrap().value;
            let (r, _) = eof_variational(&rho, &quick(seed)).unwrap();
            assert!(r.value >= exact - 1e-9);
            assert!(r.value - exact <= 5e-3, "seed {seed}: {} vs {exact}", r.value);
        }
    }

    #[test]
    fn rejects_small_ensembles() {
        let rho = random_density(2, 2, 3, 1).unwrap();
        let opts = EofOptions { members: Some(2), ..quick(0) };
        assert!(matches!(eof_variational(&rho, &opts), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let rho = random_density(2, 2, 4, 2).unwrap();
        let a = eof_variational(&rho, &EofOptions { exec: Exec::Sequential, ..quick(5) }).unwrap().0;
        let b = eof_variational(&rho, &EofOptions { exec: Exec::Parallel, ..quick(5) }).unwrap().0;
        assert_eq!(a, b);
    }

    #[test]
    fn probe_cases() {
        let opts = EofOptions { budget: 300, restarts: 2, seed: 1, ..EofOptions::default() };
        let psi = random_pure(2, 2, 6).unwrap();
        let s = entropy_of_entanglement(&psi).value;
        for n in 1..=2 {
            let v = regularized_eof_probe(&psi.density(), n, &opts).unwrap().value;
            assert!((v - s).abs() < 1e-9);
        }
        let sep = random_separable(2, 2, 2, 3).unwrap();
        assert!(regularized_eof_probe(&sep, 1, &EofOptions { budget: 2000, ..opts }).unwrap().value < 1e-3);
        let iso = isotropic(0.75, 2).unwrap();
        let one = regularized_eof_probe(&iso, 1, &opts).unwrap().value;
        let two = regularized_eof_probe(&iso, 2, &opts).unwrap().value;
        assert!(two <= one + 1e-3, "{two} vs {one}");
        assert!(regularized_eof_probe(&iso, 3, &opts).is_err());
        assert!(matches!(
            regularized_eof_probe(&DensityMatrix::maximally_mixed(5, 5), 2, &opts),
            Err(Error::TooLarge(_))
        ));
    }
}
