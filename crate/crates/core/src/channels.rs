//! Local instruments, one-way LOCC protocols and twirling.

use crate::error::{Error, Result};
use crate::par::{map_indexed, pairwise_reduce, Exec};
use crate::qmat::{entangled_fidelity, ComplexMatrix, DensityMatrix, Party};
use crate::rng::{trial_seed, SplitMix64};
use crate::states::{haar_isometry, haar_unitary, isotropic};

/// Allowed `max|Σ K†K − I|`.
pub const COMPLETENESS_TOL: f64 = 1e-10;
/// Branches with probability at or below this are dropped.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

/// Outcome-indexed Kraus operators acting on one party.
#[derive(Debug, Clone)]
pub struct LocalInstrument {
    party: Party,
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
}

impl LocalInstrument {
    pub fn new(party: Party, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::InvalidParameter("instrument needs a Kraus operator".into()))?;
        let (dim_out, dim_in) = (first.rows(), first.cols());
        let mut sum = ComplexMatrix::zeros(dim_in, dim_in);
        for k in &kraus {
            if (k.rows(), k.cols()) != (dim_out, dim_in) {
                return Err(Error::DimensionMismatch { expected: dim_out * dim_in, got: k.rows() * k.cols() });
            }
            sum = sum.add(&k.adjoint().matmul(k));
        }
        let residual = sum.max_abs_diff(&ComplexMatrix::identity(dim_in));
        if residual > COMPLETENESS_TOL {
            return Err(Error::Incomplete(residual));
        }
        Ok(Self { party, dim_in, dim_out, kraus })
    }

    pub fn identity(party: Party, d: usize) -> Self {
        Self { party, dim_in: d, dim_out: d, kraus: vec![ComplexMatrix::identity(d)] }
    }

    /// Projective measurement in the computational basis.
    pub fn computational_measurement(party: Party, d: usize) -> Self {
        let kraus = (0..d)
            .map(|i| {
                let mut k = ComplexMatrix::zeros(d, d);
                k[(i, i)] = crate::qmat::ONE;
                k
            })
            .collect();
        Self { party, dim_in: d, dim_out: d, kraus }
    }

    pub fn party(&self) -> Party {
        self.party
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn outcomes(&self) -> usize {
        self.kraus.len()
    }

    pub fn completeness_residual(&self) -> f64 {
        let sum = self
            .kraus
            .iter()
            .fold(ComplexMatrix::zeros(self.dim_in, self.dim_in), |acc, k| acc.add(&k.adjoint().matmul(k)));
        sum.max_abs_diff(&ComplexMatrix::identity(self.dim_in))
    }
}

/// Round one on one party, then an outcome-conditioned instrument on the other.
#[derive(Debug, Clone)]
pub struct LoccProtocol {
    round1: LocalInstrument,
    round2: Vec<LocalInstrument>,
}

impl LoccProtocol {
    pub fn new(round1: LocalInstrument, round2: Vec<LocalInstrument>) -> Result<Self> {
        if round2.len() != round1.outcomes() {
            return Err(Error::DimensionMismatch { expected: round1.outcomes(), got: round2.len() });
        }
        if round2.iter().any(|i| i.party == round1.party) {
            return Err(Error::InvalidParameter("second round must act on the other party".into()));
        }
        Ok(Self { round1, round2 })
    }

    pub fn round1(&self) -> &LocalInstrument {
        &self.round1
    }

    pub fn round2(&self) -> &[LocalInstrument] {
        &self.round2
    }
}

#[derive(Debug, Clone)]
pub struct Branch {
    /// Outcome index per round.
    pub outcome: Vec<usize>,
    pub probability: f64,
    pub state: DensityMatrix,
}

/// Post-measurement states with their probabilities.
#[derive(Debug, Clone)]
pub struct OutcomeEnsemble {
    pub branches: Vec<Branch>,
}

impl OutcomeEnsemble {
    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }

    /// `Σ pᵢ E(σᵢ)` for a scalar functional.
    pub fn average<F>(&self, mut f: F) -> Result<f64>
    where
        F: FnMut(&DensityMatrix) -> Result<f64>,
    {
        let mut acc = 0.0;
        for b in &self.branches {
            acc += b.probability * f(&b.state)?;
        }
        Ok(acc)
    }
}

fn lift(op: &ComplexMatrix, party: Party, dims: (usize, usize)) -> ComplexMatrix {
    match party {
        Party::A => op.kron(&ComplexMatrix::identity(dims.1)),
        Party::B => ComplexMatrix::identity(dims.0).kron(op),
    }
}

fn apply_tagged(rho: &DensityMatrix, inst: &LocalInstrument, prefix: &[usize]) -> Result<Vec<Branch>> {
    let dims = rho.dims();
    let local = match inst.party {
        Party::A => dims.0,
        Party::B => dims.1,
    };
    if local != inst.dim_in {
        return Err(Error::DimensionMismatch { expected: inst.dim_in, got: local });
    }
    let out_dims = match inst.party {
        Party::A => (inst.dim_out, dims.1),
        Party::B => (dims.0, inst.dim_out),
    };
    let mut branches = Vec::with_capacity(inst.kraus.len());
    for (i, k) in inst.kraus.iter().enumerate() {
        let full = lift(k, inst.party, dims);
        let un = rho.matrix().conjugate_by(&full);
        let p = un.trace().re;
        if p > PROBABILITY_FLOOR {
            let mut outcome = prefix.to_vec();
            outcome.push(i);
            branches.push(Branch {
                outcome,
                probability: p,
                state: DensityMatrix::trusted(out_dims.0, out_dims.1, un.scale(1.0 / p)),
            });
        }
    }
    Ok(branches)
}

fn renormalize(mut branches: Vec<Branch>) -> OutcomeEnsemble {
    let total: f64 = branches.iter().map(|b| b.probability).sum();
    for b in &mut branches {
        b.probability /= total;
    }
    OutcomeEnsemble { branches }
}

/// Applies every Kraus branch; branches below [`PROBABILITY_FLOOR`] are dropped
/// and the remaining mass renormalized.
pub fn apply_instrument(rho: &DensityMatrix, inst: &LocalInstrument) -> Result<OutcomeEnsemble> {
    Ok(renormalize(apply_tagged(rho, inst, &[])?))
}

pub fn apply_protocol(rho: &DensityMatrix, proto: &LoccProtocol) -> Result<OutcomeEnsemble> {
    let mut out = Vec::new();
    for first in apply_tagged(rho, &proto.round1, &[])? {
        let inst = &proto.round2[first.outcome[0]];
        for mut second in apply_tagged(&first.state, inst, &first.outcome)? {
            second.probability *= first.probability;
            out.push(second);
        }
    }
    Ok(renormalize(out))
}

/// `Σ pᵢ σᵢ`: the trace-preserving map obtained by discarding the outcome.
pub fn forget_outcomes(ens: &OutcomeEnsemble) -> Result<DensityMatrix> {
    let weights: Vec<f64> = ens.branches.iter().map(|b| b.probability).collect();
    let states: Vec<DensityMatrix> = ens.branches.iter().map(|b| b.state.clone()).collect();
    DensityMatrix::mixture(&weights, &states)
}

/// Exact `U ⊗ Ū` group average: the isotropic state with the same entangled fidelity.
pub fn twirl_exact(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let f = entangled_fidelity(rho)?.clamp(0.0, 1.0);
    isotropic(f, rho.dim_a())
}

/// `(1/n) Σ (U⊗Ū) ρ (U⊗Ū)†` over the supplied unitaries, pairwise-summed.
pub fn twirl_average(rho: &DensityMatrix, unitaries: &[ComplexMatrix]) -> Result<DensityMatrix> {
    if rho.dim_a() != rho.dim_b() {
        return Err(Error::DimensionMismatch { expected: rho.dim_a(), got: rho.dim_b() });
    }
    let terms: Vec<ComplexMatrix> = unitaries.iter().map(|u| conjugate_uu(rho, u)).collect();
    average_terms(rho, terms)
}

fn conjugate_uu(rho: &DensityMatrix, u: &ComplexMatrix) -> ComplexMatrix {
    rho.matrix().conjugate_by(&u.kron(&u.conj()))
}

fn average_terms(rho: &DensityMatrix, terms: Vec<ComplexMatrix>) -> Result<DensityMatrix> {
    let n = terms.len();
    let sum = pairwise_reduce(terms, |a, b| a.add(&b))
        .ok_or_else(|| Error::InvalidParameter("twirl needs at least one sample".into()))?;
    Ok(DensityMatrix::trusted(rho.dim_a(), rho.dim_b(), sum.scale(1.0 / n as f64)))
}

/// Monte-Carlo twirl with Haar unitaries; sample `i` uses seed `seed + i`.
pub fn twirl_monte_carlo(rho: &DensityMatrix, n_samples: usize, seed: u64) -> Result<DensityMatrix> {
    twirl_monte_carlo_with(rho, n_samples, seed, Exec::default())
}

pub fn twirl_monte_carlo_with(rho: &DensityMatrix, n_samples: usize, seed: u64, exec: Exec) -> Result<DensityMatrix> {
    let d = rho.dim_a();
    if d != rho.dim_b() {
        return Err(Error::DimensionMismatch { expected: d, got: rho.dim_b() });
    }
    let terms = map_indexed(n_samples, exec, |i| {
        let mut rng = SplitMix64::new(trial_seed(seed, i));
        conjugate_uu(rho, &haar_unitary(d, &mut rng))
    });
    average_terms(rho, terms)
}

/// Kraus set from the `d × d` blocks of a Haar `(n·d) × d` isometry.
pub fn random_local_instrument(party: Party, d: usize, n_outcomes: usize, seed: u64) -> Result<LocalInstrument> {
    random_local_instrument_from(party, d, n_outcomes, &mut SplitMix64::new(seed))
}

pub(crate) fn random_local_instrument_from(
    party: Party,
    d: usize,
    n_outcomes: usize,
    rng: &mut SplitMix64,
) -> Result<LocalInstrument> {
    if n_outcomes == 0 || d == 0 {
        return Err(Error::InvalidParameter("instrument needs at least one outcome".into()));
    }
    let v = haar_isometry(n_outcomes * d, d, rng);
    let kraus = (0..n_outcomes).map(|k| ComplexMatrix::from_fn(d, d, |i, j| v[(k * d + i, j)])).collect();
    Ok(LocalInstrument { party, dim_in: d, dim_out: d, kraus })
}

/// Random two-round protocol: A measures with 1–3 outcomes, B answers with an
/// outcome-dependent instrument of 1–3 outcomes.
pub fn random_protocol(dim_a: usize, dim_b: usize, seed: u64) -> Result<LoccProtocol> {
    let mut rng = SplitMix64::new(seed);
    let n1 = 1 + rng.below(3);
    let round1 = random_local_instrument_from(Party::A, dim_a, n1, &mut rng)?;
    let round2 = (0..n1)
        .map(|_| {
            let n2 = 1 + rng.below(3);
            random_local_instrument_from(Party::B, dim_b, n2, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    LoccProtocol::new(round1, round2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{hermitian_eigenvalues, partial_transpose, trace_distance, Party, PureState, ONE, ZERO};
    use crate::states::{maximally_entangled, random_density, random_separable};
    use num_complex::Complex64;

    fn bell() -> DensityMatrix {
        maximally_entangled(2).unwrap().density()
    }

    fn is_product(rho: &DensityMatrix) -> bool {
        let a = crate::qmat::partial_trace(rho, Party::B);
        let b = crate::qmat::partial_trace(rho, Party::A);
        rho.matrix().max_abs_diff(&a.matrix().kron(b.matrix())) < 1e-12
    }

    #[test]
    fn unitary_instrument_preserves_spectrum() {
        let rho = random_density(2, 2, 3, 1).unwrap();
        let inst = random_local_instrument(Party::A, 2, 1, 5).unwrap();
        let ens = apply_instrument(&rho, &inst).unwrap();
        assert_eq!(ens.branches.len(), 1);
        assert!((ens.branches[0].probability - 1.0).abs() < 1e-12);
        let (a, b) = (rho.eigenvalues(), ens.branches[0].state.eigenvalues());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn measuring_bell_pair_collapses_to_products() {
        let ens = apply_instrument(&bell(), &LocalInstrument::computational_measurement(Party::A, 2)).unwrap();
        assert_eq!(ens.branches.len(), 2);
        for b in &ens.branches {
            assert!((b.probability - 0.5).abs() < 1e-15);
            assert!(is_product(&b.state));
        }
        let avg = forget_outcomes(&ens).unwrap();
        let expected = ComplexMatrix::from_real_diagonal(&[0.5, 0.0, 0.0, 0.5]);
        assert!(avg.matrix().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn protocol_identity_and_measure_then_correct() {
        let rho = random_density(2, 2, 4, 2).unwrap();
        let id =
            LoccProtocol::new(LocalInstrument::identity(Party::A, 2), vec![LocalInstrument::identity(Party::B, 2)])
                .unwrap();
        let ens = apply_protocol(&rho, &id).unwrap();
        assert_eq!(ens.branches.len(), 1);
        assert!(ens.branches[0].state.max_abs_diff(&rho) < 1e-15);

        let x = ComplexMatrix::from_vec(2, 2, vec![ZERO, ONE, ONE, ZERO]).unwrap();
        let proto = LoccProtocol::new(
            LocalInstrument::computational_measurement(Party::A, 2),
            vec![LocalInstrument::identity(Party::B, 2), LocalInstrument::new(Party::B, vec![x]).unwrap()],
        )
        .unwrap();
        let ens = apply_protocol(&bell(), &proto).unwrap();
        assert_eq!(ens.branches.len(), 2);
        for b in &ens.branches {
            assert!(is_product(&b.state));
            assert_eq!(b.outcome.len(), 2);
        }
        assert!((ens.total_probability() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fuzzed_protocols_conserve_probability() {
        for seed in 0..50 {
            let rho = random_density(2, 2, 4, 100 + seed).unwrap();
            let ens = apply_protocol(&rho, &random_protocol(2, 2, seed).unwrap()).unwrap();
            assert!((ens.total_probability() - 1.0).abs() < 1e-9);
            let out = forget_outcomes(&ens).unwrap();
            assert!(DensityMatrix::new(2, 2, out.matrix().clone()).is_ok());
        }
    }

    #[test]
    fn incomplete_instrument_rejected() {
        let half = ComplexMatrix::identity(2).scale(0.5);
        assert!(matches!(LocalInstrument::new(Party::A, vec![half]), Err(Error::Incomplete(_))));
        let inst = LocalInstrument::identity(Party::A, 3);
        assert!(apply_instrument(&bell(), &inst).is_err());
    }

    #[test]
    fn random_instruments_complete() {
        for seed in 0..1000 {
            let inst = random_local_instrument(Party::B, 2, 1 + (seed as usize % 4), seed).unwrap();
            assert!(inst.completeness_residual() <= 1e-10);
        }
        let u = random_local_instrument(Party::A, 3, 1, 4).unwrap();
        let k = &u.kraus()[0];
        assert!(k.matmul(&k.adjoint()).max_abs_diff(&ComplexMatrix::identity(3)) < 1e-12);
    }

    #[test]
    fn local_instruments_keep_separable_inputs_ppt() {
        for seed in 0..30 {
            let rho = random_separable(2, 2, 3, seed).unwrap();
            let inst = random_local_instrument(Party::A, 2, 3, seed + 7).unwrap();
            for b in apply_instrument(&rho, &inst).unwrap().branches {
                let min = *hermitian_eigenvalues(&partial_transpose(&b.state, Party::B)).unwrap().last().unwrap();
                assert!(min >= -1e-10);
            }
        }
    }

    #[test]
    fn twirl_exact_properties() {
        let iso = isotropic(0.7, 3).unwrap();
        assert!(twirl_exact(&iso).unwrap().max_abs_diff(&iso) < 1e-12);
        assert!(twirl_exact(&bell()).unwrap().max_abs_diff(&bell()) < 1e-12);
        let rho = random_density(3, 3, 5, 3).unwrap();
        let t = twirl_exact(&rho).unwrap();
        assert!((entangled_fidelity(&t).unwrap() - entangled_fidelity(&rho).unwrap()).abs() < 1e-12);
        assert_eq!(twirl_exact(&t).unwrap(), t);
    }

    #[test]
    fn twirl_average_of_identity_is_input() {
        let rho = random_density(2, 2, 2, 9).unwrap();
        let t = twirl_average(&rho, &[ComplexMatrix::identity(2)]).unwrap();
        assert!(t.max_abs_diff(&rho) < 1e-15);
    }

    #[test]
    fn monte_carlo_twirl_converges_and_preserves_fidelity() {
        let rho = random_density(2, 2, 4, 21).unwrap();
        let f = entangled_fidelity(&rho).unwrap();
        let mut rng = SplitMix64::new(5);
        let u = haar_unitary(2, &mut rng);
        let single = twirl_average(&rho, &[u]).unwrap();
        assert!((entangled_fidelity(&single).unwrap() - f).abs() < 1e-10);
        let mc = twirl_monte_carlo(&rho, 2000, 77).unwrap();
        let dist = trace_distance(&mc, &twirl_exact(&rho).unwrap()).unwrap();
        assert!(dist <= 5e-2, "trace distance {dist}");
        let seq = twirl_monte_carlo_with(&rho, 64, 1, Exec::Sequential).unwrap();
        let par = twirl_monte_carlo_with(&rho, 64, 1, Exec::Parallel).unwrap();
        assert_eq!(seq, par);
    }

    #[test]
    fn haar_first_moment_vanishes() {
        let n = 10_000;
        let mut sum = ComplexMatrix::zeros(2, 2);
        for i in 0..n {
            let mut rng = SplitMix64::new(trial_seed(123, i));
            sum = sum.add(&haar_unitary(2, &mut rng));
        }
        let mean = sum.scale(1.0 / n as f64);
        let worst = mean.as_slice().iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(worst <= 0.05, "max |E[U]_ij| = {worst}");
    }

    #[test]
    fn pure_branches_stay_pure() {
        let psi =
            PureState::normalized(2, 2, vec![Complex64::new(0.6, 0.0), ZERO, ZERO, Complex64::new(0.0, 0.8)]).unwrap();
        let inst = random_local_instrument(Party::B, 2, 3, 1).unwrap();
        for b in apply_instrument(&psi.density(), &inst).unwrap().branches {
            assert!((b.state.purity() - 1.0).abs() < 1e-12);
        }
    }
}
