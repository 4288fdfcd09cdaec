//! Relative entropy of entanglement by Frank–Wolfe over product pure states.
//!
//! Objective `f(σ) = S(ρ‖σ)` on the convex hull of `{|a⟩⟨a| ⊗ |b⟩⟨b|}`. The
//! gradient in σ's eigenbasis is the Daleckii–Krein divided difference
//! `G̃ᵢⱼ = −ρ̃ᵢⱼ φ(λᵢ, λⱼ)/ln 2`, `φ(x, y) = (ln x − ln y)/(x − y)`, `φ(x, x) = 1/x`.
//! The linear oracle minimizes `⟨a⊗b|G|a⊗b⟩` by alternating minimum
//! eigenvectors of the partial contractions of `G`.

use num_complex::Complex64;

use super::{Kind, MeasureResult};
use crate::error::{Error, Result};
use crate::qmat::{
    hermitian_eig, relative_entropy_with, tensor_power, vn_entropy, ComplexMatrix, DensityMatrix, PureState, Spectrum,
    ONE, ZERO,
};
use crate::rng::SplitMix64;
use crate::states::random_unit_vector;

/// Largest `dim_a · dim_b` accepted.
pub const MAX_FW_DIM: usize = 81;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FwOptions {
    pub max_iters: usize,
    /// Stop once the Frank–Wolfe gap `Tr[G(σ − τ)]` drops to this.
    pub gap_tol: f64,
    /// Random starts of the alternating linear oracle per iteration, on top
    /// of the warm start and the computational basis of B.
    pub restarts: usize,
    pub inner_sweeps: usize,
    /// Weight δ of `I/D` mixed in whenever `λ_min(σ) < δ`.
    pub floor: f64,
    pub seed: u64,
}

impl Default for FwOptions {
    fn default() -> Self {
        Self { max_iters: 2_000, gap_tol: 1e-4, restarts: 5, inner_sweeps: 50, floor: 1e-9, seed: 0 }
    }
}

/// Explicit separable state: `σ* = Σ qᵢ |aᵢ⟩⟨aᵢ| ⊗ |bᵢ⟩⟨bᵢ|`.
#[derive(Debug, Clone)]
pub struct SeparableCertificate {
    pub weights: Vec<f64>,
    /// Single-party vectors, stored as `dim × 1` pure states.
    pub a: Vec<PureState>,
    pub b: Vec<PureState>,
    pub sigma: DensityMatrix,
}

/// Objective values after every iteration; non-increasing by construction.
#[derive(Debug, Clone, Default)]
pub struct FwTrace {
    pub objective: Vec<f64>,
    pub gaps: Vec<f64>,
}

struct Atoms {
    da: usize,
    db: usize,
    weights: Vec<f64>,
    a: Vec<Vec<Complex64>>,
    b: Vec<Vec<Complex64>>,
    /// A separable mixed state used as one atom, with its weight.
    lump: Option<(f64, DensityMatrix)>,
}

/// An atom that an away step can shrink.
#[derive(Clone, Copy)]
enum Active {
    Pure(usize),
    Lump,
}

impl Atoms {
    /// `I/D` as the uniform mixture of computational product states.
    fn maximally_mixed(da: usize, db: usize) -> Self {
        let basis = |d: usize, i: usize| (0..d).map(|k| if k == i { ONE } else { ZERO }).collect::<Vec<_>>();
        let n = (da * db) as f64;
        let mut atoms = Self { da, db, weights: vec![], a: vec![], b: vec![], lump: None };
        for i in 0..da {
            for j in 0..db {
                atoms.weights.push(1.0 / n);
                atoms.a.push(basis(da, i));
                atoms.b.push(basis(db, j));
            }
        }
        atoms
    }

    fn from_certificate(cert: &SeparableCertificate) -> Self {
        Self {
            da: cert.sigma.dim_a(),
            db: cert.sigma.dim_b(),
            weights: cert.weights.clone(),
            a: cert.a.iter().map(|p| p.amplitudes().to_vec()).collect(),
            b: cert.b.iter().map(|p| p.amplitudes().to_vec()).collect(),
            lump: None,
        }
    }

    fn assemble(&self) -> DensityMatrix {
        let n = self.da * self.db;
        let mut m = ComplexMatrix::zeros(n, n);
        for ((w, a), b) in self.weights.iter().zip(&self.a).zip(&self.b) {
            m.add_scaled_in_place(&ComplexMatrix::projector(&product(a, b)), *w);
        }
        if let Some((w, state)) = &self.lump {
            m.add_scaled_in_place(state.matrix(), *w);
        }
        DensityMatrix::trusted(self.da, self.db, m)
    }

    /// `σ ← (1−t)σ + t·|a⟩⟨a|⊗|b⟩⟨b|`.
    fn step(&mut self, t: f64, a: Vec<Complex64>, b: Vec<Complex64>) {
        self.scale(1.0 - t);
        self.weights.push(t);
        self.a.push(a);
        self.b.push(b);
    }

    fn scale(&mut self, factor: f64) {
        self.weights.iter_mut().for_each(|w| *w *= factor);
        if let Some((w, _)) = &mut self.lump {
            *w *= factor;
        }
    }

    fn weight(&self, which: Active) -> f64 {
        match which {
            Active::Pure(i) => self.weights[i],
            Active::Lump => self.lump.as_ref().map_or(0.0, |l| l.0),
        }
    }

    fn atom_state(&self, which: Active) -> DensityMatrix {
        match which {
            Active::Pure(i) => {
                DensityMatrix::trusted(self.da, self.db, ComplexMatrix::projector(&product(&self.a[i], &self.b[i])))
            }
            Active::Lump => self.lump.as_ref().expect("lump present").1.clone(),
        }
    }

    fn active(&self) -> impl Iterator<Item = Active> + '_ {
        let pure = (0..self.weights.len()).filter(|&i| self.weights[i] > 0.0).map(Active::Pure);
        let lump = self.lump.as_ref().filter(|l| l.0 > 0.0).map(|_| Active::Lump);
        pure.chain(lump)
    }

    /// `σ ← (1+t)σ − t·atom`; at `t = t_max` the atom leaves the active set.
    fn away_step(&mut self, which: Active, t: f64, t_max: f64) {
        self.scale(1.0 + t);
        let slot = match which {
            Active::Pure(i) => &mut self.weights[i],
            Active::Lump => &mut self.lump.as_mut().expect("lump present").0,
        };
        *slot = if t >= t_max { 0.0 } else { (*slot - t).max(0.0) };
    }

    /// `σ ← (1−δ)σ + δ·I/D`; the first `D` atoms are the computational basis.
    fn mix_floor(&mut self, delta: f64) {
        let n = self.da * self.db;
        self.scale(1.0 - delta);
        for w in &mut self.weights[..n] {
            *w += delta / n as f64;
        }
    }

    /// `None` while a lump atom carries weight.
    fn certificate(&self) -> Option<SeparableCertificate> {
        if self.weight(Active::Lump) > 0.0 {
            return None;
        }
        let sigma = self.assemble();
        let keep: Vec<usize> = (0..self.weights.len()).filter(|&i| self.weights[i] > 0.0).collect();
        Some(SeparableCertificate {
            weights: keep.iter().map(|&i| self.weights[i]).collect(),
            a: keep.iter().map(|&i| PureState::new(self.da, 1, self.a[i].clone()).unwrap()).collect(),
            b: keep.iter().map(|&i| PureState::new(self.db, 1, self.b[i].clone()).unwrap()).collect(),
            sigma,
        })
    }
}

fn product(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// `(ln x − ln y)/(x − y)`, `1/x` on the diagonal.
fn log_divided_difference(x: f64, y: f64) -> f64 {
    if x == y {
        1.0 / x
    } else {
        (x / y).ln() / (x - y)
    }
}

/// `∇_σ S(ρ‖σ)` in the computational basis.
fn gradient(rho: &DensityMatrix, s: &Spectrum) -> ComplexMatrix {
    let v = &s.eigenvectors;
    let rt = rho.matrix().conjugate_by(&v.adjoint());
    let n = s.dim();
    let lam: Vec<f64> = s.eigenvalues.iter().map(|&l| l.max(f64::MIN_POSITIVE)).collect();
    let g = ComplexMatrix::from_fn(n, n, |i, j| {
        -rt[(i, j)] * log_divided_difference(lam[i], lam[j]) / std::f64::consts::LN_2
    });
    g.conjugate_by(v).hermitian_part()
}

/// `(I ⊗ ⟨b|) G (I ⊗ |b⟩)` on party A.
fn contract_b(g: &ComplexMatrix, b: &[Complex64], da: usize, db: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(da, da, |i, k| {
        let mut acc = ZERO;
        for j in 0..db {
            for l in 0..db {
                acc += b[j].conj() * g[(i * db + j, k * db + l)] * b[l];
            }
        }
        acc
    })
}

/// `(⟨a| ⊗ I) G (|a⟩ ⊗ I)` on party B.
fn contract_a(g: &ComplexMatrix, a: &[Complex64], da: usize, db: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(db, db, |j, l| {
        let mut acc = ZERO;
        for i in 0..da {
            for k in 0..da {
                acc += a[i].conj() * g[(i * db + j, k * db + l)] * a[k];
            }
        }
        acc
    })
}

fn bottom_eigvec(m: &ComplexMatrix) -> (f64, Vec<Complex64>) {
    let s = hermitian_eig(&m.hermitian_part()).expect("contraction is Hermitian");
    let k = s.dim() - 1;
    (s.eigenvalues[k], s.vector(k))
}

fn alternate(
    g: &ComplexMatrix,
    da: usize,
    db: usize,
    mut b: Vec<Complex64>,
    sweeps: usize,
) -> (f64, Vec<Complex64>, Vec<Complex64>) {
    let mut a = Vec::new();
    let mut value = f64::INFINITY;
    for _ in 0..sweeps.max(1) {
        let (_, na) = bottom_eigvec(&contract_b(g, &b, da, db));
        let (v, nb) = bottom_eigvec(&contract_a(g, &na, da, db));
        a = na;
        b = nb;
        let converged = value - v <= 1e-15;
        value = v;
        if converged {
            break;
        }
    }
    (value, a, b)
}

/// Product pure state minimizing `⟨a⊗b|G|a⊗b⟩`: alternating minimization from
/// the warm start (previous solution), each computational basis vector of B,
/// and `random` Haar starts; best value wins.
fn linear_oracle(
    g: &ComplexMatrix,
    dims: (usize, usize),
    warm: Option<&[Complex64]>,
    random: usize,
    sweeps: usize,
    rng: &mut SplitMix64,
) -> (f64, Vec<Complex64>, Vec<Complex64>) {
    let (da, db) = dims;
    let mut starts: Vec<Vec<Complex64>> = warm.into_iter().map(|w| w.to_vec()).collect();
    starts.extend((0..db).map(|j| (0..db).map(|k| if k == j { ONE } else { ZERO }).collect()));
    starts.extend((0..random).map(|_| random_unit_vector(db, rng)));
    starts
        .into_iter()
        .map(|b| alternate(g, da, db, b, sweeps))
        .reduce(|best, next| if next.0 < best.0 { next } else { best })
        .expect("at least one start")
}

/// `S(ρ‖σ)` and its derivative along `dir`, from one eigendecomposition of `σ`.
fn value_and_slope(rho: &DensityMatrix, neg_entropy: f64, sigma: &ComplexMatrix, dir: &ComplexMatrix) -> (f64, f64) {
    let Ok(s) = hermitian_eig(sigma) else { return (f64::INFINITY, f64::INFINITY) };
    let f = relative_entropy_with(rho, neg_entropy, &s);
    if !f.is_finite() {
        return (f, f64::INFINITY);
    }
    let v = &s.eigenvectors;
    let rt = rho.matrix().conjugate_by(&v.adjoint());
    let dt = dir.conjugate_by(&v.adjoint());
    let lam: Vec<f64> = s.eigenvalues.iter().map(|&l| l.max(f64::MIN_POSITIVE)).collect();
    let n = s.dim();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (rt[(i, j)] * dt[(j, i)]).re * log_divided_difference(lam[i], lam[j]);
        }
    }
    (f, -acc / std::f64::consts::LN_2)
}

/// Minimizes the convex `t ↦ S(ρ‖σ + t·dir)` on `[0, t_max]` by safeguarded
/// secant steps on the derivative. Returns the best point seen.
fn line_search(
    rho: &DensityMatrix,
    neg_entropy: f64,
    sigma: &DensityMatrix,
    dir: &ComplexMatrix,
    t_max: f64,
    f0: f64,
    slope0: f64,
) -> (f64, f64) {
    let at = |t: f64| {
        let mut m = sigma.matrix().clone();
        m.add_scaled_in_place(dir, t);
        value_and_slope(rho, neg_entropy, &m, dir)
    };
    let mut best = (0.0, f0);
    if slope0.is_nan() || slope0 >= 0.0 || t_max.is_nan() || t_max <= 0.0 {
        return best;
    }
    let (f_hi, s_hi) = at(t_max);
    if f_hi < best.1 {
        best = (t_max, f_hi);
    }
    if s_hi <= 0.0 {
        return best;
    }
    let (mut lo, mut s_lo) = (0.0, slope0);
    let (mut hi, mut s_hi) = (t_max, s_hi);
    let tol = 1e-10 * t_max;
    for _ in 0..200 {
        let width = hi - lo;
        // Steep objectives can have their minimum inside the first bracket
        // width; keep shrinking until some point improves.
        if (width <= tol && best.0 > 0.0) || width <= f64::MIN_POSITIVE {
            break;
        }
        let mut t = if s_hi.is_finite() { lo - s_lo * width / (s_hi - s_lo) } else { lo + 0.5 * width };
        // Keep secant points away from the ends so the bracket always shrinks.
        if !(t > lo + 0.01 * width && t < hi - 0.01 * width) {
            t = lo + 0.5 * width;
        }
        let (ft, st) = at(t);
        if ft < best.1 {
            best = (t, ft);
        }
        if st == 0.0 {
            break;
        } else if st < 0.0 {
            (lo, s_lo) = (t, st);
        } else {
            (hi, s_hi) = (t, st);
            if !s_hi.is_finite() {
                continue;
            }
        }
        if st.abs() * width < 1e-14 {
            break;
        }
    }
    best
}

/// Upper bound on `E_r(ρ)` and the separable state that attains it.
pub fn rel_ent_entanglement(rho: &DensityMatrix, opts: &FwOptions) -> Result<(MeasureResult, SeparableCertificate)> {
    let (r, c, _) = rel_ent_entanglement_traced(rho, None, opts)?;
    Ok((r, c))
}

/// Full Frank–Wolfe run with the per-iteration trace. `start` replaces the
/// default `I/D` initial point; its first `D` atoms must be the computational
/// product basis when a floor is in use.
pub fn rel_ent_entanglement_traced(
    rho: &DensityMatrix,
    start: Option<&SeparableCertificate>,
    opts: &FwOptions,
) -> Result<(MeasureResult, SeparableCertificate, FwTrace)> {
    let (da, db) = rho.dims();
    if rho.dim() > MAX_FW_DIM {
        return Err(Error::TooLarge(format!("{da}⊗{db} exceeds the Frank–Wolfe guard of {MAX_FW_DIM}")));
    }
    let mut atoms = Atoms::maximally_mixed(da, db);
    if let Some(c) = start {
        atoms.weights.iter_mut().for_each(|w| *w = 0.0);
        let extra = Atoms::from_certificate(c);
        atoms.weights.extend(extra.weights);
        atoms.a.extend(extra.a);
        atoms.b.extend(extra.b);
    }
    let (result, atoms, trace) = frank_wolfe(rho, atoms, opts)?;
    let cert = atoms.certificate().expect("no lump atom");
    Ok((result, cert, trace))
}

fn frank_wolfe(rho: &DensityMatrix, mut atoms: Atoms, opts: &FwOptions) -> Result<(MeasureResult, Atoms, FwTrace)> {
    let (da, db) = rho.dims();
    let neg_entropy = -vn_entropy(rho);
    let mut rng = SplitMix64::new(opts.seed);
    let mut sigma = atoms.assemble();
    let mut trace = FwTrace::default();
    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    let mut warm: Option<Vec<Complex64>> = None;

    for _ in 0..opts.max_iters {
        let mut spec = sigma.spectrum();
        if opts.floor > 0.0 && spec.min() < opts.floor {
            atoms.mix_floor(opts.floor);
            sigma = sigma.lerp(&DensityMatrix::maximally_mixed(da, db), opts.floor);
            spec = sigma.spectrum();
        }
        let f = relative_entropy_with(rho, neg_entropy, &spec);
        if !f.is_finite() {
            return Err(Error::SupportMismatch);
        }
        let g = gradient(rho, &spec);
        let random = opts.restarts.max(1);
        let (mut tau_value, mut a, mut b) =
            linear_oracle(&g, (da, db), warm.as_deref(), random, opts.inner_sweeps, &mut rng);
        let tr_g_sigma = g.trace_product(sigma.matrix()).re;
        gap = (tr_g_sigma - tau_value).max(0.0);
        if gap <= opts.gap_tol {
            // The alternating oracle has local minima; confirm before stopping.
            let confirm = linear_oracle(&g, (da, db), Some(&b), 4 * random, opts.inner_sweeps, &mut rng);
            if confirm.0 < tau_value {
                (tau_value, a, b) = confirm;
                gap = (tr_g_sigma - tau_value).max(0.0);
            }
        }
        trace.gaps.push(gap);
        if gap <= opts.gap_tol {
            trace.objective.push(f);
            break;
        }
        warm = Some(b.clone());
        iterations += 1;
        let tau = DensityMatrix::trusted(da, db, ComplexMatrix::projector(&product(&a, &b)));
        let (t_fw, f_fw) =
            line_search(rho, neg_entropy, &sigma, &tau.matrix().sub(sigma.matrix()), 1.0, f, tau_value - tr_g_sigma);
        // Away candidate: the active atom with the largest linearized cost.
        let cost = |which: Active| match which {
            Active::Pure(i) => g.expectation(&product(&atoms.a[i], &atoms.b[i])).re,
            Active::Lump => g.trace_product(atoms.lump.as_ref().expect("lump present").1.matrix()).re,
        };
        let away = atoms
            .active()
            .filter(|&k| atoms.weight(k) < 1.0)
            .map(|k| (k, cost(k)))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .filter(|&(_, cost)| cost > tr_g_sigma)
            .map(|(idx, cost)| {
                // σ(t) = (1+t)σ − t·v, feasible while t ≤ w/(1−w).
                let w = atoms.weight(idx);
                let v = atoms.atom_state(idx);
                let t_max = w / (1.0 - w);
                let dir = sigma.matrix().sub(v.matrix());
                let (t, ft) = line_search(rho, neg_entropy, &sigma, &dir, t_max, f, tr_g_sigma - cost);
                (idx, v, t, t_max, ft)
            });
        let improved = match away {
            Some((idx, v, t, t_max, f_away)) if f_away < f_fw && f_away < f => {
                sigma = sigma.lerp(&v, -t);
                atoms.away_step(idx, t, t_max);
                Some(f_away)
            }
            _ if f_fw < f => {
                sigma = sigma.lerp(&tau, t_fw);
                atoms.step(t_fw, a, b);
                Some(f_fw)
            }
            _ => None,
        };
        match improved {
            Some(ft) => trace.objective.push(ft),
            None => {
                trace.objective.push(f);
                break;
            }
        }
    }

    let spec = hermitian_eig(atoms.assemble().matrix())?;
    let value = relative_entropy_with(rho, neg_entropy, &spec);
    if !value.is_finite() {
        return Err(Error::SupportMismatch);
    }
    Ok((MeasureResult { value, kind: Kind::UpperBound, iterations, gap }, atoms, trace))
}

/// Two-copy run started from `σ* ⊗ σ*` of a single-copy optimum.
pub(crate) fn rel_ent_two_copies(rho: &DensityMatrix, opts: &FwOptions) -> Result<MeasureResult> {
    let (_, cert) = rel_ent_entanglement(rho, opts)?;
    let doubled = tensor_power(rho, 2);
    if doubled.dim() > MAX_FW_DIM {
        return Err(Error::TooLarge(format!("two copies exceed the Frank–Wolfe guard of {MAX_FW_DIM}")));
    }
    let mut atoms = Atoms::maximally_mixed(doubled.dim_a(), doubled.dim_b());
    atoms.weights.iter_mut().for_each(|w| *w = 0.0);
    atoms.lump = Some((1.0, tensor_power(&cert.sigma, 2)));
    frank_wolfe(&doubled, atoms, opts).map(|r| r.0)
}
