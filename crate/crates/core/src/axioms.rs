//! Seeded falsification checks for the entanglement-measure postulates.
//!
//! Every check draws its inputs from `trial_seed(seed, i)`, so a report is a
//! pure function of `(measure, options)` regardless of [`Exec`]. A check can
//! only find counterexamples; a clean report is evidence, not proof.
//!
//! Asymptotic continuity has no finite form and is represented only by
//! [`isotropic_scaling_scan`].
//!
//! Optimizer-backed measures return upper bounds, so a comparison between two
//! of their values can be off by the optimizer error on either side. Those
//! comparisons use [`CheckTolerances::optimizer`], and any trial beyond it is
//! re-run once at [`RERUN_FACTOR`] times the budget. Both attempts are kept in
//! [`CheckReport::attempts`].

use crate::channels::{
    apply_instrument, apply_protocol, forget_outcomes, random_local_instrument_from, random_protocol,
};
use crate::error::{Error, Result};
use crate::measures::{eof_two_qubit_closed, er_isotropic_closed, hashing_lower_bound, EvalConfig, Kind, Measure};
use crate::par::{map_indexed, Exec};
use crate::qmat::{entangled_fidelity, DensityMatrix, Party, PureState, ONE, ZERO};
use crate::rng::{trial_seed, SplitMix64};
use crate::states::{
    isotropic, maximally_entangled, random_density, random_pure, random_separable, random_unit_vector,
};

/// Budget multiplier for the second attempt of an optimizer check.
pub const RERUN_FACTOR: usize = 4;
/// Largest local dimension the scaling scan will build a matrix for.
pub const MAX_SCAN_MATRIX_D: usize = 8;
/// Largest local dimension the scaling scan allows for optimizer measures.
pub const MAX_SCAN_OPTIMIZER_D: usize = 3;

/// Slack allowed in each kind of comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckTolerances {
    /// Closed-form measures.
    pub exact: f64,
    /// An optimizer value against a known target.
    pub fw: f64,
    /// Two optimizer values against each other.
    pub optimizer: f64,
    /// An optimizer value on separable inputs.
    pub separable: f64,
}

impl Default for CheckTolerances {
    fn default() -> Self {
        Self { exact: 1e-9, fw: 5e-3, optimizer: 1e-2, separable: 1e-3 }
    }
}

impl CheckTolerances {
    fn comparison(&self, m: Measure) -> f64 {
        if m.is_optimizer() {
            self.optimizer
        } else {
            self.exact
        }
    }

    fn target(&self, m: Measure) -> f64 {
        if m.is_optimizer() {
            self.fw
        } else {
            self.exact
        }
    }

    fn vanishing(&self, m: Measure) -> f64 {
        if m.is_optimizer() {
            self.separable
        } else {
            self.exact
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions {
    pub trials: usize,
    pub seed: u64,
    /// Local dimensions of fuzzed inputs.
    pub dims: (usize, usize),
    /// LOCC rounds for monotonicity, 1 or 2.
    pub rounds: usize,
    /// States per convex mixture.
    pub k_mix: usize,
    pub eval: EvalConfig,
    pub tolerances: CheckTolerances,
    pub exec: Exec,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            trials: 200,
            seed: 0,
            dims: (2, 2),
            rounds: 1,
            k_mix: 3,
            eval: EvalConfig::default(),
            tolerances: CheckTolerances::default(),
            exec: Exec::default(),
        }
    }
}

/// One trial of a check, read as `lhs ≤ rhs` (or `lhs ≈ rhs` for targets).
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub trial: usize,
    pub seed: u64,
    pub input: String,
    pub lhs: f64,
    pub rhs: f64,
    /// How far the trial is on the wrong side; negative means slack.
    pub excess: f64,
}

impl TrialRow {
    fn inequality(trial: usize, seed: u64, input: String, lhs: f64, rhs: f64) -> Self {
        Self { trial, seed, input, lhs, rhs, excess: lhs - rhs }
    }

    fn target(trial: usize, seed: u64, input: String, lhs: f64, rhs: f64) -> Self {
        Self { trial, seed, input, lhs, rhs, excess: (lhs - rhs).abs() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Attempt {
    pub budget_factor: usize,
    pub violations: usize,
    pub max_excess: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub check: String,
    /// The measure actually evaluated.
    pub measure: String,
    pub trials: usize,
    pub tolerance: f64,
    pub rows: Vec<TrialRow>,
    pub violations: Vec<TrialRow>,
    pub max_excess: f64,
    pub passed: bool,
    pub attempts: Vec<Attempt>,
    pub note: Option<String>,
}

impl CheckReport {
    fn new(check: &str, measure: Measure, tolerance: f64, rows: Vec<TrialRow>) -> Self {
        let mut r = Self {
            check: check.to_string(),
            measure: measure.name().to_string(),
            trials: rows.len(),
            tolerance,
            rows,
            violations: Vec::new(),
            max_excess: 0.0,
            passed: true,
            attempts: Vec::new(),
            note: None,
        };
        r.refresh(1);
        r
    }

    fn refresh(&mut self, budget_factor: usize) {
        self.violations =
            self.rows.iter().filter(|r| r.excess.is_nan() || r.excess > self.tolerance).cloned().collect();
        self.max_excess = self.rows.iter().map(|r| r.excess).fold(f64::NEG_INFINITY, f64::max);
        if self.rows.is_empty() {
            self.max_excess = 0.0;
        }
        self.passed = self.violations.is_empty();
        self.attempts.push(Attempt { budget_factor, violations: self.violations.len(), max_excess: self.max_excess });
    }

    fn with_note(mut self, note: Option<String>) -> Self {
        self.note = note;
        self
    }
}

fn run_trials<F>(
    check: &str,
    measure: Measure,
    tolerance: f64,
    opts: &CheckOptions,
    n: usize,
    trial: F,
) -> Result<CheckReport>
where
    F: Fn(usize, u64, &EvalConfig) -> Result<TrialRow> + Sync + Send,
{
    let eval = opts.eval;
    let rows = map_indexed(n, opts.exec, |i| trial(i, trial_seed(opts.seed, i), &eval))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut report = CheckReport::new(check, measure, tolerance, rows);
    if measure.is_optimizer() && !report.passed {
        let boosted = eval.scaled(RERUN_FACTOR);
        let redo: Vec<usize> = report.violations.iter().map(|r| r.trial).collect();
        let fresh = map_indexed(redo.len(), opts.exec, |k| trial(redo[k], trial_seed(opts.seed, redo[k]), &boosted))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        for row in fresh {
            let i = row.trial;
            report.rows[i] = row;
        }
        report.refresh(RERUN_FACTOR);
    }
    Ok(report)
}

/// `e_r_iso` is only defined on isotropic states, which LOCC outputs and
/// tensor powers are not; those checks run on `e_r` instead.
fn delegate(measure: Measure) -> (Measure, Option<String>) {
    match measure {
        Measure::RelEntIsotropic => {
            (Measure::RelEnt, Some("e_r_iso is defined on isotropic states only; evaluated with e_r".to_string()))
        }
        m => (m, None),
    }
}

fn not_applicable(measure: Measure, reason: &str) -> Error {
    Error::NotApplicable { measure: measure.name().into(), reason: reason.into() }
}

fn value(m: Measure, rho: &DensityMatrix, cfg: &EvalConfig) -> Result<f64> {
    m.evaluate(rho, cfg).map(|r| r.value)
}

/// A random input suited to `measure`: pure for `e_entropy`, isotropic for
/// `e_r_iso`, a mixed state of random rank otherwise.
fn sample_input(measure: Measure, dims: (usize, usize), seed: u64) -> Result<(String, DensityMatrix)> {
    let (da, db) = dims;
    match measure {
        Measure::Entropy => Ok((format!("random_pure({da}x{db},seed={seed})"), random_pure(da, db, seed)?.density())),
        Measure::RelEntIsotropic => {
            let f = SplitMix64::new(seed).uniform();
            Ok((format!("isotropic(F={f},d={da})"), isotropic(f, da)?))
        }
        _ => {
            let rank = 1 + SplitMix64::new(seed ^ 0x5A5A_5A5A).below(da * db);
            Ok((format!("random_density({da}x{db},rank={rank},seed={seed})"), random_density(da, db, rank, seed)?))
        }
    }
}

fn check_dims(measure: Measure, dims: (usize, usize)) -> Result<()> {
    if dims.0 < 2 || dims.1 < 2 {
        return Err(Error::InvalidParameter(format!("local dimensions must be >= 2, got {}x{}", dims.0, dims.1)));
    }
    if measure.requires_two_qubit() && dims != (2, 2) {
        return Err(not_applicable(measure, "needs 2x2 inputs"));
    }
    if measure.requires_isotropic() && dims.0 != dims.1 {
        return Err(not_applicable(measure, "needs dxd inputs"));
    }
    Ok(())
}

/// `|E(P₊(2)) − 1|`.
pub fn check_normalization(measure: Measure, opts: &CheckOptions) -> Result<CheckReport> {
    let bell = maximally_entangled(2)?.density();
    run_trials("normalization", measure, opts.tolerances.target(measure), opts, 1, |i, _, cfg| {
        Ok(TrialRow::target(i, opts.seed, "max_entangled(d=2)".into(), value(measure, &bell, cfg)?, 1.0))
    })
}

/// `E(σ) ≈ 0` on random separable states.
pub fn check_separable_vanishing(measure: Measure, opts: &CheckOptions) -> Result<CheckReport> {
    check_dims(measure, opts.dims)?;
    let (da, db) = opts.dims;
    run_trials("separable", measure, opts.tolerances.vanishing(measure), opts, opts.trials, |i, seed, cfg| {
        let (input, sigma) = match measure {
            Measure::Entropy => {
                let mut rng = SplitMix64::new(seed);
                let a = random_unit_vector(da, &mut rng);
                let b = random_unit_vector(db, &mut rng);
                (format!("random_product_pure({da}x{db},seed={seed})"), PureState::product(&a, &b)?.density())
            }
            Measure::RelEntIsotropic => {
                let f = SplitMix64::new(seed).uniform() / da as f64;
                (format!("isotropic(F={f},d={da})"), isotropic(f, da)?)
            }
            _ => {
                let k = 1 + SplitMix64::new(seed ^ 0x5A5A_5A5A).below(4);
                (format!("random_separable({da}x{db},k={k},seed={seed})"), random_separable(da, db, k, seed)?)
            }
        };
        Ok(TrialRow::inequality(i, seed, input, value(measure, &sigma, cfg)?, 0.0))
    })
}

/// `Σ pᵢ E(σᵢ) ≤ E(ρ)` over the branches of a random one- or two-round LOCC
/// operation.
pub fn fuzz_monotonicity(measure: Measure, opts: &CheckOptions) -> Result<CheckReport> {
    let (m, note) = delegate(measure);
    check_dims(m, opts.dims)?;
    if !(1..=2).contains(&opts.rounds) {
        return Err(Error::InvalidParameter(format!("rounds must be 1 or 2, got {}", opts.rounds)));
    }
    let (da, db) = opts.dims;
    let name = if opts.rounds == 1 { "monotonicity" } else { "monotonicity_2round" };
    let report = run_trials(name, m, opts.tolerances.comparison(m), opts, opts.trials, |i, seed, cfg| {
        let (input, rho) = sample_input(m, opts.dims, seed)?;
        let op_seed = seed.rotate_left(32) ^ 0xC0FF_EE00;
        let (desc, ens) = if opts.rounds == 1 {
            let mut rng = SplitMix64::new(op_seed);
            let (party, d) = if rng.below(2) == 0 { (Party::A, da) } else { (Party::B, db) };
            let outcomes = 1 + rng.below(3);
            let inst = random_local_instrument_from(party, d, outcomes, &mut rng)?;
            (format!("instrument({party:?},{outcomes},seed={op_seed})"), apply_instrument(&rho, &inst)?)
        } else {
            (format!("protocol(seed={op_seed})"), apply_protocol(&rho, &random_protocol(da, db, op_seed)?)?)
        };
        let before = value(m, &rho, cfg)?;
        let after = ens.average(|s| value(m, s, cfg))?;
        Ok(TrialRow::inequality(i, seed, format!("{input}+{desc}"), after, before))
    })?;
    Ok(report.with_note(note))
}

/// `E(Σ pᵢ ρᵢ) ≤ Σ pᵢ E(ρᵢ)` for random mixtures of `k_mix` states.
pub fn fuzz_convexity(measure: Measure, opts: &CheckOptions) -> Result<CheckReport> {
    if measure == Measure::Entropy {
        return Err(not_applicable(measure, "mixtures of pure states are not pure"));
    }
    check_dims(measure, opts.dims)?;
    if opts.k_mix == 0 {
        return Err(Error::InvalidParameter("k_mix must be >= 1".into()));
    }
    run_trials("convexity", measure, opts.tolerances.comparison(measure), opts, opts.trials, |i, seed, cfg| {
        let mut rng = SplitMix64::new(seed);
        let weights = rng.dirichlet(opts.k_mix);
        let mut states = Vec::with_capacity(opts.k_mix);
        let mut inputs = Vec::with_capacity(opts.k_mix);
        for _ in 0..opts.k_mix {
            let (input, rho) = sample_input(measure, opts.dims, rng.next_u64())?;
            inputs.push(input);
            states.push(rho);
        }
        let mix = DensityMatrix::mixture(&weights, &states)?;
        let mut avg = 0.0;
        for (w, rho) in weights.iter().zip(&states) {
            avg += w * value(measure, rho, cfg)?;
        }
        Ok(TrialRow::inequality(i, seed, format!("mix[{}]", inputs.join(";")), value(measure, &mix, cfg)?, avg))
    })
}

/// `B(Λ(ρ)) ≤ B(ρ)` for the trace-preserving map of a random two-round
/// protocol with outcomes discarded.
pub fn check_weak_monotonicity(measure: Measure, opts: &CheckOptions) -> Result<CheckReport> {
    if measure == Measure::Entropy {
        return Err(not_applicable(measure, "channel outputs of pure states are mixed"));
    }
    let (m, note) = delegate(measure);
    check_dims(m, opts.dims)?;
    let (da, db) = opts.dims;
    let report =
        run_trials("weak_monotonicity", m, opts.tolerances.comparison(m), opts, opts.trials, |i, seed, cfg| {
            let (input, rho) = sample_input(m, opts.dims, seed)?;
            let op_seed = seed.rotate_left(32) ^ 0xC0FF_EE00;
            let out = forget_outcomes(&apply_protocol(&rho, &random_protocol(da, db, op_seed)?)?)?;
            let input = format!("{input}+protocol(seed={op_seed})");
            Ok(TrialRow::inequality(i, seed, input, value(m, &out, cfg)?, value(m, &rho, cfg)?))
        })?;
    Ok(report.with_note(note))
}

/// Base states for [`check_partial_subadditivity`]: an entangled isotropic
/// state, `count` random states and one separable state, all `2 ⊗ 2`.
pub fn subadditivity_bases(measure: Measure, count: usize, seed: u64) -> Result<Vec<(String, DensityMatrix)>> {
    let (m, _) = delegate(measure);
    let mut out = Vec::with_capacity(count + 2);
    if m == Measure::Entropy {
        out.push(("max_entangled(d=2)".to_string(), maximally_entangled(2)?.density()));
        let prod = PureState::product(&[ONE, ZERO], &[ZERO, ONE])?;
        out.push(("product(|0>,|1>)".to_string(), prod.density()));
    } else {
        out.push(("isotropic(F=0.75,d=2)".to_string(), isotropic(0.75, 2)?));
        out.push((format!("random_separable(2x2,k=3,seed={seed})"), random_separable(2, 2, 3, seed)?));
    }
    for i in 0..count {
        let s = trial_seed(seed, i + 1);
        out.push(sample_input(m, (2, 2), s)?);
    }
    Ok(out)
}

/// `B(ρ⊗ρ) ≤ 2B(ρ)` on each base state; the excess column is minus the gap.
pub fn check_partial_subadditivity(
    measure: Measure,
    bases: &[(String, DensityMatrix)],
    opts: &CheckOptions,
) -> Result<CheckReport> {
    let (m, note) = delegate(measure);
    let report = run_trials("subadditivity", m, opts.tolerances.comparison(m), opts, bases.len(), |i, _, cfg| {
        let (input, rho) = &bases[i];
        let single = m.evaluate_copies(rho, 1, cfg)?.value;
        let double = m.evaluate_copies(rho, 2, cfg)?.value;
        Ok(TrialRow::inequality(i, opts.seed, input.clone(), double, 2.0 * single))
    })?;
    Ok(report.with_note(note))
}

/// How the scan picks `F_d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FidelityRule {
    /// `F_d = 1 − 1/d`.
    OneMinusInvD,
    /// `F_d = 1/d`, the separability boundary.
    InvD,
    Constant(f64),
}

impl FidelityRule {
    pub fn fidelity(self, d: usize) -> f64 {
        let df = d as f64;
        match self {
            FidelityRule::OneMinusInvD => 1.0 - 1.0 / df,
            FidelityRule::InvD => 1.0 / df,
            FidelityRule::Constant(f) => f,
        }
    }
}

impl std::fmt::Display for FidelityRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FidelityRule::OneMinusInvD => f.write_str("1-1/d"),
            FidelityRule::InvD => f.write_str("1/d"),
            FidelityRule::Constant(c) => write!(f, "{c}"),
        }
    }
}

impl std::str::FromStr for FidelityRule {
    type Err = Error;

    /// Accepts `1-1/d`, `1/d` or a constant in `[0, 1]`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1-1/d" => Ok(FidelityRule::OneMinusInvD),
            "1/d" => Ok(FidelityRule::InvD),
            other => match other.parse::<f64>() {
                Ok(c) if (0.0..=1.0).contains(&c) => Ok(FidelityRule::Constant(c)),
                _ => Err(Error::InvalidParameter(format!("unknown fidelity rule {other:?}"))),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRow {
    pub d: usize,
    pub fidelity: f64,
    pub value: f64,
    /// `value / log₂d`.
    pub ratio: f64,
}

/// `B(ϱ(F_d, d)) / log₂d` for each `d`.
pub fn isotropic_scaling_scan(
    measure: Measure,
    d_list: &[usize],
    rule: FidelityRule,
    cfg: &EvalConfig,
) -> Result<Vec<ScalingRow>> {
    d_list
        .iter()
        .map(|&d| {
            if d < 2 {
                return Err(Error::InvalidParameter(format!("scan dimension must be >= 2, got {d}")));
            }
            let f = rule.fidelity(d);
            let value = match measure {
                Measure::RelEntIsotropic => er_isotropic_closed(f, d)?.value,
                m if m.is_optimizer() && d > MAX_SCAN_OPTIMIZER_D => {
                    return Err(Error::TooLarge(format!("{m} scan capped at d <= {MAX_SCAN_OPTIMIZER_D}, got {d}")))
                }
                m if d > MAX_SCAN_MATRIX_D => {
                    return Err(Error::TooLarge(format!("{m} scan capped at d <= {MAX_SCAN_MATRIX_D}, got {d}")))
                }
                m => value(m, &isotropic(f, d)?, cfg)?,
            };
            Ok(ScalingRow { d, fidelity: f, value, ratio: value / (d as f64).log2() })
        })
        .collect()
}

/// Powers of two up to `d_max`, then `d_max` itself.
pub fn scan_dimensions(d_max: usize) -> Vec<usize> {
    let mut out: Vec<usize> =
        std::iter::successors(Some(2usize), |d| d.checked_mul(2)).take_while(|&d| d <= d_max).collect();
    if d_max >= 2 && out.last() != Some(&d_max) {
        out.push(d_max);
    }
    out
}

/// Ratios non-decreasing in `d` and never above 1, each within `tol`.
pub fn scaling_condition(rows: &[ScalingRow], tol: f64) -> bool {
    rows.iter().all(|r| r.ratio.is_finite() && r.ratio >= -tol && r.ratio <= 1.0 + tol)
        && rows.windows(2).all(|w| w[1].ratio >= w[0].ratio - tol)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Theorem2Report {
    pub weak_monotonicity: CheckReport,
    pub subadditivity: CheckReport,
    pub scaling: Vec<ScalingRow>,
    pub scaling_passed: bool,
}

impl Theorem2Report {
    pub fn passed(&self) -> bool {
        self.weak_monotonicity.passed && self.subadditivity.passed && self.scaling_passed
    }
}

/// Weak monotonicity on `opts.dims`, subadditivity on the default bases and
/// the scaling scan over [`scan_dimensions`]`(d_max)`.
pub fn theorem2_battery(
    measure: Measure,
    d_max: usize,
    rule: FidelityRule,
    opts: &CheckOptions,
) -> Result<Theorem2Report> {
    let weak_monotonicity = check_weak_monotonicity(measure, opts)?;
    let bases = subadditivity_bases(measure, 3, opts.seed)?;
    let subadditivity = check_partial_subadditivity(measure, &bases, opts)?;
    let scaling = isotropic_scaling_scan(measure, &scan_dimensions(d_max), rule, &opts.eval)?;
    let scaling_passed = scaling_condition(&scaling, opts.tolerances.comparison(measure));
    Ok(Theorem2Report { weak_monotonicity, subadditivity, scaling, scaling_passed })
}

/// Hashing rate, relative entropy of entanglement and entanglement of
/// formation of one two-qubit state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichRow {
    pub fidelity: f64,
    pub lower: f64,
    pub middle: f64,
    pub middle_kind: Kind,
    pub upper: f64,
    pub ordered: bool,
}

/// Closed forms on `ϱ(F, 2)`: every column is exact.
pub fn sandwich_isotropic(fidelity: f64, tol: &CheckTolerances) -> Result<SandwichRow> {
    let rho = isotropic(fidelity, 2)?;
    let lower = hashing_lower_bound(&rho)?.value;
    let middle = er_isotropic_closed(fidelity, 2)?.value;
    let upper = eof_two_qubit_closed(&rho)?.value;
    let ordered = lower <= middle + tol.exact && middle <= upper + tol.exact;
    Ok(SandwichRow { fidelity, lower, middle, middle_kind: Kind::Exact, upper, ordered })
}

/// `F ∈ {0.5, 0.55, …, 1}`.
pub fn sandwich_grid(tol: &CheckTolerances) -> Result<Vec<SandwichRow>> {
    (0..=10).map(|k| sandwich_isotropic((10 + k) as f64 / 20.0, tol)).collect()
}

/// Any two-qubit state, with the relative entropy from Frank–Wolfe. On
/// isotropic inputs the closed forms are checked as well.
pub fn sandwich_report(rho: &DensityMatrix, cfg: &EvalConfig, tol: &CheckTolerances) -> Result<SandwichRow> {
    if rho.dims() != (2, 2) {
        return Err(Error::TooLarge(format!("sandwich needs a 2x2 state, got {}x{}", rho.dim_a(), rho.dim_b())));
    }
    let fidelity = entangled_fidelity(rho)?;
    let lower = hashing_lower_bound(rho)?.value;
    let mid = Measure::RelEnt.evaluate(rho, cfg)?;
    let upper = eof_two_qubit_closed(rho)?.value;
    let mut ordered = lower <= mid.value + tol.exact && mid.value <= upper + tol.fw;
    if let Ok(iso) = Measure::RelEntIsotropic.evaluate(rho, cfg) {
        ordered &= lower <= iso.value + tol.exact && iso.value <= upper + tol.exact;
    }
    Ok(SandwichRow { fidelity, lower, middle: mid.value, middle_kind: mid.kind, upper, ordered })
}
