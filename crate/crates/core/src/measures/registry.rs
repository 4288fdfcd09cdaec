use super::eof::{eof_variational, regularized_eof_probe, EofOptions};
use super::rel_ent::{rel_ent_entanglement, rel_ent_two_copies, FwOptions};
use super::{
    entropy_of_entanglement, eof_two_qubit_closed, er_isotropic_closed, hashing_lower_bound, log_negativity, Kind,
    MeasureResult,
};
use crate::channels::twirl_exact;
use crate::error::{Error, Result};
use crate::par::Exec;
use crate::qmat::{entangled_fidelity, tensor_power, DensityMatrix, PureState};

/// Budgets and seeds for the optimizer-backed measures.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EvalConfig {
    pub eof: EofOptions,
    pub fw: FwOptions,
}

impl EvalConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.eof.seed = seed;
        self.fw.seed = seed;
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.eof.exec = exec;
        self
    }

    /// Multiplies every iteration budget by `factor`.
    pub fn scaled(mut self, factor: usize) -> Self {
        self.eof.budget *= factor;
        self.fw.max_iters *= factor;
        self
    }
}

/// The registered measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measure {
    Entropy,
    EofTwoQubit,
    EofVariational,
    RelEnt,
    RelEntIsotropic,
    LogNeg,
    Hashing,
}

/// Isotropic inputs must match their own twirl to this accuracy.
const ISOTROPIC_TOL: f64 = 1e-10;
/// Purity deviation tolerated when treating a density matrix as a pure state.
const PURITY_TOL: f64 = 1e-10;

impl Measure {
    pub const ALL: [Measure; 7] = [
        Measure::Entropy,
        Measure::EofTwoQubit,
        Measure::EofVariational,
        Measure::RelEnt,
        Measure::RelEntIsotropic,
        Measure::LogNeg,
        Measure::Hashing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Entropy => "e_entropy",
            Measure::EofTwoQubit => "e_f_2q",
            Measure::EofVariational => "e_f_var",
            Measure::RelEnt => "e_r",
            Measure::RelEntIsotropic => "e_r_iso",
            Measure::LogNeg => "log_neg",
            Measure::Hashing => "hashing",
        }
    }

    pub fn from_name(name: &str) -> Result<Measure> {
        Self::ALL.into_iter().find(|m| m.name() == name).ok_or_else(|| Error::Unknown(name.to_string()))
    }

    pub fn kind(self) -> Kind {
        match self {
            Measure::EofVariational | Measure::RelEnt => Kind::UpperBound,
            Measure::Hashing => Kind::LowerBound,
            _ => Kind::Exact,
        }
    }

    /// Backed by an iterative optimizer rather than a closed form.
    pub fn is_optimizer(self) -> bool {
        matches!(self, Measure::EofVariational | Measure::RelEnt)
    }

    pub fn requires_pure(self) -> bool {
        self == Measure::Entropy
    }

    pub fn requires_two_qubit(self) -> bool {
        matches!(self, Measure::EofTwoQubit | Measure::Hashing)
    }

    pub fn requires_isotropic(self) -> bool {
        self == Measure::RelEntIsotropic
    }

    fn not_applicable(self, reason: impl Into<String>) -> Error {
        Error::NotApplicable { measure: self.name().into(), reason: reason.into() }
    }

    pub fn evaluate(self, rho: &DensityMatrix, cfg: &EvalConfig) -> Result<MeasureResult> {
        match self {
            Measure::Entropy => Ok(entropy_of_entanglement(&self.as_pure(rho)?)),
            Measure::EofTwoQubit => eof_two_qubit_closed(rho),
            Measure::EofVariational => eof_variational(rho, &cfg.eof).map(|r| r.0),
            Measure::RelEnt => rel_ent_entanglement(rho, &cfg.fw).map(|r| r.0),
            Measure::RelEntIsotropic => {
                let f = self.isotropic_fidelity(rho)?;
                er_isotropic_closed(f, rho.dim_a())
            }
            Measure::LogNeg => Ok(log_negativity(rho)),
            Measure::Hashing => hashing_lower_bound(rho),
        }
    }

    /// Value on `ρ^{⊗n}`. The optimizer measures seed the multi-copy search
    /// with the product of their single-copy optimum.
    pub fn evaluate_copies(self, rho: &DensityMatrix, copies: usize, cfg: &EvalConfig) -> Result<MeasureResult> {
        match (self, copies) {
            (_, 1) => self.evaluate(rho, cfg),
            (Measure::EofVariational, 2) => {
                let mut r = regularized_eof_probe(rho, 2, &cfg.eof)?;
                r.value *= 2.0;
                r.gap *= 2.0;
                Ok(r)
            }
            (Measure::RelEnt, 2) => rel_ent_two_copies(rho, &cfg.fw),
            (_, n) => self.evaluate(&tensor_power(rho, n), cfg),
        }
    }

    fn as_pure(self, rho: &DensityMatrix) -> Result<PureState> {
        if (rho.purity() - 1.0).abs() > PURITY_TOL {
            return Err(self.not_applicable(format!("needs a pure state, purity is {}", rho.purity())));
        }
        let s = rho.spectrum();
        PureState::normalized(rho.dim_a(), rho.dim_b(), s.vector(0))
    }

    fn isotropic_fidelity(self, rho: &DensityMatrix) -> Result<f64> {
        if rho.dim_a() != rho.dim_b() || rho.dim_a() < 2 {
            return Err(self.not_applicable("needs a d⊗d state"));
        }
        let dev = twirl_exact(rho)?.max_abs_diff(rho);
        if dev > ISOTROPIC_TOL {
            return Err(self.not_applicable(format!("state is not isotropic (deviation {dev:e})")));
        }
        Ok(entangled_fidelity(rho)?.clamp(0.0, 1.0))
    }
}

impl std::fmt::Display for Measure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Measure::from_name(s)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MeasureRegistryEntry {
    pub name: &'static str,
    pub kind: Kind,
    pub measure: Measure,
}

impl MeasureRegistryEntry {
    pub fn evaluate(&self, rho: &DensityMatrix, cfg: &EvalConfig) -> Result<MeasureResult> {
        self.measure.evaluate(rho, cfg)
    }
}

pub fn registry() -> Vec<MeasureRegistryEntry> {
    Measure::ALL.iter().map(|&m| MeasureRegistryEntry { name: m.name(), kind: m.kind(), measure: m }).collect()
}
