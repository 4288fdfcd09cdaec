//! The `ebits` command line.
//!
//! Exit codes: 0 success, 1 a check failed, 2 bad usage or input.

pub mod report;
pub mod state_file;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ebits::axioms::{
    check_normalization, check_partial_subadditivity, check_separable_vanishing, check_weak_monotonicity,
    fuzz_convexity, fuzz_monotonicity, sandwich_grid, sandwich_report, subadditivity_bases, theorem2_battery,
    CheckReport, FidelityRule,
};
use ebits::measures::Measure;
use ebits::states::{
    bell_diagonal, isotropic, maximally_entangled, random_density, random_pure, random_separable,
    tiles_bound_entangled, BellDiagonalParams,
};
use ebits::{DensityMatrix, Error, Exec};

use report::{num, Csv, RunConfig};
use state_file::{Metadata, StateFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "ebits", version, about = "Entanglement measures and postulate checks")]
pub struct Cli {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file; relative paths are placed under --out-dir. Defaults to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, env = "EBITS_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
    /// Pair moves per restart of the formation search.
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    /// Restarts of the formation search.
    #[arg(long, global = true)]
    pub restarts: Option<usize>,
    /// Iteration cap of the Frank–Wolfe search.
    #[arg(long, global = true)]
    pub fw_iters: Option<usize>,
    /// Stopping gap of the Frank–Wolfe search.
    #[arg(long, global = true)]
    pub fw_gap: Option<f64>,
    #[arg(long, global = true)]
    pub tol_exact: Option<f64>,
    #[arg(long, global = true)]
    pub tol_fw: Option<f64>,
    #[arg(long, global = true)]
    pub tol_optimizer: Option<f64>,
    #[arg(long, global = true)]
    pub tol_separable: Option<f64>,
    /// Run trials and restarts on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,
    /// Fill the `seconds` column of `measure`.
    #[arg(long, global = true)]
    pub timing: bool,
}

impl RunArgs {
    pub fn config(&self) -> RunConfig {
        let mut cfg = RunConfig { seed: self.seed, out_dir: self.out_dir.clone(), ..RunConfig::default() };
        let t = &mut cfg.tolerances;
        t.exact = self.tol_exact.unwrap_or(t.exact);
        t.fw = self.tol_fw.unwrap_or(t.fw);
        t.optimizer = self.tol_optimizer.unwrap_or(t.optimizer);
        t.separable = self.tol_separable.unwrap_or(t.separable);
        let e = &mut cfg.eval;
        e.eof.budget = self.budget.unwrap_or(e.eof.budget);
        e.eof.restarts = self.restarts.unwrap_or(e.eof.restarts);
        e.fw.max_iters = self.fw_iters.unwrap_or(e.fw.max_iters);
        e.fw.gap_tol = self.fw_gap.unwrap_or(e.fw.gap_tol);
        if self.sequential {
            cfg.exec = Exec::Sequential;
        }
        cfg
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a state file.
    Gen(GenArgs),
    /// Evaluate measures on a state file.
    Measure(MeasureArgs),
    /// Run one postulate check.
    Fuzz(FuzzArgs),
    /// Weak monotonicity, subadditivity and the isotropic scaling scan.
    Thm2(Thm2Args),
    /// Hashing bound, relative entropy and formation side by side.
    Sandwich(SandwichArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    #[value(name = "max_entangled")]
    MaxEntangled,
    #[value(name = "isotropic")]
    Isotropic,
    #[value(name = "bell_diagonal")]
    BellDiagonal,
    #[value(name = "random_pure")]
    RandomPure,
    #[value(name = "random_density")]
    RandomDensity,
    #[value(name = "random_separable")]
    RandomSeparable,
    #[value(name = "tiles")]
    Tiles,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    pub family: Family,
    /// Local dimension of both parties.
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub da: Option<usize>,
    #[arg(long)]
    pub db: Option<usize>,
    #[arg(long)]
    pub fidelity: Option<f64>,
    /// Four comma-separated Bell weights.
    #[arg(long, value_delimiter = ',')]
    pub probs: Option<Vec<f64>>,
    #[arg(long)]
    pub rank: Option<usize>,
    /// Product terms in a separable mixture.
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    pub state: PathBuf,
    /// `all` or a comma-separated list of measure names.
    #[arg(long, default_value = "all")]
    pub measures: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckName {
    #[value(name = "normalization")]
    Normalization,
    #[value(name = "separable")]
    Separable,
    #[value(name = "monotonicity")]
    Monotonicity,
    #[value(name = "convexity")]
    Convexity,
    #[value(name = "weak_monotonicity")]
    WeakMonotonicity,
    #[value(name = "subadditivity")]
    Subadditivity,
}

#[derive(Debug, Args)]
pub struct FuzzArgs {
    pub check: CheckName,
    pub measure: String,
    /// Defaults to 200, or 25 for optimizer measures.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub rounds: usize,
    #[arg(long, default_value_t = 3)]
    pub k_mix: usize,
    /// Local dimension of fuzzed inputs.
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Random base states for subadditivity, besides the fixed ones.
    #[arg(long, default_value_t = 3)]
    pub bases: usize,
}

#[derive(Debug, Args)]
pub struct Thm2Args {
    pub measure: String,
    #[arg(long, default_value_t = 64)]
    pub d_max: usize,
    /// `1-1/d`, `1/d` or a constant fidelity.
    #[arg(long, default_value = "1-1/d")]
    pub f_rule: String,
    /// Weak-monotonicity trials; defaults as for `fuzz`.
    #[arg(long)]
    pub trials: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SandwichArgs {
    /// Two-qubit state file; without it the isotropic grid is swept.
    pub state: Option<PathBuf>,
    #[arg(long, conflicts_with = "state")]
    pub grid: bool,
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub text: String,
    pub passed: bool,
    /// Lines for stderr.
    pub summary: Vec<String>,
}

impl Output {
    fn ok(text: String) -> Self {
        Self { text, passed: true, summary: Vec::new() }
    }
}

fn parse_measure(name: &str) -> Result<Measure> {
    Measure::from_name(name.trim()).map_err(|_| {
        let names: Vec<_> = Measure::ALL.iter().map(|m| m.name()).collect();
        anyhow::anyhow!("unknown measure {name:?}; expected one of {}", names.join(", "))
    })
}

fn default_trials(m: Measure) -> usize {
    if m.is_optimizer() || m == Measure::RelEntIsotropic {
        25
    } else {
        200
    }
}

pub fn cmd_gen(args: &GenArgs, cfg: &RunConfig) -> Result<StateFile> {
    let need = |v: Option<usize>, what: &str| v.with_context(|| format!("{what} is required for this family"));
    let dims = || -> Result<(usize, usize)> {
        let d = args.d;
        Ok((need(args.da.or(d), "--d or --da")?, need(args.db.or(d), "--d or --db")?))
    };
    let mut params = BTreeMap::new();
    let mut seeded = false;
    let rho: DensityMatrix = match args.family {
        Family::MaxEntangled => {
            let d = need(args.d, "--d")?;
            params.insert("d".into(), d.into());
            maximally_entangled(d)?.density()
        }
        Family::Isotropic => {
            let d = need(args.d, "--d")?;
            let f = args.fidelity.context("--fidelity is required for this family")?;
            params.insert("d".into(), d.into());
            params.insert("fidelity".into(), f.into());
            isotropic(f, d)?
        }
        Family::BellDiagonal => {
            let p = args.probs.as_deref().context("--probs is required for this family")?;
            let probs: [f64; 4] = p.try_into().context("--probs needs four weights")?;
            params.insert("probs".into(), probs.to_vec().into());
            bell_diagonal(&BellDiagonalParams::new(probs)?)
        }
        Family::RandomPure => {
            let (da, db) = dims()?;
            seeded = true;
            random_pure(da, db, cfg.seed)?.density()
        }
        Family::RandomDensity => {
            let (da, db) = dims()?;
            let rank = args.rank.unwrap_or(da * db);
            params.insert("rank".into(), rank.into());
            seeded = true;
            random_density(da, db, rank, cfg.seed)?
        }
        Family::RandomSeparable => {
            let (da, db) = dims()?;
            let k = args.k.unwrap_or(4);
            params.insert("k".into(), k.into());
            seeded = true;
            random_separable(da, db, k, cfg.seed)?
        }
        Family::Tiles => tiles_bound_entangled(),
    };
    if seeded {
        params.insert("da".into(), rho.dim_a().into());
        params.insert("db".into(), rho.dim_b().into());
    }
    let name = Family::value_variants()
        .iter()
        .find(|f| **f == args.family)
        .and_then(|f| f.to_possible_value())
        .map(|v| v.get_name().to_string());
    let metadata = Metadata {
        name,
        generator: Some(format!("ebits {}", env!("CARGO_PKG_VERSION"))),
        seed: seeded.then_some(cfg.seed),
        params,
    };
    Ok(StateFile::from_density(&rho, Some(metadata)))
}

pub fn cmd_measure(args: &MeasureArgs, cfg: &RunConfig, timing: bool) -> Result<Output> {
    let rho = StateFile::read(&args.state)?.to_density()?;
    let all = args.measures.trim() == "all";
    let measures: Vec<Measure> =
        if all { Measure::ALL.to_vec() } else { args.measures.split(',').map(parse_measure).collect::<Result<_>>()? };
    let eval = cfg.eval();
    let mut csv = Csv::new(cfg, &["measure", "value", "kind", "gap", "iterations", "seconds", "status"])?;
    for m in measures {
        let start = Instant::now();
        let result = m.evaluate(&rho, &eval);
        let seconds = if timing { num(start.elapsed().as_secs_f64()) } else { String::new() };
        match result {
            Ok(r) => csv.row([
                m.name().to_string(),
                num(r.value),
                r.kind.as_str().to_string(),
                num(r.gap),
                r.iterations.to_string(),
                seconds,
                "ok".to_string(),
            ])?,
            Err(Error::NotApplicable { reason, .. }) if all => csv.row([
                m.name().to_string(),
                String::new(),
                m.kind().as_str().to_string(),
                String::new(),
                String::new(),
                seconds,
                format!("not_applicable: {reason}"),
            ])?,
            Err(e) => return Err(e).with_context(|| format!("evaluating {m}")),
        }
    }
    Ok(Output::ok(csv.finish()?))
}

fn check_csv(cfg: &RunConfig, reports: &[CheckReport]) -> Result<Csv> {
    let mut csv = Csv::new(cfg, &["check", "measure", "trial", "seed", "input", "lhs", "rhs", "excess", "violation"])?;
    for rep in reports {
        for r in &rep.rows {
            let violation = r.excess.is_nan() || r.excess > rep.tolerance;
            csv.row([
                rep.check.clone(),
                rep.measure.clone(),
                r.trial.to_string(),
                r.seed.to_string(),
                r.input.clone(),
                num(r.lhs),
                num(r.rhs),
                num(r.excess),
                violation.to_string(),
            ])?;
        }
    }
    Ok(csv)
}

fn summarize(rep: &CheckReport) -> Vec<String> {
    let mut out = vec![format!(
        "{} {}: {} trials={} violations={} max_excess={} tolerance={}",
        rep.check,
        rep.measure,
        if rep.passed { "pass" } else { "FAIL" },
        rep.trials,
        rep.violations.len(),
        num(rep.max_excess),
        num(rep.tolerance)
    )];
    if rep.attempts.len() > 1 {
        for a in &rep.attempts {
            out.push(format!(
                "{} attempt budget x{}: violations={} max_excess={}",
                rep.check,
                a.budget_factor,
                a.violations,
                num(a.max_excess)
            ));
        }
    }
    if let Some(note) = &rep.note {
        out.push(format!("{} note: {note}", rep.check));
    }
    out
}

pub fn cmd_fuzz(args: &FuzzArgs, cfg: &RunConfig) -> Result<Output> {
    let m = parse_measure(&args.measure)?;
    let mut opts = cfg.check_options(args.trials.unwrap_or_else(|| default_trials(m)));
    opts.rounds = args.rounds;
    opts.k_mix = args.k_mix;
    opts.dims = (args.d, args.d);
    let rep = match args.check {
        CheckName::Normalization => check_normalization(m, &opts),
        CheckName::Separable => check_separable_vanishing(m, &opts),
        CheckName::Monotonicity => fuzz_monotonicity(m, &opts),
        CheckName::Convexity => fuzz_convexity(m, &opts),
        CheckName::WeakMonotonicity => check_weak_monotonicity(m, &opts),
        CheckName::Subadditivity => {
            let bases = subadditivity_bases(m, args.bases, cfg.seed)?;
            check_partial_subadditivity(m, &bases, &opts)
        }
    }?;
    let mut csv = check_csv(cfg, std::slice::from_ref(&rep))?;
    let summary = summarize(&rep);
    for line in &summary {
        csv.comment(line);
    }
    Ok(Output { text: csv.finish()?, passed: rep.passed, summary })
}

pub fn cmd_thm2(args: &Thm2Args, cfg: &RunConfig) -> Result<Output> {
    let m = parse_measure(&args.measure)?;
    let rule: FidelityRule = args.f_rule.parse()?;
    let opts = cfg.check_options(args.trials.unwrap_or_else(|| default_trials(m)));
    let rep = theorem2_battery(m, args.d_max, rule, &opts)?;
    let mut csv = Csv::new(cfg, &["d", "fidelity", "value", "ratio"])?;
    for r in &rep.scaling {
        csv.row([r.d.to_string(), num(r.fidelity), num(r.value), num(r.ratio)])?;
    }
    let verdict = |ok: bool| if ok { "pass" } else { "FAIL" };
    let mut summary = vec![
        format!("condition a (weak monotonicity): {}", verdict(rep.weak_monotonicity.passed)),
        format!("condition b (subadditivity): {}", verdict(rep.subadditivity.passed)),
        format!(
            "condition c (scaling, F_d={rule}): {} final_ratio={}",
            verdict(rep.scaling_passed),
            num(rep.scaling.last().map(|r| r.ratio).unwrap_or(f64::NAN))
        ),
    ];
    summary.extend(summarize(&rep.weak_monotonicity));
    summary.extend(summarize(&rep.subadditivity));
    for line in &summary {
        csv.comment(line);
    }
    Ok(Output { text: csv.finish()?, passed: rep.passed(), summary })
}

pub fn cmd_sandwich(args: &SandwichArgs, cfg: &RunConfig) -> Result<Output> {
    let rows = match &args.state {
        Some(path) => {
            let rho = StateFile::read(path)?.to_density()?;
            vec![sandwich_report(&rho, &cfg.eval(), &cfg.tolerances)?]
        }
        None => sandwich_grid(&cfg.tolerances)?,
    };
    let mut csv = Csv::new(cfg, &["fidelity", "lower", "middle", "upper", "middle_kind", "ordered"])?;
    for r in &rows {
        csv.row([
            num(r.fidelity),
            num(r.lower),
            num(r.middle),
            num(r.upper),
            r.middle_kind.as_str().to_string(),
            r.ordered.to_string(),
        ])?;
    }
    let bad = rows.iter().filter(|r| !r.ordered).count();
    let summary = vec![format!("sandwich: {} rows, {bad} out of order", rows.len())];
    Ok(Output { text: csv.finish()?, passed: bad == 0, summary })
}

pub fn execute(cli: &Cli) -> Result<Output> {
    let cfg = cli.run.config();
    match &cli.command {
        Command::Gen(args) => Ok(Output::ok(cmd_gen(args, &cfg)?.to_json())),
        Command::Measure(args) => cmd_measure(args, &cfg, cli.run.timing),
        Command::Fuzz(args) => cmd_fuzz(args, &cfg),
        Command::Thm2(args) => cmd_thm2(args, &cfg),
        Command::Sandwich(args) => cmd_sandwich(args, &cfg),
    }
}

fn emit(cfg: &RunConfig, out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => {
            let path = cfg.resolve(p);
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

/// Parses `args`, runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = execute(&cli).and_then(|out| {
        emit(&cli.run.config(), cli.run.out.as_deref(), &out.text)?;
        Ok(out)
    });
    match result {
        Ok(out) => {
            for line in &out.summary {
                eprintln!("{line}");
            }
            if out.passed {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_USAGE
        }
    }
}
