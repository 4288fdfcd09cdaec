//! Run configuration and CSV emission.
//!
//! Every CSV starts with one `#` comment line echoing the [`RunConfig`], then
//! the column header. Trailing `#` lines carry summaries.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use ebits::axioms::{CheckOptions, CheckTolerances};
use ebits::measures::EvalConfig;
use ebits::Exec;

/// Everything that can change a command's output.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub tolerances: CheckTolerances,
    pub eval: EvalConfig,
    pub out_dir: PathBuf,
    pub exec: Exec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            tolerances: CheckTolerances::default(),
            eval: EvalConfig::default(),
            out_dir: PathBuf::from("."),
            exec: Exec::default(),
        }
    }
}

impl RunConfig {
    /// Optimizer settings with the run seed applied.
    pub fn eval(&self) -> EvalConfig {
        self.eval.with_seed(self.seed).with_exec(self.exec)
    }

    pub fn check_options(&self, trials: usize) -> CheckOptions {
        CheckOptions {
            trials,
            seed: self.seed,
            eval: self.eval(),
            tolerances: self.tolerances,
            exec: self.exec,
            ..CheckOptions::default()
        }
    }

    /// The comment line at the top of every CSV. Execution mode is left out
    /// since it never changes results.
    pub fn header_comment(&self) -> String {
        let t = &self.tolerances;
        let e = &self.eval;
        format!(
            "# ebits {} seed={} tol_exact={} tol_fw={} tol_optimizer={} tol_separable={} eof_budget={} eof_restarts={} \
             fw_max_iters={} fw_gap_tol={} fw_restarts={} out_dir={}\n",
            env!("CARGO_PKG_VERSION"),
            self.seed,
            num(t.exact),
            num(t.fw),
            num(t.optimizer),
            num(t.separable),
            e.eof.budget,
            e.eof.restarts,
            e.fw.max_iters,
            num(e.fw.gap_tol),
            e.fw.restarts,
            self.out_dir.display()
        )
    }

    /// Relative paths land under `out_dir`.
    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.out_dir.join(path)
        }
    }
}

/// A CSV document built in memory.
pub struct Csv {
    head: String,
    writer: csv::Writer<Vec<u8>>,
    tail: String,
}

impl Csv {
    pub fn new(cfg: &RunConfig, columns: &[&str]) -> Result<Self> {
        let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        writer.write_record(columns)?;
        Ok(Self { head: cfg.header_comment(), writer, tail: String::new() })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields)?;
        Ok(())
    }

    pub fn comment(&mut self, line: &str) {
        let _ = writeln!(self.tail, "# {line}");
    }

    pub fn finish(self) -> Result<String> {
        let body = String::from_utf8(self.writer.into_inner().context("flushing csv")?)?;
        Ok(format!("{}{}{}", self.head, body, self.tail))
    }
}

/// `f64` in shortest round-trip form, with an exponent for very small or
/// large magnitudes.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.0, 1e-9, -2.5e-17, 0.1, 1.0, 1e20, 0.35457890266526954] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(1e-9), "1e-9");
    }

    #[test]
    fn header_then_columns() {
        let cfg = RunConfig::default();
        let mut csv = Csv::new(&cfg, &["a", "b"]).unwrap();
        csv.row(["x,y", "1"]).unwrap();
        csv.comment("done");
        let text = csv.finish().unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert!(lines[0].starts_with("# ebits ") && lines[0].contains("seed=0"));
        assert_eq!(lines[1], "a,b");
        assert_eq!(lines[2], "\"x,y\",1");
        assert_eq!(lines[3], "# done");
        assert!(!text.contains('\r'));
    }
}
