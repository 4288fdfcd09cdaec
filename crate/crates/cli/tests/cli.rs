use std::path::Path;
use std::process::Command;

use ebits_cli::state_file::StateFile;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn ebits(dir: &Path, args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_ebits"))
        .args(args)
        .env("EBITS_OUT_DIR", dir)
        .current_dir(dir)
        .output()
        .expect("running ebits");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

/// Values of the `measure` CSV keyed by measure name; empty cells are skipped.
fn measure_values(stdout: &str) -> Vec<(String, f64)> {
    stdout
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("measure,"))
        .filter_map(|l| {
            let mut cols = l.split(',');
            let name = cols.next()?.to_string();
            let value = cols.next()?.parse().ok()?;
            Some((name, value))
        })
        .collect()
}

fn value(rows: &[(String, f64)], name: &str) -> f64 {
    rows.iter().find(|(n, _)| n == name).unwrap_or_else(|| panic!("no {name} in {rows:?}")).1
}

#[test]
fn gen_writes_a_state_that_reads_back() {
    let dir = tempfile::tempdir().unwrap();
    let run = ebits(dir.path(), &["gen", "isotropic", "--d", "2", "--fidelity", "0.75", "--out", "iso.json"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let file = StateFile::read(&dir.path().join("iso.json")).unwrap();
    assert_eq!(file.dims, [2, 2]);
    assert_eq!(file.metadata.as_ref().and_then(|m| m.name.as_deref()), Some("isotropic"));
    let rho = file.to_density().unwrap();
    let f = ebits::qmat::entangled_fidelity(&rho).unwrap();
    assert!((f - 0.75).abs() < 1e-12, "{f}");
}

#[test]
fn gen_to_stdout_is_valid_json() {
    let dir = tempfile::tempdir().unwrap();
    let run = ebits(dir.path(), &["gen", "random_density", "--da", "2", "--db", "3", "--rank", "2", "--seed", "4"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let file = StateFile::from_json(&run.stdout).unwrap();
    assert_eq!(file.dims, [2, 3]);
    assert_eq!(file.to_density().unwrap().dim(), 6);
}

#[test]
fn measures_on_reference_states() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(ebits(p, &["gen", "max_entangled", "--d", "2", "--out", "bell.json"]).code, 0);
    let run = ebits(p, &["measure", "bell.json"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let rows = measure_values(&run.stdout);
    for name in ["e_entropy", "e_f_2q", "e_f_var", "e_r", "e_r_iso", "log_neg", "hashing"] {
        assert!((value(&rows, name) - 1.0).abs() < 5e-3, "{name}: {rows:?}");
    }

    assert_eq!(ebits(p, &["gen", "isotropic", "--d", "2", "--fidelity", "0.25", "--out", "mixed.json"]).code, 0);
    let rows = measure_values(&ebits(p, &["measure", "mixed.json"]).stdout);
    for name in ["e_f_2q", "e_f_var", "e_r", "e_r_iso", "log_neg", "hashing"] {
        assert!(value(&rows, name).abs() < 1e-3, "{name}: {rows:?}");
    }
    assert!(rows.iter().all(|(n, _)| n != "e_entropy"), "entropy is not defined on mixed states");
}

#[test]
fn frank_wolfe_matches_isotropic_closed_form_on_qutrits() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(ebits(p, &["gen", "isotropic", "--d", "3", "--fidelity", "0.9", "--out", "s.json"]).code, 0);
    let run = ebits(p, &["measure", "s.json", "--measures", "e_r,e_r_iso,log_neg"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let rows = measure_values(&run.stdout);
    assert_eq!(rows.len(), 3);
    let (fw, exact) = (value(&rows, "e_r"), value(&rows, "e_r_iso"));
    assert!(fw >= exact - 1e-9 && fw - exact < 5e-3, "{fw} vs {exact}");
}

#[test]
fn bell_diagonal_probs_accept_commas() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let run = ebits(p, &["gen", "bell_diagonal", "--probs", "0.9,0.1,0,0", "--out", "bd.json"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let rows = measure_values(&ebits(p, &["measure", "bd.json", "--measures", "hashing"]).stdout);
    let h = -(0.9f64 * 0.9f64.log2() + 0.1 * 0.1f64.log2());
    assert!((value(&rows, "hashing") - (1.0 - h)).abs() < 1e-12);
}

#[test]
fn fuzz_reports_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let run = ebits(p, &["fuzz", "monotonicity", "log_neg", "--trials", "20", "--seed", "3"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let data: Vec<&str> = run.stdout.lines().filter(|l| l.starts_with("monotonicity,log_neg,")).collect();
    assert_eq!(data.len(), 20);
    assert!(data.iter().all(|l| l.ends_with(",false")));
    assert!(run.stdout.contains("# monotonicity log_neg: pass trials=20 violations=0"));

    assert_eq!(ebits(p, &["fuzz", "nope", "log_neg"]).code, 2);
    assert_eq!(ebits(p, &["fuzz", "monotonicity", "nope"]).code, 2);
}

#[test]
fn thm2_summary_lists_three_conditions() {
    let dir = tempfile::tempdir().unwrap();
    let run = ebits(dir.path(), &["thm2", "log_neg", "--d-max", "4", "--trials", "10"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    for c in ["condition a", "condition b", "condition c"] {
        assert!(run.stdout.lines().any(|l| l.starts_with(&format!("# {c}"))), "{c} missing:\n{}", run.stdout);
    }
}

#[test]
fn sandwich_grid_rows_are_ordered() {
    let dir = tempfile::tempdir().unwrap();
    let run = ebits(dir.path(), &["sandwich", "--grid"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let rows: Vec<&str> = run.stdout.lines().filter(|l| l.starts_with(|c: char| c.is_ascii_digit())).collect();
    assert_eq!(rows.len(), 11);
    assert!(rows.iter().all(|l| l.ends_with(",true")));
}

#[test]
fn out_flag_writes_the_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let run = ebits(p, &["sandwich", "--grid", "--out", "grid.csv"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let text = std::fs::read_to_string(p.join("grid.csv")).unwrap();
    assert!(text.starts_with("# ebits "));
    assert!(text.contains("fidelity,lower,middle,upper,middle_kind,ordered"));
}

#[test]
fn bad_inputs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(p.join("bad.json"), "{}").unwrap();
    let run = ebits(p, &["measure", "bad.json"]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("dims"), "{}", run.stderr);
    assert_eq!(ebits(p, &["measure", "missing.json"]).code, 2);
    assert_eq!(ebits(p, &["gen", "isotropic", "--d", "2"]).code, 2, "fidelity is required");
}
