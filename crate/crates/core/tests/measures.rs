use ebits::measures::{
    concurrence, entropy_of_entanglement, eof_two_qubit_closed, eof_variational, er_isotropic_closed,
    hashing_lower_bound, rel_ent_entanglement, rel_ent_entanglement_traced, EofOptions, EvalConfig, FwOptions, Measure,
};
use ebits::states::{bell_diagonal, isotropic, random_density, random_pure, BellDiagonalParams};

fn h(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
    }
}

#[test]
fn pure_states_agree_across_measures() {
    let cfg = EvalConfig::default();
    for seed in 0..8 {
        let psi = random_pure(2, 2, seed).unwrap();
        let rho = psi.density();
        let e = entropy_of_entanglement(&psi).value;
        let f = eof_two_qubit_closed(&rho).unwrap().value;
        assert!((f - e).abs() <= 1e-9, "seed {seed}: {f} vs {e}");
        let r = Measure::RelEnt.evaluate(&rho, &cfg).unwrap().value;
        assert!((r - e).abs() <= 5e-3, "seed {seed}: {r} vs {e}");
    }
}

#[test]
fn sandwich_chain_on_isotropic_grid() {
    for k in 0..=9 {
        let f = 0.55 + 0.05 * k as f64;
        let rho = isotropic(f, 2).unwrap();
        let lower = hashing_lower_bound(&rho).unwrap().value;
        let mid = er_isotropic_closed(f, 2).unwrap().value;
        let upper = eof_two_qubit_closed(&rho).unwrap().value;
        assert!(lower <= mid + 1e-9 && mid <= upper + 1e-9, "F={f}: {lower} {mid} {upper}");
    }
}

#[test]
fn frank_wolfe_never_undershoots_closed_form() {
    for (f, d) in [(0.6, 2), (0.9, 2), (0.75, 3)] {
        let rho = isotropic(f, d).unwrap();
        let (r, cert, trace) = rel_ent_entanglement_traced(&rho, None, &FwOptions::default()).unwrap();
        let exact = er_isotropic_closed(f, d).unwrap().value;
        assert!(r.value >= exact - 1e-9, "F={f} d={d}: {} < {exact}", r.value);
        assert!(r.value <= exact + 5e-3, "F={f} d={d}: {} vs {exact}", r.value);
        assert!(trace.objective.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        assert!((cert.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn variational_formation_never_below_closed_form() {
    let opts = EofOptions { restarts: 4, ..EofOptions::default() };
    for seed in 0..4 {
        let rho = random_density(2, 2, 1 + (seed as usize % 4), seed).unwrap();
        let (v, dec) = eof_variational(&rho, &opts).unwrap();
        let exact = eof_two_qubit_closed(&rho).unwrap().value;
        assert!(v.value >= exact - 1e-9, "seed {seed}");
        assert!(v.value <= exact + 5e-3, "seed {seed}: {} vs {exact}", v.value);
        assert!(dec.assemble().max_abs_diff(rho.matrix()) < 1e-9);
    }
}

#[test]
fn bell_diagonal_reference_values() {
    let rho = bell_diagonal(&BellDiagonalParams::new([0.9, 0.1, 0.0, 0.0]).unwrap());
    assert!((hashing_lower_bound(&rho).unwrap().value - (1.0 - h(0.9))).abs() < 1e-12);
    assert!((concurrence(&rho).unwrap() - 0.8).abs() < 1e-9);
    let (r, _) = rel_ent_entanglement(&rho, &FwOptions::default()).unwrap();
    // Rank-two Bell-diagonal states reach the hashing rate.
    assert!((r.value - (1.0 - h(0.9))).abs() < 5e-3, "{}", r.value);
}
