use approx::assert_abs_diff_eq;
use ebits::qmat::{
    hermitian_eig, partial_trace, partial_transpose, relative_entropy, tensor_product, trace_distance, vn_entropy,
    ComplexMatrix,
};
use ebits::rng::SplitMix64;
use ebits::states::{haar_unitary, isotropic, random_density, random_pure, random_separable};
use ebits::{DensityMatrix, Error, Party};
use num_complex::Complex64;
use proptest::prelude::*;

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (2usize..=3, 2usize..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_density_is_valid((da, db) in dims(), rank in 1usize..=9, seed in any::<u64>()) {
        let rank = rank.min(da * db);
        let rho = random_density(da, db, rank, seed).unwrap();
        prop_assert!((rho.trace() - 1.0).abs() < 1e-12);
        prop_assert!(rho.eigenvalues().iter().all(|&l| l > -1e-12));
        let numeric_rank = rho.eigenvalues().iter().filter(|&&l| l > 1e-10).count();
        prop_assert_eq!(numeric_rank, rank);
    }

    #[test]
    fn validation_rejects_perturbations(seed in any::<u64>(), i in 0usize..4, j in 0usize..4, eps in 1e-6f64..1e-2) {
        let rho = random_density(2, 2, 4, seed).unwrap();
        let mut data: Vec<Complex64> = (0..16).map(|k| rho.matrix()[(k / 4, k % 4)]).collect();
        data[i * 4 + j] += Complex64::new(0.0, eps);
        let m = ComplexMatrix::from_vec(4, 4, data).unwrap();
        // An imaginary bump on the diagonal breaks Hermiticity; off it, the
        // matrix is no longer equal to its adjoint either.
        prop_assert!(matches!(DensityMatrix::new(2, 2, m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn relative_entropy_non_negative(seed in any::<u64>(), rank in 1usize..=4) {
        let rho = random_density(2, 2, rank, seed).unwrap();
        let sigma = random_density(2, 2, 4, seed ^ 0xABCD).unwrap();
        let s = relative_entropy(&rho, &sigma).unwrap();
        prop_assert!(s >= -1e-12);
        prop_assert!(relative_entropy(&rho, &rho).unwrap().abs() < 1e-9);
    }

    #[test]
    fn entropy_is_unitarily_invariant(seed in any::<u64>()) {
        let rho = random_density(2, 3, 3, seed).unwrap();
        let u = haar_unitary(6, &mut SplitMix64::new(seed.wrapping_add(1)));
        let rotated = DensityMatrix::new(2, 3, rho.matrix().conjugate_by(&u)).unwrap();
        prop_assert!((vn_entropy(&rho) - vn_entropy(&rotated)).abs() < 1e-9);
    }

    #[test]
    fn partial_trace_of_product((da, db) in dims(), seed in any::<u64>()) {
        let a = random_density(da, 1, da, seed).unwrap();
        let b = random_density(db, 1, db, seed ^ 7).unwrap();
        let ab = DensityMatrix::new(da, db, a.matrix().kron(b.matrix())).unwrap();
        prop_assert!(partial_trace(&ab, Party::B).matrix().max_abs_diff(a.matrix()) < 1e-12);
        prop_assert!(partial_trace(&ab, Party::A).matrix().max_abs_diff(b.matrix()) < 1e-12);
    }

    #[test]
    fn pure_state_marginals_share_spectrum((da, db) in dims(), seed in any::<u64>()) {
        let psi = random_pure(da, db, seed).unwrap();
        let mut la = psi.reduced(Party::A).eigenvalues().to_vec();
        let mut lb = psi.reduced(Party::B).eigenvalues().to_vec();
        la.retain(|&x| x > 1e-12);
        lb.retain(|&x| x > 1e-12);
        prop_assert_eq!(la.len(), lb.len());
        for (x, y) in la.iter().zip(&lb) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn separable_states_are_ppt((da, db) in dims(), k in 1usize..6, seed in any::<u64>()) {
        let sigma = random_separable(da, db, k, seed).unwrap();
        let pt = partial_transpose(&sigma, Party::B);
        let min = hermitian_eig(&pt).unwrap().min();
        prop_assert!(min > -1e-12, "min eigenvalue {}", min);
    }

    #[test]
    fn tensor_product_entropy_adds(s1 in any::<u64>(), s2 in any::<u64>()) {
        let r1 = random_density(2, 2, 3, s1).unwrap();
        let r2 = random_density(2, 2, 2, s2).unwrap();
        let both = tensor_product(&r1, &r2);
        prop_assert_eq!(both.dims(), (4, 4));
        prop_assert!((vn_entropy(&both) - vn_entropy(&r1) - vn_entropy(&r2)).abs() < 1e-9);
    }

    #[test]
    fn isotropic_pt_sign_flips_at_inverse_d(d in 2usize..=4, f in 0.0f64..1.0) {
        let rho = isotropic(f, d).unwrap();
        let min = hermitian_eig(&partial_transpose(&rho, Party::B)).unwrap().min();
        let boundary = 1.0 / d as f64;
        if f < boundary - 1e-9 {
            prop_assert!(min > 0.0);
        } else if f > boundary + 1e-9 {
            prop_assert!(min < 0.0);
        }
    }
}

#[test]
fn trace_distance_triangle() {
    let a = random_density(2, 2, 4, 1).unwrap();
    let b = random_density(2, 2, 4, 2).unwrap();
    let c = random_density(2, 2, 4, 3).unwrap();
    let ab = trace_distance(&a, &b).unwrap();
    let bc = trace_distance(&b, &c).unwrap();
    let ac = trace_distance(&a, &c).unwrap();
    assert!(ac <= ab + bc + 1e-12);
    assert_abs_diff_eq!(trace_distance(&a, &a).unwrap(), 0.0, epsilon = 1e-12);
}
