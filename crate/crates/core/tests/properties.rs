use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::Rng;

use reff_core::ansatz::{givens, rz, rzz, sym, Model};
use reff_core::bounds::{bound_nested_exact, bound_product_global, termination_threshold};
use reff_core::cost::{average_fidelity, cost_hst, expected_entangled_global, expected_product_global};
use reff_core::eval::{fidelity_from_weights, pauli_decompose, pauli_reconstruct, random_density};
use reff_core::qsim::{haar_random_state, haar_random_unitary, GateMatrix};
use reff_core::{DenseOperator, RngSeed, VffAnsatz};

fn gate_op(g: &GateMatrix) -> DenseOperator {
    let n = g.dim().trailing_zeros() as usize;
    DenseOperator::from_row_major(n, &g.to_dense()).unwrap()
}

fn angle() -> impl Strategy<Value = f64> {
    -10.0f64..10.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gates_are_unitary(a in angle(), b in angle(), c in angle(), d in angle()) {
        for g in [rz(a), rzz(a), givens(a), sym(a, b, c, d)] {
            prop_assert!(gate_op(&g).unitarity_error() < 1e-12);
        }
    }

    #[test]
    fn diagonal_part_composes_in_time(seed in any::<u64>(), t1 in 0.0f64..3.0, t2 in 0.0f64..3.0) {
        let mut rng = RngSeed(seed).rng();
        let a = VffAnsatz::build(3, Model::Heisenberg, 0.1, Some(2)).unwrap();
        let theta: Vec<f64> = (0..a.n_theta()).map(|_| rng.random_range(-3.0..3.0)).collect();
        let gamma: Vec<f64> = (0..a.n_gamma()).map(|_| rng.random_range(-3.0..3.0)).collect();
        let v1 = a.unitary(&theta, &gamma, t1).unwrap();
        let v2 = a.unitary(&theta, &gamma, t2).unwrap();
        let v12 = a.unitary(&theta, &gamma, t1 + t2).unwrap();
        prop_assert!(v1.mul(&v2).unwrap().sub(&v12).unwrap().frobenius_norm() < 1e-11);
    }

    #[test]
    fn costs_are_ordered_and_in_range(seed in any::<u64>(), n in 1usize..4) {
        let mut rng = RngSeed(seed).rng();
        let u = haar_random_unitary(n, &mut rng).unwrap();
        let v = haar_random_unitary(n, &mut rng).unwrap();
        let d = f64::from(1u32 << n);
        let (ch, ce, cp) = (cost_hst(&u, &v).unwrap(), expected_entangled_global(&u, &v).unwrap(), expected_product_global(&u, &v).unwrap());
        prop_assert!((0.0..=1.0).contains(&ch));
        let k = (d + 1.0) / d;
        prop_assert!(cp <= k * ce + 1e-12);
        prop_assert!(k * ce <= 2.0 * cp + 1e-12);
        assert_abs_diff_eq!(average_fidelity(&u, &v).unwrap(), 1.0 - d / (d + 1.0) * ch, epsilon = 1e-12);
    }

    #[test]
    fn pauli_weights_round_trip(seed in any::<u64>(), n in 1usize..4, rank in 1usize..4) {
        let mut rng = RngSeed(seed).rng();
        let rho = random_density(n, rank, &mut rng).unwrap();
        let w = pauli_decompose(&rho).unwrap();
        prop_assert!(pauli_reconstruct(&w).unwrap().sub(&rho).unwrap().frobenius_norm() < 1e-12);
        let psi = haar_random_state(n, &mut rng).unwrap();
        let f = fidelity_from_weights(&w, &psi).unwrap();
        let direct = psi.inner(&rho.apply(&psi).unwrap()).re;
        prop_assert!((f - direct).abs() < 1e-12);
    }

    #[test]
    fn nested_bound_is_monotone(n in 1usize..8, m in 1u64..200, c1 in 0.0f64..1e-3, c2 in 0.0f64..1e-3, eps in 0.0f64..1e-2) {
        let (lo, hi) = if c1 <= c2 { (c1, c2) } else { (c2, c1) };
        let b_lo = bound_nested_exact(n, m, eps, lo).unwrap().lower_bound;
        let b_hi = bound_nested_exact(n, m, eps, hi).unwrap().lower_bound;
        prop_assert!(b_hi <= b_lo + 1e-15);
        prop_assert!(bound_nested_exact(n, m + 1, eps, lo).unwrap().lower_bound <= b_lo + 1e-15);
        prop_assert!((0.0..=1.0).contains(&b_lo));
    }

    #[test]
    fn product_bound_weakens_with_cost(n in 1usize..10, m in 1u64..100, c in 0.0f64..1e-4, eps in 0.0f64..1e-3) {
        let a = bound_product_global(n, m, eps, c, None).unwrap();
        let b = bound_product_global(n, m, eps, 2.0 * c + 1e-9, None).unwrap();
        prop_assert!(b.raw <= a.raw);
        prop_assert!(a.lower_bound >= 0.0 && a.lower_bound <= 1.0);
    }

    #[test]
    fn termination_threshold_shrinks_with_trotter_error(n in 1usize..10, m0 in 1.0f64..100.0, e1 in 0.0f64..1.0, e2 in 0.0f64..1.0) {
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let a = termination_threshold(0.01, m0, lo, n);
        let b = termination_threshold(0.01, m0, hi, n);
        prop_assert!(b.value <= a.value);
        prop_assert_eq!(a.certifiable, a.value > 0.0);
    }
}
