//! Algebraic invariants of the tensor, spectral and balance kernels.

mod common;

use common::*;
use hyperlap::balance::{detect_balance, gauge_transform, BalanceCertificate, FactionVector};
use hyperlap::spectral::{perron_metzler, perron_metzler_shifted, spectral_radius_nonnegative, PowerIterationConfig};
use hyperlap::tensor::eigen_residual;
use hyperlap::{CubicalTensor, Hypergraph, LaplacianSpec};
use proptest::prelude::*;

fn cfg() -> PowerIterationConfig {
    PowerIterationConfig::default()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn apply_is_homogeneous(seed in any::<u64>(), k in 2usize..5, n in 1usize..6, c in -3.0f64..3.0) {
        let mut r = rng(seed);
        let t = random_tensor(&mut r, k, n, 0.5, -1.0, 1.0);
        let x: Vec<f64> = (0..n).map(|i| 0.3 + 0.2 * i as f64).collect();
        let cx: Vec<f64> = x.iter().map(|v| c * v).collect();
        let lhs = t.apply(&cx).unwrap();
        let rhs: Vec<f64> = t.apply(&x).unwrap().iter().map(|v| c.powi(k as i32 - 1) * v).collect();
        let scale = 1.0 + inf_norm(&rhs);
        prop_assert!(max_abs_diff(&lhs, &rhs) <= 1e-12 * scale);
    }

    #[test]
    fn sparse_apply_matches_dense_and_naive(seed in any::<u64>(), k in 2usize..5, n in 1usize..6) {
        let mut r = rng(seed);
        let t = random_tensor(&mut r, k, n, 0.4, -2.0, 2.0);
        let x: Vec<f64> = (0..n).map(|i| 1.0 - 0.37 * i as f64).collect();
        let sparse = t.apply(&x).unwrap();
        let dense = t.to_dense().unwrap();
        prop_assert_eq!(dense.to_sparse(), t.clone());
        let scale = 1.0 + inf_norm(&sparse);
        prop_assert!(max_abs_diff(&sparse, &dense.apply(&x).unwrap()) <= 1e-12 * scale);
        prop_assert!(max_abs_diff(&sparse, &naive_apply(&t, &x)) <= 1e-12 * scale);
    }

    #[test]
    fn gauge_is_an_involution(seed in any::<u64>(), k in 2usize..5, n in 1usize..7) {
        let mut r = rng(seed);
        let t = random_tensor(&mut r, k, n, 0.5, -1.0, 1.0);
        let sigma = FactionVector::new(random_sigma(&mut r, n)).unwrap();
        let once = gauge_transform(&t, &sigma).unwrap();
        prop_assert_eq!(gauge_transform(&once, &sigma).unwrap(), t);
    }

    #[test]
    fn even_order_gauge_equals_sign_similarity(seed in any::<u64>(), half in 1usize..3, n in 1usize..6) {
        let k = 2 * half;
        let mut r = rng(seed);
        let t = random_tensor(&mut r, k, n, 0.5, -1.0, 1.0);
        let sigma = FactionVector::new(random_sigma(&mut r, n)).unwrap();
        prop_assert_eq!(gauge_transform(&t, &sigma).unwrap(), t.diagonal_similarity(&sigma.to_f64()).unwrap());
    }

    #[test]
    fn perron_value_is_shift_invariant(seed in any::<u64>(), k in 2usize..5, n in 2usize..5, extra in 0.0f64..10.0, c in -5.0f64..5.0) {
        let mut r = rng(seed);
        let g = strongly_connected_signless(&mut r, k, n);
        let a = g.adjacency(k, LaplacianSpec::DirectedWeighted).unwrap()
            .shift_diagonal(-3.0);
        let base = perron_metzler(&a, &cfg()).unwrap();
        let extra_shift = perron_metzler_shifted(&a, extra, &cfg()).unwrap();
        prop_assert!((base.pair.lambda - extra_shift.pair.lambda).abs() < 1e-8);
        let moved = perron_metzler(&a.shift_diagonal(c), &cfg()).unwrap();
        prop_assert!((moved.pair.lambda - base.pair.lambda - c).abs() < 1e-8);
        prop_assert!(base.pair.residual < 1e-10 * (1.0 + base.pair.lambda.abs()));
    }

    #[test]
    fn collatz_wielandt_bounds_tighten(seed in any::<u64>(), k in 2usize..5, n in 2usize..6) {
        let mut r = rng(seed);
        let b = strongly_connected_signless(&mut r, k, n)
            .adjacency(k, LaplacianSpec::DirectedWeighted).unwrap()
            .shift_diagonal(1.0);
        let sol = spectral_radius_nonnegative(&b, &cfg()).unwrap();
        let rho = sol.pair.lambda;
        for w in sol.bounds.windows(2) {
            let slack = 1e-12 * w[0].1;
            prop_assert!(w[1].0 >= w[0].0 - slack, "lower bound decreased: {:?}", w);
            prop_assert!(w[1].1 <= w[0].1 + slack, "upper bound increased: {:?}", w);
        }
        for &(lo, hi) in &sol.bounds {
            prop_assert!(lo <= rho + 1e-12 * rho && rho <= hi + 1e-12 * rho);
        }
    }

    #[test]
    fn spectral_radius_scales_linearly(seed in any::<u64>(), k in 2usize..5, n in 2usize..5, c in 0.1f64..10.0) {
        let mut r = rng(seed);
        let b = strongly_connected_signless(&mut r, k, n)
            .adjacency(k, LaplacianSpec::DirectedWeighted).unwrap();
        let rho = spectral_radius_nonnegative(&b, &cfg()).unwrap().pair.lambda;
        let rho_c = spectral_radius_nonnegative(&b.scale(c), &cfg()).unwrap().pair.lambda;
        prop_assert!((rho_c - c * rho).abs() <= 1e-9 * c * rho);
    }

    #[test]
    fn eigenpairs_transfer_under_diagonal_similarity(seed in any::<u64>(), k in 2usize..5, n in 2usize..5) {
        let mut r = rng(seed);
        let a = strongly_connected_signless(&mut r, k, n)
            .laplacian(k, LaplacianSpec::DirectedWeighted).unwrap()
            .scale(-1.0);
        let sol = perron_metzler(&a, &cfg()).unwrap();
        let d: Vec<f64> = (0..n).map(|i| 0.5 + 0.25 * ((seed >> i) & 3) as f64).collect();
        let b = a.diagonal_similarity(&d).unwrap();
        let y: Vec<f64> = sol.pair.x.iter().zip(&d).map(|(x, di)| x / di).collect();
        prop_assert!(eigen_residual(&b, sol.pair.lambda, &y).unwrap() < 1e-10);
        let back = perron_metzler(&b, &cfg()).unwrap();
        prop_assert!((back.pair.lambda - sol.pair.lambda).abs() < 1e-8);
    }

    #[test]
    fn signless_laplacian_annihilates_ones(seed in any::<u64>(), k in 2usize..5, n in 2usize..7) {
        let mut r = rng(seed);
        let l = strongly_connected_signless(&mut r, k, n).laplacian(k, LaplacianSpec::DirectedWeighted).unwrap();
        prop_assert!(inf_norm(&l.apply(&vec![1.0; n]).unwrap()) < 1e-10);
    }

    #[test]
    fn planted_factions_are_recovered(seed in any::<u64>(), n in 2usize..9, m in 1usize..9, k in 2usize..5) {
        let mut r = rng(seed);
        let sigma = random_sigma(&mut r, n);
        let h = signed_hypergraph(&mut r, n, m, &[k], Some(&sigma));
        match detect_balance(&h).unwrap() {
            BalanceCertificate::Balanced(b) => prop_assert!(satisfies_products(&h, b.sigma.as_slice())),
            BalanceCertificate::Unbalanced(c) => prop_assert!(false, "planted instance reported unbalanced: {:?}", c),
        }
    }

    #[test]
    fn tensor_json_round_trips(seed in any::<u64>(), k in 2usize..5, n in 1usize..5) {
        let mut r = rng(seed);
        let t = random_tensor(&mut r, k, n, 0.5, -1e3, 1e3);
        prop_assert_eq!(CubicalTensor::from_json_str(&t.to_json_string()).unwrap(), t);
    }

    #[test]
    fn hypergraph_json_round_trips(seed in any::<u64>(), n in 2usize..8, m in 1usize..8) {
        let mut r = rng(seed);
        let h = signed_hypergraph(&mut r, n, m, &[2, 3, 4], None);
        prop_assert_eq!(Hypergraph::from_json_str(&h.to_json_string()).unwrap(), h);
    }
}
