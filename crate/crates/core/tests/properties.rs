use proptest::prelude::*;

use l1gram::bounds::{
    gamma_plus_bounds, piplus_dual_upper, piplus_rank1_lower, piplus_witness, rho1_exact, rho1_exact_parallel,
    rho1_multistart, MultistartOptions, Witness,
};
use l1gram::decompose::{eigen_decomposer, greedy_peel, validate, PivotRule};
use l1gram::io::{format_matrix, parse_matrix};
use l1gram::linalg::{min_eigenvalue, norm_l1, project_l1_sphere, symmetric_eigen, GramMatrix};
use l1gram::randcert::{estimate_kappa_for, sample_w};
use l1gram::Rng;

fn symmetric(max_n: usize) -> impl Strategy<Value = GramMatrix> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec(-3.0f64..3.0, n * (n + 1) / 2).prop_map(move |upper| {
            let mut d = vec![0.0; n * n];
            let mut k = 0;
            for i in 0..n {
                for j in i..n {
                    d[i * n + j] = upper[k];
                    d[j * n + i] = upper[k];
                    k += 1;
                }
            }
            GramMatrix::from_row_major(n, d).unwrap()
        })
    })
}

/// `G G^T` for a random `n x p` factor.
fn psd(max_n: usize) -> impl Strategy<Value = GramMatrix> {
    (1..=max_n, 1..=max_n).prop_flat_map(|(n, p)| {
        prop::collection::vec(-2.0f64..2.0, n * p).prop_map(move |g| {
            let vectors: Vec<Vec<f64>> = (0..p).map(|c| (0..n).map(|r| g[r * p + c]).collect()).collect();
            l1gram::linalg::sum_of_outer_products(n, &vectors)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigen_reconstructs(a in symmetric(8)) {
        let es = symmetric_eigen(&a, 1e-12).unwrap();
        let err = es.reconstruct().max_abs_diff(&a);
        prop_assert!(err <= 1e-9 * (1.0 + a.frobenius_norm()), "err {}", err);
        for (i, u) in es.eigenvectors.iter().enumerate() {
            for (j, v) in es.eigenvectors.iter().enumerate() {
                let d: f64 = u.iter().zip(v).map(|(x, y)| x * y).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                prop_assert!((d - target).abs() < 1e-9, "gram entry {} {}", i, j);
            }
        }
        prop_assert!(es.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn projection_lands_on_sphere(x in prop::collection::vec(-5.0f64..5.0, 1..12)) {
        prop_assume!(norm_l1(&x) > 1e-9);
        let y = project_l1_sphere(&x).unwrap();
        prop_assert!((norm_l1(&y) - 1.0).abs() < 1e-12);
        for (a, b) in x.iter().zip(&y) {
            prop_assert!(*b == 0.0 || a.signum() == b.signum());
        }
        let z = project_l1_sphere(&y).unwrap();
        for (a, b) in y.iter().zip(&z) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn peel_respects_cost_bound(a in psd(10), rule_idx in 0usize..3) {
        let rule = PivotRule::standard_rules()[rule_idx].clone();
        let n = a.n();
        let run = greedy_peel(&a, &rule, n).unwrap();
        let bound = n as f64 * a.trace();
        prop_assert!(run.decomposition.total_cost <= bound * (1.0 + 1e-8) + 1e-12);
        prop_assert!(run.validate(&a, 1e-9).ok());
        let tr = a.trace().max(1.0);
        prop_assert!(min_eigenvalue(&run.residual) >= -1e-9 * tr);
        for au in &run.audits {
            prop_assert!(au.trace_discrepancy <= 1e-9 && au.identity_discrepancy <= 1e-9);
        }
    }

    #[test]
    fn eigen_decomposition_valid(a in psd(8)) {
        let dec = eigen_decomposer(&a).unwrap();
        prop_assert!(validate(&dec, &a, 1e-8).ok());
        prop_assert!(dec.total_cost >= a.entrywise_one_norm() * (1.0 - 1e-9) - 1e-12);
    }

    #[test]
    fn gamma_plus_bracket(a in psd(8)) {
        let r = gamma_plus_bounds(&a).unwrap();
        prop_assert!(r.check_invariants().is_ok());
    }

    #[test]
    fn rho1_scale_covariant(t in symmetric(6), alpha in 0.1f64..10.0) {
        let r = rho1_exact(&t, 12).unwrap();
        let s = rho1_exact(&t.scaled(alpha), 12).unwrap();
        let (v, w) = (r.value().unwrap(), s.value().unwrap());
        prop_assert!((w - alpha * v).abs() <= 1e-10 * (1.0 + alpha * v.abs()));
        let (Some(Witness::Vector(x)), Some(Witness::Vector(y))) = (&r.witness, &s.witness) else {
            return Err(TestCaseError::fail("missing witness"));
        };
        // Same maximizing pattern, up to the global sign.
        let sign = |v: &f64| if v.abs() < 1e-12 { 0 } else if *v > 0.0 { 1 } else { -1 };
        let px: Vec<i32> = x.iter().map(sign).collect();
        let py: Vec<i32> = y.iter().map(sign).collect();
        let neg: Vec<i32> = px.iter().map(|s| -s).collect();
        prop_assert!(py == px || py == neg, "{:?} vs {:?}", px, py);
    }

    #[test]
    fn rho1_serial_equals_parallel(t in symmetric(8)) {
        let a = rho1_exact(&t, 12).unwrap().value().unwrap();
        let b = rho1_exact_parallel(&t, 12).unwrap().value().unwrap();
        prop_assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn sandwich(t in symmetric(6)) {
        let rho = rho1_exact(&t, 12).unwrap();
        let up = piplus_dual_upper(&t, 1e-6, 200).unwrap();
        let low = piplus_rank1_lower(&t, &rho).unwrap();
        let u = up.upper.unwrap();
        prop_assert!(rho.value().unwrap() <= u + 1e-9);
        prop_assert!(low.lower.unwrap() <= u + 1e-9);
        prop_assert!(up.check_invariants().is_ok());
    }

    #[test]
    fn multistart_below_exact(t in symmetric(7), seed in 0u64..1000) {
        let e = rho1_exact(&t, 12).unwrap().value().unwrap();
        let opts = MultistartOptions { restarts: 8, steps: 100, polish: true };
        let m = rho1_multistart(&t, opts, &Rng::new(seed)).unwrap().lower.unwrap();
        prop_assert!(m <= e + 1e-9);
    }

    #[test]
    fn matrix_text_round_trip(t in symmetric(6)) {
        let back = parse_matrix(&format_matrix(&t)).unwrap();
        prop_assert!(t.as_slice().iter().zip(back.as_slice()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn witness_normalized(n in 2usize..60, seed in 0u64..1000, c in 2.1f64..3.9) {
        let w = sample_w(n, &mut Rng::new(seed));
        let wt = piplus_witness(&w, c).unwrap();
        if wt.trace.b > 0.0 {
            prop_assert!((wt.matrix.entrywise_one_norm() - 1.0).abs() < 1e-12);
        }
        prop_assert!(wt.trace.relative_discrepancy() < 1e-9);
    }

    #[test]
    fn kappa_monotone_in_beta(n in 4usize..14, seed in 0u64..100, b1 in 0.05f64..0.6, b2 in 0.05f64..0.6) {
        let w = sample_w(n, &mut Rng::new(seed));
        let (lo, hi) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
        let a = estimate_kappa_for(&w, lo, seed, 50).unwrap();
        let b = estimate_kappa_for(&w, hi, seed, 50).unwrap();
        prop_assert!(a.kappa <= b.kappa);
    }
}
