use proptest::prelude::*;

use hurst_qv::coeff::{parse, BinOp, Expr, Func};
use hurst_qv::estimator::{hurst_hat, qv2};
use hurst_qv::exponent::{component_sets, e_q, ell2, ell2_brute_force, exponent, Affine, WeightedGraph};
use hurst_qv::interval::{rho_hat, rho_tilde, Hurst};
use hurst_qv::stats::{freedman_diaconis, ks_statistic, normal_cdf};

fn graph() -> impl Strategy<Value = WeightedGraph> {
    (1usize..=5).prop_flat_map(|nv| {
        let pairs = nv * (nv - 1) / 2 * 4;
        (
            prop::collection::vec((0u32..3, 0u32..3), nv),
            prop::collection::vec(0u32..3, pairs),
        )
            .prop_map(move |(q, w)| {
                let mut g = WeightedGraph::new((0..nv).map(|i| format!("v{i}")));
                for (v, (a, b)) in q.into_iter().enumerate() {
                    g.q[v] = [a, b];
                }
                let mut w = w.into_iter();
                for u in 0..nv {
                    for v in u + 1..nv {
                        for us in 1..=2 {
                            for vs in 1..=2 {
                                g.add_theta(u, us, v, vs, w.next().unwrap()).unwrap();
                            }
                        }
                    }
                }
                g
            })
    })
}

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        Just(Expr::X),
        (0u32..1000, 0u32..3).prop_map(|(m, e)| Expr::Num(m as f64 / 10f64.powi(e as i32))),
    ];
    leaf.prop_recursive(5, 40, 2, |inner| {
        let op = prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul), Just(BinOp::Div)];
        let func = prop_oneof![Just(Func::Sin), Just(Func::Cos), Just(Func::Exp)];
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (op, inner.clone(), inner.clone()).prop_map(|(o, a, b)| Expr::Bin(o, Box::new(a), Box::new(b))),
            (func, inner).prop_map(|(f, e)| Expr::Call(f, Box::new(e))),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ell2_matches_spanning_tree_maximum(g in graph()) {
        for set in component_sets(&g) {
            let c = g.induced(&set);
            prop_assert_eq!(ell2(&c).unwrap(), ell2_brute_force(&c).unwrap());
            prop_assert!(ell2(&c).unwrap() < c.len().max(1));
        }
    }

    #[test]
    fn exponent_is_additive_over_disjoint_unions(a in graph(), b in graph()) {
        let union = a.disjoint_union(&b);
        let ea = exponent(&a, None).unwrap().total;
        let eb = exponent(&b, None).unwrap().total;
        prop_assert_eq!(exponent(&union, None).unwrap().total, ea + eb);
    }

    #[test]
    fn e_q_bounds(q1 in 0u32..6, q2 in 0u32..6, extra in 1u32..4) {
        let e = e_q(q1, q2);
        let zero = Affine::frac(0, 1, 0);
        prop_assert!(e.le_on_model_range(&zero));
        // All weight on second-difference slots is the most negative case.
        prop_assert!(e_q(0, q1 + q2).le_on_model_range(&e));
        // More weight never raises the exponent.
        prop_assert!(e_q(q1 + extra, q2).le_on_model_range(&e));
        prop_assert!(e_q(q1, q2 + extra).le_on_model_range(&e));
    }

    #[test]
    fn hurst_hat_is_scale_invariant(v in 1e-6f64..1e6, w in 1e-6f64..1e6, c in 1e-3f64..1e3) {
        let (a, _) = hurst_hat(v, w).unwrap();
        let (b, _) = hurst_hat(c * v, c * w).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn qv2_ignores_affine_trends(
        x in prop::collection::vec(-10f64..10.0, 5..60),
        a in -100f64..100.0,
        b in -100f64..100.0,
        c in 0.1f64..10.0,
    ) {
        let base = qv2(&x).unwrap();
        let shifted: Vec<f64> = x.iter().enumerate().map(|(k, v)| v + a + b * k as f64).collect();
        let scaled: Vec<f64> = x.iter().map(|v| c * v).collect();
        let tol = 1e-9 * (1.0 + base + (a.abs() + b.abs() * x.len() as f64).powi(2));
        prop_assert!((qv2(&shifted).unwrap() - base).abs() <= tol);
        prop_assert!((qv2(&scaled).unwrap() - c * c * base).abs() <= 1e-12 * (1.0 + c * c * base));
    }

    #[test]
    fn printed_expressions_parse_back(e in expr()) {
        let text = e.to_string();
        let back = parse(&text).unwrap();
        prop_assert_eq!(&back, &e, "{}", text);
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn lag_sequences_are_even(h in 0.5f64..0.99, j in 0i64..100_000) {
        let h = Hurst::with_boundary(h).unwrap();
        prop_assert_eq!(rho_hat(h, j).to_bits(), rho_hat(h, -j).to_bits());
        prop_assert_eq!(rho_tilde(h, j).to_bits(), rho_tilde(h, -j).to_bits());
    }

    #[test]
    fn histograms_integrate_to_one(x in prop::collection::vec(-50f64..50.0, 1..500)) {
        let hist = freedman_diaconis(&x);
        prop_assert!((hist.integral() - 1.0).abs() < 1e-9);
        prop_assert_eq!(hist.total, x.len());
        let ks = ks_statistic(&x, normal_cdf);
        prop_assert!((0.0..=1.0).contains(&ks));
    }
}
