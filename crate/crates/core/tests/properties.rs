use proptest::prelude::*;
use te_shape::{solve, verify_kkt, MarketInstance, MethodChoice, ModelKind, SolverConfig, UtilityParams};

fn cfg() -> SolverConfig {
    SolverConfig::default()
}

/// `(a, b, m)` with at least one agent and positive total production.
fn quadratic_market() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    (1usize..25).prop_flat_map(|n| {
        (
            prop::collection::vec(0.0f64..10.0, n).prop_map(|mut a| {
                a[0] += 0.5;
                a
            }),
            prop::collection::vec(0.05f64..10.0, n),
            prop::collection::vec(0.05f64..10.0, n),
        )
    })
}

fn pwl_market() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    quadratic_market()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn raising_parameters_never_lowers_a_positive_price(
        (a, b, m) in quadratic_market(),
        which in 0usize..25,
        bump in 1.0f64..3.0,
        raise_b in any::<bool>(),
    ) {
        let inst = MarketInstance::quadratic(ModelKind::Mtes, &a, &b, &m);
        let base = solve(&inst, &cfg(), MethodChoice::Auto).unwrap();
        prop_assume!(base.lambda_star > 0.0);
        let i = which % a.len();
        let (mut b2, mut m2) = (b.clone(), m.clone());
        if raise_b { b2[i] *= bump } else { m2[i] *= bump }
        let raised = solve(&MarketInstance::quadratic(ModelKind::Mtes, &a, &b2, &m2), &cfg(), MethodChoice::Auto).unwrap();
        prop_assert!(raised.lambda_star >= base.lambda_star - 1e-12 * base.lambda_star.abs().max(1.0));
    }

    #[test]
    fn every_result_balances((a, b, m) in quadratic_market(), pwl in any::<bool>(), trading in any::<bool>()) {
        let model = if trading { ModelKind::MtesSt } else { ModelKind::Mtes };
        let inst = if pwl {
            MarketInstance::pwl(model, &a, &b, &m)
        } else {
            MarketInstance::quadratic(model, &a, &b, &m)
        };
        let tol = cfg().balance_tol(inst.capacity());
        for choice in [MethodChoice::Auto, MethodChoice::Bisect] {
            let r = solve(&inst, &cfg(), choice).unwrap();
            prop_assert!(r.balance_residual <= tol);
            prop_assert!(r.x_star.iter().all(|&x| x >= 0.0));
            prop_assert!(verify_kkt(&inst, &r, &cfg()).passes(1e-6));
            if trading {
                let e = r.e_star.as_ref().unwrap();
                prop_assert!(r.lambda_star >= 0.0);
                prop_assert!(e.iter().sum::<f64>().abs() <= tol);
                for ((a, x), e) in inst.production.iter().zip(&r.x_star).zip(e) {
                    prop_assert!(x + e <= a + tol);
                }
            } else {
                prop_assert!((r.x_star.iter().sum::<f64>() - inst.capacity()).abs() <= tol);
            }
        }
    }

    #[test]
    fn homogeneous_agents_share_equally(n in 1usize..30, capacity in 0.5f64..200.0, b in 0.1f64..10.0, m_scale in 0.1f64..5.0) {
        let m = m_scale * capacity / n as f64;
        let theta = UtilityParams::quadratic(b, m);
        let inst = MarketInstance::new(ModelKind::Mtes, vec![capacity / n as f64; n], vec![theta.clone(); n]);
        let want = theta.derivative(capacity / n as f64).unwrap();
        for choice in [MethodChoice::Closed, MethodChoice::Bisect] {
            let r = solve(&inst, &cfg(), choice).unwrap();
            prop_assert!((r.lambda_star - want).abs() <= 1e-8 * want.abs().max(1.0));
            for &x in &r.x_star {
                prop_assert!((x - capacity / n as f64).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn trading_market_matches_plain_market_at_positive_price((a, beta, phi) in pwl_market(), pwl in any::<bool>()) {
        let plain_inst = if pwl {
            MarketInstance::pwl(ModelKind::Mtes, &a, &beta, &phi)
        } else {
            MarketInstance::quadratic(ModelKind::Mtes, &a, &beta, &phi)
        };
        let plain = solve(&plain_inst, &cfg(), MethodChoice::Auto).unwrap();
        let st = solve(&plain_inst.clone().with_model(ModelKind::MtesSt), &cfg(), MethodChoice::Auto).unwrap();
        if plain.lambda_star > 0.0 {
            prop_assert_eq!(st.lambda_star, plain.lambda_star);
            prop_assert_eq!(&st.x_star, &plain.x_star);
        } else {
            prop_assert_eq!(st.lambda_star, 0.0);
        }
    }

    #[test]
    fn pwl_sign_rule((a, beta, phi) in pwl_market()) {
        let inst = MarketInstance::pwl(ModelKind::Mtes, &a, &beta, &phi);
        let total: f64 = phi.iter().sum();
        let r = solve(&inst, &cfg(), MethodChoice::Auto).unwrap();
        if total < inst.capacity() {
            prop_assert_eq!(r.lambda_star, 0.0);
        } else if total > inst.capacity() {
            prop_assert!(r.lambda_star > 0.0);
            prop_assert!(beta.contains(&r.lambda_star));
        }
    }
}
