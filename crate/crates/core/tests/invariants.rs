use almost_thermal::joint::{commutator_norm, diagonal, matrix_energetics, max_off_diagonal};
use almost_thermal::*;
use proptest::prelude::*;

fn population(d: usize) -> impl Strategy<Value = Population> {
    proptest::collection::vec(0.01f64..1.0, d).prop_map(|w| {
        let s: f64 = w.iter().sum();
        Population::new(w.iter().map(|x| x / s).collect()).unwrap()
    })
}

fn params(d: usize) -> impl Strategy<Value = ModelParams> {
    (0.1f64..3.0, 0.2f64..2.0, 0.0f64..std::f64::consts::FRAC_PI_2)
        .prop_map(move |(beta, g0, theta)| ModelParams::new(d, beta, g0, theta).unwrap())
}

/// A qudit case: dimension, model, system state, second state.
fn case() -> impl Strategy<Value = (ModelParams, Population, Population)> {
    (2usize..=4).prop_flat_map(|d| (params(d), population(d), population(d)))
}

fn kind() -> impl Strategy<Value = InhomogeneityKind> {
    prop_oneof![Just(InhomogeneityKind::Hamiltonian), Just(InhomogeneityKind::Temperature)]
}

fn orders() -> AlphaGrid {
    AlphaGrid::new(
        ["0", "0.25", "0.5", "0.9", "1", "1.5", "2", "3", "10", "inf"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn channel_keeps_states_normalized((pp, q, _) in case(), delta in -0.5f64..0.5) {
        let tau = thermal_populations(&pp, delta).unwrap();
        let (sys, res) = collide(&q, &tau, pp.theta()).unwrap();
        for out in [&sys, &res] {
            prop_assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(out.iter().all(|&x| x >= 0.0));
        }
        // the swap exchanges populations; their total is conserved
        for j in 0..q.dim() {
            prop_assert!((sys[j] + res[j] - q[j] - tau[j]).abs() < 1e-14);
        }
    }

    #[test]
    fn thermal_state_is_fixed((params, _, _) in case(), delta in -0.5f64..0.5) {
        let tau = thermal_populations(&params, delta).unwrap();
        let (sys, _) = collide(&tau, &tau, params.theta()).unwrap();
        prop_assert!(trace_distance(&sys, &tau).unwrap() < 1e-15);
    }

    #[test]
    fn iterated_channel_matches_closed_form((params, p0, _) in case(), delta in -0.2f64..0.2, r in 0u64..=200) {
        let tau = thermal_populations(&params, delta).unwrap();
        let mut p = p0.clone();
        for _ in 0..r {
            p = collide(&p, &tau, params.theta()).unwrap().0;
        }
        let closed = analytic_state(&p0, &tau, params.theta(), r).unwrap();
        for j in 0..p.dim() {
            prop_assert!((p[j] - closed[j]).abs() < 1e-12, "r={} j={} {} vs {}", r, j, p[j], closed[j]);
        }
    }

    #[test]
    fn trace_distance_is_a_metric((params, p, q, r) in (2usize..=4).prop_flat_map(|d| (params(d), population(d), population(d), population(d)))) {
        let dpq = trace_distance(&p, &q).unwrap();
        prop_assert!((0.0..=1.0).contains(&dpq));
        prop_assert_eq!(dpq, trace_distance(&q, &p).unwrap());
        prop_assert_eq!(trace_distance(&p, &p).unwrap(), 0.0);
        prop_assert!(dpq <= trace_distance(&p, &r).unwrap() + trace_distance(&r, &q).unwrap() + 1e-15);
        // one collision with a common reservoir state shrinks distances by cos^2
        let tau = thermal_populations(&params, 0.0).unwrap();
        let after = trace_distance(
            &collide(&p, &tau, params.theta()).unwrap().0,
            &collide(&q, &tau, params.theta()).unwrap().0,
        ).unwrap();
        prop_assert!((after - params.cos2() * dpq).abs() < 1e-14);
    }

    #[test]
    fn first_law_closes((params, p, _) in case(), delta in -0.2f64..0.2, kind in kind()) {
        let rec = CollisionRecord::evaluate(&p, delta, &params, kind).unwrap();
        prop_assert!(rec.first_law_residual() < 1e-12);
        if kind == InhomogeneityKind::Temperature {
            prop_assert_eq!(rec.work, 0.0);
        }
    }

    #[test]
    fn closed_forms_match_matrix_oracle((params, p, _) in case(), delta in -0.2f64..0.2, kind in kind()) {
        let rec = CollisionRecord::evaluate(&p, delta, &params, kind).unwrap();
        let m = matrix_energetics(&p, delta, &params, kind).unwrap();
        prop_assert!((rec.work - m.work).abs() < 1e-12, "W {} vs {}", rec.work, m.work);
        prop_assert!((rec.heat - m.heat).abs() < 1e-12, "Q {} vs {}", rec.heat, m.heat);
        prop_assert!((rec.d_u - m.d_u).abs() < 1e-12, "dU {} vs {}", rec.d_u, m.d_u);
    }

    #[test]
    fn reference_reservoir_commutes((params, _, _) in case()) {
        prop_assert!(commutator_norm(&params, InhomogeneityKind::Hamiltonian, 0.0) < 1e-12);
        prop_assert!(commutator_norm(&params, InhomogeneityKind::Temperature, 0.1) < 1e-12);
    }

    #[test]
    fn joint_state_is_physical((params, p, _) in case(), delta in -0.2f64..0.2) {
        let q = thermal_populations(&params, delta).unwrap();
        let joint = joint_post_collision(&p, &q, params.theta()).unwrap();
        prop_assert!((joint.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(joint.trace().im.abs() < 1e-12);
        prop_assert!(joint.hermiticity_error() < 1e-12);
        prop_assert!(joint.eigenvalues().iter().all(|&l| l >= -1e-12));
        let (sys, res) = collide(&p, &q, params.theta()).unwrap();
        for (marginal, expected) in [(joint.system_marginal(), sys), (joint.reservoir_marginal(), res)] {
            prop_assert!(max_off_diagonal(&marginal) < 1e-12);
            for (a, b) in diagonal(&marginal).iter().zip(expected.iter()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn renyi_is_nonnegative_and_ordered((_, p, q) in case()) {
        let grid = orders();
        let values: Vec<f64> = grid.alphas().iter().map(|&a| renyi_divergence(&p, &q, a).unwrap()).collect();
        for (a, v) in grid.alphas().iter().zip(&values) {
            prop_assert!(*v >= -1e-12, "alpha {}: {}", a, v);
            prop_assert!(renyi_divergence(&p, &p, *a).unwrap().abs() < 1e-12);
        }
        for w in values.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-12, "{:?}", values);
        }
    }

    #[test]
    fn renyi_obeys_data_processing((params, p, q) in case()) {
        // a partial swap against a fixed state is a classical channel
        let fixed = thermal_populations(&params, 0.0).unwrap();
        let tp = collide(&p, &fixed, params.theta()).unwrap().0;
        let tq = collide(&q, &fixed, params.theta()).unwrap().0;
        for &a in orders().alphas() {
            let before = renyi_divergence(&p, &q, a).unwrap();
            let after = renyi_divergence(&tp, &tq, a).unwrap();
            prop_assert!(after <= before + 1e-12, "alpha {}: {} > {}", a, after, before);
        }
    }

    #[test]
    fn renyi_limits_are_continuous((_, p, q) in case()) {
        let kl = renyi_divergence(&p, &q, Alpha::One).unwrap();
        for a in [1.0 - 1e-6, 1.0 + 1e-6] {
            let d = renyi_divergence(&p, &q, Alpha::new(a).unwrap()).unwrap();
            prop_assert!((d - kl).abs() < 1e-5, "{} vs {}", d, kl);
        }
        let max = renyi_divergence(&p, &q, Alpha::Infinity).unwrap();
        let high = renyi_divergence(&p, &q, Alpha::new(1e3).unwrap()).unwrap();
        // D_inf - D_a <= -ln(p_k) / (a - 1) with k the maximal likelihood ratio
        let k = (0..p.dim()).max_by(|&i, &j| (p[i] / q[i]).total_cmp(&(p[j] / q[j]))).unwrap();
        prop_assert!(high <= max + 1e-12);
        prop_assert!(max - high <= -p[k].ln() / 999.0 + 1e-12);
    }

    #[test]
    fn renyi_high_order_meets_max_divergence(a in 0.4f64..0.6, b in 0.4f64..0.6) {
        let p = Population::qubit(a).unwrap();
        let q = Population::qubit(b).unwrap();
        let max = renyi_divergence(&p, &q, Alpha::Infinity).unwrap();
        let high = renyi_divergence(&p, &q, Alpha::new(1e3).unwrap()).unwrap();
        prop_assert!((max - high).abs() < 1e-3);
    }

    #[test]
    fn entropy_production_is_nonnegative((params, p, _) in case(), delta in -0.2f64..0.2) {
        let block = entropy_production(&p, delta, &params).unwrap();
        let dense = entropy_production_dense(&p, delta, &params).unwrap();
        prop_assert!(block >= -1e-12);
        prop_assert!((block - dense).abs() < 1e-10, "{} vs {}", block, dense);
    }

    #[test]
    fn sharp_reference_never_violates_second_laws((params, p0, _) in case(), steps in 1usize..40) {
        let tau = thermal_populations(&params, 0.0).unwrap();
        let mut traj = vec![p0];
        for _ in 0..steps {
            let next = collide(traj.last().unwrap(), &tau, params.theta()).unwrap().0;
            traj.push(next);
        }
        let report = second_laws_check(&traj, &params, &AlphaGrid::default()).unwrap();
        prop_assert_eq!(report.violation_count(), 0);
    }
}

#[test]
fn hamiltonian_inhomogeneity_breaks_commutation() {
    let params = ModelParams::new(3, 1.0, 1.0, 0.4).unwrap();
    assert!(commutator_norm(&params, InhomogeneityKind::Hamiltonian, 0.1) > 1e-3);
}
