use augustin_core::augustin::{apply_operator, contraction_factor, petz_augustin_step, IterateState};
use augustin_core::capacity::entropic_update;
use augustin_core::fisher::{
    buyer_demand, metric_comparability_check, run_schedule, tatonnement_step, total_demand, FisherMarket,
    PriceState, UpdateSchedule,
};
use augustin_core::linalg::{
    random_density_matrix, thompson_metric_psd, thompson_metric_vec, DensityMatrix, HermitianMatrix,
};
use augustin_core::{quantum_objective, AugustinProblem};
use proptest::prelude::*;

/// Random state mixed with `I/d`, keeping its condition number below `5d` so that
/// powers up to `|r| = 5` stay well inside double precision.
fn state(seed: u64, d: usize) -> DensityMatrix {
    let mixed = random_density_matrix(seed, d)
        .scale(0.8)
        .add(&DensityMatrix::maximally_mixed(d).scale(0.2))
        .unwrap();
    DensityMatrix::normalized(&mixed).unwrap()
}

fn pd(seed: u64, d: usize, scale: f64) -> HermitianMatrix {
    state(seed, d).into_hermitian().scale(scale)
}

fn problem(seed: u64, n: usize, d: usize, alpha: f64) -> AugustinProblem {
    let states: Vec<DensityMatrix> = (0..n).map(|j| random_density_matrix(seed.wrapping_mul(31) + j as u64, d)).collect();
    AugustinProblem::uniform(states, alpha).unwrap()
}

fn positive_vec() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..6).prop_flat_map(|d| {
        (
            prop::collection::vec(1e-3f64..1e3, d),
            prop::collection::vec(1e-3f64..1e3, d),
        )
    })
}

fn alpha_strategy() -> impl Strategy<Value = f64> {
    prop_oneof![0.05f64..0.95, 1.05f64..6.0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn thompson_is_a_metric(s in any::<u64>(), d in 1usize..6, a in 0.1f64..10.0, b in 0.1f64..10.0) {
        let u = pd(s, d, a);
        let v = pd(s ^ 0x9e37, d, b);
        let w = pd(s ^ 0x51ed, d, 1.0);
        prop_assert!(thompson_metric_psd(&u, &u).unwrap().abs() < 1e-12);
        let duv = thompson_metric_psd(&u, &v).unwrap();
        let dvu = thompson_metric_psd(&v, &u).unwrap();
        prop_assert!(duv >= 0.0);
        prop_assert!((duv - dvu).abs() <= 1e-9 * (1.0 + duv));
        let duw = thompson_metric_psd(&u, &w).unwrap();
        let dwv = thompson_metric_psd(&w, &v).unwrap();
        prop_assert!(duv <= duw + dwv + 1e-9);
    }

    #[test]
    fn power_shrinks_thompson_distance(s in any::<u64>(), d in 1usize..6, r in -1.0f64..=1.0) {
        let u = pd(s, d, 1.0);
        let v = pd(s ^ 0xabcdef, d, 3.0);
        let lhs = thompson_metric_psd(&u.power(r).unwrap(), &v.power(r).unwrap()).unwrap();
        let rhs = r.abs() * thompson_metric_psd(&u, &v).unwrap();
        prop_assert!(lhs <= rhs + 1e-9, "{} > {}", lhs, rhs);
    }

    #[test]
    fn vector_power_scales_exactly((u, v) in positive_vec(), r in -5.0f64..5.0) {
        let ur: Vec<f64> = u.iter().map(|x| x.powf(r)).collect();
        let vr: Vec<f64> = v.iter().map(|x| x.powf(r)).collect();
        let lhs = thompson_metric_vec(&ur, &vr).unwrap();
        let rhs = r.abs() * thompson_metric_vec(&u, &v).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs));
    }

    #[test]
    fn scaling_costs_at_most_log_factor(s in any::<u64>(), d in 1usize..6, r in 1e-3f64..1e3) {
        let u = pd(s, d, 1.0);
        let v = pd(s ^ 0x1234, d, 1.0);
        let lhs = thompson_metric_psd(&u, &v.scale(r)).unwrap();
        let rhs = thompson_metric_psd(&u, &v).unwrap() + r.ln().abs();
        prop_assert!(lhs <= rhs + 1e-9);
    }

    #[test]
    fn normalization_at_most_doubles_distance(s in any::<u64>(), d in 1usize..6, alpha in alpha_strategy(), c in 0.05f64..20.0) {
        let v = state(s, d);
        let u = pd(s ^ 0x777, d, c);
        let un = DensityMatrix::normalized(&u).unwrap();
        let lhs = thompson_metric_psd(&v.power(1.0 - alpha).unwrap(), &un.power(1.0 - alpha).unwrap()).unwrap();
        let rhs = 2.0 * thompson_metric_psd(&v.power(1.0 - alpha).unwrap(), &u.power(1.0 - alpha).unwrap()).unwrap();
        prop_assert!(lhs <= rhs + 1e-9, "{} > {}", lhs, rhs);
    }

    #[test]
    fn objective_gap_bounded_by_metric(s in any::<u64>(), alpha in alpha_strategy(), c in 0.2f64..5.0) {
        let p = problem(s, 3, 3, alpha);
        let u = pd(s ^ 0x99, 3, c);
        let v = pd(s ^ 0x98, 3, 1.0);
        let fu = quantum_objective(&p, &u).unwrap().to_f64();
        let fv = quantum_objective(&p, &v).unwrap().to_f64();
        let dist = thompson_metric_psd(&v.power(1.0 - alpha).unwrap(), &u.power(1.0 - alpha).unwrap()).unwrap();
        prop_assert!(fu - fv <= dist / (alpha - 1.0).abs() + 1e-9);
    }

    #[test]
    fn operator_contracts(s in any::<u64>(), alpha in prop_oneof![0.55f64..0.95, 1.05f64..6.0], c in 0.1f64..10.0) {
        let p = problem(s, 3, 3, alpha);
        let u = pd(s ^ 0x5, 3, c);
        let v = pd(s ^ 0x6, 3, 1.0);
        let lhs = thompson_metric_psd(&apply_operator(&p, &u).unwrap(), &apply_operator(&p, &v).unwrap()).unwrap();
        let rhs = contraction_factor(alpha) * thompson_metric_psd(&u, &v).unwrap();
        prop_assert!(lhs <= rhs + 1e-9, "{} > {}", lhs, rhs);
    }

    #[test]
    fn trace_stays_below_one_for_large_alpha(s in any::<u64>(), alpha in 1.05f64..6.0) {
        let p = problem(s, 4, 3, alpha);
        let mut st = IterateState::maximally_mixed(&p).unwrap();
        for _ in 0..10 {
            let next = petz_augustin_step(&p, &st).unwrap();
            prop_assert!(next.trace <= 1.0 + 1e-10);
            prop_assert!(next.f_value.to_f64() <= st.f_value.to_f64() + 1e-10);
            st = next;
        }
    }

    #[test]
    fn entropic_update_ignores_gradient_shift(
        w in prop::collection::vec(0.01f64..1.0, 2..8),
        shift in -50.0f64..50.0,
        seed in any::<u64>(),
    ) {
        let s: f64 = w.iter().sum();
        let w: Vec<f64> = w.iter().map(|x| x / s).collect();
        let g: Vec<f64> = (0..w.len()).map(|i| ((seed >> (i % 60)) & 0xff) as f64 / 40.0).collect();
        let gs: Vec<f64> = g.iter().map(|x| x + shift).collect();
        let a = entropic_update(&w, &g).unwrap();
        let b = entropic_update(&w, &gs).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
        prop_assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn comparability_holds((u, v) in positive_vec()) {
        let c = metric_comparability_check(&u, &v).unwrap();
        prop_assert!(c.holds);
        if c.precondition {
            prop_assert!(c.linf_ratio / 3.0 <= c.d_t + 1e-9 && c.d_t <= 3.0 * c.linf_ratio + 1e-9);
        }
    }

    #[test]
    fn budgets_are_spent(seed in any::<u64>(), p in prop::collection::vec(1e-3f64..1e3, 4)) {
        let m = FisherMarket::random(seed, 3, 4, (0.05, 0.9), 0.95).unwrap();
        for j in 0..3 {
            let x = buyer_demand(&m, j, &p).unwrap();
            let spent: f64 = x.iter().zip(&p).map(|(a, b)| a * b).sum();
            prop_assert!((spent - m.budgets()[j]).abs() <= 1e-10);
        }
        let x = total_demand(&m, &p).unwrap();
        prop_assert!((x.iter().zip(&p).map(|(a, b)| a * b).sum::<f64>() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn distance_to_equilibrium_never_grows(seed in any::<u64>(), prob in 0.1f64..0.9) {
        let m = FisherMarket::random(seed, 3, 4, (0.1, 0.7), 0.75).unwrap();
        let eq = augustin_core::fisher::equilibrium_prices(&m).unwrap();
        let sched = UpdateSchedule::random_coverage(4, 40, prob, seed);
        let run = run_schedule(&m, &[0.1, 0.2, 0.3, 0.4], &sched).unwrap();
        for (k, pair) in run.states.windows(2).enumerate() {
            let before = thompson_metric_vec(&eq.p, &pair[0].p).unwrap();
            let after = thompson_metric_vec(&eq.p, &pair[1].p).unwrap();
            prop_assert!(after <= before + 1e-9);
            for &i in &sched.rounds[k] {
                let moved = (pair[1].p[i] / eq.p[i]).ln().abs();
                prop_assert!(moved <= m.contraction_factor() * before + 1e-9);
            }
        }
    }
}

#[test]
fn synchronous_step_fixes_equilibrium() {
    let m = FisherMarket::random(3, 4, 5, (0.2, 0.6), 0.8).unwrap();
    let eq = augustin_core::fisher::equilibrium_prices(&m).unwrap();
    let s = PriceState::new(&m, eq.p.clone()).unwrap();
    let next = tatonnement_step(&m, &s, &[0, 1, 2, 3, 4]).unwrap();
    assert!(thompson_metric_vec(&eq.p, &next.p).unwrap() < 1e-12);
}
