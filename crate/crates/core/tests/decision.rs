use nde_voi::bayes::{ConditionPrior, FailureCurve, FailureModel};
use nde_voi::decision::{
    Action, Costs, NdeSystem, Observation, OneStepProblem, Policy, Transition, TwoStepProblem,
};
use nde_voi::distributions::Distribution;
use nde_voi::nde_models::{ConfusionMatrix, RocModel, SignalOrientation};
use nde_voi::scenarios::{builtin, oracle_expected_cost, OracleGrid};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn halfcell_roc(prior_y1: f64) -> RocModel {
    RocModel::given(
        Distribution::Normal { mu: -0.207, sigma: 0.0804 },
        Distribution::Normal { mu: -0.354, sigma: 0.08 },
        prior_y1,
        SignalOrientation::SignalBelow,
    )
    .unwrap()
}

fn binary_failure() -> FailureModel {
    FailureModel::new(FailureCurve::Binary { y0: 0.0, y1: 1.0 }, FailureCurve::Constant { p: 0.0 }).unwrap()
}

fn binary_problem(prior_y1: f64, c_r: f64, c_f: f64) -> OneStepProblem {
    OneStepProblem::new(
        ConditionPrior::binary(prior_y1).unwrap(),
        NdeSystem::Roc { model: halfcell_roc(prior_y1) },
        binary_failure(),
        Costs::new(c_r, c_f).unwrap(),
    )
    .unwrap()
}

fn normal_pdf(s: f64, mu: f64, sigma: f64) -> f64 {
    let z = (s - mu) / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

#[test]
fn hypothetical_prior_costs() {
    let p = builtin("hypothetical").unwrap().one_step_problem().unwrap();
    let d = p.prior_decision().unwrap();
    // Repair: c_R + c_F·p_{F|R}, independent of the condition.
    assert!((d.repair_cost - 1.08).abs() < 1e-12);
    assert!((d.no_repair_cost - 800.0 * d.pf_no_repair).abs() < 1e-12);
    assert_eq!(d.action, Action::DoNothing);
    assert!((d.no_repair_cost - 0.94).abs() < 0.01);
}

#[test]
fn halfcell_prior_costs_are_closed_form() {
    let d = binary_problem(0.05, 5.0, 50.0).prior_decision().unwrap();
    assert!((d.no_repair_cost - 2.5).abs() < 1e-12);
    assert!((d.repair_cost - 5.0).abs() < 1e-12);
    assert_eq!(d.action, Action::DoNothing);
}

#[test]
fn ratio_test_matches_direct_comparison_at_random_signals() {
    let p = binary_problem(0.05, 5.0, 50.0);
    let test = p.lr_test().unwrap();
    let Policy::Region { region } = p.optimal_policy().unwrap() else { panic!() };
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    for _ in 0..1000 {
        let s: f64 = rng.gen_range(-1.0..0.6);
        if region.boundaries.iter().any(|b| (s - b).abs() < 1e-6) {
            continue;
        }
        let (l0, l1) = (normal_pdf(s, -0.207, 0.0804), normal_pdf(s, -0.354, 0.08));
        assert_eq!(p.optimal_action(Observation::Signal(s)).unwrap(), test.decide(l0, l1), "s = {s}");
        assert_eq!(region.action(s), test.decide(l0, l1), "s = {s}");
        checked += 1;
    }
    assert!(checked > 990);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    // Repair iff p·L1·Δ1 + (1−p)·L0·Δ0 > 0, written out independently.
    #[test]
    fn ratio_test_direction_in_both_regimes(
        p in 0.01f64..0.99,
        c_r in 0.1f64..20.0,
        c_f in 0.1f64..100.0,
        q1 in 0.0f64..1.0,
        q0 in 0.0f64..1.0,
        l0 in 1e-3f64..5.0,
        l1 in 1e-3f64..5.0,
    ) {
        let failure = FailureModel::new(
            FailureCurve::Binary { y0: q0, y1: q1 },
            FailureCurve::Constant { p: 0.1 },
        ).unwrap();
        let prob = OneStepProblem::new(
            ConditionPrior::binary(p).unwrap(),
            NdeSystem::Roc { model: halfcell_roc(p) },
            failure,
            Costs::new(c_r, c_f).unwrap(),
        ).unwrap();
        let d1 = c_f * q1 - (c_r + c_f * 0.1);
        let d0 = c_f * q0 - (c_r + c_f * 0.1);
        let margin = p * l1 * d1 + (1.0 - p) * l0 * d0;
        prop_assume!(margin.abs() > 1e-9 * (p * l1 * d1.abs() + (1.0 - p) * l0 * d0.abs()).max(1e-300));
        let expected = if margin > 0.0 { Action::Repair } else { Action::DoNothing };
        prop_assert_eq!(prob.lr_test().unwrap().decide(l0, l1), expected);
    }

    #[test]
    fn voi_is_never_negative(p in 0.005f64..0.995, c_r in 0.5f64..20.0, c_f in 1.0f64..100.0) {
        let sol = binary_problem(p, c_r, c_f).solve().unwrap();
        prop_assert!(sol.voi >= -1e-9 * sol.prior.cost.max(1.0), "voi {}", sol.voi);
    }

    #[test]
    fn confusion_voi_is_never_negative(
        p in 0.005f64..0.995, pod in 0.0f64..1.0, pfa in 0.0f64..1.0, c_f in 1.0f64..100.0,
    ) {
        let prob = binary_problem(p, 5.0, c_f)
            .with_nde(NdeSystem::Confusion { matrix: ConfusionMatrix::new(pod, pfa).unwrap() })
            .unwrap();
        let sol = prob.solve().unwrap();
        prop_assert!(sol.voi >= -1e-12, "voi {}", sol.voi);
    }
}

#[test]
fn uninformative_observations_have_zero_voi() {
    let base = binary_problem(0.05, 5.0, 50.0);
    for q in [0.0, 0.2, 0.5, 1.0] {
        let p = base.with_nde(NdeSystem::Confusion { matrix: ConfusionMatrix::new(q, q).unwrap() }).unwrap();
        let sol = p.solve().unwrap();
        assert_eq!(sol.voi, 0.0, "pod = pfa = {q}");
        if let Policy::Indication { on_i0, on_i1 } = sol.policy {
            assert_eq!((on_i0, on_i1), (sol.prior.action, sol.prior.action));
        }
    }
    let same = Distribution::Normal { mu: -0.2, sigma: 0.08 };
    let roc = RocModel::given(same, same, 0.05, SignalOrientation::SignalBelow).unwrap();
    let sol = base.with_nde(NdeSystem::Roc { model: roc }).unwrap().solve().unwrap();
    let Policy::Region { region } = &sol.policy else { panic!() };
    assert!(region.intervals.is_empty());
    assert_eq!(sol.voi, 0.0);
}

#[test]
fn preposterior_routes_agree() {
    let hyp = builtin("hypothetical").unwrap().one_step_problem().unwrap();
    let problems = [
        hyp.clone(),
        hyp.with_condition_threshold(0.1, None).unwrap(),
        hyp.with_threshold(0.03).unwrap(),
        hyp.with_condition_threshold(0.1, None).unwrap().with_threshold(0.01).unwrap(),
        binary_problem(0.05, 5.0, 50.0),
        binary_problem(0.3, 5.0, 50.0),
    ];
    for p in problems {
        let swapped = p.solve().unwrap().expected_cost;
        let direct = p.preposterior_cost_direct().unwrap();
        assert!((swapped - direct).abs() <= 1e-6 * swapped, "{swapped} vs {direct}");
    }
}

#[test]
fn halfcell_matches_discretized_oracle() {
    let p = binary_problem(0.05, 5.0, 50.0);
    let NdeSystem::Roc { model } = &p.nde else { panic!() };
    let sol = p.solve().unwrap();
    let Policy::Region { region } = &sol.policy else { panic!() };
    let mut prev = f64::INFINITY;
    for n in [400, 800, 1600] {
        let g = OracleGrid::from_roc(model, 0.05, n).unwrap();
        let oracle = oracle_expected_cost(&g, |s| region.action(s), |y, a| p.cost(y, a));
        let err = (oracle - sol.expected_cost).abs() / sol.expected_cost;
        assert!(err < 0.01, "n = {n}: {oracle} vs {}", sol.expected_cost);
        assert!(err <= prev * 1.05 + 1e-9, "n = {n}: error {err} after {prev}");
        prev = err;
    }
}

fn halfcell_two_step() -> TwoStepProblem {
    builtin("halfcell").unwrap().two_step_problem().unwrap()
}

#[test]
fn two_step_reduces_to_one_step() {
    let mut t = halfcell_two_step();
    t.transition = Transition::identity();
    t.step_costs[1] = Costs::new(0.0, 0.0).unwrap();
    // The first-step prior differs from the one the ROC carries.
    let one = t.step_problem(0, t.prior_y1, t.nde.clone()).unwrap().solve().unwrap();
    let cont = t.solve_continuous().unwrap();
    assert!((cont.expected_cost - one.expected_cost).abs() < 1e-6 * one.expected_cost);
    assert!((t.prior_solution().cost - one.prior.cost).abs() < 1e-12);

    let cm = ConfusionMatrix::new(0.9, 0.29).unwrap();
    let fixed = t.solve_fixed_point(cm);
    let one = t.step_problem(0, t.prior_y1, NdeSystem::Confusion { matrix: cm }).unwrap().solve().unwrap();
    assert!((fixed.expected_cost - one.expected_cost).abs() < 1e-12);
}

#[test]
fn repair_absorbs_history() {
    let t = halfcell_two_step();
    let plan = t.solve_continuous().unwrap();
    let repairs: Vec<f64> = (0..60).map(|k| -0.8 + 0.01 * k as f64).filter(|&s| plan.first_step.contains(s)).collect();
    assert!(repairs.len() > 10);
    let reference = t.second_step_region(&plan, repairs[0]).unwrap();
    for &s1 in &repairs[1..] {
        for k in 0..=100 {
            let s2 = -0.8 + 0.01 * k as f64;
            assert_eq!(t.second_step_action(&plan, s1, s2).unwrap(), reference.action(s2), "s1 = {s1}, s2 = {s2}");
        }
    }
}

#[test]
fn memoryless_equals_fixed_point_where_policy_is_memoryless() {
    let t = halfcell_two_step();
    let mut seen = 0;
    for i in 0..=20 {
        for j in 0..=20 {
            let cm = ConfusionMatrix::new(i as f64 / 20.0, j as f64 / 20.0).unwrap();
            let pol = t.solve_fixed_point(cm);
            if pol.is_memoryless() {
                seen += 1;
                assert!((t.memoryless_policy_cost(cm) - pol.expected_cost).abs() < 1e-12, "{cm:?}");
            }
            assert!(pol.expected_cost <= t.memoryless_policy_cost(cm) + 1e-12);
        }
    }
    assert!(seen > 0);
}

#[test]
fn fixed_point_matches_enumeration_over_all_policies() {
    // Brute force over the 2^2 · 2^4 deterministic indication policies.
    let t = halfcell_two_step();
    let (p, t01) = (t.prior_y1, 0.05);
    for (pod, pfa) in [(0.9, 0.29), (0.6, 0.1), (0.3, 0.7)] {
        let cm = ConfusionMatrix::new(pod, pfa).unwrap();
        let mut best = f64::INFINITY;
        for code in 0u32..64 {
            let a1 = |i1: usize| code >> i1 & 1 == 1;
            let a2 = |i1: usize, i2: usize| code >> (2 + 2 * i1 + i2) & 1 == 1;
            let mut total = 0.0;
            for y1 in 0..2 {
                for i1 in 0..2 {
                    let w = [1.0 - p, p][y1] * cm.likelihood(y1 == 1, i1 == 1);
                    let y1p = if a1(i1) { 0 } else { y1 };
                    total += w * if a1(i1) { 5.0 } else { 50.0 * y1 as f64 };
                    let p2 = if y1p == 1 { 1.0 } else { t01 };
                    for y2 in 0..2 {
                        for i2 in 0..2 {
                            let w2 = w * [1.0 - p2, p2][y2] * cm.likelihood(y2 == 1, i2 == 1);
                            total += w2 * if a2(i1, i2) { 5.0 } else { 50.0 * y2 as f64 };
                        }
                    }
                }
            }
            best = best.min(total);
        }
        let got = t.solve_fixed_point(cm).expected_cost;
        assert!((got - best).abs() < 1e-12, "({pod}, {pfa}): {got} vs {best}");
    }
}
