mod common;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::Rng;

use kltransfer_core::bandit::{
    bon_policy, closed_form_policy, coverage_coefficient, kl_divergence, policy_value,
    satisfies_ratio_bound, win_rate, InstanceDocument, PolicyTable, PolicyTag, PreferenceSample,
    RewardTable,
};
use kltransfer_core::bounds::{
    cov_exp_upper_bound, cov_gap_upper_bound, kappa, kl_value_identity_residual,
    reward_error_hellinger_check, sigmoid_gap_check, tv_preference_check, win_rate_cov_lower_bound,
    GammaGrid,
};
use kltransfer_core::estimation::{induced_rewards, mle_fit, nll_loss};
use kltransfer_core::random::random_reward;
use kltransfer_core::seed::derive_seed;
use kltransfer_core::{Instance, Policy};

use common::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn softmax_rows_are_distributions(logits in prop::collection::vec(-30.0f64..30.0, 12)) {
        let p = PolicyTable::softmax(3, 4, &logits).unwrap();
        for row in p.rows() {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(row.iter().all(|&x| x > 0.0));
        }
    }

    #[test]
    fn closed_form_policy_is_optimal(seed in any::<u64>()) {
        let mut g = rng(seed);
        let inst = instance(&mut g, 6, 6);
        let best = inst.optimal_value();
        for _ in 0..20 {
            let pi = any_policy(&inst, &mut g);
            prop_assert!(policy_value(&pi, inst.r_star(), &inst).unwrap() <= best + 1e-12);
        }
    }

    #[test]
    fn kl_value_identity_holds(seed in any::<u64>()) {
        let mut g = rng(seed);
        let inst = instance(&mut g, 6, 6);
        let pi = any_policy(&inst, &mut g);
        prop_assert!(kl_value_identity_residual(&pi, &inst).unwrap() < 1e-10);
    }

    #[test]
    fn coverage_is_at_least_one(seed in any::<u64>()) {
        let mut g = rng(seed);
        let inst = instance(&mut g, 6, 6);
        let (p, q) = (any_policy(&inst, &mut g), any_policy(&inst, &mut g));
        prop_assert!(coverage_coefficient(&p, &q, inst.rho()).unwrap() >= 1.0 - 1e-12);
        prop_assert!((coverage_coefficient(&p, &p, inst.rho()).unwrap() - 1.0).abs() < 1e-12);
        prop_assert!(kl_divergence(&p, &q, inst.rho()).unwrap() >= -1e-15);
    }

    #[test]
    fn win_rates_are_complementary(seed in any::<u64>()) {
        let mut g = rng(seed);
        let inst = instance(&mut g, 5, 5);
        let (p, q) = (any_policy(&inst, &mut g), any_policy(&inst, &mut g));
        let a = win_rate(&p, &q, inst.r_star(), inst.rho()).unwrap();
        let b = win_rate(&q, &p, inst.r_star(), inst.rho()).unwrap();
        prop_assert!((a + b - 1.0).abs() < 1e-12);
        prop_assert!((win_rate(&p, &p, inst.r_star(), inst.rho()).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn coverage_gap_bound_holds(seed in any::<u64>()) {
        let mut g = rng(seed);
        let inst = instance(&mut g, 6, 6);
        let pi = filtered_policy(&inst, &mut g);
        prop_assert!(satisfies_ratio_bound(&pi, &inst).unwrap());
        let rep = cov_gap_upper_bound(&pi, &inst).unwrap();
        prop_assert!(rep.satisfied, "{rep:?}");
    }

    #[test]
    fn exponential_bound_holds(seed in any::<u64>()) {
        let mut g = rng(seed);
        let inst = instance(&mut g, 5, 5);
        let u = random_reward(inst.num_states(), inst.num_actions(), inst.r_max(), &mut g).unwrap();
        let r = inst.r_star().blend(&u, g.random::<f64>()).unwrap();
        let rep = cov_exp_upper_bound(&r, &inst).unwrap();
        prop_assert!(rep.satisfied, "{rep:?}");
    }

    #[test]
    fn win_rate_lower_bound_holds(seed in any::<u64>()) {
        let mut g = rng(seed);
        let inst = instance(&mut g, 5, 5);
        let pi = any_policy(&inst, &mut g);
        let bar = any_policy(&inst, &mut g);
        let comps = vec![("optimal".to_string(), inst.optimal_policy()), ("bar".to_string(), &bar)];
        let rep = win_rate_cov_lower_bound(&pi, &inst, &comps, &GammaGrid::default()).unwrap();
        prop_assert!(rep.satisfied, "{rep:?}");
    }

    #[test]
    fn tv_chain_holds(seed in any::<u64>(), log_gamma in -6.0f64..9.0) {
        let mut g = rng(seed);
        let mut inst = instance(&mut g, 1, 6);
        while inst.num_states() != 1 {
            inst = instance(&mut g, 1, 6);
        }
        let (p, q) = (any_policy(&inst, &mut g), any_policy(&inst, &mut g));
        let rep = tv_preference_check(&p, &q, &inst, 0, log_gamma.exp()).unwrap();
        prop_assert!(rep.satisfied, "{rep:?}");
    }

    #[test]
    fn sigmoid_bound_holds(c in prop::sample::select(vec![0.5f64, 1.0, 2.0, 5.0]), u in -1.0f64..1.0, v in -1.0f64..1.0) {
        let rep = sigmoid_gap_check(u * c, v * c, c).unwrap();
        prop_assert!(rep.satisfied, "{rep:?}");
    }

    #[test]
    fn reward_error_is_controlled_by_hellinger(seed in any::<u64>()) {
        let mut g = rng(seed);
        let inst = instance(&mut g, 4, 5);
        let (p, q) = (filtered_policy(&inst, &mut g), filtered_policy(&inst, &mut g));
        let r = random_reward(inst.num_states(), inst.num_actions(), inst.r_max(), &mut g).unwrap();
        let rep = reward_error_hellinger_check(&p, &q, &r, &inst).unwrap();
        prop_assert!(rep.satisfied, "{rep:?}");
    }

    #[test]
    fn induced_rewards_recover_members(seed in any::<u64>()) {
        let mut g = rng(seed);
        let inst = instance(&mut g, 4, 5);
        let cls = class(&inst, 4, &mut g);
        for (pi, r) in cls.policies().zip(induced_rewards(&cls, &inst).unwrap()) {
            prop_assert!(r.within(inst.r_max() + 1e-9));
            let back = closed_form_policy(&r, &inst).unwrap();
            prop_assert!(back.max_abs_diff(pi).unwrap() < 1e-9);
        }
    }

    #[test]
    fn best_of_one_is_the_base(seed in any::<u64>()) {
        let mut g = rng(seed);
        let inst = instance(&mut g, 4, 6);
        let base = any_policy(&inst, &mut g);
        let r = random_reward(inst.num_states(), inst.num_actions(), 1.0, &mut g).unwrap();
        let law = bon_policy(&base, &r, 1).unwrap().distribution().unwrap();
        prop_assert!(law.max_abs_diff(&base).unwrap() < 1e-12);
        let law8 = bon_policy(&base, &r, 8).unwrap().distribution().unwrap();
        for row in law8.rows() {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn document_round_trip(seed in any::<u64>()) {
        let mut g = rng(seed);
        let inst = instance(&mut g, 4, 4);
        let cls = class(&inst, 2, &mut g);
        let src = vec![random_reward(inst.num_states(), inst.num_actions(), inst.r_max(), &mut g).unwrap()];
        let doc = InstanceDocument::from_parts(&inst, &src, &cls);
        let json = serde_json::to_string(&doc).unwrap();
        let back: InstanceDocument = serde_json::from_str(&json).unwrap();
        let b = back.to_bundle().unwrap();
        prop_assert!(b.instance.pi_ref().max_abs_diff(inst.pi_ref()).unwrap() < 1e-15);
        prop_assert_eq!(b.class.len(), cls.len());
        prop_assert_eq!(&b.sources, &src);
    }

    #[test]
    fn policy_tags_round_trip(w in 0usize..1000) {
        for tag in [PolicyTag::Reference, PolicyTag::Online, PolicyTag::Distilled, PolicyTag::Source(w)] {
            let json = serde_json::to_string(&tag).unwrap();
            prop_assert_eq!(serde_json::from_str::<PolicyTag>(&json).unwrap(), tag);
        }
    }

    #[test]
    fn derived_seeds_separate_streams(master in any::<u64>(), i in 0u64..1000) {
        prop_assert_ne!(derive_seed(master, "tpo", i), derive_seed(master, "online-only", i));
        prop_assert_ne!(derive_seed(master, "tpo", i), derive_seed(master, "tpo", i + 1));
        prop_assert_eq!(derive_seed(master, "tpo", i), derive_seed(master, "tpo", i));
    }
}

#[test]
fn kappa_is_increasing() {
    let xs: Vec<f64> = (0..1000)
        .map(|k| 1.0 + 1e-7 * (1e9f64).powf(k as f64 / 999.0))
        .collect();
    let ks: Vec<f64> = xs.iter().map(|&x| kappa(x).unwrap()).collect();
    assert!(ks.windows(2).all(|w| w[1] >= w[0]), "kappa not monotone");
    assert!((kappa(1.0f64 + 1e-9).unwrap() - 2.0).abs() < 1e-6);
    assert!(kappa(0.5f64).is_err());
}

#[test]
fn mle_recovers_the_true_member_with_data() {
    let mut g = rng(9);
    let inst = instance(&mut g, 3, 4);
    let cls = class(&inst, 5, &mut g);
    let mut data = kltransfer_core::bandit::PreferenceDataset::new();
    for _ in 0..20_000 {
        let s = kltransfer_core::bandit::sample_index(inst.rho(), &mut g);
        let a = kltransfer_core::bandit::sample_index(inst.pi_ref().row(s), &mut g);
        let at = kltransfer_core::bandit::sample_index(inst.pi_ref().row(s), &mut g);
        let p = kltransfer_core::bandit::bt_prob(inst.r_star(), s, a, at);
        let y = g.random::<f64>() < p;
        data.push(PreferenceSample {
            s,
            a,
            a_tilde: at,
            y,
            producer: PolicyTag::Online,
            comparator: PolicyTag::Reference,
        });
    }
    let fit = mle_fit(&cls, &data, &inst).unwrap();
    let star = cls.position_of(inst.optimal_policy(), 1e-12).unwrap();
    let losses: Vec<f64> = induced_rewards(&cls, &inst)
        .unwrap()
        .iter()
        .map(|r| nll_loss(r, &data).unwrap())
        .collect();
    assert_abs_diff_eq!(fit.loss, losses[fit.index], epsilon = 1e-12);
    assert!(
        closed_form_policy(&fit.reward, &inst)
            .unwrap()
            .max_abs_diff(cls.policy(star))
            .unwrap()
            < 1e-9
    );
}

#[test]
fn f32_and_f64_agree() {
    let mut g = rng(4);
    let inst: Instance = instance(&mut g, 4, 5);
    let pi: Policy = any_policy(&inst, &mut g);
    let inst32 = kltransfer_core::bandit::BanditInstance::<f32>::new(
        inst.rho().iter().map(|&x| x as f32).collect(),
        inst.pi_ref().cast().unwrap(),
        inst.beta() as f32,
        inst.r_max() as f32,
        inst.r_star().cast().unwrap(),
    )
    .unwrap();
    let pi32: PolicyTable<f32> = pi.cast().unwrap();
    let v64 = policy_value(&pi, inst.r_star(), &inst).unwrap();
    let v32 = policy_value(&pi32, inst32.r_star(), &inst32).unwrap();
    assert!((v64 - v32 as f64).abs() < 1e-4);
    assert!((inst.optimal_value() - inst32.optimal_value() as f64).abs() < 1e-4);
    let r: RewardTable<f32> = inst32.r_star().clone();
    assert!(
        closed_form_policy(&r, &inst32)
            .unwrap()
            .max_abs_diff(inst32.optimal_policy())
            .unwrap()
            < 1e-6
    );
}
