mod common;

use proptest::prelude::*;
use rand::Rng;

use kltransfer_core::bandit::{
    bon_policy, closed_form_policy, sample_bernoulli, sample_index, win_rate, PolicyTable,
    PolicyTag, PreferenceDataset, PreferenceSample,
};
use kltransfer_core::empirical::{
    empirical_tpo_run, po_update, ucb_select, Arm, EmpiricalConfig, PoKind, PolicyOptimizer,
    SourceRealization, UcbConfig, UcbState,
};
use kltransfer_core::random::{random_instance, random_policy};
use kltransfer_core::{Instance, Reward};

use common::*;

fn random_data(ns: usize, na: usize, len: usize, g: &mut impl Rng) -> PreferenceDataset {
    let mut d = PreferenceDataset::new();
    for _ in 0..len {
        d.push(PreferenceSample {
            s: g.random_range(0..ns),
            a: g.random_range(0..na),
            a_tilde: g.random_range(0..na),
            y: g.random(),
            producer: PolicyTag::Online,
            comparator: PolicyTag::Online,
        });
    }
    d
}

#[test]
fn analytic_gradients_match_finite_differences() {
    let eps = 1e-5;
    let mut g = rng(31);
    for case in 0..50 {
        let ns = g.random_range(1..=4);
        let na = g.random_range(2..=5);
        let pi_ref = random_policy(ns, na, 1.0, &mut g).unwrap();
        let data = random_data(ns, na, g.random_range(1..=30), &mut g);
        let logits: Vec<f64> = (0..ns * na).map(|_| g.random_range(-2.0..2.0)).collect();
        let beta_po = g.random_range(0.1..2.0);
        for kind in [PoKind::Dpo, PoKind::Ipo, PoKind::Xpo] {
            let opt = PolicyOptimizer::new(kind, &pi_ref, 0.1, 1, beta_po)
                .unwrap()
                .with_alpha_xpo(g.random_range(0.0..1.0));
            let (_, grad) = opt.loss_and_gradient(&logits, &pi_ref, &data).unwrap();
            let fd: Vec<f64> = (0..logits.len())
                .map(|i| {
                    let mut up = logits.clone();
                    let mut down = logits.clone();
                    up[i] += eps;
                    down[i] -= eps;
                    let f = |l: &[f64]| opt.loss_at(l, &pi_ref, &data).unwrap();
                    (f(&up) - f(&down)) / (2.0 * eps)
                })
                .collect();
            let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let diff: Vec<f64> = grad.iter().zip(&fd).map(|(a, b)| a - b).collect();
            let rel = norm(&diff) / norm(&fd).max(1e-2);
            assert!(rel < 1e-6, "case {case} {kind:?}: relative error {rel:e}");
        }
    }
}

#[test]
fn dpo_prefers_the_winning_action() {
    let pi_ref = PolicyTable::uniform(1, 2).unwrap();
    let mut data = PreferenceDataset::new();
    for _ in 0..10 {
        data.push(PreferenceSample {
            s: 0,
            a: 0,
            a_tilde: 1,
            y: true,
            producer: PolicyTag::Online,
            comparator: PolicyTag::Online,
        });
    }
    let mut opt = PolicyOptimizer::new(PoKind::Dpo, &pi_ref, 0.1, 1, 1.0).unwrap();
    let mut prev_loss = opt.loss_at(opt.logits(), &pi_ref, &data).unwrap();
    let mut prev_p = opt.policy().unwrap().get(0, 0);
    for _ in 0..100 {
        opt = po_update(&opt, &pi_ref, &data).unwrap();
        let loss = opt.loss_at(opt.logits(), &pi_ref, &data).unwrap();
        let p = opt.policy().unwrap().get(0, 0);
        assert!(loss < prev_loss && p > prev_p);
        (prev_loss, prev_p) = (loss, p);
    }
    assert!(po_update(&opt, &pi_ref, &PreferenceDataset::new()).is_err());
}

#[test]
fn stationary_bernoulli_arms() {
    // Pooled over seeds. A seed can lock out the good arm when an unlucky
    // start pushes its index below the constant online score; the online
    // arm then takes the rest of the pulls.
    let means = [0.7, 0.4];
    let mut pooled = 0;
    for seed in 0..50 {
        let mut g = rng(seed);
        let mut state = UcbState::new(2, UcbConfig::default());
        let mut first = 0;
        for _ in 0..2000 {
            let (arm, _) = ucb_select(&state);
            let p = match arm {
                Arm::Source(w) => means[w],
                Arm::Online => 0.5,
            };
            if arm == Arm::Source(0) {
                first += 1;
            }
            state.record(arm, sample_bernoulli(p, &mut g));
        }
        assert_eq!(state.total_count(), 2000);
        if first < 1800 {
            assert!(
                state.score(Arm::Source(0)) <= state.config.wr_self,
                "seed {seed}: {first}"
            );
        }
        pooled += first;
    }
    assert!(pooled as f64 >= 0.9 * 50.0 * 2000.0, "{pooled}");
}

#[test]
fn poor_sources_hand_control_back_to_the_online_arm() {
    let mut state = UcbState::new(3, UcbConfig::default());
    for w in 0..3 {
        for i in 0..10_000 {
            state.record(Arm::Source(w), i % 10 < 3);
        }
    }
    assert_eq!(ucb_select(&state).0, Arm::Online);
    assert_eq!(
        ucb_select(&UcbState::new(3, UcbConfig::default())).0,
        Arm::Source(0)
    );
}

proptest! {
    #[test]
    fn tie_against_wr_self_is_scale_free(
        n in 1u64..500, wins_frac in 0.0f64..1.0, c in 0.01f64..5.0, scale in 0.01f64..100.0, w in 1usize..5,
    ) {
        let wins = (wins_frac * n as f64).round() as u64;
        let build = |c_ucb: f64| {
            let mut s = UcbState::new(w, UcbConfig { c_ucb, wr_self: 0.5 });
            for arm in 0..w {
                for i in 0..n {
                    s.record(Arm::Source(arm), i < wins);
                }
            }
            s
        };
        let base = build(c);
        // every source has the same score; place wr_self exactly on it
        let tie = base.score(Arm::Source(0));
        let mut tied = base.clone();
        tied.config.wr_self = tie;
        let mut tied_scaled = build(c * scale);
        tied_scaled.config.wr_self = tied_scaled.score(Arm::Source(0));
        prop_assert_eq!(ucb_select(&tied).0, Arm::Online);
        prop_assert_eq!(ucb_select(&tied_scaled).0, Arm::Online);
        let mut below = base.clone();
        below.config.wr_self = -1.0;
        let mut below_scaled = build(c * scale);
        below_scaled.config.wr_self = -1.0;
        prop_assert_eq!(ucb_select(&below).0, Arm::Source(0));
        prop_assert_eq!(ucb_select(&below_scaled).0, Arm::Source(0));
    }
}

fn sources_for(inst: &Instance, g: &mut impl Rng) -> Vec<Reward> {
    let mut v = vec![inst.r_star().clone()];
    for _ in 0..2 {
        let u = kltransfer_core::random::random_reward(
            inst.num_states(),
            inst.num_actions(),
            inst.r_max(),
            g,
        )
        .unwrap();
        v.push(u);
    }
    v
}

#[test]
fn ucb_bookkeeping_matches_block_sizes() {
    let mut g = rng(3);
    let inst = random_instance(4, 5, 0.5, 2.0, &mut g).unwrap();
    let cfg = EmpiricalConfig::new(3, 200, sources_for(&inst, &mut g));
    let opt = PolicyOptimizer::new(PoKind::Dpo, inst.pi_ref(), 1.0, 50, 0.5).unwrap();
    let res = empirical_tpo_run(&cfg, &inst, &opt, 9).unwrap();
    assert_eq!(res.block_stats.len(), 3);
    assert_eq!(res.block_policies.len(), 4);
    assert_eq!(res.selections.len(), 600);
    assert!(res.block_policies[0].max_abs_diff(inst.pi_ref()).unwrap() < 1e-12);
    for (k, stats) in res.block_stats.iter().enumerate() {
        assert_eq!(stats.total_count(), 200);
        let shares: f64 = res.block_shares(k + 1).iter().map(|x| x.1).sum();
        assert!((shares - 1.0).abs() < 1e-12);
        for arm in [Arm::Online, Arm::Source(0), Arm::Source(1), Arm::Source(2)] {
            if let Some(p) = stats.win_rate(arm) {
                assert!((0.0..=1.0).contains(&p));
            }
        }
    }
    let again = empirical_tpo_run(&cfg, &inst, &opt, 9).unwrap();
    assert_eq!(again.selections, res.selections);
}

#[test]
fn win_statistics_track_exact_win_rates() {
    let mut checked = 0;
    let mut ok = 0;
    let mut blocks = 0;
    for seed in 0..50 {
        let mut g = rng(1000 + seed);
        let inst = random_instance(4, 5, 0.5, 2.0, &mut g).unwrap();
        let mut cfg = EmpiricalConfig::new(4, 400, sources_for(&inst, &mut g));
        cfg.realization = if seed % 2 == 0 {
            SourceRealization::Exact
        } else {
            SourceRealization::BestOfN { n: 8 }
        };
        let opt = PolicyOptimizer::new(PoKind::Dpo, inst.pi_ref(), 1.0, 100, 0.5).unwrap();
        let res = empirical_tpo_run(&cfg, &inst, &opt, seed).unwrap();
        for (k, stats) in res.block_stats.iter().enumerate() {
            blocks += 1;
            let pi_ol = &res.block_policies[k];
            let mut block_ok = true;
            for (w, r) in cfg.sources.iter().enumerate() {
                let arm = Arm::Source(w);
                let n = stats.count(arm);
                if n < 100 {
                    continue;
                }
                let policy = match cfg.realization {
                    SourceRealization::Exact => closed_form_policy(r, &inst).unwrap(),
                    SourceRealization::BestOfN { n } => {
                        bon_policy(pi_ol, r, n).unwrap().distribution().unwrap()
                    }
                };
                let p = win_rate(&policy, pi_ol, inst.r_star(), inst.rho()).unwrap();
                let est = stats.win_rate(arm).unwrap();
                checked += 1;
                block_ok &= (est - p).abs() <= 3.0 * (p * (1.0 - p) / n as f64).sqrt();
            }
            ok += usize::from(block_ok);
        }
    }
    assert_eq!(blocks, 200);
    assert!(checked > 100, "only {checked} arms reached 100 pulls");
    assert!(ok as f64 >= 0.95 * blocks as f64, "{ok}/{blocks}");
}

#[test]
fn without_sources_every_step_is_online() {
    let mut g = rng(8);
    let inst = random_instance(3, 4, 0.5, 1.0, &mut g).unwrap();
    let cfg = EmpiricalConfig::new(3, 50, Vec::new());
    let opt = PolicyOptimizer::new(PoKind::Ipo, inst.pi_ref(), 0.5, 20, 0.5).unwrap();
    let res = empirical_tpo_run(&cfg, &inst, &opt, 1).unwrap();
    assert!(res.selections.iter().all(|s| s.arm_tag == Arm::Online));
    assert!(res
        .data
        .iter()
        .all(|x| x.producer == PolicyTag::Online && x.comparator == PolicyTag::Online));
    let mut csv = Vec::new();
    res.write_selection_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("block,inner,arm_tag,ucb_score,y\n"));
    assert!(text.lines().nth(1).unwrap().contains(",online,"));
}

#[test]
fn comparator_draws_follow_the_block_policy() {
    // ã is drawn from π^k_OL; with a one-hot-like online policy the comparator is fixed.
    let mut g = rng(2);
    let inst = random_instance(1, 3, 0.5, 1.0, &mut g).unwrap();
    let cfg = EmpiricalConfig::new(1, 500, Vec::new());
    let opt = PolicyOptimizer::new(PoKind::Dpo, inst.pi_ref(), 0.5, 1, 0.5).unwrap();
    let res = empirical_tpo_run(&cfg, &inst, &opt, 4).unwrap();
    let mut counts = [0usize; 3];
    for x in res.data.iter() {
        counts[x.a_tilde] += 1;
    }
    for a in 0..3 {
        let p = inst.pi_ref().get(0, a);
        let f = counts[a] as f64 / 500.0;
        assert!(
            (f - p).abs() < 4.0 * (p * (1.0 - p) / 500.0).sqrt() + 1e-9,
            "{counts:?}"
        );
    }
    let _ = sample_index(inst.rho(), &mut g);
}
