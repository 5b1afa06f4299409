#![allow(dead_code)]

use kltransfer_core::bandit::{closed_form_policy, PolicyTable, RewardTable};
use kltransfer_core::random::{random_instance, random_policy, random_reward};
use kltransfer_core::seed::rng_from_seed;
use kltransfer_core::{Class, Instance, Policy, Reward};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rng_from_seed(seed)
}

/// One state, two actions, r* = (1, 0), β = 1, uniform reference.
pub fn worked_instance() -> Instance {
    Instance::new(
        vec![1.0],
        PolicyTable::uniform(1, 2).unwrap(),
        1.0,
        1.0,
        RewardTable::from_rows(&[vec![1.0, 0.0]]).unwrap(),
    )
    .unwrap()
}

pub fn instance(rng: &mut ChaCha8Rng, max_states: usize, max_actions: usize) -> Instance {
    let ns = rng.random_range(1..=max_states);
    let na = rng.random_range(2..=max_actions);
    let beta = [0.1, 0.3, 1.0, 3.0][rng.random_range(0..4)];
    let r_max = [0.5, 1.0, 2.0][rng.random_range(0..3)];
    random_instance(ns, na, beta, r_max, rng).unwrap()
}

/// Policy that passes the ratio filter: the optimum of a random bounded reward.
pub fn filtered_policy(inst: &Instance, rng: &mut ChaCha8Rng) -> Policy {
    let u: Reward =
        random_reward(inst.num_states(), inst.num_actions(), inst.r_max(), rng).unwrap();
    closed_form_policy(&u, inst).unwrap()
}

/// Dirichlet policy with a random concentration, from spiky to flat.
pub fn any_policy(inst: &Instance, rng: &mut ChaCha8Rng) -> Policy {
    let c = [0.3, 1.0, 5.0][rng.random_range(0..3)];
    random_policy(inst.num_states(), inst.num_actions(), c, rng).unwrap()
}

/// Realizable class: π*, π_ref and `extra` filtered random members.
pub fn class(inst: &Instance, extra: usize, rng: &mut ChaCha8Rng) -> Class {
    let mut members = vec![inst.optimal_policy().clone(), inst.pi_ref().clone()];
    members.extend((0..extra).map(|_| filtered_policy(inst, rng)));
    Class::new(members).unwrap()
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    0.5 * (v[(n - 1) / 2] + v[n / 2])
}

/// Realizable class whose extra members are optima of r* blended with a random
/// reward at a random weight, so members sit at all distances from π*.
pub fn blended_class(inst: &Instance, extra: usize, rng: &mut ChaCha8Rng) -> Class {
    let mut members = vec![inst.optimal_policy().clone(), inst.pi_ref().clone()];
    for _ in 0..extra {
        let u: Reward =
            random_reward(inst.num_states(), inst.num_actions(), inst.r_max(), rng).unwrap();
        let w = rng.random::<f64>();
        members.push(closed_form_policy(&inst.r_star().blend(&u, w).unwrap(), inst).unwrap());
    }
    Class::new(members).unwrap()
}
