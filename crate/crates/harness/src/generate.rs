use rand::seq::SliceRandom;
use rand::Rng;

use kltransfer_core::bandit::{
    bounded_ratio_filter, closed_form_policy, policy_value, InstanceBundle,
};
use kltransfer_core::random::{random_instance, random_reward};
use kltransfer_core::seed::{derive_seed, rng_from_seed};
use kltransfer_core::{Class, Instance, Reward};

use crate::config::GeneratorSpec;
use crate::error::{HarnessError, Result};

/// Relative tolerance on the realized value gap of each source.
pub const DELTA_TOLERANCE: f64 = 0.05;
pub const MAX_BISECTION_ITERS: usize = 100;

/// Value gap J(π*) − J(π*_r) of the policy induced by `r`.
pub fn value_gap(r: &Reward, inst: &Instance) -> Result<f64> {
    let pi = closed_form_policy(r, inst)?;
    Ok(inst.optimal_value() - policy_value(&pi, inst.r_star(), inst)?)
}

/// Reward on the piecewise-linear path r* → u → r_max − r* → worst at
/// t ∈ [0, 3], where `worst` pays r_max only on each state's lowest-r* action.
fn path_reward(
    inst: &Instance,
    u: &Reward,
    anti: &Reward,
    worst: &Reward,
    t: f64,
) -> Result<Reward> {
    Ok(match t {
        t if t <= 1.0 => inst.r_star().blend(u, t)?,
        t if t <= 2.0 => u.blend(anti, t - 1.0)?,
        t => anti.blend(worst, t - 2.0)?,
    })
}

fn worst_reward(inst: &Instance) -> Result<Reward> {
    let r = inst.r_star();
    let lowest: Vec<usize> = r
        .rows()
        .map(|row| (0..row.len()).fold(0, |m, a| if row[a] < row[m] { a } else { m }))
        .collect();
    Ok(r.map(|s, a, _| if a == lowest[s] { inst.r_max() } else { 0.0 })?)
}

/// Source reward whose value gap is within 5% of `target`, found by bisection
/// on the blend weight along r* → u → r_max − r* → (worst action only).
pub fn source_with_gap<R: Rng + ?Sized>(
    inst: &Instance,
    target: f64,
    rng: &mut R,
) -> Result<Reward> {
    let u = random_reward(inst.num_states(), inst.num_actions(), inst.r_max(), rng)?;
    if target == 0.0 {
        return Ok(inst.r_star().clone());
    }
    let r_max = inst.r_max();
    let anti = inst.r_star().map(|_, _, v| r_max - v)?;
    let worst = worst_reward(inst)?;
    let tol = DELTA_TOLERANCE * target;
    let (mut lo, mut hi) = (0.0, 3.0);
    let mut best = (f64::INFINITY, inst.r_star().clone());
    for _ in 0..MAX_BISECTION_ITERS {
        let mid = 0.5 * (lo + hi);
        let r = path_reward(inst, &u, &anti, &worst, mid)?;
        let gap = value_gap(&r, inst)?;
        if (gap - target).abs() <= tol {
            return Ok(r);
        }
        if (gap - target).abs() < best.0 {
            best = ((gap - target).abs(), r);
        }
        if gap < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let max_gap = value_gap(&worst, inst)?;
    Err(HarnessError::Generation(format!(
        "could not reach value gap {target:.6} within {MAX_BISECTION_ITERS} bisection steps \
         (closest miss {:.3e}, gap at the path end is {max_gap:.6})",
        best.0
    )))
}

/// Draws an instance, one source per Δ target and a realizable, ratio-filtered
/// class {π*} ∪ {π*_u} ∪ {π_ref} in random order. Each class reward u blends
/// r* with a uniform random reward at a uniform random weight, so the class
/// holds members at every distance from π*.
pub fn generate_instance(spec: &GeneratorSpec, seed: u64) -> Result<InstanceBundle> {
    spec.validate()?;
    let s = &spec.instance;
    let mut rng = rng_from_seed(derive_seed(seed, "instance", 0));
    let inst: Instance = random_instance(s.num_states, s.num_actions, s.beta, s.r_max, &mut rng)?;
    let sources = spec
        .sources
        .deltas
        .iter()
        .map(|&d| source_with_gap(&inst, d * s.r_max, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let mut members = vec![inst.optimal_policy().clone(), inst.pi_ref().clone()];
    for _ in 0..s.class_size {
        let u = random_reward(s.num_states, s.num_actions, s.r_max, &mut rng)?;
        let w = rng.random::<f64>();
        members.push(closed_form_policy(&inst.r_star().blend(&u, w)?, &inst)?);
    }
    members.shuffle(&mut rng);
    let class = bounded_ratio_filter(&Class::new(members)?, &inst)?;
    let class = Class::new(class.policies().cloned().collect())?;
    if !class.is_realizable(&inst) {
        return Err(HarnessError::Generation(
            "generated class does not contain the optimal policy".into(),
        ));
    }
    Ok(InstanceBundle {
        instance: inst,
        sources,
        class,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{InstanceSpec, SourceSpec};

    fn spec(deltas: Vec<f64>) -> GeneratorSpec {
        GeneratorSpec {
            instance: InstanceSpec {
                num_states: 4,
                num_actions: 5,
                beta: 0.1,
                r_max: 1.0,
                class_size: 6,
                seed: 0,
            },
            sources: SourceSpec { deltas },
        }
    }

    #[test]
    fn zero_gap_source_is_the_true_reward() {
        let b = generate_instance(&spec(vec![0.0]), 3).unwrap();
        assert_eq!(b.sources[0], *b.instance.r_star());
    }

    #[test]
    fn realized_gaps_hit_targets() {
        for seed in 0..5 {
            let b = generate_instance(&spec(vec![0.1, 0.3]), seed).unwrap();
            for (r, t) in b.sources.iter().zip([0.1, 0.3]) {
                let gap = value_gap(r, &b.instance).unwrap();
                assert!(
                    (gap - t).abs() <= 0.05 * t,
                    "seed {seed}: gap {gap} target {t}"
                );
                assert!(r.within(1.0));
            }
            assert_eq!(b.class.len(), 8);
            assert!(b.class.is_realizable(&b.instance));
            assert!(b.class.position_of(b.instance.pi_ref(), 1e-12).is_some());
        }
    }

    #[test]
    fn unreachable_gap_is_a_generation_error() {
        let mut s = spec(vec![1.0]);
        s.instance.beta = 10.0;
        assert!(matches!(
            generate_instance(&s, 1),
            Err(HarnessError::Generation(_))
        ));
    }
}
