//! Exact primitives of the KL-regularized objective.

use std::borrow::Borrow;

use rand::Rng;

use super::instance::BanditInstance;
use super::policy::{ensure_same_dims, PolicyTable};
use super::reward::RewardTable;
use super::sampling::{sample_bernoulli, sample_index};
use crate::error::{Error, Result};
use crate::scalar::{sigmoid, Scalar};

fn check_rho<T: Scalar>(rho: &[T], num_states: usize) -> Result<()> {
    if rho.len() != num_states {
        return Err(Error::DimensionMismatch {
            expected: format!("{num_states} states"),
            found: format!("rho of length {}", rho.len()),
        });
    }
    Ok(())
}

/// π*_r(a|s) ∝ π_ref(a|s)·exp(r(s,a)/β), with the exponent shifted by the row
/// maximum of r so that small β cannot overflow.
pub fn closed_form_policy<T: Scalar>(
    r: &RewardTable<T>,
    inst: &BanditInstance<T>,
) -> Result<PolicyTable<T>> {
    ensure_same_dims(inst.dims(), r.dims())?;
    let beta = inst.beta();
    let mut w = Vec::with_capacity(r.as_slice().len());
    for (s, row) in r.rows().enumerate() {
        let m = row.iter().copied().fold(T::neg_infinity(), T::max);
        let ref_row = inst.pi_ref().row(s);
        w.extend(
            row.iter()
                .zip(ref_row)
                .map(|(&v, &p)| p * ((v - m) / beta).exp()),
        );
    }
    PolicyTable::from_weights(r.num_states(), r.num_actions(), w)
}

/// E_{s∼ρ, a∼π}[r(s,a)].
pub fn expected_reward<T: Scalar>(pi: &PolicyTable<T>, r: &RewardTable<T>, rho: &[T]) -> Result<T> {
    ensure_same_dims(pi.dims(), r.dims())?;
    check_rho(rho, pi.num_states())?;
    Ok(rho
        .iter()
        .enumerate()
        .map(|(s, &q)| {
            q * pi
                .row(s)
                .iter()
                .zip(r.row(s))
                .map(|(&p, &v)| p * v)
                .sum::<T>()
        })
        .sum())
}

/// Σ_s ρ(s)·KL(π(·|s) ‖ π2(·|s)).
pub fn kl_divergence<T: Scalar>(pi: &PolicyTable<T>, pi2: &PolicyTable<T>, rho: &[T]) -> Result<T> {
    ensure_same_dims(pi.dims(), pi2.dims())?;
    check_rho(rho, pi.num_states())?;
    Ok(rho
        .iter()
        .enumerate()
        .map(|(s, &q)| {
            q * pi
                .row(s)
                .iter()
                .zip(pi2.row(s))
                .map(|(&p, &p2)| p * (p / p2).ln())
                .sum::<T>()
        })
        .sum())
}

/// J_β(π; r) = E_{ρ,π}[r] − β·KL(π ‖ π_ref).
pub fn policy_value<T: Scalar>(
    pi: &PolicyTable<T>,
    r: &RewardTable<T>,
    inst: &BanditInstance<T>,
) -> Result<T> {
    ensure_same_dims(inst.dims(), pi.dims())?;
    Ok(expected_reward(pi, r, inst.rho())?
        - inst.beta() * kl_divergence(pi, inst.pi_ref(), inst.rho())?)
}

/// Cov^{target|base} = E_{s∼ρ, a∼target}[target(a|s)/base(a|s)].
pub fn coverage_coefficient<T: Scalar>(
    target: &PolicyTable<T>,
    base: &PolicyTable<T>,
    rho: &[T],
) -> Result<T> {
    ensure_same_dims(target.dims(), base.dims())?;
    check_rho(rho, target.num_states())?;
    Ok(rho
        .iter()
        .enumerate()
        .map(|(s, &q)| {
            q * target
                .row(s)
                .iter()
                .zip(base.row(s))
                .map(|(&t, &b)| t * t / b)
                .sum::<T>()
        })
        .sum())
}

/// Reward inducing π: β·log(π/π_ref) shifted so each row's minimum is zero,
/// then clipped to [0, r_max].
pub fn reward_from_policy<T: Scalar>(
    pi: &PolicyTable<T>,
    inst: &BanditInstance<T>,
) -> Result<RewardTable<T>> {
    ensure_same_dims(inst.dims(), pi.dims())?;
    let beta = inst.beta();
    let mut values = Vec::with_capacity(pi.as_slice().len());
    for s in 0..pi.num_states() {
        let logr: Vec<T> = pi
            .row(s)
            .iter()
            .zip(inst.pi_ref().row(s))
            .map(|(&p, &q)| beta * (p / q).ln())
            .collect();
        let m = logr.iter().copied().fold(T::infinity(), T::min);
        values.extend(
            logr.iter()
                .map(|&l| (l - m).max(T::zero()).min(inst.r_max())),
        );
    }
    RewardTable::new(pi.num_states(), pi.num_actions(), values)
}

/// Largest |log(π(a|s)/π_ref(a|s))| over the table.
pub fn max_abs_log_ratio<T: Scalar>(pi: &PolicyTable<T>, pi_ref: &PolicyTable<T>) -> Result<T> {
    ensure_same_dims(pi.dims(), pi_ref.dims())?;
    Ok(pi
        .as_slice()
        .iter()
        .zip(pi_ref.as_slice())
        .map(|(&p, &q)| (p / q).ln().abs())
        .fold(T::zero(), T::max))
}

/// Entrywise convex combination Σ_i w_i·π_i.
pub fn mixture_policy<T: Scalar, P: Borrow<PolicyTable<T>>>(
    policies: &[P],
    weights: &[T],
) -> Result<PolicyTable<T>> {
    let first = policies
        .first()
        .ok_or_else(|| Error::InvalidInput("no policies to mix".into()))?
        .borrow();
    if policies.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} weights", policies.len()),
            found: format!("{} weights", weights.len()),
        });
    }
    let weights = super::instance::validate_distribution(weights.to_vec())?;
    let mut acc = vec![T::zero(); first.as_slice().len()];
    for (p, &w) in policies.iter().zip(&weights) {
        let p = p.borrow();
        ensure_same_dims(first.dims(), p.dims())?;
        if w == T::zero() {
            continue;
        }
        acc.iter_mut()
            .zip(p.as_slice())
            .for_each(|(x, &v)| *x = *x + w * v);
    }
    PolicyTable::from_weights(first.num_states(), first.num_actions(), acc)
}

/// Bradley–Terry probability that `a` is preferred to `a_tilde` at `s`.
pub fn bt_prob<T: Scalar>(r: &RewardTable<T>, s: usize, a: usize, a_tilde: usize) -> T {
    sigmoid(r.get(s, a) - r.get(s, a_tilde))
}

/// Draws a preference label with success probability `p`.
pub fn sample_label<T: Scalar, R: Rng + ?Sized>(p: T, rng: &mut R) -> bool {
    sample_bernoulli(p, rng)
}

/// Exact win rate P_r(π ≻ π2) = E_{s∼ρ, a∼π, a'∼π2}[σ(r(s,a) − r(s,a'))].
pub fn win_rate<T: Scalar>(
    pi: &PolicyTable<T>,
    pi2: &PolicyTable<T>,
    r: &RewardTable<T>,
    rho: &[T],
) -> Result<T> {
    ensure_same_dims(pi.dims(), pi2.dims())?;
    ensure_same_dims(pi.dims(), r.dims())?;
    check_rho(rho, pi.num_states())?;
    let mut total = T::zero();
    for (s, &q) in rho.iter().enumerate() {
        let mut inner = T::zero();
        for (a, &p) in pi.row(s).iter().enumerate() {
            for (a2, &p2) in pi2.row(s).iter().enumerate() {
                inner = inner + p * p2 * bt_prob(r, s, a, a2);
            }
        }
        total = total + q * inner;
    }
    Ok(total)
}

/// Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
}

/// Unbiased Monte-Carlo win rate: averages σ(r(s,a) − r(s,a')) over `n` draws
/// of (s, a, a').
pub fn win_rate_mc<T: Scalar, R: Rng + ?Sized>(
    pi: &PolicyTable<T>,
    pi2: &PolicyTable<T>,
    r: &RewardTable<T>,
    rho: &[T],
    n: usize,
    rng: &mut R,
) -> Result<McEstimate> {
    ensure_same_dims(pi.dims(), pi2.dims())?;
    ensure_same_dims(pi.dims(), r.dims())?;
    check_rho(rho, pi.num_states())?;
    if n < 2 {
        return Err(Error::InvalidInput(
            "need at least two Monte-Carlo draws".into(),
        ));
    }
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..n {
        let s = sample_index(rho, rng);
        let a = sample_index(pi.row(s), rng);
        let a2 = sample_index(pi2.row(s), rng);
        let x = bt_prob(r, s, a, a2).as_f64();
        sum += x;
        sum_sq += x * x;
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    Ok(McEstimate {
        mean,
        std_error: (var / nf).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn worked() -> BanditInstance<f64> {
        BanditInstance::new(
            vec![1.0],
            PolicyTable::uniform(1, 2).unwrap(),
            1.0,
            1.0,
            RewardTable::from_rows(&[vec![1.0, 0.0]]).unwrap(),
        )
        .unwrap()
    }

    fn single(p: f64) -> PolicyTable<f64> {
        PolicyTable::from_rows(&[vec![p, 1.0 - p]]).unwrap()
    }

    const SIGMA1: f64 = 0.731_058_578_630_004_9;

    #[test]
    fn closed_form_worked_example() {
        let inst = worked();
        let pi = closed_form_policy(inst.r_star(), &inst).unwrap();
        assert!((pi.get(0, 0) - SIGMA1).abs() < 1e-15);
        assert!((pi.get(0, 1) - (1.0 - SIGMA1)).abs() < 1e-15);
    }

    #[test]
    fn constant_reward_gives_reference() {
        let pi_ref = PolicyTable::from_rows(&[vec![0.2, 0.3, 0.5], vec![0.6, 0.1, 0.3]]).unwrap();
        let r = RewardTable::from_rows(&[vec![0.0; 3], vec![0.0; 3]]).unwrap();
        let inst = BanditInstance::new(vec![0.5, 0.5], pi_ref.clone(), 0.3, 1.0, r).unwrap();
        let c = RewardTable::from_rows(&[vec![0.7; 3], vec![0.1; 3]]).unwrap();
        let pi = closed_form_policy(&c, &inst).unwrap();
        assert!(pi.max_abs_diff(&pi_ref).unwrap() < 1e-15);
    }

    #[test]
    fn large_beta_stays_at_reference() {
        let r = RewardTable::from_rows(&[vec![1.0, 0.0]]).unwrap();
        let inst = BanditInstance::new(vec![1.0], PolicyTable::uniform(1, 2).unwrap(), 1e6, 1.0, r)
            .unwrap();
        let pi = closed_form_policy(inst.r_star(), &inst).unwrap();
        assert!(pi.max_abs_diff(inst.pi_ref()).unwrap() < 1e-5);
    }

    #[test]
    fn small_beta_does_not_overflow() {
        let r = RewardTable::from_rows(&[vec![1.0, 0.99]]).unwrap();
        let inst =
            BanditInstance::new(vec![1.0], PolicyTable::uniform(1, 2).unwrap(), 1e-3, 1.0, r)
                .unwrap();
        let pi = inst.optimal_policy();
        assert!((pi.get(0, 1) - 1.0 / (1.0 + 10f64.exp())).abs() < 1e-15);
    }

    #[test]
    fn values_and_kl_worked_example() {
        let inst = worked();
        let pi_star = inst.optimal_policy();
        let u = inst.pi_ref();
        assert!((policy_value(u, inst.r_star(), &inst).unwrap() - 0.5).abs() < 1e-15);
        assert!(
            (policy_value(pi_star, inst.r_star(), &inst).unwrap() - 0.620_114_506_958_278).abs()
                < 1e-14
        );
        assert!(
            (kl_divergence(pi_star, u, inst.rho()).unwrap() - 0.110_944_071_671_727).abs() < 1e-14
        );
        assert!(
            (kl_divergence(u, pi_star, inst.rho()).unwrap() - 0.120_114_506_958_278).abs() < 1e-14
        );
        assert_eq!(kl_divergence(u, u, inst.rho()).unwrap(), 0.0);
    }

    #[test]
    fn coverage_examples() {
        let u = PolicyTable::<f64>::uniform(1, 2).unwrap();
        assert!((coverage_coefficient(&u, &u, &[1.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((coverage_coefficient(&single(0.8), &u, &[1.0]).unwrap() - 1.36).abs() < 1e-14);
        let inst = worked();
        let c = coverage_coefficient(inst.optimal_policy(), &u, &[1.0]).unwrap();
        assert!((c - 1.213_552_267_034_073).abs() < 1e-14);
    }

    #[test]
    fn reward_from_policy_examples() {
        let inst = worked();
        let r0 = reward_from_policy(inst.pi_ref(), &inst).unwrap();
        assert_eq!(r0.as_slice(), &[0.0, 0.0]);
        let r = reward_from_policy(inst.optimal_policy(), &inst).unwrap();
        assert!((r.get(0, 0) - 1.0).abs() < 1e-14);
        assert_eq!(r.get(0, 1), 0.0);
        let back = closed_form_policy(&r, &inst).unwrap();
        assert!(back.max_abs_diff(inst.optimal_policy()).unwrap() < 1e-14);
    }

    #[test]
    fn log_ratio_of_near_deterministic_policy() {
        let u = PolicyTable::<f64>::uniform(1, 2).unwrap();
        let m = max_abs_log_ratio(&single(0.999), &u).unwrap();
        assert!((m - 6.214_608_098_422_192).abs() < 1e-12);
    }

    #[test]
    fn mixture_examples() {
        let (p, q) = (single(0.8), single(0.2));
        let m = mixture_policy(&[&p, &q], &[0.5, 0.5]).unwrap();
        assert!((m.get(0, 0) - 0.5).abs() < 1e-15);
        assert_eq!(mixture_policy(&[&p, &q], &[1.0, 0.0]).unwrap(), p);
        assert!(mixture_policy(&[&p, &q], &[0.5]).is_err());
        assert!(mixture_policy(&[&p, &q], &[0.7, 0.7]).is_err());
    }

    #[test]
    fn bt_examples() {
        let r = RewardTable::<f64>::from_rows(&[vec![1.0, 0.0, 1.0]]).unwrap();
        assert_eq!(bt_prob(&r, 0, 0, 2), 0.5);
        assert!((bt_prob(&r, 0, 0, 1) - SIGMA1).abs() < 1e-15);
        assert_eq!(bt_prob(&r, 0, 0, 1) + bt_prob(&r, 0, 1, 0), 1.0);
    }

    #[test]
    fn win_rate_examples() {
        let inst = worked();
        let r = inst.r_star();
        let p = single(0.3);
        assert!((win_rate(&p, &p, r, &[1.0]).unwrap() - 0.5).abs() < 1e-15);
        let wr = win_rate(&single(1.0 - 1e-12), &single(1e-12), r, &[1.0]).unwrap();
        assert!((wr - SIGMA1).abs() < 1e-11);
    }
}
