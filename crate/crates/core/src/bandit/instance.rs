use super::ops::{closed_form_policy, policy_value};
use super::policy::{ensure_same_dims, PolicyTable};
use super::reward::RewardTable;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A KL-regularized contextual bandit: prompts S with distribution ρ,
/// responses A, reference policy, KL weight β, reward cap and true reward.
///
/// The optimal policy π*_{r*} and its value are computed once at
/// construction.
#[derive(Debug, Clone)]
pub struct BanditInstance<T> {
    rho: Vec<T>,
    pi_ref: PolicyTable<T>,
    beta: T,
    r_max: T,
    r_star: RewardTable<T>,
    pi_star: PolicyTable<T>,
    optimal_value: T,
}

impl<T: Scalar> BanditInstance<T> {
    pub fn new(
        rho: Vec<T>,
        pi_ref: PolicyTable<T>,
        beta: T,
        r_max: T,
        r_star: RewardTable<T>,
    ) -> Result<Self> {
        let rho = validate_distribution(rho)?;
        if rho.len() != pi_ref.num_states() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} states", pi_ref.num_states()),
                found: format!("rho of length {}", rho.len()),
            });
        }
        ensure_same_dims(pi_ref.dims(), r_star.dims())?;
        if !(beta.is_finite() && beta > T::zero()) {
            return Err(Error::InvalidInput(format!(
                "beta must be positive, got {beta}"
            )));
        }
        if !(r_max.is_finite() && r_max > T::zero()) {
            return Err(Error::InvalidInput(format!(
                "r_max must be positive, got {r_max}"
            )));
        }
        if !r_star.within(r_max) {
            return Err(Error::InvalidInput(
                "r_star entries must lie in [0, r_max]".into(),
            ));
        }
        let mut inst = Self {
            rho,
            pi_star: pi_ref.clone(),
            pi_ref,
            beta,
            r_max,
            r_star,
            optimal_value: T::zero(),
        };
        inst.pi_star = closed_form_policy(&inst.r_star, &inst)?;
        inst.optimal_value = policy_value(&inst.pi_star, &inst.r_star, &inst)?;
        Ok(inst)
    }

    pub fn num_states(&self) -> usize {
        self.pi_ref.num_states()
    }

    pub fn num_actions(&self) -> usize {
        self.pi_ref.num_actions()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.pi_ref.dims()
    }

    pub fn rho(&self) -> &[T] {
        &self.rho
    }

    pub fn pi_ref(&self) -> &PolicyTable<T> {
        &self.pi_ref
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn r_max(&self) -> T {
        self.r_max
    }

    pub fn r_star(&self) -> &RewardTable<T> {
        &self.r_star
    }

    /// π*_{r*}, the maximizer of J_β under the true reward.
    pub fn optimal_policy(&self) -> &PolicyTable<T> {
        &self.pi_star
    }

    /// J_β(π*_{r*}).
    pub fn optimal_value(&self) -> T {
        self.optimal_value
    }

    /// Exact suboptimality J_β(π*_{r*}) − J_β(π).
    pub fn regret(&self, pi: &PolicyTable<T>) -> Result<T> {
        Ok(self.optimal_value - policy_value(pi, &self.r_star, self)?)
    }

    /// Same instance with a different true reward.
    pub fn with_reward(&self, r_star: RewardTable<T>) -> Result<Self> {
        Self::new(
            self.rho.clone(),
            self.pi_ref.clone(),
            self.beta,
            self.r_max,
            r_star,
        )
    }
}

/// Checks a probability vector (nonnegative, sums to one within the simplex
/// tolerance) and renormalizes it.
pub fn validate_distribution<T: Scalar>(mut p: Vec<T>) -> Result<Vec<T>> {
    if p.is_empty() {
        return Err(Error::InvalidInput("probability vector is empty".into()));
    }
    if let Some(i) = p.iter().position(|x| !x.is_finite() || *x < T::zero()) {
        return Err(Error::InvalidInput(format!(
            "probability entry {i} = {} is invalid",
            p[i]
        )));
    }
    let total: T = p.iter().copied().sum();
    if (total - T::one()).abs() > T::lit(T::SIMPLEX_TOL) {
        return Err(Error::InvalidInput(format!(
            "probabilities sum to {total}, not 1"
        )));
    }
    p.iter_mut().for_each(|x| *x = *x / total);
    Ok(p)
}
