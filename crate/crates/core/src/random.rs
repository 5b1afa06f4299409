//! Random draws of policies, rewards and instances.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::bandit::{BanditInstance, PolicyTable, RewardTable};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn dirichlet_row<R: Rng + ?Sized>(k: usize, concentration: f64, rng: &mut R) -> Result<Vec<f64>> {
    let gamma = Gamma::new(concentration, 1.0).map_err(|e| Error::InvalidInput(e.to_string()))?;
    for _ in 0..64 {
        let w: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
        let total: f64 = w.iter().sum();
        if w.iter().all(|&x| x / total > 1e-300) {
            return Ok(w.into_iter().map(|x| x / total).collect());
        }
    }
    Err(Error::InvalidInput(
        "dirichlet draw kept underflowing; raise the concentration".into(),
    ))
}

/// Probability vector drawn from a symmetric Dirichlet.
pub fn random_distribution<T: Scalar, R: Rng + ?Sized>(
    k: usize,
    concentration: f64,
    rng: &mut R,
) -> Result<Vec<T>> {
    Ok(dirichlet_row(k, concentration, rng)?
        .into_iter()
        .map(T::lit)
        .collect())
}

/// Policy with independent Dirichlet rows.
pub fn random_policy<T: Scalar, R: Rng + ?Sized>(
    num_states: usize,
    num_actions: usize,
    concentration: f64,
    rng: &mut R,
) -> Result<PolicyTable<T>> {
    let mut w = Vec::with_capacity(num_states * num_actions);
    for _ in 0..num_states {
        w.extend(
            dirichlet_row(num_actions, concentration, rng)?
                .into_iter()
                .map(T::lit),
        );
    }
    PolicyTable::from_weights(num_states, num_actions, w)
}

/// Reward with entries iid uniform on [0, r_max].
pub fn random_reward<T: Scalar, R: Rng + ?Sized>(
    num_states: usize,
    num_actions: usize,
    r_max: f64,
    rng: &mut R,
) -> Result<RewardTable<T>> {
    let v = (0..num_states * num_actions)
        .map(|_| T::lit(rng.random::<f64>() * r_max))
        .collect();
    RewardTable::new(num_states, num_actions, v)
}

/// Instance with Dirichlet ρ and π_ref (concentration 1 and 2) and uniform
/// random r*.
pub fn random_instance<T: Scalar, R: Rng + ?Sized>(
    num_states: usize,
    num_actions: usize,
    beta: f64,
    r_max: f64,
    rng: &mut R,
) -> Result<BanditInstance<T>> {
    let rho = random_distribution(num_states, 1.0, rng)?;
    let pi_ref = random_policy(num_states, num_actions, 2.0, rng)?;
    let r_star = random_reward(num_states, num_actions, r_max, rng)?;
    BanditInstance::new(rho, pi_ref, T::lit(beta), T::lit(r_max), r_star)
}
