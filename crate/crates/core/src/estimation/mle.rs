use crate::bandit::{
    reward_from_policy, BanditInstance, PolicyClass, PreferenceDataset, RewardTable,
};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::likelihood::nll_loss;

/// Induced reward class R^Π, one reward per member in class order.
pub fn induced_rewards<T: Scalar>(
    cls: &PolicyClass<T>,
    inst: &BanditInstance<T>,
) -> Result<Vec<RewardTable<T>>> {
    cls.policies()
        .map(|p| reward_from_policy(p, inst))
        .collect()
}

/// Index of the smallest entry; ties go to the lowest index.
pub fn argmin_first<T: Scalar>(values: &[T]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if best.is_none_or(|b| v < values[b]) {
            best = Some(i);
        }
    }
    best
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax_first<T: Scalar>(values: &[T]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if best.is_none_or(|b| v > values[b]) {
            best = Some(i);
        }
    }
    best
}

/// Result of maximum-likelihood fitting over R^Π.
#[derive(Debug, Clone, PartialEq)]
pub struct MleFit<T> {
    /// Position in the class.
    pub index: usize,
    /// Stable member id.
    pub id: usize,
    pub reward: RewardTable<T>,
    pub loss: T,
}

/// Minimizes L_D over R^Π by enumeration; ties go to the earliest member.
pub fn mle_fit<T: Scalar>(
    cls: &PolicyClass<T>,
    data: &PreferenceDataset,
    inst: &BanditInstance<T>,
) -> Result<MleFit<T>> {
    cls.ensure_nonempty()?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let rewards = induced_rewards(cls, inst)?;
    let losses = rewards
        .iter()
        .map(|r| nll_loss(r, data))
        .collect::<Result<Vec<_>>>()?;
    let index = argmin_first(&losses).expect("class is non-empty");
    Ok(MleFit {
        index,
        id: cls.id(index),
        loss: losses[index],
        reward: rewards[index].clone(),
    })
}

pub fn mle_reward<T: Scalar>(
    cls: &PolicyClass<T>,
    data: &PreferenceDataset,
    inst: &BanditInstance<T>,
) -> Result<RewardTable<T>> {
    Ok(mle_fit(cls, data, inst)?.reward)
}
