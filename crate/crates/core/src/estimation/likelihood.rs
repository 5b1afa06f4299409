use crate::bandit::{bt_prob, PreferenceDataset, PreferenceSample, RewardTable};
use crate::error::{Error, Result};
use crate::scalar::{log_sigmoid, Scalar};

/// Negative log-likelihood of one labelled comparison under the BT model.
pub fn sample_nll<T: Scalar>(r: &RewardTable<T>, x: &PreferenceSample) -> T {
    let d = r.get(x.s, x.a) - r.get(x.s, x.a_tilde);
    if x.y {
        -log_sigmoid(d)
    } else {
        -log_sigmoid(-d)
    }
}

/// Average NLL L_D(r) over the dataset.
pub fn nll_loss<T: Scalar>(r: &RewardTable<T>, data: &PreferenceDataset) -> Result<T> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    data.validate(r.num_states(), r.num_actions())?;
    let total: T = data.iter().map(|x| sample_nll(r, x)).sum();
    Ok(total / T::from_usize(data.len()).expect("dataset size fits scalar"))
}

/// Running NLL sums for a fixed list of rewards, updated one sample at a time
/// so repeated fits over a growing dataset cost O(|rewards|) per sample.
#[derive(Debug, Clone)]
pub struct LikelihoodTracker<T> {
    rewards: Vec<RewardTable<T>>,
    sums: Vec<T>,
    count: usize,
}

impl<T: Scalar> LikelihoodTracker<T> {
    pub fn new(rewards: Vec<RewardTable<T>>) -> Self {
        let sums = vec![T::zero(); rewards.len()];
        Self {
            rewards,
            sums,
            count: 0,
        }
    }

    pub fn observe(&mut self, x: &PreferenceSample) {
        for (sum, r) in self.sums.iter_mut().zip(&self.rewards) {
            *sum = *sum + sample_nll(r, x);
        }
        self.count += 1;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn rewards(&self) -> &[RewardTable<T>] {
        &self.rewards
    }

    /// Average losses, one per reward.
    pub fn losses(&self) -> Result<Vec<T>> {
        if self.count == 0 {
            return Err(Error::EmptyDataset);
        }
        let n = T::from_usize(self.count).expect("dataset size fits scalar");
        Ok(self.sums.iter().map(|&s| s / n).collect())
    }
}

/// Squared Hellinger distance between the BT label laws of two rewards at
/// (s, a, ã): 1 − √(p1·p2) − √((1−p1)(1−p2)).
pub fn hellinger_sq_bt<T: Scalar>(
    r1: &RewardTable<T>,
    r2: &RewardTable<T>,
    s: usize,
    a: usize,
    a_tilde: usize,
) -> T {
    let p1 = bt_prob(r1, s, a, a_tilde);
    let p2 = bt_prob(r2, s, a, a_tilde);
    let h = T::one() - (p1 * p2).sqrt() - ((T::one() - p1) * (T::one() - p2)).sqrt();
    h.max(T::zero())
}

/// Dataset average of [`hellinger_sq_bt`] over the recorded (s, a, ã).
pub fn mean_hellinger_sq<T: Scalar>(
    r1: &RewardTable<T>,
    r2: &RewardTable<T>,
    data: &PreferenceDataset,
) -> Result<T> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let total: T = data
        .iter()
        .map(|x| hellinger_sq_bt(r1, r2, x.s, x.a, x.a_tilde))
        .sum();
    Ok(total / T::from_usize(data.len()).expect("dataset size fits scalar"))
}
