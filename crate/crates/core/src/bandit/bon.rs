use rand::Rng;

use super::policy::{ensure_same_dims, PolicyTable};
use super::reward::RewardTable;
use super::sampling::sample_index;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Candidate count used when none is configured.
pub const DEFAULT_N_BON: usize = 32;

/// Best-of-N sampler: draws `n` candidates from `base(·|s)` and keeps one
/// with maximal source reward, breaking ties to the lowest action index.
#[derive(Debug, Clone)]
pub struct BestOfN<'a, T> {
    base: &'a PolicyTable<T>,
    reward: &'a RewardTable<T>,
    n: usize,
}

pub fn bon_policy<'a, T: Scalar>(
    base: &'a PolicyTable<T>,
    source_r: &'a RewardTable<T>,
    n_bon: usize,
) -> Result<BestOfN<'a, T>> {
    if n_bon == 0 {
        return Err(Error::InvalidInput("best-of-n needs n >= 1".into()));
    }
    ensure_same_dims(base.dims(), source_r.dims())?;
    Ok(BestOfN {
        base,
        reward: source_r,
        n: n_bon,
    })
}

impl<T: Scalar> BestOfN<'_, T> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sample<R: Rng + ?Sized>(&self, s: usize, rng: &mut R) -> usize {
        let row = self.reward.row(s);
        let mut best = sample_index(self.base.row(s), rng);
        for _ in 1..self.n {
            let c = sample_index(self.base.row(s), rng);
            if beats(row, c, best) {
                best = c;
            }
        }
        best
    }

    /// Exact law of the sampler. Ordering actions by (reward, −index), the
    /// selected action is a with probability G(a)^n − G(a⁻)^n where G is the
    /// base CDF along that order.
    pub fn distribution(&self) -> Result<PolicyTable<T>> {
        let (ns, na) = self.base.dims();
        let n = i32::try_from(self.n).map_err(|_| Error::InvalidInput("n_bon too large".into()))?;
        let mut w = vec![T::zero(); ns * na];
        for s in 0..ns {
            let row = self.reward.row(s);
            let mut order: Vec<usize> = (0..na).collect();
            // worst first
            order.sort_by(|&x, &y| {
                row[x]
                    .partial_cmp(&row[y])
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(y.cmp(&x))
            });
            let mut cdf = T::zero();
            for &a in &order {
                let next = cdf + self.base.get(s, a);
                w[s * na + a] = next.powi(n) - cdf.powi(n);
                cdf = next;
            }
        }
        PolicyTable::from_weights(ns, na, w)
    }
}

/// Whether action `c` beats `incumbent` (strictly higher reward, or equal
/// reward and lower index).
fn beats<T: Scalar>(row: &[T], c: usize, incumbent: usize) -> bool {
    row[c] > row[incumbent] || (row[c] == row[incumbent] && c < incumbent)
}
