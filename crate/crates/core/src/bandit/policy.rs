use crate::error::{dims_mismatch, Error, Result};
use crate::scalar::Scalar;

/// Row-stochastic table of conditional probabilities π(a|s) with strictly
/// positive entries.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyTable<T> {
    num_states: usize,
    num_actions: usize,
    probs: Vec<T>,
}

impl<T: Scalar> PolicyTable<T> {
    /// Validates a row-major probability matrix: entries finite and > 0, each
    /// row summing to one within the scalar's simplex tolerance. Rows are then
    /// renormalized once so downstream identities hold tightly.
    pub fn new(num_states: usize, num_actions: usize, probs: Vec<T>) -> Result<Self> {
        check_shape(num_states, num_actions, probs.len())?;
        let tol = T::lit(T::SIMPLEX_TOL);
        for (s, row) in probs.chunks(num_actions).enumerate() {
            if let Some(a) = row.iter().position(|p| !p.is_finite() || *p <= T::zero()) {
                return Err(Error::InvalidInput(format!(
                    "policy entry ({s},{a}) = {} is not strictly positive",
                    row[a]
                )));
            }
            let total: T = row.iter().copied().sum();
            if (total - T::one()).abs() > tol {
                return Err(Error::InvalidInput(format!(
                    "policy row {s} sums to {total}, not 1"
                )));
            }
        }
        Ok(Self::normalized_unchecked(num_states, num_actions, probs))
    }

    /// Builds a policy from nonnegative row weights, normalizing each row.
    /// Fails if a normalized entry is zero or non-finite.
    pub fn from_weights(num_states: usize, num_actions: usize, weights: Vec<T>) -> Result<Self> {
        check_shape(num_states, num_actions, weights.len())?;
        let out = Self::normalized_unchecked(num_states, num_actions, weights);
        if let Some(i) = out
            .probs
            .iter()
            .position(|p| !p.is_finite() || *p <= T::zero())
        {
            return Err(Error::InvalidInput(format!(
                "policy entry ({},{}) is zero or non-finite after normalization",
                i / num_actions,
                i % num_actions
            )));
        }
        Ok(out)
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let (s, a, flat) = flatten_rows(rows)?;
        Self::new(s, a, flat)
    }

    /// Row-wise softmax of a logit matrix, shifted by the row max.
    pub fn softmax(num_states: usize, num_actions: usize, logits: &[T]) -> Result<Self> {
        check_shape(num_states, num_actions, logits.len())?;
        if logits.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite logit".into()));
        }
        let mut w = Vec::with_capacity(logits.len());
        for row in logits.chunks(num_actions) {
            let m = row.iter().copied().fold(T::neg_infinity(), T::max);
            w.extend(row.iter().map(|&x| (x - m).exp()));
        }
        Self::from_weights(num_states, num_actions, w)
    }

    pub fn uniform(num_states: usize, num_actions: usize) -> Result<Self> {
        check_shape(num_states, num_actions, num_states * num_actions)?;
        let p = T::one() / T::from_usize(num_actions).expect("action count fits scalar");
        Ok(Self {
            num_states,
            num_actions,
            probs: vec![p; num_states * num_actions],
        })
    }

    fn normalized_unchecked(num_states: usize, num_actions: usize, mut probs: Vec<T>) -> Self {
        for row in probs.chunks_mut(num_actions) {
            let total: T = row.iter().copied().sum();
            row.iter_mut().for_each(|p| *p = *p / total);
        }
        Self {
            num_states,
            num_actions,
            probs,
        }
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.num_states, self.num_actions)
    }

    pub fn get(&self, s: usize, a: usize) -> T {
        self.probs[s * self.num_actions + a]
    }

    pub fn row(&self, s: usize) -> &[T] {
        &self.probs[s * self.num_actions..(s + 1) * self.num_actions]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.probs.chunks(self.num_actions)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.probs
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows()
            .map(|r| r.iter().map(|p| p.as_f64()).collect())
            .collect()
    }

    /// Largest entrywise absolute difference to another policy.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        ensure_same_dims(self.dims(), other.dims())?;
        Ok(self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(x, y)| (*x - *y).abs())
            .fold(T::zero(), T::max))
    }

    /// Casts to another scalar type, renormalizing in the target precision.
    pub fn cast<U: Scalar>(&self) -> Result<PolicyTable<U>> {
        let w = self.probs.iter().map(|p| U::lit(p.as_f64())).collect();
        PolicyTable::from_weights(self.num_states, self.num_actions, w)
    }
}

pub(crate) fn check_shape(num_states: usize, num_actions: usize, len: usize) -> Result<()> {
    if num_states == 0 || num_actions == 0 {
        return Err(Error::InvalidInput(
            "state and action counts must be positive".into(),
        ));
    }
    if len != num_states * num_actions {
        return Err(Error::DimensionMismatch {
            expected: format!("{} entries", num_states * num_actions),
            found: format!("{len} entries"),
        });
    }
    Ok(())
}

pub(crate) fn ensure_same_dims(expected: (usize, usize), found: (usize, usize)) -> Result<()> {
    if expected != found {
        return Err(dims_mismatch(expected, found));
    }
    Ok(())
}

pub(crate) fn flatten_rows<T: Copy>(rows: &[Vec<T>]) -> Result<(usize, usize, Vec<T>)> {
    let s = rows.len();
    let a = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != a) {
        return Err(Error::DimensionMismatch {
            expected: format!("rows of length {a}"),
            found: format!("row of length {}", bad.len()),
        });
    }
    Ok((s, a, rows.iter().flatten().copied().collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_zero_entries_and_bad_sums() {
        assert!(PolicyTable::<f64>::from_rows(&[vec![1.0, 0.0]]).is_err());
        assert!(PolicyTable::<f64>::from_rows(&[vec![0.6, 0.6]]).is_err());
        assert!(PolicyTable::<f64>::from_rows(&[vec![0.5, 0.5], vec![0.5]]).is_err());
        assert!(PolicyTable::<f64>::new(0, 2, vec![]).is_err());
    }

    #[test]
    fn softmax_handles_large_logits() {
        let p = PolicyTable::<f64>::softmax(1, 2, &[1000.0, 999.0]).unwrap();
        assert!((p.get(0, 0) - 0.731_058_578_630_004_9).abs() < 1e-15);
    }

    #[test]
    fn softmax_underflow_is_an_error() {
        assert!(PolicyTable::<f64>::softmax(1, 2, &[0.0, -1e4]).is_err());
    }

    #[test]
    fn cast_round_trip() {
        let p = PolicyTable::<f64>::from_rows(&[vec![0.25, 0.75]]).unwrap();
        let q: PolicyTable<f32> = p.cast().unwrap();
        assert!((q.get(0, 1) - 0.75).abs() < 1e-7);
    }
}
