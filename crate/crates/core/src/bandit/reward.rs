use super::policy::{check_shape, ensure_same_dims, flatten_rows};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense reward table r(s, a) with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardTable<T> {
    num_states: usize,
    num_actions: usize,
    values: Vec<T>,
}

impl<T: Scalar> RewardTable<T> {
    pub fn new(num_states: usize, num_actions: usize, values: Vec<T>) -> Result<Self> {
        check_shape(num_states, num_actions, values.len())?;
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "reward entry ({},{}) is not finite",
                i / num_actions,
                i % num_actions
            )));
        }
        Ok(Self {
            num_states,
            num_actions,
            values,
        })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let (s, a, flat) = flatten_rows(rows)?;
        Self::new(s, a, flat)
    }

    pub fn zeros(num_states: usize, num_actions: usize) -> Result<Self> {
        Self::new(
            num_states,
            num_actions,
            vec![T::zero(); num_states * num_actions],
        )
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
        self.values[s * self.num_actions + a]
    }

    pub fn row(&self, s: usize) -> &[T] {
        &self.values[s * self.num_actions..(s + 1) * self.num_actions]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.values.chunks(self.num_actions)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.values
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows()
            .map(|r| r.iter().map(|v| v.as_f64()).collect())
            .collect()
    }

    /// True when every entry lies in [0, r_max].
    pub fn within(&self, r_max: T) -> bool {
        self.values.iter().all(|&v| v >= T::zero() && v <= r_max)
    }

    /// Applies `f` entrywise.
    pub fn map(&self, mut f: impl FnMut(usize, usize, T) -> T) -> Result<Self> {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| f(i / self.num_actions, i % self.num_actions, v))
            .collect();
        Self::new(self.num_states, self.num_actions, values)
    }

    /// Entrywise affine blend (1 - w)·self + w·other.
    pub fn blend(&self, other: &Self, w: T) -> Result<Self> {
        ensure_same_dims(self.dims(), other.dims())?;
        self.map(|s, a, v| (T::one() - w) * v + w * other.get(s, a))
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        ensure_same_dims(self.dims(), other.dims())?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| (*x - *y).abs())
            .fold(T::zero(), T::max))
    }

    pub fn cast<U: Scalar>(&self) -> Result<RewardTable<U>> {
        RewardTable::new(
            self.num_states,
            self.num_actions,
            self.values.iter().map(|v| U::lit(v.as_f64())).collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        assert!(RewardTable::<f64>::from_rows(&[vec![1.0, f64::NAN]]).is_err());
        assert!(RewardTable::<f64>::from_rows(&[vec![1.0, f64::INFINITY]]).is_err());
    }

    #[test]
    fn blend_endpoints() {
        let a = RewardTable::<f64>::from_rows(&[vec![1.0, 0.0]]).unwrap();
        let b = RewardTable::<f64>::from_rows(&[vec![0.0, 1.0]]).unwrap();
        assert_eq!(a.blend(&b, 0.0).unwrap(), a);
        assert_eq!(a.blend(&b, 1.0).unwrap(), b);
        assert!(a.within(1.0) && !a.within(0.5));
    }
}
