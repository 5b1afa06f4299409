use rand::Rng;

use crate::scalar::Scalar;

/// Draws an index from a probability vector by inverse CDF. Falls back to the
/// last positive entry when rounding leaves the uniform draw above the total.
pub fn sample_index<T: Scalar, R: Rng + ?Sized>(probs: &[T], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p.as_f64();
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|p| *p > T::zero()).unwrap_or(0)
}

/// Bernoulli draw with success probability `p`.
pub fn sample_bernoulli<T: Scalar, R: Rng + ?Sized>(p: T, rng: &mut R) -> bool {
    rng.random::<f64>() < p.as_f64()
}
