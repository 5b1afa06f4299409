//! Tabular laboratory for KL-regularized preference learning with reward
//! transfer: exact bandit primitives, likelihood and minimax estimators,
//! the block-structured transfer algorithm and its win-rate UCB variant, and
//! numerical evaluators for the coverage bounds.
//!
//! Tabular routines are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix `f64`, which the run-level algorithms use.

pub mod bandit;
pub mod bounds;
pub mod empirical;
pub mod error;
pub mod estimation;
pub mod random;
pub mod scalar;
pub mod seed;
pub mod tpo;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Policy = bandit::PolicyTable<f64>;
pub type Reward = bandit::RewardTable<f64>;
pub type Instance = bandit::BanditInstance<f64>;
pub type Class = bandit::PolicyClass<f64>;
