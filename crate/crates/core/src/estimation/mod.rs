//! Preference likelihoods, maximum-likelihood reward fitting and the RPO
//! minimax learner over finite classes.

mod likelihood;
mod mle;
mod rpo;
mod value;

pub use likelihood::{hellinger_sq_bt, mean_hellinger_sq, nll_loss, sample_nll, LikelihoodTracker};
pub use mle::{argmax_first, argmin_first, induced_rewards, mle_fit, mle_reward, MleFit};
pub use rpo::{
    eta_horizon, eta_standard, golden_section_max, rpo_solve, EtaRule, FrankWolfeOptions,
    RpoDocument, RpoMode, RpoProblem, RpoSolution,
};
pub use value::value_vs_ref;
