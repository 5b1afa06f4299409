//! Numerical evaluators for the coverage, win-rate and sigmoid bounds and
//! the KL/value identity.

mod coverage;
mod iota;
mod report;
mod sigmoid;

pub use coverage::{
    cov_exp_upper_bound, cov_gap_upper_bound, kappa, kl_value_identity_residual,
    tv_preference_check, win_rate_cov_lower_bound, GammaGrid, WinRateVariant, EXP_BOUND_GRID,
};
pub use iota::iota_diagnostic;
pub use report::{BoundKind, BoundParams, BoundReport, SATISFY_TOL};
pub use sigmoid::{reward_error_hellinger_check, sigmoid_gap_check};
