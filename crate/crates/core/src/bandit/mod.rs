//! Domain types and exact primitives of the KL-regularized bandit.

mod bon;
mod class;
mod document;
mod instance;
mod ops;
mod policy;
mod preference;
mod reward;
mod sampling;

pub use bon::{bon_policy, BestOfN, DEFAULT_N_BON};
pub use class::{
    bounded_ratio_filter, linf_coverability, satisfies_ratio_bound, ClassMember, PolicyClass,
};
pub use document::{InstanceBundle, InstanceDocument};
pub use instance::{validate_distribution, BanditInstance};
pub use ops::{
    bt_prob, closed_form_policy, coverage_coefficient, expected_reward, kl_divergence,
    max_abs_log_ratio, mixture_policy, policy_value, reward_from_policy, sample_label, win_rate,
    win_rate_mc, McEstimate,
};
pub use policy::PolicyTable;
pub use preference::{
    BradleyTerry, PolicyTag, PreferenceDataset, PreferenceModel, PreferenceSample,
};
pub use reward::RewardTable;
pub use sampling::{sample_bernoulli, sample_index};
