//! Win-rate UCB transfer with gradient-based preference optimization.

pub mod optimizer;
pub mod run;
pub mod ucb;

pub use optimizer::{po_update, PoKind, PolicyOptimizer};
pub use run::{
    empirical_tpo_run, ArmSelection, EmpiricalConfig, EmpiricalRunResult, SourceRealization,
};
pub use ucb::{ucb_select, Arm, UcbConfig, UcbState, WR_SELF_DEFAULT, WR_SELF_EXPERIMENT};
