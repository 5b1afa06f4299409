//! Transfer policy optimization: block-structured interleaving of online
//! exploration and transfer-policy selection.

mod config;
mod oracle;
pub(crate) mod run;
mod tps;

pub use config::{
    block_indices, OracleKind, TpoConfig, DEFAULT_ALPHA_XPO, DEFAULT_C_OL, DEFAULT_SOURCE_BONUS,
};
pub use oracle::{
    make_oracle, online_oracle_step, OnlineOracle, OptimisticMleOracle, XpoLikeOracle,
};
pub use run::{
    distill, fixed_policy_run, online_only_run, tpo_run, write_trace_csv, RunResult,
    SelectionEntry, SelectionRecord, TraceRow,
};
pub use tps::{tps_select, TpsEngine, TransferChoice, TransferKind};
