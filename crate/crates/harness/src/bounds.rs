use std::path::Path;

use serde::Serialize;

use kltransfer_core::bandit::{closed_form_policy, satisfies_ratio_bound, InstanceBundle};
use kltransfer_core::bounds::{
    cov_exp_upper_bound, cov_gap_upper_bound, kl_value_identity_residual, win_rate_cov_lower_bound,
    BoundParams, BoundReport, GammaGrid,
};
use kltransfer_core::Policy;

use crate::error::{io_err, Result};

/// Ceiling on the KL/value identity residual.
pub const IDENTITY_TOL: f64 = 1e-10;

/// One row of the bounds CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub bound_name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub satisfied: bool,
}

impl From<&BoundReport> for BoundRow {
    fn from(r: &BoundReport) -> Self {
        Self {
            bound_name: r.bound_name.clone(),
            lhs: r.lhs,
            rhs: r.rhs,
            slack: r.slack,
            satisfied: r.satisfied,
        }
    }
}

/// Evaluates every instance-level bound. Subjects are π_ref, each class
/// member (`class:i`) and each source optimum (`source:w`); names read
/// `<bound>[<subject>]`. Win-rate lower bounds use {π*} ∪ sources ∪ {π_ref}
/// as comparators.
pub fn instance_bounds(bundle: &InstanceBundle) -> Result<Vec<BoundReport>> {
    let inst = &bundle.instance;
    let source_policies: Vec<Policy> = bundle
        .sources
        .iter()
        .map(|r| closed_form_policy(r, inst))
        .collect::<kltransfer_core::Result<_>>()?;
    let mut subjects: Vec<(String, &Policy)> = vec![("pi_ref".into(), inst.pi_ref())];
    subjects.extend(
        bundle
            .class
            .policies()
            .enumerate()
            .map(|(i, p)| (format!("class:{i}"), p)),
    );
    subjects.extend(
        source_policies
            .iter()
            .enumerate()
            .map(|(w, p)| (format!("source:{w}"), p)),
    );

    let mut comparators: Vec<(String, &Policy)> = vec![("optimal".into(), inst.optimal_policy())];
    comparators.extend(
        source_policies
            .iter()
            .enumerate()
            .map(|(w, p)| (format!("source:{w}"), p)),
    );
    comparators.push(("pi_ref".into(), inst.pi_ref()));
    let grid = GammaGrid::default();

    let mut out = Vec::new();
    for (name, pi) in &subjects {
        if satisfies_ratio_bound(pi, inst)? {
            out.push(cov_gap_upper_bound(pi, inst)?.renamed(format!("cov_gap_upper[{name}]")));
        }
        out.push(
            win_rate_cov_lower_bound(pi, inst, &comparators, &grid)?
                .renamed(format!("win_rate_cov_lower[{name}]")),
        );
        let residual = kl_value_identity_residual(pi, inst)?;
        let params = BoundParams {
            beta: Some(inst.beta()),
            r_max: Some(inst.r_max()),
            ..BoundParams::default()
        };
        out.push(BoundReport::upper(
            format!("kl_value_identity[{name}]"),
            residual,
            IDENTITY_TOL,
            params,
        ));
    }
    for (w, r) in bundle.sources.iter().enumerate() {
        out.push(cov_exp_upper_bound(r, inst)?.renamed(format!("cov_exp_upper[source:{w}]")));
    }
    Ok(out)
}

pub fn write_bounds_csv(reports: &[BoundReport], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in reports {
        w.serialize(BoundRow::from(r))?;
    }
    w.flush().map_err(io_err(path))
}
