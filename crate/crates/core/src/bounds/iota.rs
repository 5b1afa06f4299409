use crate::bandit::{closed_form_policy, coverage_coefficient, linf_coverability, PolicyTag};
use crate::error::{Error, Result};
use crate::tpo::RunResult;
use crate::{Class, Instance, Policy, Reward};

/// Per-transfer-step trend diagnostic
/// ι_τ = R·e^{2R}·min(Cov^{π*|π_mix^τ}, √Cov_∞(Π)/α)·√(1/τ),
/// where π_mix^τ averages the policies executed at steps 1..τ and
/// logarithmic factors are set to one. Returns (τ, ι_τ) pairs.
pub fn iota_diagnostic(
    trace: &RunResult,
    cls: &Class,
    inst: &Instance,
    alpha: f64,
    sources: &[Reward],
) -> Result<Vec<(usize, f64)>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!(
            "alpha must lie in (0,1), got {alpha}"
        )));
    }
    let source_policies = sources
        .iter()
        .map(|r| closed_form_policy(r, inst))
        .collect::<Result<Vec<_>>>()?;
    let resolve = |tag: PolicyTag, id: Option<usize>| -> Result<&Policy> {
        match (tag, id) {
            (PolicyTag::Reference, _) => Ok(inst.pi_ref()),
            (PolicyTag::Source(w), _) => source_policies
                .get(w)
                .ok_or_else(|| Error::UnresolvedTag(tag.to_string())),
            (PolicyTag::Online | PolicyTag::Distilled, Some(id)) => cls
                .by_id(id)
                .ok_or_else(|| Error::UnresolvedTag(format!("{tag} with id {id}"))),
            _ => Err(Error::UnresolvedTag(format!("{tag} without a class id"))),
        }
    };
    let r = inst.r_max();
    let scale = r * (2.0 * r).exp();
    let second = linf_coverability(cls)?.sqrt() / alpha;
    let mut sum = vec![0.0; inst.num_states() * inst.num_actions()];
    let mut out = Vec::new();
    for row in &trace.regret_trace {
        let p = resolve(row.tag, row.policy_id)?;
        sum.iter_mut()
            .zip(p.as_slice())
            .for_each(|(acc, &x)| *acc += x);
        if matches!(row.tag, PolicyTag::Source(_) | PolicyTag::Distilled) {
            let mix = Policy::from_weights(inst.num_states(), inst.num_actions(), sum.clone())?;
            let cov = coverage_coefficient(inst.optimal_policy(), &mix, inst.rho())?;
            out.push((row.step, scale * cov.min(second) / (row.step as f64).sqrt()));
        }
    }
    Ok(out)
}
