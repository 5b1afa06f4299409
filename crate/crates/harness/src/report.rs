use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::error::{io_err, HarnessError, Result};
use crate::roster::RawResults;
use crate::svg::{render_regret_svg, render_selection_svg};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;
/// Fewest trials for which a confidence interval is reported.
pub const MIN_CI_TRIALS: usize = 3;

/// Mean and 95% normal-approximation half-width; the half-width is `None`
/// with fewer than three samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanCi {
    pub mean: f64,
    pub ci_half: Option<f64>,
    pub n: usize,
}

impl MeanCi {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n.max(1) as f64;
        let ci_half = (n >= MIN_CI_TRIALS).then(|| {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            Z95 * (var / n as f64).sqrt()
        });
        Self { mean, ci_half, n }
    }

    pub fn low(&self) -> f64 {
        self.mean - self.ci_half.unwrap_or(0.0)
    }

    pub fn high(&self) -> f64 {
        self.mean + self.ci_half.unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegretCurve {
    pub algorithm: String,
    /// (step, cumulative regret across trials).
    pub points: Vec<(usize, MeanCi)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WinRateCell {
    pub policy: String,
    pub opponent: String,
    pub mean: f64,
    pub ci_half: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionFrequency {
    pub algorithm: String,
    pub block: usize,
    pub arm: String,
    /// Share of the block's steps, averaged over trials.
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgorithmSummary {
    pub algorithm: String,
    pub trials: usize,
    pub cum_regret: f64,
    pub cum_regret_ci: Option<f64>,
    pub final_regret: f64,
    pub final_regret_ci: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub trials: usize,
    pub curves: Vec<RegretCurve>,
    pub win_rates: Vec<WinRateCell>,
    pub selection: Vec<SelectionFrequency>,
    pub summaries: Vec<AlgorithmSummary>,
}

impl Report {
    /// Aggregates raw results. Algorithms keep their first-seen order.
    pub fn from_raw(raw: &RawResults) -> Result<Self> {
        if raw.traces.is_empty() || raw.summaries.is_empty() {
            return Err(HarnessError::Validation(
                "report needs at least one trial".into(),
            ));
        }
        let mut order: Vec<String> = Vec::new();
        for s in &raw.summaries {
            if !order.contains(&s.algorithm) {
                order.push(s.algorithm.clone());
            }
        }
        let trials = raw
            .summaries
            .iter()
            .map(|s| s.trial)
            .collect::<std::collections::BTreeSet<_>>()
            .len();

        let mut per_step: BTreeMap<(&str, usize), Vec<f64>> = BTreeMap::new();
        for t in &raw.traces {
            per_step
                .entry((t.algorithm.as_str(), t.step))
                .or_default()
                .push(t.cum_regret);
        }
        let curves = order
            .iter()
            .map(|a| RegretCurve {
                algorithm: a.clone(),
                points: per_step
                    .range((a.as_str(), 0)..=(a.as_str(), usize::MAX))
                    .map(|(&(_, step), xs)| (step, MeanCi::from_samples(xs)))
                    .collect(),
            })
            .collect();

        let mut wr: BTreeMap<(&str, &str), Vec<f64>> = BTreeMap::new();
        for w in &raw.win_rates {
            wr.entry((w.policy.as_str(), w.opponent.as_str()))
                .or_default()
                .push(w.win_rate);
        }
        let mut win_rates = Vec::new();
        for p in &order {
            for o in &order {
                if let Some(xs) = wr.get(&(p.as_str(), o.as_str())) {
                    let m = MeanCi::from_samples(xs);
                    win_rates.push(WinRateCell {
                        policy: p.clone(),
                        opponent: o.clone(),
                        mean: m.mean,
                        ci_half: m.ci_half,
                    });
                }
            }
        }

        // per (algorithm, trial, block): arm counts
        let mut counts: BTreeMap<(&str, usize, usize), BTreeMap<&str, usize>> = BTreeMap::new();
        for t in &raw.traces {
            *counts
                .entry((t.algorithm.as_str(), t.trial, t.block))
                .or_default()
                .entry(t.policy_kind.as_str())
                .or_default() += 1;
        }
        let mut shares: BTreeMap<(&str, usize), BTreeMap<&str, f64>> = BTreeMap::new();
        let mut trials_per: BTreeMap<(&str, usize), usize> = BTreeMap::new();
        for (&(alg, _, block), arms) in &counts {
            let total = arms.values().sum::<usize>() as f64;
            *trials_per.entry((alg, block)).or_default() += 1;
            let e = shares.entry((alg, block)).or_default();
            for (&arm, &c) in arms {
                *e.entry(arm).or_default() += c as f64 / total;
            }
        }
        let mut selection = Vec::new();
        for a in &order {
            for (&(alg, block), arms) in shares.range((a.as_str(), 0)..=(a.as_str(), usize::MAX)) {
                let n = trials_per[&(alg, block)] as f64;
                selection.extend(arms.iter().map(|(&arm, &s)| SelectionFrequency {
                    algorithm: alg.to_string(),
                    block,
                    arm: arm.to_string(),
                    frequency: s / n,
                }));
            }
        }

        let summaries = order
            .iter()
            .map(|a| {
                let rows: Vec<_> = raw.summaries.iter().filter(|s| &s.algorithm == a).collect();
                let c =
                    MeanCi::from_samples(&rows.iter().map(|s| s.cum_regret).collect::<Vec<_>>());
                let f =
                    MeanCi::from_samples(&rows.iter().map(|s| s.final_regret).collect::<Vec<_>>());
                AlgorithmSummary {
                    algorithm: a.clone(),
                    trials: rows.len(),
                    cum_regret: c.mean,
                    cum_regret_ci: c.ci_half,
                    final_regret: f.mean,
                    final_regret_ci: f.ci_half,
                }
            })
            .collect();
        Ok(Self {
            trials,
            curves,
            win_rates,
            selection,
            summaries,
        })
    }

    /// Writes CSV tables and SVG plots into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        #[derive(Serialize)]
        struct CurveRow<'a> {
            algorithm: &'a str,
            step: usize,
            mean_cum_regret: f64,
            ci_low: Option<f64>,
            ci_high: Option<f64>,
        }
        let mut w = csv::Writer::from_path(dir.join("regret_curves.csv"))?;
        for c in &self.curves {
            for (step, m) in &c.points {
                w.serialize(CurveRow {
                    algorithm: &c.algorithm,
                    step: *step,
                    mean_cum_regret: m.mean,
                    ci_low: m.ci_half.map(|_| m.low()),
                    ci_high: m.ci_half.map(|_| m.high()),
                })?;
            }
        }
        w.flush().map_err(io_err(dir))?;
        write_rows(&self.win_rates, &dir.join("win_rate_matrix.csv"))?;
        write_rows(&self.selection, &dir.join("selection_frequencies.csv"))?;
        write_rows(&self.summaries, &dir.join("summary.csv"))?;
        let svg = render_regret_svg(self);
        let path = dir.join("regret.svg");
        std::fs::write(&path, svg).map_err(io_err(&path))?;
        for c in &self.curves {
            if let Some(svg) = render_selection_svg(self, &c.algorithm) {
                let path = dir.join(format!("selection_{}.svg", c.algorithm.replace(':', "_")));
                std::fs::write(&path, svg).map_err(io_err(&path))?;
            }
        }
        Ok(())
    }
}

fn write_rows<T: Serialize>(rows: &[T], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(io_err(path))
}
