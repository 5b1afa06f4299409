use std::fmt;

use serde::{Deserialize, Serialize};

/// Win-rate estimate assigned to the learning policy: the algorithm's default.
pub const WR_SELF_DEFAULT: f64 = 0.5;
/// Value used in the reference experiments.
pub const WR_SELF_EXPERIMENT: f64 = 0.55;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UcbConfig {
    /// Constant multiplying √(1/N) in the bonus, i.e. c·√(log(1/δ)).
    pub c_ucb: f64,
    /// Score of the online arm.
    pub wr_self: f64,
}

impl Default for UcbConfig {
    fn default() -> Self {
        Self {
            c_ucb: 1.0,
            wr_self: WR_SELF_DEFAULT,
        }
    }
}

impl UcbConfig {
    pub fn experiment() -> Self {
        Self {
            wr_self: WR_SELF_EXPERIMENT,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Arm {
    Online,
    Source(usize),
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arm::Online => f.write_str("online"),
            Arm::Source(w) => write!(f, "source:{w}"),
        }
    }
}

/// Block-scoped selection counts and win sums for each source arm and the
/// online arm (stored last).
#[derive(Debug, Clone, PartialEq)]
pub struct UcbState {
    counts: Vec<u64>,
    wins: Vec<f64>,
    pub config: UcbConfig,
}

impl UcbState {
    pub fn new(num_sources: usize, config: UcbConfig) -> Self {
        Self {
            counts: vec![0; num_sources + 1],
            wins: vec![0.0; num_sources + 1],
            config,
        }
    }

    pub fn num_sources(&self) -> usize {
        self.counts.len() - 1
    }

    fn slot(&self, arm: Arm) -> usize {
        match arm {
            Arm::Online => self.counts.len() - 1,
            Arm::Source(w) => w,
        }
    }

    pub fn reset(&mut self) {
        self.counts.iter_mut().for_each(|c| *c = 0);
        self.wins.iter_mut().for_each(|w| *w = 0.0);
    }

    /// Records one comparison outcome for `arm` (y = 1 when its response won).
    pub fn record(&mut self, arm: Arm, y: bool) {
        let i = self.slot(arm);
        self.counts[i] += 1;
        if y {
            self.wins[i] += 1.0;
        }
    }

    pub fn count(&self, arm: Arm) -> u64 {
        self.counts[self.slot(arm)]
    }

    pub fn total_count(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Empirical win rate, `None` before the first pull.
    pub fn win_rate(&self, arm: Arm) -> Option<f64> {
        let i = self.slot(arm);
        (self.counts[i] > 0).then(|| self.wins[i] / self.counts[i] as f64)
    }

    /// Optimistic score; +∞ for an unpulled source, wr_self for the online arm.
    pub fn score(&self, arm: Arm) -> f64 {
        match arm {
            Arm::Online => self.config.wr_self,
            Arm::Source(_) => match self.win_rate(arm) {
                None => f64::INFINITY,
                Some(p) => p + self.config.c_ucb * (1.0 / self.count(arm) as f64).sqrt(),
            },
        }
    }
}

/// Highest-scoring arm; ties go to the online arm, then the lowest source.
pub fn ucb_select(state: &UcbState) -> (Arm, f64) {
    let mut best = (Arm::Online, state.score(Arm::Online));
    for w in 0..state.num_sources() {
        let s = state.score(Arm::Source(w));
        if s > best.1 {
            best = (Arm::Source(w), s);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unpulled_source_first() {
        let mut st = UcbState::new(2, UcbConfig::default());
        assert_eq!(ucb_select(&st).0, Arm::Source(0));
        st.record(Arm::Source(0), true);
        assert_eq!(ucb_select(&st).0, Arm::Source(1));
    }

    #[test]
    fn weak_sources_switch_off() {
        let mut st = UcbState::new(2, UcbConfig::default());
        for i in 0..10_000 {
            st.record(Arm::Source(0), i % 10 < 3);
            st.record(Arm::Source(1), i % 10 < 4);
        }
        assert_eq!(ucb_select(&st).0, Arm::Online);
    }

    #[test]
    fn ties_prefer_online() {
        let mut st = UcbState::new(
            1,
            UcbConfig {
                c_ucb: 0.0,
                wr_self: 0.5,
            },
        );
        st.record(Arm::Source(0), true);
        st.record(Arm::Source(0), false);
        assert_eq!(ucb_select(&st).0, Arm::Online);
        assert_eq!(UcbConfig::experiment().wr_self, 0.55);
    }
}
