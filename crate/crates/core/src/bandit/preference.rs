use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ops::bt_prob;
use super::reward::RewardTable;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Identifies the policy that produced a response.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum PolicyTag {
    Reference,
    Source(usize),
    Online,
    Distilled,
}

impl PolicyTag {
    /// Short kind label used in CSV output.
    pub fn kind(&self) -> &'static str {
        match self {
            PolicyTag::Reference => "reference",
            PolicyTag::Source(_) => "source",
            PolicyTag::Online => "online",
            PolicyTag::Distilled => "distilled",
        }
    }
}

impl fmt::Display for PolicyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyTag::Source(w) => write!(f, "source:{w}"),
            other => f.write_str(other.kind()),
        }
    }
}

impl FromStr for PolicyTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reference" => Ok(PolicyTag::Reference),
            "online" => Ok(PolicyTag::Online),
            "distilled" => Ok(PolicyTag::Distilled),
            _ => s
                .strip_prefix("source:")
                .and_then(|w| w.parse().ok())
                .map(PolicyTag::Source)
                .ok_or_else(|| Error::InvalidInput(format!("unknown policy tag {s:?}"))),
        }
    }
}

impl From<PolicyTag> for String {
    fn from(t: PolicyTag) -> String {
        t.to_string()
    }
}

impl TryFrom<String> for PolicyTag {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// One labelled comparison: `y` is true when `a` is preferred to `a_tilde`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreferenceSample {
    pub s: usize,
    pub a: usize,
    pub a_tilde: usize,
    pub y: bool,
    pub producer: PolicyTag,
    pub comparator: PolicyTag,
}

impl PreferenceSample {
    /// (winner, loser) under the convention y = 1 ⇔ a ≻ ã.
    pub fn winner_loser(&self) -> (usize, usize) {
        if self.y {
            (self.a, self.a_tilde)
        } else {
            (self.a_tilde, self.a)
        }
    }
}

/// Preference data in generation order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PreferenceDataset {
    samples: Vec<PreferenceSample>,
}

impl PreferenceDataset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_samples(samples: Vec<PreferenceSample>) -> Self {
        Self { samples }
    }

    pub fn push(&mut self, sample: PreferenceSample) {
        self.samples.push(sample);
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[PreferenceSample] {
        &self.samples
    }

    pub fn iter(&self) -> std::slice::Iter<'_, PreferenceSample> {
        self.samples.iter()
    }

    /// Number of samples whose first response came from `tag`.
    pub fn count_producer(&self, tag: PolicyTag) -> usize {
        self.samples.iter().filter(|x| x.producer == tag).count()
    }

    /// Subsequence produced by `tag`, order preserved.
    pub fn by_producer(&self, tag: PolicyTag) -> Self {
        Self {
            samples: self
                .samples
                .iter()
                .filter(|x| x.producer == tag)
                .copied()
                .collect(),
        }
    }

    /// Checks every index against the given dimensions.
    pub fn validate(&self, num_states: usize, num_actions: usize) -> Result<()> {
        for (i, x) in self.samples.iter().enumerate() {
            if x.s >= num_states || x.a >= num_actions || x.a_tilde >= num_actions {
                return Err(Error::InvalidInput(format!(
                    "sample {i} has out-of-range indices"
                )));
            }
        }
        Ok(())
    }
}

impl<'a> IntoIterator for &'a PreferenceDataset {
    type Item = &'a PreferenceSample;
    type IntoIter = std::slice::Iter<'a, PreferenceSample>;

    fn into_iter(self) -> Self::IntoIter {
        self.samples.iter()
    }
}

impl FromIterator<PreferenceSample> for PreferenceDataset {
    fn from_iter<I: IntoIterator<Item = PreferenceSample>>(iter: I) -> Self {
        Self {
            samples: iter.into_iter().collect(),
        }
    }
}

/// Probability that `a` is preferred to `a_tilde` at `s` under reward `r`.
///
/// Only Bradley–Terry is provided; other models satisfying
/// P(y=1|s,a,a') ≥ 1/2 whenever r(s,a) ≥ r(s,a') can implement this trait.
pub trait PreferenceModel<T: Scalar> {
    fn prob(&self, r: &RewardTable<T>, s: usize, a: usize, a_tilde: usize) -> T;
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BradleyTerry;

impl<T: Scalar> PreferenceModel<T> for BradleyTerry {
    fn prob(&self, r: &RewardTable<T>, s: usize, a: usize, a_tilde: usize) -> T {
        bt_prob(r, s, a, a_tilde)
    }
}
