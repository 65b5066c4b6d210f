//! Stage labels and content plans.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Longest plan the pipeline produces or accepts.
pub const MAX_PLAN_LEN: usize = 15;

/// One of the seven instruction stage types.
///
/// The declaration order is the canonical total order used for tie-breaking
/// and for indexing probability vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StageLabel {
    PreProcessing,
    Mixing,
    Transferring,
    Cooking,
    PostProcessing,
    Final,
    General,
}

impl StageLabel {
    pub const COUNT: usize = 7;

    pub const ALL: [StageLabel; 7] = [
        StageLabel::PreProcessing,
        StageLabel::Mixing,
        StageLabel::Transferring,
        StageLabel::Cooking,
        StageLabel::PostProcessing,
        StageLabel::Final,
        StageLabel::General,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(idx: usize) -> Option<StageLabel> {
        Self::ALL.get(idx).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StageLabel::PreProcessing => "PreProcessing",
            StageLabel::Mixing => "Mixing",
            StageLabel::Transferring => "Transferring",
            StageLabel::Cooking => "Cooking",
            StageLabel::PostProcessing => "PostProcessing",
            StageLabel::Final => "Final",
            StageLabel::General => "General",
        }
    }
}

impl fmt::Display for StageLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StageLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StageLabel::ALL
            .iter()
            .copied()
            .find(|l| l.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown stage label '{s}'")))
    }
}

/// A sequence of stage labels, one per instruction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ContentPlan(Vec<StageLabel>);

impl ContentPlan {
    /// Builds a plan, rejecting empty or over-long sequences.
    pub fn new(stages: Vec<StageLabel>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::invalid("content plan must not be empty"));
        }
        if stages.len() > MAX_PLAN_LEN {
            return Err(Error::invalid(format!(
                "content plan has {} stages, at most {MAX_PLAN_LEN} allowed",
                stages.len()
            )));
        }
        Ok(ContentPlan(stages))
    }

    pub fn stages(&self) -> &[StageLabel] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<StageLabel> {
        self.0
    }
}

impl std::ops::Index<usize> for ContentPlan {
    type Output = StageLabel;

    fn index(&self, idx: usize) -> &StageLabel {
        &self.0[idx]
    }
}
