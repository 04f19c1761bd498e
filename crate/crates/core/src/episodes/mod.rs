//! Serial episodes: mining, significance, template matching and the motif
//! graph over significant edges.
//!
//! An episode is an ordered tag chain with a maximum delay per step. Its
//! support is the number of minimal occurrences — matches whose time span
//! contains no shorter match of the same chain — which keeps support
//! anti-monotone under prefix extension and makes level-wise mining sound.

mod graph;
mod matching;
mod mining;

pub use graph::{build_graph, export_dot, find_motifs, MotifEdge, MotifGraph, MotifPattern};
pub use matching::{match_template, Detection, StreamingMatcher};
pub use mining::{
    count_minimal_occurrences, episode_significance, mine_episodes, EpisodeStats,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::events::TagId;

#[derive(Debug, Error, PartialEq)]
pub enum EpisodeError {
    #[error("episode chains need at least two tags, got {0}")]
    ChainTooShort(usize),
    #[error("step delays must be positive")]
    NonPositiveDelay,
    #[error("chain of length {chain} needs {chain} − 1 step delays, got {delays}")]
    DelayCountMismatch { chain: usize, delays: usize },
    #[error("tag index {tag} out of range for k={k}")]
    UnknownTag { tag: TagId, k: usize },
    #[error("inputs disagree on tag count: {0} vs {1}")]
    MismatchedK(usize, usize),
    #[error("at least 19 permutations are needed to resolve p ≤ 0.05, got {0}")]
    TooFewPermutations(u32),
    #[error("unknown motif pattern {0:?}")]
    UnknownPattern(String),
}

/// An ordered tag chain with a maximum delay for each consecutive step.
/// Tags may repeat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub chain: Vec<TagId>,
    pub step_delays: Vec<f64>,
    pub label: Option<String>,
}

impl Episode {
    pub fn new(
        chain: Vec<TagId>,
        step_delays: Vec<f64>,
        label: Option<String>,
    ) -> Result<Self, EpisodeError> {
        if chain.len() < 2 {
            return Err(EpisodeError::ChainTooShort(chain.len()));
        }
        if step_delays.len() != chain.len() - 1 {
            return Err(EpisodeError::DelayCountMismatch {
                chain: chain.len(),
                delays: step_delays.len(),
            });
        }
        if step_delays.iter().any(|&d| !(d > 0.0)) {
            return Err(EpisodeError::NonPositiveDelay);
        }
        Ok(Episode {
            chain,
            step_delays,
            label,
        })
    }

    /// Chain with the same maximum delay at every step.
    pub fn uniform(chain: Vec<TagId>, delay: f64) -> Result<Self, EpisodeError> {
        let steps = chain.len().saturating_sub(1);
        Self::new(chain, vec![delay; steps], None)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn len(&self) -> usize {
        self.chain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chain.is_empty()
    }

    /// Sum of step delays: the longest time a full occurrence can span.
    pub fn horizon(&self) -> f64 {
        self.step_delays.iter().sum()
    }
}
