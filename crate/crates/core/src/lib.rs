//! Plan-guided recipe generation.
//!
//! The pipeline tags recipe instructions with stage labels, learns to
//! predict a stage plan from a title and ingredient list, and steers a
//! language model toward that plan by re-ranking its top candidates with a
//! partial-instruction stage classifier.

pub mod classifier;
pub mod corpus;
pub mod decoder;
pub mod error;
pub mod lm;
pub mod metrics;
pub mod planner;
pub mod stage;
pub mod tagger;

pub use error::{Error, Result};
pub use stage::{ContentPlan, StageLabel, MAX_PLAN_LEN};
