//! Plan-aware decoding and the unguided baselines it is compared against.

mod baseline;
mod constrained;
mod guided;
mod state;

pub use baseline::{generate_baseline, Strategy};
pub use constrained::{count_satisfied, generate_lexically_constrained, CONSTRAINT_BONUS};
pub use guided::{generate, pick, plan_aware_step, score_candidates, Candidate};
pub use state::{advance_state, DecodeConfig, DecodeState, GenerationResult};

#[cfg(test)]
mod tests;
