//! Content planner: `P(c | x)` over stage sequences given title and ingredients.

mod features;
mod model;
mod report;
mod search;

use rayon::prelude::*;

pub use features::{build_feature_vocab, featurize_input, InputFeatures};
pub use model::{PlanModel, PlannerParams, SymbolDistribution, END, SYMBOLS};
pub use report::{clipped_matches, positional_match, report_from_pairs, PlannerReport};
pub use search::{greedy_plan, predict_plan};

use crate::error::{Error, Result};
use crate::stage::{ContentPlan, StageLabel, MAX_PLAN_LEN};

pub const DEFAULT_BEAM_WIDTH: usize = 4;

pub fn train_planner(
    data: &[(InputFeatures, ContentPlan)],
    feature_vocab: crate::corpus::Vocabulary,
    params: PlannerParams,
) -> Result<PlanModel> {
    PlanModel::train(data, feature_vocab, params)
}

pub fn plan_logprob(
    model: &PlanModel,
    plan: &[StageLabel],
    features: &InputFeatures,
) -> Result<f64> {
    model.plan_logprob(plan, features)
}

/// Predicts every test item in parallel and scores against the references.
pub fn evaluate_planner(
    model: &PlanModel,
    testset: &[(InputFeatures, ContentPlan)],
    beam_width: usize,
) -> Result<PlannerReport> {
    if testset.is_empty() {
        return Err(Error::EmptyInput("planner test set"));
    }
    let pairs: Vec<(ContentPlan, ContentPlan)> = testset
        .par_iter()
        .map(|(f, r)| (predict_plan(model, f, beam_width, MAX_PLAN_LEN), r.clone()))
        .collect();
    Ok(report_from_pairs(&pairs))
}
