use std::cmp::Ordering;

use super::features::InputFeatures;
use super::model::{PlanModel, END, SYMBOLS};
use crate::stage::{ContentPlan, StageLabel, MAX_PLAN_LEN};

#[derive(Clone)]
struct Hyp {
    stages: Vec<StageLabel>,
    ended: bool,
    score: f64,
}

fn rank(a: &Hyp, b: &Hyp) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.stages.cmp(&b.stages))
        .then_with(|| a.ended.cmp(&b.ended))
}

/// Beam search for the most probable plan.
///
/// Scores are total log-probabilities including END, with no length
/// normalization. At `max_len` stages only END is allowed, so a model that
/// never ends yields a plan of exactly `max_len`. `beam_width` 0 is treated
/// as 1 and `max_len` is clamped to `1..=15`.
pub fn predict_plan(
    model: &PlanModel,
    features: &InputFeatures,
    beam_width: usize,
    max_len: usize,
) -> ContentPlan {
    let width = beam_width.max(1);
    let max_len = max_len.clamp(1, MAX_PLAN_LEN);
    let mut live = vec![Hyp {
        stages: Vec::new(),
        ended: false,
        score: 0.0,
    }];
    let mut done: Vec<Hyp> = Vec::new();
    while !live.is_empty() {
        let mut pool: Vec<Hyp> = std::mem::take(&mut done);
        for h in &live {
            let lp = model.next_log_distribution(features, &h.stages);
            // a plan must have at least one stage
            if !h.stages.is_empty() {
                pool.push(Hyp {
                    stages: h.stages.clone(),
                    ended: true,
                    score: h.score + lp[END],
                });
            }
            if h.stages.len() < max_len {
                for (sym, l) in lp.iter().enumerate().take(SYMBOLS - 1) {
                    let mut stages = h.stages.clone();
                    stages.push(StageLabel::ALL[sym]);
                    pool.push(Hyp {
                        stages,
                        ended: false,
                        score: h.score + l,
                    });
                }
            }
        }
        pool.sort_by(rank);
        pool.truncate(width);
        let (d, l): (Vec<Hyp>, Vec<Hyp>) = pool.into_iter().partition(|h| h.ended);
        done = d;
        live = l;
        if done.len() == width {
            // live hypotheses were all pruned; scores only fall from here
            break;
        }
    }
    let best = done
        .into_iter()
        .min_by(rank)
        .expect("final round admits only END, so some hypothesis completes");
    ContentPlan::new(best.stages).expect("length within 1..=max_len")
}

/// Stepwise argmax with END forbidden before the first stage and forced at `max_len`.
pub fn greedy_plan(model: &PlanModel, features: &InputFeatures, max_len: usize) -> ContentPlan {
    predict_plan(model, features, 1, max_len)
}
