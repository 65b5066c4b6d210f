use super::state::{advance_state, is_content, DecodeConfig, DecodeState, GenerationResult};
use crate::classifier::StageScorer;
use crate::corpus::TokenId;
use crate::error::Result;
use crate::lm::{rank_top, LanguageModel};
use crate::stage::ContentPlan;

/// A scored candidate of one decoding step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub token: TokenId,
    pub lm_prob: f64,
    pub stage_prob: f64,
    pub score: f64,
}

/// All top-S candidates with their mixed scores, in LM rank order.
pub fn score_candidates<L, C>(
    lm: &L,
    clf: &C,
    state: &DecodeState,
    plan: &ContentPlan,
    config: &DecodeConfig,
) -> Result<Vec<Candidate>>
where
    L: LanguageModel + ?Sized,
    C: StageScorer + ?Sized,
{
    let vocab = lm.vocab();
    let dist = lm.next_distribution(&state.tokens);
    let top = rank_top(&dist, config.top_s, |id| state.admissible(id));
    let stage = plan[state.j.min(plan.len() - 1)].index();
    let partial: Vec<&str> = state.partial().iter().map(|&id| vocab.token(id)).collect();
    let alpha = config.alpha;
    let mut base = None;
    let mut out = Vec::with_capacity(top.len());
    for (token, p) in top {
        let stage_prob = if alpha == 0.0 {
            1.0
        } else if is_content(token) {
            let mut ext = partial.clone();
            ext.push(vocab.token(token));
            clf.stage_distribution(&ext)?[stage]
        } else {
            match base {
                Some(b) => b,
                None => {
                    let b = clf.stage_distribution(&partial)?[stage];
                    base = Some(b);
                    b
                }
            }
        };
        let score = (1.0 - alpha) * p.ln() + alpha * stage_prob.max(config.classifier_floor).ln();
        out.push(Candidate {
            token,
            lm_prob: p,
            stage_prob,
            score,
        });
    }
    Ok(out)
}

/// Highest score, ties to the lower id.
pub fn pick(cands: &[Candidate]) -> Candidate {
    let mut best = cands[0];
    for c in &cands[1..] {
        if c.score > best.score || (c.score == best.score && c.token < best.token) {
            best = *c;
        }
    }
    best
}

/// One step of plan-aware decoding: the top-S candidate maximizing
/// `(1-alpha) log p_lm + alpha log max(p_stage, floor)`.
pub fn plan_aware_step<L, C>(
    lm: &L,
    clf: &C,
    state: &DecodeState,
    plan: &ContentPlan,
    config: &DecodeConfig,
) -> Result<Candidate>
where
    L: LanguageModel + ?Sized,
    C: StageScorer + ?Sized,
{
    Ok(pick(&score_candidates(lm, clf, state, plan, config)?))
}

/// Plan-guided generation of the instruction section after `prompt`.
pub fn generate<L, C, S>(
    lm: &L,
    clf: &C,
    plan: &ContentPlan,
    prompt: &[S],
    config: &DecodeConfig,
) -> Result<GenerationResult>
where
    L: LanguageModel + ?Sized,
    C: StageScorer + ?Sized,
    S: AsRef<str>,
{
    config.validate()?;
    let limit = plan.len().min(config.max_instructions);
    let mut state = DecodeState::from_prompt(prompt, lm.vocab(), limit)?;
    let mut scores = Vec::new();
    while !state.finished && scores.len() < config.max_tokens {
        let c = plan_aware_step(lm, clf, &state, plan, config)?;
        scores.push(c.score);
        state = advance_state(&state, c.token);
    }
    Ok(GenerationResult::from_state(&state, lm.vocab(), scores))
}
