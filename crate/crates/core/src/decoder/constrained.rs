use super::baseline::{by_key, Hyp};
use super::state::{advance_state, DecodeConfig, DecodeState, GenerationResult};
use crate::corpus::TokenId;
use crate::error::{Error, Result};
use crate::lm::{rank_top, LanguageModel};

/// Score added when a hypothesis first contains a constraint.
pub const CONSTRAINT_BONUS: f64 = 5.0;

#[derive(Clone)]
struct CHyp {
    hyp: Hyp,
    satisfied: Vec<bool>,
}

impl CHyp {
    fn count(&self) -> usize {
        self.satisfied.iter().filter(|&&s| s).count()
    }

    fn total(&self) -> f64 {
        self.hyp.logp + CONSTRAINT_BONUS * self.count() as f64
    }
}

/// Number of `constraints` occurring as contiguous runs of `tokens`.
pub fn count_satisfied<S: AsRef<str>>(tokens: &[S], constraints: &[Vec<String>]) -> usize {
    let toks: Vec<&str> = tokens.iter().map(AsRef::as_ref).collect();
    constraints
        .iter()
        .filter(|c| {
            !c.is_empty()
                && toks
                    .windows(c.len())
                    .any(|w| w.iter().zip(c.iter()).all(|(a, b)| a == b))
        })
        .count()
}

/// Beam search that rewards hypotheses for containing each constraint
/// token sequence. Every hypothesis expands its `2 * beam_width` best
/// tokens plus any token that starts or extends a pending constraint. The
/// result maximizes satisfied constraints, then length-normalized
/// log-probability.
pub fn generate_lexically_constrained<L, S>(
    lm: &L,
    prompt: &[S],
    constraints: &[Vec<String>],
    beam_width: usize,
    config: &DecodeConfig,
) -> Result<GenerationResult>
where
    L: LanguageModel + ?Sized,
    S: AsRef<str>,
{
    config.validate()?;
    if constraints.is_empty() || constraints.iter().any(Vec::is_empty) {
        return Err(Error::invalid(
            "constraints must be a non-empty set of non-empty sequences",
        ));
    }
    if beam_width == 0 {
        return Err(Error::invalid("beam width must be at least 1"));
    }
    let vocab = lm.vocab();
    let ids: Vec<Vec<TokenId>> = constraints.iter().map(|c| vocab.encode(c)).collect();
    let state = DecodeState::from_prompt(prompt, vocab, config.max_instructions)?;
    let mut beam = vec![CHyp {
        hyp: Hyp {
            state,
            logp: 0.0,
            scores: Vec::new(),
        },
        satisfied: vec![false; ids.len()],
    }];
    for _ in 0..config.max_tokens {
        if beam.iter().all(|h| h.hyp.state.finished) {
            break;
        }
        let mut pool = Vec::new();
        for h in beam {
            if h.hyp.state.finished {
                pool.push(h);
                continue;
            }
            let st = &h.hyp.state;
            let dist = lm.next_distribution(&st.tokens);
            let mut cands: Vec<TokenId> = rank_top(&dist, 2 * beam_width, |id| st.admissible(id))
                .into_iter()
                .map(|c| c.0)
                .collect();
            let gen = st.generated();
            for (c, done) in ids.iter().zip(&h.satisfied) {
                if *done {
                    continue;
                }
                for m in 0..c.len() {
                    if gen.ends_with(&c[..m]) && st.admissible(c[m]) {
                        cands.push(c[m]);
                    }
                }
            }
            cands.sort_unstable();
            cands.dedup();
            for token in cands {
                let lp = dist[token as usize].ln();
                let state = advance_state(st, token);
                let gen = state.generated();
                let satisfied = ids
                    .iter()
                    .zip(&h.satisfied)
                    .map(|(c, &done)| done || gen.ends_with(c))
                    .collect();
                let mut scores = h.hyp.scores.clone();
                scores.push(lp);
                pool.push(CHyp {
                    hyp: Hyp {
                        state,
                        logp: h.hyp.logp + lp,
                        scores,
                    },
                    satisfied,
                });
            }
        }
        pool.sort_by(|a, b| {
            by_key(
                a.total(),
                b.total(),
                &a.hyp.state.tokens,
                &b.hyp.state.tokens,
            )
        });
        pool.truncate(beam_width);
        beam = pool;
    }
    let best = beam
        .into_iter()
        .min_by(|a, b| {
            b.count().cmp(&a.count()).then_with(|| {
                by_key(
                    a.hyp.normalized(),
                    b.hyp.normalized(),
                    &a.hyp.state.tokens,
                    &b.hyp.state.tokens,
                )
            })
        })
        .expect("beam is never empty");
    let mut result = GenerationResult::from_state(&best.hyp.state, vocab, best.hyp.scores.clone());
    result.satisfied_constraints = Some(best.count());
    Ok(result)
}
