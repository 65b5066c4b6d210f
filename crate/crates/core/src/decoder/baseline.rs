use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::state::{advance_state, DecodeConfig, DecodeState, GenerationResult};
use crate::corpus::TokenId;
use crate::error::{Error, Result};
use crate::lm::{rank_top, LanguageModel};

/// Unguided decoding strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Strategy {
    Greedy,
    TopK { k: usize },
    Beam { width: usize },
}

impl Strategy {
    fn validate(self) -> Result<()> {
        match self {
            Strategy::TopK { k: 0 } => Err(Error::invalid("top_k needs k >= 1")),
            Strategy::Beam { width: 0 } => Err(Error::invalid("beam needs width >= 1")),
            _ => Ok(()),
        }
    }
}

/// Decodes without a plan; the instruction count is capped by `max_instructions`.
pub fn generate_baseline<L, S>(
    lm: &L,
    prompt: &[S],
    config: &DecodeConfig,
    strategy: Strategy,
) -> Result<GenerationResult>
where
    L: LanguageModel + ?Sized,
    S: AsRef<str>,
{
    config.validate()?;
    strategy.validate()?;
    let state = DecodeState::from_prompt(prompt, lm.vocab(), config.max_instructions)?;
    match strategy {
        Strategy::Greedy => Ok(sample(lm, state, config, 1, None)),
        Strategy::TopK { k } => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            Ok(sample(lm, state, config, k, Some(&mut rng)))
        }
        Strategy::Beam { width } => Ok(beam(lm, state, config, width)),
    }
}

fn sample<L: LanguageModel + ?Sized>(
    lm: &L,
    mut state: DecodeState,
    config: &DecodeConfig,
    k: usize,
    mut rng: Option<&mut ChaCha8Rng>,
) -> GenerationResult {
    let mut scores = Vec::new();
    while !state.finished && scores.len() < config.max_tokens {
        let dist = lm.next_distribution(&state.tokens);
        let top = rank_top(&dist, k, |id| state.admissible(id));
        let (token, p) = match rng.as_deref_mut() {
            None => top[0],
            Some(rng) => {
                let total: f64 = top.iter().map(|c| c.1).sum();
                let mut r = rng.random::<f64>() * total;
                let mut chosen = top[top.len() - 1];
                for &c in &top {
                    if r < c.1 {
                        chosen = c;
                        break;
                    }
                    r -= c.1;
                }
                chosen
            }
        };
        scores.push(p.ln());
        state = advance_state(&state, token);
    }
    GenerationResult::from_state(&state, lm.vocab(), scores)
}

#[derive(Clone)]
pub(crate) struct Hyp {
    pub state: DecodeState,
    pub logp: f64,
    pub scores: Vec<f64>,
}

impl Hyp {
    pub fn normalized(&self) -> f64 {
        let n = self.scores.len();
        if n == 0 {
            0.0
        } else {
            self.logp / n as f64
        }
    }
}

pub(crate) fn by_key(a: f64, b: f64, ta: &[TokenId], tb: &[TokenId]) -> Ordering {
    b.total_cmp(&a).then_with(|| ta.cmp(tb))
}

fn beam<L: LanguageModel + ?Sized>(
    lm: &L,
    state: DecodeState,
    config: &DecodeConfig,
    width: usize,
) -> GenerationResult {
    let mut beam = vec![Hyp {
        state,
        logp: 0.0,
        scores: Vec::new(),
    }];
    for _ in 0..config.max_tokens {
        if beam.iter().all(|h| h.state.finished) {
            break;
        }
        let mut pool = Vec::new();
        for h in beam {
            if h.state.finished {
                pool.push(h);
                continue;
            }
            let dist = lm.next_distribution(&h.state.tokens);
            for (token, p) in rank_top(&dist, width, |id| h.state.admissible(id)) {
                let mut scores = h.scores.clone();
                scores.push(p.ln());
                pool.push(Hyp {
                    state: advance_state(&h.state, token),
                    logp: h.logp + p.ln(),
                    scores,
                });
            }
        }
        pool.sort_by(|a, b| by_key(a.logp, b.logp, &a.state.tokens, &b.state.tokens));
        pool.truncate(width);
        beam = pool;
    }
    let best = beam
        .into_iter()
        .min_by(|a, b| {
            by_key(
                a.normalized(),
                b.normalized(),
                &a.state.tokens,
                &b.state.tokens,
            )
        })
        .expect("beam is never empty");
    GenerationResult::from_state(&best.state, lm.vocab(), best.scores)
}
