use serde::{Deserialize, Serialize};

use crate::corpus::{parse_serialized, SpecialToken, TokenId, Vocabulary, UNK_ID};
use crate::error::{Error, Result};

pub(crate) const INSTR_NEXT: TokenId = 1 + SpecialToken::InstrNext as TokenId;
pub(crate) const INSTR_END: TokenId = 1 + SpecialToken::InstrEnd as TokenId;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecodeConfig {
    pub alpha: f64,
    pub top_s: usize,
    pub max_tokens: usize,
    pub max_instructions: usize,
    pub classifier_floor: f64,
    /// Seed for sampling strategies.
    pub seed: u64,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        DecodeConfig {
            alpha: 0.2,
            top_s: 5,
            max_tokens: 256,
            max_instructions: 15,
            classifier_floor: 1e-9,
            seed: 0,
        }
    }
}

impl DecodeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::invalid(format!(
                "alpha {} outside [0, 1]",
                self.alpha
            )));
        }
        if self.top_s == 0 {
            return Err(Error::invalid("top_s must be at least 1"));
        }
        if self.max_instructions == 0 {
            return Err(Error::invalid("max_instructions must be at least 1"));
        }
        if !(self.classifier_floor > 0.0 && self.classifier_floor <= 1.0) {
            return Err(Error::invalid("classifier_floor must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Generation progress: tokens so far, where the current instruction starts
/// (`k`) and which plan stage it realizes (`j`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DecodeState {
    pub tokens: Vec<TokenId>,
    pub prompt_len: usize,
    pub k: usize,
    pub j: usize,
    /// Number of instructions allowed before the state finishes.
    pub limit: usize,
    pub finished: bool,
}

impl DecodeState {
    /// Checks that `prompt` is a well-formed title/ingredient prefix ending
    /// in `<INSTR_START>` and encodes it.
    pub fn from_prompt<S: AsRef<str>>(
        prompt: &[S],
        vocab: &Vocabulary,
        limit: usize,
    ) -> Result<Self> {
        let strs: Vec<String> = prompt.iter().map(|s| s.as_ref().to_owned()).collect();
        if strs.last().map(String::as_str) != Some(SpecialToken::InstrStart.as_str()) {
            return Err(Error::invalid("prompt must end with <INSTR_START>"));
        }
        let mut probe = strs.clone();
        probe.push("x".into());
        probe.push(SpecialToken::InstrEnd.as_str().into());
        parse_serialized(&probe)?;
        let tokens = vocab.encode(&strs);
        let n = tokens.len();
        Ok(DecodeState {
            tokens,
            prompt_len: n,
            k: n,
            j: 0,
            limit: limit.max(1),
            finished: false,
        })
    }

    /// The current instruction's tokens.
    pub fn partial(&self) -> &[TokenId] {
        &self.tokens[self.k..]
    }

    pub fn generated(&self) -> &[TokenId] {
        &self.tokens[self.prompt_len..]
    }

    /// Content tokens always; separators only once the instruction has content.
    pub fn admissible(&self, id: TokenId) -> bool {
        if id as usize >= Vocabulary::RESERVED {
            return true;
        }
        (id == INSTR_NEXT || id == INSTR_END) && !self.partial().is_empty()
    }
}

/// Appends `token`. `<INSTR_NEXT>` moves to the next stage unless the
/// instruction limit is reached; `<INSTR_END>` or an exhausted limit finishes.
pub fn advance_state(state: &DecodeState, token: TokenId) -> DecodeState {
    let mut s = state.clone();
    s.tokens.push(token);
    if token == INSTR_END {
        s.finished = true;
    } else if token == INSTR_NEXT {
        if s.j + 1 >= s.limit {
            s.finished = true;
        } else {
            s.j += 1;
            s.k = s.tokens.len();
        }
    }
    s
}

/// Decoded output of one generation job.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationResult {
    /// Generated tokens after the prompt, closed by `<INSTR_END>` when any
    /// instruction was produced.
    pub tokens: Vec<String>,
    pub instructions: Vec<Vec<String>>,
    /// Score of each chosen token, in order.
    pub scores: Vec<f64>,
    pub plan_length: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub satisfied_constraints: Option<usize>,
}

impl GenerationResult {
    /// Closes the instruction section: a final `<INSTR_NEXT>` becomes
    /// `<INSTR_END>`, and an open instruction gets one appended.
    pub(crate) fn from_state(state: &DecodeState, vocab: &Vocabulary, scores: Vec<f64>) -> Self {
        let mut ids = state.generated().to_vec();
        match ids.last() {
            Some(&INSTR_NEXT) => *ids.last_mut().unwrap() = INSTR_END,
            Some(&INSTR_END) | None => {}
            Some(_) => ids.push(INSTR_END),
        }
        let mut instructions = Vec::new();
        let mut cur = Vec::new();
        for &id in &ids {
            if id == INSTR_NEXT || id == INSTR_END {
                instructions.push(std::mem::take(&mut cur));
            } else {
                cur.push(vocab.token(id).to_owned());
            }
        }
        GenerationResult {
            tokens: vocab.decode(&ids),
            plan_length: instructions.len(),
            instructions,
            scores,
            satisfied_constraints: None,
        }
    }
}

pub(crate) fn is_content(id: TokenId) -> bool {
    id != UNK_ID && id as usize >= Vocabulary::RESERVED
}
