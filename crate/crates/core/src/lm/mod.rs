//! Next-token distribution providers for the sequence generator.

mod ngram;

pub use ngram::NGramLm;

use crate::corpus::{TokenId, Vocabulary};
use crate::error::{Error, Result};

/// Anything that turns a context into a distribution over a vocabulary.
///
/// Implementations must return a vector of `vocab().len()` strictly positive
/// entries summing to 1. Contexts may be empty.
pub trait LanguageModel: Send + Sync {
    fn vocab(&self) -> &Vocabulary;

    fn next_distribution(&self, context: &[TokenId]) -> Vec<f64>;
}

impl<T: LanguageModel + ?Sized> LanguageModel for &T {
    fn vocab(&self) -> &Vocabulary {
        (**self).vocab()
    }

    fn next_distribution(&self, context: &[TokenId]) -> Vec<f64> {
        (**self).next_distribution(context)
    }
}

/// Highest-probability entries of `dist` among ids accepted by `keep`,
/// descending by probability, ties by ascending id.
pub fn rank_top(dist: &[f64], s: usize, keep: impl Fn(TokenId) -> bool) -> Vec<(TokenId, f64)> {
    let mut ranked: Vec<(TokenId, f64)> = dist
        .iter()
        .enumerate()
        .map(|(i, p)| (i as TokenId, *p))
        .filter(|(i, _)| keep(*i))
        .collect();
    let by_rank = |a: &(TokenId, f64), b: &(TokenId, f64)| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0));
    if ranked.len() > s {
        ranked.select_nth_unstable_by(s, by_rank);
        ranked.truncate(s);
    }
    ranked.sort_by(by_rank);
    ranked
}

/// The `s` most probable next tokens with their raw probabilities.
pub fn top_s<L: LanguageModel + ?Sized>(
    lm: &L,
    context: &[TokenId],
    s: usize,
) -> Result<Vec<(TokenId, f64)>> {
    let v = lm.vocab().len();
    if s == 0 || s > v {
        return Err(Error::invalid(format!("top-S size {s} outside 1..={v}")));
    }
    Ok(rank_top(&lm.next_distribution(context), s, |_| true))
}

/// exp of the mean negative log-probability over every token of every sequence.
pub fn perplexity<L: LanguageModel + ?Sized>(lm: &L, corpus: &[Vec<TokenId>]) -> Result<f64> {
    let mut nll = 0.0;
    let mut n = 0usize;
    for seq in corpus {
        for i in 0..seq.len() {
            let p = lm.next_distribution(&seq[..i])[seq[i] as usize];
            nll -= p.ln();
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::EmptyInput("perplexity corpus"));
    }
    Ok((nll / n as f64).exp())
}
