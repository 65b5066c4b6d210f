//! Interpolated absolute-discounting n-gram model.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::LanguageModel;
use crate::corpus::{TokenId, Vocabulary};
use crate::error::{Error, Result};

/// Left padding symbol; appears in contexts only, never predicted.
const BOS: TokenId = TokenId::MAX;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct Followers {
    total: u64,
    counts: Vec<(TokenId, u64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Table {
    entries: Vec<(Vec<TokenId>, Followers)>,
}

/// `p(w|h) = max(c(h,w) - d, 0) / c(h) + d * N1+(h .) / c(h) * p(w|h')`,
/// recursing down to a uniform floor below the unigram level. Contexts
/// never seen in training fall back to their longest seen suffix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NGramLmData", into = "NGramLmData")]
pub struct NGramLm {
    order: usize,
    discount: f64,
    vocab: Vocabulary,
    /// `tables[m]` maps contexts of length `m` to their follower counts.
    tables: Vec<BTreeMap<Vec<TokenId>, Followers>>,
}

#[derive(Serialize, Deserialize)]
struct NGramLmData {
    order: usize,
    discount: f64,
    vocab: Vocabulary,
    tables: Vec<Table>,
}

impl TryFrom<NGramLmData> for NGramLm {
    type Error = Error;

    fn try_from(d: NGramLmData) -> Result<Self> {
        if d.order == 0 || d.tables.len() != d.order || !(d.discount > 0.0 && d.discount < 1.0) {
            return Err(Error::ModelFormat("inconsistent n-gram header".into()));
        }
        let v = d.vocab.len() as TokenId;
        let tables = d
            .tables
            .into_iter()
            .map(|t| t.entries.into_iter().collect::<BTreeMap<_, _>>())
            .collect::<Vec<_>>();
        let bad = tables
            .iter()
            .flat_map(|t| t.values())
            .flat_map(|f| &f.counts)
            .any(|(w, _)| *w >= v);
        if bad {
            return Err(Error::ModelFormat(
                "n-gram count refers to a token outside the vocabulary".into(),
            ));
        }
        Ok(NGramLm {
            order: d.order,
            discount: d.discount,
            vocab: d.vocab,
            tables,
        })
    }
}

impl From<NGramLm> for NGramLmData {
    fn from(m: NGramLm) -> Self {
        NGramLmData {
            order: m.order,
            discount: m.discount,
            vocab: m.vocab,
            tables: m
                .tables
                .into_iter()
                .map(|t| Table {
                    entries: t.into_iter().collect(),
                })
                .collect(),
        }
    }
}

impl NGramLm {
    pub const DEFAULT_ORDER: usize = 4;
    pub const DEFAULT_DISCOUNT: f64 = 0.75;

    /// Counts every n-gram of every sequence, each left-padded with `order - 1`
    /// begin symbols. Tokens outside `vocab` count as unknown.
    pub fn train<S: AsRef<str>>(
        vocab: &Vocabulary,
        corpus: &[Vec<S>],
        order: usize,
        discount: f64,
    ) -> Result<Self> {
        let ids: Vec<Vec<TokenId>> = corpus.iter().map(|s| vocab.encode(s)).collect();
        Self::train_ids(vocab.clone(), &ids, order, discount)
    }

    pub fn train_ids(
        vocab: Vocabulary,
        corpus: &[Vec<TokenId>],
        order: usize,
        discount: f64,
    ) -> Result<Self> {
        if order == 0 {
            return Err(Error::invalid("n-gram order must be >= 1"));
        }
        if !(discount > 0.0 && discount < 1.0) {
            return Err(Error::invalid("discount must lie in (0, 1)"));
        }
        if corpus.iter().all(Vec::is_empty) {
            return Err(Error::EmptyInput("language model corpus"));
        }
        let v = vocab.len() as TokenId;
        let mut raw: Vec<BTreeMap<Vec<TokenId>, BTreeMap<TokenId, u64>>> =
            vec![BTreeMap::new(); order];
        for seq in corpus {
            let mut padded = vec![BOS; order - 1];
            padded.extend(seq.iter().map(|&t| if t < v { t } else { 0 }));
            for pos in order - 1..padded.len() {
                let w = padded[pos];
                for (m, table) in raw.iter_mut().enumerate() {
                    let ctx = padded[pos - m..pos].to_vec();
                    *table.entry(ctx).or_default().entry(w).or_default() += 1;
                }
            }
        }
        let tables = raw
            .into_iter()
            .map(|t| {
                t.into_iter()
                    .map(|(ctx, f)| {
                        let total = f.values().sum();
                        (
                            ctx,
                            Followers {
                                total,
                                counts: f.into_iter().collect(),
                            },
                        )
                    })
                    .collect()
            })
            .collect();
        Ok(NGramLm {
            order,
            discount,
            vocab,
            tables,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    /// Context of length `m` ending at the end of `context`, padded with BOS.
    fn context_key(context: &[TokenId], m: usize) -> Vec<TokenId> {
        let mut key = Vec::with_capacity(m);
        if context.len() < m {
            key.resize(m - context.len(), BOS);
            key.extend_from_slice(context);
        } else {
            key.extend_from_slice(&context[context.len() - m..]);
        }
        key
    }

    /// Length of the longest suffix of `context` seen as a history (at most `order - 1`).
    pub fn longest_seen_suffix(&self, context: &[TokenId]) -> usize {
        (0..self.order)
            .rev()
            .find(|&m| self.tables[m].contains_key(&Self::context_key(context, m)))
            .unwrap_or(0)
    }
}

impl LanguageModel for NGramLm {
    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    fn next_distribution(&self, context: &[TokenId]) -> Vec<f64> {
        let v = self.vocab.len();
        let mut p = vec![1.0 / v as f64; v];
        let d = self.discount;
        for m in 0..self.order {
            let Some(f) = self.tables[m].get(&Self::context_key(context, m)) else {
                break;
            };
            let total = f.total as f64;
            let backoff = d * f.counts.len() as f64 / total;
            for x in p.iter_mut() {
                *x *= backoff;
            }
            for &(w, c) in &f.counts {
                p[w as usize] += (c as f64 - d).max(0.0) / total;
            }
        }
        p
    }
}
