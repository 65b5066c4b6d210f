//! Partial-instruction stage classifier.
//!
//! A multinomial model over unigram and bigram features. Class-conditional
//! feature distributions are the empirical frequencies mixed with a uniform
//! floor, so the fit depends only on relative counts: duplicating the
//! training set leaves the model unchanged. A class absent from training
//! scores each feature at the lowest rate any trained class gives it, so it
//! never gains from evidence and its mass comes from the prior.

mod dataset;

pub use dataset::{make_partial_dataset, PartialInstruction};

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::SpecialToken;
use crate::error::{Error, Result};
use crate::stage::StageLabel;

const K: usize = StageLabel::COUNT;

pub type StageDistribution = [f64; K];

/// Something that maps a partial instruction to a distribution over stages.
pub trait StageScorer: Send + Sync {
    fn stage_distribution(&self, partial: &[&str]) -> Result<StageDistribution>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierParams {
    /// Weight of the uniform floor mixed into each feature distribution.
    pub feature_smoothing: f64,
    /// Weight of the uniform floor mixed into the class prior.
    pub prior_smoothing: f64,
}

impl Default for ClassifierParams {
    fn default() -> Self {
        ClassifierParams {
            feature_smoothing: 0.1,
            prior_smoothing: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ClassifierData", into = "ClassifierData")]
pub struct StageClassifier {
    params: ClassifierParams,
    log_prior: StageDistribution,
    /// Feature keys: a token, or two tokens joined by a space.
    features: Vec<String>,
    log_likelihood: Vec<StageDistribution>,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct ClassifierData {
    params: ClassifierParams,
    log_prior: StageDistribution,
    features: Vec<String>,
    log_likelihood: Vec<StageDistribution>,
}

impl TryFrom<ClassifierData> for StageClassifier {
    type Error = Error;

    fn try_from(d: ClassifierData) -> Result<Self> {
        if d.features.len() != d.log_likelihood.len() {
            return Err(Error::ModelFormat(
                "feature and weight tables differ in length".into(),
            ));
        }
        let index: HashMap<String, usize> = d
            .features
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, f)| (f, i))
            .collect();
        if index.len() != d.features.len() {
            return Err(Error::ModelFormat("duplicate classifier feature".into()));
        }
        Ok(StageClassifier {
            params: d.params,
            log_prior: d.log_prior,
            features: d.features,
            log_likelihood: d.log_likelihood,
            index,
        })
    }
}

impl From<StageClassifier> for ClassifierData {
    fn from(c: StageClassifier) -> Self {
        ClassifierData {
            params: c.params,
            log_prior: c.log_prior,
            features: c.features,
            log_likelihood: c.log_likelihood,
        }
    }
}

/// Content tokens of a partial instruction, separation tokens removed.
fn content<S: AsRef<str>>(partial: &[S]) -> Vec<&str> {
    partial
        .iter()
        .map(AsRef::as_ref)
        .filter(|t| !SpecialToken::is_special(t))
        .collect()
}

fn feature_keys<'a>(tokens: &'a [&'a str]) -> impl Iterator<Item = String> + 'a {
    let unigrams = tokens.iter().map(|t| (*t).to_owned());
    let bigrams = tokens.windows(2).map(|w| format!("{} {}", w[0], w[1]));
    unigrams.chain(bigrams)
}

fn normalize_log(scores: StageDistribution) -> StageDistribution {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut p = scores.map(|s| (s - max).exp());
    let z: f64 = p.iter().sum();
    for x in p.iter_mut() {
        *x /= z;
    }
    p
}

impl StageClassifier {
    pub fn train(data: &[PartialInstruction], params: ClassifierParams) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyInput("classifier training data"));
        }
        let valid = |x: f64| x.is_finite() && x >= 0.0;
        if !valid(params.feature_smoothing)
            || !valid(params.prior_smoothing)
            || params.feature_smoothing == 0.0
        {
            return Err(Error::invalid(
                "feature_smoothing must be > 0 and prior_smoothing >= 0",
            ));
        }
        let mut docs = [0u64; K];
        let mut totals = [0u64; K];
        let mut counts: BTreeMap<String, [u64; K]> = BTreeMap::new();
        for ex in data {
            let toks = content(&ex.tokens);
            if toks.is_empty() {
                return Err(Error::invalid("partial instruction without content tokens"));
            }
            let c = ex.label.index();
            docs[c] += 1;
            for key in feature_keys(&toks) {
                counts.entry(key).or_insert([0; K])[c] += 1;
                totals[c] += 1;
            }
        }
        let n_docs: u64 = docs.iter().sum();
        let n_feats = counts.len() as f64;
        let beta = params.feature_smoothing;
        let gamma = params.prior_smoothing;

        let log_prior = std::array::from_fn(|c| {
            ((docs[c] as f64 / n_docs as f64 + gamma / K as f64) / (1.0 + gamma)).ln()
        });
        let mix = |n: u64, t: u64| ((n as f64 / t as f64 + beta / n_feats) / (1.0 + beta)).ln();
        let (features, log_likelihood) = counts
            .into_iter()
            .map(|(key, n)| {
                let trained: StageDistribution = std::array::from_fn(|c| {
                    if docs[c] == 0 {
                        f64::INFINITY
                    } else {
                        mix(n[c], totals[c])
                    }
                });
                let floor = trained.iter().copied().fold(f64::INFINITY, f64::min);
                let row = trained.map(|l| if l.is_finite() { l } else { floor });
                (key, row)
            })
            .unzip::<_, _, Vec<_>, Vec<_>>();
        ClassifierData {
            params,
            log_prior,
            features,
            log_likelihood,
        }
        .try_into()
    }

    /// Stage distribution of a partial instruction; separation tokens are ignored.
    pub fn classify<S: AsRef<str>>(&self, partial: &[S]) -> Result<StageDistribution> {
        let toks = content(partial);
        if toks.is_empty() {
            return Err(Error::invalid(
                "cannot classify an empty partial instruction",
            ));
        }
        let mut scores = self.log_prior;
        for key in feature_keys(&toks) {
            if let Some(&i) = self.index.get(&key) {
                for (s, l) in scores.iter_mut().zip(&self.log_likelihood[i]) {
                    *s += l;
                }
            }
        }
        Ok(normalize_log(scores))
    }

    pub fn prior(&self) -> StageDistribution {
        normalize_log(self.log_prior)
    }

    pub fn params(&self) -> ClassifierParams {
        self.params
    }

    pub fn feature_count(&self) -> usize {
        self.features.len()
    }
}

impl StageScorer for StageClassifier {
    fn stage_distribution(&self, partial: &[&str]) -> Result<StageDistribution> {
        self.classify(partial)
    }
}

/// Index of the largest entry; ties go to the earlier stage.
pub fn argmax_stage(dist: &StageDistribution) -> StageLabel {
    let mut best = 0;
    for i in 1..K {
        if dist[i] > dist[best] {
            best = i;
        }
    }
    StageLabel::ALL[best]
}

/// Argmax accuracy in percent.
pub fn evaluate_classifier<C: StageScorer + ?Sized>(
    model: &C,
    labeled: &[PartialInstruction],
) -> Result<f64> {
    if labeled.is_empty() {
        return Err(Error::EmptyInput("classifier evaluation set"));
    }
    let mut correct = 0usize;
    for ex in labeled {
        let toks: Vec<&str> = ex.tokens.iter().map(String::as_str).collect();
        if argmax_stage(&model.stage_distribution(&toks)?) == ex.label {
            correct += 1;
        }
    }
    Ok(100.0 * correct as f64 / labeled.len() as f64)
}
