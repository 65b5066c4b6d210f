//! Log-linear autoregressive model over stage sequences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::{InputFeatures, INGREDIENT_BUCKETS, TITLE_BUCKETS};
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::stage::{ContentPlan, StageLabel, MAX_PLAN_LEN};

/// Seven stages plus the end-of-plan symbol.
pub const SYMBOLS: usize = StageLabel::COUNT + 1;
pub const END: usize = StageLabel::COUNT;
/// History slot value before the first stage.
const BOS: usize = StageLabel::COUNT;
const HISTORY_VALUES: usize = StageLabel::COUNT + 1;
pub const POSITION_BUCKETS: usize = MAX_PLAN_LEN + 1;

pub type SymbolDistribution = [f64; SYMBOLS];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannerParams {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    pub history: usize,
    /// Recorded for provenance; full-batch descent from zero is already deterministic.
    pub seed: u64,
}

impl Default for PlannerParams {
    fn default() -> Self {
        PlannerParams {
            learning_rate: 1.0,
            epochs: 100,
            l2: 1e-4,
            history: 2,
            seed: 0,
        }
    }
}

/// `p(c_j | c_<j, x)` as a softmax over 8 symbols of summed feature weights.
///
/// Features: the previous `history` stages (one slot each), the position,
/// title-length and ingredient-count buckets, and the input tokens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanModel {
    history: usize,
    feature_vocab: Vocabulary,
    bias: SymbolDistribution,
    weights: Vec<SymbolDistribution>,
    /// Regularized training loss after each epoch.
    #[serde(default)]
    training_loss: Vec<f64>,
}

impl PlanModel {
    /// All-zero weights: every symbol has probability 1/8 in every state.
    pub fn uniform(feature_vocab: Vocabulary, history: usize) -> Self {
        let n = Self::feature_space(history, feature_vocab.len());
        PlanModel {
            history,
            feature_vocab,
            bias: [0.0; SYMBOLS],
            weights: vec![[0.0; SYMBOLS]; n],
            training_loss: Vec::new(),
        }
    }

    /// Weights drawn uniformly from `[-scale, scale]`, for toy models.
    pub fn random(feature_vocab: Vocabulary, history: usize, scale: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = Self::uniform(feature_vocab, history);
        for w in m.weights.iter_mut().chain(std::iter::once(&mut m.bias)) {
            for x in w.iter_mut() {
                *x = rng.random_range(-scale..=scale);
            }
        }
        m
    }

    fn feature_space(history: usize, vocab: usize) -> usize {
        history * HISTORY_VALUES + POSITION_BUCKETS + TITLE_BUCKETS + INGREDIENT_BUCKETS + vocab
    }

    pub fn history(&self) -> usize {
        self.history
    }

    pub fn feature_vocab(&self) -> &Vocabulary {
        &self.feature_vocab
    }

    pub fn training_loss(&self) -> &[f64] {
        &self.training_loss
    }

    pub fn bias_mut(&mut self) -> &mut SymbolDistribution {
        &mut self.bias
    }

    /// Feature indices active when predicting position `prefix.len()`.
    fn active(&self, features: &InputFeatures, prefix: &[StageLabel]) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.history + 3 + features.tokens().len());
        for d in 0..self.history {
            let v = prefix
                .len()
                .checked_sub(d + 1)
                .map_or(BOS, |i| prefix[i].index());
            out.push(d * HISTORY_VALUES + v);
        }
        let mut off = self.history * HISTORY_VALUES;
        out.push(off + prefix.len().min(POSITION_BUCKETS - 1));
        off += POSITION_BUCKETS;
        out.push(off + features.title_bucket());
        off += TITLE_BUCKETS;
        out.push(off + features.ingredient_bucket());
        off += INGREDIENT_BUCKETS;
        let v = self.feature_vocab.len();
        out.extend(
            features
                .tokens()
                .iter()
                .filter(|&&t| (t as usize) < v)
                .map(|&t| off + t as usize),
        );
        out
    }

    fn log_softmax(&self, active: &[usize]) -> SymbolDistribution {
        let mut z = self.bias;
        for &f in active {
            for (zi, w) in z.iter_mut().zip(&self.weights[f]) {
                *zi += w;
            }
        }
        let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + z.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
        z.map(|x| x - lse)
    }

    /// Log-probabilities of the next symbol after `prefix`; index [`END`] ends the plan.
    pub fn next_log_distribution(
        &self,
        features: &InputFeatures,
        prefix: &[StageLabel],
    ) -> SymbolDistribution {
        self.log_softmax(&self.active(features, prefix))
    }

    pub fn next_distribution(
        &self,
        features: &InputFeatures,
        prefix: &[StageLabel],
    ) -> SymbolDistribution {
        self.next_log_distribution(features, prefix).map(f64::exp)
    }

    /// `log P(c | x)`: stage log-probabilities plus the closing END.
    pub fn plan_logprob(&self, plan: &[StageLabel], features: &InputFeatures) -> Result<f64> {
        if plan.is_empty() {
            return Err(Error::invalid("plan_logprob of an empty plan"));
        }
        let mut total = 0.0;
        for j in 0..plan.len() {
            total += self.next_log_distribution(features, &plan[..j])[plan[j].index()];
        }
        Ok(total + self.next_log_distribution(features, plan)[END])
    }

    /// Fits by full-batch gradient descent on the mean next-symbol negative
    /// log-likelihood plus `l2/2 * |W|^2` (the per-symbol bias is not
    /// penalized). A step that would raise the loss is retried at half the
    /// learning rate, so the recorded loss never increases.
    pub fn train(
        data: &[(InputFeatures, ContentPlan)],
        feature_vocab: Vocabulary,
        params: PlannerParams,
    ) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyInput("planner training data"));
        }
        if params.learning_rate.is_nan()
            || params.learning_rate <= 0.0
            || params.l2 < 0.0
            || !params.l2.is_finite()
        {
            return Err(Error::invalid("learning_rate must be > 0 and l2 >= 0"));
        }
        let mut model = Self::uniform(feature_vocab, params.history);
        let mut steps: Vec<(Vec<usize>, usize)> = Vec::new();
        for (feats, plan) in data {
            let st = plan.stages();
            for j in 0..=st.len() {
                let target = st.get(j).map_or(END, |s| s.index());
                steps.push((model.active(feats, &st[..j]), target));
            }
        }
        let m = steps.len() as f64;

        let objective = |model: &PlanModel| -> f64 {
            let nll: f64 = steps.iter().map(|(a, y)| -model.log_softmax(a)[*y]).sum();
            let reg: f64 = model.weights.iter().flatten().map(|w| w * w).sum();
            nll / m + 0.5 * params.l2 * reg
        };
        let gradient = |model: &PlanModel| -> (SymbolDistribution, Vec<SymbolDistribution>) {
            let mut gb = [0.0; SYMBOLS];
            let mut gw = vec![[0.0; SYMBOLS]; model.weights.len()];
            for (a, y) in &steps {
                let mut d = model.log_softmax(a).map(f64::exp);
                d[*y] -= 1.0;
                for (g, x) in gb.iter_mut().zip(&d) {
                    *g += x / m;
                }
                for &f in a {
                    for (g, x) in gw[f].iter_mut().zip(&d) {
                        *g += x / m;
                    }
                }
            }
            for (g, w) in gw.iter_mut().zip(&model.weights) {
                for (gi, wi) in g.iter_mut().zip(w) {
                    *gi += params.l2 * wi;
                }
            }
            (gb, gw)
        };

        let mut loss = objective(&model);
        if !loss.is_finite() {
            return Err(Error::NonFinite(format!("initial loss {loss}")));
        }
        let mut lr = params.learning_rate;
        for _ in 0..params.epochs {
            let (gb, gw) = gradient(&model);
            loop {
                let mut cand = model.clone();
                for (b, g) in cand.bias.iter_mut().zip(&gb) {
                    *b -= lr * g;
                }
                for (w, g) in cand.weights.iter_mut().zip(&gw) {
                    for (wi, gi) in w.iter_mut().zip(g) {
                        *wi -= lr * gi;
                    }
                }
                let new_loss = objective(&cand);
                if new_loss.is_nan() {
                    return Err(Error::NonFinite("training loss became NaN".into()));
                }
                if new_loss <= loss {
                    model = cand;
                    loss = new_loss;
                    break;
                }
                lr *= 0.5;
                if lr < 1e-12 {
                    break;
                }
            }
            model.training_loss.push(loss);
            if lr < 1e-12 {
                break;
            }
        }
        Ok(model)
    }
}
