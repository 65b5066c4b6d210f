use std::path::{Path, PathBuf};

use clap::Args;
use plangen::classifier::{make_partial_dataset, ClassifierParams, StageClassifier};
use plangen::corpus::{
    build_vocabulary, load_corpus, serialize_with_tokens, PreprocessConfig, RecipeRecord,
};
use plangen::lm::{perplexity, NGramLm};
use plangen::planner::{
    build_feature_vocab, featurize_input, train_planner as fit_planner, PlannerParams,
};
use plangen::ContentPlan;
use serde::{Deserialize, Serialize};

use super::Ctx;
use crate::artifact::{join_plans, plan_index, read_plans, save_model};
use crate::config::{existing, require, writable};
use crate::error::CliResult;

pub const PLANNER_FORMAT: &str = "plangen/planner";
pub const CLASSIFIER_FORMAT: &str = "plangen/stage-classifier";
pub const LM_FORMAT: &str = "plangen/ngram-lm";

fn corpus_with_plans(
    corpus: &Path,
    plans: &Path,
) -> CliResult<(Vec<RecipeRecord>, Vec<ContentPlan>)> {
    existing(corpus)?;
    existing(plans)?;
    let recs = load_corpus(corpus, &PreprocessConfig::default())?;
    let index = plan_index(read_plans(plans)?)?;
    let plans = join_plans(&recs, &index)?;
    Ok((recs, plans))
}

#[derive(Args, Debug, Serialize)]
pub struct TrainPlannerArgs {
    /// Training corpus JSONL.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Reference plans JSONL, joined to the corpus by id.
    #[arg(long)]
    plans: Option<PathBuf>,
    /// Model file to write.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    l2: Option<f64>,
    /// Number of previous stages the model conditions on.
    #[arg(long)]
    history: Option<usize>,
    /// Minimum count for input feature tokens.
    #[arg(long)]
    min_count: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrainPlannerSettings {
    corpus: Option<PathBuf>,
    plans: Option<PathBuf>,
    out: Option<PathBuf>,
    learning_rate: f64,
    epochs: usize,
    l2: f64,
    history: usize,
    min_count: usize,
}

impl Default for TrainPlannerSettings {
    fn default() -> Self {
        let p = PlannerParams::default();
        TrainPlannerSettings {
            corpus: None,
            plans: None,
            out: None,
            learning_rate: p.learning_rate,
            epochs: p.epochs,
            l2: p.l2,
            history: p.history,
            min_count: 1,
        }
    }
}

pub fn train_planner(ctx: &Ctx, args: &TrainPlannerArgs) -> CliResult<()> {
    let (s, prov): (TrainPlannerSettings, _) = ctx.settings("train-planner", args)?;
    let out = require(&s.out, "out")?;
    writable(out)?;
    let (recs, plans) =
        corpus_with_plans(require(&s.corpus, "corpus")?, require(&s.plans, "plans")?)?;
    let fv = build_feature_vocab(&recs, s.min_count);
    let data: Vec<_> = recs
        .iter()
        .zip(plans)
        .map(|(r, p)| (featurize_input(r, &fv), p))
        .collect();
    let params = PlannerParams {
        learning_rate: s.learning_rate,
        epochs: s.epochs,
        l2: s.l2,
        history: s.history,
        seed: ctx.global.seed,
    };
    let model = fit_planner(&data, fv, params)?;
    save_model(out, PLANNER_FORMAT, &prov, &model)?;
    println!(
        "train-planner: {} plans, final loss {:.6}",
        data.len(),
        model.training_loss().last().copied().unwrap_or(f64::NAN)
    );
    Ok(())
}

#[derive(Args, Debug, Serialize)]
pub struct TrainClassifierArgs {
    /// Training corpus JSONL.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Stage plans JSONL, joined to the corpus by id.
    #[arg(long)]
    plans: Option<PathBuf>,
    /// Model file to write.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Training examples per instruction (the full form plus random prefixes).
    #[arg(long)]
    truncations: Option<usize>,
    /// Shortest prefix length.
    #[arg(long)]
    min_prefix: Option<usize>,
    #[arg(long)]
    feature_smoothing: Option<f64>,
    #[arg(long)]
    prior_smoothing: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrainClassifierSettings {
    corpus: Option<PathBuf>,
    plans: Option<PathBuf>,
    out: Option<PathBuf>,
    truncations: usize,
    min_prefix: usize,
    feature_smoothing: f64,
    prior_smoothing: f64,
}

impl Default for TrainClassifierSettings {
    fn default() -> Self {
        let p = ClassifierParams::default();
        TrainClassifierSettings {
            corpus: None,
            plans: None,
            out: None,
            truncations: 7,
            min_prefix: 1,
            feature_smoothing: p.feature_smoothing,
            prior_smoothing: p.prior_smoothing,
        }
    }
}

pub fn train_classifier(ctx: &Ctx, args: &TrainClassifierArgs) -> CliResult<()> {
    let (s, prov): (TrainClassifierSettings, _) = ctx.settings("train-classifier", args)?;
    let out = require(&s.out, "out")?;
    writable(out)?;
    let (recs, plans) =
        corpus_with_plans(require(&s.corpus, "corpus")?, require(&s.plans, "plans")?)?;
    let data = make_partial_dataset(&recs, &plans, s.truncations, s.min_prefix, ctx.global.seed)?;
    let params = ClassifierParams {
        feature_smoothing: s.feature_smoothing,
        prior_smoothing: s.prior_smoothing,
    };
    let model = StageClassifier::train(&data, params)?;
    save_model(out, CLASSIFIER_FORMAT, &prov, &model)?;
    println!(
        "train-classifier: {} partial instructions, {} features",
        data.len(),
        model.feature_count()
    );
    Ok(())
}

#[derive(Args, Debug, Serialize)]
pub struct TrainLmArgs {
    /// Training corpus JSONL.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Model file to write.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    discount: Option<f64>,
    /// Minimum token count for the vocabulary.
    #[arg(long)]
    min_count: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrainLmSettings {
    corpus: Option<PathBuf>,
    out: Option<PathBuf>,
    order: usize,
    discount: f64,
    min_count: usize,
}

impl Default for TrainLmSettings {
    fn default() -> Self {
        TrainLmSettings {
            corpus: None,
            out: None,
            order: NGramLm::DEFAULT_ORDER,
            discount: NGramLm::DEFAULT_DISCOUNT,
            min_count: 1,
        }
    }
}

pub fn train_lm(ctx: &Ctx, args: &TrainLmArgs) -> CliResult<()> {
    let (s, prov): (TrainLmSettings, _) = ctx.settings("train-lm", args)?;
    let corpus = require(&s.corpus, "corpus")?;
    let out = require(&s.out, "out")?;
    existing(corpus)?;
    writable(out)?;
    let recs = load_corpus(corpus, &PreprocessConfig::default())?;
    let vocab = build_vocabulary(&recs, s.min_count)?;
    let seqs: Vec<Vec<String>> = recs.iter().map(serialize_with_tokens).collect();
    let lm = NGramLm::train(&vocab, &seqs, s.order, s.discount)?;
    save_model(out, LM_FORMAT, &prov, &lm)?;
    let ids: Vec<_> = seqs.iter().map(|q| vocab.encode(q)).collect();
    println!(
        "train-lm: vocabulary {}, training perplexity {:.3}",
        vocab.len(),
        perplexity(&lm, &ids)?
    );
    Ok(())
}
