use std::collections::HashMap;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use plangen::classifier::{argmax_stage, StageClassifier};
use plangen::corpus::{serialize_prompt, tokenize, RecipeRecord};
use plangen::decoder::{
    generate as guided, generate_baseline, generate_lexically_constrained, DecodeConfig,
    GenerationResult, Strategy,
};
use plangen::lm::NGramLm;
use plangen::metrics::realized_plan;
use plangen::planner::{featurize_input, predict_plan, PlanModel, DEFAULT_BEAM_WIDTH};
use plangen::{ContentPlan, StageLabel, MAX_PLAN_LEN};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::train::{CLASSIFIER_FORMAT, LM_FORMAT, PLANNER_FORMAT};
use super::{lexicon, Ctx};
use crate::artifact::{
    load_model, plan_index, plan_line, read_plans, read_prompts, read_text_lines, write_jsonl,
};
use crate::config::{existing, require, writable};
use crate::error::{CliError, CliResult};

#[derive(Args, Debug, Serialize)]
pub struct ClassifyArgs {
    /// Classifier model file.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Text file, one partial instruction per line.
    #[arg(long)]
    input: Option<PathBuf>,
    /// JSONL to write (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassifySettings {
    model: Option<PathBuf>,
    input: Option<PathBuf>,
    out: Option<PathBuf>,
}

pub fn classify(ctx: &Ctx, args: &ClassifyArgs) -> CliResult<()> {
    let (s, prov): (ClassifySettings, _) = ctx.settings("classify", args)?;
    let model_path = require(&s.model, "model")?;
    let input = require(&s.input, "input")?;
    existing(model_path)?;
    existing(input)?;
    if let Some(o) = &s.out {
        writable(o)?;
    }
    let model: StageClassifier = load_model(model_path, CLASSIFIER_FORMAT)?;
    let mut lines = Vec::new();
    for text in read_text_lines(input)? {
        let dist = model.classify(&tokenize(&text, true))?;
        let probs: serde_json::Map<String, serde_json::Value> = StageLabel::ALL
            .iter()
            .map(|s| (s.as_str().to_owned(), json!(dist[s.index()])))
            .collect();
        lines.push(
            json!({ "text": text, "stage": argmax_stage(&dist), "probabilities": probs })
                .to_string(),
        );
    }
    match &s.out {
        Some(o) => write_jsonl(o, &prov, lines)?,
        None => lines.iter().for_each(|l| println!("{l}")),
    }
    Ok(())
}

#[derive(Args, Debug, Serialize)]
pub struct PlanArgs {
    /// Planner model file.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Prompt JSONL with title and ingredients.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Plans JSONL to write.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    beam_width: Option<usize>,
    #[arg(long)]
    max_len: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanSettings {
    model: Option<PathBuf>,
    input: Option<PathBuf>,
    out: Option<PathBuf>,
    beam_width: usize,
    max_len: usize,
}

impl Default for PlanSettings {
    fn default() -> Self {
        PlanSettings {
            model: None,
            input: None,
            out: None,
            beam_width: DEFAULT_BEAM_WIDTH,
            max_len: MAX_PLAN_LEN,
        }
    }
}

pub fn plan(ctx: &Ctx, args: &PlanArgs) -> CliResult<()> {
    let (s, prov): (PlanSettings, _) = ctx.settings("plan", args)?;
    let model_path = require(&s.model, "model")?;
    let input = require(&s.input, "input")?;
    let out = require(&s.out, "out")?;
    existing(model_path)?;
    existing(input)?;
    writable(out)?;
    let model: PlanModel = load_model(model_path, PLANNER_FORMAT)?;
    let prompts = read_prompts(input)?;
    let lines = ctx.pooled(|| {
        prompts
            .par_iter()
            .map(|r| {
                let f = featurize_input(r, model.feature_vocab());
                plan_line(&r.id, &predict_plan(&model, &f, s.beam_width, s.max_len))
            })
            .collect::<Vec<_>>()
    })?;
    write_jsonl(out, &prov, lines)?;
    println!("plan: predicted {} plans", prompts.len());
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyName {
    PlanAware,
    Greedy,
    TopK,
    Beam,
    Constrained,
}

#[derive(Args, Debug, Serialize)]
pub struct GenerateArgs {
    /// Language model file.
    #[arg(long)]
    lm: Option<PathBuf>,
    /// Stage classifier model file (plan-aware strategy).
    #[arg(long)]
    classifier: Option<PathBuf>,
    /// Prompt JSONL with title and ingredients.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Generations JSONL to write.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Plans JSONL supplying each prompt's plan.
    #[arg(long, conflicts_with = "auto_plan")]
    plan_file: Option<PathBuf>,
    /// Predict each prompt's plan with the planner.
    #[arg(long, default_value_t = false)]
    #[serde(skip_serializing_if = "super::is_false")]
    auto_plan: bool,
    /// Planner model file (with --auto-plan).
    #[arg(long)]
    planner: Option<PathBuf>,
    /// Planner beam width (with --auto-plan).
    #[arg(long)]
    plan_beam_width: Option<usize>,
    #[arg(long, value_enum)]
    strategy: Option<StrategyName>,
    /// Weight of the stage classifier in [0, 1].
    #[arg(long)]
    alpha: Option<f64>,
    /// LM candidates re-ranked per step.
    #[arg(long)]
    top_s: Option<usize>,
    /// Candidates for top-k sampling.
    #[arg(long)]
    k: Option<usize>,
    /// Beam width for beam and constrained decoding.
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    max_tokens: Option<usize>,
    #[arg(long)]
    max_instructions: Option<usize>,
    #[arg(long)]
    classifier_floor: Option<f64>,
    /// Verb lexicon TSV used to tag the output (defaults to the built-in lexicon).
    #[arg(long)]
    lexicon: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GenerateSettings {
    lm: Option<PathBuf>,
    classifier: Option<PathBuf>,
    input: Option<PathBuf>,
    out: Option<PathBuf>,
    plan_file: Option<PathBuf>,
    auto_plan: bool,
    planner: Option<PathBuf>,
    plan_beam_width: usize,
    strategy: StrategyName,
    alpha: f64,
    top_s: usize,
    k: usize,
    width: usize,
    max_tokens: usize,
    max_instructions: usize,
    classifier_floor: f64,
    lexicon: Option<PathBuf>,
}

impl Default for GenerateSettings {
    fn default() -> Self {
        let d = DecodeConfig::default();
        GenerateSettings {
            lm: None,
            classifier: None,
            input: None,
            out: None,
            plan_file: None,
            auto_plan: false,
            planner: None,
            plan_beam_width: DEFAULT_BEAM_WIDTH,
            strategy: StrategyName::PlanAware,
            alpha: d.alpha,
            top_s: d.top_s,
            k: 5,
            width: 5,
            max_tokens: d.max_tokens,
            max_instructions: d.max_instructions,
            classifier_floor: d.classifier_floor,
            lexicon: None,
        }
    }
}

/// Per-item sampling seed, independent of scheduling.
fn item_seed(seed: u64, index: usize) -> u64 {
    let mut z = seed ^ (index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn generate(ctx: &Ctx, args: &GenerateArgs) -> CliResult<()> {
    let (s, prov): (GenerateSettings, _) = ctx.settings("generate", args)?;
    let lm_path = require(&s.lm, "lm")?;
    let input = require(&s.input, "input")?;
    let out = require(&s.out, "out")?;
    existing(lm_path)?;
    existing(input)?;
    writable(out)?;
    if s.auto_plan && s.plan_file.is_some() {
        return Err(CliError::config(
            "use either plan_file or auto_plan, not both",
        ));
    }
    let clf_path = match s.strategy {
        StrategyName::PlanAware => Some(require(&s.classifier, "classifier")?),
        _ => None,
    };
    if s.strategy == StrategyName::PlanAware && s.plan_file.is_none() && !s.auto_plan {
        return Err(CliError::config(
            "plan-aware decoding needs plan_file or auto_plan",
        ));
    }
    for p in [clf_path, s.plan_file.as_deref(), s.lexicon.as_deref()]
        .into_iter()
        .flatten()
    {
        existing(p)?;
    }
    let planner_path = if s.auto_plan {
        let p = require(&s.planner, "planner")?;
        existing(p)?;
        Some(p)
    } else {
        None
    };

    let lm: NGramLm = load_model(lm_path, LM_FORMAT)?;
    let clf: Option<StageClassifier> = clf_path
        .map(|p| load_model(p, CLASSIFIER_FORMAT))
        .transpose()?;
    let planner: Option<PlanModel> = planner_path
        .map(|p| load_model(p, PLANNER_FORMAT))
        .transpose()?;
    let lex = lexicon(s.lexicon.as_deref())?;
    let prompts = read_prompts(input)?;
    let given: HashMap<String, ContentPlan> = match &s.plan_file {
        Some(p) => plan_index(read_plans(p)?)?,
        None => HashMap::new(),
    };
    let base = DecodeConfig {
        alpha: s.alpha,
        top_s: s.top_s,
        max_tokens: s.max_tokens,
        max_instructions: s.max_instructions,
        classifier_floor: s.classifier_floor,
        seed: ctx.global.seed,
    };
    base.validate()?;

    let plan_for = |r: &RecipeRecord| -> CliResult<Option<ContentPlan>> {
        if let Some(m) = &planner {
            let f = featurize_input(r, m.feature_vocab());
            return Ok(Some(predict_plan(m, &f, s.plan_beam_width, MAX_PLAN_LEN)));
        }
        if s.plan_file.is_some() {
            return given.get(&r.id).cloned().map(Some).ok_or_else(|| {
                CliError::new("invalid_argument", format!("no plan for recipe `{}`", r.id))
            });
        }
        Ok(None)
    };

    let run_one = |(i, r): (usize, &RecipeRecord)| -> CliResult<String> {
        let plan = plan_for(r)?;
        let prompt = serialize_prompt(r);
        let mut cfg = DecodeConfig {
            seed: item_seed(base.seed, i),
            ..base
        };
        if let Some(p) = &plan {
            cfg.max_instructions = cfg.max_instructions.min(p.len());
        }
        let result: GenerationResult = match s.strategy {
            StrategyName::PlanAware => guided(
                &lm,
                clf.as_ref().expect("classifier loaded for plan-aware"),
                plan.as_ref().expect("plan resolved for plan-aware"),
                &prompt,
                &cfg,
            )?,
            StrategyName::Greedy => generate_baseline(&lm, &prompt, &cfg, Strategy::Greedy)?,
            StrategyName::TopK => generate_baseline(&lm, &prompt, &cfg, Strategy::TopK { k: s.k })?,
            StrategyName::Beam => {
                generate_baseline(&lm, &prompt, &cfg, Strategy::Beam { width: s.width })?
            }
            StrategyName::Constrained => {
                generate_lexically_constrained(&lm, &prompt, &r.ingredients, s.width, &cfg)?
            }
        };
        let realized = realized_plan(&result.instructions, &lex);
        let mut line = json!({
            "id": r.id,
            "instructions": result.instructions.iter().map(|t| t.join(" ")).collect::<Vec<_>>(),
            "realized_plan": realized,
            "scores": result.scores,
            "plan": plan,
        });
        if let Some(n) = result.satisfied_constraints {
            line["satisfied_constraints"] = json!(n);
        }
        Ok(line.to_string())
    };

    let lines = ctx.pooled(|| {
        prompts
            .par_iter()
            .enumerate()
            .map(run_one)
            .collect::<CliResult<Vec<_>>>()
    })??;
    write_jsonl(out, &prov, lines)?;
    println!("generate: {} recipes with {:?}", prompts.len(), s.strategy);
    Ok(())
}
