//! Generation quality metrics and their corpus-level report.

mod ingredients;
mod text;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use ingredients::{ingredient_coverage, IngredientList};
pub use text::{bleu, lcs_len, rouge_l, BLEU_EPSILON};

use crate::corpus::RecipeRecord;
use crate::decoder::GenerationResult;
use crate::error::{Error, Result};
use crate::stage::{ContentPlan, StageLabel, MAX_PLAN_LEN};
use crate::tagger::{tag_instruction, VerbLexicon};

/// Percent of target positions agreeing with the realized plan.
pub fn plan_match(realized: &[StageLabel], target: &[StageLabel]) -> f64 {
    if target.is_empty() {
        return 0.0;
    }
    let same = realized.iter().zip(target).filter(|(a, b)| a == b).count();
    100.0 * same as f64 / target.len() as f64
}

/// Tags each generated instruction; empty instructions count as General.
/// `None` when nothing was generated.
pub fn realized_plan(instructions: &[Vec<String>], lexicon: &VerbLexicon) -> Option<ContentPlan> {
    let stages: Vec<StageLabel> = instructions
        .iter()
        .take(MAX_PLAN_LEN)
        .map(|i| tag_instruction(i, lexicon).unwrap_or(StageLabel::General))
        .collect();
    ContentPlan::new(stages).ok()
}

/// Per-example scores, all in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ItemScores {
    pub bleu: f64,
    pub rouge_l: f64,
    pub plan_match: f64,
    pub coverage: f64,
    pub extra: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub bleu: f64,
    pub rouge_l: f64,
    pub plan_match: f64,
    pub coverage: f64,
    pub extra: f64,
    pub examples: usize,
    pub rouge_variant: String,
    pub bleu_smoothing: f64,
    #[serde(default)]
    pub config: BTreeMap<String, serde_json::Value>,
}

impl EvalReport {
    pub fn table(&self) -> String {
        let mut s = String::new();
        s.push_str("metric      value\n");
        for (name, v) in [
            ("BLEU", self.bleu),
            ("ROUGE-L", self.rouge_l),
            ("PlanMatch", self.plan_match),
            ("Coverage", self.coverage),
            ("Extra", self.extra),
        ] {
            s.push_str(&format!("{name:<11} {v:>6.2}\n"));
        }
        s.push_str(&format!("examples    {:>6}\n", self.examples));
        s
    }
}

fn flat(instructions: &[Vec<String>]) -> Vec<&str> {
    instructions.iter().flatten().map(String::as_str).collect()
}

pub fn score_item(
    instructions: &[Vec<String>],
    reference: &RecipeRecord,
    target: &ContentPlan,
    global: &IngredientList,
    lexicon: &VerbLexicon,
) -> Result<ItemScores> {
    let cand = flat(instructions);
    let refr = flat(&reference.instructions);
    let bleu = bleu(&cand, &refr, 4)?;
    let rouge = if cand.is_empty() {
        0.0
    } else {
        rouge_l(&cand, &refr)?
    };
    let pm = realized_plan(instructions, lexicon)
        .map_or(0.0, |p| plan_match(p.stages(), target.stages()));
    let (coverage, extra) = ingredient_coverage(&cand, &reference.ingredients, global)?;
    Ok(ItemScores {
        bleu: 100.0 * bleu,
        rouge_l: 100.0 * rouge,
        plan_match: pm,
        coverage,
        extra,
    })
}

/// Order-independent mean: values are summed in sorted order.
fn mean(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn aggregate(items: &[ItemScores]) -> Result<EvalReport> {
    if items.is_empty() {
        return Err(Error::EmptyInput("evaluation set"));
    }
    let col = |f: fn(&ItemScores) -> f64| mean(items.iter().map(f).collect());
    Ok(EvalReport {
        bleu: col(|i| i.bleu),
        rouge_l: col(|i| i.rouge_l),
        plan_match: col(|i| i.plan_match),
        coverage: col(|i| i.coverage),
        extra: col(|i| i.extra),
        examples: items.len(),
        rouge_variant: "f1".into(),
        bleu_smoothing: BLEU_EPSILON,
        config: BTreeMap::new(),
    })
}

/// Macro-averaged report over aligned outputs, references and target plans.
pub fn evaluate_generation(
    outputs: &[GenerationResult],
    references: &[RecipeRecord],
    targets: &[ContentPlan],
    global: &IngredientList,
    lexicon: &VerbLexicon,
) -> Result<EvalReport> {
    if outputs.len() != references.len() || outputs.len() != targets.len() {
        return Err(Error::invalid(format!(
            "misaligned evaluation lists: {} outputs, {} references, {} plans",
            outputs.len(),
            references.len(),
            targets.len()
        )));
    }
    let items = outputs
        .iter()
        .zip(references)
        .zip(targets)
        .map(|((o, r), t)| score_item(&o.instructions, r, t, global, lexicon))
        .collect::<Result<Vec<_>>>()?;
    aggregate(&items)
}

/// Two-sided sign test p-value for paired scores; ties are dropped.
pub fn sign_test(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid("sign test needs paired samples"));
    }
    let wins = a.iter().zip(b).filter(|(x, y)| x > y).count();
    let losses = a.iter().zip(b).filter(|(x, y)| x < y).count();
    let n = wins + losses;
    if n == 0 {
        return Ok(1.0);
    }
    let k = wins.min(losses);
    // P(X <= k) for X ~ Binomial(n, 1/2), in log space
    let ln_half_n = -(n as f64) * std::f64::consts::LN_2;
    let mut ln_c = 0.0f64;
    let mut tail = 0.0;
    for i in 0..=k {
        if i > 0 {
            ln_c += ((n - i + 1) as f64).ln() - (i as f64).ln();
        }
        tail += (ln_c + ln_half_n).exp();
    }
    Ok((2.0 * tail).min(1.0))
}
