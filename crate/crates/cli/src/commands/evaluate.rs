use std::collections::HashMap;
use std::path::PathBuf;

use clap::Args;
use plangen::corpus::{load_corpus, PreprocessConfig};
use plangen::metrics::{aggregate, score_item, IngredientList};
use plangen::planner::report_from_pairs;
use plangen::ContentPlan;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{lexicon, Ctx};
use crate::artifact::{plan_index, read_jsonl, read_plans};
use crate::config::{existing, writable};
use crate::error::{CliError, CliResult};

#[derive(Args, Debug, Serialize)]
pub struct EvaluateArgs {
    /// Generations JSONL from `generate`.
    #[arg(long)]
    outputs: Option<PathBuf>,
    /// Reference corpus JSONL.
    #[arg(long)]
    references: Option<PathBuf>,
    /// Target plans JSONL (defaults to the plan recorded with each generation).
    #[arg(long)]
    plans: Option<PathBuf>,
    /// Known ingredient list, one per line (defaults to the references' ingredients).
    #[arg(long)]
    ingredients: Option<PathBuf>,
    /// Verb lexicon TSV (defaults to the built-in lexicon).
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Predicted plans JSONL, for plan evaluation.
    #[arg(long)]
    predicted_plans: Option<PathBuf>,
    /// Reference plans JSONL, for plan evaluation.
    #[arg(long)]
    reference_plans: Option<PathBuf>,
    /// Report JSON to write.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EvaluateSettings {
    outputs: Option<PathBuf>,
    references: Option<PathBuf>,
    plans: Option<PathBuf>,
    ingredients: Option<PathBuf>,
    lexicon: Option<PathBuf>,
    predicted_plans: Option<PathBuf>,
    reference_plans: Option<PathBuf>,
    out: Option<PathBuf>,
}

#[derive(Deserialize)]
struct OutputLine {
    id: String,
    instructions: Vec<String>,
    #[serde(default)]
    plan: Option<ContentPlan>,
}

pub fn evaluate(ctx: &Ctx, args: &EvaluateArgs) -> CliResult<()> {
    let (s, prov): (EvaluateSettings, _) = ctx.settings("evaluate", args)?;
    let generation = s.outputs.is_some() || s.references.is_some();
    let planning = s.predicted_plans.is_some() || s.reference_plans.is_some();
    if !generation && !planning {
        return Err(CliError::config(
            "nothing to evaluate: give outputs and references, or predicted_plans and reference_plans",
        ));
    }
    for p in [
        &s.outputs,
        &s.references,
        &s.plans,
        &s.ingredients,
        &s.lexicon,
        &s.predicted_plans,
        &s.reference_plans,
    ]
    .into_iter()
    .flatten()
    {
        existing(p)?;
    }
    if let Some(o) = &s.out {
        writable(o)?;
    }
    let mut report = serde_json::Map::new();
    report.insert("provenance".into(), serde_json::to_value(&prov)?);

    if planning {
        let (Some(pred), Some(refs)) = (&s.predicted_plans, &s.reference_plans) else {
            return Err(CliError::config(
                "plan evaluation needs both predicted_plans and reference_plans",
            ));
        };
        let references = plan_index(read_plans(refs)?)?;
        let pairs = read_plans(pred)?
            .into_iter()
            .map(|p| {
                references
                    .get(&p.id)
                    .map(|r| (p.plan, r.clone()))
                    .ok_or_else(|| {
                        CliError::new(
                            "invalid_argument",
                            format!("no reference plan for `{}`", p.id),
                        )
                    })
            })
            .collect::<CliResult<Vec<_>>>()?;
        if pairs.is_empty() {
            return Err(CliError::new("empty_input", "no predicted plans"));
        }
        let rep = report_from_pairs(&pairs);
        println!(
            "plans       unigram {:.2}  bigram {:.2}  trigram {:.2}  exact {:.2}  ({} examples)",
            rep.unigram, rep.bigram, rep.trigram, rep.exact, rep.examples
        );
        report.insert("planning".into(), serde_json::to_value(&rep)?);
    }

    if generation {
        let (Some(outputs), Some(refs)) = (&s.outputs, &s.references) else {
            return Err(CliError::config(
                "generation evaluation needs both outputs and references",
            ));
        };
        let lex = lexicon(s.lexicon.as_deref())?;
        let references = load_corpus(refs, &PreprocessConfig::default())?;
        let outs: HashMap<String, OutputLine> = read_jsonl(outputs)?
            .into_iter()
            .map(|(line, v)| {
                let o: OutputLine = serde_json::from_value(v).map_err(|e| {
                    CliError::new(
                        "malformed_line",
                        format!("{}:{line}: {e}", outputs.display()),
                    )
                })?;
                Ok((o.id.clone(), o))
            })
            .collect::<CliResult<_>>()?;
        let given = match &s.plans {
            Some(p) => Some(plan_index(read_plans(p)?)?),
            None => None,
        };
        let global = match &s.ingredients {
            Some(p) => IngredientList::load(p)?,
            None => IngredientList::from_corpus(&references)?,
        };
        let items = ctx.pooled(|| {
            references
                .par_iter()
                .map(|r| {
                    let missing = |what: &str| {
                        CliError::new(
                            "invalid_argument",
                            format!("no {what} for recipe `{}`", r.id),
                        )
                    };
                    let o = outs.get(&r.id).ok_or_else(|| missing("generation"))?;
                    let target = match &given {
                        Some(m) => m.get(&r.id).cloned(),
                        None => o.plan.clone(),
                    }
                    .ok_or_else(|| missing("target plan"))?;
                    let instr: Vec<Vec<String>> = o
                        .instructions
                        .iter()
                        .map(|t| t.split_whitespace().map(str::to_owned).collect())
                        .collect();
                    Ok(score_item(&instr, r, &target, &global, &lex)?)
                })
                .collect::<CliResult<Vec<_>>>()
        })??;
        let mut rep = aggregate(&items)?;
        rep.config
            .insert("settings".into(), serde_json::to_value(&s)?);
        rep.config.insert(
            "plan_source".into(),
            json!(if s.plans.is_some() {
                "plans_file"
            } else {
                "generator"
            }),
        );
        print!("{}", rep.table());
        report.insert("generation".into(), serde_json::to_value(&rep)?);
    }

    if let Some(o) = &s.out {
        let text = serde_json::to_string_pretty(&serde_json::Value::Object(report))? + "\n";
        std::fs::write(o, text)
            .map_err(|e| CliError::new("io", format!("{}: {e}", o.display())))?;
    }
    Ok(())
}
