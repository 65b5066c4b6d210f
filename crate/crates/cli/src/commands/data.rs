use std::path::PathBuf;

use clap::Args;
use plangen::corpus::{
    build_vocabulary, generate_synthetic_corpus, load_corpus, split_corpus, PreprocessConfig,
    SyntheticCorpusSpec,
};
use plangen::metrics::IngredientList;
use plangen::tagger::tag_recipe;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{lexicon, Ctx};
use crate::artifact::{plan_line, write_jsonl, write_text};
use crate::config::{existing, require, writable};
use crate::error::{CliError, CliResult};

#[derive(Args, Debug, Serialize)]
pub struct SynthArgs {
    /// Number of recipes.
    #[arg(long)]
    recipes: Option<usize>,
    /// Verbs per stage (1 to 3).
    #[arg(long)]
    verbs_per_stage: Option<usize>,
    /// Probability that an instruction mentions one of the recipe's ingredients.
    #[arg(long)]
    ingredient_mention_prob: Option<f64>,
    /// Verb lexicon TSV (defaults to the built-in lexicon).
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Corpus JSONL to write.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Generating plans JSONL to write.
    #[arg(long)]
    plans_out: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SynthSettings {
    recipes: usize,
    verbs_per_stage: usize,
    ingredient_mention_prob: f64,
    lexicon: Option<PathBuf>,
    out: Option<PathBuf>,
    plans_out: Option<PathBuf>,
}

impl Default for SynthSettings {
    fn default() -> Self {
        SynthSettings {
            recipes: 2200,
            verbs_per_stage: 1,
            ingredient_mention_prob: 0.0,
            lexicon: None,
            out: None,
            plans_out: None,
        }
    }
}

pub fn synth(ctx: &Ctx, args: &SynthArgs) -> CliResult<()> {
    let (s, prov): (SynthSettings, _) = ctx.settings("synth", args)?;
    let out = require(&s.out, "out")?;
    writable(out)?;
    if let Some(p) = &s.plans_out {
        writable(p)?;
    }
    if let Some(p) = &s.lexicon {
        existing(p)?;
    }
    let lex = lexicon(s.lexicon.as_deref())?;
    let mut spec = SyntheticCorpusSpec::stage_disjoint_with(
        &lex,
        s.recipes,
        ctx.global.seed,
        s.verbs_per_stage,
    );
    spec.ingredient_mention_prob = s.ingredient_mention_prob;
    spec.validate(Some(&lex))?;
    let data = generate_synthetic_corpus(&spec)?;
    write_jsonl(out, &prov, data.iter().map(|(r, _)| r.to_json_line()))?;
    if let Some(p) = &s.plans_out {
        write_jsonl(p, &prov, data.iter().map(|(r, c)| plan_line(&r.id, c)))?;
    }
    println!("synth: wrote {} recipes to {}", data.len(), out.display());
    Ok(())
}

#[derive(Args, Debug, Serialize)]
pub struct PreprocessArgs {
    /// Raw corpus JSONL.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Directory for corpus, split, vocabulary and ingredient files.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Drop instructions with fewer words than this.
    #[arg(long)]
    min_instruction_tokens: Option<usize>,
    /// Keep at most this many instructions per recipe.
    #[arg(long)]
    max_instructions: Option<usize>,
    /// Keep the original letter case.
    #[arg(long, default_value_t = false)]
    #[serde(
        skip_serializing_if = "super::is_false",
        rename = "lowercase",
        serialize_with = "negate"
    )]
    keep_case: bool,
    /// Train/validation/test fractions, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    split: Option<Vec<f64>>,
    /// Minimum token count for the vocabulary.
    #[arg(long)]
    min_count: Option<usize>,
}

fn negate<S: serde::Serializer>(b: &bool, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_bool(!*b)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PreprocessSettings {
    input: Option<PathBuf>,
    out_dir: Option<PathBuf>,
    min_instruction_tokens: usize,
    max_instructions: usize,
    lowercase: bool,
    split: Vec<f64>,
    min_count: usize,
}

impl Default for PreprocessSettings {
    fn default() -> Self {
        let p = PreprocessConfig::default();
        PreprocessSettings {
            input: None,
            out_dir: None,
            min_instruction_tokens: p.min_instruction_tokens,
            max_instructions: p.max_instructions,
            lowercase: p.lowercase,
            split: vec![0.8, 0.1, 0.1],
            min_count: 1,
        }
    }
}

pub fn preprocess(ctx: &Ctx, args: &PreprocessArgs) -> CliResult<()> {
    let (s, prov): (PreprocessSettings, _) = ctx.settings("preprocess", args)?;
    let input = require(&s.input, "input")?;
    let dir = require(&s.out_dir, "out_dir")?;
    existing(input)?;
    if !dir.is_dir() {
        return Err(CliError::new(
            "io",
            format!("output directory does not exist: {}", dir.display()),
        ));
    }
    if s.split.len() != 3 {
        return Err(CliError::config("split needs exactly three fractions"));
    }
    let cfg = PreprocessConfig {
        min_instruction_tokens: s.min_instruction_tokens,
        max_instructions: s.max_instructions,
        lowercase: s.lowercase,
    };
    let corpus = load_corpus(input, &cfg)?;
    let vocab = build_vocabulary(&corpus, s.min_count)?;
    let split = split_corpus(
        &corpus,
        (s.split[0], s.split[1], s.split[2]),
        ctx.global.seed,
    )?;
    write_jsonl(
        &dir.join("corpus.jsonl"),
        &prov,
        corpus.iter().map(|r| r.to_json_line()),
    )?;
    for (name, part) in [
        ("train", &split.train),
        ("val", &split.val),
        ("test", &split.test),
    ] {
        write_jsonl(
            &dir.join(format!("{name}.jsonl")),
            &prov,
            part.iter().map(|r| r.to_json_line()),
        )?;
    }
    let mut tsv = Vec::new();
    vocab
        .write_tsv(&mut tsv)
        .map_err(|e| CliError::new("io", e.to_string()))?;
    write_text(
        &dir.join("vocab.tsv"),
        &prov,
        &String::from_utf8(tsv).expect("vocabulary is UTF-8"),
    )?;
    let ingredients = IngredientList::from_corpus(&corpus)?;
    let body: String = ingredients
        .items()
        .iter()
        .map(|i| i.join(" ") + "\n")
        .collect();
    write_text(&dir.join("ingredients.txt"), &prov, &body)?;
    println!(
        "preprocess: kept {} recipes ({} train, {} val, {} test), vocabulary {}",
        corpus.len(),
        split.train.len(),
        split.val.len(),
        split.test.len(),
        vocab.len()
    );
    Ok(())
}

#[derive(Args, Debug, Serialize)]
pub struct TagArgs {
    /// Corpus JSONL.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Plans JSONL to write.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Verb lexicon TSV (defaults to the built-in lexicon).
    #[arg(long)]
    lexicon: Option<PathBuf>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TagSettings {
    input: Option<PathBuf>,
    out: Option<PathBuf>,
    lexicon: Option<PathBuf>,
}

pub fn tag(ctx: &Ctx, args: &TagArgs) -> CliResult<()> {
    let (s, prov): (TagSettings, _) = ctx.settings("tag", args)?;
    let input = require(&s.input, "input")?;
    let out = require(&s.out, "out")?;
    existing(input)?;
    writable(out)?;
    if let Some(p) = &s.lexicon {
        existing(p)?;
    }
    let lex = lexicon(s.lexicon.as_deref())?;
    let corpus = load_corpus(input, &PreprocessConfig::default())?;
    let lines = ctx.pooled(|| {
        corpus
            .par_iter()
            .map(|r| tag_recipe(r, &lex).map(|p| plan_line(&r.id, &p)))
            .collect::<plangen::Result<Vec<_>>>()
    })??;
    write_jsonl(out, &prov, lines)?;
    println!("tag: labelled {} recipes", corpus.len());
    Ok(())
}
