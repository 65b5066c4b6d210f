//! Recipe ingestion, preprocessing, serialization and vocabularies.

mod serialize;
mod split;
mod synthetic;
mod vocab;

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use serialize::{
    parse_serialized, serialize_prompt, serialize_with_tokens, ParseError, SpecialToken,
};
pub use split::{split_corpus, Split};
pub use synthetic::{generate_synthetic_corpus, SyntheticCorpusSpec};
pub use vocab::{build_vocabulary, TokenId, Vocabulary, UNK_ID, UNK_TOKEN};

/// A tokenized recipe: the input side (title, ingredients) and the output
/// side (instructions, one token sequence per sentence).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecipeRecord {
    pub id: String,
    pub title: Vec<String>,
    pub ingredients: Vec<Vec<String>>,
    pub instructions: Vec<Vec<String>>,
}

impl RecipeRecord {
    /// Every token of the title and ingredients, in order.
    pub fn input_tokens(&self) -> impl Iterator<Item = &str> {
        self.title
            .iter()
            .chain(self.ingredients.iter().flatten())
            .map(String::as_str)
    }

    /// Every token the record contains.
    pub fn all_tokens(&self) -> impl Iterator<Item = &str> {
        self.input_tokens()
            .chain(self.instructions.iter().flatten().map(String::as_str))
    }

    /// Renders the record back to the JSON Lines schema, tokens joined by spaces.
    pub fn to_json_line(&self) -> String {
        let raw = RawRecipe {
            id: Some(self.id.clone()),
            title: self.title.join(" "),
            ingredients: self.ingredients.iter().map(|t| t.join(" ")).collect(),
            instructions: self.instructions.iter().map(|t| t.join(" ")).collect(),
        };
        serde_json::to_string(&raw).expect("recipe serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    pub min_instruction_tokens: usize,
    pub max_instructions: usize,
    pub lowercase: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            min_instruction_tokens: 3,
            max_instructions: 15,
            lowercase: true,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_instruction_tokens == 0 {
            return Err(Error::invalid("min_instruction_tokens must be >= 1"));
        }
        if self.max_instructions == 0 {
            return Err(Error::invalid("max_instructions must be >= 1"));
        }
        Ok(())
    }
}

/// On-disk schema of one corpus line.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawRecipe {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub title: String,
    pub ingredients: Vec<String>,
    #[serde(default)]
    pub instructions: Vec<String>,
}

impl RawRecipe {
    pub fn tokenize(&self, id: String, lowercase: bool) -> RecipeRecord {
        RecipeRecord {
            id: self.id.clone().unwrap_or(id),
            title: tokenize(&self.title, lowercase),
            ingredients: self
                .ingredients
                .iter()
                .map(|s| tokenize(s, lowercase))
                .collect(),
            instructions: self
                .instructions
                .iter()
                .map(|s| tokenize(s, lowercase))
                .collect(),
        }
    }
}

fn is_symbol(c: char) -> bool {
    !c.is_alphanumeric() && !c.is_whitespace()
}

/// Splits on whitespace and detaches every non-alphanumeric symbol as its own token.
pub fn tokenize(text: &str, lowercase: bool) -> Vec<String> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        let mut word = String::new();
        for c in chunk.chars() {
            if is_symbol(c) {
                if !word.is_empty() {
                    out.push(std::mem::take(&mut word));
                }
                out.push(c.to_string());
            } else if lowercase {
                word.extend(c.to_lowercase());
            } else {
                word.push(c);
            }
        }
        if !word.is_empty() {
            out.push(word);
        }
    }
    out
}

/// True for tokens made only of symbols (punctuation).
pub fn is_punctuation(token: &str) -> bool {
    !token.is_empty() && token.chars().all(is_symbol)
}

/// Number of non-punctuation tokens.
pub fn word_count(tokens: &[String]) -> usize {
    tokens.iter().filter(|t| !is_punctuation(t)).count()
}

/// Drops short instructions, keeps the first `max_instructions` survivors.
///
/// Returns `None` when no instruction or no ingredient survives.
pub fn filter_and_truncate(
    recipe: RecipeRecord,
    config: &PreprocessConfig,
) -> Option<RecipeRecord> {
    let RecipeRecord {
        id,
        title,
        ingredients,
        instructions,
    } = recipe;
    let instructions: Vec<_> = instructions
        .into_iter()
        .filter(|ins| word_count(ins) >= config.min_instruction_tokens)
        .take(config.max_instructions)
        .collect();
    let ingredients: Vec<_> = ingredients.into_iter().filter(|i| !i.is_empty()).collect();
    if instructions.is_empty() || ingredients.is_empty() {
        return None;
    }
    Some(RecipeRecord {
        id,
        title,
        ingredients,
        instructions,
    })
}

/// True for metadata lines (a provenance header written by the tooling).
pub fn is_metadata_line(value: &serde_json::Value) -> bool {
    value
        .as_object()
        .is_some_and(|o| o.contains_key("provenance") && !o.contains_key("title"))
}

/// Reads a JSON Lines corpus and applies [`filter_and_truncate`] to every record.
///
/// Blank lines and provenance header lines are skipped. Records without an
/// `id` field are named after their 1-based line number.
pub fn load_corpus(path: &Path, config: &PreprocessConfig) -> Result<Vec<RecipeRecord>> {
    config.validate()?;
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if let Some(rec) = parse_corpus_line(&line, line_no, config)? {
            out.push(rec);
        }
    }
    Ok(out)
}

/// Parses one corpus line; `Ok(None)` for skipped or filtered lines.
pub fn parse_corpus_line(
    line: &str,
    line_no: usize,
    config: &PreprocessConfig,
) -> Result<Option<RecipeRecord>> {
    if line.trim().is_empty() {
        return Ok(None);
    }
    let malformed = |message: String| Error::MalformedLine {
        line: line_no,
        message,
    };
    let value: serde_json::Value =
        serde_json::from_str(line).map_err(|e| malformed(e.to_string()))?;
    if is_metadata_line(&value) {
        return Ok(None);
    }
    let raw: RawRecipe = serde_json::from_value(value).map_err(|e| malformed(e.to_string()))?;
    let rec = raw.tokenize(line_no.to_string(), config.lowercase);
    Ok(filter_and_truncate(rec, config))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn toks(s: &str) -> Vec<String> {
        tokenize(s, true)
    }

    fn record(instructions: &[&str]) -> RecipeRecord {
        RecipeRecord {
            id: "r".into(),
            title: toks("test dish"),
            ingredients: vec![toks("flour")],
            instructions: instructions.iter().map(|s| toks(s)).collect(),
        }
    }

    #[test]
    fn tokenizer_detaches_punctuation_and_lowercases() {
        assert_eq!(
            toks("Add salt, stirring."),
            ["add", "salt", ",", "stirring", "."]
        );
        assert_eq!(toks("  Bake at 350F  "), ["bake", "at", "350f"]);
        assert_eq!(tokenize("Mix", false), ["Mix"]);
    }

    #[test]
    fn word_count_ignores_punctuation() {
        assert_eq!(word_count(&toks("combine all .")), 2);
        assert_eq!(word_count(&toks("mix flour and sugar")), 4);
    }

    #[test]
    fn truncates_to_first_fifteen() {
        let ins: Vec<String> = (0..20).map(|i| format!("step number {i} here")).collect();
        let refs: Vec<&str> = ins.iter().map(String::as_str).collect();
        let out = filter_and_truncate(record(&refs), &PreprocessConfig::default()).unwrap();
        assert_eq!(out.instructions.len(), 15);
        assert_eq!(out.instructions[0], toks("step number 0 here"));
        assert_eq!(out.instructions[14], toks("step number 14 here"));
    }

    #[test]
    fn drops_short_instructions() {
        let out = filter_and_truncate(
            record(&["combine all", "mix flour and sugar"]),
            &PreprocessConfig::default(),
        )
        .unwrap();
        assert_eq!(out.instructions, vec![toks("mix flour and sugar")]);
    }

    #[test]
    fn all_short_is_absent() {
        let cfg = PreprocessConfig::default();
        assert!(filter_and_truncate(record(&["combine all", "serve hot"]), &cfg).is_none());
    }

    #[test]
    fn filtering_is_idempotent() {
        let cfg = PreprocessConfig {
            max_instructions: 2,
            ..Default::default()
        };
        let once =
            filter_and_truncate(record(&["a b", "x y z", "p q r s", "u v w"]), &cfg).unwrap();
        let twice = filter_and_truncate(once.clone(), &cfg).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn load_corpus_reads_and_filters() {
        let mut f = tempfile_in_target("load_ok.jsonl");
        writeln!(
            f.1,
            r#"{{"title":"A","ingredients":["x"],"instructions":["mix the x well"]}}"#
        )
        .unwrap();
        writeln!(
            f.1,
            r#"{{"title":"B","ingredients":["y"],"instructions":["combine all"]}}"#
        )
        .unwrap();
        writeln!(
            f.1,
            r#"{{"id":"c","title":"C","ingredients":["z"],"instructions":["bake the z now"]}}"#
        )
        .unwrap();
        writeln!(
            f.1,
            r#"{{"title":"D","ingredients":["w"],"instructions":["serve the w hot"]}}"#
        )
        .unwrap();
        drop(f.1);
        let recs = load_corpus(&f.0, &PreprocessConfig::default()).unwrap();
        let ids: Vec<_> = recs.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, ["1", "c", "4"]);
    }

    #[test]
    fn load_corpus_reports_line_of_missing_title() {
        let mut f = tempfile_in_target("load_bad.jsonl");
        writeln!(
            f.1,
            r#"{{"title":"A","ingredients":["x"],"instructions":["mix the x well"]}}"#
        )
        .unwrap();
        writeln!(
            f.1,
            r#"{{"ingredients":["y"],"instructions":["mix the y well"]}}"#
        )
        .unwrap();
        drop(f.1);
        match load_corpus(&f.0, &PreprocessConfig::default()) {
            Err(Error::MalformedLine { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("title"), "{message}");
            }
            other => panic!("expected malformed line, got {other:?}"),
        }
    }

    #[test]
    fn load_corpus_missing_file_is_io_error() {
        let err = load_corpus(
            Path::new("/nonexistent/x.jsonl"),
            &PreprocessConfig::default(),
        );
        assert!(matches!(err, Err(Error::Io { .. })));
    }

    fn tempfile_in_target(name: &str) -> (std::path::PathBuf, File) {
        let dir = std::env::temp_dir().join(format!("plangen-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(name);
        let f = File::create(&path).unwrap();
        (path, f)
    }
}
