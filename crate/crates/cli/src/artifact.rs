//! Artifact files with embedded provenance.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use plangen::corpus::{is_metadata_line, RawRecipe, RecipeRecord};
use plangen::ContentPlan;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

pub const TOOL: &str = "plangen";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
}

impl Provenance {
    pub fn new(command: &str, config_hash: String, seed: u64) -> Self {
        Provenance {
            tool: TOOL.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config_hash,
            seed,
        }
    }

    pub fn header_line(&self) -> String {
        serde_json::json!({ "provenance": self }).to_string()
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::new("io", format!("{}: {e}", path.display()))
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).map_err(|e| io_err(path, e))?,
    ))
}

/// JSON Lines with the provenance object as the first line.
pub fn write_jsonl<I>(path: &Path, prov: &Provenance, lines: I) -> CliResult<()>
where
    I: IntoIterator<Item = String>,
{
    let mut w = create(path)?;
    let mut emit = |s: &str| writeln!(w, "{s}").map_err(|e| io_err(path, e));
    emit(&prov.header_line())?;
    for line in lines {
        emit(&line)?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Plain text with a `# provenance` comment line first.
pub fn write_text(path: &Path, prov: &Provenance, body: &str) -> CliResult<()> {
    let mut w = create(path)?;
    writeln!(w, "# {}", prov.header_line())
        .and_then(|_| w.write_all(body.as_bytes()))
        .and_then(|_| w.flush())
        .map_err(|e| io_err(path, e))
}

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    format: String,
    version: u32,
    provenance: Provenance,
    model: T,
}

pub fn save_model<T: Serialize>(
    path: &Path,
    format: &str,
    prov: &Provenance,
    model: &T,
) -> CliResult<()> {
    let env = Envelope {
        format: format.into(),
        version: MODEL_VERSION,
        provenance: prov.clone(),
        model,
    };
    let mut w = create(path)?;
    serde_json::to_writer(&mut w, &env)?;
    writeln!(w)
        .and_then(|_| w.flush())
        .map_err(|e| io_err(path, e))
}

pub fn load_model<T: DeserializeOwned>(path: &Path, format: &str) -> CliResult<T> {
    let f = File::open(path).map_err(|e| io_err(path, e))?;
    let env: Envelope<Value> = serde_json::from_reader(BufReader::new(f))
        .map_err(|e| CliError::new("model_format", format!("{}: {e}", path.display())))?;
    if env.format != format {
        return Err(CliError::new(
            "model_format",
            format!(
                "{}: expected a {format} model, found {}",
                path.display(),
                env.format
            ),
        ));
    }
    if env.version != MODEL_VERSION {
        return Err(CliError::new(
            "model_format",
            format!(
                "{}: unsupported model version {}",
                path.display(),
                env.version
            ),
        ));
    }
    serde_json::from_value(env.model)
        .map_err(|e| CliError::new("model_format", format!("{}: {e}", path.display())))
}

/// Non-blank, non-provenance JSON lines with their 1-based line numbers.
pub fn read_jsonl(path: &Path) -> CliResult<Vec<(usize, Value)>> {
    let f = File::open(path).map_err(|e| io_err(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let v: Value = serde_json::from_str(&line).map_err(|e| {
            CliError::new(
                "malformed_line",
                format!("{}:{}: {e}", path.display(), i + 1),
            )
        })?;
        if !is_metadata_line(&v) {
            out.push((i + 1, v));
        }
    }
    Ok(out)
}

/// Lines of a text file, skipping blanks and `#` comments.
pub fn read_text_lines(path: &Path) -> CliResult<Vec<String>> {
    let f = File::open(path).map_err(|e| io_err(path, e))?;
    let mut out = Vec::new();
    for line in BufReader::new(f).lines() {
        let line = line.map_err(|e| io_err(path, e))?;
        if !line.trim().is_empty() && !line.starts_with('#') {
            out.push(line);
        }
    }
    Ok(out)
}

/// Title/ingredient records; instructions are optional and never filtered.
pub fn read_prompts(path: &Path) -> CliResult<Vec<RecipeRecord>> {
    read_jsonl(path)?
        .into_iter()
        .map(|(line, v)| {
            let raw: RawRecipe = serde_json::from_value(v).map_err(|e| {
                CliError::new("malformed_line", format!("{}:{line}: {e}", path.display()))
            })?;
            Ok(raw.tokenize(line.to_string(), true))
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanLine {
    pub id: String,
    pub plan: ContentPlan,
}

pub fn plan_line(id: &str, plan: &ContentPlan) -> String {
    serde_json::to_string(&PlanLine {
        id: id.to_owned(),
        plan: plan.clone(),
    })
    .expect("plan serializes")
}

pub fn read_plans(path: &Path) -> CliResult<Vec<PlanLine>> {
    read_jsonl(path)?
        .into_iter()
        .map(|(line, v)| {
            serde_json::from_value(v).map_err(|e| {
                CliError::new("malformed_line", format!("{}:{line}: {e}", path.display()))
            })
        })
        .collect()
}

pub fn plan_index(plans: Vec<PlanLine>) -> CliResult<HashMap<String, ContentPlan>> {
    let mut m = HashMap::new();
    for p in plans {
        if m.insert(p.id.clone(), p.plan).is_some() {
            return Err(CliError::new(
                "invalid_argument",
                format!("duplicate plan id `{}`", p.id),
            ));
        }
    }
    Ok(m)
}

/// Pairs each record with its plan by id.
pub fn join_plans(
    records: &[RecipeRecord],
    plans: &HashMap<String, ContentPlan>,
) -> CliResult<Vec<ContentPlan>> {
    records
        .iter()
        .map(|r| {
            plans.get(&r.id).cloned().ok_or_else(|| {
                CliError::new("invalid_argument", format!("no plan for recipe `{}`", r.id))
            })
        })
        .collect()
}
