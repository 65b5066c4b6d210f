pub mod data;
pub mod evaluate;
pub mod infer;
pub mod train;

use std::path::Path;

use plangen::tagger::VerbLexicon;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::artifact::Provenance;
use crate::config::{config_hash, resolve, ConfigFile, Global};
use crate::error::{CliError, CliResult};

pub struct Ctx {
    pub file: ConfigFile,
    pub global: Global,
}

impl Ctx {
    /// Resolves a subcommand's settings and the provenance they imply.
    pub fn settings<T, F>(&self, command: &str, flags: &F) -> CliResult<(T, Provenance)>
    where
        T: Serialize + DeserializeOwned + Default,
        F: Serialize,
    {
        let s: T = resolve(&self.file, command, flags)?;
        let hash = config_hash(command, self.global.seed, &s)?;
        Ok((s, Provenance::new(command, hash, self.global.seed)))
    }

    /// Runs `f` on a pool of `--jobs` threads.
    pub fn pooled<R: Send>(&self, f: impl FnOnce() -> R + Send) -> CliResult<R> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.global.jobs)
            .build()
            .map_err(|e| CliError::new("runtime", e.to_string()))?;
        Ok(pool.install(f))
    }
}

pub fn lexicon(path: Option<&Path>) -> CliResult<VerbLexicon> {
    match path {
        Some(p) => Ok(VerbLexicon::load(p)?),
        None => Ok(VerbLexicon::default_lexicon()),
    }
}

pub fn is_false(b: &bool) -> bool {
    !*b
}
