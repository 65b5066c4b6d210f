use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::stage::StageLabel;

/// Shipped stage lexicon, `lemma<TAB>stage` per line.
pub const DEFAULT_LEXICON_TSV: &str = include_str!("../../data/default_lexicon.tsv");

pub const DEFAULT_CLAUSE_BOUNDARIES: &[&str] = &[
    ",", ";", "and", "or", "then", "until", "while", "before", "after", "so",
];

/// Exclusive lemma-to-stage map plus the clause-boundary token set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerbLexicon {
    verbs: BTreeMap<String, StageLabel>,
    boundaries: BTreeSet<String>,
}

impl VerbLexicon {
    pub fn new(entries: impl IntoIterator<Item = (String, StageLabel)>) -> Result<Self> {
        let mut verbs = BTreeMap::new();
        for (lemma, stage) in entries {
            if stage == StageLabel::General {
                return Err(Error::Lexicon(format!(
                    "'{lemma}' assigned to General, which must stay empty"
                )));
            }
            if let Some(prev) = verbs.insert(lemma.clone(), stage) {
                return Err(Error::Lexicon(format!(
                    "'{lemma}' listed under both {prev} and {stage}"
                )));
            }
        }
        Ok(VerbLexicon {
            verbs,
            boundaries: DEFAULT_CLAUSE_BOUNDARIES
                .iter()
                .map(|s| (*s).to_owned())
                .collect(),
        })
    }

    pub fn default_lexicon() -> Self {
        Self::read_tsv(DEFAULT_LEXICON_TSV.as_bytes()).expect("shipped lexicon is valid")
    }

    pub fn with_boundaries<I, S>(mut self, boundaries: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.boundaries = boundaries.into_iter().map(Into::into).collect();
        self
    }

    pub fn read_tsv<R: BufRead>(r: R) -> Result<Self> {
        let mut entries = Vec::new();
        for (n, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::io("<lexicon>", e))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (lemma, stage) = line.split_once('\t').ok_or_else(|| Error::MalformedLine {
                line: n + 1,
                message: "expected lemma<TAB>stage".into(),
            })?;
            let stage = stage
                .trim()
                .parse()
                .map_err(|e: Error| Error::MalformedLine {
                    line: n + 1,
                    message: e.to_string(),
                })?;
            entries.push((lemma.trim().to_lowercase(), stage));
        }
        Self::new(entries)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_tsv(std::io::BufReader::new(f))
    }

    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (lemma, stage) in &self.verbs {
            writeln!(w, "{lemma}\t{stage}")?;
        }
        Ok(())
    }

    pub fn stage_of(&self, lemma: &str) -> Option<StageLabel> {
        self.verbs.get(lemma).copied()
    }

    pub fn is_boundary(&self, token: &str) -> bool {
        self.boundaries.contains(token)
    }

    pub fn boundaries(&self) -> impl Iterator<Item = &str> {
        self.boundaries.iter().map(String::as_str)
    }

    /// Lemmas of one stage, in lexicographic order.
    pub fn verbs_of(&self, stage: StageLabel) -> Vec<&str> {
        self.verbs
            .iter()
            .filter(|(_, s)| **s == stage)
            .map(|(l, _)| l.as_str())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.verbs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verbs.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_lexicon_is_exclusive_and_sized() {
        let lex = VerbLexicon::default_lexicon();
        for stage in StageLabel::ALL {
            let n = lex.verbs_of(stage).len();
            if stage == StageLabel::General {
                assert_eq!(n, 0);
            } else {
                assert!(n >= 20, "{stage} has only {n} lemmas");
            }
        }
        for kw in ["peel", "mix", "pour", "fry", "garnish", "serve"] {
            assert!(lex.stage_of(kw).is_some(), "{kw}");
        }
    }

    #[test]
    fn duplicate_lemma_rejected() {
        let err = VerbLexicon::read_tsv("mix\tMixing\nmix\tCooking\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("mix"));
    }

    #[test]
    fn general_lemma_rejected() {
        assert!(VerbLexicon::read_tsv("do\tGeneral\n".as_bytes()).is_err());
    }

    #[test]
    fn bad_stage_reports_line() {
        match VerbLexicon::read_tsv("# c\nmix\tBlending\n".as_bytes()) {
            Err(Error::MalformedLine { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn boundaries_are_configurable() {
        let lex = VerbLexicon::default_lexicon().with_boundaries([";"]);
        assert!(lex.is_boundary(";"));
        assert!(!lex.is_boundary("and"));
    }
}
