use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{RecipeRecord, SpecialToken};
use crate::error::{Error, Result};

pub type TokenId = u32;

pub const UNK_ID: TokenId = 0;
pub const UNK_TOKEN: &str = "<unk>";

/// Bijection between tokens and dense ids.
///
/// Id 0 is the unknown token and ids 1..=8 are the separation tokens in
/// [`SpecialToken::ALL`] order; corpus tokens follow in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, TokenId>,
}

impl Vocabulary {
    pub const RESERVED: usize = 1 + SpecialToken::ALL.len();

    /// Builds a vocabulary of every token occurring at least `min_count` times.
    pub fn from_tokens<'a>(tokens: impl IntoIterator<Item = &'a str>, min_count: usize) -> Self {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for t in tokens {
            *counts.entry(t).or_default() += 1;
        }
        let kept = counts
            .into_iter()
            .filter(|(t, c)| *c >= min_count.max(1) && !is_reserved(t))
            .map(|(t, _)| t.to_owned());
        Self::from_ordered(kept)
    }

    fn from_ordered(content: impl IntoIterator<Item = String>) -> Self {
        let mut tokens = vec![UNK_TOKEN.to_owned()];
        tokens.extend(SpecialToken::ALL.iter().map(|s| s.as_str().to_owned()));
        tokens.extend(content);
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as TokenId))
            .collect();
        Vocabulary { tokens, index }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Id of `token`, or [`UNK_ID`] when absent.
    pub fn id(&self, token: &str) -> TokenId {
        self.index.get(token).copied().unwrap_or(UNK_ID)
    }

    pub fn get(&self, token: &str) -> Option<TokenId> {
        self.index.get(token).copied()
    }

    pub fn special(&self, tok: SpecialToken) -> TokenId {
        1 + SpecialToken::ALL.iter().position(|t| *t == tok).unwrap() as TokenId
    }

    pub fn is_special_id(&self, id: TokenId) -> bool {
        (1..Self::RESERVED as TokenId).contains(&id)
    }

    pub fn token(&self, id: TokenId) -> &str {
        &self.tokens[id as usize]
    }

    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<TokenId> {
        tokens.iter().map(|t| self.id(t.as_ref())).collect()
    }

    pub fn decode(&self, ids: &[TokenId]) -> Vec<String> {
        ids.iter().map(|&i| self.token(i).to_owned()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (TokenId, &str)> {
        self.tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (i as TokenId, t.as_str()))
    }

    /// Writes one `token<TAB>id` line per entry, sorted by id.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (id, tok) in self.iter() {
            writeln!(w, "{tok}\t{id}")?;
        }
        Ok(())
    }

    /// Reads the format written by [`Vocabulary::write_tsv`]; `#` lines are comments.
    pub fn read_tsv<R: BufRead>(r: R) -> Result<Self> {
        let mut tokens = Vec::new();
        for (n, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::io("<vocabulary>", e))?;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |m: &str| Error::MalformedLine {
                line: n + 1,
                message: m.to_owned(),
            };
            let (tok, id) = line
                .rsplit_once('\t')
                .ok_or_else(|| bad("expected token<TAB>id"))?;
            let id: usize = id.parse().map_err(|_| bad("id is not an integer"))?;
            if id != tokens.len() {
                return Err(bad("ids must be dense and sorted"));
            }
            tokens.push(tok.to_owned());
        }
        Self::try_from(tokens)
    }
}

fn is_reserved(t: &str) -> bool {
    t == UNK_TOKEN || SpecialToken::is_special(t)
}

impl TryFrom<Vec<String>> for Vocabulary {
    type Error = Error;

    fn try_from(tokens: Vec<String>) -> Result<Self> {
        let fresh = Self::from_ordered(std::iter::empty());
        if tokens.len() < Self::RESERVED || tokens[..Self::RESERVED] != fresh.tokens[..] {
            return Err(Error::ModelFormat(
                "vocabulary must start with <unk> and the 8 separation tokens".into(),
            ));
        }
        let voc = Self::from_ordered(tokens.into_iter().skip(Self::RESERVED));
        if voc.index.len() != voc.tokens.len() {
            return Err(Error::ModelFormat("duplicate token in vocabulary".into()));
        }
        Ok(voc)
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(v: Vocabulary) -> Self {
        v.tokens
    }
}

/// Vocabulary over every token of `corpus` occurring at least `min_count` times.
pub fn build_vocabulary(corpus: &[RecipeRecord], min_count: usize) -> Result<Vocabulary> {
    if corpus.is_empty() {
        return Err(Error::EmptyInput("corpus"));
    }
    Ok(Vocabulary::from_tokens(
        corpus.iter().flat_map(|r| r.all_tokens()),
        min_count,
    ))
}
