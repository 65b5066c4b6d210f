//! Flat token-stream form of a recipe with the eight separation tokens.

use std::fmt;

use super::RecipeRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SpecialToken {
    TitleStart,
    TitleEnd,
    IngrStart,
    IngrNext,
    IngrEnd,
    InstrStart,
    InstrNext,
    InstrEnd,
}

impl SpecialToken {
    pub const ALL: [SpecialToken; 8] = [
        SpecialToken::TitleStart,
        SpecialToken::TitleEnd,
        SpecialToken::IngrStart,
        SpecialToken::IngrNext,
        SpecialToken::IngrEnd,
        SpecialToken::InstrStart,
        SpecialToken::InstrNext,
        SpecialToken::InstrEnd,
    ];

    /// Literal form as it appears in a serialized stream.
    pub fn as_str(self) -> &'static str {
        match self {
            SpecialToken::TitleStart => "<TITLE_START>",
            SpecialToken::TitleEnd => "<TITLE_END>",
            SpecialToken::IngrStart => "<INGR_START>",
            SpecialToken::IngrNext => "<INGR_NEXT>",
            SpecialToken::IngrEnd => "<INGR_END>",
            SpecialToken::InstrStart => "<INSTR_START>",
            SpecialToken::InstrNext => "<INSTR_NEXT>",
            SpecialToken::InstrEnd => "<INSTR_END>",
        }
    }

    /// Bare name without angle brackets, e.g. `TITLE_END`.
    pub fn name(self) -> &'static str {
        let s = self.as_str();
        &s[1..s.len() - 1]
    }

    pub fn parse(token: &str) -> Option<SpecialToken> {
        SpecialToken::ALL
            .iter()
            .copied()
            .find(|t| t.as_str() == token)
    }

    pub fn is_special(token: &str) -> bool {
        Self::parse(token).is_some()
    }
}

impl fmt::Display for SpecialToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    /// A required separator never appeared where it had to.
    #[error("missing {expected} at position {position}")]
    Missing {
        expected: SpecialToken,
        position: usize,
    },
    /// A separator appeared where it is not allowed (duplicated or nested).
    #[error("unexpected {found} at position {position}")]
    Unexpected {
        found: SpecialToken,
        position: usize,
    },
    /// Two separators with nothing between them.
    #[error("empty segment before {separator} at position {position}")]
    EmptySegment {
        separator: SpecialToken,
        position: usize,
    },
    #[error("trailing tokens after INSTR_END at position {position}")]
    Trailing { position: usize },
}

impl ParseError {
    /// Name of the separator the error is about.
    pub fn offending(&self) -> &'static str {
        match self {
            ParseError::Missing { expected, .. } => expected.name(),
            ParseError::Unexpected { found, .. } => found.name(),
            ParseError::EmptySegment { separator, .. } => separator.name(),
            ParseError::Trailing { .. } => SpecialToken::InstrEnd.name(),
        }
    }
}

fn push_list(out: &mut Vec<String>, items: &[Vec<String>], next: SpecialToken) {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.push(next.as_str().to_owned());
        }
        out.extend(item.iter().cloned());
    }
}

/// The prompt half of a serialized recipe, ending with `<INSTR_START>`.
pub fn serialize_prompt(recipe: &RecipeRecord) -> Vec<String> {
    let mut out = Vec::new();
    out.push(SpecialToken::TitleStart.as_str().to_owned());
    out.extend(recipe.title.iter().cloned());
    out.push(SpecialToken::TitleEnd.as_str().to_owned());
    out.push(SpecialToken::IngrStart.as_str().to_owned());
    push_list(&mut out, &recipe.ingredients, SpecialToken::IngrNext);
    out.push(SpecialToken::IngrEnd.as_str().to_owned());
    out.push(SpecialToken::InstrStart.as_str().to_owned());
    out
}

pub fn serialize_with_tokens(recipe: &RecipeRecord) -> Vec<String> {
    let mut out = serialize_prompt(recipe);
    push_list(&mut out, &recipe.instructions, SpecialToken::InstrNext);
    out.push(SpecialToken::InstrEnd.as_str().to_owned());
    out
}

struct Cursor<'a> {
    tokens: &'a [String],
    pos: usize,
}

impl Cursor<'_> {
    fn expect(&mut self, tok: SpecialToken) -> Result<(), ParseError> {
        match self.tokens.get(self.pos).map(|t| SpecialToken::parse(t)) {
            Some(Some(t)) if t == tok => {
                self.pos += 1;
                Ok(())
            }
            Some(Some(found)) if found < tok && is_opener(found) => Err(ParseError::Unexpected {
                found,
                position: self.pos,
            }),
            _ => Err(ParseError::Missing {
                expected: tok,
                position: self.pos,
            }),
        }
    }

    /// Reads content tokens up to the next separator.
    fn content(&mut self) -> (Vec<String>, Option<SpecialToken>) {
        let mut seg = Vec::new();
        while let Some(t) = self.tokens.get(self.pos) {
            if let Some(sp) = SpecialToken::parse(t) {
                return (seg, Some(sp));
            }
            seg.push(t.clone());
            self.pos += 1;
        }
        (seg, None)
    }

    /// Reads a `next`-separated list closed by `end`.
    fn list(
        &mut self,
        start: SpecialToken,
        next: SpecialToken,
        end: SpecialToken,
    ) -> Result<Vec<Vec<String>>, ParseError> {
        let mut items = Vec::new();
        loop {
            let (seg, stop) = self.content();
            match stop {
                Some(sp) if sp == next || sp == end => {
                    if seg.is_empty() {
                        return Err(ParseError::EmptySegment {
                            separator: sp,
                            position: self.pos,
                        });
                    }
                    items.push(seg);
                    self.pos += 1;
                    if sp == end {
                        return Ok(items);
                    }
                }
                Some(sp) if sp == start => {
                    return Err(ParseError::Unexpected {
                        found: sp,
                        position: self.pos,
                    })
                }
                _ => {
                    return Err(ParseError::Missing {
                        expected: end,
                        position: self.pos,
                    })
                }
            }
        }
    }
}

fn is_opener(t: SpecialToken) -> bool {
    matches!(
        t,
        SpecialToken::TitleStart | SpecialToken::IngrStart | SpecialToken::InstrStart
    )
}

/// Inverse of [`serialize_with_tokens`]. The returned record has an empty id.
pub fn parse_serialized(tokens: &[String]) -> Result<RecipeRecord, ParseError> {
    let mut cur = Cursor { tokens, pos: 0 };
    cur.expect(SpecialToken::TitleStart)?;
    let (title, stop) = cur.content();
    match stop {
        Some(SpecialToken::TitleEnd) => cur.pos += 1,
        Some(SpecialToken::TitleStart) => {
            return Err(ParseError::Unexpected {
                found: SpecialToken::TitleStart,
                position: cur.pos,
            })
        }
        _ => {
            return Err(ParseError::Missing {
                expected: SpecialToken::TitleEnd,
                position: cur.pos,
            })
        }
    }
    cur.expect(SpecialToken::IngrStart)?;
    let ingredients = cur.list(
        SpecialToken::IngrStart,
        SpecialToken::IngrNext,
        SpecialToken::IngrEnd,
    )?;
    cur.expect(SpecialToken::InstrStart)?;
    let instructions = cur.list(
        SpecialToken::InstrStart,
        SpecialToken::InstrNext,
        SpecialToken::InstrEnd,
    )?;
    if cur.pos != tokens.len() {
        return Err(ParseError::Trailing { position: cur.pos });
    }
    Ok(RecipeRecord {
        id: String::new(),
        title,
        ingredients,
        instructions,
    })
}
