use std::collections::BTreeSet;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::RecipeRecord;
use crate::error::{Error, Result};

/// Known ingredient surface forms, lowercased and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngredientList {
    items: Vec<Vec<String>>,
}

fn normalize<S: AsRef<str>>(tokens: &[S]) -> Vec<String> {
    tokens.iter().map(|t| t.as_ref().to_lowercase()).collect()
}

impl IngredientList {
    pub fn new<I, S>(items: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let set: BTreeSet<Vec<String>> = items
            .into_iter()
            .map(|s| {
                s.as_ref()
                    .split_whitespace()
                    .map(str::to_lowercase)
                    .collect::<Vec<_>>()
            })
            .filter(|v| !v.is_empty())
            .collect();
        if set.is_empty() {
            return Err(Error::EmptyInput("ingredient list"));
        }
        Ok(IngredientList {
            items: set.into_iter().collect(),
        })
    }

    /// Every ingredient appearing in `corpus`.
    pub fn from_corpus(corpus: &[RecipeRecord]) -> Result<Self> {
        Self::new(
            corpus
                .iter()
                .flat_map(|r| r.ingredients.iter().map(|i| i.join(" "))),
        )
    }

    /// One ingredient per line; blank lines and `#` comments are skipped.
    pub fn read<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = Vec::new();
        for line in r.lines() {
            let line = line.map_err(|e| Error::io("<ingredient list>", e))?;
            let line = line.trim();
            if !line.is_empty() && !line.starts_with('#') {
                lines.push(line.to_owned());
            }
        }
        Self::new(lines)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(std::io::BufReader::new(f))
    }

    pub fn items(&self) -> &[Vec<String>] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Start positions of `needle` as a contiguous token run in `hay`.
fn occurrences(hay: &[String], needle: &[String]) -> Vec<usize> {
    if needle.is_empty() || needle.len() > hay.len() {
        return Vec::new();
    }
    (0..=hay.len() - needle.len())
        .filter(|&i| hay[i..i + needle.len()] == *needle)
        .collect()
}

/// `(coverage, extra)` in percent, both relative to the input ingredient count.
///
/// Matching is case-insensitive over whole tokens. A known ingredient only
/// counts as extra where it occurs outside every input-ingredient mention,
/// so "oil" inside "olive oil" is not a hallucination when "olive oil" was
/// given. Extra is capped at 100.
pub fn ingredient_coverage<S: AsRef<str>>(
    generated: &[S],
    input_ingredients: &[Vec<String>],
    global: &IngredientList,
) -> Result<(f64, f64)> {
    if input_ingredients.is_empty() {
        return Err(Error::EmptyInput("input ingredients"));
    }
    let text = normalize(generated);
    let inputs: BTreeSet<Vec<String>> = input_ingredients
        .iter()
        .map(|i| normalize(i))
        .filter(|i| !i.is_empty())
        .collect();
    let mut covered = vec![false; text.len()];
    let mut found = 0usize;
    for ing in &inputs {
        let occ = occurrences(&text, ing);
        if !occ.is_empty() {
            found += 1;
        }
        for i in occ {
            covered[i..i + ing.len()].iter_mut().for_each(|c| *c = true);
        }
    }
    let extra = global
        .items()
        .iter()
        .filter(|g| !inputs.contains(*g))
        .filter(|g| {
            occurrences(&text, g)
                .into_iter()
                .any(|i| covered[i..i + g.len()].iter().any(|c| !c))
        })
        .count();
    let n = input_ingredients.len() as f64;
    Ok((
        100.0 * found as f64 / n,
        (100.0 * extra as f64 / n).min(100.0),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_owned).collect()
    }

    fn global() -> IngredientList {
        IngredientList::new(["Salt", "olive oil", "oil", "flour", "egg", "milk", "salt"]).unwrap()
    }

    #[test]
    fn list_is_deduplicated_and_lowercased() {
        let g = global();
        assert_eq!(g.len(), 6);
        assert!(g.items().contains(&toks("salt")));
        assert!(IngredientList::new(Vec::<String>::new()).is_err());
    }

    #[test]
    fn full_mention_no_extras() {
        let inputs = vec![toks("salt"), toks("olive oil")];
        let (c, e) = ingredient_coverage(
            &toks("heat the Olive Oil and add salt ."),
            &inputs,
            &global(),
        )
        .unwrap();
        assert_eq!((c, e), (100.0, 0.0));
    }

    #[test]
    fn half_covered_one_extra() {
        let inputs = vec![toks("salt"), toks("flour"), toks("egg"), toks("olive oil")];
        let (c, e) =
            ingredient_coverage(&toks("mix flour and egg with milk"), &inputs, &global()).unwrap();
        assert_eq!((c, e), (50.0, 25.0));
    }

    #[test]
    fn empty_text_and_empty_inputs() {
        let inputs = vec![toks("salt")];
        assert_eq!(
            ingredient_coverage::<String>(&[], &inputs, &global()).unwrap(),
            (0.0, 0.0)
        );
        assert!(ingredient_coverage(&toks("salt"), &[], &global()).is_err());
    }

    #[test]
    fn concatenated_inputs_fully_covered() {
        let inputs = vec![toks("egg"), toks("olive oil"), toks("milk")];
        let text: Vec<String> = inputs.iter().flatten().cloned().collect();
        assert_eq!(
            ingredient_coverage(&text, &inputs, &global()).unwrap().0,
            100.0
        );
    }

    #[test]
    fn token_boundaries_respected() {
        let inputs = vec![toks("egg")];
        assert_eq!(
            ingredient_coverage(&toks("eggplant"), &inputs, &global())
                .unwrap()
                .0,
            0.0
        );
    }
}
