use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{RecipeRecord, SpecialToken};
use crate::error::{Error, Result};
use crate::stage::{ContentPlan, StageLabel};

/// A prefix of one instruction with that instruction's silver stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialInstruction {
    pub tokens: Vec<String>,
    pub label: StageLabel,
}

/// Expands each instruction into `truncations` training examples: the full
/// instruction plus `truncations - 1` random prefixes with at least
/// `min_prefix` tokens. An instruction too short to truncate contributes
/// its full form in place of each prefix.
pub fn make_partial_dataset(
    corpus: &[RecipeRecord],
    plans: &[ContentPlan],
    truncations: usize,
    min_prefix: usize,
    seed: u64,
) -> Result<Vec<PartialInstruction>> {
    if corpus.len() != plans.len() {
        return Err(Error::invalid(format!(
            "{} recipes but {} plans",
            corpus.len(),
            plans.len()
        )));
    }
    if truncations == 0 || min_prefix == 0 {
        return Err(Error::invalid("truncations and min_prefix must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (rec, plan) in corpus.iter().zip(plans) {
        if rec.instructions.len() != plan.len() {
            return Err(Error::invalid(format!(
                "recipe {} has {} instructions but a plan of length {}",
                rec.id,
                rec.instructions.len(),
                plan.len()
            )));
        }
        for (ins, &label) in rec.instructions.iter().zip(plan.stages()) {
            let toks: Vec<String> = ins
                .iter()
                .filter(|t| !SpecialToken::is_special(t))
                .cloned()
                .collect();
            if toks.is_empty() {
                continue;
            }
            out.push(PartialInstruction {
                tokens: toks.clone(),
                label,
            });
            for _ in 1..truncations {
                let len = if min_prefix < toks.len() {
                    rng.random_range(min_prefix..toks.len())
                } else {
                    toks.len()
                };
                out.push(PartialInstruction {
                    tokens: toks[..len].to_vec(),
                    label,
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn recipe(instructions: &[&str]) -> RecipeRecord {
        RecipeRecord {
            id: "r".into(),
            title: vec![],
            ingredients: vec![vec!["x".into()]],
            instructions: instructions
                .iter()
                .map(|s| s.split_whitespace().map(str::to_owned).collect())
                .collect(),
        }
    }

    fn plan(n: usize) -> ContentPlan {
        ContentPlan::new(vec![StageLabel::Cooking; n]).unwrap()
    }

    #[test]
    fn one_truncation_is_the_full_instruction() {
        let out = make_partial_dataset(&[recipe(&["a b c d e f"])], &[plan(1)], 1, 1, 0).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].tokens.len(), 6);
    }

    #[test]
    fn prefixes_respect_min_length() {
        let out =
            make_partial_dataset(&[recipe(&["a b c d e f g h"])], &[plan(1)], 50, 2, 9).unwrap();
        assert!(out.iter().all(|p| p.tokens.len() >= 2));
        assert!(out.iter().skip(1).all(|p| p.tokens.len() < 8));
        assert!(out.iter().all(|p| p.label == StageLabel::Cooking));
    }

    #[test]
    fn expansion_ratio() {
        // 710 instructions x 7 truncations
        let recs: Vec<_> = (0..71).map(|_| recipe(&["a b c d e"; 10])).collect();
        let plans: Vec<_> = (0..71).map(|_| plan(10)).collect();
        let out = make_partial_dataset(&recs, &plans, 7, 1, 3).unwrap();
        assert_eq!(out.len(), 4970);
    }

    #[test]
    fn misaligned_plans_rejected() {
        assert!(make_partial_dataset(&[recipe(&["a b c"])], &[plan(2)], 3, 1, 0).is_err());
        assert!(make_partial_dataset(&[recipe(&["a b c"])], &[], 3, 1, 0).is_err());
    }

    #[test]
    fn deterministic_given_seed() {
        let recs = [recipe(&["a b c d e f g", "h i j k l"])];
        let plans = [plan(2)];
        assert_eq!(
            make_partial_dataset(&recs, &plans, 5, 1, 4).unwrap(),
            make_partial_dataset(&recs, &plans, 5, 1, 4).unwrap()
        );
    }
}
