//! Rule-based stage tagging: main-verb extraction over a stage lexicon.

mod lemma;
mod lexicon;

pub use lemma::lemmatize;
pub use lexicon::{VerbLexicon, DEFAULT_CLAUSE_BOUNDARIES, DEFAULT_LEXICON_TSV};

use crate::corpus::RecipeRecord;
use crate::error::{Error, Result};
use crate::stage::{ContentPlan, StageLabel};

/// Lemma of the main verb: the first lexicon verb of the first clause.
///
/// The instruction is cut at clause-boundary tokens. Leading boundaries
/// (an instruction opening with "then" or "and") are skipped, so the first
/// clause is the first non-empty segment. Verbs of later clauses are never
/// considered.
pub fn extract_main_verb<S: AsRef<str>>(tokens: &[S], lexicon: &VerbLexicon) -> Option<String> {
    tokens
        .iter()
        .map(AsRef::as_ref)
        .skip_while(|t| lexicon.is_boundary(t))
        .take_while(|t| !lexicon.is_boundary(t))
        .map(lemmatize)
        .find(|lemma| lexicon.stage_of(lemma).is_some())
}

pub fn tag_instruction<S: AsRef<str>>(
    instruction: &[S],
    lexicon: &VerbLexicon,
) -> Result<StageLabel> {
    if instruction.is_empty() {
        return Err(Error::invalid("cannot tag an empty instruction"));
    }
    Ok(extract_main_verb(instruction, lexicon)
        .and_then(|v| lexicon.stage_of(&v))
        .unwrap_or(StageLabel::General))
}

/// Tags each instruction of a recipe, giving its silver content plan.
pub fn tag_recipe(recipe: &RecipeRecord, lexicon: &VerbLexicon) -> Result<ContentPlan> {
    tag_instructions(&recipe.instructions, lexicon)
}

pub fn tag_instructions(
    instructions: &[Vec<String>],
    lexicon: &VerbLexicon,
) -> Result<ContentPlan> {
    let stages = instructions
        .iter()
        .map(|ins| tag_instruction(ins, lexicon))
        .collect::<Result<Vec<_>>>()?;
    ContentPlan::new(stages)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;

    fn lex() -> VerbLexicon {
        VerbLexicon::default_lexicon()
    }

    fn verb(s: &str) -> Option<String> {
        extract_main_verb(&tokenize(s, true), &lex())
    }

    fn tag(s: &str) -> StageLabel {
        tag_instruction(&tokenize(s, true), &lex()).unwrap()
    }

    #[test]
    fn first_clause_first_verb() {
        assert_eq!(
            verb("Add salt , stirring constantly").as_deref(),
            Some("add")
        );
        assert_eq!(verb("Pour milk and mix well").as_deref(), Some("pour"));
        assert_eq!(verb("slowly until golden"), None);
        assert_eq!(verb("Then bake for an hour").as_deref(), Some("bake"));
    }

    #[test]
    fn later_clause_verbs_are_discarded() {
        assert_eq!(verb("In a large bowl , whisk the eggs"), None);
        assert_eq!(tag("In a large bowl , whisk the eggs"), StageLabel::General);
    }

    #[test]
    fn tags_by_main_verb() {
        assert_eq!(tag("Mix flour and sugar ."), StageLabel::Mixing);
        assert_eq!(tag("Serve immediately ."), StageLabel::Final);
        assert_eq!(tag("Something something nothing ."), StageLabel::General);
        assert_eq!(tag("Peel the potatoes"), StageLabel::PreProcessing);
        assert_eq!(tag("Placed in the pan"), StageLabel::Transferring);
        assert_eq!(tag("Fry until golden"), StageLabel::Cooking);
        assert_eq!(tag("Let cool completely"), StageLabel::PostProcessing);
    }

    #[test]
    fn empty_instruction_is_an_error() {
        assert!(tag_instruction::<String>(&[], &lex()).is_err());
    }

    #[test]
    fn recipe_plan_follows_instructions() {
        let rec = RecipeRecord {
            id: "1".into(),
            title: vec![],
            ingredients: vec![vec!["a".into()]],
            instructions: vec![tokenize("Mix a b .", true), tokenize("Serve x .", true)],
        };
        let plan = tag_recipe(&rec, &lex()).unwrap();
        assert_eq!(plan.stages(), [StageLabel::Mixing, StageLabel::Final]);

        let single = RecipeRecord {
            instructions: vec![tokenize("Bake it well", true)],
            ..rec
        };
        assert_eq!(tag_recipe(&single, &lex()).unwrap().len(), 1);
    }

    #[test]
    fn tagging_is_total_and_deterministic() {
        let l = lex();
        for s in ["x", ",", "and", "and then", "pour , mix", "cooked rice"] {
            let t = tokenize(s, true);
            let a = tag_instruction(&t, &l).unwrap();
            assert_eq!(a, tag_instruction(&t, &l).unwrap());
        }
    }
}
