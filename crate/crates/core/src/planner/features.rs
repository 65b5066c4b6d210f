use serde::{Deserialize, Serialize};

use crate::corpus::{RecipeRecord, TokenId, Vocabulary};

pub const TITLE_BUCKETS: usize = 8;
pub const INGREDIENT_BUCKETS: usize = 8;

/// Binary bag of known title/ingredient tokens plus two size buckets.
///
/// Token ids are kept sorted and deduplicated, so two feature sets built
/// from the same tokens in any order compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InputFeatures {
    tokens: Vec<TokenId>,
    title_bucket: u8,
    ingredient_bucket: u8,
}

impl InputFeatures {
    pub fn new(mut tokens: Vec<TokenId>, title_len: usize, ingredient_count: usize) -> Self {
        tokens.sort_unstable();
        tokens.dedup();
        InputFeatures {
            tokens,
            title_bucket: title_len.min(TITLE_BUCKETS - 1) as u8,
            ingredient_bucket: ingredient_count.min(INGREDIENT_BUCKETS - 1) as u8,
        }
    }

    pub fn tokens(&self) -> &[TokenId] {
        &self.tokens
    }

    pub fn title_bucket(&self) -> usize {
        self.title_bucket as usize
    }

    pub fn ingredient_bucket(&self) -> usize {
        self.ingredient_bucket as usize
    }

    /// Active feature count: known tokens plus the two buckets.
    pub fn len(&self) -> usize {
        self.tokens.len() + 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Vocabulary over title and ingredient tokens only.
pub fn build_feature_vocab(corpus: &[RecipeRecord], min_count: usize) -> Vocabulary {
    Vocabulary::from_tokens(corpus.iter().flat_map(|r| r.input_tokens()), min_count)
}

/// Features of a recipe's input side; instructions are never read.
pub fn featurize_input(recipe: &RecipeRecord, feature_vocab: &Vocabulary) -> InputFeatures {
    let tokens = recipe
        .input_tokens()
        .filter_map(|t| feature_vocab.get(t))
        .filter(|&id| id as usize >= Vocabulary::RESERVED)
        .collect();
    InputFeatures::new(tokens, recipe.title.len(), recipe.ingredients.len())
}
