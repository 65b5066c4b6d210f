//! Stage-structured synthetic recipes with known plans.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::RecipeRecord;
use crate::error::{Error, Result};
use crate::stage::{ContentPlan, StageLabel, MAX_PLAN_LEN};
use crate::tagger::{lemmatize, VerbLexicon};

/// Column of the end-of-plan symbol in [`SyntheticCorpusSpec::transitions`].
pub const END_COLUMN: usize = 7;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpusSpec {
    /// Instruction-opening verbs per stage, indexed by [`StageLabel::index`].
    /// General verbs must not be lexicon lemmas.
    pub stage_verbs: [Vec<String>; 7],
    /// Content words per stage; pairwise disjoint.
    pub pools: [Vec<String>; 7],
    /// Distribution of the first stage.
    pub initial: [f64; 7],
    /// Row `s`: distribution of the stage following `s`, last column ends the plan.
    pub transitions: [[f64; 8]; 7],
    /// Inclusive range of content words per instruction, verb included.
    pub instruction_len: (usize, usize),
    pub title_pool: Vec<String>,
    pub title_len: (usize, usize),
    pub ingredient_pool: Vec<String>,
    pub ingredients_per_recipe: (usize, usize),
    /// Chance that an instruction mentions one of its recipe's ingredients.
    pub ingredient_mention_prob: f64,
    pub recipes: usize,
    pub seed: u64,
}

const ONSETS: [&str; 7] = ["p", "m", "t", "k", "z", "f", "g"];
const CONSONANTS: &[u8] = b"bdlnrv";
const VOWELS: &[u8] = b"aiou";

/// Pseudo-word `i` of a family, e.g. `pabo`.
fn pseudo_word(onset: &str, i: usize) -> String {
    let v1 = VOWELS[i % VOWELS.len()] as char;
    let c = CONSONANTS[(i / VOWELS.len()) % CONSONANTS.len()] as char;
    let v2 = VOWELS[(i / (VOWELS.len() * CONSONANTS.len())) % VOWELS.len()] as char;
    format!("{onset}{v1}{c}{v2}")
}

fn words(onset: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| pseudo_word(onset, i)).collect()
}

impl SyntheticCorpusSpec {
    /// A fixture whose stages use disjoint vocabularies, with verbs taken from
    /// `lexicon` so that the tagger recovers the generating plan exactly.
    /// One verb per stage.
    pub fn stage_disjoint(lexicon: &VerbLexicon, recipes: usize, seed: u64) -> Self {
        Self::stage_disjoint_with(lexicon, recipes, seed, 1)
    }

    /// As [`Self::stage_disjoint`] with up to three verbs per stage.
    pub fn stage_disjoint_with(
        lexicon: &VerbLexicon,
        recipes: usize,
        seed: u64,
        verbs_per_stage: usize,
    ) -> Self {
        let n = verbs_per_stage.clamp(1, 3);
        const PREFERRED: [&[&str]; 6] = [
            &["peel", "chop", "rinse"],
            &["mix", "add", "combine"],
            &["pour", "place", "transfer"],
            &["bake", "fry", "boil"],
            &["cool", "garnish", "cover"],
            &["serve", "wrap", "store"],
        ];
        let mut stage_verbs: [Vec<String>; 7] = Default::default();
        for stage in StageLabel::ALL {
            let i = stage.index();
            stage_verbs[i] = if stage == StageLabel::General {
                words("h", n)
            } else {
                PREFERRED[i]
                    .iter()
                    .filter(|v| lexicon.stage_of(v) == Some(stage))
                    .take(n)
                    .map(|v| (*v).to_owned())
                    .collect()
            };
        }
        let pools = std::array::from_fn(|i| words(ONSETS[i], 12));
        SyntheticCorpusSpec {
            stage_verbs,
            pools,
            initial: [0.45, 0.25, 0.05, 0.15, 0.0, 0.0, 0.10],
            transitions: [
                [0.25, 0.35, 0.10, 0.15, 0.00, 0.00, 0.10, 0.05],
                [0.05, 0.25, 0.30, 0.25, 0.00, 0.00, 0.10, 0.05],
                [0.00, 0.10, 0.10, 0.50, 0.10, 0.10, 0.05, 0.05],
                [0.00, 0.10, 0.10, 0.20, 0.30, 0.15, 0.05, 0.10],
                [0.00, 0.00, 0.10, 0.05, 0.20, 0.40, 0.05, 0.20],
                [0.00, 0.00, 0.00, 0.00, 0.05, 0.20, 0.05, 0.70],
                [0.15, 0.20, 0.15, 0.20, 0.10, 0.05, 0.10, 0.05],
            ],
            instruction_len: (3, 7),
            title_pool: words("s", 20),
            title_len: (1, 3),
            ingredient_pool: words("n", 30),
            ingredients_per_recipe: (2, 5),
            ingredient_mention_prob: 0.0,
            recipes,
            seed,
        }
    }

    /// Checks the structural invariants; with a lexicon, also checks that the
    /// tagger will recover every generating plan.
    pub fn validate(&self, lexicon: Option<&VerbLexicon>) -> Result<()> {
        let row_ok = |row: &[f64]| {
            row.iter().all(|p| p.is_finite() && *p >= 0.0)
                && (row.iter().sum::<f64>() - 1.0).abs() <= 1e-9
        };
        if !row_ok(&self.initial) {
            return Err(Error::invalid("initial stage distribution must sum to 1"));
        }
        for (i, row) in self.transitions.iter().enumerate() {
            if !row_ok(row) {
                return Err(Error::invalid(format!("transition row {i} must sum to 1")));
            }
        }
        let mut seen = HashSet::new();
        for pool in &self.pools {
            if pool.is_empty() {
                return Err(Error::invalid("every stage pool needs at least one word"));
            }
            for w in pool {
                if !seen.insert(w.as_str()) {
                    return Err(Error::invalid(format!("'{w}' appears in two stage pools")));
                }
            }
        }
        for (stage, verbs) in StageLabel::ALL.iter().zip(&self.stage_verbs) {
            if verbs.is_empty() {
                return Err(Error::invalid(format!("no verbs for stage {stage}")));
            }
        }
        let (lo, hi) = self.instruction_len;
        if lo == 0 || lo > hi {
            return Err(Error::invalid(
                "instruction_len must be a non-empty range starting at 1",
            ));
        }
        let (ilo, ihi) = self.ingredients_per_recipe;
        if ilo == 0 || ilo > ihi || ihi > self.ingredient_pool.len() {
            return Err(Error::invalid("ingredients_per_recipe out of range"));
        }
        if self.title_len.0 > self.title_len.1
            || (self.title_len.1 > 0 && self.title_pool.is_empty())
        {
            return Err(Error::invalid("title_len out of range"));
        }
        if !(0.0..=1.0).contains(&self.ingredient_mention_prob) {
            return Err(Error::invalid("ingredient_mention_prob must lie in [0, 1]"));
        }
        if let Some(lex) = lexicon {
            for stage in StageLabel::ALL {
                for v in &self.stage_verbs[stage.index()] {
                    let got = lex.stage_of(&lemmatize(v));
                    let want = (stage != StageLabel::General).then_some(stage);
                    if got != want || lex.is_boundary(v) {
                        return Err(Error::invalid(format!(
                            "verb '{v}' does not tag as {stage}"
                        )));
                    }
                }
            }
            let fillers = self.pools.iter().flatten().chain(&self.ingredient_pool);
            for w in fillers {
                if lex.stage_of(&lemmatize(w)).is_some() || lex.is_boundary(w) {
                    return Err(Error::invalid(format!(
                        "filler word '{w}' collides with the lexicon"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn categorical<R: Rng>(rng: &mut R, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // rounding slack: last index with positive mass
    probs.iter().rposition(|p| *p > 0.0).unwrap_or(0)
}

fn pick<'a, R: Rng>(rng: &mut R, items: &'a [String]) -> &'a String {
    &items[rng.random_range(0..items.len())]
}

fn sample_plan<R: Rng>(spec: &SyntheticCorpusSpec, rng: &mut R) -> ContentPlan {
    let mut stages = vec![StageLabel::ALL[categorical(rng, &spec.initial)]];
    while stages.len() < MAX_PLAN_LEN {
        let next = categorical(rng, &spec.transitions[stages.last().unwrap().index()]);
        if next == END_COLUMN {
            break;
        }
        stages.push(StageLabel::ALL[next]);
    }
    ContentPlan::new(stages).expect("length within bounds")
}

/// Samples `spec.recipes` recipes with their generating plans.
///
/// Instruction `i` opens with a verb of stage `plan[i]`, followed by words
/// from that stage's pool and a closing period.
pub fn generate_synthetic_corpus(
    spec: &SyntheticCorpusSpec,
) -> Result<Vec<(RecipeRecord, ContentPlan)>> {
    spec.validate(None)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Vec::with_capacity(spec.recipes);
    for n in 0..spec.recipes {
        let plan = sample_plan(spec, &mut rng);
        let title_len = rng.random_range(spec.title_len.0..=spec.title_len.1);
        let title = (0..title_len)
            .map(|_| pick(&mut rng, &spec.title_pool).clone())
            .collect();
        let n_ingr =
            rng.random_range(spec.ingredients_per_recipe.0..=spec.ingredients_per_recipe.1);
        let mut pool: Vec<&String> = spec.ingredient_pool.iter().collect();
        let mut ingredients = Vec::with_capacity(n_ingr);
        for _ in 0..n_ingr {
            let k = rng.random_range(0..pool.len());
            ingredients.push(vec![pool.swap_remove(k).clone()]);
        }
        let instructions = plan
            .stages()
            .iter()
            .map(|stage| {
                let s = stage.index();
                let len = rng.random_range(spec.instruction_len.0..=spec.instruction_len.1);
                let mut ins = vec![pick(&mut rng, &spec.stage_verbs[s]).clone()];
                if len > 1 && rng.random_bool(spec.ingredient_mention_prob) {
                    let k = rng.random_range(0..ingredients.len());
                    ins.push(ingredients[k][0].clone());
                }
                while ins.len() < len {
                    ins.push(pick(&mut rng, &spec.pools[s]).clone());
                }
                ins.push(".".to_owned());
                ins
            })
            .collect();
        let rec = RecipeRecord {
            id: format!("syn-{n:05}"),
            title,
            ingredients,
            instructions,
        };
        out.push((rec, plan));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tagger::tag_recipe;

    fn lex() -> VerbLexicon {
        VerbLexicon::default_lexicon()
    }

    #[test]
    fn default_fixture_is_valid() {
        let spec = SyntheticCorpusSpec::stage_disjoint(&lex(), 10, 1);
        spec.validate(Some(&lex())).unwrap();
    }

    #[test]
    fn tagger_recovers_generating_plans() {
        for n in 1..=3 {
            let mut spec = SyntheticCorpusSpec::stage_disjoint_with(&lex(), 300, 7, n);
            spec.ingredient_mention_prob = 0.5;
            spec.validate(Some(&lex())).unwrap();
            assert!(spec.stage_verbs.iter().all(|v| v.len() == n));
            for (rec, plan) in generate_synthetic_corpus(&spec).unwrap() {
                assert_eq!(tag_recipe(&rec, &lex()).unwrap(), plan, "{}", rec.id);
            }
        }
    }

    #[test]
    fn single_stage_plans_draw_from_one_pool() {
        let mut spec = SyntheticCorpusSpec::stage_disjoint(&lex(), 50, 3);
        let c = StageLabel::Cooking.index();
        spec.initial = [0.0; 7];
        spec.initial[c] = 1.0;
        for row in spec.transitions.iter_mut() {
            *row = [0.0; 8];
            row[c] = 0.5;
            row[END_COLUMN] = 0.5;
        }
        for (rec, plan) in generate_synthetic_corpus(&spec).unwrap() {
            assert!(plan.stages().iter().all(|s| *s == StageLabel::Cooking));
            for ins in &rec.instructions {
                assert!(spec.stage_verbs[c].contains(&ins[0]));
                for w in &ins[1..ins.len() - 1] {
                    assert!(spec.pools[c].contains(w), "{w}");
                }
            }
        }
    }

    #[test]
    fn same_seed_same_corpus() {
        let spec = SyntheticCorpusSpec::stage_disjoint(&lex(), 40, 11);
        assert_eq!(
            generate_synthetic_corpus(&spec).unwrap(),
            generate_synthetic_corpus(&spec).unwrap()
        );
    }

    #[test]
    fn invalid_specs_rejected() {
        let base = SyntheticCorpusSpec::stage_disjoint(&lex(), 5, 0);
        let mut bad_row = base.clone();
        bad_row.transitions[2][0] += 0.1;
        assert!(bad_row.validate(None).is_err());
        let mut overlap = base.clone();
        overlap.pools[1].push(overlap.pools[0][0].clone());
        assert!(overlap.validate(None).is_err());
        let mut leaky = base;
        leaky.pools[6].push("bake".into());
        assert!(leaky.validate(Some(&lex())).is_err());
    }
}
