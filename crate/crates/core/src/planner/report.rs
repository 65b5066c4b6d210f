use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::stage::{ContentPlan, StageLabel, MAX_PLAN_LEN};

/// Plan-prediction quality, rates in percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerReport {
    pub unigram: f64,
    pub bigram: f64,
    pub trigram: f64,
    pub exact: f64,
    /// Entry `i` counts plans of length `i + 1`.
    pub predicted_lengths: [usize; MAX_PLAN_LEN],
    pub reference_lengths: [usize; MAX_PLAN_LEN],
    pub examples: usize,
    pub ngram_averaging: String,
    pub exact_denominator: String,
}

fn ngrams(s: &[StageLabel], n: usize) -> HashMap<&[StageLabel], usize> {
    let mut m = HashMap::new();
    for w in s.windows(n) {
        *m.entry(w).or_insert(0) += 1;
    }
    m
}

/// `(clipped matches, predicted n-gram count)` for one pair.
pub fn clipped_matches(pred: &[StageLabel], reference: &[StageLabel], n: usize) -> (usize, usize) {
    let r = ngrams(reference, n);
    let p = ngrams(pred, n);
    let hits = p
        .iter()
        .map(|(g, &c)| c.min(r.get(g).copied().unwrap_or(0)))
        .sum();
    (hits, pred.len().saturating_sub(n - 1))
}

/// Fraction of reference positions whose predicted stage agrees.
pub fn positional_match(pred: &[StageLabel], reference: &[StageLabel]) -> f64 {
    if reference.is_empty() {
        return 0.0;
    }
    let same = pred.iter().zip(reference).filter(|(a, b)| a == b).count();
    same as f64 / reference.len() as f64
}

/// Report over `(predicted, reference)` pairs. N-gram rates are micro-averaged
/// over all predicted n-grams; exact match is averaged per example.
pub fn report_from_pairs(pairs: &[(ContentPlan, ContentPlan)]) -> PlannerReport {
    let mut hits = [0usize; 3];
    let mut totals = [0usize; 3];
    let mut exact = 0.0;
    let mut predicted_lengths = [0; MAX_PLAN_LEN];
    let mut reference_lengths = [0; MAX_PLAN_LEN];
    for (p, r) in pairs {
        for n in 1..=3 {
            let (h, t) = clipped_matches(p.stages(), r.stages(), n);
            hits[n - 1] += h;
            totals[n - 1] += t;
        }
        exact += positional_match(p.stages(), r.stages());
        predicted_lengths[p.len() - 1] += 1;
        reference_lengths[r.len() - 1] += 1;
    }
    let rate = |i: usize| {
        if totals[i] == 0 {
            0.0
        } else {
            100.0 * hits[i] as f64 / totals[i] as f64
        }
    };
    PlannerReport {
        unigram: rate(0),
        bigram: rate(1),
        trigram: rate(2),
        exact: if pairs.is_empty() {
            0.0
        } else {
            100.0 * exact / pairs.len() as f64
        },
        predicted_lengths,
        reference_lengths,
        examples: pairs.len(),
        ngram_averaging: "micro".into(),
        exact_denominator: "reference_length".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use StageLabel::*;

    fn cp(s: &[StageLabel]) -> ContentPlan {
        ContentPlan::new(s.to_vec()).unwrap()
    }

    #[test]
    fn identical_pairs_score_full() {
        let a = cp(&[Mixing, Cooking, Final]);
        let b = cp(&[PreProcessing, Mixing, Mixing, Cooking]);
        let r = report_from_pairs(&[(a.clone(), a), (b.clone(), b)]);
        assert_eq!(
            (r.unigram, r.bigram, r.trigram, r.exact),
            (100.0, 100.0, 100.0, 100.0)
        );
        assert_eq!(r.predicted_lengths.iter().sum::<usize>(), 2);
        assert_eq!(r.reference_lengths, r.predicted_lengths);
    }

    #[test]
    fn one_substitution_in_three() {
        let r =
            report_from_pairs(&[(cp(&[Mixing, Cooking, Final]), cp(&[Mixing, General, Final]))]);
        assert!((r.exact - 200.0 / 3.0).abs() < 1e-9);
        assert!((r.unigram - 200.0 / 3.0).abs() < 1e-9);
        assert_eq!(r.bigram, 0.0);
        assert_eq!(r.trigram, 0.0);
    }

    #[test]
    fn longer_prediction_uses_reference_length() {
        let r = report_from_pairs(&[(
            cp(&[Mixing, Cooking, Final, General]),
            cp(&[Mixing, Cooking]),
        )]);
        assert_eq!(r.exact, 100.0);
        assert_eq!(r.unigram, 50.0);
    }

    #[test]
    fn clipping_at_reference_multiplicity() {
        let (h, t) = clipped_matches(&[Mixing, Mixing, Mixing], &[Mixing, Cooking], 1);
        assert_eq!((h, t), (1, 3));
    }
}
