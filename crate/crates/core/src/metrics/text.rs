use std::collections::HashMap;

use crate::error::{Error, Result};

pub const BLEU_EPSILON: f64 = 1e-9;

fn ngram_counts<S: AsRef<str>>(s: &[S], n: usize) -> HashMap<Vec<&str>, usize> {
    let mut m = HashMap::new();
    for w in s.windows(n) {
        *m.entry(w.iter().map(AsRef::as_ref).collect()).or_insert(0) += 1;
    }
    m
}

/// Single-reference sentence BLEU in `[0, 1]`.
///
/// Orders above the candidate length are skipped. Zero n-gram precisions
/// are replaced by [`BLEU_EPSILON`]; an empty candidate scores 0.
pub fn bleu<S: AsRef<str>, T: AsRef<str>>(
    candidate: &[S],
    reference: &[T],
    max_n: usize,
) -> Result<f64> {
    if reference.is_empty() {
        return Err(Error::EmptyInput("BLEU reference"));
    }
    if max_n == 0 {
        return Err(Error::invalid("BLEU max_n must be at least 1"));
    }
    if candidate.is_empty() {
        return Ok(0.0);
    }
    let order = max_n.min(candidate.len());
    let mut log_sum = 0.0;
    for n in 1..=order {
        let cand = ngram_counts(candidate, n);
        let refc = ngram_counts(reference, n);
        let total = candidate.len().saturating_sub(n - 1);
        let hits: usize = cand
            .iter()
            .map(|(g, &c)| c.min(refc.get(g).copied().unwrap_or(0)))
            .sum();
        let p = if hits == 0 {
            BLEU_EPSILON
        } else {
            hits as f64 / total as f64
        };
        log_sum += p.ln();
    }
    let bp = (1.0 - reference.len() as f64 / candidate.len() as f64)
        .min(0.0)
        .exp();
    Ok((bp * (log_sum / order as f64).exp()).clamp(0.0, 1.0))
}

pub fn lcs_len<S: AsRef<str>, T: AsRef<str>>(a: &[S], b: &[T]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x.as_ref() == y.as_ref() {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// LCS-based F1 in `[0, 1]`.
pub fn rouge_l<S: AsRef<str>, T: AsRef<str>>(candidate: &[S], reference: &[T]) -> Result<f64> {
    if candidate.is_empty() || reference.is_empty() {
        return Err(Error::EmptyInput("ROUGE-L input"));
    }
    let l = lcs_len(candidate, reference) as f64;
    if l == 0.0 {
        return Ok(0.0);
    }
    let p = l / candidate.len() as f64;
    let r = l / reference.len() as f64;
    Ok(2.0 * p * r / (p + r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    #[test]
    fn bleu_brevity_hand_case() {
        let b = bleu(&t("the cat"), &t("the cat sat"), 2).unwrap();
        assert!((b - (-0.5f64).exp()).abs() < 1e-12);
        assert!((b - 0.6065).abs() < 1e-4);
    }

    #[test]
    fn bleu_edge_cases() {
        let r = t("a b c d e");
        assert_eq!(bleu(&r, &r, 4).unwrap(), 1.0);
        assert!(bleu(&t("x y z w"), &r, 4).unwrap() < 1e-8);
        assert_eq!(bleu::<&str, &str>(&[], &r, 4).unwrap(), 0.0);
        assert!(bleu(&r, &Vec::<&str>::new(), 4).is_err());
        assert_eq!(bleu(&t("a"), &t("a"), 4).unwrap(), 1.0);
    }

    #[test]
    fn rouge_hand_case() {
        let f = rouge_l(&t("a b c d"), &t("a c d")).unwrap();
        assert!((f - 6.0 / 7.0).abs() < 1e-12);
        assert_eq!(rouge_l(&t("a b"), &t("a b")).unwrap(), 1.0);
        assert_eq!(rouge_l(&t("a b"), &t("c d")).unwrap(), 0.0);
        assert!(rouge_l(&t("a"), &Vec::<&str>::new()).is_err());
    }

    proptest! {
        #[test]
        fn bounded_and_identity(
            a in proptest::collection::vec("[a-d]", 1..12),
            b in proptest::collection::vec("[a-d]", 1..12),
        ) {
            let x = bleu(&a, &b, 4).unwrap();
            let y = rouge_l(&a, &b).unwrap();
            prop_assert!((0.0..=1.0).contains(&x));
            prop_assert!((0.0..=1.0).contains(&y));
            prop_assert_eq!(bleu(&a, &a, 4).unwrap(), 1.0);
            prop_assert_eq!(rouge_l(&a, &a).unwrap(), 1.0);
        }
    }
}
