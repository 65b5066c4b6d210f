use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::RecipeRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<RecipeRecord>,
    pub val: Vec<RecipeRecord>,
    pub test: Vec<RecipeRecord>,
}

/// Part sizes: floor of each share, then the remainder goes one by one to
/// the parts with the largest fractional share (earlier parts win ties).
pub(crate) fn part_sizes(n: usize, ratios: [f64; 3]) -> [usize; 3] {
    let exact: Vec<f64> = ratios.iter().map(|r| r * n as f64).collect();
    let mut sizes = [0usize; 3];
    for (s, e) in sizes.iter_mut().zip(&exact) {
        *s = (e + 1e-9).floor() as usize;
    }
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| {
        let fa = exact[a] - sizes[a] as f64;
        let fb = exact[b] - sizes[b] as f64;
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    let mut remaining = n - sizes.iter().sum::<usize>().min(n);
    for &i in order.iter().cycle() {
        if remaining == 0 {
            break;
        }
        if ratios[i] > 0.0 {
            sizes[i] += 1;
            remaining -= 1;
        }
    }
    sizes
}

/// Seeded shuffle followed by a three-way cut.
pub fn split_corpus(corpus: &[RecipeRecord], ratios: (f64, f64, f64), seed: u64) -> Result<Split> {
    let ratios = [ratios.0, ratios.1, ratios.2];
    if ratios.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return Err(Error::invalid(
            "split ratios must be finite and non-negative",
        ));
    }
    if (ratios.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::invalid("split ratios must sum to 1"));
    }
    let mut idx: Vec<usize> = (0..corpus.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let [a, b, _] = part_sizes(corpus.len(), ratios);
    let pick = |r: &[usize]| r.iter().map(|&i| corpus[i].clone()).collect::<Vec<_>>();
    Ok(Split {
        train: pick(&idx[..a]),
        val: pick(&idx[a..a + b]),
        test: pick(&idx[a + b..]),
    })
}
