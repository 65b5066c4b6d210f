use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::state::{INSTR_END, INSTR_NEXT};
use super::*;
use crate::classifier::{StageDistribution, StageScorer};
use crate::corpus::{TokenId, Vocabulary};
use crate::error::Result;
use crate::lm::LanguageModel;
use crate::stage::{ContentPlan, StageLabel};

fn mix(seed: u64, items: impl IntoIterator<Item = u64>) -> u64 {
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    for x in items {
        h = (h ^ x).wrapping_mul(0x1000_0000_01b3).rotate_left(17);
    }
    h
}

/// Context-hashed random distributions.
struct HashLm {
    vocab: Vocabulary,
    seed: u64,
}

impl LanguageModel for HashLm {
    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    fn next_distribution(&self, context: &[TokenId]) -> Vec<f64> {
        let tail = &context[context.len().saturating_sub(2)..];
        let mut rng = ChaCha8Rng::seed_from_u64(mix(self.seed, tail.iter().map(|&t| t as u64)));
        let w: Vec<f64> = (0..self.vocab.len())
            .map(|_| rng.random::<f64>().powi(3) + 1e-3)
            .collect();
        let z: f64 = w.iter().sum();
        w.into_iter().map(|x| x / z).collect()
    }
}

struct HashClf {
    seed: u64,
}

impl StageScorer for HashClf {
    fn stage_distribution(&self, partial: &[&str]) -> Result<StageDistribution> {
        assert!(!partial.is_empty());
        let key = partial.iter().flat_map(|s| s.bytes()).map(u64::from);
        let mut rng = ChaCha8Rng::seed_from_u64(mix(self.seed, key));
        let mut d = [0.0; 7];
        for x in d.iter_mut() {
            *x = rng.random::<f64>() + 1e-3;
        }
        let z: f64 = d.iter().sum();
        Ok(d.map(|x| x / z))
    }
}

/// Fixed next-token table, ignoring context.
struct FixedLm {
    vocab: Vocabulary,
    dist: Vec<f64>,
}

impl LanguageModel for FixedLm {
    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    fn next_distribution(&self, _: &[TokenId]) -> Vec<f64> {
        self.dist.clone()
    }
}

struct ByLastToken(Vec<(&'static str, StageDistribution)>);

impl StageScorer for ByLastToken {
    fn stage_distribution(&self, partial: &[&str]) -> Result<StageDistribution> {
        let last = partial.last().unwrap();
        Ok(self
            .0
            .iter()
            .find(|(t, _)| t == last)
            .map(|e| e.1)
            .unwrap_or([1.0 / 7.0; 7]))
    }
}

fn words(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("w{i:02}")).collect()
}

fn prompt() -> Vec<String> {
    [
        "<TITLE_START>",
        "w00",
        "<TITLE_END>",
        "<INGR_START>",
        "w01",
        "<INGR_NEXT>",
        "w02",
        "<INGR_END>",
        "<INSTR_START>",
    ]
    .map(String::from)
    .to_vec()
}

fn plan(stages: &[usize]) -> ContentPlan {
    ContentPlan::new(stages.iter().map(|&i| StageLabel::ALL[i]).collect()).unwrap()
}

#[test]
fn mixed_score_prefers_classifier_backed_token() {
    let vocab = Vocabulary::from_tokens(["toka", "tokb"], 1);
    let mut dist = vec![0.2 / 9.0; vocab.len()];
    dist[vocab.id("toka") as usize] = 0.5;
    dist[vocab.id("tokb") as usize] = 0.3;
    let lm = FixedLm { vocab, dist };
    let mut pa = [0.0; 7];
    pa[0] = 0.1;
    let mut pb = [0.0; 7];
    pb[0] = 0.9;
    let clf = ByLastToken(vec![("toka", pa), ("tokb", pb)]);
    let p = [
        "<TITLE_START>",
        "toka",
        "<TITLE_END>",
        "<INGR_START>",
        "tokb",
        "<INGR_END>",
        "<INSTR_START>",
    ];
    let state = DecodeState::from_prompt(&p, lm.vocab(), 1).unwrap();
    let cfg = DecodeConfig {
        alpha: 0.5,
        top_s: 2,
        ..Default::default()
    };
    let cands = score_candidates(&lm, &clf, &state, &plan(&[0]), &cfg).unwrap();
    assert!((cands[0].score.exp() - 0.2236).abs() < 1e-4);
    assert!((cands[1].score.exp() - 0.5196).abs() < 1e-4);
    assert_eq!(pick(&cands).token, lm.vocab().id("tokb"));
}

/// Independent per-step evaluation of the mixed objective.
fn oracle_choice(
    lm: &HashLm,
    clf: &HashClf,
    state: &DecodeState,
    stage: usize,
    alpha: f64,
    s: usize,
) -> TokenId {
    let dist = lm.next_distribution(&state.tokens);
    let partial_open = state.tokens.len() > state.k;
    let mut ids: Vec<TokenId> = (0..dist.len() as TokenId)
        .filter(|&i| i >= 9 || (partial_open && (i == 7 || i == 8)))
        .collect();
    ids.sort_by(|&a, &b| {
        dist[b as usize]
            .partial_cmp(&dist[a as usize])
            .unwrap()
            .then(a.cmp(&b))
    });
    ids.truncate(s);
    let words: Vec<&str> = state.tokens[state.k..]
        .iter()
        .map(|&t| lm.vocab.token(t))
        .collect();
    let mut best: Option<(f64, TokenId)> = None;
    for id in ids {
        let mut seq = words.clone();
        if id >= 9 {
            seq.push(lm.vocab.token(id));
        }
        let pf = clf.stage_distribution(&seq).unwrap()[stage];
        let sc = (1.0 - alpha) * dist[id as usize].ln() + alpha * pf.max(1e-9).ln();
        best = match best {
            Some((b, bi)) if b > sc + 1e-9 || ((b - sc).abs() <= 1e-9 && bi < id) => Some((b, bi)),
            _ => Some((sc, id)),
        };
    }
    best.unwrap().1
}

#[test]
fn steps_match_brute_force_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..60 {
        let v = Vocabulary::from_tokens(
            words(rng.random_range(3..=21)).iter().map(String::as_str),
            1,
        );
        let lm = HashLm {
            vocab: v,
            seed: case,
        };
        let clf = HashClf { seed: case * 7 + 1 };
        let alpha = [0.0, 0.25, 0.5, 0.75, 1.0][rng.random_range(0..5)];
        let s = rng.random_range(1..=5);
        let p = plan(
            &(0..rng.random_range(1..=4))
                .map(|_| rng.random_range(0..7))
                .collect::<Vec<_>>(),
        );
        let cfg = DecodeConfig {
            alpha,
            top_s: s,
            ..Default::default()
        };
        let mut st = DecodeState::from_prompt(&prompt(), lm.vocab(), p.len()).unwrap();
        for _ in 0..6 {
            if st.finished {
                break;
            }
            let got = plan_aware_step(&lm, &clf, &st, &p, &cfg).unwrap().token;
            assert_eq!(
                got,
                oracle_choice(&lm, &clf, &st, p[st.j].index(), alpha, s),
                "case {case}"
            );
            st = advance_state(&st, got);
        }
    }
}

#[test]
fn zero_alpha_reduces_to_greedy() {
    for seed in 0..20 {
        let v = Vocabulary::from_tokens(words(15).iter().map(String::as_str), 1);
        let lm = HashLm { vocab: v, seed };
        let clf = HashClf { seed };
        let p = plan(&[1, 3, 5]);
        let cfg = DecodeConfig {
            alpha: 0.0,
            max_tokens: 40,
            max_instructions: p.len(),
            ..Default::default()
        };
        let guided = generate(&lm, &clf, &p, &prompt(), &cfg).unwrap();
        let greedy = generate_baseline(&lm, &prompt(), &cfg, Strategy::Greedy).unwrap();
        assert_eq!(guided, greedy);
    }
}

#[test]
fn full_alpha_follows_classifier_within_top_s() {
    for seed in 0..20 {
        let v = Vocabulary::from_tokens(words(15).iter().map(String::as_str), 1);
        let lm = HashLm { vocab: v, seed };
        let clf = HashClf { seed: seed + 100 };
        let p = plan(&[2, 4]);
        let cfg = DecodeConfig {
            alpha: 1.0,
            top_s: 4,
            ..Default::default()
        };
        let mut st = DecodeState::from_prompt(&prompt(), lm.vocab(), p.len()).unwrap();
        for _ in 0..12 {
            if st.finished {
                break;
            }
            let cands = score_candidates(&lm, &clf, &st, &p, &cfg).unwrap();
            let best_pf = cands.iter().map(|c| c.stage_prob).fold(0.0, f64::max);
            let chosen = plan_aware_step(&lm, &clf, &st, &p, &cfg).unwrap();
            assert_eq!(chosen.stage_prob, best_pf);
            st = advance_state(&st, chosen.token);
        }
    }
}

#[test]
fn single_stage_plan_gives_one_instruction() {
    let v = Vocabulary::from_tokens(words(6).iter().map(String::as_str), 1);
    let mut dist = vec![0.01; v.len()];
    dist[INSTR_NEXT as usize] = 0.5;
    let z: f64 = dist.iter().sum();
    let lm = FixedLm {
        vocab: v,
        dist: dist.into_iter().map(|x| x / z).collect(),
    };
    let r = generate(
        &lm,
        &HashClf { seed: 1 },
        &plan(&[3]),
        &prompt(),
        &DecodeConfig::default(),
    )
    .unwrap();
    assert_eq!(r.instructions.len(), 1);
    assert_eq!(r.tokens.last().unwrap(), "<INSTR_END>");
}

#[test]
fn instruction_count_bounded_by_plan() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for seed in 0..30 {
        let v = Vocabulary::from_tokens(words(8).iter().map(String::as_str), 1);
        let lm = HashLm { vocab: v, seed };
        let p = plan(
            &(0..rng.random_range(1..=6))
                .map(|_| rng.random_range(0..7))
                .collect::<Vec<_>>(),
        );
        let cfg = DecodeConfig {
            alpha: 0.5,
            max_tokens: 80,
            ..Default::default()
        };
        let r = generate(&lm, &HashClf { seed }, &p, &prompt(), &cfg).unwrap();
        assert!(r.instructions.len() <= p.len());
        let mut full = prompt();
        full.extend(r.tokens.iter().cloned());
        crate::corpus::parse_serialized(&full).unwrap();
    }
}

#[test]
fn baselines_are_deterministic() {
    let v = Vocabulary::from_tokens(words(12).iter().map(String::as_str), 1);
    let lm = HashLm { vocab: v, seed: 4 };
    let cfg = DecodeConfig {
        max_tokens: 30,
        seed: 9,
        ..Default::default()
    };
    for strat in [
        Strategy::Greedy,
        Strategy::TopK { k: 5 },
        Strategy::Beam { width: 5 },
    ] {
        let a = generate_baseline(&lm, &prompt(), &cfg, strat).unwrap();
        let b = generate_baseline(&lm, &prompt(), &cfg, strat).unwrap();
        assert_eq!(a, b);
    }
    let other = DecodeConfig { seed: 10, ..cfg };
    let runs: Vec<_> = (0..5)
        .map(|s| {
            generate_baseline(
                &lm,
                &prompt(),
                &DecodeConfig { seed: s, ..other },
                Strategy::TopK { k: 5 },
            )
            .unwrap()
        })
        .collect();
    assert!(runs.iter().any(|r| r != &runs[0]));
}

#[test]
fn beam_of_one_is_greedy() {
    for seed in 0..20 {
        let v = Vocabulary::from_tokens(words(10).iter().map(String::as_str), 1);
        let lm = HashLm { vocab: v, seed };
        let cfg = DecodeConfig {
            max_tokens: 25,
            max_instructions: 3,
            ..Default::default()
        };
        let g = generate_baseline(&lm, &prompt(), &cfg, Strategy::Greedy).unwrap();
        let b = generate_baseline(&lm, &prompt(), &cfg, Strategy::Beam { width: 1 }).unwrap();
        assert_eq!(g, b);
    }
}

#[test]
fn wider_beam_scores_at_least_greedy_when_lengths_agree() {
    let v = Vocabulary::from_tokens(words(10).iter().map(String::as_str), 1);
    let lm = HashLm { vocab: v, seed: 2 };
    let cfg = DecodeConfig {
        max_tokens: 8,
        max_instructions: 15,
        ..Default::default()
    };
    let g = generate_baseline(&lm, &prompt(), &cfg, Strategy::Greedy).unwrap();
    let b = generate_baseline(&lm, &prompt(), &cfg, Strategy::Beam { width: 5 }).unwrap();
    let mean = |r: &GenerationResult| r.scores.iter().sum::<f64>() / r.scores.len() as f64;
    assert!(mean(&b) >= mean(&g) - 1e-12);
}

#[test]
fn constraint_on_likely_path_is_satisfied() {
    let v = Vocabulary::from_tokens(words(10).iter().map(String::as_str), 1);
    let lm = HashLm { vocab: v, seed: 5 };
    let cfg = DecodeConfig {
        max_tokens: 30,
        max_instructions: 2,
        ..Default::default()
    };
    let cons = vec![
        vec!["w07".to_string(), "w03".to_string()],
        vec!["w05".to_string()],
    ];
    let r = generate_lexically_constrained(&lm, &prompt(), &cons, 5, &cfg).unwrap();
    assert_eq!(r.satisfied_constraints, Some(2));
    assert_eq!(count_satisfied(&r.tokens, &cons), 2);
}

#[test]
fn zero_budget_satisfies_nothing() {
    let v = Vocabulary::from_tokens(words(10).iter().map(String::as_str), 1);
    let lm = HashLm { vocab: v, seed: 5 };
    let cfg = DecodeConfig {
        max_tokens: 0,
        ..Default::default()
    };
    let cons = vec![vec!["w01".to_string()]];
    let r = generate_lexically_constrained(&lm, &prompt(), &cons, 3, &cfg).unwrap();
    assert_eq!(r.satisfied_constraints, Some(0));
    assert!(r.instructions.is_empty());
    assert!(generate_lexically_constrained(&lm, &prompt(), &[], 3, &cfg).is_err());
}

#[test]
fn invalid_configs_rejected() {
    let v = Vocabulary::from_tokens(words(4).iter().map(String::as_str), 1);
    let lm = HashLm { vocab: v, seed: 0 };
    let bad = DecodeConfig {
        alpha: 1.5,
        ..Default::default()
    };
    assert!(generate(&lm, &HashClf { seed: 0 }, &plan(&[0]), &prompt(), &bad).is_err());
    let bad = DecodeConfig {
        top_s: 0,
        ..Default::default()
    };
    assert!(generate_baseline(&lm, &prompt(), &bad, Strategy::Greedy).is_err());
    assert!(generate_baseline(
        &lm,
        &prompt(),
        &DecodeConfig::default(),
        Strategy::Beam { width: 0 }
    )
    .is_err());
}

#[test]
fn special_ids_never_emitted_mid_section() {
    let v = Vocabulary::from_tokens(words(5).iter().map(String::as_str), 1);
    let mut dist = vec![0.001; v.len()];
    dist[0] = 0.5;
    dist[1] = 0.3;
    dist[INSTR_END as usize] = 0.1;
    let z: f64 = dist.iter().sum();
    let lm = FixedLm {
        vocab: v,
        dist: dist.into_iter().map(|x| x / z).collect(),
    };
    let r = generate_baseline(&lm, &prompt(), &DecodeConfig::default(), Strategy::Greedy).unwrap();
    assert_eq!(r.tokens.len(), 2);
    assert_eq!(r.tokens[1], "<INSTR_END>");
    let _ = INSTR_END;
}
