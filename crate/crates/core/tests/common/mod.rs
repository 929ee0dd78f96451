//! Brute-force reference scorers and random instance generators shared by
//! the integration tests. Nothing here calls into the scoring module.

#![allow(dead_code)]

use std::path::PathBuf;

use lexmrc::EmbeddingStore;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn distinct(words: &[String]) -> Vec<String> {
    let mut out = words.to_vec();
    out.sort();
    out.dedup();
    out
}

fn count(text: &[String], word: &str) -> usize {
    text.iter().filter(|t| *t == word).count()
}

/// Every window of `|Q ∪ O|` positions starting at every text position,
/// summing `log_base(1 + 1/C(w))` over in-bag tokens.
pub fn sw_in_base(text: &[String], question: &[String], option: &[String], base: f64) -> f64 {
    let mut both = question.to_vec();
    both.extend_from_slice(option);
    let bag = distinct(&both);
    let mut best = 0.0f64;
    for start in 0..text.len() {
        let mut sum = 0.0;
        for offset in 0..bag.len() {
            let pos = start + offset;
            if pos < text.len() && bag.contains(&text[pos]) {
                sum += (1.0 + 1.0 / count(text, &text[pos]) as f64).ln() / base.ln();
            }
        }
        if sum > best {
            best = sum;
        }
    }
    best
}

pub fn sw(text: &[String], question: &[String], option: &[String]) -> f64 {
    sw_in_base(text, question, option, std::f64::consts::E)
}

/// Enumerates every (question occurrence, option occurrence) pair at
/// distinct positions.
pub fn distance(text: &[String], question: &[String], option: &[String], take_max: bool) -> f64 {
    if text.len() <= 1 {
        return 1.0;
    }
    let q_words: Vec<String> = distinct(question).into_iter().filter(|w| text.contains(w)).collect();
    let o_words: Vec<String> = distinct(option).into_iter().filter(|w| text.contains(w)).collect();
    if q_words.is_empty() || o_words.is_empty() {
        return 1.0;
    }
    let pair_min = |q: &str, a: &str| -> Option<usize> {
        let mut best: Option<usize> = None;
        for p in 0..text.len() {
            for r in 0..text.len() {
                if p != r && text[p] == q && text[r] == a {
                    let d = p.abs_diff(r);
                    best = Some(best.map_or(d, |b| b.min(d)));
                }
            }
        }
        best
    };
    let mut agg: Option<usize> = None;
    for q in &q_words {
        for a in &o_words {
            if let Some(d) = pair_min(q, a) {
                agg = Some(match agg {
                    None => d,
                    Some(x) if take_max => x.max(d),
                    Some(x) => x.min(d),
                });
            }
        }
    }
    match agg {
        Some(d) => d as f64 / (text.len() - 1) as f64,
        None => 1.0,
    }
}

fn mean(store: &EmbeddingStore, words: &[String]) -> Option<Vec<f64>> {
    let rows: Vec<Vec<f64>> = words
        .iter()
        .filter_map(|w| store.get(w))
        .map(|r| r.iter().map(|&x| f64::from(x)).collect())
        .collect();
    if rows.is_empty() {
        return None;
    }
    let mut m = vec![0.0; store.dim()];
    for row in &rows {
        for (acc, x) in m.iter_mut().zip(row) {
            *acc += x;
        }
    }
    Some(m.into_iter().map(|x| x / rows.len() as f64).collect())
}

fn cos(u: &[f64], v: &[f64]) -> Option<f64> {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        None
    } else {
        Some(dot / (nu * nv))
    }
}

/// Best cosine between the option mean and the mean of every span of
/// `|O|` tokens (the whole text when it is shorter).
pub fn web(text: &[String], option: &[String], store: &EmbeddingStore) -> f64 {
    if option.is_empty() || text.is_empty() {
        return 0.0;
    }
    let Some(target) = mean(store, option) else {
        return 0.0;
    };
    let k = option.len().min(text.len());
    let mut best = f64::NEG_INFINITY;
    for start in 0..=text.len() - k {
        let span = &text[start..start + k];
        let sim = mean(store, span).and_then(|m| cos(&target, &m)).unwrap_or(0.0);
        best = best.max(sim);
    }
    best
}

/// One scoring instance over a small closed vocabulary.
#[derive(Debug, Clone)]
pub struct Instance {
    pub text: Vec<String>,
    pub question: Vec<String>,
    pub option: Vec<String>,
}

pub fn vocab(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("w{i}")).collect()
}

/// |T| ≤ 30 over at most 10 words, |Q| ≤ 3 and |O| ≤ 3 so that |S| ≤ 6.
pub fn instance<R: Rng>(rng: &mut R) -> Instance {
    let words = vocab(rng.gen_range(1..=10));
    let pick = |rng: &mut R, n: usize| -> Vec<String> { (0..n).map(|_| words.choose(rng).unwrap().clone()).collect() };
    let text_len = rng.gen_range(0..=30);
    let q_len = rng.gen_range(0..=3);
    let o_len = rng.gen_range(0..=3);
    Instance {
        text: pick(rng, text_len),
        question: pick(rng, q_len),
        option: pick(rng, o_len),
    }
}

/// Two-dimensional store over `w0..w9` with small integer coordinates;
/// some words are left out (OOV) and some vectors are zero.
pub fn toy_store<R: Rng>(rng: &mut R) -> EmbeddingStore {
    let mut rows: Vec<(String, [f32; 2])> = Vec::new();
    for w in vocab(10) {
        if rng.gen_bool(0.8) {
            rows.push((w, [rng.gen_range(-3..=3) as f32, rng.gen_range(-3..=3) as f32]));
        }
    }
    let rows = if rows.is_empty() {
        vec![("w0".to_owned(), [1.0, 0.0])]
    } else {
        rows
    };
    EmbeddingStore::from_entries(2, rows).unwrap()
}
