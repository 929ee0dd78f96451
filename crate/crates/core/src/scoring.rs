//! Answer-option scoring: the sliding-window lexical score, the
//! question/option distance penalty, the embedding boost, and the combined
//! argmax decision.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::{average_embedding, cosine, EmbeddingStore};
use crate::error::{Error, Result};
use crate::preprocess::{ProcessedText, WordList};

pub const NUM_OPTIONS: usize = 4;

/// Letter shown for an option index (`0 → 'A'`).
pub fn option_letter(index: usize) -> char {
    debug_assert!(index < NUM_OPTIONS);
    (b'A' + index as u8) as char
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Random,
    Sw,
    SwD,
    SwDWeb,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Random, Method::Sw, Method::SwD, Method::SwDWeb];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Random => "random",
            Method::Sw => "sw",
            Method::SwD => "sw_d",
            Method::SwDWeb => "sw_d_web",
        }
    }

    pub fn needs_embeddings(self) -> bool {
        self == Method::SwDWeb
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown method `{s}` (expected random, sw, sw_d or sw_d_web)")))
    }
}

/// How pairwise question/option distances are reduced to one number.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceAggregation {
    /// Closest question/option occurrence pair.
    #[default]
    Min,
    /// Farthest word pair, each pair measured at its closest occurrences.
    Max,
}

impl DistanceAggregation {
    pub fn as_str(self) -> &'static str {
        match self {
            DistanceAggregation::Min => "min",
            DistanceAggregation::Max => "max",
        }
    }
}

impl fmt::Display for DistanceAggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DistanceAggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(DistanceAggregation::Min),
            "max" => Ok(DistanceAggregation::Max),
            _ => Err(Error::Config(format!(
                "unknown distance aggregation `{s}` (expected min or max)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodConfig {
    pub method: Method,
    pub distance_aggregation: DistanceAggregation,
    pub random_seed: Option<u64>,
}

impl MethodConfig {
    pub fn new(method: Method) -> Self {
        MethodConfig {
            method,
            distance_aggregation: DistanceAggregation::Min,
            random_seed: None,
        }
    }

    pub fn random(seed: u64) -> Self {
        MethodConfig {
            random_seed: Some(seed),
            ..Self::new(Method::Random)
        }
    }

    pub fn with_aggregation(mut self, agg: DistanceAggregation) -> Self {
        self.distance_aggregation = agg;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.method == Method::Random && self.random_seed.is_none() {
            return Err(Error::Config("method random requires a seed".into()));
        }
        Ok(())
    }
}

/// Occurrence counts of every word in a passage.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TermCounts(HashMap<String, usize>);

impl TermCounts {
    pub fn get(&self, word: &str) -> usize {
        self.0.get(word).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> usize {
        self.0.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.0.iter().map(|(w, &c)| (w.as_str(), c))
    }
}

pub fn term_counts(text: &ProcessedText) -> TermCounts {
    let mut counts = HashMap::new();
    for word in text.flat() {
        *counts.entry(word.clone()).or_insert(0) += 1;
    }
    TermCounts(counts)
}

/// Best sum of inverse-count weights `ln(1 + 1/C(w))` over windows of
/// `|Q ∪ O|` consecutive tokens, counting only tokens in `Q ∪ O`.
///
/// Windows start at every text position; positions past the end of the
/// text contribute nothing.
pub fn sliding_window_score(text: &ProcessedText, question: &[String], option: &[String], counts: &TermCounts) -> f64 {
    let bag: HashSet<&str> = question.iter().chain(option).map(String::as_str).collect();
    let tokens = text.flat();
    if bag.is_empty() || tokens.is_empty() {
        return 0.0;
    }
    let weights: Vec<f64> = tokens
        .iter()
        .map(|t| {
            if bag.contains(t.as_str()) {
                (1.0 / counts.get(t) as f64).ln_1p()
            } else {
                0.0
            }
        })
        .collect();
    let width = bag.len();
    (0..weights.len())
        .map(|start| weights[start..(start + width).min(weights.len())].iter().sum::<f64>())
        .fold(0.0, f64::max)
}

/// Normalised token distance between question words and option words
/// that occur in the text, in `(0, 1]`.
///
/// Returns 1 when either side has no word in the text, when the text has
/// fewer than two tokens, or when no pair of distinct positions exists.
/// A single token is never paired with itself.
pub fn distance_score(text: &ProcessedText, question: &[String], option: &[String], agg: DistanceAggregation) -> f64 {
    let tokens = text.flat();
    if tokens.len() <= 1 {
        return 1.0;
    }
    let text_words: HashSet<&str> = tokens.iter().map(String::as_str).collect();
    let question_words = words_in(question, &text_words);
    let option_words = words_in(option, &text_words);
    if question_words.is_empty() || option_words.is_empty() {
        return 1.0;
    }
    let best = match agg {
        DistanceAggregation::Min => closest_pair(tokens, &question_words, &option_words),
        DistanceAggregation::Max => farthest_word_pair(tokens, &question_words, &option_words),
    };
    match best {
        Some(d) => d as f64 / (tokens.len() - 1) as f64,
        None => 1.0,
    }
}

fn words_in<'a>(words: &'a [String], vocab: &HashSet<&str>) -> HashSet<&'a str> {
    words.iter().map(String::as_str).filter(|w| vocab.contains(w)).collect()
}

fn closest_pair(tokens: &[String], question: &HashSet<&str>, option: &HashSet<&str>) -> Option<usize> {
    let is_q: Vec<bool> = tokens.iter().map(|t| question.contains(t.as_str())).collect();
    let mut best: Option<usize> = None;
    let mut update = |d: usize| best = Some(best.map_or(d, |b| b.min(d)));

    let mut last_q: Option<usize> = None;
    for (pos, tok) in tokens.iter().enumerate() {
        if option.contains(tok.as_str()) {
            if let Some(q) = last_q {
                update(pos - q);
            }
        }
        if is_q[pos] {
            last_q = Some(pos);
        }
    }
    let mut next_q: Option<usize> = None;
    for (pos, tok) in tokens.iter().enumerate().rev() {
        if option.contains(tok.as_str()) {
            if let Some(q) = next_q {
                update(q - pos);
            }
        }
        if is_q[pos] {
            next_q = Some(pos);
        }
    }
    best
}

fn farthest_word_pair(tokens: &[String], question: &HashSet<&str>, option: &HashSet<&str>) -> Option<usize> {
    let mut positions: HashMap<&str, Vec<usize>> = HashMap::new();
    for (pos, tok) in tokens.iter().enumerate() {
        if question.contains(tok.as_str()) || option.contains(tok.as_str()) {
            positions.entry(tok.as_str()).or_default().push(pos);
        }
    }
    let mut worst: Option<usize> = None;
    for q in question {
        for a in option {
            let closest = positions[q]
                .iter()
                .flat_map(|&p| {
                    positions[a]
                        .iter()
                        .filter(move |&&r| r != p)
                        .map(move |&r| p.abs_diff(r))
                })
                .min();
            if let Some(d) = closest {
                worst = Some(worst.map_or(d, |w| w.max(d)));
            }
        }
    }
    worst
}

/// Highest cosine similarity between the option's mean embedding and the
/// mean embedding of any run of `|O|` consecutive text tokens.
///
/// Undefined similarities (zero-norm spans) count as 0. Texts shorter than
/// the option are compared as a whole.
pub fn boosted_score(text: &ProcessedText, option: &[String], store: &EmbeddingStore) -> f64 {
    let rows = store.resolve(text.flat());
    boosted_score_resolved(&rows, option, store)
}

pub(crate) fn boosted_score_resolved(text_rows: &[Option<&[f32]>], option: &[String], store: &EmbeddingStore) -> f64 {
    let k = option.len();
    if k == 0 || text_rows.is_empty() {
        return 0.0;
    }
    let target = average_embedding(store, option);
    if target.support == 0 {
        return 0.0;
    }
    let width = k.min(text_rows.len());
    let mut window = vec![0.0f64; store.dim()];
    let mut best = f64::NEG_INFINITY;
    for span in text_rows.windows(width) {
        window.iter_mut().for_each(|x| *x = 0.0);
        let mut support = 0usize;
        for row in span.iter().flatten() {
            for (acc, &x) in window.iter_mut().zip(row.iter()) {
                *acc += f64::from(x);
            }
            support += 1;
        }
        let sim = if support == 0 {
            0.0
        } else {
            let n = support as f64;
            window.iter_mut().for_each(|x| *x /= n);
            cosine(&target.vector, &window).unwrap_or(0.0)
        };
        best = best.max(sim);
    }
    best
}

/// Per-option component scores and the resulting decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreBreakdown {
    pub method: Method,
    pub sw: [f64; NUM_OPTIONS],
    pub dist: [f64; NUM_OPTIONS],
    pub web: [f64; NUM_OPTIONS],
    #[serde(rename = "final")]
    pub final_score: [f64; NUM_OPTIONS],
    pub predicted: usize,
}

impl ScoreBreakdown {
    fn zeroed(method: Method) -> Self {
        ScoreBreakdown {
            method,
            sw: [0.0; NUM_OPTIONS],
            dist: [0.0; NUM_OPTIONS],
            web: [0.0; NUM_OPTIONS],
            final_score: [0.0; NUM_OPTIONS],
            predicted: 0,
        }
    }

    pub fn predicted_letter(&self) -> char {
        option_letter(self.predicted)
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Applies one method to one question.
///
/// Deterministic methods are pure; the random baseline draws from a
/// generator owned by the predictor, so its predictions depend on call order.
#[derive(Debug, Clone)]
pub struct Predictor<'s> {
    cfg: MethodConfig,
    store: Option<&'s EmbeddingStore>,
    rng: Option<ChaCha8Rng>,
}

impl<'s> Predictor<'s> {
    pub fn new(cfg: MethodConfig, store: Option<&'s EmbeddingStore>) -> Result<Self> {
        cfg.validate()?;
        if cfg.method.needs_embeddings() && store.is_none() {
            return Err(Error::MissingEmbeddings);
        }
        let rng = match cfg.method {
            Method::Random => cfg.random_seed.map(ChaCha8Rng::seed_from_u64),
            _ => None,
        };
        Ok(Predictor { cfg, store, rng })
    }

    pub fn config(&self) -> &MethodConfig {
        &self.cfg
    }

    pub fn is_stochastic(&self) -> bool {
        self.cfg.method == Method::Random
    }

    pub fn predict(
        &mut self,
        text: &ProcessedText,
        question: &[String],
        options: &[WordList; NUM_OPTIONS],
    ) -> ScoreBreakdown {
        match self.rng.as_mut() {
            Some(rng) => {
                let mut out = ScoreBreakdown::zeroed(Method::Random);
                out.predicted = rng.gen_range(0..NUM_OPTIONS);
                out
            }
            None => self.score(text, question, options).expect("deterministic method"),
        }
    }

    /// Scores with a deterministic method; `None` for the random baseline.
    pub fn score(
        &self,
        text: &ProcessedText,
        question: &[String],
        options: &[WordList; NUM_OPTIONS],
    ) -> Option<ScoreBreakdown> {
        let method = self.cfg.method;
        if method == Method::Random {
            return None;
        }
        let mut out = ScoreBreakdown::zeroed(method);
        let counts = term_counts(text);
        let text_rows = match (method, self.store) {
            (Method::SwDWeb, Some(store)) => Some((store, store.resolve(text.flat()))),
            _ => None,
        };
        for (i, option) in options.iter().enumerate() {
            out.sw[i] = sliding_window_score(text, question, option, &counts);
            if matches!(method, Method::SwD | Method::SwDWeb) {
                out.dist[i] = distance_score(text, question, option, self.cfg.distance_aggregation);
            }
            if let Some((store, rows)) = &text_rows {
                out.web[i] = boosted_score_resolved(rows, option, store);
            }
            out.final_score[i] = match method {
                Method::Sw => out.sw[i],
                Method::SwD => out.sw[i] - out.dist[i],
                _ => out.sw[i] - out.dist[i] + out.web[i],
            };
        }
        out.predicted = argmax(&out.final_score);
        Some(out)
    }
}

/// One-shot prediction for a deterministic method, or a single draw from a
/// freshly seeded generator for the random baseline.
pub fn predict(
    text: &ProcessedText,
    question: &[String],
    options: &[WordList; NUM_OPTIONS],
    cfg: &MethodConfig,
    store: Option<&EmbeddingStore>,
) -> Result<ScoreBreakdown> {
    let mut predictor = Predictor::new(*cfg, store)?;
    Ok(predictor.predict(text, question, options))
}
