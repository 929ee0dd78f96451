//! Sentence and passage normalisation: tokenisation, punctuation and
//! stopword removal, lowercasing and dictionary word segmentation.
//!
//! Multi-syllable words are represented as syllables joined by `_`
//! (`học_sinh`), the same convention used by common Vietnamese segmenters,
//! so corpora that were segmented upstream pass through untouched.

use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::ops::Deref;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Joins the syllables of one segmented word.
pub const SEGMENT_JOINER: char = '_';

/// Longest syllable run the dictionary segmenter will try to join.
pub const MAX_WORD_SYLLABLES: usize = 4;

const SENTENCE_BREAKS: &[char] = &['.', '!', '?', '…', '\n'];

const EXTRA_PUNCTUATION: &[char] = &[
    '…', '“', '”', '‘', '’', '«', '»', '‹', '›', '–', '—', '−', '•', '·', '¡', '¿', '„', '‚', '、', '。', '，', '：',
    '；', '！', '？', '（', '）', '【', '】', '《', '》',
];

/// Ordered sequence of normalised words. Never contains empty strings.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WordList(Vec<String>);

impl WordList {
    pub fn new(words: Vec<String>) -> Self {
        debug_assert!(words.iter().all(|w| !w.is_empty()));
        WordList(words)
    }

    pub fn into_inner(self) -> Vec<String> {
        self.0
    }

    /// Space-joined form, suitable for feeding back into [`preprocess_sentence`].
    pub fn joined(&self) -> String {
        self.0.join(" ")
    }
}

impl Deref for WordList {
    type Target = [String];

    fn deref(&self) -> &[String] {
        &self.0
    }
}

impl<S: Into<String>> FromIterator<S> for WordList {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        WordList(iter.into_iter().map(Into::into).collect())
    }
}

/// A preprocessed passage: per-sentence word lists plus their concatenation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProcessedText {
    sentences: Vec<WordList>,
    flat: Vec<String>,
}

impl ProcessedText {
    pub fn from_sentences(sentences: Vec<WordList>) -> Self {
        let sentences: Vec<WordList> = sentences.into_iter().filter(|s| !s.is_empty()).collect();
        let flat = sentences.iter().flat_map(|s| s.iter().cloned()).collect();
        ProcessedText { sentences, flat }
    }

    /// Builds a single-sentence text from already normalised tokens.
    pub fn from_tokens<S: Into<String>>(tokens: impl IntoIterator<Item = S>) -> Self {
        Self::from_sentences(vec![tokens.into_iter().collect()])
    }

    pub fn sentences(&self) -> &[WordList] {
        &self.sentences
    }

    pub fn flat(&self) -> &[String] {
        &self.flat
    }

    pub fn len(&self) -> usize {
        self.flat.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flat.is_empty()
    }
}

/// Syllable sequences treated as single words by the dictionary segmenter.
///
/// Entries are stored lowercase with syllables joined by [`SEGMENT_JOINER`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    words: HashSet<String>,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Accepts entries written with either `_` or spaces between syllables.
    pub fn from_entries<S: AsRef<str>>(entries: impl IntoIterator<Item = S>) -> Self {
        let words = entries
            .into_iter()
            .filter_map(|e| normalize_entry(e.as_ref()))
            .collect();
        Lexicon { words }
    }

    /// Keeps only the multi-syllable entries of a vocabulary, e.g. the word
    /// list of an embedding table.
    pub fn from_vocabulary<S: AsRef<str>>(vocab: impl IntoIterator<Item = S>) -> Self {
        let words = vocab
            .into_iter()
            .filter_map(|e| normalize_entry(e.as_ref()))
            .filter(|w| w.contains(SEGMENT_JOINER))
            .collect();
        Lexicon { words }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(Self::from_entries(read_word_list(path)?))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

fn normalize_entry(entry: &str) -> Option<String> {
    let syllables: Vec<&str> = entry
        .split(|c: char| c.is_whitespace() || c == SEGMENT_JOINER)
        .filter(|s| !s.is_empty())
        .collect();
    if syllables.is_empty() {
        return None;
    }
    Some(syllables.join("_").to_lowercase())
}

/// Reads a UTF-8 word list: one entry per line, `#` starts a comment.
pub fn read_word_list(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_word_list(&raw))
}

pub fn parse_word_list(raw: &str) -> Vec<String> {
    raw.lines()
        .map(|line| line.split('#').next().unwrap_or("").trim())
        .filter(|line| !line.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Greedy left-to-right longest match against `lexicon`.
///
/// At each position the longest run of up to [`MAX_WORD_SYLLABLES`]
/// syllables whose `_`-joined form is in the lexicon becomes one word.
/// Tokens that already contain `_` are treated as finished words and are
/// never merged with their neighbours.
pub fn segment_words<S: AsRef<str>>(tokens: &[S], lexicon: &Lexicon) -> WordList {
    let mut out = Vec::with_capacity(tokens.len());
    let mut i = 0;
    while i < tokens.len() {
        let head = tokens[i].as_ref();
        if lexicon.is_empty() || head.contains(SEGMENT_JOINER) {
            out.push(head.to_owned());
            i += 1;
            continue;
        }
        let run = tokens[i..]
            .iter()
            .take(MAX_WORD_SYLLABLES)
            .take_while(|t| !t.as_ref().contains(SEGMENT_JOINER))
            .count();
        let mut matched = 1;
        let mut word = head.to_owned();
        for len in (2..=run).rev() {
            let candidate = tokens[i..i + len]
                .iter()
                .map(AsRef::as_ref)
                .collect::<Vec<_>>()
                .join("_");
            if lexicon.contains(&candidate) {
                matched = len;
                word = candidate;
                break;
            }
        }
        out.push(word);
        i += matched;
    }
    WordList(out)
}

/// Word segmentation strategy applied as the last preprocessing step.
#[derive(Debug, Clone, Default)]
pub enum Segmenter {
    /// Every syllable is its own word (pre-segmented tokens are kept).
    #[default]
    Whitespace,
    LongestMatch(Lexicon),
}

impl Segmenter {
    pub fn segment<S: AsRef<str>>(&self, tokens: &[S]) -> WordList {
        match self {
            Segmenter::Whitespace => tokens.iter().map(|t| t.as_ref().to_owned()).collect(),
            Segmenter::LongestMatch(lexicon) => segment_words(tokens, lexicon),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Segmenter::Whitespace => "whitespace",
            Segmenter::LongestMatch(_) => "longest-match",
        }
    }
}

/// The ASCII punctuation block (minus the segment joiner) plus common
/// typographic quotes, dashes and ellipses.
pub fn default_punctuation() -> BTreeSet<char> {
    (0u8..128)
        .map(char::from)
        .filter(|c| c.is_ascii_punctuation() && *c != SEGMENT_JOINER)
        .chain(EXTRA_PUNCTUATION.iter().copied())
        .collect()
}

#[derive(Debug, Clone)]
pub struct PreprocessConfig {
    stopwords: HashSet<String>,
    punctuation: BTreeSet<char>,
    segmenter: Segmenter,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self::new(Segmenter::Whitespace)
    }
}

impl PreprocessConfig {
    pub fn new(segmenter: Segmenter) -> Self {
        PreprocessConfig {
            stopwords: HashSet::new(),
            punctuation: default_punctuation(),
            segmenter,
        }
    }

    /// Stopwords match case-insensitively; multi-syllable entries may use
    /// spaces or `_` between syllables.
    pub fn with_stopwords<S: AsRef<str>>(mut self, words: impl IntoIterator<Item = S>) -> Self {
        self.stopwords = words.into_iter().filter_map(|w| normalize_entry(w.as_ref())).collect();
        self
    }

    pub fn with_punctuation(mut self, set: BTreeSet<char>) -> Result<Self> {
        if set.is_empty() {
            return Err(Error::Config("punctuation set must not be empty".into()));
        }
        if set.contains(&SEGMENT_JOINER) {
            return Err(Error::Config(format!(
                "punctuation set must not contain the segment joiner `{SEGMENT_JOINER}`"
            )));
        }
        if set.iter().any(|c| c.is_whitespace()) {
            return Err(Error::Config("punctuation set must not contain whitespace".into()));
        }
        self.punctuation = set;
        Ok(self)
    }

    pub fn stopwords(&self) -> &HashSet<String> {
        &self.stopwords
    }

    pub fn punctuation(&self) -> &BTreeSet<char> {
        &self.punctuation
    }

    pub fn segmenter(&self) -> &Segmenter {
        &self.segmenter
    }

    fn is_punct(&self, c: char) -> bool {
        self.punctuation.contains(&c)
    }

    fn is_stopword(&self, token: &str) -> bool {
        !self.stopwords.is_empty() && self.stopwords.contains(&token.to_lowercase())
    }
}

/// Splits on whitespace; each run of punctuation characters becomes its own token.
fn tokenize(s: &str, cfg: &PreprocessConfig) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut current_is_punct = false;
    for c in s.chars() {
        if c.is_whitespace() {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
            continue;
        }
        let punct = cfg.is_punct(c);
        if !current.is_empty() && punct != current_is_punct {
            tokens.push(std::mem::take(&mut current));
        }
        current_is_punct = punct;
        current.push(c);
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Normalises one raw sentence into a list of words.
///
/// Steps, in order: tokenise, drop punctuation tokens, drop stopwords,
/// lowercase, segment. Stopwords are checked once more after segmentation
/// so that multi-syllable entries formed by the segmenter are removed too.
pub fn preprocess_sentence(s: &str, cfg: &PreprocessConfig) -> WordList {
    let tokens: Vec<String> = tokenize(s, cfg)
        .into_iter()
        .filter(|t| !t.chars().all(|c| cfg.is_punct(c)))
        .filter_map(|t| normalize_joiners(&t))
        .filter(|t| !cfg.is_stopword(t))
        .map(|t| t.to_lowercase())
        .collect();
    let words = cfg.segmenter.segment(&tokens);
    if cfg.stopwords.is_empty() {
        return words;
    }
    words
        .into_inner()
        .into_iter()
        .filter(|w| !cfg.stopwords.contains(w))
        .collect()
}

/// Collapses repeated `_` and trims it from token edges; a token made only
/// of joiners disappears.
fn normalize_joiners(token: &str) -> Option<String> {
    if !token.contains(SEGMENT_JOINER) {
        return Some(token.to_owned());
    }
    let parts: Vec<&str> = token.split(SEGMENT_JOINER).filter(|p| !p.is_empty()).collect();
    (!parts.is_empty()).then(|| parts.join("_"))
}

pub fn split_sentences(t: &str) -> impl Iterator<Item = &str> {
    t.split(SENTENCE_BREAKS).filter(|s| !s.trim().is_empty())
}

/// Splits a passage into sentences and preprocesses each; sentences that
/// end up empty are dropped.
pub fn preprocess_text(t: &str, cfg: &PreprocessConfig) -> ProcessedText {
    let sentences = split_sentences(t).map(|s| preprocess_sentence(s, cfg)).collect();
    ProcessedText::from_sentences(sentences)
}
