//! Multiple-choice reading-comprehension datasets: data model, JSON I/O,
//! validation, filtering and descriptive statistics.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result, ValidationErrors};
use crate::preprocess::{preprocess_sentence, preprocess_text, PreprocessConfig, Segmenter};
use crate::scoring::{option_letter, NUM_OPTIONS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Dev, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "dev" | "validation" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            _ => Err(Error::Config(format!(
                "unknown split `{s}` (expected train, dev or test)"
            ))),
        }
    }
}

/// Question difficulty taxonomy, easiest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ReasoningType {
    /// Word matching.
    #[serde(rename = "WM")]
    WordMatching,
    /// Paraphrasing.
    #[serde(rename = "PP")]
    Paraphrasing,
    /// Single-sentence reasoning.
    #[serde(rename = "SSR")]
    SingleSentence,
    /// Multi-sentence reasoning.
    #[serde(rename = "MSR")]
    MultiSentence,
    /// Ambiguous or insufficient.
    #[serde(rename = "AoI")]
    AmbiguousOrInsufficient,
}

impl ReasoningType {
    pub const ALL: [ReasoningType; 5] = [
        ReasoningType::WordMatching,
        ReasoningType::Paraphrasing,
        ReasoningType::SingleSentence,
        ReasoningType::MultiSentence,
        ReasoningType::AmbiguousOrInsufficient,
    ];

    pub fn code(self) -> &'static str {
        match self {
            ReasoningType::WordMatching => "WM",
            ReasoningType::Paraphrasing => "PP",
            ReasoningType::SingleSentence => "SSR",
            ReasoningType::MultiSentence => "MSR",
            ReasoningType::AmbiguousOrInsufficient => "AoI",
        }
    }
}

impl fmt::Display for ReasoningType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for ReasoningType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ReasoningType::ALL
            .into_iter()
            .find(|r| r.code().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown reasoning type `{s}` (expected WM, PP, SSR, MSR or AoI)"
                ))
            })
    }
}

type Extra = BTreeMap<String, Value>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadingText {
    pub id: String,
    pub grade: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    pub body: String,
    /// Fields this crate does not interpret, kept for round-tripping.
    #[serde(flatten)]
    pub extra: Extra,
}

impl ReadingText {
    pub fn new(id: impl Into<String>, grade: u8, body: impl Into<String>) -> Self {
        ReadingText {
            id: id.into(),
            grade,
            title: None,
            body: body.into(),
            extra: Extra::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McQuestion {
    pub id: String,
    pub text_id: String,
    pub stem: String,
    pub options: [String; NUM_OPTIONS],
    /// Index of the correct option, 0 for `A` through 3 for `D`.
    pub gold: usize,
    pub reasoning_type: Option<ReasoningType>,
    pub split: Split,
    pub extra: Extra,
}

impl McQuestion {
    pub fn new(
        id: impl Into<String>,
        text_id: impl Into<String>,
        stem: impl Into<String>,
        options: [&str; NUM_OPTIONS],
        gold: usize,
        split: Split,
    ) -> Self {
        McQuestion {
            id: id.into(),
            text_id: text_id.into(),
            stem: stem.into(),
            options: options.map(str::to_owned),
            gold,
            reasoning_type: None,
            split,
            extra: Extra::new(),
        }
    }

    pub fn with_reasoning(mut self, r: ReasoningType) -> Self {
        self.reasoning_type = Some(r);
        self
    }
}

// On-disk question shape. Gold may be a letter or an index, split may be
// supplied externally, so both are loosely typed until validation.
#[derive(Debug, Serialize, Deserialize)]
struct RawQuestion {
    id: String,
    text_id: String,
    stem: String,
    options: Vec<String>,
    gold: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reasoning_type: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    split: Option<String>,
    #[serde(flatten)]
    extra: Extra,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawText {
    id: String,
    grade: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    title: Option<String>,
    body: String,
    #[serde(flatten)]
    extra: Extra,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct RawDocument {
    #[serde(default)]
    texts: Vec<RawText>,
    #[serde(default)]
    questions: Vec<RawQuestion>,
}

/// A validated collection of reading texts and their questions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    texts: Vec<ReadingText>,
    questions: Vec<McQuestion>,
    text_index: HashMap<String, usize>,
}

impl Dataset {
    /// Validates and assembles a dataset, reporting every violated invariant.
    pub fn new(texts: Vec<ReadingText>, questions: Vec<McQuestion>) -> Result<Self> {
        let mut errors = ValidationErrors::default();
        let mut text_index = HashMap::new();
        for (i, t) in texts.iter().enumerate() {
            check_text(t, &mut errors);
            if text_index.insert(t.id.clone(), i).is_some() {
                errors.push(&t.id, "duplicate text id");
            }
        }
        let mut seen = HashSet::new();
        for q in &questions {
            check_question(q, &mut errors);
            if !q.text_id.is_empty() && !text_index.contains_key(&q.text_id) {
                errors.push(&q.id, format!("text_id `{}` does not resolve", q.text_id));
            }
            if !seen.insert(q.id.as_str()) {
                errors.push(&q.id, "duplicate question id");
            }
        }
        if !errors.is_empty() {
            return Err(Error::Validation(errors));
        }
        Ok(Dataset {
            texts,
            questions,
            text_index,
        })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn texts(&self) -> &[ReadingText] {
        &self.texts
    }

    pub fn questions(&self) -> &[McQuestion] {
        &self.questions
    }

    pub fn text(&self, id: &str) -> Option<&ReadingText> {
        self.text_index.get(id).map(|&i| &self.texts[i])
    }

    pub fn question(&self, id: &str) -> Option<&McQuestion> {
        self.questions.iter().find(|q| q.id == id)
    }

    /// The reading text a validated question refers to.
    pub fn text_of(&self, q: &McQuestion) -> &ReadingText {
        self.text(&q.text_id).expect("validated dataset resolves every text_id")
    }

    pub fn is_empty(&self) -> bool {
        self.questions.is_empty()
    }

    /// Keeps matching questions and exactly the texts they reference, in
    /// their original order.
    pub fn filter(&self, mut keep: impl FnMut(&McQuestion, &ReadingText) -> bool) -> Dataset {
        let questions: Vec<McQuestion> = self
            .questions
            .iter()
            .filter(|q| keep(q, self.text_of(q)))
            .cloned()
            .collect();
        let referenced: HashSet<&str> = questions.iter().map(|q| q.text_id.as_str()).collect();
        let texts: Vec<ReadingText> = self
            .texts
            .iter()
            .filter(|t| referenced.contains(t.id.as_str()))
            .cloned()
            .collect();
        let text_index = texts.iter().enumerate().map(|(i, t)| (t.id.clone(), i)).collect();
        Dataset {
            texts,
            questions,
            text_index,
        }
    }

    pub fn select(&self, f: &QuestionFilter) -> Dataset {
        self.filter(|q, t| f.matches(q, t))
    }

    pub fn to_json(&self) -> String {
        let doc = RawDocument {
            texts: self
                .texts
                .iter()
                .map(|t| RawText {
                    id: t.id.clone(),
                    grade: i64::from(t.grade),
                    title: t.title.clone(),
                    body: t.body.clone(),
                    extra: t.extra.clone(),
                })
                .collect(),
            questions: self
                .questions
                .iter()
                .map(|q| RawQuestion {
                    id: q.id.clone(),
                    text_id: q.text_id.clone(),
                    stem: q.stem.clone(),
                    options: q.options.to_vec(),
                    gold: Value::String(option_letter(q.gold).to_string()),
                    reasoning_type: q.reasoning_type.map(|r| r.code().to_owned()),
                    split: Some(q.split.as_str().to_owned()),
                    extra: q.extra.clone(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("dataset serialises")
    }
}

fn check_text(t: &ReadingText, errors: &mut ValidationErrors) {
    let id = if t.id.is_empty() { "<text>" } else { &t.id };
    if t.id.trim().is_empty() {
        errors.push(id, "text id is empty");
    }
    if !(1..=5).contains(&t.grade) {
        errors.push(id, format!("grade {} outside 1..=5", t.grade));
    }
    if t.body.trim().is_empty() {
        errors.push(id, "body is empty");
    }
}

fn check_question(q: &McQuestion, errors: &mut ValidationErrors) {
    let id = if q.id.is_empty() { "<question>" } else { &q.id };
    if q.id.trim().is_empty() {
        errors.push(id, "question id is empty");
    }
    if q.text_id.trim().is_empty() {
        errors.push(id, "text_id is empty");
    }
    if q.gold >= NUM_OPTIONS {
        errors.push(id, format!("gold index {} outside 0..=3", q.gold));
    }
    for (i, o) in q.options.iter().enumerate() {
        if o.trim().is_empty() {
            errors.push(id, format!("option {} is empty", option_letter(i)));
        }
    }
}

/// Conjunction of optional split, grade and reasoning-type constraints.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QuestionFilter {
    pub split: Option<Split>,
    pub grade: Option<u8>,
    pub reasoning_type: Option<ReasoningType>,
}

impl QuestionFilter {
    pub fn split(split: Split) -> Self {
        QuestionFilter {
            split: Some(split),
            ..Self::default()
        }
    }

    pub fn matches(&self, q: &McQuestion, t: &ReadingText) -> bool {
        self.split.is_none_or(|s| q.split == s)
            && self.grade.is_none_or(|g| t.grade == g)
            && self.reasoning_type.is_none_or(|r| q.reasoning_type == Some(r))
    }
}

/// Question id → split, for files that do not carry split labels.
pub type SplitAssignment = HashMap<String, Split>;

/// Loads a dataset from one JSON document, or from every `*.json` file in
/// a directory (one document per split, merged in file-name order).
///
/// When `split_assignment` names a question its split is taken from the
/// mapping, overriding the file.
pub fn load_dataset(path: impl AsRef<Path>, split_assignment: Option<&SplitAssignment>) -> Result<Dataset> {
    let path = path.as_ref();
    let files = if path.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
            .collect();
        files.sort();
        files
    } else {
        vec![path.to_path_buf()]
    };
    let mut docs = Vec::with_capacity(files.len());
    for file in &files {
        let raw = fs::read_to_string(file).map_err(|e| Error::io(file, e))?;
        let doc: RawDocument = serde_json::from_str(&raw).map_err(|e| Error::Parse {
            path: file.clone(),
            message: e.to_string(),
        })?;
        docs.push(doc);
    }
    from_documents(docs, split_assignment)
}

/// Parses a single JSON document held in memory.
pub fn parse_dataset(json: &str, split_assignment: Option<&SplitAssignment>) -> Result<Dataset> {
    let doc: RawDocument = serde_json::from_str(json).map_err(|e| Error::Parse {
        path: PathBuf::from("<memory>"),
        message: e.to_string(),
    })?;
    from_documents(vec![doc], split_assignment)
}

pub fn save_dataset(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, d.to_json()).map_err(|e| Error::io(path, e))
}

fn from_documents(docs: Vec<RawDocument>, split_assignment: Option<&SplitAssignment>) -> Result<Dataset> {
    let mut errors = ValidationErrors::default();
    let mut texts: Vec<ReadingText> = Vec::new();
    let mut text_pos: HashMap<String, usize> = HashMap::new();
    let mut questions = Vec::new();

    for doc in docs {
        for raw in doc.texts {
            let grade = match u8::try_from(raw.grade) {
                Ok(g) if (1..=5).contains(&g) => g,
                _ => {
                    errors.push(&raw.id, format!("grade {} outside 1..=5", raw.grade));
                    continue;
                }
            };
            let text = ReadingText {
                id: raw.id,
                grade,
                title: raw.title,
                body: raw.body,
                extra: raw.extra,
            };
            // The same passage may legitimately appear in several split files.
            if let Some(&pos) = text_pos.get(&text.id) {
                if texts[pos] != text {
                    errors.push(&text.id, "text id defined twice with different content");
                }
                continue;
            }
            text_pos.insert(text.id.clone(), texts.len());
            texts.push(text);
        }
        for raw in doc.questions {
            if let Some(q) = convert_question(raw, split_assignment, &mut errors) {
                questions.push(q);
            }
        }
    }

    match Dataset::new(texts, questions) {
        Ok(d) if errors.is_empty() => Ok(d),
        Ok(_) => Err(Error::Validation(errors)),
        Err(Error::Validation(more)) => {
            errors.0.extend(more.0);
            Err(Error::Validation(errors))
        }
        Err(e) => Err(e),
    }
}

fn convert_question(
    raw: RawQuestion,
    assignment: Option<&SplitAssignment>,
    errors: &mut ValidationErrors,
) -> Option<McQuestion> {
    let id = raw.id.clone();
    let before = errors.0.len();

    let options: Option<[String; NUM_OPTIONS]> = raw.options.try_into().ok();
    if options.is_none() {
        errors.push(&id, "expected exactly 4 options");
    }
    let gold = parse_gold(&raw.gold);
    if gold.is_none() {
        errors.push(&id, format!("gold {} is not one of A-D", raw.gold));
    }
    let reasoning_type = match raw.reasoning_type.as_deref().map(str::trim) {
        None | Some("") => None,
        Some(code) => match code.parse::<ReasoningType>() {
            Ok(r) => Some(r),
            Err(_) => {
                errors.push(&id, format!("unknown reasoning type `{code}`"));
                None
            }
        },
    };
    let split = match assignment.and_then(|a| a.get(&id)) {
        Some(&s) => Some(s),
        None => match raw.split.as_deref() {
            Some(s) => match s.parse::<Split>() {
                Ok(s) => Some(s),
                Err(_) => {
                    errors.push(&id, format!("unknown split `{s}`"));
                    None
                }
            },
            None => {
                errors.push(&id, "no split label");
                None
            }
        },
    };
    if errors.0.len() > before {
        return None;
    }
    Some(McQuestion {
        id: raw.id,
        text_id: raw.text_id,
        stem: raw.stem,
        options: options?,
        gold: gold?,
        reasoning_type,
        split: split?,
        extra: raw.extra,
    })
}

fn parse_gold(v: &Value) -> Option<usize> {
    match v {
        Value::String(s) => match s.trim() {
            "A" | "a" => Some(0),
            "B" | "b" => Some(1),
            "C" | "c" => Some(2),
            "D" | "d" => Some(3),
            _ => None,
        },
        Value::Number(n) => n.as_u64().filter(|&i| i < NUM_OPTIONS as u64).map(|i| i as usize),
        _ => None,
    }
}

/// Counts and average lengths (in segmented words) for a group of questions.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SplitStats {
    pub texts: usize,
    pub questions: usize,
    pub avg_text_length: f64,
    pub avg_question_length: f64,
    pub avg_option_length: f64,
    pub avg_correct_length: f64,
    pub vocabulary: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GradeStats {
    pub texts: usize,
    pub questions: usize,
    pub vocabulary: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub splits: BTreeMap<Split, SplitStats>,
    pub overall: SplitStats,
    pub grades: BTreeMap<u8, GradeStats>,
}

/// Segmented word forms of every text and question, computed once.
struct Tokenized {
    texts: HashMap<String, Vec<String>>,
    stems: Vec<Vec<String>>,
    options: Vec<[Vec<String>; NUM_OPTIONS]>,
}

impl Tokenized {
    fn new(d: &Dataset, cfg: &PreprocessConfig) -> Self {
        Tokenized {
            texts: d
                .texts()
                .iter()
                .map(|t| (t.id.clone(), preprocess_text(&t.body, cfg).flat().to_vec()))
                .collect(),
            stems: d
                .questions()
                .iter()
                .map(|q| preprocess_text(&q.stem, cfg).flat().to_vec())
                .collect(),
            options: d
                .questions()
                .iter()
                .map(|q| q.options.each_ref().map(|o| preprocess_sentence(o, cfg).into_inner()))
                .collect(),
        }
    }

    fn summarize<'a>(&'a self, d: &'a Dataset, members: &[usize], all_texts: bool) -> SplitStats {
        let mut text_ids: BTreeSet<&str> = members.iter().map(|&i| d.questions()[i].text_id.as_str()).collect();
        if all_texts {
            text_ids.extend(d.texts().iter().map(|t| t.id.as_str()));
        }
        let mut vocab: HashSet<&str> = HashSet::new();
        let mut text_words = 0usize;
        for id in &text_ids {
            let words = &self.texts[*id];
            text_words += words.len();
            vocab.extend(words.iter().map(String::as_str));
        }
        let (mut stem_words, mut option_words, mut correct_words) = (0usize, 0usize, 0usize);
        for &i in members {
            let q = &d.questions()[i];
            stem_words += self.stems[i].len();
            vocab.extend(self.stems[i].iter().map(String::as_str));
            for o in &self.options[i] {
                option_words += o.len();
                vocab.extend(o.iter().map(String::as_str));
            }
            correct_words += self.options[i][q.gold].len();
        }
        let mean = |total: usize, n: usize| if n == 0 { 0.0 } else { total as f64 / n as f64 };
        SplitStats {
            texts: text_ids.len(),
            questions: members.len(),
            avg_text_length: mean(text_words, text_ids.len()),
            avg_question_length: mean(stem_words, members.len()),
            avg_option_length: mean(option_words, members.len() * NUM_OPTIONS),
            avg_correct_length: mean(correct_words, members.len()),
            vocabulary: vocab.len(),
        }
    }
}

/// Descriptive statistics measured in segmented, lowercased words of the
/// raw text (punctuation dropped, no stopword removal).
pub fn compute_stats(d: &Dataset, segmenter: &Segmenter) -> DatasetStats {
    let cfg = PreprocessConfig::new(segmenter.clone());
    let tok = Tokenized::new(d, &cfg);
    let all: Vec<usize> = (0..d.questions().len()).collect();

    let mut splits = BTreeMap::new();
    for split in Split::ALL {
        let members: Vec<usize> = all
            .iter()
            .copied()
            .filter(|&i| d.questions()[i].split == split)
            .collect();
        if !members.is_empty() {
            splits.insert(split, tok.summarize(d, &members, false));
        }
    }

    let mut grades = BTreeMap::new();
    for grade in 1..=5u8 {
        let members: Vec<usize> = all
            .iter()
            .copied()
            .filter(|&i| d.text_of(&d.questions()[i]).grade == grade)
            .collect();
        let grade_texts: Vec<&ReadingText> = d.texts().iter().filter(|t| t.grade == grade).collect();
        if members.is_empty() && grade_texts.is_empty() {
            continue;
        }
        let mut s = tok.summarize(d, &members, false);
        // Count texts of this grade even when they have no questions.
        let mut vocab: HashSet<&str> = HashSet::new();
        for t in &grade_texts {
            vocab.extend(tok.texts[&t.id].iter().map(String::as_str));
        }
        for &i in &members {
            vocab.extend(tok.stems[i].iter().map(String::as_str));
            for o in &tok.options[i] {
                vocab.extend(o.iter().map(String::as_str));
            }
        }
        s.texts = grade_texts.len();
        s.vocabulary = vocab.len();
        grades.insert(
            grade,
            GradeStats {
                texts: s.texts,
                questions: s.questions,
                vocabulary: s.vocabulary,
            },
        );
    }

    DatasetStats {
        splits,
        overall: tok.summarize(d, &all, true),
        grades,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "texts": [{"id": "t1", "grade": 3, "title": "Cây bàng", "body": "Ngay giữa sân trường, sừng sững một cây bàng.", "source": "sgk"}],
        "questions": [{"id": "q1", "text_id": "t1", "stem": "Cây bàng được trồng ở đâu?",
                       "options": ["Ngay giữa sân trường.", "Trồng ở ngoài đường.", "Gần sông.", "Dưới mái hiên trường."],
                       "gold": "A", "split": "dev"}]
    }"#;

    #[test]
    fn minimal_document() {
        let d = parse_dataset(MINIMAL, None).unwrap();
        assert_eq!(d.texts().len(), 1);
        assert_eq!(d.questions().len(), 1);
        let q = &d.questions()[0];
        assert_eq!(q.gold, 0);
        assert_eq!(q.split, Split::Dev);
        assert_eq!(q.reasoning_type, None);
        assert_eq!(d.texts()[0].extra.get("source"), Some(&Value::String("sgk".into())));
    }

    #[test]
    fn gold_out_of_range_names_question() {
        let bad = MINIMAL.replace(r#""gold": "A""#, r#""gold": 5"#);
        match parse_dataset(&bad, None) {
            Err(Error::Validation(v)) => assert!(v.mentions("q1"), "{v}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn numeric_gold_accepted() {
        let d = parse_dataset(&MINIMAL.replace(r#""gold": "A""#, r#""gold": 2"#), None).unwrap();
        assert_eq!(d.questions()[0].gold, 2);
    }

    #[test]
    fn every_violation_is_reported() {
        let json = r#"{
            "texts": [{"id": "t1", "grade": 9, "body": "x"}, {"id": "t2", "grade": 1, "body": "   "}],
            "questions": [
                {"id": "q1", "text_id": "nope", "stem": "?", "options": ["a","b","c","d"], "gold": "A", "split": "dev"},
                {"id": "q2", "text_id": "t2", "stem": "?", "options": ["a","b","c"], "gold": "A", "split": "dev"},
                {"id": "q3", "text_id": "t2", "stem": "?", "options": ["a","","c","d"], "gold": "Z", "split": "dev"},
                {"id": "q4", "text_id": "t2", "stem": "?", "options": ["a","b","c","d"], "gold": "A"}
            ]}"#;
        let Err(Error::Validation(v)) = parse_dataset(json, None) else {
            panic!("expected validation error");
        };
        for id in ["t1", "t2", "q1", "q2", "q3", "q4"] {
            assert!(v.mentions(id), "missing {id} in\n{v}");
        }
    }

    #[test]
    fn malformed_json_is_parse_error() {
        assert!(matches!(parse_dataset("{\"texts\": [", None), Err(Error::Parse { .. })));
    }

    #[test]
    fn split_assignment_fills_missing_labels() {
        let json = MINIMAL.replace(r#", "split": "dev""#, "");
        assert!(parse_dataset(&json, None).is_err());
        let assignment = SplitAssignment::from([("q1".to_string(), Split::Test)]);
        let d = parse_dataset(&json, Some(&assignment)).unwrap();
        assert_eq!(d.questions()[0].split, Split::Test);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let t = ReadingText::new("t", 1, "a");
        let q = McQuestion::new("q", "t", "s", ["a", "b", "c", "d"], 0, Split::Dev);
        assert!(Dataset::new(vec![t.clone(), t.clone()], vec![]).is_err());
        assert!(Dataset::new(vec![t], vec![q.clone(), q]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let d = parse_dataset(MINIMAL, None).unwrap();
        let again = parse_dataset(&d.to_json(), None).unwrap();
        assert_eq!(d, again);
    }

    #[test]
    fn filter_keeps_referenced_texts_only() {
        let texts = vec![ReadingText::new("t1", 1, "a"), ReadingText::new("t2", 2, "b")];
        let questions = vec![
            McQuestion::new("q1", "t1", "s", ["a", "b", "c", "d"], 0, Split::Train),
            McQuestion::new("q2", "t2", "s", ["a", "b", "c", "d"], 0, Split::Test),
        ];
        let d = Dataset::new(texts, questions).unwrap();
        let test = d.select(&QuestionFilter::split(Split::Test));
        assert_eq!(test.questions().len(), 1);
        assert_eq!(test.texts().len(), 1);
        assert_eq!(test.texts()[0].id, "t2");
        assert!(Dataset::empty().select(&QuestionFilter::split(Split::Dev)).is_empty());
    }

    #[test]
    fn stats_direct_counts() {
        let d = Dataset::new(
            vec![ReadingText::new("t", 1, "a b")],
            vec![McQuestion::new(
                "q",
                "t",
                "x y z",
                ["a", "b c", "d", "e"],
                1,
                Split::Dev,
            )],
        )
        .unwrap();
        let s = compute_stats(&d, &Segmenter::Whitespace);
        assert_eq!(s.overall.texts, 1);
        assert_eq!(s.overall.questions, 1);
        assert_eq!(s.overall.avg_text_length, 2.0);
        assert_eq!(s.overall.avg_question_length, 3.0);
        assert_eq!(s.overall.avg_option_length, 5.0 / 4.0);
        assert_eq!(s.overall.avg_correct_length, 2.0);
        assert_eq!(s.overall.vocabulary, 8);
        assert_eq!(s.splits[&Split::Dev], s.overall);
        assert_eq!(s.grades[&1].questions, 1);
    }

    #[test]
    fn reasoning_codes_parse() {
        assert_eq!(
            "aoi".parse::<ReasoningType>().unwrap(),
            ReasoningType::AmbiguousOrInsufficient
        );
        assert_eq!(serde_json::to_string(&ReasoningType::MultiSentence).unwrap(), "\"MSR\"");
        assert!("XYZ".parse::<ReasoningType>().is_err());
    }
}
