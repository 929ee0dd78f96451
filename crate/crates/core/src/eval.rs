//! Accuracy evaluation with breakdowns by question length, grade and
//! reasoning type, and baseline-vs-method improvement tables.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, McQuestion, QuestionFilter, ReasoningType, Split};
use crate::embedding::EmbeddingStore;
use crate::error::{Error, Result};
use crate::preprocess::{preprocess_sentence, preprocess_text, PreprocessConfig, ProcessedText, WordList};
use crate::scoring::{MethodConfig, Predictor, ScoreBreakdown};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub question_id: String,
    pub predicted: usize,
    pub gold: usize,
    pub correct: bool,
    pub scores: ScoreBreakdown,
    /// Stem length in segmented words.
    pub question_length: usize,
    pub grade: u8,
    pub reasoning_type: Option<ReasoningType>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Facet {
    QuestionLength,
    Grade,
    ReasoningType,
}

impl Facet {
    pub const ALL: [Facet; 3] = [Facet::QuestionLength, Facet::Grade, Facet::ReasoningType];

    pub fn as_str(self) -> &'static str {
        match self {
            Facet::QuestionLength => "question_length",
            Facet::Grade => "grade",
            Facet::ReasoningType => "reasoning_type",
        }
    }

    /// Every bin label in display order.
    pub fn bins(self) -> Vec<String> {
        match self {
            Facet::QuestionLength => LENGTH_BINS.iter().map(|b| b.to_string()).collect(),
            Facet::Grade => (1..=5).map(|g: u8| g.to_string()).collect(),
            Facet::ReasoningType => ReasoningType::ALL.iter().map(|r| r.code().to_owned()).collect(),
        }
    }

    /// Bin of one record, `None` when the record carries no value for this facet.
    pub fn bin_of(self, r: &PredictionRecord) -> Option<String> {
        match self {
            Facet::QuestionLength => Some(length_bin(r.question_length).to_owned()),
            Facet::Grade => Some(r.grade.to_string()),
            Facet::ReasoningType => r.reasoning_type.map(|t| t.code().to_owned()),
        }
    }
}

impl fmt::Display for Facet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Facet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "question_length" | "length" => Ok(Facet::QuestionLength),
            "grade" => Ok(Facet::Grade),
            "reasoning_type" | "reasoning" => Ok(Facet::ReasoningType),
            _ => Err(Error::Config(format!(
                "unknown facet `{s}` (expected question_length, grade or reasoning_type)"
            ))),
        }
    }
}

const LENGTH_BINS: [&str; 5] = ["<=10", "11-15", "16-20", "21-25", ">=26"];

pub fn length_bin(words: usize) -> &'static str {
    match words {
        0..=10 => LENGTH_BINS[0],
        11..=15 => LENGTH_BINS[1],
        16..=20 => LENGTH_BINS[2],
        21..=25 => LENGTH_BINS[3],
        _ => LENGTH_BINS[4],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacetRow {
    pub bin: String,
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
}

/// Accuracy per populated bin of one facet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacetTable {
    pub facet: Facet,
    pub rows: Vec<FacetRow>,
    /// Records without a value for this facet (only reasoning type can be missing).
    pub unannotated: usize,
}

impl FacetTable {
    pub fn total(&self) -> usize {
        self.rows.iter().map(|r| r.total).sum()
    }

    pub fn row(&self, bin: &str) -> Option<&FacetRow> {
        self.rows.iter().find(|r| r.bin == bin)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub config: MethodConfig,
    pub split: Option<Split>,
    pub questions: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub facets: Vec<FacetTable>,
    pub records: Vec<PredictionRecord>,
}

impl EvaluationReport {
    pub fn from_records(config: MethodConfig, split: Option<Split>, records: Vec<PredictionRecord>) -> Self {
        let correct = records.iter().filter(|r| r.correct).count();
        let questions = records.len();
        let mut report = EvaluationReport {
            config,
            split,
            questions,
            correct,
            accuracy: accuracy(correct, questions),
            facets: Vec::new(),
            records,
        };
        report.facets = Facet::ALL.iter().map(|&f| facet_breakdown(&report, f)).collect();
        report
    }

    pub fn facet(&self, facet: Facet) -> Option<&FacetTable> {
        self.facets.iter().find(|t| t.facet == facet)
    }

    /// Concatenates two reports over disjoint question sets.
    pub fn merge(&self, other: &EvaluationReport) -> Result<EvaluationReport> {
        if self.config != other.config {
            return Err(Error::Config(
                "cannot merge reports produced by different methods".into(),
            ));
        }
        let ids: BTreeSet<&str> = self.records.iter().map(|r| r.question_id.as_str()).collect();
        if let Some(dup) = other.records.iter().find(|r| ids.contains(r.question_id.as_str())) {
            return Err(Error::Config(format!(
                "question `{}` appears in both reports",
                dup.question_id
            )));
        }
        let split = if self.split == other.split { self.split } else { None };
        let records = self.records.iter().chain(&other.records).cloned().collect();
        Ok(EvaluationReport::from_records(self.config, split, records))
    }
}

/// Fraction of correctly answered questions; 0 for an empty set.
pub fn accuracy(correct: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        correct as f64 / total as f64
    }
}

pub fn facet_breakdown(report: &EvaluationReport, facet: Facet) -> FacetTable {
    let mut tally: HashMap<String, (usize, usize)> = HashMap::new();
    let mut unannotated = 0;
    for r in &report.records {
        match facet.bin_of(r) {
            Some(bin) => {
                let e = tally.entry(bin).or_default();
                e.0 += usize::from(r.correct);
                e.1 += 1;
            }
            None => unannotated += 1,
        }
    }
    let rows = facet
        .bins()
        .into_iter()
        .filter_map(|bin| {
            let (correct, total) = tally.remove(&bin)?;
            Some(FacetRow {
                accuracy: accuracy(correct, total),
                bin,
                correct,
                total,
            })
        })
        .collect();
    FacetTable {
        facet,
        rows,
        unannotated,
    }
}

/// Percentages as printed in result tables: two decimals.
pub fn percent(fraction: f64) -> f64 {
    round2(fraction * 100.0)
}

fn round2(x: f64) -> f64 {
    let r = (x * 100.0).round() / 100.0;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImprovementRow {
    pub bin: String,
    /// Share of the facet's questions falling in this bin, in percent.
    pub ratio: f64,
    pub baseline: f64,
    pub method: f64,
    /// `method - baseline` in percentage points.
    pub improvement: f64,
}

/// Per-bin accuracy of a method against a baseline on the same questions.
///
/// All values are percentages rounded to two decimals, and the improvement
/// is the difference of the rounded accuracies, so printed columns agree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImprovementTable {
    pub facet: Facet,
    pub baseline: MethodConfig,
    pub method: MethodConfig,
    pub rows: Vec<ImprovementRow>,
}

pub fn compare_reports(
    baseline: &EvaluationReport,
    method: &EvaluationReport,
    facet: Facet,
) -> Result<ImprovementTable> {
    let base_ids: BTreeSet<&str> = baseline.records.iter().map(|r| r.question_id.as_str()).collect();
    let method_ids: BTreeSet<&str> = method.records.iter().map(|r| r.question_id.as_str()).collect();
    if base_ids != method_ids {
        return Err(Error::QuestionSetMismatch {
            only_baseline: base_ids.difference(&method_ids).count(),
            only_method: method_ids.difference(&base_ids).count(),
        });
    }
    let base = facet_breakdown(baseline, facet);
    let cand = facet_breakdown(method, facet);
    let annotated = base.total();
    let rows = facet
        .bins()
        .into_iter()
        .filter_map(|bin| {
            let b = base.row(&bin);
            let m = cand.row(&bin);
            let total = b.or(m)?.total;
            let b_acc = percent(b.map_or(0.0, |r| r.accuracy));
            let m_acc = percent(m.map_or(0.0, |r| r.accuracy));
            Some(ImprovementRow {
                ratio: percent(accuracy(total, annotated)),
                baseline: b_acc,
                method: m_acc,
                improvement: round2(m_acc - b_acc),
                bin,
            })
        })
        .collect();
    Ok(ImprovementTable {
        facet,
        baseline: baseline.config,
        method: method.config,
        rows,
    })
}

/// A question after preprocessing, ready for scoring.
#[derive(Debug, Clone)]
pub struct PreparedQuestion {
    pub stem: WordList,
    pub options: [WordList; 4],
    pub question_length: usize,
}

/// Runs methods over datasets with a fixed preprocessing pipeline.
#[derive(Debug, Clone)]
pub struct Evaluator<'a> {
    preprocess: &'a PreprocessConfig,
    store: Option<&'a EmbeddingStore>,
    workers: usize,
}

impl<'a> Evaluator<'a> {
    pub fn new(preprocess: &'a PreprocessConfig) -> Self {
        Evaluator {
            preprocess,
            store: None,
            workers: 1,
        }
    }

    pub fn with_store(mut self, store: Option<&'a EmbeddingStore>) -> Self {
        self.store = store;
        self
    }

    /// Number of threads scoring questions. Output does not depend on it.
    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    pub fn prepare_text(&self, body: &str) -> ProcessedText {
        preprocess_text(body, self.preprocess)
    }

    pub fn prepare_question(&self, q: &McQuestion) -> PreparedQuestion {
        let stem = preprocess_text(&q.stem, self.preprocess);
        let counting = self.preprocess.clone().with_stopwords(std::iter::empty::<&str>());
        PreparedQuestion {
            question_length: preprocess_text(&q.stem, &counting).len(),
            stem: stem.flat().iter().cloned().collect(),
            options: q.options.each_ref().map(|o| preprocess_sentence(o, self.preprocess)),
        }
    }

    /// Scores a single question.
    pub fn answer(&self, d: &Dataset, question_id: &str, cfg: &MethodConfig) -> Result<ScoreBreakdown> {
        let q = d
            .question(question_id)
            .ok_or_else(|| Error::UnknownQuestion(question_id.to_owned()))?;
        let mut predictor = Predictor::new(*cfg, self.store)?;
        let text = self.prepare_text(&d.text_of(q).body);
        let prepared = self.prepare_question(q);
        Ok(predictor.predict(&text, &prepared.stem, &prepared.options))
    }

    /// Scores every question of `split` (or of the whole dataset) in dataset order.
    pub fn evaluate(&self, d: &Dataset, split: Option<Split>, cfg: &MethodConfig) -> Result<EvaluationReport> {
        let mut predictor = Predictor::new(*cfg, self.store)?;
        let subset = match split {
            Some(s) => d.select(&QuestionFilter::split(s)),
            None => d.clone(),
        };
        if subset.is_empty() {
            return Err(Error::EmptySplit);
        }
        let questions = subset.questions();

        let run = || -> (Vec<ProcessedText>, Vec<PreparedQuestion>) {
            let texts = subset.texts().par_iter().map(|t| self.prepare_text(&t.body)).collect();
            let prepared = questions.par_iter().map(|q| self.prepare_question(q)).collect();
            (texts, prepared)
        };
        let (texts, prepared) = self.install(run)?;
        let text_pos: HashMap<&str, usize> = subset
            .texts()
            .iter()
            .enumerate()
            .map(|(i, t)| (t.id.as_str(), i))
            .collect();
        let text_for = |q: &McQuestion| &texts[text_pos[q.text_id.as_str()]];

        let scores: Vec<ScoreBreakdown> = if predictor.is_stochastic() {
            questions
                .iter()
                .zip(&prepared)
                .map(|(q, p)| predictor.predict(text_for(q), &p.stem, &p.options))
                .collect()
        } else {
            let predictor = &predictor;
            self.install(|| {
                questions
                    .par_iter()
                    .zip(prepared.par_iter())
                    .map(|(q, p)| {
                        predictor
                            .score(text_for(q), &p.stem, &p.options)
                            .expect("deterministic method")
                    })
                    .collect()
            })?
        };

        let records = questions
            .iter()
            .zip(prepared)
            .zip(scores)
            .map(|((q, p), scores)| PredictionRecord {
                question_id: q.id.clone(),
                predicted: scores.predicted,
                gold: q.gold,
                correct: scores.predicted == q.gold,
                question_length: p.question_length,
                grade: subset.text_of(q).grade,
                reasoning_type: q.reasoning_type,
                scores,
            })
            .collect();
        Ok(EvaluationReport::from_records(*cfg, split, records))
    }

    fn install<T: Send>(&self, op: impl FnOnce() -> T + Send) -> Result<T> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
        Ok(pool.install(op))
    }
}

/// Evaluates one method on one split with a single worker.
pub fn evaluate(
    d: &Dataset,
    split: Option<Split>,
    cfg: &MethodConfig,
    store: Option<&EmbeddingStore>,
    preprocess: &PreprocessConfig,
) -> Result<EvaluationReport> {
    Evaluator::new(preprocess).with_store(store).evaluate(d, split, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::Method;

    fn record(id: &str, correct: bool, len: usize, grade: u8, rt: Option<ReasoningType>) -> PredictionRecord {
        let scores = ScoreBreakdown {
            method: Method::Sw,
            sw: [0.0; 4],
            dist: [0.0; 4],
            web: [0.0; 4],
            final_score: [0.0; 4],
            predicted: if correct { 0 } else { 1 },
        };
        PredictionRecord {
            question_id: id.into(),
            predicted: scores.predicted,
            gold: 0,
            correct,
            scores,
            question_length: len,
            grade,
            reasoning_type: rt,
        }
    }

    fn report(records: Vec<PredictionRecord>) -> EvaluationReport {
        EvaluationReport::from_records(MethodConfig::new(Method::Sw), Some(Split::Dev), records)
    }

    #[test]
    fn length_bins_edges() {
        assert_eq!(length_bin(0), "<=10");
        assert_eq!(length_bin(10), "<=10");
        assert_eq!(length_bin(11), "11-15");
        assert_eq!(length_bin(20), "16-20");
        assert_eq!(length_bin(25), "21-25");
        assert_eq!(length_bin(26), ">=26");
    }

    #[test]
    fn uniform_length_populates_one_bin() {
        let r = report((0..6).map(|i| record(&i.to_string(), i % 2 == 0, 5, 2, None)).collect());
        let t = facet_breakdown(&r, Facet::QuestionLength);
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.rows[0].bin, "<=10");
        assert_eq!((t.rows[0].correct, t.rows[0].total), (3, 6));
    }

    #[test]
    fn reasoning_counts_unannotated_separately() {
        let r = report(vec![
            record("a", true, 5, 1, Some(ReasoningType::WordMatching)),
            record("b", false, 5, 1, None),
            record("c", false, 5, 1, Some(ReasoningType::MultiSentence)),
        ]);
        let t = r.facet(Facet::ReasoningType).unwrap();
        assert_eq!(t.unannotated, 1);
        assert_eq!(t.total() + t.unannotated, 3);
        assert_eq!(t.rows.iter().map(|r| r.bin.as_str()).collect::<Vec<_>>(), ["WM", "MSR"]);
    }

    #[test]
    fn identical_reports_have_zero_improvement() {
        let r = report(vec![record("a", true, 5, 1, None), record("b", false, 12, 2, None)]);
        for facet in Facet::ALL {
            let t = compare_reports(&r, &r, facet).unwrap();
            assert!(t.rows.iter().all(|row| row.improvement == 0.0));
        }
    }

    #[test]
    fn mismatched_question_sets_rejected() {
        let a = report(vec![record("a", true, 5, 1, None)]);
        let b = report(vec![record("b", true, 5, 1, None)]);
        assert!(matches!(
            compare_reports(&a, &b, Facet::Grade),
            Err(Error::QuestionSetMismatch {
                only_baseline: 1,
                only_method: 1
            })
        ));
    }

    #[test]
    fn one_question_in_bin_of_76() {
        let build = |n_correct: usize| {
            report(
                (0..76)
                    .map(|i| record(&format!("q{i}"), i < n_correct, 5, 3, Some(ReasoningType::WordMatching)))
                    .collect(),
            )
        };
        let t = compare_reports(&build(69), &build(70), Facet::ReasoningType).unwrap();
        assert_eq!(t.rows[0].improvement, 1.32);
        let t = compare_reports(&build(70), &build(69), Facet::ReasoningType).unwrap();
        assert_eq!(t.rows[0].improvement, -1.32);
    }

    #[test]
    fn merge_is_weighted_mean() {
        let a = report(vec![record("a", true, 5, 1, None), record("b", true, 5, 1, None)]);
        let b = report(vec![
            record("c", false, 5, 1, None),
            record("d", false, 5, 1, None),
            record("e", true, 5, 1, None),
        ]);
        let m = a.merge(&b).unwrap();
        let weighted = (a.accuracy * 2.0 + b.accuracy * 3.0) / 5.0;
        assert!((m.accuracy - weighted).abs() < 1e-15);
        assert!(a.merge(&a).is_err());
    }
}
