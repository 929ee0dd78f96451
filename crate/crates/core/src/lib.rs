//! Lexical multiple-choice reading comprehension.
//!
//! Each answer option is scored against the reading text with three
//! signals and the highest combined score wins:
//!
//! * a sliding-window lexical score over question and option words,
//! * a distance penalty between question and option words in the text,
//! * an embedding boost: the best cosine similarity between the option's
//!   mean word vector and any equally long span of the text.
//!
//! [`eval`] measures accuracy over datasets loaded by [`corpus`], with
//! breakdowns by question length, grade and reasoning type.

pub mod cli;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod preprocess;
pub mod render;
pub mod scoring;

pub use corpus::{load_dataset, Dataset, McQuestion, ReadingText, ReasoningType, Split};
pub use embedding::{average_embedding, cosine_similarity, EmbeddingStore, SpanVector};
pub use error::{Error, Result};
pub use eval::{compare_reports, evaluate, facet_breakdown, EvaluationReport, Evaluator, Facet, ImprovementTable};
pub use preprocess::{
    preprocess_sentence, preprocess_text, segment_words, Lexicon, PreprocessConfig, ProcessedText, Segmenter, WordList,
};
pub use render::{render_report, Format, Render};
pub use scoring::{
    boosted_score, distance_score, predict, sliding_window_score, term_counts, DistanceAggregation, Method,
    MethodConfig, Predictor, ScoreBreakdown,
};
