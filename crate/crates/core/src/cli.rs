//! Command-line front end: `answer`, `evaluate`, `stats`, `compare` and `batch`.
//!
//! Every option may also come from a JSON config file (`--config`) with the
//! same field names as [`RunConfig`]; flags given on the command line win.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::corpus::{compute_stats, load_dataset, Dataset, QuestionFilter, Split};
use crate::embedding::EmbeddingStore;
use crate::error::{Error, Result};
use crate::eval::{compare_reports, Evaluator, Facet};
use crate::preprocess::{read_word_list, Lexicon, PreprocessConfig, Segmenter};
use crate::render::{Format, Render};
use crate::scoring::{DistanceAggregation, Method, MethodConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_DATA: i32 = 4;

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::MissingEmbeddings | Error::UnknownQuestion(_) => EXIT_CONFIG,
        Error::Io { .. } => EXIT_IO,
        Error::Parse { .. } | Error::Validation(_) | Error::EmbeddingFormat { .. } | Error::EmptySplit => EXIT_DATA,
        Error::QuestionSetMismatch { .. } => EXIT_FAILURE,
    }
}

#[derive(Debug, Parser)]
#[command(name = "lexmrc", version, about = "Lexical multiple-choice reading comprehension")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score the four options of one question.
    Answer {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long = "question-id", alias = "question")]
        question_id: String,
    },
    /// Evaluate a method on a split and print accuracy breakdowns.
    Evaluate {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Print dataset statistics per split and grade.
    Stats {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Compare two methods on the same split, bin by bin.
    Compare {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        baseline: Method,
        #[arg(long)]
        candidate: Method,
        #[arg(long, default_value = "reasoning_type")]
        facet: Facet,
    },
    /// Run one command per line of a file, sharing loaded datasets and embeddings.
    Batch { file: PathBuf },
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON file providing defaults for any of these options.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub split: Option<Split>,
    #[arg(long)]
    pub method: Option<Method>,
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long = "distance-agg")]
    pub distance_agg: Option<DistanceAggregation>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
}

/// Fully resolved options of one invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: Option<PathBuf>,
    pub split: Option<Split>,
    pub method: Method,
    pub embeddings: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub distance_agg: DistanceAggregation,
    pub seed: Option<u64>,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dataset: None,
            split: None,
            method: Method::SwD,
            embeddings: None,
            stopwords: None,
            lexicon: None,
            distance_agg: DistanceAggregation::Min,
            seed: None,
            format: Format::Plain,
            out: None,
            workers: 1,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&raw).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Config file (if any) overlaid with explicit flags.
    pub fn resolve(args: &CommonArgs) -> Result<Self> {
        let mut cfg = match &args.config {
            Some(path) => Self::from_file(path)?,
            None => RunConfig::default(),
        };
        macro_rules! overlay {
            ($($field:ident <- $arg:ident),* $(,)?) => {
                $(if let Some(v) = &args.$arg { cfg.$field = v.clone().into(); })*
            };
        }
        overlay!(
            dataset <- dataset,
            split <- split,
            method <- method,
            embeddings <- embeddings,
            stopwords <- stopwords,
            lexicon <- lexicon,
            distance_agg <- distance_agg,
            seed <- seed,
            format <- format,
            out <- out,
            workers <- workers,
        );
        Ok(cfg)
    }

    pub fn method_config(&self, method: Method) -> MethodConfig {
        MethodConfig {
            method,
            distance_aggregation: self.distance_agg,
            random_seed: self.seed,
        }
    }

    pub fn validate_for(&self, method: Method) -> Result<()> {
        if method.needs_embeddings() && self.embeddings.is_none() {
            return Err(Error::Config("method sw_d_web requires --embeddings".into()));
        }
        if method == Method::Random && self.seed.is_none() {
            return Err(Error::Config("method random requires --seed".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("--workers must be at least 1".into()));
        }
        Ok(())
    }

    fn dataset_path(&self) -> Result<&Path> {
        self.dataset
            .as_deref()
            .ok_or_else(|| Error::Config("--dataset is required".into()))
    }
}

/// Files loaded during this process, reused across batch commands.
#[derive(Debug, Default)]
pub struct Session {
    datasets: HashMap<PathBuf, Arc<Dataset>>,
    embeddings: HashMap<PathBuf, Arc<EmbeddingStore>>,
}

impl Session {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn dataset(&mut self, path: &Path) -> Result<Arc<Dataset>> {
        if let Some(d) = self.datasets.get(path) {
            return Ok(Arc::clone(d));
        }
        let d = Arc::new(load_dataset(path, None)?);
        self.datasets.insert(path.to_path_buf(), Arc::clone(&d));
        Ok(d)
    }

    pub fn embeddings(&mut self, path: &Path) -> Result<Arc<EmbeddingStore>> {
        if let Some(s) = self.embeddings.get(path) {
            return Ok(Arc::clone(s));
        }
        let s = Arc::new(EmbeddingStore::load(path)?);
        self.embeddings.insert(path.to_path_buf(), Arc::clone(&s));
        Ok(s)
    }

    pub fn loaded_embeddings(&self) -> usize {
        self.embeddings.len()
    }

    fn optional_embeddings(&mut self, cfg: &RunConfig) -> Result<Option<Arc<EmbeddingStore>>> {
        cfg.embeddings.as_deref().map(|p| self.embeddings(p)).transpose()
    }

    /// Lexicon file if given, else the multi-syllable words of the embedding
    /// vocabulary, else no joining at all.
    fn preprocess(&self, cfg: &RunConfig, store: Option<&EmbeddingStore>) -> Result<PreprocessConfig> {
        let segmenter = match (&cfg.lexicon, store) {
            (Some(path), _) => Segmenter::LongestMatch(Lexicon::load(path)?),
            (None, Some(store)) => Segmenter::LongestMatch(Lexicon::from_vocabulary(store.words())),
            (None, None) => Segmenter::Whitespace,
        };
        let mut pre = PreprocessConfig::new(segmenter);
        if let Some(path) = &cfg.stopwords {
            pre = pre.with_stopwords(read_word_list(path)?);
        }
        Ok(pre)
    }
}

pub fn cmd_answer(session: &mut Session, cfg: &RunConfig, question_id: &str) -> Result<String> {
    cfg.validate_for(cfg.method)?;
    let dataset = session.dataset(cfg.dataset_path()?)?;
    let store = session.optional_embeddings(cfg)?;
    let pre = session.preprocess(cfg, store.as_deref())?;
    let scores = Evaluator::new(&pre).with_store(store.as_deref()).answer(
        &dataset,
        question_id,
        &cfg.method_config(cfg.method),
    )?;
    Ok(match cfg.format {
        Format::Plain => format!("question: {question_id}\n{}", scores.render(Format::Plain)),
        f => scores.render(f),
    })
}

pub fn cmd_evaluate(session: &mut Session, cfg: &RunConfig) -> Result<String> {
    cfg.validate_for(cfg.method)?;
    let dataset = session.dataset(cfg.dataset_path()?)?;
    let store = session.optional_embeddings(cfg)?;
    let pre = session.preprocess(cfg, store.as_deref())?;
    let report = Evaluator::new(&pre)
        .with_store(store.as_deref())
        .with_workers(cfg.workers)
        .evaluate(&dataset, cfg.split, &cfg.method_config(cfg.method))?;
    Ok(report.render(cfg.format))
}

pub fn cmd_stats(session: &mut Session, cfg: &RunConfig) -> Result<String> {
    let dataset = session.dataset(cfg.dataset_path()?)?;
    let store = session.optional_embeddings(cfg)?;
    let pre = session.preprocess(cfg, store.as_deref())?;
    let subset = match cfg.split {
        Some(split) => dataset.select(&QuestionFilter::split(split)),
        None => (*dataset).clone(),
    };
    Ok(compute_stats(&subset, pre.segmenter()).render(cfg.format))
}

pub fn cmd_compare(
    session: &mut Session,
    cfg: &RunConfig,
    baseline: Method,
    candidate: Method,
    facet: Facet,
) -> Result<String> {
    cfg.validate_for(baseline)?;
    cfg.validate_for(candidate)?;
    let dataset = session.dataset(cfg.dataset_path()?)?;
    let store = session.optional_embeddings(cfg)?;
    let pre = session.preprocess(cfg, store.as_deref())?;
    let evaluator = Evaluator::new(&pre)
        .with_store(store.as_deref())
        .with_workers(cfg.workers);
    let base = evaluator.evaluate(&dataset, cfg.split, &cfg.method_config(baseline))?;
    let cand = evaluator.evaluate(&dataset, cfg.split, &cfg.method_config(candidate))?;
    Ok(compare_reports(&base, &cand, facet)?.render(cfg.format))
}

fn emit(cfg: &RunConfig, output: &str) -> Result<()> {
    match &cfg.out {
        Some(path) => fs::write(path, output).map_err(|e| Error::io(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(output.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

pub fn execute(session: &mut Session, command: Command) -> Result<()> {
    match command {
        Command::Answer { common, question_id } => {
            let cfg = RunConfig::resolve(&common)?;
            emit(&cfg, &cmd_answer(session, &cfg, &question_id)?)
        }
        Command::Evaluate { common } => {
            let cfg = RunConfig::resolve(&common)?;
            emit(&cfg, &cmd_evaluate(session, &cfg)?)
        }
        Command::Stats { common } => {
            let cfg = RunConfig::resolve(&common)?;
            emit(&cfg, &cmd_stats(session, &cfg)?)
        }
        Command::Compare {
            common,
            baseline,
            candidate,
            facet,
        } => {
            let cfg = RunConfig::resolve(&common)?;
            emit(&cfg, &cmd_compare(session, &cfg, baseline, candidate, facet)?)
        }
        Command::Batch { file } => run_batch(session, &file),
    }
}

/// Each non-empty, non-`#` line is one command with whitespace-separated arguments.
fn run_batch(session: &mut Session, file: &Path) -> Result<()> {
    let raw = fs::read_to_string(file).map_err(|e| Error::io(file, e))?;
    for (n, line) in raw.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let args = std::iter::once("lexmrc").chain(line.split_whitespace());
        let cli = Cli::try_parse_from(args).map_err(|e| Error::Config(format!("{}:{}: {e}", file.display(), n + 1)))?;
        if matches!(cli.command, Command::Batch { .. }) {
            return Err(Error::Config(format!("{}:{}: nested batch", file.display(), n + 1)));
        }
        execute(session, cli.command)?;
    }
    Ok(())
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let mut session = Session::new();
    match execute(&mut session, cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        fs::write(&path, r#"{"method": "sw", "seed": 3, "workers": 2, "format": "csv"}"#).unwrap();
        let args = CommonArgs {
            config: Some(path),
            method: Some(Method::SwD),
            ..CommonArgs::default()
        };
        let cfg = RunConfig::resolve(&args).unwrap();
        assert_eq!(cfg.method, Method::SwD);
        assert_eq!(cfg.seed, Some(3));
        assert_eq!(cfg.workers, 2);
        assert_eq!(cfg.format, Format::Csv);
    }

    #[test]
    fn unknown_config_field_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        fs::write(&path, r#"{"methd": "sw"}"#).unwrap();
        assert!(matches!(RunConfig::from_file(&path), Err(Error::Config(_))));
    }

    #[test]
    fn config_invariants() {
        let cfg = RunConfig::default();
        assert!(cfg.validate_for(Method::SwDWeb).is_err());
        assert!(cfg.validate_for(Method::Random).is_err());
        assert!(cfg.validate_for(Method::SwD).is_ok());
    }

    #[test]
    fn exit_codes_are_distinct() {
        let codes = [
            exit_code(&Error::Config(String::new())),
            exit_code(&Error::io("x", std::io::Error::other("x"))),
            exit_code(&Error::EmptySplit),
        ];
        assert_eq!(codes, [EXIT_CONFIG, EXIT_IO, EXIT_DATA]);
    }
}
