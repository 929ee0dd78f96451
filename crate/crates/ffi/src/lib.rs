//! C ABI over the `lexmrc` engine.
//!
//! Handles are opaque and owned by the caller: every `*_new` / `*_load`
//! has a matching `*_free`. Functions return a [`LexmrcStatus`]; on
//! failure [`lexmrc_last_error`] describes the problem for the calling
//! thread. Strings passed in must be NUL-terminated UTF-8, and strings
//! handed out must be released with [`lexmrc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lexmrc::preprocess::read_word_list;
use lexmrc::{
    load_dataset, Dataset, DistanceAggregation, EmbeddingStore, Error, Evaluator, Lexicon, McQuestion, Method,
    MethodConfig, Predictor, PreprocessConfig, Render, Segmenter, Split,
};

/// Answer options per question.
pub const LEXMRC_NUM_OPTIONS: usize = 4;

const _: () = assert!(LEXMRC_NUM_OPTIONS == lexmrc::scoring::NUM_OPTIONS);

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LexmrcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    Validation = 5,
    Config = 6,
    Panic = 7,
}

/// Engine settings. Null strings and zero workers select the defaults.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct LexmrcOptions {
    /// `random`, `sw`, `sw_d` (default) or `sw_d_web`.
    pub method: *const c_char,
    /// `min` (default) or `max`.
    pub distance_agg: *const c_char,
    pub has_seed: bool,
    pub seed: u64,
    /// Word-vector file; required for `sw_d_web`.
    pub embeddings: *const c_char,
    /// Compound-word list for segmentation.
    pub lexicon: *const c_char,
    /// Stopword list, one word per line.
    pub stopwords: *const c_char,
    pub workers: u32,
}

/// Per-option component scores of one question.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LexmrcScores {
    pub sw: [f64; LEXMRC_NUM_OPTIONS],
    pub dist: [f64; LEXMRC_NUM_OPTIONS],
    pub web: [f64; LEXMRC_NUM_OPTIONS],
    pub final_score: [f64; LEXMRC_NUM_OPTIONS],
    /// Chosen option, 0 for A through 3 for D.
    pub predicted: u32,
}

/// Opaque scoring engine.
pub struct LexmrcEngine {
    cfg: MethodConfig,
    pre: PreprocessConfig,
    store: Option<EmbeddingStore>,
    workers: usize,
    // Generator for the random baseline, advanced by each prediction.
    draws: Option<Predictor<'static>>,
}

/// Opaque loaded dataset.
pub struct LexmrcDataset {
    inner: Dataset,
}

struct Failure {
    status: LexmrcStatus,
    message: String,
}

impl Failure {
    fn new(status: LexmrcStatus, message: impl Into<String>) -> Self {
        Failure {
            status,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } => LexmrcStatus::Io,
            Error::Parse { .. } | Error::EmbeddingFormat { .. } => LexmrcStatus::Parse,
            Error::Validation(_) | Error::EmptySplit | Error::QuestionSetMismatch { .. } => LexmrcStatus::Validation,
            Error::Config(_) | Error::MissingEmbeddings | Error::UnknownQuestion(_) => LexmrcStatus::Config,
        };
        Failure::new(status, e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LexmrcStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LexmrcStatus::Ok,
        Ok(Err(failure)) => {
            set_last_error(&failure.message);
            failure.status
        }
        Err(payload) => {
            let what = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {what}"));
            LexmrcStatus::Panic
        }
    }
}

unsafe fn opt_str<'a>(p: *const c_char, name: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        return Ok(None);
    }
    CStr::from_ptr(p)
        .to_str()
        .map(Some)
        .map_err(|_| Failure::new(LexmrcStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn req_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    opt_str(p, name)?.ok_or_else(|| Failure::new(LexmrcStatus::NullPointer, format!("{name} is null")))
}

unsafe fn req_ref<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure::new(LexmrcStatus::NullPointer, format!("{name} is null")))
}

unsafe fn req_mut<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| Failure::new(LexmrcStatus::NullPointer, format!("{name} is null")))
}

fn parse<T: std::str::FromStr<Err = Error>>(value: Option<&str>, default: T) -> Result<T, Failure> {
    value.map_or(Ok(default), |s| s.parse().map_err(Failure::from))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

/// Options with every field at its default.
#[no_mangle]
pub extern "C" fn lexmrc_options_default() -> LexmrcOptions {
    LexmrcOptions {
        method: ptr::null(),
        distance_agg: ptr::null(),
        has_seed: false,
        seed: 0,
        embeddings: ptr::null(),
        lexicon: ptr::null(),
        stopwords: ptr::null(),
        workers: 0,
    }
}

/// Builds an engine, loading any word lists and embeddings named in `options`.
///
/// # Safety
/// `options` and `out` must be valid pointers; string fields must be null or
/// NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn lexmrc_engine_new(options: *const LexmrcOptions, out: *mut *mut LexmrcEngine) -> LexmrcStatus {
    guard(|| {
        let opts = req_ref(options, "options")?;
        let out = req_mut(out, "out")?;
        *out = ptr::null_mut();

        let method: Method = parse(opt_str(opts.method, "method")?, Method::SwD)?;
        let agg: DistanceAggregation = parse(opt_str(opts.distance_agg, "distance_agg")?, DistanceAggregation::Min)?;
        let cfg = MethodConfig {
            method,
            distance_aggregation: agg,
            random_seed: opts.has_seed.then_some(opts.seed),
        };
        cfg.validate()?;

        let store = opt_str(opts.embeddings, "embeddings")?
            .map(EmbeddingStore::load)
            .transpose()?;
        if method.needs_embeddings() && store.is_none() {
            return Err(Error::MissingEmbeddings.into());
        }
        let segmenter = match (opt_str(opts.lexicon, "lexicon")?, &store) {
            (Some(path), _) => Segmenter::LongestMatch(Lexicon::load(path)?),
            (None, Some(s)) => Segmenter::LongestMatch(Lexicon::from_vocabulary(s.words())),
            (None, None) => Segmenter::Whitespace,
        };
        let mut pre = PreprocessConfig::new(segmenter);
        if let Some(path) = opt_str(opts.stopwords, "stopwords")? {
            pre = pre.with_stopwords(read_word_list(path)?);
        }
        let draws = match method {
            Method::Random => Some(Predictor::new(cfg, None)?),
            _ => None,
        };
        let engine = LexmrcEngine {
            cfg,
            pre,
            store,
            workers: opts.workers.max(1) as usize,
            draws,
        };
        *out = Box::into_raw(Box::new(engine));
        Ok(())
    })
}

/// # Safety
/// `engine` must be null or a pointer from [`lexmrc_engine_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lexmrc_engine_free(engine: *mut LexmrcEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// Preprocesses and scores one question against `text`.
///
/// With the random method each call draws the next value from the engine's
/// generator and the component scores are zero.
///
/// # Safety
/// `engine` must be a live engine, `text` and `question` NUL-terminated
/// strings, `options` an array of four NUL-terminated strings and `out` a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lexmrc_engine_predict(
    engine: *mut LexmrcEngine,
    text: *const c_char,
    question: *const c_char,
    options: *const *const c_char,
    out: *mut LexmrcScores,
) -> LexmrcStatus {
    guard(|| {
        let engine = req_mut(engine, "engine")?;
        let text = req_str(text, "text")?;
        let question = req_str(question, "question")?;
        if options.is_null() {
            return Err(Failure::new(LexmrcStatus::NullPointer, "options is null"));
        }
        let mut opts = [""; LEXMRC_NUM_OPTIONS];
        for (i, slot) in opts.iter_mut().enumerate() {
            *slot = req_str(*options.add(i), &format!("options[{i}]"))?;
        }
        let out = req_mut(out, "out")?;

        let evaluator = Evaluator::new(&engine.pre);
        let body = evaluator.prepare_text(text);
        let prepared = evaluator.prepare_question(&McQuestion::new("", "", question, opts, 0, Split::Test));
        let scores = match engine.draws.as_mut() {
            Some(draws) => draws.predict(&body, &prepared.stem, &prepared.options),
            None => Predictor::new(engine.cfg, engine.store.as_ref())?
                .score(&body, &prepared.stem, &prepared.options)
                .expect("deterministic method"),
        };
        *out = LexmrcScores {
            sw: scores.sw,
            dist: scores.dist,
            web: scores.web,
            final_score: scores.final_score,
            predicted: scores.predicted as u32,
        };
        Ok(())
    })
}

/// Loads a dataset file or directory of JSON files.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lexmrc_dataset_load(path: *const c_char, out: *mut *mut LexmrcDataset) -> LexmrcStatus {
    guard(|| {
        let path = req_str(path, "path")?;
        let out = req_mut(out, "out")?;
        *out = ptr::null_mut();
        let inner = load_dataset(path, None)?;
        *out = Box::into_raw(Box::new(LexmrcDataset { inner }));
        Ok(())
    })
}

/// # Safety
/// `dataset` must be null or a pointer from [`lexmrc_dataset_load`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lexmrc_dataset_free(dataset: *mut LexmrcDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Number of texts and questions; either output may be null.
///
/// # Safety
/// `dataset` must be a live dataset; non-null outputs must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn lexmrc_dataset_counts(
    dataset: *const LexmrcDataset,
    texts: *mut usize,
    questions: *mut usize,
) -> LexmrcStatus {
    guard(|| {
        let d = &req_ref(dataset, "dataset")?.inner;
        if let Some(t) = texts.as_mut() {
            *t = d.texts().len();
        }
        if let Some(q) = questions.as_mut() {
            *q = d.questions().len();
        }
        Ok(())
    })
}

/// Evaluates the engine's method on `split` (`train`, `dev`, `test`, or
/// null for every question).
///
/// `accuracy` receives a fraction in `[0, 1]`. When `report_json` is not
/// null it receives the full report as JSON, to be released with
/// [`lexmrc_string_free`].
///
/// # Safety
/// `engine` and `dataset` must be live handles, `split` null or
/// NUL-terminated, `accuracy` valid, `report_json` null or valid.
#[no_mangle]
pub unsafe extern "C" fn lexmrc_engine_evaluate(
    engine: *const LexmrcEngine,
    dataset: *const LexmrcDataset,
    split: *const c_char,
    accuracy: *mut f64,
    report_json: *mut *mut c_char,
) -> LexmrcStatus {
    guard(|| {
        let engine = req_ref(engine, "engine")?;
        let d = &req_ref(dataset, "dataset")?.inner;
        let split: Option<Split> = opt_str(split, "split")?.map(str::parse).transpose()?;
        let accuracy = req_mut(accuracy, "accuracy")?;
        if let Some(slot) = report_json.as_mut() {
            *slot = ptr::null_mut();
        }
        let report = Evaluator::new(&engine.pre)
            .with_store(engine.store.as_ref())
            .with_workers(engine.workers)
            .evaluate(d, split, &engine.cfg)?;
        *accuracy = report.accuracy;
        if let Some(slot) = report_json.as_mut() {
            *slot = into_c_string(report.render(lexmrc::Format::Json));
        }
        Ok(())
    })
}

/// Message describing the last failure on this thread, or null. The pointer
/// stays valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn lexmrc_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library, freed only once.
#[no_mangle]
pub unsafe extern "C" fn lexmrc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn lexmrc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
