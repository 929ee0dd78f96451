#ifndef LEXMRC_H
#define LEXMRC_H

/* C interface to lexmrc-ffi. Regenerate with `cargo build -p lexmrc-ffi --features header`; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Answer options per question.
 */
#define LEXMRC_NUM_OPTIONS 4

/**
 * Result of every fallible call.
 */
typedef enum LexmrcStatus {
  LEXMRC_STATUS_OK = 0,
  LEXMRC_STATUS_NULL_POINTER = 1,
  LEXMRC_STATUS_INVALID_UTF8 = 2,
  LEXMRC_STATUS_IO = 3,
  LEXMRC_STATUS_PARSE = 4,
  LEXMRC_STATUS_VALIDATION = 5,
  LEXMRC_STATUS_CONFIG = 6,
  LEXMRC_STATUS_PANIC = 7,
} LexmrcStatus;

/**
 * Opaque loaded dataset.
 */
typedef struct LexmrcDataset LexmrcDataset;

/**
 * Opaque scoring engine.
 */
typedef struct LexmrcEngine LexmrcEngine;

/**
 * Engine settings. Null strings and zero workers select the defaults.
 */
typedef struct LexmrcOptions {
  /**
   * `random`, `sw`, `sw_d` (default) or `sw_d_web`.
   */
  const char *method;
  /**
   * `min` (default) or `max`.
   */
  const char *distance_agg;
  bool has_seed;
  uint64_t seed;
  /**
   * Word-vector file; required for `sw_d_web`.
   */
  const char *embeddings;
  /**
   * Compound-word list for segmentation.
   */
  const char *lexicon;
  /**
   * Stopword list, one word per line.
   */
  const char *stopwords;
  uint32_t workers;
} LexmrcOptions;

/**
 * Per-option component scores of one question.
 */
typedef struct LexmrcScores {
  double sw[LEXMRC_NUM_OPTIONS];
  double dist[LEXMRC_NUM_OPTIONS];
  double web[LEXMRC_NUM_OPTIONS];
  double final_score[LEXMRC_NUM_OPTIONS];
  /**
   * Chosen option, 0 for A through 3 for D.
   */
  uint32_t predicted;
} LexmrcScores;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Options with every field at its default.
 */
struct LexmrcOptions lexmrc_options_default(void);

/**
 * Builds an engine, loading any word lists and embeddings named in `options`.
 *
 * # Safety
 * `options` and `out` must be valid pointers; string fields must be null or
 * NUL-terminated.
 */
enum LexmrcStatus lexmrc_engine_new(const struct LexmrcOptions *options, struct LexmrcEngine **out);

/**
 * # Safety
 * `engine` must be null or a pointer from [`lexmrc_engine_new`] not yet freed.
 */
void lexmrc_engine_free(struct LexmrcEngine *engine);

/**
 * Preprocesses and scores one question against `text`.
 *
 * With the random method each call draws the next value from the engine's
 * generator and the component scores are zero.
 *
 * # Safety
 * `engine` must be a live engine, `text` and `question` NUL-terminated
 * strings, `options` an array of four NUL-terminated strings and `out` a
 * valid pointer.
 */
enum LexmrcStatus lexmrc_engine_predict(struct LexmrcEngine *engine,
                                        const char *text,
                                        const char *question,
                                        const char *const *options,
                                        struct LexmrcScores *out);

/**
 * Loads a dataset file or directory of JSON files.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum LexmrcStatus lexmrc_dataset_load(const char *path, struct LexmrcDataset **out);

/**
 * # Safety
 * `dataset` must be null or a pointer from [`lexmrc_dataset_load`] not yet freed.
 */
void lexmrc_dataset_free(struct LexmrcDataset *dataset);

/**
 * Number of texts and questions; either output may be null.
 *
 * # Safety
 * `dataset` must be a live dataset; non-null outputs must be valid pointers.
 */
enum LexmrcStatus lexmrc_dataset_counts(const struct LexmrcDataset *dataset,
                                        size_t *texts,
                                        size_t *questions);

/**
 * Evaluates the engine's method on `split` (`train`, `dev`, `test`, or
 * null for every question).
 *
 * `accuracy` receives a fraction in `[0, 1]`. When `report_json` is not
 * null it receives the full report as JSON, to be released with
 * [`lexmrc_string_free`].
 *
 * # Safety
 * `engine` and `dataset` must be live handles, `split` null or
 * NUL-terminated, `accuracy` valid, `report_json` null or valid.
 */
enum LexmrcStatus lexmrc_engine_evaluate(const struct LexmrcEngine *engine,
                                         const struct LexmrcDataset *dataset,
                                         const char *split,
                                         double *accuracy,
                                         char **report_json);

/**
 * Message describing the last failure on this thread, or null. The pointer
 * stays valid until the next call into this library from the same thread.
 */
const char *lexmrc_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, freed only once.
 */
void lexmrc_string_free(char *s);

/**
 * Library version as a static string.
 */
const char *lexmrc_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LEXMRC_H */
