#ifndef CHATVIS_CHATVIS_H
#define CHATVIS_CHATVIS_H

/* C interface to the chatvis pipeline: documentation ingestion, retrieval,
 * script generation with a correction loop, benchmarking and image scoring.
 *
 * Conventions:
 *  - Every function returns a cv_status; CV_OK means success.
 *  - On failure cv_last_error() describes the problem. The message is
 *    thread-local and valid until the next call on the same thread.
 *  - Results come back as UTF-8 JSON strings owned by the caller and
 *    released with cv_free().
 *  - Handles are opaque. A cv_context may be shared by threads for
 *    read-only calls; cv_context_set and friends must not race with them.
 */

#include <stddef.h>

#if defined(_WIN32)
#define CV_API
#elif defined(CHATVIS_BUILDING_LIBRARY)
#define CV_API __attribute__((visibility("default")))
#else
#define CV_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cv_status {
    CV_OK = 0,
    CV_E_INVALID_ARGUMENT = 1,
    CV_E_ROOT_NOT_FOUND = 2,
    CV_E_UNREADABLE_FILE = 3,
    CV_E_EMPTY_TEXT = 4,
    CV_E_PROVIDER_UNAVAILABLE = 5,
    CV_E_DIMENSION_MISMATCH = 6,
    CV_E_IO = 7,
    CV_E_CORRUPT_INDEX = 8,
    CV_E_EMBEDDER_MISMATCH = 9,
    CV_E_ENDPOINT_UNREACHABLE = 10,
    CV_E_AUTH = 11,
    CV_E_RATE_LIMITED = 12,
    CV_E_TRANSCRIPT_MISS = 13,
    CV_E_MALFORMED_RESPONSE = 14,
    CV_E_NO_OPERATIONS = 15,
    CV_E_UNRESOLVED_CHUNK = 16,
    CV_E_EMPTY_REPLY = 17,
    CV_E_INTERPRETER_NOT_FOUND = 18,
    CV_E_WORK_DIR_UNWRITABLE = 19,
    CV_E_SHAPE_MISMATCH = 20,
    CV_E_TOO_SMALL = 21,
    CV_E_PLUGIN_MISSING = 22,
    CV_E_PLUGIN_MALFORMED_OUTPUT = 23,
    CV_E_EMPTY_INPUT = 24,
    CV_E_MANIFEST_INVALID = 25,
    CV_E_MISSING_ASSET = 26,
    CV_E_INTERNAL = 99
} cv_status;

typedef struct cv_context cv_context;
typedef struct cv_index cv_index;

CV_API const char* cv_version(void);
CV_API const char* cv_status_name(cv_status status);
CV_API const char* cv_last_error(void);
CV_API void cv_free(char* text);

/* Context: configuration shared by all operations. Settings start at their
 * defaults; later calls override earlier ones, so apply a config file, then
 * the environment, then explicit settings to get that precedence.
 *
 * Keys (all values are strings):
 *   model, base_url, interpreter, timeout, max_iterations, prompts_dir,
 *   embedder ("fallback" or "remote:<model>"), k, context_budget,
 *   kind_filter ("api-doc", "code-snippet" or ""), chunk_max_lines,
 *   chunk_overlap, transcript, replay_mode ("ordered" or "digest"), record,
 *   transcripts_dir, record_dir, lpips_plugin, resize, jobs,
 *   max_in_flight, max_retries.
 * The API key is read from LLM_API_KEY only and is never a setting. */
CV_API cv_status cv_context_create(cv_context** out);
CV_API void cv_context_destroy(cv_context* ctx);
CV_API cv_status cv_context_set(cv_context* ctx, const char* key, const char* value);
/* Reads a TOML file of the same keys (top level or under [chatvis]). */
CV_API cv_status cv_context_load_config(cv_context* ctx, const char* path);
/* LLM_BASE_URL, LLM_MODEL, LLM_API_KEY and CHATVIS_INTERPRETER. */
CV_API cv_status cv_context_load_env(cv_context* ctx);
/* Effective settings as a JSON object (the API key is reported as present or not). */
CV_API cv_status cv_context_dump(const cv_context* ctx, char** out_json);

/* Chunks docs_dir, embeds every chunk and writes the index to index_path and
 * the chunk store next to it (index_path + ".chunks.jsonl"). */
CV_API cv_status cv_ingest(cv_context* ctx, const char* docs_dir, const char* index_path, char** out_json);

CV_API cv_status cv_index_open(cv_context* ctx, const char* index_path, cv_index** out);
CV_API void cv_index_close(cv_index* index);
/* JSON array of {chunk_id, score, kind, symbol, source_path}. kind may be NULL. */
CV_API cv_status cv_index_search(cv_index* index, const char* query, size_t k, const char* kind, char** out_json);

/* One generation session. mode is "rag" (index required) or "fewshot"
 * (index ignored). The script, artifacts and session.json land in out_dir.
 * expected_artifact may be NULL. CV_OK is returned whenever the session ran;
 * its outcome is the "status" field of the returned session JSON. */
CV_API cv_status cv_generate(cv_context* ctx, const char* prompt, const char* mode, cv_index* index,
                             const char* out_dir, const char* expected_artifact, char** out_json);

/* Runs the suite for every (mode, variant) pair. modes and variants are
 * comma-separated ("rag,fewshot", "full,quick"). Reports are written to
 * out_dir as report.md, report.csv and report.json; the json is returned. */
CV_API cv_status cv_bench(cv_context* ctx, const char* suite_dir, const char* modes, const char* variants,
                          cv_index* index, const char* out_dir, char** out_json);

/* {"psnr", "ssim", "lpips"} for two PNG files; psnr may be the string "inf",
 * lpips is null without a configured plugin. */
CV_API cv_status cv_score(cv_context* ctx, const char* image_a, const char* image_b, char** out_json);

/* Parses interpreter output into a JSON array of traceback records. */
CV_API cv_status cv_extract_errors(const char* log_text, char** out_json);

#ifdef __cplusplus
}
#endif

#endif
