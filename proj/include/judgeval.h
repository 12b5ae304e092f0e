/*
 * judgeval C API.
 *
 * Every function returns a jv_status. On failure a description of the most
 * recent error on the calling thread is available from jv_last_error().
 * Objects are opaque handles released with their matching *_free function.
 * Strings returned through char** are owned by the caller and released with
 * jv_string_free(); strings returned through const char** stay valid for the
 * lifetime of the handle they came from.
 */
#ifndef JUDGEVAL_H
#define JUDGEVAL_H

#include <stddef.h>
#include <stdint.h>

#if defined(JUDGEVAL_BUILDING_LIBRARY)
#define JV_API __attribute__((visibility("default")))
#else
#define JV_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum jv_status {
    JV_OK = 0,
    JV_ERR_INVALID_ARGUMENT = 1,
    JV_ERR_UNKNOWN_TEMPLATE = 2,
    JV_ERR_EMPTY_FIELD = 3,
    JV_ERR_CHECKSUM_MISMATCH = 4,
    JV_ERR_FORMAT = 5,
    JV_ERR_DUPLICATE_ID = 6,
    JV_ERR_IO = 7,
    JV_ERR_BACKEND_UNAVAILABLE = 8,
    JV_ERR_AUTH_MISSING = 9,
    JV_ERR_NO_SCORE = 10,
    JV_ERR_INSUFFICIENT_DATA = 11,
    /* The coefficient is undefined for this data (e.g. a constant series). */
    JV_ERR_UNDEFINED = 12,
    JV_ERR_INTERNAL = 99
} jv_status;

typedef enum jv_kendall_variant { JV_TAU_A = 0, JV_TAU_B = 1 } jv_kendall_variant;

typedef struct jv_registry jv_registry;
typedef struct jv_backend jv_backend;
typedef struct jv_report jv_report;

typedef struct jv_run_stats {
    uint64_t tasks;
    uint64_t resumed;
    uint64_t backend_calls;
    uint64_t cache_hits;
    uint64_t scored;
    uint64_t failed;
} jv_run_stats;

JV_API const char* jv_version(void);
JV_API const char* jv_status_name(jv_status status);
/* Message for the last failing call on this thread; "" if none. */
JV_API const char* jv_last_error(void);
JV_API void jv_string_free(char* str);
/* Diagnostics go to stderr. level is one of "debug", "info" (default),
 * "warn", "error", "off". */
JV_API jv_status jv_set_log_level(const char* level);

/* ---- prompt registry ---------------------------------------------------- */

/* Templates compiled into the library. */
JV_API jv_status jv_registry_open_builtin(jv_registry** out);
/* A prompts directory holding manifest.json and P1.txt..P6.txt. */
JV_API jv_status jv_registry_open_dir(const char* dir, jv_registry** out);
JV_API void jv_registry_free(jv_registry* registry);

JV_API size_t jv_registry_count(const jv_registry* registry);
JV_API jv_status jv_registry_id_at(const jv_registry* registry, size_t index, const char** out_id);
JV_API jv_status jv_template_body(const jv_registry* registry, const char* id, const char** out_body);
/* "zero_shot" or "few_shot". */
JV_API jv_status jv_template_strategy(const jv_registry* registry, const char* id,
                                      const char** out_strategy);
JV_API jv_status jv_template_requests_explanation(const jv_registry* registry, const char* id,
                                                  int* out_flag);

/* max_source_chars == 0 disables truncation. out_truncated may be NULL. */
JV_API jv_status jv_render(const jv_registry* registry, const char* id, const char* source,
                           const char* summary, size_t max_source_chars, char** out_text,
                           int* out_truncated);
/* Content digest of a (source, summary) pair, the key used by mock scripts. */
JV_API jv_status jv_item_hash(const char* source, const char* summary, char** out_hex);

/* ---- score extraction --------------------------------------------------- */

/* out_ambiguous, out_begin and out_end may be NULL. Returns JV_ERR_NO_SCORE
 * when the text holds no standalone 0..100 token. */
JV_API jv_status jv_extract_score(const char* text, int* out_score, int* out_ambiguous,
                                  size_t* out_begin, size_t* out_end);
/* *out_text is NULL when there is no explanation. */
JV_API jv_status jv_extract_explanation(const char* text, char** out_text);

/* ---- correlation -------------------------------------------------------- */

/* An undefined coefficient returns JV_ERR_UNDEFINED and stores NaN. */

JV_API jv_status jv_kendall_tau(const double* metric, const double* human, size_t n,
                                jv_kendall_variant variant, double* out);
JV_API jv_status jv_pearson(const double* metric, const double* human, size_t n, double* out);
JV_API jv_status jv_spearman(const double* metric, const double* human, size_t n, double* out);

/* ---- backends ----------------------------------------------------------- */

/* OpenAI-compatible HTTP backend; endpoint and model come from the run
 * configuration. */
JV_API jv_status jv_backend_http(jv_backend** out);
/* Scripted backend. script_json maps item hashes (jv_item_hash) to a reply
 * string or an array of replies served in order. */
JV_API jv_status jv_backend_mock(const char* script_json, jv_backend** out);
JV_API void jv_backend_free(jv_backend* backend);
/* Calls that reached a mock backend; 0 for HTTP backends. */
JV_API uint64_t jv_backend_call_count(const jv_backend* backend);

/* ---- runs and reports --------------------------------------------------- */

/* config_json keys: dataset (required), dataset_format, prompts (array of
 * ids, required), cache_dir (required), records, concurrency,
 * explanations (bool), rescore_attempts, max_source_chars, tau ("a"/"b"),
 * flush_every, and backend {endpoint, model, max_new_tokens,
 * explanation_max_new_tokens, temperature, timeout_ms, max_retries,
 * auth_env, system_message, pattern_hint_field, initial_backoff_ms}. */
JV_API jv_status jv_run(const char* config_json, jv_backend* backend, jv_report** out);

/* Recomputes a report from a record file and its dataset. dataset_format may
 * be NULL to guess from the extension. */
JV_API jv_status jv_report_from_records(const char* records_path, const char* dataset_path,
                                        const char* dataset_format, jv_kendall_variant variant,
                                        jv_report** out);
JV_API void jv_report_free(jv_report* report);

JV_API jv_status jv_report_json(const jv_report* report, char** out_json);
JV_API jv_status jv_report_table(const jv_report* report, char** out_table);
/* 1 when every row has all three coefficients defined. */
JV_API int jv_report_all_defined(const jv_report* report);
/* Zeroed for reports that did not come from jv_run. */
JV_API jv_status jv_report_run_stats(const jv_report* report, jv_run_stats* out);

#ifdef __cplusplus
}
#endif

#endif /* JUDGEVAL_H */
