/*
 * C interface to the resuscitation trainer core.
 *
 * Objects are opaque handles created and released through this API. Every
 * fallible call returns a retain_status; on failure, retain_last_error()
 * describes the problem for the calling thread. Strings handed out through
 * char** parameters are heap-allocated UTF-8 and must be released with
 * retain_string_free(). Structured results are JSON documents.
 */
#ifndef RETAIN_H
#define RETAIN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(RETAIN_BUILDING_LIBRARY)
#    define RETAIN_API __declspec(dllexport)
#  else
#    define RETAIN_API __declspec(dllimport)
#  endif
#else
#  define RETAIN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum retain_status {
  RETAIN_OK = 0,
  RETAIN_E_INVALID_ARGUMENT = 1,
  RETAIN_E_PARSE = 2,
  RETAIN_E_INVALID_SCENARIO = 3,
  RETAIN_E_NO_SAVE_PATH = 4,
  RETAIN_E_LIBRARY = 5,
  RETAIN_E_SESSION_ENDED = 6,
  RETAIN_E_UNKNOWN_ACTION = 7,
  RETAIN_E_REPLAY_DIVERGENCE = 8,
  RETAIN_E_INVALID_CHOICE = 9,
  RETAIN_E_BUDGET_EXCEEDED = 10,
  RETAIN_E_NOT_FOUND = 11,
  RETAIN_E_NOT_ENDED = 12,
  RETAIN_E_IO = 13,
  RETAIN_E_CONTRACT = 14,
  RETAIN_E_INTERNAL = 15,
  RETAIN_E_CONFLICT = 16
} retain_status;

typedef struct retain_library retain_library;
typedef struct retain_session retain_session;
typedef struct retain_server retain_server;

typedef struct retain_config {
  int max_mistakes;    /* death threshold, >= 1 (default 4) */
  int timing_enforced; /* nonzero enforces per-stage time budgets */
  uint64_t seed;
} retain_config;

typedef struct retain_server_options {
  const char* host;       /* NULL: 127.0.0.1 */
  int port;               /* 0: pick a free port */
  const char* log_dir;    /* NULL: "retain-logs" */
  uint64_t ttl_seconds;   /* idle session expiry; 0: 3600 */
  const char* static_dir; /* optional directory served at "/" */
} retain_server_options;

RETAIN_API const char* retain_version(void);
RETAIN_API const char* retain_status_name(retain_status status);
/* Message for the last failed call on this thread ("" if none). */
RETAIN_API const char* retain_last_error(void);
RETAIN_API void retain_string_free(char* s);
RETAIN_API void retain_config_default(retain_config* config);

/* Scenario libraries ------------------------------------------------------ */

/* Loads and validates every .retain file in a directory. */
RETAIN_API retain_status retain_library_load(const char* directory, retain_library** out);
/* Loads an explicit list of scenario files. */
RETAIN_API retain_status retain_library_load_files(const char* const* paths, size_t count,
                                                   retain_library** out);
RETAIN_API void retain_library_free(retain_library* library);
RETAIN_API size_t retain_library_size(const retain_library* library);
/* {"scenarios":[...], "vocabulary":[...], "warnings":[...]} */
RETAIN_API retain_status retain_library_json(const retain_library* library, char** out_json);
/* Per-scenario metrics and exact survival (null when over node_budget). */
RETAIN_API retain_status retain_library_metrics(const retain_library* library,
                                                uint64_t node_budget, char** out_json);

/* Parses and validates one file. Returns RETAIN_OK when it is clean; the
 * report ({"file","ok","diagnostics":[...]}) is produced for both outcomes
 * except RETAIN_E_NOT_FOUND. */
RETAIN_API retain_status retain_validate_file(const char* path, char** out_report_json);

/* Sessions --------------------------------------------------------------- */

RETAIN_API retain_status retain_session_start(const retain_library* library,
                                              const char* scenario_id,
                                              const retain_config* config, /* NULL: defaults */
                                              retain_session** out);
RETAIN_API void retain_session_free(retain_session* session);
/* Prompt, vitals, menu (with parameter submenus), cue, outcome. */
RETAIN_API retain_status retain_session_view(const retain_session* session, char** out_json);
/* param may be NULL for unparameterized actions. */
RETAIN_API retain_status retain_session_apply(retain_session* session, const char* kind,
                                              const char* param, char** out_feedback_json);
RETAIN_API retain_status retain_session_abandon(retain_session* session);
/* 1 while the session is ongoing, 0 once it has ended. */
RETAIN_API int retain_session_ongoing(const retain_session* session);
RETAIN_API retain_status retain_session_log(const retain_session* session, char** out_jsonl);
RETAIN_API retain_status retain_session_write_log(const retain_session* session,
                                                  const char* path);

/* Analytics -------------------------------------------------------------- */

RETAIN_API retain_status retain_exact_survival(const retain_library* library,
                                               const char* scenario_id,
                                               const retain_config* config,
                                               uint64_t node_budget, double* out_probability);
/* {"scenario","trials","seed","probability","standard_error","rng"} */
RETAIN_API retain_status retain_simulate(const retain_library* library, const char* scenario_id,
                                         uint64_t trials, uint64_t seed,
                                         const retain_config* config, unsigned threads,
                                         char** out_json);
/* Debrief for a JSON Lines log; structured != 0 yields JSON, else text. */
RETAIN_API retain_status retain_debrief(const retain_library* library, const char* log_jsonl,
                                        int structured, char** out);

/* Session service -------------------------------------------------------- */

RETAIN_API retain_status retain_server_create(const char* library_dir,
                                              const retain_server_options* options,
                                              retain_server** out);
/* Port actually bound. */
RETAIN_API int retain_server_port(const retain_server* server);
/* Blocks until retain_server_stop() is called from another thread. */
RETAIN_API retain_status retain_server_run(retain_server* server);
RETAIN_API void retain_server_stop(retain_server* server);
RETAIN_API void retain_server_free(retain_server* server);

#ifdef __cplusplus
}
#endif

#endif /* RETAIN_H */
