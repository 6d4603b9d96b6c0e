/*
 * Copyright 2026 The wssp Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the wssp toolkit: post-link WebAssembly SSP hardening,
 * static robustness audits, and a WASI-preview1 execution harness with
 * controllable randomness. Handles are opaque; every function returns a
 * status code and leaves a message for wssp_last_error(). Strings and
 * buffers returned through out-parameters are released with wssp_free().
 */

#ifndef WSSP_H
#define WSSP_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum wssp_status {
  WSSP_OK = 0,
  WSSP_ERR_INVALID_ARG = 1,
  WSSP_ERR_IO = 2,
  WSSP_ERR_MALFORMED = 3,          /* bytes are not a decodable module */
  WSSP_ERR_VALIDATION = 4,         /* module decodes but fails validation */
  WSSP_ERR_INSTRUMENT = 5,         /* instrumentation pass failed */
  WSSP_ERR_AMBIGUOUS_SP = 6,       /* several stack-pointer candidates; need override */
  WSSP_ERR_ALREADY_INSTRUMENTED = 7,
  WSSP_ERR_IMPORT_NOT_FOUND = 8,   /* fault injection without random_get import */
  WSSP_ERR_ENGINE_REJECT = 9,      /* embedded engine refuses the module */
  WSSP_ERR_INTERNAL = 10,
} wssp_status;

typedef struct wssp_module wssp_module;

/* Most recent error message on this thread; valid until the next API call. */
const char* wssp_last_error(void);

/* Releases any buffer or string returned by this API. */
void wssp_free(void* p);

wssp_status wssp_module_decode(const uint8_t* bytes, size_t len, wssp_module** out);
wssp_status wssp_module_read(const char* path, wssp_module** out);
wssp_status wssp_module_encode(const wssp_module* m, uint8_t** bytes, size_t* len);
wssp_status wssp_module_write(const wssp_module* m, const char* path);
void wssp_module_free(wssp_module* m);

/* Structural violations as a JSON array (empty array = clean). */
wssp_status wssp_module_validate(const wssp_module* m, char** violations_json);

typedef struct wssp_instrument_options {
  int heuristic;      /* nonzero: only frames >= threshold */
  uint32_t threshold; /* bytes, default 8 */
  int legacy;         /* nonzero: baseline linear-memory scheme */
  int debug_export;   /* nonzero: export the guard as "__ssp_debug_guard" */
  int32_t sp_global;  /* -1 = autodetect */
} wssp_instrument_options;

wssp_status wssp_instrument(const wssp_module* m, const wssp_instrument_options* opts,
                            wssp_module** out, char** summary_json);

/* Replaces the wasi random_get import with a stub returning errno 1. */
wssp_status wssp_inject_fault_random(const wssp_module* m, wssp_module** out);

wssp_status wssp_analyze_layout(const wssp_module* m, char** report_json);

/* exit_hint: 0 all pass, 2 any fail, 3 unknown without fails. */
wssp_status wssp_audit(const wssp_module* m, char** report_json, int* exit_hint);

typedef enum wssp_random_mode {
  WSSP_RANDOM_HOST = 0,
  WSSP_RANDOM_FIXED = 1,
  WSSP_RANDOM_FAIL = 2,
} wssp_random_mode;

typedef enum wssp_outcome {
  WSSP_OUTCOME_SILENT = 0,
  WSSP_OUTCOME_MEMORY_FAULT = 1,
  WSSP_OUTCOME_SSP_FAULT = 2,
  WSSP_OUTCOME_TIMEOUT = 3,
  WSSP_OUTCOME_STARTUP_ABORT = 4,
} wssp_outcome;

typedef struct wssp_run_options {
  int random_mode;           /* wssp_random_mode */
  const uint8_t* fixed_bytes;
  size_t fixed_len;
  uint32_t timeout_ms;       /* 0 = default (20000) */
  uint64_t fuel;             /* instruction budget, 0 = unlimited */
  const uint8_t* stdin_bytes;
  size_t stdin_len;
  int64_t probe_addr;        /* >= 0: read an i32 from memory after the run */
} wssp_run_options;

wssp_status wssp_run(const wssp_module* m, const wssp_run_options* opts, char** outcome_json,
                     int* outcome);

/* Writes the synthetic guest corpus and its manifest into dir. */
wssp_status wssp_corpus_generate(const char* dir, char** manifest_json);

typedef struct wssp_eval_options {
  const char* corpus_dir;  /* loaded when it holds a manifest, generated otherwise */
  const char* report_path; /* optional: JSON report destination */
  unsigned jobs;           /* 0 or 1 = sequential */
  uint64_t fuel;
} wssp_eval_options;

wssp_status wssp_eval(const wssp_eval_options* opts, char** report_json, char** table_text,
                      uint64_t* mismatches);

#ifdef __cplusplus
}
#endif

#endif /* WSSP_H */
