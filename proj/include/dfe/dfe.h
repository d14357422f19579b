// Copyright 2026 The DFE Offload Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface of the DFE offload library. Every object is an opaque handle
 * owned by the caller and released with its _free function. Functions return
 * DFE_OK or an error status; the message (and, for kernel sources, the
 * position) of the last failure on the calling thread is available through
 * dfe_last_error_*. Strings and buffers returned through out-parameters are
 * heap-allocated and released with dfe_string_free / dfe_buffer_free. */

#ifndef DFE_DFE_H
#define DFE_DFE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(DFE_BUILDING_LIBRARY)
#define DFE_API __declspec(dllexport)
#else
#define DFE_API __declspec(dllimport)
#endif
#else
#define DFE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dfe_status {
  DFE_OK = 0,
  DFE_ERR_INVALID_ARGUMENT = 1,
  DFE_ERR_SYNTAX = 2,
  DFE_ERR_UNKNOWN_IDENTIFIER = 3,
  DFE_ERR_UNROLL_TOO_LARGE = 4,
  DFE_ERR_LENGTH_MISMATCH = 5,
  DFE_ERR_UNKNOWN_INPUT = 6,
  DFE_ERR_OUT_OF_BOUNDS = 7,
  DFE_ERR_UNCONFIGURED_TAG = 8,
  DFE_ERR_UNROUTED_PORT = 9,
  DFE_ERR_NO_PATH = 10,
  DFE_ERR_UNROUTABLE = 11,
  DFE_ERR_PRECONDITION_VIOLATED = 12,
  DFE_ERR_FORMAT = 13,
  DFE_ERR_IO = 14,
  DFE_ERR_INVALID_CONFIG = 15,
  DFE_ERR_NOT_ELIGIBLE = 16,
  DFE_ERR_INTERNAL = 17
} dfe_status;

typedef struct dfe_kernel dfe_kernel;
typedef struct dfe_dfg dfe_dfg;
typedef struct dfe_config dfe_config;
typedef struct dfe_placement dfe_placement;
typedef struct dfe_arrays dfe_arrays;
typedef struct dfe_runtime dfe_runtime;

/* ---- errors and memory ------------------------------------------------ */

DFE_API const char *dfe_version(void);
DFE_API const char *dfe_status_name(dfe_status status);
/* Empty string when the last call on this thread succeeded. */
DFE_API const char *dfe_last_error_message(void);
/* 1-based source position of the last kernel parse error, 0 otherwise. */
DFE_API int dfe_last_error_line(void);
DFE_API int dfe_last_error_column(void);
DFE_API void dfe_string_free(char *s);
DFE_API void dfe_buffer_free(uint8_t *buf);

/* Parameter bindings: `count` names with their values. */
typedef struct dfe_params {
  const char *const *names;
  const int64_t *values;
  size_t count;
} dfe_params;

/* ---- kernels ------------------------------------------------------------ */

DFE_API dfe_status dfe_kernel_parse(const char *source, size_t length, dfe_kernel **out);
DFE_API dfe_status dfe_kernel_load(const char *path, dfe_kernel **out);
DFE_API void dfe_kernel_free(dfe_kernel *k);
DFE_API dfe_status dfe_kernel_name(const dfe_kernel *k, char **out);
DFE_API dfe_status dfe_kernel_print(const dfe_kernel *k, char **out);
DFE_API size_t dfe_kernel_param_count(const dfe_kernel *k);
/* Borrowed pointer, valid while `k` lives. */
DFE_API const char *dfe_kernel_param_name(const dfe_kernel *k, size_t i);

/* ---- eligibility -------------------------------------------------------- */

typedef enum dfe_reason {
  DFE_REASON_NONE = 0,
  DFE_REASON_DIVISION = 1,
  DFE_REASON_FLOATING_POINT = 2,
  DFE_REASON_TOO_SMALL = 3,
  DFE_REASON_TOO_LARGE = 4,
  DFE_REASON_NON_AFFINE = 5,
  DFE_REASON_UNSUPPORTED_OP = 6
} dfe_reason;

DFE_API const char *dfe_reason_name(dfe_reason reason);
/* "Yes", "No, divisions", ... */
DFE_API const char *dfe_reason_label(dfe_reason reason);

typedef struct dfe_stats {
  size_t inputs;
  size_t outputs;
  size_t calc_nodes;
  size_t consts;
} dfe_stats;

typedef struct dfe_thresholds {
  size_t min_calc_nodes;
  size_t max_calc_nodes; /* 0 means unbounded */
} dfe_thresholds;

typedef struct dfe_eligibility {
  int accepted;
  dfe_reason reason;
  int has_stats;
  dfe_stats stats;
} dfe_eligibility;

/* `detail` may be NULL. */
DFE_API dfe_status dfe_check_eligibility(const dfe_kernel *k, const dfe_thresholds *t,
                                         dfe_eligibility *out, char **detail);

/* ---- data flow graphs --------------------------------------------------- */

/* `max_calc_nodes` 0 means unbounded. */
DFE_API dfe_status dfe_extract_dfg(const dfe_kernel *k, int64_t unroll, size_t max_calc_nodes,
                                   dfe_dfg **out);
DFE_API void dfe_dfg_free(dfe_dfg *g);
/* Replaces scalar parameter inputs by constants. */
DFE_API dfe_status dfe_dfg_fold_params(dfe_dfg *g, const dfe_params *params);
DFE_API dfe_status dfe_dfg_stats(const dfe_dfg *g, dfe_stats *out);
DFE_API dfe_status dfe_dfg_hash(const dfe_dfg *g, uint64_t *out);
DFE_API dfe_status dfe_dfg_to_text(const dfe_dfg *g, char **out);
DFE_API dfe_status dfe_dfg_from_text(const char *text, size_t length, dfe_dfg **out);
DFE_API dfe_status dfe_dfg_to_dot(const dfe_dfg *g, char **out);
/* Stream positions of the unrolled steady state and the innermost
 * iterations left to software. */
DFE_API dfe_status dfe_dfg_iterations(const dfe_dfg *g, const dfe_params *params,
                                      uint64_t *steady, int64_t *remainder);

/* ---- place & route ------------------------------------------------------ */

typedef struct dfe_placer_params {
  double sigma; /* <= 0 selects min(R,C)/4 */
  double affinity_bonus;
  double io_weight;
  int max_position_attempts;
  int max_node_restarts;
  int backtrack_max_depth; /* <= 0 selects a quarter of the placed nodes */
  uint64_t global_budget;
} dfe_placer_params;

DFE_API void dfe_placer_params_default(dfe_placer_params *out);

typedef struct dfe_attempts {
  uint64_t iterations;
  uint64_t position_retries;
  uint64_t node_restarts;
  uint64_t global_backtracks;
} dfe_attempts;

/* DFE_ERR_UNROUTABLE or DFE_ERR_PRECONDITION_VIOLATED leave *out NULL but
 * fill `attempts` (which may be NULL). */
DFE_API dfe_status dfe_place(const dfe_dfg *g, int rows, int cols, const dfe_placer_params *params,
                             uint64_t seed, dfe_placement **out, dfe_attempts *attempts);
DFE_API void dfe_placement_free(dfe_placement *p);
DFE_API dfe_status dfe_placement_config(const dfe_placement *p, dfe_config **out);
DFE_API dfe_status dfe_placement_sidecar(const dfe_placement *p, char **out);
/* The legalized graph that was mapped. */
DFE_API dfe_status dfe_placement_graph(const dfe_placement *p, dfe_dfg **out);

/* ---- overlay configurations --------------------------------------------- */

DFE_API void dfe_config_free(dfe_config *c);
DFE_API dfe_status dfe_config_shape(const dfe_config *c, int *rows, int *cols);
DFE_API dfe_status dfe_config_serialize(const dfe_config *c, uint8_t **buf, size_t *length);
DFE_API dfe_status dfe_config_deserialize(const uint8_t *buf, size_t length, dfe_config **out);
/* `report` (may be NULL) lists one violation per line. */
DFE_API dfe_status dfe_config_validate(const dfe_config *c, size_t *violations, char **report);
DFE_API dfe_status dfe_config_to_text(const dfe_config *c, char **out);
DFE_API dfe_status dfe_config_to_dot(const dfe_config *c, char **out);

/* ---- arrays and software reference -------------------------------------- */

DFE_API dfe_status dfe_arrays_allocate(const dfe_kernel *k, const dfe_params *params,
                                       dfe_arrays **out);
DFE_API dfe_status dfe_arrays_clone(const dfe_arrays *a, dfe_arrays **out);
DFE_API void dfe_arrays_free(dfe_arrays *a);
DFE_API size_t dfe_arrays_count(const dfe_arrays *a);
/* Borrowed pointer, valid while `a` lives. */
DFE_API const char *dfe_arrays_name(const dfe_arrays *a, size_t i);
/* Row-major element storage, writable, valid while `a` lives. */
DFE_API dfe_status dfe_arrays_data(dfe_arrays *a, const char *name, int32_t **data, size_t *length);
/* Uniform values in [lo, hi] from a seeded generator. */
DFE_API dfe_status dfe_arrays_fill_random(dfe_arrays *a, uint64_t seed, int32_t lo, int32_t hi);
DFE_API int dfe_arrays_equal(const dfe_arrays *a, const dfe_arrays *b);
DFE_API dfe_status dfe_software_run(const dfe_kernel *k, dfe_arrays *a, const dfe_params *params);

/* ---- simulation --------------------------------------------------------- */

typedef struct dfe_run_report {
  uint64_t frames_in;
  uint64_t frames_out;
  uint64_t cycles;
  uint64_t bytes_on_wire;
  int route_depth;
} dfe_run_report;

/* Streams the arrays through the placed overlay and writes the outputs back
 * (steady state only; leftover innermost iterations are not executed). */
DFE_API dfe_status dfe_simulate(const dfe_placement *p, dfe_arrays *a, const dfe_params *params,
                                dfe_run_report *report);
/* Wire capture of the input side: constant preloads, then data frames. */
DFE_API dfe_status dfe_input_frames(const dfe_placement *p, const dfe_arrays *a,
                                    const dfe_params *params, uint8_t **buf, size_t *length);
/* Runs a wire capture through a configuration; returns the output frames. */
DFE_API dfe_status dfe_run_frames(const dfe_config *c, const uint8_t *frames, size_t length,
                                  uint8_t **out, size_t *out_length, dfe_run_report *report);

/* ---- runtime ------------------------------------------------------------ */

typedef enum dfe_offload_mode {
  DFE_MODE_ADAPTIVE = 0,
  DFE_MODE_EAGER = 1,
  DFE_MODE_SOFTWARE_ONLY = 2
} dfe_offload_mode;

typedef struct dfe_runtime_config {
  int rows;
  int cols;
  int64_t unroll;
  size_t min_calc_nodes;
  size_t max_calc_nodes; /* 0 selects rows * cols */
  uint64_t seed;
  dfe_placer_params placer;
  double wire_rate;
  double frame_overhead_factor;
  double config_time;
  double const_transfer_time;
  double software_time_per_call; /* 0 measures the software path */
  double margin;
  double ema_alpha;
  int warmup_calls;
  size_t cache_capacity;
  dfe_offload_mode mode;
} dfe_runtime_config;

DFE_API void dfe_runtime_config_default(dfe_runtime_config *out);
/* key=value text; see the README for the keys. */
DFE_API dfe_status dfe_runtime_config_load(dfe_runtime_config *cfg, const char *text, size_t length);
/* DFE_<KEY> environment variables. */
DFE_API dfe_status dfe_runtime_config_env(dfe_runtime_config *cfg);

DFE_API double dfe_estimate_offload_time(const dfe_stats *stats, uint64_t n_iterations,
                                         const dfe_runtime_config *cfg, int cached);

typedef enum dfe_exec_path {
  DFE_PATH_OFFLOADED = 0,
  DFE_PATH_SOFTWARE = 1,
  DFE_PATH_REJECTED = 2,
  DFE_PATH_UNROUTABLE = 3,
  DFE_PATH_ROLLED_BACK = 4
} dfe_exec_path;

DFE_API const char *dfe_exec_path_name(dfe_exec_path path);

typedef enum dfe_state_mode {
  DFE_STATE_SOFTWARE = 0,
  DFE_STATE_OFFLOADED = 1,
  DFE_STATE_ROLLED_BACK = 2
} dfe_state_mode;

typedef struct dfe_exec_result {
  dfe_exec_path path;
  dfe_reason reason;
  int cache_hit;
  int has_run;
  dfe_run_report run;
  double modeled_offload_time;
  double software_time;
  int has_hash;
  uint64_t dfg_hash;
} dfe_exec_result;

DFE_API dfe_status dfe_runtime_create(const dfe_runtime_config *cfg, dfe_runtime **out);
DFE_API void dfe_runtime_free(dfe_runtime *rt);
/* `trace` (may be NULL) receives "<t_us> <phase> <detail>" lines. */
DFE_API dfe_status dfe_runtime_execute(dfe_runtime *rt, const dfe_kernel *k, dfe_arrays *a,
                                       const dfe_params *params, dfe_exec_result *result,
                                       char **trace);
DFE_API dfe_status dfe_runtime_state(const dfe_runtime *rt, uint64_t dfg_hash,
                                     dfe_state_mode *mode, uint64_t *calls);
DFE_API void dfe_runtime_reset(dfe_runtime *rt, uint64_t dfg_hash);

#ifdef __cplusplus
}
#endif

#endif /* DFE_DFE_H */
