#ifndef SCHELLING_H
#define SCHELLING_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum SchellingStatus {
  SCHELLING_STATUS_OK = 0,
  SCHELLING_STATUS_NULL_POINTER = 1,
  SCHELLING_STATUS_INVALID_ARGUMENT = 2,
  SCHELLING_STATUS_UNKNOWN_SWEEP = 3,
  SCHELLING_STATUS_IO = 4,
  SCHELLING_STATUS_PANIC = 5,
} SchellingStatus;

typedef enum SchellingWiring {
  // Each agent initiates `initial_degree` links.
  SCHELLING_WIRING_PER_AGENT = 0,
  // Exactly `n * initial_degree / 2` uniformly placed edges.
  SCHELLING_WIRING_EXACT_MEAN = 1,
} SchellingWiring;

// Undirected simple graph.
typedef struct SchellingNetwork SchellingNetwork;

// Finished run.
typedef struct SchellingRun SchellingRun;

// Model parameters. Fill with `schelling_params_default` and adjust.
typedef struct SchellingParams {
  uint32_t n;
  uint32_t initial_degree;
  enum SchellingWiring wiring;
  uint32_t degree_floor;
  // Tolerances in [0, 1] on a 0.01 grid.
  double t1;
  double t2;
  // Fraction of agents in group one, in (0, 0.5].
  double small_fraction;
  uint32_t max_steps;
} SchellingParams;

// Scalar outcome of one run.
typedef struct SchellingRunSummary {
  bool stabilised;
  // 1-based; 0 when the run never stabilised.
  uint32_t stabilisation_step;
  uint32_t steps_run;
  double similarity;
  double similarity_g1;
  double similarity_g2;
  size_t edge_count;
} SchellingRunSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or "" after a success.
// The pointer stays valid until the next call into this library on the
// same thread.
const char *schelling_last_error(void);

// Library version as a static NUL-terminated string.
const char *schelling_version(void);

// Default parameters with both tolerances and the group split at 0.5.
//
// # Safety
// `out` must be null or point to writable memory for one `SchellingParams`.
enum SchellingStatus schelling_params_default(struct SchellingParams *out);

// Runs the model to stabilisation or `max_steps`.
//
// # Safety
// `params` must point to a valid `SchellingParams`; `out` to writable
// storage for a handle, which receives null on failure.
enum SchellingStatus schelling_run(const struct SchellingParams *params,
                                   uint64_t seed,
                                   struct SchellingRun **out);

// # Safety
// `run` must be null or a handle from `schelling_run` not yet freed.
void schelling_run_free(struct SchellingRun *run);

// # Safety
// `run` must be a live handle; `out` writable.
enum SchellingStatus schelling_run_summary(const struct SchellingRun *run,
                                           struct SchellingRunSummary *out);

// Writes the `k` largest singular values of the final network, descending.
//
// # Safety
// `run` must be a live handle; `out` must hold `k` doubles.
enum SchellingStatus schelling_run_singular_values(const struct SchellingRun *run,
                                                   size_t k,
                                                   double *out);

// Embedded dimension of the final network from its top `k` singular values.
//
// # Safety
// `run` must be a live handle; `d_hat` writable.
enum SchellingStatus schelling_run_dimension(const struct SchellingRun *run,
                                             size_t k,
                                             size_t *d_hat);

// Copies the final network into a new handle.
//
// # Safety
// `run` must be a live handle; `out` writable.
enum SchellingStatus schelling_run_network(const struct SchellingRun *run,
                                           struct SchellingNetwork **out);

// Random network on `n` agents wired as in the model.
//
// # Safety
// `out` must be writable.
enum SchellingStatus schelling_network_random(uint32_t n,
                                              uint32_t degree,
                                              enum SchellingWiring wiring,
                                              uint64_t seed,
                                              struct SchellingNetwork **out);

// Network from `edge_count` pairs stored flat as `a0, b0, a1, b1, ...`.
//
// # Safety
// `edges` must hold `2 * edge_count` values (or be null when the count is 0);
// `out` writable.
enum SchellingStatus schelling_network_from_edges(uint32_t n,
                                                  const uint32_t *edges,
                                                  size_t edge_count,
                                                  struct SchellingNetwork **out);

// # Safety
// `net` must be null or a live network handle.
void schelling_network_free(struct SchellingNetwork *net);

// # Safety
// `net` must be a live handle; `n` and `edges` writable.
enum SchellingStatus schelling_network_size(const struct SchellingNetwork *net,
                                            size_t *n,
                                            size_t *edges);

// # Safety
// `net` must be a live handle; `out` writable.
enum SchellingStatus schelling_network_degree(const struct SchellingNetwork *net,
                                              uint32_t agent,
                                              size_t *out);

// # Safety
// `net` must be a live handle; `out` writable.
enum SchellingStatus schelling_network_has_edge(const struct SchellingNetwork *net,
                                                uint32_t a,
                                                uint32_t b,
                                                bool *out);

// Writes the `k` largest adjacency singular values, descending.
//
// # Safety
// `net` must be a live handle; `out` must hold `k` doubles.
enum SchellingStatus schelling_network_singular_values(const struct SchellingNetwork *net,
                                                       size_t k,
                                                       double *out);

// Profile-likelihood elbow of `len` descending non-negative values.
// `loglik`, when not null, receives the `len - 1` curve values.
//
// # Safety
// `values` must hold `len` doubles, `loglik` (if given) `len - 1`; `d_hat`
// writable.
enum SchellingStatus schelling_zhu_ghodsi(const double *values,
                                          size_t len,
                                          size_t *d_hat,
                                          double *loglik);

// Runs a built-in sweep (or grid file) and writes its archive, aggregate
// table and optionally plots into `out_dir`. `k == 0` and `jobs == 0`
// select the defaults.
//
// # Safety
// `sweep` and `out_dir` must be NUL-terminated strings.
enum SchellingStatus schelling_sweep(const char *sweep,
                                     size_t reps,
                                     uint64_t seed,
                                     size_t k,
                                     size_t jobs,
                                     const char *out_dir,
                                     bool plots);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SCHELLING_H */
