#ifndef LEGNET_H
#define LEGNET_H

#pragma once

/* Generated by cbindgen from crates/ffi; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum LegnetStatus {
  LEGNET_STATUS_OK = 0,
  LEGNET_STATUS_NULL_POINTER = 1,
  LEGNET_STATUS_INVALID_ARGUMENT = 2,
  LEGNET_STATUS_DATA_ERROR = 3,
  LEGNET_STATUS_ESTIMATION_ERROR = 4,
  LEGNET_STATUS_OUTPUT_ERROR = 5,
  LEGNET_STATUS_PANIC = 6,
} LegnetStatus;

/**
 * Node-level metric selector.
 */
typedef enum LegnetMetric {
  LEGNET_METRIC_IN_DEGREE = 0,
  LEGNET_METRIC_OUT_DEGREE = 1,
  LEGNET_METRIC_OUT_STRENGTH = 2,
  LEGNET_METRIC_CLOSENESS = 3,
  LEGNET_METRIC_BETWEENNESS = 4,
  LEGNET_METRIC_EIGEN = 5,
  LEGNET_METRIC_HUB = 6,
  LEGNET_METRIC_AUTHORITY = 7,
  LEGNET_METRIC_LOCAL_CLUSTERING = 8,
} LegnetMetric;

typedef enum LegnetErgmMethod {
  LEGNET_ERGM_METHOD_EXACT_DYAD = 0,
  LEGNET_ERGM_METHOD_MPLE = 1,
} LegnetErgmMethod;

typedef enum LegnetNmi {
  LEGNET_NMI_ARITHMETIC = 0,
  LEGNET_NMI_GEOMETRIC = 1,
  LEGNET_NMI_MAX = 2,
  LEGNET_NMI_MIN = 3,
} LegnetNmi;

typedef struct LegnetAttributes LegnetAttributes;

typedef struct LegnetErgmFit LegnetErgmFit;

/**
 * Loaded graph with its node identifiers as C strings. Centralities are
 * computed on first use and cached.
 */
typedef struct LegnetGraph LegnetGraph;

typedef struct LegnetSbm LegnetSbm;

typedef struct LegnetPartitionScores {
  double rand;
  double adjusted_rand;
  double nmi;
} LegnetPartitionScores;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *legnet_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *legnet_version(void);

/**
 * Loads a `source,target,weight` CSV edge list from a file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` valid for one write.
 */
enum LegnetStatus legnet_graph_load_csv(const char *path, struct LegnetGraph **out);

/**
 * Parses a `source,target,weight` CSV edge list held in memory.
 *
 * # Safety
 * `csv` must be a NUL-terminated string and `out` valid for one write.
 */
enum LegnetStatus legnet_graph_from_csv_text(const char *csv, struct LegnetGraph **out);

/**
 * # Safety
 * `graph` must be null or a handle from this library not yet freed.
 */
void legnet_graph_free(struct LegnetGraph *graph);

/**
 * # Safety
 * `graph` must be a live handle and `out` valid for one write.
 */
enum LegnetStatus legnet_graph_node_count(const struct LegnetGraph *graph, size_t *out);

/**
 * # Safety
 * `graph` must be a live handle and `out` valid for one write.
 */
enum LegnetStatus legnet_graph_edge_count(const struct LegnetGraph *graph, size_t *out);

/**
 * Identifier of node `index` in first-appearance order, or null when out of
 * range. Owned by the graph handle.
 *
 * # Safety
 * `graph` must be null or a live handle.
 */
const char *legnet_graph_node_id(const struct LegnetGraph *graph, size_t index);

/**
 * Writes one value per node; undefined values (closeness of a sink, local
 * clustering below degree two) are NaN.
 *
 * # Safety
 * `graph` must be a live handle and `out` valid for `capacity` writes.
 */
enum LegnetStatus legnet_graph_centrality(const struct LegnetGraph *graph,
                                          enum LegnetMetric metric,
                                          double *out,
                                          size_t capacity);

/**
 * # Safety
 * `graph` must be a live handle and `out` valid for one write.
 */
enum LegnetStatus legnet_graph_density(const struct LegnetGraph *graph, double *out);

/**
 * # Safety
 * `graph` must be a live handle and `out` valid for one write.
 */
enum LegnetStatus legnet_graph_reciprocity(const struct LegnetGraph *graph, double *out);

/**
 * Loads the node attribute CSV for `graph`; every graph node needs a row.
 *
 * # Safety
 * `graph` must be a live handle, `path` a NUL-terminated string and `out`
 * valid for one write.
 */
enum LegnetStatus legnet_attributes_load(const struct LegnetGraph *graph,
                                         const char *path,
                                         struct LegnetAttributes **out);

/**
 * # Safety
 * `attrs` must be null or a handle from this library not yet freed.
 */
void legnet_attributes_free(struct LegnetAttributes *attrs);

/**
 * Fits a built-in model (`model1`..`model6`) on the binarised graph.
 * `attrs` may be null for models without attribute terms.
 *
 * # Safety
 * `graph` must be a live handle, `attrs` null or live, `model` a
 * NUL-terminated string and `out` valid for one write.
 */
enum LegnetStatus legnet_ergm_fit_named(const struct LegnetGraph *graph,
                                        const struct LegnetAttributes *attrs,
                                        const char *model,
                                        enum LegnetErgmMethod method,
                                        struct LegnetErgmFit **out);

/**
 * # Safety
 * `fit` must be null or a handle from this library not yet freed.
 */
void legnet_ergm_fit_free(struct LegnetErgmFit *fit);

/**
 * Number of model terms.
 *
 * # Safety
 * `fit` must be a live handle and `out` valid for one write.
 */
enum LegnetStatus legnet_ergm_fit_term_count(const struct LegnetErgmFit *fit, size_t *out);

/**
 * Label of term `index`, or null when out of range. Owned by the handle.
 *
 * # Safety
 * `fit` must be null or a live handle.
 */
const char *legnet_ergm_fit_label(const struct LegnetErgmFit *fit, size_t index);

/**
 * Coefficients; separated terms are signed infinities.
 *
 * # Safety
 * `fit` must be a live handle and `out` valid for `capacity` writes.
 */
enum LegnetStatus legnet_ergm_fit_theta(const struct LegnetErgmFit *fit,
                                        double *out,
                                        size_t capacity);

/**
 * Standard errors; NaN for separated terms.
 *
 * # Safety
 * `fit` must be a live handle and `out` valid for `capacity` writes.
 */
enum LegnetStatus legnet_ergm_fit_std_err(const struct LegnetErgmFit *fit,
                                          double *out,
                                          size_t capacity);

/**
 * Two-sided Wald p-values; NaN for separated terms.
 *
 * # Safety
 * `fit` must be a live handle and `out` valid for `capacity` writes.
 */
enum LegnetStatus legnet_ergm_fit_p_values(const struct LegnetErgmFit *fit,
                                           double *out,
                                           size_t capacity);

/**
 * Log-likelihood, AIC and BIC; any of the outputs may be null.
 *
 * # Safety
 * `fit` must be a live handle; non-null outputs valid for one write.
 */
enum LegnetStatus legnet_ergm_fit_criteria(const struct LegnetErgmFit *fit,
                                           double *log_likelihood,
                                           double *aic,
                                           double *bic);

/**
 * Fits block models for every Q in `q_min..=q_max` and keeps the ICL
 * optimum.
 *
 * # Safety
 * `graph` must be a live handle and `out` valid for one write.
 */
enum LegnetStatus legnet_sbm_select(const struct LegnetGraph *graph,
                                    size_t q_min,
                                    size_t q_max,
                                    size_t restarts,
                                    uint64_t seed,
                                    struct LegnetSbm **out);

/**
 * Fits a block model with exactly `q` requested classes.
 *
 * # Safety
 * `graph` must be a live handle and `out` valid for one write.
 */
enum LegnetStatus legnet_sbm_fit_q(const struct LegnetGraph *graph,
                                   size_t q,
                                   size_t restarts,
                                   uint64_t seed,
                                   struct LegnetSbm **out);

/**
 * # Safety
 * `sbm` must be null or a handle from this library not yet freed.
 */
void legnet_sbm_free(struct LegnetSbm *sbm);

/**
 * Effective number of classes after pruning.
 *
 * # Safety
 * `sbm` must be a live handle and `out` valid for one write.
 */
enum LegnetStatus legnet_sbm_q(const struct LegnetSbm *sbm, size_t *out);

/**
 * # Safety
 * `sbm` must be a live handle and `out` valid for one write.
 */
enum LegnetStatus legnet_sbm_icl(const struct LegnetSbm *sbm, double *out);

/**
 * Zero-based community of each node; community 0 is the largest.
 *
 * # Safety
 * `sbm` must be a live handle and `out` valid for `capacity` writes.
 */
enum LegnetStatus legnet_sbm_labels(const struct LegnetSbm *sbm, size_t *out, size_t capacity);

/**
 * Row-major `q * q` connection probabilities.
 *
 * # Safety
 * `sbm` must be a live handle and `out` valid for `capacity` writes.
 */
enum LegnetStatus legnet_sbm_pi(const struct LegnetSbm *sbm, double *out, size_t capacity);

/**
 * Rand, adjusted Rand and NMI between two labelings of `len` nodes. Labels
 * are arbitrary integers; only equality matters.
 *
 * # Safety
 * `a` and `b` must be valid for `len` reads and `out` for one write.
 */
enum LegnetStatus legnet_partition_scores(const size_t *a,
                                          const size_t *b,
                                          size_t len,
                                          enum LegnetNmi normalization,
                                          struct LegnetPartitionScores *out);

/**
 * Runs the batch pipeline from a JSON configuration. Relative paths in the
 * configuration resolve against the working directory. A non-null
 * `out_dir` overrides the configured output directory.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string; `out_dir` null or one.
 */
enum LegnetStatus legnet_run_pipeline(const char *config_json, const char *out_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LEGNET_H */
