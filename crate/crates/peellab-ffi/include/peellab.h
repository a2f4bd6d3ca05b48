#ifndef PEELLAB_H
#define PEELLAB_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Built-in polytope families for sampling helpers.
 */
typedef enum PlPolytopeKind {
  PL_POLYTOPE_KIND_CUBE = 0,
  PL_POLYTOPE_KIND_SIMPLEX = 1,
} PlPolytopeKind;

/**
 * Error codes returned by every fallible entry point.
 */
typedef enum PlStatus {
  PL_STATUS_OK = 0,
  PL_STATUS_NULL_ARGUMENT = 1,
  PL_STATUS_INVALID_ARGUMENT = 2,
  PL_STATUS_DEGENERATE_INPUT = 3,
  PL_STATUS_BUFFER_TOO_SMALL = 4,
  PL_STATUS_INTERNAL_ERROR = 5,
} PlStatus;

/**
 * Result of peeling a point set into convex layers.
 */
typedef struct PlPeeling PlPeeling;

/**
 * An immutable finite point configuration in R^d.
 */
typedef struct PlPointSet PlPointSet;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread. The pointer stays
 * valid until the next failing call on the same thread. Never NULL.
 */
const char *pl_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *pl_version(void);

/**
 * Build a point set from `n` points of dimension `dim`, stored row-major
 * in `coords` (length `n * dim`). Ids are assigned 0..n in order.
 */
enum PlStatus pl_pointset_new(uintptr_t dim,
                              uintptr_t n,
                              const double *coords,
                              struct PlPointSet **out);

/**
 * Sample a Poisson process of the given intensity in a built-in polytope.
 */
enum PlStatus pl_pointset_sample_poisson(enum PlPolytopeKind kind,
                                         uintptr_t dim,
                                         double scale,
                                         double lambda,
                                         uint64_t seed,
                                         uint64_t stream,
                                         struct PlPointSet **out);

/**
 * Number of points, or -1 if the handle is NULL.
 */
int64_t pl_pointset_len(const struct PlPointSet *ps);

/**
 * Ambient dimension, or -1 if the handle is NULL.
 */
int64_t pl_pointset_dim(const struct PlPointSet *ps);

/**
 * Copy the row-major coordinates into `buf` (capacity `cap` doubles).
 * Writes the required length to `out_len` even when the buffer is small.
 */
enum PlStatus pl_pointset_coords(const struct PlPointSet *ps,
                                 double *buf,
                                 uintptr_t cap,
                                 uintptr_t *out_len);

void pl_pointset_free(struct PlPointSet *ps);

/**
 * Face counts f_0..f_{d-1} of the convex hull of the point set.
 * `cap` is the capacity of `f_out`; the true length goes to `out_len`.
 */
enum PlStatus pl_hull_f_vector(const struct PlPointSet *ps,
                               uint64_t *f_out,
                               uintptr_t cap,
                               uintptr_t *out_len);

/**
 * Volume of the convex hull of the point set.
 */
enum PlStatus pl_hull_volume(const struct PlPointSet *ps, double *out);

/**
 * Peel the point set into convex layers. `max_layers = 0` means no limit.
 */
enum PlStatus pl_peel(const struct PlPointSet *ps, uintptr_t max_layers, struct PlPeeling **out);

/**
 * Total number of layers assigned, or -1 if the handle is NULL.
 */
int64_t pl_peeling_total_layers(const struct PlPeeling *p);

/**
 * 1 when the peel stopped at max_layers, 0 otherwise, -1 on NULL.
 */
int32_t pl_peeling_truncated(const struct PlPeeling *p);

/**
 * Export (id, layer) pairs in input order. Unlabeled points (possible
 * only after truncation) get layer 0. `cap` is the capacity of both
 * buffers in elements; the required length goes to `out_len`.
 */
enum PlStatus pl_peeling_labels(const struct PlPeeling *p,
                                uint64_t *ids_out,
                                uint32_t *layers_out,
                                uintptr_t cap,
                                uintptr_t *out_len);

/**
 * Number of points on layer `n` (1-based), or -1 on NULL/invalid layer.
 */
int64_t pl_peeling_layer_size(const struct PlPeeling *p, uint32_t n);

void pl_peeling_free(struct PlPeeling *p);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* PEELLAB_H */
