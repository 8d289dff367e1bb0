/* SPDX-License-Identifier: Apache-2.0 */

#ifndef PLSQPT_H
#define PLSQPT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result code of every fallible call.
 */
typedef enum QptStatus {
  QPT_STATUS_OK = 0,
  QPT_STATUS_NULL_POINTER = 1,
  QPT_STATUS_INVALID_DIMENSION = 2,
  QPT_STATUS_DIMENSION_MISMATCH = 3,
  QPT_STATUS_CONSTRAINT_VIOLATION = 4,
  QPT_STATUS_INVALID_RANK = 5,
  QPT_STATUS_NOT_IMPLEMENTED = 6,
  QPT_STATUS_INVALID_PLAN = 7,
  QPT_STATUS_SCENARIO_MISMATCH = 8,
  QPT_STATUS_INVALID_INPUT = 9,
  QPT_STATUS_DOMAIN = 10,
  QPT_STATUS_NOT_CONVERGED = 11,
  QPT_STATUS_CONFIG = 12,
  QPT_STATUS_PARSE = 13,
  QPT_STATUS_IO = 14,
  QPT_STATUS_PANIC = 15,
} QptStatus;

/*
 Ground-truth unitary for [`qpt_channel_unitary`].
 */
typedef enum QptUnitary {
  QPT_UNITARY_IDENTITY = 0,
  QPT_UNITARY_QFT = 1,
  /*
   Haar-random, drawn from the seed argument.
   */
  QPT_UNITARY_HAAR = 2,
} QptUnitary;

typedef enum QptScheme {
  QPT_SCHEME_FIXED = 0,
  QPT_SCHEME_RANDOM = 1,
} QptScheme;

typedef enum QptMethod {
  QPT_METHOD_AP = 0,
  QPT_METHOD_DYKSTRA = 1,
  QPT_METHOD_ONE_HIP = 2,
  QPT_METHOD_PURE_HIP = 3,
  QPT_METHOD_HIP_SWITCH = 4,
  QPT_METHOD_DUAL = 5,
} QptMethod;

typedef enum QptMetric {
  QPT_METRIC_TRACE = 0,
  QPT_METRIC_FROBENIUS = 1,
  QPT_METRIC_OPERATOR = 2,
} QptMetric;

/*
 A Hermitian `d² × d²` matrix in the Choi representation; not necessarily physical.
 */
typedef struct QptChoi QptChoi;

/*
 Observed frequencies of one measurement scenario.
 */
typedef struct QptTable QptTable;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version, a static NUL-terminated string.
 */
const char *qpt_version(void);

/*
 Message of the last failed call on this thread; empty after a success. Valid until the
 next call on the same thread.
 */
const char *qpt_last_error_message(void);

/*
 Choi matrix of a unitary channel on dimension `dim`.
 */
enum QptStatus qpt_channel_unitary(enum QptUnitary unitary,
                                   uintptr_t dim,
                                   uint64_t seed,
                                   struct QptChoi **out);

/*
 Choi matrix of the depolarizing channel `ρ ↦ (1-p)ρ + p𝟙/d`.
 */
enum QptStatus qpt_channel_depolarizing(uintptr_t dim, double p, struct QptChoi **out);

/*
 Choi matrix of a Kraus-rank-`rank` mixed-unitary channel with a Haar base unitary.
 */
enum QptStatus qpt_channel_mixed_unitary(uintptr_t dim,
                                         uintptr_t rank,
                                         uint64_t seed,
                                         struct QptChoi **out);

/*
 Copy a row-major `d² × d²` matrix given as separate real and imaginary arrays of
 length `d⁴`. The matrix must be Hermitian.
 */
enum QptStatus qpt_choi_from_entries(uintptr_t dim,
                                     const double *re,
                                     const double *im,
                                     uintptr_t len,
                                     struct QptChoi **out);

/*
 Sample a frequency table from a physical Choi matrix.
 */
enum QptStatus qpt_simulate(const struct QptChoi *choi,
                            uint8_t scenario_number,
                            enum QptScheme scheme,
                            uint64_t shots,
                            uint64_t seed,
                            struct QptTable **out);

/*
 Least-squares estimate from a frequency table.
 */
enum QptStatus qpt_estimate_ls(const struct QptTable *table, struct QptChoi **out);

/*
 Projected least-squares estimate: least squares, thresholded trace-one projection, then
 projection onto physical channels with `method`.
 */
enum QptStatus qpt_estimate_pls(const struct QptTable *table,
                                enum QptMethod method,
                                struct QptChoi **out);

/*
 Project a trace-one Hermitian matrix onto physical channels.
 */
enum QptStatus qpt_project(const struct QptChoi *choi, enum QptMethod method, struct QptChoi **out);

/*
 Channel dimension `d` of a handle.
 */
enum QptStatus qpt_choi_dim(const struct QptChoi *choi, uintptr_t *dim);

/*
 Copy the entries row-major into `re` and `im`, each of length `len = d⁴`.
 */
enum QptStatus qpt_choi_entries(const struct QptChoi *choi, double *re, double *im, uintptr_t len);

/*
 Distance between two matrices of equal size.
 */
enum QptStatus qpt_distance(const struct QptChoi *a,
                            const struct QptChoi *b,
                            enum QptMetric metric,
                            double *value);

/*
 Total number of shots recorded in a table.
 */
enum QptStatus qpt_table_shots(const struct QptTable *table, uint64_t *shots);

/*
 Release a matrix handle; null is ignored.
 */
void qpt_choi_free(struct QptChoi *choi);

/*
 Release a table handle; null is ignored.
 */
void qpt_table_free(struct QptTable *table);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PLSQPT_H */
