/*
 * C interface for the qpskbeam library: QPSK (2-bit) phase-quantized
 * anti-jamming beamforming.
 *
 * Conventions:
 *   - Complex vectors/matrices pass as interleaved doubles (re, im, re, im,
 *     ...); a covariance of order n is row-major with 2*n*n doubles.
 *   - Every fallible call returns a qpskbeam_status; 0 is success. On
 *     failure, qpskbeam_last_error_message() returns a thread-local
 *     description of the most recent error.
 *   - Objects returned through out-pointers are owned by the caller and
 *     must be released with the matching _free function. Out-pointers are
 *     written only on success.
 */

#ifndef QPSKBEAM_H
#define QPSKBEAM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. */
typedef int32_t qpskbeam_status;

#define QPSKBEAM_OK 0
#define QPSKBEAM_ERR_NULL_POINTER 1
#define QPSKBEAM_ERR_INVALID_ARGUMENT 2
#define QPSKBEAM_ERR_DIMENSION_MISMATCH 3
#define QPSKBEAM_ERR_SINGULAR 4
#define QPSKBEAM_ERR_NO_CONVERGENCE 5
#define QPSKBEAM_ERR_ORACLE_TOO_LARGE 6
#define QPSKBEAM_ERR_IO 7
#define QPSKBEAM_ERR_PARSE 8
#define QPSKBEAM_ERR_MODEL 9
#define QPSKBEAM_ERR_UTF8 10
#define QPSKBEAM_ERR_PANIC 11

/* Solver identifiers for qpskbeam_solve. */
#define QPSKBEAM_METHOD_NAIVE 0
#define QPSKBEAM_METHOD_ORACLE 1
#define QPSKBEAM_METHOD_GREEDY 2
#define QPSKBEAM_METHOD_COORD_DESCENT 3
#define QPSKBEAM_METHOD_GBDT_REFINE 4

/* Opaque handles. */
typedef struct qpskbeam_geometry qpskbeam_geometry;
typedef struct qpskbeam_model qpskbeam_model;

/* Library version string (static storage; do not free). */
const char *qpskbeam_version(void);

/* Human-readable name for a status code (static storage; do not free). */
const char *qpskbeam_status_name(qpskbeam_status status);

/*
 * Message for the most recent error on this thread (thread-local storage;
 * do not free). Empty string if no error has occurred.
 */
const char *qpskbeam_last_error_message(void);

/* Uniform circular array with half-wavelength adjacent spacing; n >= 2. */
qpskbeam_status qpskbeam_geometry_new_uca(size_t n, qpskbeam_geometry **out);

void qpskbeam_geometry_free(qpskbeam_geometry *geometry);

qpskbeam_status qpskbeam_geometry_size(const qpskbeam_geometry *geometry, size_t *out);

/*
 * Steering vector toward (azimuth, elevation) in degrees; elevation in
 * [0, 90]. out must hold 2*n doubles (interleaved).
 */
qpskbeam_status qpskbeam_steering_vector(const qpskbeam_geometry *geometry,
                                         double azimuth_deg,
                                         double elevation_deg,
                                         double *out);

/*
 * Continuous Capon (MVDR) weights with diagonal loading
 * loading_scale * trace(R) / n; the result satisfies w^H a = 1.
 * r: 2*n*n doubles (row-major Hermitian covariance), a: 2*n doubles,
 * out_w: 2*n doubles.
 */
qpskbeam_status qpskbeam_capon_weights(size_t n,
                                       const double *r,
                                       const double *a,
                                       double alpha,
                                       double loading_scale,
                                       double *out_w);

/* Loads a trained model file (JSON). */
qpskbeam_status qpskbeam_model_load(const char *path, qpskbeam_model **out);

void qpskbeam_model_free(qpskbeam_model *model);

qpskbeam_status qpskbeam_model_antennas(const qpskbeam_model *model, size_t *out);

/*
 * Solves one instance with the selected method and writes n QPSK symbols
 * (values 0..3; symbol s encodes ((s>>1) ? -1 : +1)/sqrt(2n) real part and
 * ((s&1) ? -1 : +1)/sqrt(2n) imaginary part).
 *
 *   method          one of the QPSKBEAM_METHOD_* constants
 *   n               problem order (>= 2)
 *   r, a            covariance and steering vector as in qpskbeam_capon_weights
 *   alpha           objective trade-off in (0, 1]
 *   loading_scale   diagonal-loading scale (used by capon-initialized methods)
 *   greedy_samples  candidate count for GREEDY (>= 1; ignored otherwise)
 *   sweeps          sweep budget for COORD_DESCENT / GBDT_REFINE (>= 1)
 *   seed            RNG seed for GREEDY (ignored otherwise)
 *   model           required for GBDT_REFINE, else may be NULL
 *   out_symbols     n bytes
 *   out_objective   optional (may be NULL); receives the objective value
 */
qpskbeam_status qpskbeam_solve(int32_t method,
                               size_t n,
                               const double *r,
                               const double *a,
                               double alpha,
                               double loading_scale,
                               size_t greedy_samples,
                               size_t sweeps,
                               uint64_t seed,
                               const qpskbeam_model *model,
                               uint8_t *out_symbols,
                               double *out_objective);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* QPSKBEAM_H */
