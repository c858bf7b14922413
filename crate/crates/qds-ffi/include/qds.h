/* C interface for the qds quantum doubly stochastic map toolkit. */

#ifndef QDS_H
#define QDS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible entry point.
typedef enum QdsStatus {
  // Success.
  QDS_STATUS_OK = 0,
  // A required pointer argument was NULL.
  QDS_STATUS_NULL_POINTER = 1,
  // An argument failed validation (bad JSON, bad dimension, non-density
  // input, unknown name, ...).
  QDS_STATUS_INVALID_ARGUMENT = 2,
  // The computation ran but a mathematical precondition failed
  // (e.g. the channel is not QDS where one is required).
  QDS_STATUS_PROPERTY_VIOLATION = 3,
  // Unexpected internal failure.
  QDS_STATUS_INTERNAL = 4,
} QdsStatus;

// Opaque channel handle.
typedef struct QdsChannel QdsChannel;

// Certification record mirrored as a plain C struct.
typedef struct QdsCertification {
  double tp_residual;
  double unital_residual;
  double choi_min_eig;
  // 1 when all QDS axioms hold within tolerance, else 0.
  int32_t is_qds;
} QdsCertification;

// Induced-norm result mirrored as a plain C struct.
typedef struct QdsNormBounds {
  double lower_bound;
  double upper_bound;
} QdsNormBounds;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copy the most recent error message for the calling thread into `buf`
// (truncating if needed, always NUL-terminated). Returns the full message
// length in bytes, or 0 when no error is recorded.
//
// # Safety
// `buf` must be NULL or point to `len` writable bytes.
size_t qds_last_error(char *buf, size_t len);

// Library version as a static string (do not free).
const char *qds_version(void);

// Release a string returned by this library.
//
// # Safety
// `s` must be NULL or a pointer previously returned by a `qds_*` function
// documented to require `qds_string_free`.
void qds_string_free(char *s);

// Parse a channel from its JSON wire form.
//
// # Safety
// `json` must be a valid NUL-terminated string; `out` a valid pointer.
enum QdsStatus qds_channel_from_json(const char *json, struct QdsChannel **out);

// Serialize a channel to its JSON wire form. The returned string must be
// released with `qds_string_free`.
//
// # Safety
// `channel` must be a live handle; `out` a valid pointer.
enum QdsStatus qds_channel_to_json(const struct QdsChannel *channel, char **out);

// Construct the depolarizing channel with parameter `t` on dimension `n`.
//
// # Safety
// `out` must be a valid pointer.
enum QdsStatus qds_channel_depolarizing(double t, size_t n, struct QdsChannel **out);

// Construct the pinching channel on dimension `n`.
//
// # Safety
// `out` must be a valid pointer.
enum QdsStatus qds_channel_pinching(size_t n, struct QdsChannel **out);

// Construct a random mixed-unitary channel (`count` unitaries, seeded).
//
// # Safety
// `out` must be a valid pointer.
enum QdsStatus qds_channel_random_mixed_unitary(size_t n,
                                                size_t count,
                                                uint64_t seed,
                                                struct QdsChannel **out);

// Release a channel handle.
//
// # Safety
// `channel` must be NULL or a handle returned by this library, not yet freed.
void qds_channel_free(struct QdsChannel *channel);

// Hilbert-space dimension of the channel, or 0 when the handle is NULL.
//
// # Safety
// `channel` must be NULL or a live handle.
size_t qds_channel_dim(const struct QdsChannel *channel);

// Certify the QDS axioms with default tolerances.
//
// # Safety
// `channel` must be a live handle; `out` a valid pointer.
enum QdsStatus qds_channel_certify(const struct QdsChannel *channel, struct QdsCertification *out);

// Apply the channel to a matrix. `input` and `output` are row-major
// interleaved buffers of length `2 * dim * dim`; they may not alias.
//
// # Safety
// `channel` must be a live handle; both buffers must have the documented
// length.
enum QdsStatus qds_channel_apply(const struct QdsChannel *channel,
                                 const double *input,
                                 double *output);

// Certified lower/upper bounds on the induced p->p norm (use `p = INFINITY`
// for the sup norm).
//
// # Safety
// `channel` must be a live handle; `out` a valid pointer.
enum QdsStatus qds_channel_induced_norm(const struct QdsChannel *channel,
                                        double p,
                                        uint64_t seed,
                                        struct QdsNormBounds *out);

// Entropy change `S(Phi(rho)) - S(rho)` in nats. `rho` is a row-major
// interleaved density matrix of the channel's dimension. Fails with
// `PropertyViolation` when the channel is not QDS.
//
// # Safety
// `channel` must be a live handle; `rho` a buffer of `2 * dim * dim`
// doubles; `out_delta` a valid pointer.
enum QdsStatus qds_channel_entropy_delta(const struct QdsChannel *channel,
                                         const double *rho,
                                         double *out_delta);

// Whether the spectrum of `sigma` majorizes the spectrum of `rho`
// (both row-major interleaved `dim x dim` density matrices). Writes 1 or 0.
//
// # Safety
// `rho` and `sigma` must be buffers of `2 * dim * dim` doubles; `out_holds`
// a valid pointer.
enum QdsStatus qds_majorization_holds(const double *rho,
                                      const double *sigma,
                                      size_t dim,
                                      int32_t *out_holds);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QDS_H */
