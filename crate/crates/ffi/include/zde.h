#ifndef ZDE_H
#define ZDE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define ZDE_MODE_POSITIVE 0

#define ZDE_MODE_FULL 1

typedef enum ZdeStatus {
  ZDE_STATUS_OK = 0,
  ZDE_STATUS_INVALID_ARGUMENT = 1,
  ZDE_STATUS_PARSE = 2,
  ZDE_STATUS_INFEASIBLE = 3,
  ZDE_STATUS_SAMPLING_EXHAUSTED = 4,
  ZDE_STATUS_TOO_LARGE = 5,
  ZDE_STATUS_INSUFFICIENT_DEPTH = 6,
  ZDE_STATUS_NO_TRACE = 7,
  ZDE_STATUS_IO = 8,
  ZDE_STATUS_NULL_POINTER = 9,
  ZDE_STATUS_PANIC = 10,
} ZdeStatus;

/*
 Opaque block set Γ_M with its optional sidecar metadata.
 */
typedef struct ZdeBlockSet ZdeBlockSet;

/*
 Opaque cylinder measure.
 */
typedef struct ZdeMeasure ZdeMeasure;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failure on this thread. Valid until the next call.
 */
const char *zde_last_error_message(void);

/*
 V_n = |Λ_n|.

 # Safety
 `out` must be writable.
 */
enum ZdeStatus zde_box_volume(size_t dim, uint32_t mode, uint64_t radius, uint64_t *out);

/*
 The radius m*n with Λ_{m*n} tiled by V_n translates of Λ_m.

 # Safety
 `out` must be writable.
 */
enum ZdeStatus zde_compose(uint64_t m, uint64_t n, uint32_t mode, uint64_t *out);

/*
 -δ ln δ - (1-δ) ln(1-δ).

 # Safety
 `out` must be writable.
 */
enum ZdeStatus zde_binary_entropy(double delta, double *out);

/*
 ln Q for a box of the given volume, and the bound H(δ) on ln Q / V.

 # Safety
 Both out-pointers must be writable.
 */
enum ZdeStatus zde_q_count_log(uint64_t volume, double delta, double *out_log, double *out_bound);

/*
 Bernoulli measure with one-site vector `p`, cylinders through `depth`.

 # Safety
 `p` must point to `len` doubles and `out` must be writable.
 */
enum ZdeStatus zde_measure_bernoulli(const double *p,
                                     size_t len,
                                     uint64_t depth,
                                     size_t dim,
                                     uint32_t mode,
                                     struct ZdeMeasure **out);

/*
 # Safety
 `mu` must come from `zde_measure_bernoulli` and not be freed already. Null is ignored.
 */
void zde_measure_free(struct ZdeMeasure *mu);

/*
 Truncated D(μ,ν) through `depth`; the true value lies in [value, value + tail].

 # Safety
 Handles must be live; out-pointers writable.
 */
enum ZdeStatus zde_metric_d(const struct ZdeMeasure *mu,
                            const struct ZdeMeasure *nu,
                            uint64_t depth,
                            double *out_value,
                            double *out_tail);

/*
 Katok estimate ln r / V_n, with ln r alongside.

 # Safety
 `mu` must be live; out-pointers writable.
 */
enum ZdeStatus zde_katok_entropy(const struct ZdeMeasure *mu,
                                 uint64_t n,
                                 double epsilon,
                                 double delta,
                                 double *out_estimate,
                                 double *out_ln_r);

/*
 Reads a block file, plus `<path>.meta` when present.

 # Safety
 `path` must be a NUL-terminated string; `out` writable.
 */
enum ZdeStatus zde_blockset_read(const char *path, struct ZdeBlockSet **out);

/*
 Parses block-file text (no sidecar).

 # Safety
 `text` must be a NUL-terminated string; `out` writable.
 */
enum ZdeStatus zde_blockset_parse(const char *text, struct ZdeBlockSet **out);

/*
 Writes the block file in canonical order. The sidecar is not written.

 # Safety
 `set` must be live; `path` NUL-terminated.
 */
enum ZdeStatus zde_blockset_write(const struct ZdeBlockSet *set, const char *path);

/*
 # Safety
 `set` must come from a `zde_blockset_*` constructor and not be freed already. Null is ignored.
 */
void zde_blockset_free(struct ZdeBlockSet *set);

/*
 |Γ_M|.

 # Safety
 `set` must be live; `out` writable.
 */
enum ZdeStatus zde_blockset_len(const struct ZdeBlockSet *set, size_t *out);

/*
 ln|Γ_M| / V_M.

 # Safety
 `set` must be live; `out` writable.
 */
enum ZdeStatus zde_blockset_entropy(const struct ZdeBlockSet *set, double *out);

/*
 The Λ_radius pattern of the seeded Δ-point, row-major, as `zde sample` prints it.

 `out_needed` always receives the pattern size; when `cap` is smaller
 nothing is copied and the call fails with `InvalidArgument`.

 # Safety
 `set` must be live; `buf` must hold `cap` bytes; `out_needed` writable.
 */
enum ZdeStatus zde_sample_window(const struct ZdeBlockSet *set,
                                 uint64_t seed,
                                 uint64_t radius,
                                 uint8_t *buf,
                                 size_t cap,
                                 size_t *out_needed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ZDE_H */
