#ifndef DTWAVE_H
#define DTWAVE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum DtStatus {
  DT_STATUS_OK = 0,
  DT_STATUS_NULL_POINTER = 1,
  DT_STATUS_INVALID_LENGTH = 2,
  DT_STATUS_UNSUPPORTED_SIZE = 3,
  DT_STATUS_STRUCTURE = 4,
  DT_STATUS_OUT_OF_RANGE = 5,
  DT_STATUS_NON_FINITE = 6,
  DT_STATUS_DIVERGED = 7,
  DT_STATUS_UNDEFINED = 8,
  DT_STATUS_PARSE = 9,
  DT_STATUS_IO = 10,
  DT_STATUS_BUFFER_TOO_SMALL = 11,
  DT_STATUS_PANIC = 12,
} DtStatus;

// Which dual-tree transform a `DtDualTree` holds.
typedef enum DtVariant {
  DT_VARIANT_REAL = 0,
  DT_VARIANT_COMPLEX = 1,
} DtVariant;

typedef struct DtDualTree DtDualTree;

typedef struct DtFilter DtFilter;

typedef struct DtFilterSet DtFilterSet;

typedef struct DtPyramid DtPyramid;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread. Empty after a success.
// Valid until the next call on the same thread.
const char *dt_last_error(void);

// Library version as a static NUL-terminated string.
const char *dt_version(void);

// Filter from `len` taps.
//
// # Safety
// `taps` must point to `len` doubles; `out` must be writable.
enum DtStatus dt_filter_new(const double *taps, size_t len, struct DtFilter **out);

// Filter from a `.flt` file, or a bundled fixture when no such file exists.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum DtStatus dt_filter_load(const char *path, struct DtFilter **out);

// Number of taps, or 0 for a null handle.
//
// # Safety
// `f` must be null or a live handle.
size_t dt_filter_len(const struct DtFilter *f);

// Copies the taps into `out` (capacity `cap`).
//
// # Safety
// `f` must be a live handle; `out` must hold `cap` doubles.
enum DtStatus dt_filter_taps(const struct DtFilter *f, double *out, size_t cap);

// # Safety
// `f` must be null or a handle not freed before.
void dt_filter_free(struct DtFilter *f);

// Distance in `[0, 1]` between two filters, invariant to circular shift,
// sign and reversal.
//
// # Safety
// `a` and `b` must be live handles; `out` must be writable.
enum DtStatus dt_compare_filters(const struct DtFilter *a, const struct DtFilter *b, double *out);

// Dual-tree filter set from the later-level and first-level filters. The
// inputs are copied and stay owned by the caller.
//
// # Safety
// `h1` and `h1_first` must be live handles; `out` must be writable.
enum DtStatus dt_filterset_new(const struct DtFilter *h1,
                               const struct DtFilter *h1_first,
                               struct DtFilterSet **out);

// Bundled learned filter set, e.g. `"complex"` or `"real"`.
//
// # Safety
// `model` must be a NUL-terminated string; `out` must be writable.
enum DtStatus dt_filterset_fixture(const char *model, struct DtFilterSet **out);

// # Safety
// `fs` must be null or a handle not freed before.
void dt_filterset_free(struct DtFilterSet *fs);

// Separable 2D DWT of a `rows x cols` image.
//
// # Safety
// `data` must hold `rows*cols` doubles; `h` must be live; `out` writable.
enum DtStatus dt_dwt2d_forward(const double *data,
                               size_t rows,
                               size_t cols,
                               const struct DtFilter *h,
                               size_t levels,
                               struct DtPyramid **out);

// Number of levels, or 0 for a null handle.
//
// # Safety
// `p` must be null or a live handle.
size_t dt_pyramid_levels(const struct DtPyramid *p);

// Copies detail band `band` (0 = h, 1 = v, 2 = d) of `level` (1-based),
// or the approximation when `level` is 0. The band has
// `(rows >> L) * (cols >> L)` values for `L = level` (or the number of
// levels for the approximation).
//
// # Safety
// `p` must be live; `out` must hold `cap` doubles.
enum DtStatus dt_pyramid_band(const struct DtPyramid *p,
                              size_t level,
                              size_t band,
                              double *out,
                              size_t cap);

// Inverse DWT into `out` (capacity `cap`, at least `rows*cols`).
//
// # Safety
// `p` and `h` must be live; `out` must hold `cap` doubles.
enum DtStatus dt_dwt2d_inverse(const struct DtPyramid *p,
                               const struct DtFilter *h,
                               double *out,
                               size_t cap);

// # Safety
// `p` must be null or a handle not freed before.
void dt_pyramid_free(struct DtPyramid *p);

// Real or complex dual-tree transform of a `rows x cols` image.
//
// # Safety
// `data` must hold `rows*cols` doubles; `fs` must be live; `out` writable.
enum DtStatus dt_dualtree_forward(const double *data,
                                  size_t rows,
                                  size_t cols,
                                  const struct DtFilterSet *fs,
                                  size_t levels,
                                  enum DtVariant variant,
                                  struct DtDualTree **out);

// Copies band `band` (1..=6) of `level` (1-based). `im` receives the
// imaginary part for the complex transform and may be null otherwise.
// Each part has `(rows >> level) * (cols >> level)` values.
//
// # Safety
// `t` must be live; `re` (and `im` when used) must hold `cap` doubles.
enum DtStatus dt_dualtree_band(const struct DtDualTree *t,
                               size_t level,
                               size_t band,
                               double *re,
                               double *im,
                               size_t cap);

// Inverse dual-tree transform into `out` (capacity `cap`).
//
// # Safety
// `t` and `fs` must be live; `out` must hold `cap` doubles.
enum DtStatus dt_dualtree_inverse(const struct DtDualTree *t,
                                  const struct DtFilterSet *fs,
                                  double *out,
                                  size_t cap);

// # Safety
// `t` must be null or a handle not freed before.
void dt_dualtree_free(struct DtDualTree *t);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DTWAVE_H */
