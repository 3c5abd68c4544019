#ifndef DETAILPRIOR_H
#define DETAILPRIOR_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible entry point.
typedef enum DpStatus {
  DpOk = 0,
  DpErrNullArgument = 1,
  DpErrInvalidUtf8 = 2,
  DpErrIo = 3,
  DpErrFormat = 4,
  DpErrInvalidParameter = 5,
  DpErrDimensionMismatch = 6,
  DpErrTooSmall = 7,
  DpErrTooLarge = 8,
  DpErrInternal = 9,
} DpStatus;

// Opaque detail-layer handle.
typedef struct DpDetail DpDetail;

// Opaque image handle.
typedef struct DpImage DpImage;

// Extraction parameters, plain-old-data across the ABI.
typedef struct DpSolverParams {
  double alpha;
  double lambda;
  double gamma;
  double epsilon;
  unsigned int iterations;
} DpSolverParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent error on the calling thread. The pointer is
// valid until the next failing call on the same thread.
const char *dp_last_error_message(void);

// The default extraction parameters.
struct DpSolverParams dp_params_default(void);

// Loads a PNG or binary PPM/PGM image. On success `*out` owns the handle;
// release it with `dp_image_free`.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum DpStatus dp_image_load(const char *path, struct DpImage **out);

// Writes an image as an 8-bit PNG.
//
// # Safety
// `image` must be a live handle from this library; `path` NUL-terminated.
enum DpStatus dp_image_save(const struct DpImage *image, const char *path);

// # Safety
// `image` must come from this library and not be freed twice.
void dp_image_free(struct DpImage *image);

unsigned int dp_image_width(const struct DpImage *image);

unsigned int dp_image_height(const struct DpImage *image);

unsigned int dp_image_channels(const struct DpImage *image);

// Extracts the multiplicative detail layer with the fast solver.
//
// # Safety
// `image` must be a live handle; `params` and `out` valid pointers.
enum DpStatus dp_detail_extract(const struct DpImage *image,
                                const struct DpSolverParams *params,
                                struct DpDetail **out);

// # Safety
// `detail` must come from this library and not be freed twice.
void dp_detail_free(struct DpDetail *detail);

unsigned int dp_detail_width(const struct DpDetail *detail);

unsigned int dp_detail_height(const struct DpDetail *detail);

// Saves a detail layer in the DPLN plane format.
//
// # Safety
// `detail` must be a live handle; `path` NUL-terminated.
enum DpStatus dp_detail_save(const struct DpDetail *detail, const char *path);

// Loads a detail layer from a DPLN file (entries must be positive).
//
// # Safety
// `path` must be NUL-terminated; `out` a valid pointer.
enum DpStatus dp_detail_load(const char *path, struct DpDetail **out);

// Enhances an image by the detail layer: Y' = Y * detail^gain.
//
// # Safety
// `image` and `detail` must be live handles; `out` a valid pointer.
enum DpStatus dp_enhance(const struct DpImage *image,
                         const struct DpDetail *detail,
                         double gain,
                         struct DpImage **out);

// Sparsity statistics of a detail layer (|log2 detail| magnitudes).
//
// # Safety
// `detail` must be a live handle; out-pointers valid or null.
enum DpStatus dp_detail_sparsity(const struct DpDetail *detail,
                                 double threshold,
                                 double *l1_mean,
                                 double *near_zero_fraction);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DETAILPRIOR_H */
