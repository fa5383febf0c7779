#ifndef SVMARK_H
#define SVMARK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Result codes. `SVM_OK` is zero; everything else is an error.
 */
typedef enum SvmStatus {
  SVM_OK = 0,
  SVM_NULL_POINTER = 1,
  SVM_INVALID_ARGUMENT = 2,
  SVM_DIMENSION = 3,
  SVM_SINGULAR = 4,
  SVM_NO_CONVERGENCE = 5,
  SVM_FORMAT = 6,
  SVM_IO = 7,
  SVM_PANIC = 8,
} SvmStatus;

/**
 * An image of one (gray) or three (R, G, B) channels.
 */
typedef struct SvmImage SvmImage;

/**
 * Extraction key produced by [`svm_embed`].
 */
typedef struct SvmKey SvmKey;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Create an image from `channels · rows · cols` planar values.
 *
 * # Safety
 * `data` must point to that many readable doubles; `out` must be writable.
 */
enum SvmStatus svm_image_new(size_t channels,
                             size_t rows,
                             size_t cols,
                             const double *data,
                             struct SvmImage **out);

/**
 * # Safety
 * `img` must be null or a handle from this library not yet freed.
 */
void svm_image_free(struct SvmImage *img);

/**
 * Number of channels, or 0 for a null handle.
 *
 * # Safety
 * `img` must be null or a live handle.
 */
size_t svm_image_channels(const struct SvmImage *img);

/**
 * # Safety
 * `img` must be null or a live handle.
 */
size_t svm_image_rows(const struct SvmImage *img);

/**
 * # Safety
 * `img` must be null or a live handle.
 */
size_t svm_image_cols(const struct SvmImage *img);

/**
 * Copy the planar pixel data into `out`, which holds `len` doubles.
 *
 * # Safety
 * `img` must be a live handle and `out` writable for `len` doubles.
 */
enum SvmStatus svm_image_copy_data(const struct SvmImage *img, double *out, size_t len);

/**
 * Load a PGM, PPM or F64M file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum SvmStatus svm_image_load(const char *path, struct SvmImage **out);

/**
 * Save an image; the format follows the extension (.pgm, .ppm, .f64m).
 *
 * # Safety
 * `img` must be a live handle and `path` a NUL-terminated string.
 */
enum SvmStatus svm_image_save(const struct SvmImage *img, const char *path);

/**
 * Embed `mark` into `host` with strength `lambda`.
 *
 * # Safety
 * `host` and `mark` must be live handles; `out_marked` and `out_key` writable.
 */
enum SvmStatus svm_embed(const struct SvmImage *host,
                         const struct SvmImage *mark,
                         double lambda,
                         struct SvmImage **out_marked,
                         struct SvmKey **out_key);

/**
 * Recover the watermark from `suspect`.
 *
 * # Safety
 * `suspect` and `key` must be live handles; `out` writable.
 */
enum SvmStatus svm_extract(const struct SvmImage *suspect,
                           const struct SvmKey *key,
                           struct SvmImage **out);

/**
 * # Safety
 * `key` must be null or a handle from this library not yet freed.
 */
void svm_key_free(struct SvmKey *key);

/**
 * Embedding strength recorded in the key, or NaN for a null handle.
 *
 * # Safety
 * `key` must be null or a live handle.
 */
double svm_key_lambda(const struct SvmKey *key);

/**
 * # Safety
 * `key` must be a live handle and `path` a NUL-terminated string.
 */
enum SvmStatus svm_key_save(const struct SvmKey *key, const char *path);

/**
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum SvmStatus svm_key_load(const char *path, struct SvmKey **out);

/**
 * Additive Gaussian noise with standard deviation `sigma`, clamped to [0, 1].
 *
 * # Safety
 * `img` must be a live handle; `out` writable.
 */
enum SvmStatus svm_attack_noise(const struct SvmImage *img,
                                double sigma,
                                uint64_t seed,
                                struct SvmImage **out);

/**
 * Zero the rectangle with top-left corner (`x`, `y`).
 *
 * # Safety
 * `img` must be a live handle; `out` writable.
 */
enum SvmStatus svm_attack_crop(const struct SvmImage *img,
                               size_t x,
                               size_t y,
                               size_t width,
                               size_t height,
                               struct SvmImage **out);

/**
 * Simulated baseline JPEG at `quality` in 1..=100.
 *
 * # Safety
 * `img` must be a live handle; `out` writable.
 */
enum SvmStatus svm_attack_jpeg(const struct SvmImage *img, int32_t quality, struct SvmImage **out);

/**
 * Root-mean-square difference over all channels.
 *
 * # Safety
 * `a` and `b` must be live handles; `out` writable.
 */
enum SvmStatus svm_rmse(const struct SvmImage *a, const struct SvmImage *b, double *out);

/**
 * PSNR in dB. With `conventional` non-zero the peak is 1 instead of the
 * reference maximum.
 *
 * # Safety
 * `reference` and `test` must be live handles; `out` writable.
 */
enum SvmStatus svm_psnr(const struct SvmImage *reference,
                        const struct SvmImage *test,
                        int32_t conventional,
                        double *out);

/**
 * Zero-mean normalized cross-correlation.
 *
 * # Safety
 * `a` and `b` must be live handles; `out` writable.
 */
enum SvmStatus svm_ncc(const struct SvmImage *a, const struct SvmImage *b, double *out);

/**
 * Message for the last failed call on this thread, or null after a success.
 * The pointer stays valid until the next call into this library on the
 * same thread.
 */
const char *svm_last_error_message(void);

/**
 * Static description of a status code.
 */
const char *svm_status_string(enum SvmStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SVMARK_H */
