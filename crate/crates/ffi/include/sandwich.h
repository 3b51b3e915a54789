#ifndef SANDWICH_H
#define SANDWICH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum SandwichStatus {
  SANDWICH_STATUS_OK = 0,
  SANDWICH_STATUS_NULL_POINTER = 1,
  SANDWICH_STATUS_INVALID_ARGUMENT = 2,
  SANDWICH_STATUS_CONFIG = 3,
  SANDWICH_STATUS_DOMAIN = 4,
  SANDWICH_STATUS_MESH_CONDITION = 5,
  SANDWICH_STATUS_NUMERICAL = 6,
  SANDWICH_STATUS_BUFFER_TOO_SMALL = 7,
  SANDWICH_STATUS_IO = 8,
  SANDWICH_STATUS_PANIC = 9,
} SandwichStatus;

/**
 * A parsed run configuration: model, driver and solver options.
 */
typedef struct SandwichModel SandwichModel;

/**
 * One sampled driver path on the model grid.
 */
typedef struct SandwichNoise SandwichNoise;

/**
 * One simulated solution path.
 */
typedef struct SandwichPath SandwichPath;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *sandwich_version(void);

/**
 * Message of the last failed call on this thread, or NULL. The pointer stays
 * valid until the next call into the library from the same thread.
 */
const char *sandwich_last_error_message(void);

/**
 * Parses a JSON configuration into a new model handle.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SandwichStatus sandwich_model_from_json(const char *json, struct SandwichModel **out);

/**
 * Releases a model. NULL is ignored.
 *
 * # Safety
 * `model` must come from [`sandwich_model_from_json`] and not be used again.
 */
void sandwich_model_free(struct SandwichModel *model);

/**
 * Number of grid steps `N` of the model.
 *
 * # Safety
 * `model` must be a live handle and `out` a valid pointer.
 */
enum SandwichStatus sandwich_model_steps(const struct SandwichModel *model, size_t *out);

/**
 * Largest admissible mesh of the model.
 *
 * # Safety
 * `model` must be a live handle and `out` a valid pointer.
 */
enum SandwichStatus sandwich_model_max_mesh(const struct SandwichModel *model, double *out);

/**
 * Runs the assumption checks; `*all_pass` is 1 when every check passes.
 * Failing check descriptions are available from the last error message.
 *
 * # Safety
 * `model` must be a live handle and `all_pass` a valid pointer.
 */
enum SandwichStatus sandwich_model_validate(const struct SandwichModel *model, int32_t *all_pass);

/**
 * Samples the model's driver with the given seed. The first call builds the
 * sampler (for example a Cholesky factor), and later calls reuse it.
 *
 * # Safety
 * `model` must be a live handle not used concurrently, `out` a valid pointer.
 */
enum SandwichStatus sandwich_noise_sample(struct SandwichModel *model,
                                          uint64_t seed,
                                          struct SandwichNoise **out);

/**
 * Releases a noise path. NULL is ignored.
 *
 * # Safety
 * `noise` must come from [`sandwich_noise_sample`] and not be used again.
 */
void sandwich_noise_free(struct SandwichNoise *noise);

/**
 * Number of values `N + 1` of a noise path.
 *
 * # Safety
 * `noise` must be a live handle.
 */
size_t sandwich_noise_len(const struct SandwichNoise *noise);

/**
 * Copies the noise values `Z(t_0), …, Z(t_N)` into `buf`.
 *
 * # Safety
 * `noise` must be a live handle and `buf` writable for `len` doubles.
 */
enum SandwichStatus sandwich_noise_values(const struct SandwichNoise *noise,
                                          double *buf,
                                          size_t len);

/**
 * Simulates the model driven by `noise`.
 *
 * # Safety
 * `model` and `noise` must be live handles, `out` a valid pointer.
 */
enum SandwichStatus sandwich_simulate(const struct SandwichModel *model,
                                      const struct SandwichNoise *noise,
                                      struct SandwichPath **out);

/**
 * Releases a solution path. NULL is ignored.
 *
 * # Safety
 * `path` must come from [`sandwich_simulate`] and not be used again.
 */
void sandwich_path_free(struct SandwichPath *path);

/**
 * Number of values `N + 1` of a solution path.
 *
 * # Safety
 * `path` must be a live handle.
 */
size_t sandwich_path_len(const struct SandwichPath *path);

/**
 * Copies `Ŷ(t_0), …, Ŷ(t_N)` into `buf`.
 *
 * # Safety
 * `path` must be a live handle and `buf` writable for `len` doubles.
 */
enum SandwichStatus sandwich_path_values(const struct SandwichPath *path, double *buf, size_t len);

/**
 * Smallest distances of the path to the lower and (two-sided) upper bound;
 * `*upper` is set to infinity for one-sided models.
 *
 * # Safety
 * `model` and `path` must be live handles, `lower` and `upper` valid pointers.
 */
enum SandwichStatus sandwich_path_bound_distance(const struct SandwichModel *model,
                                                 const struct SandwichPath *path,
                                                 double *lower,
                                                 double *upper);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SANDWICH_H */
