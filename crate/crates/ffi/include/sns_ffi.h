#ifndef SNS_FFI_H
#define SNS_FFI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes of every fallible call.
typedef enum SnsStatus {
  SNS_STATUS_OK = 0,
  SNS_STATUS_NULL_POINTER = 1,
  SNS_STATUS_INVALID_ARGUMENT = 2,
  SNS_STATUS_GRID_MISMATCH = 3,
  SNS_STATUS_NOT_DIVERGENCE_FREE = 4,
  SNS_STATUS_FORMAT = 5,
  SNS_STATUS_CONFIG = 6,
  SNS_STATUS_EXPLOSION = 7,
  SNS_STATUS_NUMERIC_NAN = 8,
  SNS_STATUS_NON_CONVERGENCE = 9,
  SNS_STATUS_MANIFEST = 10,
  SNS_STATUS_IO = 11,
  SNS_STATUS_BUFFER_TOO_SMALL = 12,
  SNS_STATUS_PANIC = 13,
} SnsStatus;

// Divergence-free vector field handle.
typedef struct SnsField SnsField;

// Fourier grid handle.
typedef struct SnsGrid SnsGrid;

// Running solver handle.
typedef struct SnsSimulation SnsSimulation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` as a
// NUL-terminated string and returns its length without the terminator.
// A message longer than `len - 1` bytes is truncated. Passing a null `buf`
// only queries the length.
//
// # Safety
// `buf` must be null or valid for writes of `len` bytes.
size_t sns_last_error_message(char *buf, size_t len);

// Creates an `n × n` grid; `dealiased != 0` applies the two-thirds truncation.
//
// # Safety
// `out` must be valid for one pointer write.
enum SnsStatus sns_grid_new(size_t n, int32_t dealiased, struct SnsGrid **out);

// Releases a grid; null is ignored.
//
// # Safety
// `grid` must be null or a pointer returned by [`sns_grid_new`] not yet freed.
void sns_grid_free(struct SnsGrid *grid);

// Points per side, or 0 for a null grid.
//
// # Safety
// `grid` must be null or a live grid handle.
size_t sns_grid_n(const struct SnsGrid *grid);

// Largest retained frequency per axis, or -1 for a null grid.
//
// # Safety
// `grid` must be null or a live grid handle.
int32_t sns_grid_kmax(const struct SnsGrid *grid);

// Builds a field from physical samples (row-major, `n*n` values per
// component), removing the mean and projecting onto divergence-free fields.
//
// # Safety
// `grid` must be a live grid handle, `u1` and `u2` valid for `len` reads and
// `out` valid for one pointer write.
enum SnsStatus sns_field_from_physical(const struct SnsGrid *grid,
                                       const double *u1,
                                       const double *u2,
                                       size_t len,
                                       struct SnsField **out);

// Writes the physical samples of `field` into `u1` and `u2`, each of
// capacity `len >= n*n`.
//
// # Safety
// `field` must be a live field handle and `u1`, `u2` valid for `len` writes.
enum SnsStatus sns_field_to_physical(const struct SnsField *field,
                                     double *u1,
                                     double *u2,
                                     size_t len);

// Grid size of a field, or 0 for null.
//
// # Safety
// `field` must be null or a live field handle.
size_t sns_field_n(const struct SnsField *field);

// L² norm of a field on the unit-area torus.
//
// # Safety
// `field` must be a live field handle and `out` valid for one write.
enum SnsStatus sns_field_l2_norm(const struct SnsField *field, double *out);

// Reads an SNSF snapshot file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` valid for one pointer write.
enum SnsStatus sns_field_load(const char *path, struct SnsField **out);

// Writes a field as an SNSF snapshot file.
//
// # Safety
// `field` must be a live field handle and `path` a NUL-terminated string.
enum SnsStatus sns_field_save(const struct SnsField *field, const char *path);

// Releases a field; null is ignored.
//
// # Safety
// `field` must be null or a pointer returned by this library not yet freed.
void sns_field_free(struct SnsField *field);

// Creates a solver from config text in the `key = value` format of the CLI;
// relative paths resolve against `base_dir`.
//
// # Safety
// `config_text` and `base_dir` must be NUL-terminated strings and `out`
// valid for one pointer write.
enum SnsStatus sns_simulation_new(const char *config_text,
                                  const char *base_dir,
                                  struct SnsSimulation **out);

// Advances the solver by `steps` time steps. Stops at the first step that
// reports an explosion or a non-finite value.
//
// # Safety
// `sim` must be a live simulation handle.
enum SnsStatus sns_simulation_step(struct SnsSimulation *sim, size_t steps);

// Current time, or NaN for null.
//
// # Safety
// `sim` must be null or a live simulation handle.
double sns_simulation_time(const struct SnsSimulation *sim);

// Current frequency level, or NaN for null.
//
// # Safety
// `sim` must be null or a live simulation handle.
double sns_simulation_lambda(const struct SnsSimulation *sim);

// Copies the remainder `w` into a new field handle.
//
// # Safety
// `sim` must be a live simulation handle and `out` valid for one pointer write.
enum SnsStatus sns_simulation_w(const struct SnsSimulation *sim, struct SnsField **out);

// Copies the full velocity `u = X + Y + w` into a new field handle.
//
// # Safety
// `sim` must be a live simulation handle and `out` valid for one pointer write.
enum SnsStatus sns_simulation_velocity(const struct SnsSimulation *sim, struct SnsField **out);

// Releases a simulation; null is ignored.
//
// # Safety
// `sim` must be null or a pointer returned by [`sns_simulation_new`] not yet freed.
void sns_simulation_free(struct SnsSimulation *sim);

// Runs `sns simulate` on a config file, writing every artifact to its
// `out_dir`. Returns [`SnsStatus::Explosion`] or [`SnsStatus::NumericNan`]
// when the run stopped early; the artifacts are written in either case.
//
// # Safety
// `config_path` must be a NUL-terminated string.
enum SnsStatus sns_run_config(const char *config_path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SNS_FFI_H */
