#ifndef KERRCAT_H
#define KERRCAT_H

#include <stddef.h>

// Result of every fallible call.
typedef enum KcStatus {
  KC_STATUS_OK = 0,
  // Bad configuration or argument values.
  KC_STATUS_VALIDATION = 1,
  // A computation failed numerically.
  KC_STATUS_NUMERICAL = 2,
  // A required pointer was null or a string was not UTF-8.
  KC_STATUS_INVALID_ARGUMENT = 3,
  // The requested column does not exist.
  KC_STATUS_UNKNOWN_COLUMN = 4,
  // The output buffer is shorter than the column.
  KC_STATUS_BUFFER_TOO_SMALL = 5,
  // Internal panic; the library state is still consistent.
  KC_STATUS_PANIC = 6,
} KcStatus;

// Calibrated control schedule.
typedef struct KcSchedule KcSchedule;

// Robustness or decoherence grid.
typedef struct KcSweep KcSweep;

// Population trajectory, with renormalized columns when `renormalize = true`.
typedef struct KcTrajectory KcTrajectory;

// Library version as a static nul-terminated string.
const char *kc_version(void);

// Message for the last failure on this thread, or null after a success.
// The pointer stays valid until the next `kc_*` call on the same thread.
const char *kc_last_error(void);

// Designs the configured protocol and calibrates its drives against the
// configured truncation.
//
// # Safety
// `config` must be a nul-terminated string and `out` a valid pointer.
enum KcStatus kc_design(const char *config, struct KcSchedule **out);

// Number of samples in the schedule; 0 for a null handle.
//
// # Safety
// `schedule` must be null or a live handle from [`kc_design`].
size_t kc_schedule_len(const struct KcSchedule *schedule);

// Copies one schedule column (any name from the schedule CSV header) into `out`.
//
// # Safety
// `schedule` must be a live handle, `name` a nul-terminated string and
// `out` valid for `capacity` writes.
enum KcStatus kc_schedule_column(const struct KcSchedule *schedule,
                                 const char *name,
                                 double *out,
                                 size_t capacity);

// # Safety
// `schedule` must be null or a handle not yet freed.
void kc_schedule_free(struct KcSchedule *schedule);

// Propagates |C+> under the configured model, noise and control errors.
//
// # Safety
// `config` must be a nul-terminated string and `out` a valid pointer.
enum KcStatus kc_evolve(const char *config, struct KcTrajectory **out);

// Number of output times; 0 for a null handle.
//
// # Safety
// `traj` must be null or a live handle from [`kc_evolve`].
size_t kc_trajectory_len(const struct KcTrajectory *traj);

// P₋ at the final time; NaN for a null handle.
//
// # Safety
// `traj` must be null or a live handle from [`kc_evolve`].
double kc_trajectory_final_p_minus(const struct KcTrajectory *traj);

// Copies one trajectory column (any name from the trajectory CSV header) into `out`.
//
// # Safety
// `traj` must be a live handle, `name` a nul-terminated string and `out`
// valid for `capacity` writes.
enum KcStatus kc_trajectory_column(const struct KcTrajectory *traj,
                                   const char *name,
                                   double *out,
                                   size_t capacity);

// # Safety
// `traj` must be null or a handle not yet freed.
void kc_trajectory_free(struct KcTrajectory *traj);

// Runs the configured sweep (`sweep = robustness` or `decoherence`). Cells
// that fail numerically hold NaN; the call itself still succeeds.
//
// # Safety
// `config` must be a nul-terminated string and `out` a valid pointer.
enum KcStatus kc_sweep(const char *config, struct KcSweep **out);

// Grid shape; both zero for a null handle. `p_minus` is row-major with the
// first axis (μ or t_f) varying slowest.
//
// # Safety
// `sweep` must be null or a live handle; `rows` and `cols` must be valid.
enum KcStatus kc_sweep_shape(const struct KcSweep *sweep, size_t *rows, size_t *cols);

// Copies the final P₋ grid into `out` (length rows × cols).
//
// # Safety
// `sweep` must be a live handle and `out` valid for `capacity` writes.
enum KcStatus kc_sweep_values(const struct KcSweep *sweep, double *out, size_t capacity);

// Number of grid cells whose propagation failed.
//
// # Safety
// `sweep` must be null or a live handle.
size_t kc_sweep_failures(const struct KcSweep *sweep);

// # Safety
// `sweep` must be null or a handle not yet freed.
void kc_sweep_free(struct KcSweep *sweep);

#endif  /* KERRCAT_H */
