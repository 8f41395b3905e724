#ifndef OLDROYD_H
#define OLDROYD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ObStatus {
  OB_STATUS_OK = 0,
  OB_STATUS_NULL_POINTER = 1,
  OB_STATUS_INVALID_ARGUMENT = 2,
  OB_STATUS_CFL = 3,
  OB_STATUS_IO = 4,
  OB_STATUS_FORMAT = 5,
  OB_STATUS_INAPPLICABLE = 6,
  OB_STATUS_NUMERICAL = 7,
  OB_STATUS_PANIC = 8,
} ObStatus;

// Periodic grid of `n × n` points on `[0, L)²`.
typedef struct ObGrid ObGrid;

// Velocity and stress at a time, with the number of steps taken.
typedef struct ObState ObState;

// Model coefficients. `alpha` and `b` are ignored when `corotational` is
// true.
typedef struct ObModelParams {
  double a;
  double mu;
  double nu;
  double alpha;
  double b;
  bool corotational;
} ObModelParams;

// One diagnostics sample, same quantities and order as the series CSV
// columns.
typedef struct ObDiagnostics {
  double t;
  double l2_u;
  double h1_u;
  double l2_tau;
  double h1_tau;
  double h2_tau;
  double linf_tau;
  double l4_tau;
  double linf_omega;
  double l2_omega;
  double linf_gamma;
  double b0inf1_gamma;
  double besov_tau_b0inf1;
  double bkm_accum;
} ObDiagnostics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *ob_version(void);

// Message of the last failed call on this thread, or NULL after a
// successful call. The pointer stays valid until the next call into the
// library on the same thread.
const char *ob_last_error_message(void);

// Creates a grid. `n` must be even and at least 16, `box_len` positive.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum ObStatus ob_grid_new(size_t n, double box_len, struct ObGrid **out);

// # Safety
// `grid` must be NULL or a handle from [`ob_grid_new`] not yet freed.
void ob_grid_free(struct ObGrid *grid);

// # Safety
// `grid` must be a live grid handle and `out` writable.
enum ObStatus ob_state_zero(const struct ObGrid *grid, struct ObState **out);

// Taylor-Green velocity with zero stress. The box length must be a
// multiple of 2π.
//
// # Safety
// `grid` must be a live grid handle and `out` writable.
enum ObStatus ob_state_taylor_green(const struct ObGrid *grid, struct ObState **out);

// Seeded random solenoidal velocity and stress with the given amplitude.
//
// # Safety
// `grid` must be a live grid handle and `out` writable.
enum ObStatus ob_state_random_small(const struct ObGrid *grid,
                                    uint64_t seed,
                                    double amplitude,
                                    struct ObState **out);

// Rescaled vortex data `u₀ = εφ₀(εx)`, `φ₀(x) = A(x₂, −x₁)e^{−|x|²}`, with
// stress `τ₀ = ε²A e^{−|εx|²} Id`.
//
// # Safety
// `grid` must be a live grid handle and `out` writable.
enum ObStatus ob_state_remark12(const struct ObGrid *grid,
                                double amplitude,
                                double eps,
                                struct ObState **out);

// # Safety
// `state` must be NULL or a state handle not yet freed.
void ob_state_free(struct ObState *state);

// Simulation time of `state`, or NaN for NULL.
//
// # Safety
// `state` must be NULL or a live state handle.
double ob_state_time(const struct ObState *state);

// Number of steps taken since the initial data, or 0 for NULL.
//
// # Safety
// `state` must be NULL or a live state handle.
uint64_t ob_state_step_count(const struct ObState *state);

// Advances `state` in place by `steps` steps of size `dt`. On a CFL
// violation the state holds the last admissible step and
// `OB_STATUS_CFL` is returned.
//
// # Safety
// `state` must be a live state handle and `params` a valid pointer.
enum ObStatus ob_state_advance(struct ObState *state,
                               const struct ObModelParams *params,
                               double dt,
                               uint64_t steps,
                               double cfl_safety);

// Diagnostics of a single snapshot; `bkm_accum` is zero.
//
// # Safety
// `state` must be a live state handle, `params` valid and `out` writable.
enum ObStatus ob_state_diagnostics(const struct ObState *state,
                                   const struct ObModelParams *params,
                                   struct ObDiagnostics *out);

// L² residual of the Γ transport law, probed with a centered difference
// of step `dt_probe`. Only the co-rotational model with `nu = 0` is
// supported; other models return `OB_STATUS_INAPPLICABLE`.
//
// # Safety
// `state` must be a live state handle, `params` valid and `out` writable.
enum ObStatus ob_state_gamma_residual(const struct ObState *state,
                                      const struct ObModelParams *params,
                                      double dt_probe,
                                      double *out);

// Writes `state` as a binary checkpoint.
//
// # Safety
// `state` must be a live state handle and `path` a NUL-terminated string.
enum ObStatus ob_checkpoint_write(const struct ObState *state, const char *path);

// Reads a checkpoint into a new state handle.
//
// # Safety
// `path` must be a NUL-terminated string and `out` writable.
enum ObStatus ob_checkpoint_read(const char *path, struct ObState **out);

// Runs the configuration file at `config_path` like `oldroyd simulate`.
// On `OB_STATUS_OK`, `out_exit_code` receives the command-line exit code
// (0 completed, 2 blow-up suspected, 3 CFL failure).
//
// # Safety
// `config_path` must be a NUL-terminated string and `out_exit_code`
// writable.
enum ObStatus ob_simulate(const char *config_path, int32_t *out_exit_code);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OLDROYD_H */
