#pragma once

/* Generated with cbindgen:0.27.0 */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TfchInitial {
  TFCH_INITIAL_BUMP = 0,
  TFCH_INITIAL_ZERO = 1,
} TfchInitial;

typedef enum TfchSource {
  TFCH_SOURCE_NONE = 0,
  TFCH_SOURCE_MANUFACTURED = 1,
} TfchSource;

typedef enum TfchStatus {
  TFCH_STATUS_OK = 0,
  TFCH_STATUS_INVALID_ARGUMENT = 1,
  TFCH_STATUS_NUMERIC = 2,
  TFCH_STATUS_NON_CONVERGENCE = 3,
  TFCH_STATUS_NULL_POINTER = 4,
  TFCH_STATUS_BUFFER_TOO_SMALL = 5,
  TFCH_STATUS_PANIC = 6,
} TfchStatus;

// Opaque temporal mesh.
typedef struct TfchMesh TfchMesh;

// Opaque result of a full solver run.
typedef struct TfchRun TfchRun;

// Solver parameters; start from [`tfch_params_default`].
typedef struct TfchParams {
  double alpha;
  double kappa;
  double epsilon;
  double domain_a;
  double domain_b;
  // Number of spatial intervals.
  size_t m;
  double iteration_tol;
  size_t max_iterations;
  enum TfchInitial initial;
  enum TfchSource source;
  // Replace `u^3 - u` by `-u`.
  bool linear;
} TfchParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message into `buf` (NUL terminated,
// truncated to `len`) and returns the full message length plus one.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t tfch_last_error_message(char *buf, size_t len);

// Graded cubic mesh with `n` steps on `[0, horizon]`.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum TfchStatus tfch_mesh_graded_cubic(size_t n, double horizon, struct TfchMesh **out);

// Uniform mesh with `n` steps on `[0, horizon]`.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum TfchStatus tfch_mesh_uniform(size_t n, double horizon, struct TfchMesh **out);

// Mesh from `len` positive steps.
//
// # Safety
// `steps` must point to `len` readable values and `out` to storage for one handle.
enum TfchStatus tfch_mesh_custom(const double *steps, size_t len, struct TfchMesh **out);

// # Safety
// `mesh` must be null or a handle from a `tfch_mesh_*` constructor not yet freed.
void tfch_mesh_free(struct TfchMesh *mesh);

// Number of steps `N`, or 0 for a null handle.
//
// # Safety
// `mesh` must be null or a live mesh handle.
size_t tfch_mesh_len(const struct TfchMesh *mesh);

// Writes the `N + 1` nodes `t_0..t_N`.
//
// # Safety
// `mesh` must be a live mesh handle and `out` must point to `capacity` writable values.
enum TfchStatus tfch_mesh_nodes(const struct TfchMesh *mesh, double *out, size_t capacity);

// Whether every ratio satisfies `1 <= rho_k <= rho*(alpha)`.
//
// # Safety
// `mesh` must be a live mesh handle and `out` a valid pointer.
enum TfchStatus tfch_mesh_ratio_bound_ok(const struct TfchMesh *mesh, double alpha, bool *out);

// Largest admissible step ratio for `alpha` in `(0, 1]`.
//
// # Safety
// `out` must be a valid pointer.
enum TfchStatus tfch_rho_star(double alpha, double *out);

// Weight of the current step in the split form of the L2 formula.
//
// # Safety
// `out` must be a valid pointer.
enum TfchStatus tfch_theta(double alpha, double *out);

// Minimum of `rho*` over the order and its location.
//
// # Safety
// `rho` and `alpha` must be valid pointers.
enum TfchStatus tfch_rho_bar(double *rho, double *alpha);

// Writes the `n` kernels `B_j^{(n)}`, `j = 0..n-1` (lag order).
//
// # Safety
// `mesh` must be a live mesh handle and `out` must point to `capacity` writable values.
enum TfchStatus tfch_kernel_row_b(const struct TfchMesh *mesh,
                                  double alpha,
                                  size_t n,
                                  double *out,
                                  size_t capacity);

// Discrete Caputo derivative at level `len - 1` of the values `w^0..w^{len-1}`.
//
// # Safety
// `mesh` must be a live mesh handle, `history` must point to `len` readable
// values and `out` must be a valid pointer.
enum TfchStatus tfch_apply_caputo(const struct TfchMesh *mesh,
                                  double alpha,
                                  const double *history,
                                  size_t len,
                                  double *out);

// Unit domain, `kappa = 0.01`, `epsilon = 0.1`, tolerance `1e-10`, 500 iterations,
// bump initial data, no source, double-well nonlinearity.
struct TfchParams tfch_params_default(double alpha, size_t m);

// Runs the solver over the whole mesh.
//
// # Safety
// `params` and `mesh` must be valid pointers and `out` must point to storage for one handle.
enum TfchStatus tfch_solve(const struct TfchParams *params,
                           const struct TfchMesh *mesh,
                           struct TfchRun **out);

// # Safety
// `run` must be null or a handle from [`tfch_solve`] not yet freed.
void tfch_run_free(struct TfchRun *run);

// Number of stored levels `N + 1`, or 0 for a null handle.
//
// # Safety
// `run` must be null or a live run handle.
size_t tfch_run_levels(const struct TfchRun *run);

// Grid values per state, `M + 1`, or 0 for a null handle.
//
// # Safety
// `run` must be null or a live run handle.
size_t tfch_run_state_len(const struct TfchRun *run);

// Writes the `M + 1` values of `u^n`, boundary included.
//
// # Safety
// `run` must be a live run handle and `out` must point to `capacity` writable values.
enum TfchStatus tfch_run_state(const struct TfchRun *run, size_t n, double *out, size_t capacity);

// Writes the fixed-point iteration counts of steps `1..N`.
//
// # Safety
// `run` must be a live run handle and `out` must point to `capacity` writable values.
enum TfchStatus tfch_run_iterations(const struct TfchRun *run, size_t *out, size_t capacity);

// Writes the free energy and the modified energy at levels `0..N`; the
// modified energy at level 0 is NaN. Either output may be null.
//
// # Safety
// `run` must be a live run handle; non-null outputs must point to `capacity` writable values.
enum TfchStatus tfch_run_energy(const struct TfchRun *run,
                                double *free_energy,
                                double *modified,
                                size_t capacity);

// Writes the trapezoidal mass at levels `0..N`.
//
// # Safety
// `run` must be a live run handle and `out` must point to `capacity` writable values.
enum TfchStatus tfch_run_mass(const struct TfchRun *run, double *out, size_t capacity);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus
