#ifndef WEIGHTLAB_H
#define WEIGHTLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Dyadic cubes only.
#define WL_FAMILY_DYADIC 0

// Every axis-parallel discrete cube.
#define WL_FAMILY_ALL_CUBES 1

typedef enum WlStatus {
  WL_STATUS_OK = 0,
  WL_STATUS_NULL_POINTER = 1,
  WL_STATUS_INVALID_ARGUMENT = 2,
  WL_STATUS_STRUCTURAL_VIOLATION = 3,
  WL_STATUS_EPSILON_OUT_OF_RANGE = 4,
  WL_STATUS_BELOW_THRESHOLD = 5,
  WL_STATUS_UNSUPPORTED = 6,
  WL_STATUS_INTERNAL = 7,
  WL_STATUS_PANIC = 8,
} WlStatus;

// A dyadic grid on the unit cube.
typedef struct WlGrid WlGrid;

// A finite quasimetric measure space.
typedef struct WlSpace WlSpace;

// A strictly positive weight.
typedef struct WlWeight WlWeight;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Builds a space from an `n × n` row-major distance matrix and `n` point
// masses.
//
// # Safety
// `dist` must point to `n * n` doubles and `measure` to `n`; `out` must be
// writable.
enum WlStatus wl_space_new(size_t n,
                           const double *dist,
                           const double *measure,
                           struct WlSpace **out);

// # Safety
// `space` must come from [`wl_space_new`] and not be used afterwards.
void wl_space_free(struct WlSpace *space);

// Number of points, `κ`, `C_μ` and `D_μ = log₂ C_μ`.
//
// # Safety
// `space` must be a live handle; out pointers must be writable.
enum WlStatus wl_space_structure(const struct WlSpace *space,
                                 size_t *n,
                                 double *kappa,
                                 double *c_mu,
                                 double *d_mu);

// # Safety
// `values` must point to `len` doubles; `out` must be writable.
enum WlStatus wl_weight_new(const double *values, size_t len, struct WlWeight **out);

// # Safety
// `weight` must come from [`wl_weight_new`] and not be used afterwards.
void wl_weight_free(struct WlWeight *weight);

// # Safety
// Handles must be live; `out` must be writable.
enum WlStatus wl_space_ap_constant(const struct WlSpace *space,
                                   const struct WlWeight *weight,
                                   double p,
                                   double *out);

// Fujii–Wilson `A_∞` constant over balls.
//
// # Safety
// Handles must be live; `out` must be writable.
enum WlStatus wl_space_fujii_wilson(const struct WlSpace *space,
                                    const struct WlWeight *weight,
                                    double *out);

// Exponential (Hruščev) `A_∞` constant over balls.
//
// # Safety
// Handles must be live; `out` must be writable.
enum WlStatus wl_space_exp_constant(const struct WlSpace *space,
                                    const struct WlWeight *weight,
                                    double *out);

// Uncentered maximal function of `f`, written to `out`.
//
// # Safety
// `f` and `out` must each hold `len` doubles, `len` equal to the number of
// points.
enum WlStatus wl_space_hl_maximal(const struct WlSpace *space,
                                  const double *f,
                                  size_t len,
                                  double *out);

// `τ_{κμ}` and `r = 1 + 1/(τ_{κμ}[w]_{A_∞})`.
//
// # Safety
// Out pointers must be writable.
enum WlStatus wl_r_exponent(double ainf, double kappa, double d_mu, double *tau, double *r);

// A depth-`depth` dyadic grid in dimension `dim`. `cell_measure` may be
// null for Lebesgue measure, otherwise it holds `2^(dim·depth)` positive
// cell masses in row-major order, first coordinate fastest.
//
// # Safety
// `cell_measure` is null or points to `2^(dim·depth)` doubles; `out` must
// be writable.
enum WlStatus wl_grid_new(uint32_t dim,
                          uint32_t depth,
                          const double *cell_measure,
                          struct WlGrid **out);

// # Safety
// `grid` must come from [`wl_grid_new`] and not be used afterwards.
void wl_grid_free(struct WlGrid *grid);

// Number of cells of the grid, `0` for a null handle.
//
// # Safety
// `grid` is null or a live handle.
size_t wl_grid_cells(const struct WlGrid *grid);

// Dyadic maximal function relative to the unit cube.
//
// # Safety
// `f` and `out` must each hold `len` doubles, `len` equal to the number of
// cells.
enum WlStatus wl_grid_dyadic_maximal(const struct WlGrid *grid,
                                     const double *f,
                                     size_t len,
                                     double *out);

// # Safety
// Handles must be live; `out` must be writable.
enum WlStatus wl_grid_ap_constant(const struct WlGrid *grid,
                                  const struct WlWeight *weight,
                                  double p,
                                  uint32_t family_code,
                                  double *out);

// # Safety
// Handles must be live; `out` must be writable.
enum WlStatus wl_grid_fujii_wilson(const struct WlGrid *grid,
                                   const struct WlWeight *weight,
                                   uint32_t family_code,
                                   double *out);

// # Safety
// Handles must be live; `out` must be writable.
enum WlStatus wl_grid_exp_constant(const struct WlGrid *grid,
                                   const struct WlWeight *weight,
                                   uint32_t family_code,
                                   double *out);

// Message of the last failed call on this thread, empty after a success.
// The pointer stays valid until the next call on the same thread.
const char *wl_last_error_message(void);

// Library version as a static string.
const char *wl_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WEIGHTLAB_H */
