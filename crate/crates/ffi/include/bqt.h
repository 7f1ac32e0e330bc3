#ifndef BQT_H
#define BQT_H

/* Generated from crates/ffi/src/lib.rs. Keep in sync; tests/header.rs checks it. */

#include <stddef.h>
#include <stdint.h>

typedef enum BqtBranch {
  BQT_BRANCH_NO_ENTANGLEMENT = 0,
  BQT_BRANCH_MID_DIMENSION = 1,
  BQT_BRANCH_HIGH_DIMENSION = 2,
} BqtBranch;

// POVM element selector for [`bqt_solution_witness`].
typedef enum BqtPovmElement {
  BQT_POVM_ELEMENT_K = 0,
  BQT_POVM_ELEMENT_L = 1,
  BQT_POVM_ELEMENT_N = 2,
} BqtPovmElement;

typedef enum BqtSolveStatus {
  BQT_SOLVE_STATUS_OPTIMAL = 0,
  BQT_SOLVE_STATUS_NEAR_OPTIMAL = 1,
  BQT_SOLVE_STATUS_INFEASIBLE = 2,
  BQT_SOLVE_STATUS_NUMERICAL_FAILURE = 3,
} BqtSolveStatus;

typedef enum BqtStatus {
  BQT_STATUS_OK = 0,
  BQT_STATUS_NULL_POINTER = 1,
  BQT_STATUS_INVALID_PARAMETER = 2,
  BQT_STATUS_DIMENSION_MISMATCH = 3,
  BQT_STATUS_INVALID_STATE = 4,
  BQT_STATUS_SOLVER = 5,
  BQT_STATUS_JSON = 6,
  BQT_STATUS_PANIC = 7,
} BqtStatus;

// Opaque simulation-error solution.
typedef struct BqtSolution BqtSolution;

// Opaque bipartite state.
typedef struct BqtState BqtState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failure on this thread, or NULL. The pointer stays
// valid until the next failing call on the same thread.
const char *bqt_last_error(void);

// Library version as a static NUL-terminated string.
const char *bqt_version(void);

BqtStatus bqt_state_isotropic(double fidelity, size_t dim, BqtState **out);

BqtStatus bqt_state_gadc(double gamma, double noise, BqtState **out);

// Maximally entangled state on `d x d`.
BqtStatus bqt_state_max_entangled(size_t d, BqtState **out);

// Maximally mixed state on `d x d`.
BqtStatus bqt_state_maximally_mixed(size_t d, BqtState **out);

// Parses the JSON state format (`rows`, `cols`, `re`, `im`, `dimA`, `dimB`).
BqtStatus bqt_state_from_json(const char *json, BqtState **out);

BqtStatus bqt_state_dims(const BqtState *state, size_t *dim_a, size_t *dim_b);

void bqt_state_free(BqtState *state);

// Solves the PPT simulation-error program for the swap of dimension `d`.
BqtStatus bqt_ppt_simulation_error(const BqtState *state, size_t d, BqtSolution **out);

BqtStatus bqt_solution_value(const BqtSolution *sol, double *value);

// Unclipped value, as compared against closed forms.
BqtStatus bqt_solution_raw_value(const BqtSolution *sol, double *value);

BqtStatus bqt_solution_max_residual(const BqtSolution *sol, double *residual);

BqtStatus bqt_solution_status(const BqtSolution *sol, BqtSolveStatus *status);

// Copies one POVM element, row-major, into `re` and `im`, each holding
// `len` doubles. `len` must equal `n * n` for the `n x n` element; call with
// NULL buffers to query `n` through `dim`.
BqtStatus bqt_solution_witness(const BqtSolution *sol,
                               BqtPovmElement which,
                               double *re,
                               double *im,
                               size_t len,
                               size_t *dim);

void bqt_solution_free(BqtSolution *sol);

// `1 - 1/d^2`.
BqtStatus bqt_no_resource_error(size_t d, double *value);

// Closed-form error for an isotropic resource. `branch` and `locc_tight`
// may be NULL.
BqtStatus bqt_isotropic_error(size_t d,
                              double fidelity,
                              size_t dim_resource,
                              double *value,
                              BqtBranch *branch,
                              int *locc_tight);

// `1 - max{F(gamma, N), 1/16}`.
BqtStatus bqt_gadc_error(double gamma, double noise, double *value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BQT_H */
