#ifndef SBM_TCL_H
#define SBM_TCL_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum SbmStatus {
  SBM_STATUS_OK = 0,
  /*
   Invalid argument or null pointer.
   */
  SBM_STATUS_INVALID_ARGUMENT = 1,
  /*
   A numerical procedure failed or did not converge.
   */
  SBM_STATUS_NUMERICAL = 2,
  /*
   Configuration or I/O problem.
   */
  SBM_STATUS_CONFIG = 3,
  /*
   Internal panic caught at the boundary.
   */
  SBM_STATUS_PANIC = 4,
} SbmStatus;

/*
 Spectral density handle.
 */
typedef struct SbmDensity SbmDensity;

/*
 Trajectory handle.
 */
typedef struct SbmTrajectory SbmTrajectory;

typedef struct SbmSystem {
  double omega;
  double a1;
  double a3;
  double beta;
  double coupling_sq;
} SbmSystem;

typedef struct SbmBloch {
  double v1;
  double v2;
  double v3;
} SbmBloch;

typedef struct SbmSteadyState {
  struct SbmBloch gibbs;
  struct SbmBloch tcl_correction;
  struct SbmBloch mfgs_correction;
  struct SbmBloch assembled;
  struct SbmBloch assembled_mfgs;
  double tcl4_f30;
  double tcl4_f33;
} SbmSteadyState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Drude density `γΛ²ω/(Λ²+ω²)`.

 # Safety
 `out` must be a valid pointer to writable storage for one handle.
 */
enum SbmStatus sbm_density_drude(double gamma, double lambda_cut, struct SbmDensity **out);

/*
 Double-quantum-dot phonon density with a sinc form factor and Gaussian cutoff.

 # Safety
 `out` must be a valid pointer to writable storage for one handle.
 */
enum SbmStatus sbm_density_dqd_sinc(double gamma,
                                    double omega_c,
                                    double omega_max,
                                    struct SbmDensity **out);

/*
 # Safety
 `density` must be null or a handle not yet freed.
 */
void sbm_density_free(struct SbmDensity *density);

/*
 Fill `out` from double-dot detuning and tunnelling.

 # Safety
 `out` must point to writable storage for one `SbmSystem`.
 */
enum SbmStatus sbm_system_from_dqd(double epsilon,
                                   double t_c,
                                   double beta,
                                   double coupling_sq,
                                   struct SbmSystem *out);

/*
 Second-order steady state by both routes. `rel_tol <= 0` selects the default.

 # Safety
 Pointers must be valid; `density` must be a live handle.
 */
enum SbmStatus sbm_steady_state(const struct SbmSystem *sys,
                                const struct SbmDensity *density,
                                double rel_tol,
                                struct SbmSteadyState *out);

/*
 Second-order generator, row-major into `out[16]`. A negative or NaN
 `time` selects the long-time limit.

 # Safety
 `out` must point to 16 writable doubles.
 */
enum SbmStatus sbm_tcl2_generator(const struct SbmSystem *sys,
                                  const struct SbmDensity *density,
                                  double time,
                                  double *out);

/*
 Long-time fourth-order coefficients `F₃₀` and `F₃₃`.

 # Safety
 Output pointers must be writable.
 */
enum SbmStatus sbm_tcl4_coefficients(const struct SbmSystem *sys,
                                     const struct SbmDensity *density,
                                     double *out_f30,
                                     double *out_f33);

/*
 Evolve `v_init` to `t_max`, sampling every `dt_out`.

 # Safety
 Pointers must be valid; `out` receives a handle freed by `sbm_trajectory_free`.
 */
enum SbmStatus sbm_evolve(const struct SbmSystem *sys,
                          const struct SbmDensity *density,
                          const struct SbmBloch *v_init,
                          double t_max,
                          double dt_out,
                          struct SbmTrajectory **out);

/*
 Number of samples; 0 for a null handle.

 # Safety
 `traj` must be null or a live handle.
 */
uintptr_t sbm_trajectory_len(const struct SbmTrajectory *traj);

/*
 Sample `index` of a trajectory.

 # Safety
 `traj` must be a live handle; output pointers must be writable.
 */
enum SbmStatus sbm_trajectory_sample(const struct SbmTrajectory *traj,
                                     uintptr_t index,
                                     double *out_t,
                                     struct SbmBloch *out_v);

/*
 # Safety
 `traj` must be null or a handle not yet freed.
 */
void sbm_trajectory_free(struct SbmTrajectory *traj);

/*
 Copy the calling thread's last error message into `buf` (NUL-terminated,
 truncated to `len`). Returns the full message length excluding the NUL.

 # Safety
 `buf` must be null or point to `len` writable bytes.
 */
uintptr_t sbm_last_error(char *buf, uintptr_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SBM_TCL_H */
