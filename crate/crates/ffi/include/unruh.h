#ifndef UNRUH_H
#define UNRUH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum UnruhStatus {
  UNRUH_STATUS_OK = 0,
  UNRUH_STATUS_NULL_POINTER = 1,
  UNRUH_STATUS_MU_OUT_OF_RANGE = 2,
  UNRUH_STATUS_INVALID_PARAMETER = 3,
  UNRUH_STATUS_DIMENSION_MISMATCH = 4,
  UNRUH_STATUS_UNKNOWN_MODE = 5,
  UNRUH_STATUS_NUMERICAL = 6,
  UNRUH_STATUS_BUFFER_TOO_SMALL = 7,
  UNRUH_STATUS_PANIC = 8,
} UnruhStatus;

typedef enum UnruhCheat {
  UNRUH_CHEAT_NONE = 0,
  UNRUH_CHEAT_INJECTION = 1,
  UNRUH_CHEAT_REPORT_FLIP = 2,
} UnruhCheat;

typedef enum UnruhParty {
  UNRUH_PARTY_ALICE = 0,
  UNRUH_PARTY_BOB = 1,
} UnruhParty;

/**
 * Opaque Gaussian state.
 */
typedef struct UnruhGaussianState UnruhGaussianState;

typedef struct UnruhCoinFlipConfig {
  double mu;
  double efficiency_alice;
  double dark_count_alice;
  double efficiency_bob;
  double dark_count_bob;
  uint64_t trials;
  uint64_t seed;
  enum UnruhCheat cheat;
  /**
   * Injection: extra photons and evasion probability.
   */
  uint64_t photons;
  double evade_prob;
  /**
   * Report flip: the party that negates its bit.
   */
  enum UnruhParty cheater;
} UnruhCoinFlipConfig;

typedef struct UnruhCoinFlipStats {
  double p_outcome0;
  double p_outcome1;
  double p_fail;
  double agreement_rate;
  double epsilon0;
  double epsilon0_stderr;
  double epsilon1;
  double epsilon1_stderr;
  double abort_adjusted_bias0;
  double abort_adjusted_bias1;
  /**
   * 0 for Alice, 1 for Bob.
   */
  uint32_t reference_party;
} UnruhCoinFlipStats;

typedef struct UnruhConditional {
  /**
   * Centre `(x, p)` of the state Alice assigns to Bob's mode.
   */
  double center[2];
  /**
   * Row-major 2x2 covariance.
   */
  double covariance[4];
  /**
   * Overlap of the recentred state with the input coherent state.
   */
  double fidelity_recentred;
} UnruhConditional;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next call into this library on the same thread.
 */
const char *unruh_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *unruh_version(void);

/**
 * Vacuum on `n_modes` modes labelled "0", "1", ...
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum UnruhStatus unruh_state_vacuum(size_t n_modes, struct UnruhGaussianState **out);

/**
 * Two-mode squeezed vacuum with modes "0" and "1"; `sign` is +1 or -1.
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum UnruhStatus unruh_state_two_mode_squeezed(double mu,
                                               double sign,
                                               struct UnruhGaussianState **out);

/**
 * Minkowski description of a cooled Rindler pair, modes "0" and "1".
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum UnruhStatus unruh_state_rindler_vacuum_in_minkowski(double mu,
                                                         struct UnruhGaussianState **out);

/**
 * Applies the frame change to modes `first` and `first + 1` of a state.
 * `to_rindler` nonzero maps the inertial description to the accelerated one.
 *
 * # Safety
 * `state` must be a live handle; `out` a valid pointer to a handle slot.
 */
enum UnruhStatus unruh_state_change_frame(const struct UnruhGaussianState *state,
                                          size_t first,
                                          double mu,
                                          int32_t to_rindler,
                                          struct UnruhGaussianState **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `state` must be null or a handle not yet freed.
 */
void unruh_state_free(struct UnruhGaussianState *state);

/**
 * Number of modes, or 0 for a null handle.
 *
 * # Safety
 * `state` must be null or a live handle.
 */
size_t unruh_state_n_modes(const struct UnruhGaussianState *state);

/**
 * Copies the `2M` mean vector into `buf`.
 *
 * # Safety
 * `state` must be a live handle and `buf` must hold `len` doubles.
 */
enum UnruhStatus unruh_state_mean(const struct UnruhGaussianState *state, double *buf, size_t len);

/**
 * Copies the `2M x 2M` covariance matrix into `buf`, row-major.
 *
 * # Safety
 * `state` must be a live handle and `buf` must hold `len` doubles.
 */
enum UnruhStatus unruh_state_covariance(const struct UnruhGaussianState *state,
                                        double *buf,
                                        size_t len);

/**
 * Normalized Wigner function at a `2M`-dimensional point.
 *
 * # Safety
 * `state` must be a live handle, `point` must hold `len` doubles, `out` writable.
 */
enum UnruhStatus unruh_state_wigner(const struct UnruhGaussianState *state,
                                    const double *point,
                                    size_t len,
                                    double *out);

/**
 * Purity `Tr(rho^2)`.
 *
 * # Safety
 * `state` must be a live handle and `out` writable.
 */
enum UnruhStatus unruh_state_purity(const struct UnruhGaussianState *state, double *out);

/**
 * Mean photon number of mode `mode`.
 *
 * # Safety
 * `state` must be a live handle and `out` writable.
 */
enum UnruhStatus unruh_state_mean_photons(const struct UnruhGaussianState *state,
                                          size_t mode,
                                          double *out);

/**
 * `Var(x_1 - x_2) + Var(p_1 + p_2)` of a two-mode state.
 *
 * # Safety
 * `state` must be a live handle and `out` writable.
 */
enum UnruhStatus unruh_duan_epr(const struct UnruhGaussianState *state, double *out);

/**
 * Displaced-parity CHSH value with test points `{0, a}` and `{0, b}`.
 *
 * # Safety
 * `state` must be a live handle and `out` writable.
 */
enum UnruhStatus unruh_chsh_parity(const struct UnruhGaussianState *state,
                                   double a_re,
                                   double a_im,
                                   double b_re,
                                   double b_im,
                                   double *out);

/**
 * `mu = exp(-pi omega c / a)`.
 *
 * # Safety
 * `out` must be writable.
 */
enum UnruhStatus unruh_mu_from_acceleration(double acceleration,
                                            double rindler_frequency,
                                            double speed_of_light,
                                            double *out);

/**
 * Acceleration at which `mu^2 = 1/2`.
 *
 * # Safety
 * `out` must be writable.
 */
enum UnruhStatus unruh_fair_coin_acceleration(double rindler_frequency,
                                              double speed_of_light,
                                              double *out);

/**
 * Runs the coin flip on `shards` threads; results do not depend on `shards`.
 *
 * # Safety
 * `config` must be readable and `out` writable.
 */
enum UnruhStatus unruh_coinflip_run(const struct UnruhCoinFlipConfig *config,
                                    size_t shards,
                                    struct UnruhCoinFlipStats *out);

/**
 * Alice's conditional description of Bob's mode for given outcomes `(x, p)`.
 *
 * # Safety
 * `out` must be writable.
 */
enum UnruhStatus unruh_teleport_conditional(double mu,
                                            double alpha_re,
                                            double alpha_im,
                                            double x,
                                            double p,
                                            struct UnruhConditional *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UNRUH_H */
