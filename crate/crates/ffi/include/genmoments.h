#ifndef GENMOMENTS_H
#define GENMOMENTS_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GmDivergenceKind {
  GM_DIVERGENCE_KIND_KL = 0,
  GM_DIVERGENCE_KIND_RENYI = 1,
  GM_DIVERGENCE_KIND_POWER = 2,
  GM_DIVERGENCE_KIND_CHI_SQUARE = 3,
} GmDivergenceKind;

typedef enum GmInformationKind {
  GM_INFORMATION_KIND_MUTUAL = 0,
  GM_INFORMATION_KIND_CHI_SQUARE = 1,
  GM_INFORMATION_KIND_POWER = 2,
} GmInformationKind;

/**
 * Status codes.
 */
typedef enum GmStatus {
  GM_STATUS_OK = 0,
  GM_STATUS_NULL_POINTER = 1,
  GM_STATUS_INVALID_ARGUMENT = 2,
  GM_STATUS_NOT_ABSOLUTELY_CONTINUOUS = 3,
  GM_STATUS_ENUMERATION_TOO_LARGE = 4,
  GM_STATUS_SUPPORT_MISMATCH = 5,
  GM_STATUS_INVALID_UTF8 = 6,
  GM_STATUS_PARSE = 7,
  GM_STATUS_UNSUPPORTED = 8,
  GM_STATUS_PANIC = 9,
} GmStatus;

typedef enum GmTheorem {
  /**
   * Power-information moment bound; uses `m`, `t`, `info`.
   */
  GM_THEOREM_THM2 = 0,
  /**
   * Chi-square moment bound; uses `m`, `info`.
   */
  GM_THEOREM_COR1 = 1,
  /**
   * Expected generalization error; uses `q`, `info`.
   */
  GM_THEOREM_COR2 = 2,
  /**
   * Density-ratio moment bound; uses `m`, `r`.
   */
  GM_THEOREM_EQ9 = 3,
  /**
   * Mutual-information second moment; uses `info`.
   */
  GM_THEOREM_THM3 = 4,
  /**
   * Power-information single-draw bound; uses `t`, `delta`, `info`.
   */
  GM_THEOREM_THM4 = 5,
  /**
   * Rényi single-draw bound; uses `alpha`, `delta`, `info`.
   */
  GM_THEOREM_EQ12 = 6,
  /**
   * Chi-square single-draw bound; uses `delta`, `info`.
   */
  GM_THEOREM_COR3 = 7,
} GmTheorem;

typedef enum GmValidityMode {
  GM_VALIDITY_MODE_STRICT = 0,
  GM_VALIDITY_MODE_RELAXED = 1,
} GmValidityMode;

/**
 * Opaque discrete distribution.
 */
typedef struct GmDistribution GmDistribution;

/**
 * Opaque joint law of hypothesis and training set.
 */
typedef struct GmJoint GmJoint;

/**
 * Inputs of [`gm_bound`]. Fields a theorem does not use are ignored.
 */
typedef struct GmBoundParams {
  double sigma;
  size_t n;
  uint32_t m;
  uint32_t q;
  double t;
  double alpha;
  double delta;
  double info;
  double r;
} GmBoundParams;

typedef struct GmBoundResult {
  double value;
  /**
   * Valid under the requested mode.
   */
  bool valid;
  bool valid_strict;
  bool valid_relaxed;
} GmBoundResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *gm_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *gm_version(void);

/**
 * Builds a distribution from `len` atoms and weights. Weights are
 * normalised; repeated atoms are merged.
 *
 * # Safety
 * `atoms` and `probs` must point to `len` readable doubles; `out` must be
 * writable.
 */
enum GmStatus gm_distribution_new(const double *atoms,
                                  const double *probs,
                                  size_t len,
                                  struct GmDistribution **out);

/**
 * Number of distinct atoms.
 *
 * # Safety
 * `dist` must be a live handle or null; `out` must be writable.
 */
enum GmStatus gm_distribution_len(const struct GmDistribution *dist, size_t *out);

/**
 * Releases a distribution. Null is ignored.
 *
 * # Safety
 * `dist` must come from [`gm_distribution_new`] and not be used again.
 */
void gm_distribution_free(struct GmDistribution *dist);

/**
 * Divergence of `p` from `q`. `order` is the power order `t` or the
 * Rényi `α`; it is ignored for KL and chi-square.
 *
 * # Safety
 * `p` and `q` must be live handles; `out` must be writable.
 */
enum GmStatus gm_divergence(const struct GmDistribution *p,
                            const struct GmDistribution *q,
                            enum GmDivergenceKind kind,
                            double order,
                            double *out);

/**
 * Enumerates the joint of a model given as JSON (data, n, kernel, loss).
 *
 * # Safety
 * `model_json` must be a NUL-terminated string; `out` must be writable.
 */
enum GmStatus gm_joint_from_model_json(const char *model_json, struct GmJoint **out);

/**
 * Reads a joint given as JSON `{"w_atoms": [...], "s_count": k, "mass": [[...], ...]}`
 * where `mass` has one row of `s_count` entries per hypothesis.
 *
 * # Safety
 * `joint_json` must be a NUL-terminated string; `out` must be writable.
 */
enum GmStatus gm_joint_from_json(const char *joint_json, struct GmJoint **out);

/**
 * Releases a joint. Null is ignored.
 *
 * # Safety
 * `joint` must come from a `gm_joint_from_*` function and not be used again.
 */
void gm_joint_free(struct GmJoint *joint);

/**
 * Information measure of a joint; `t` is used only for power information.
 *
 * # Safety
 * `joint` must be a live handle; `out` must be writable.
 */
enum GmStatus gm_information(const struct GmJoint *joint,
                             enum GmInformationKind kind,
                             double t,
                             double *out);

/**
 * Largest `P(w|s)/P(w)` over the support.
 *
 * # Safety
 * `joint` must be a live handle; `out` must be writable.
 */
enum GmStatus gm_max_density_ratio(const struct GmJoint *joint, double *out);

/**
 * Evaluates one bound.
 *
 * # Safety
 * `params` must be readable and `out` writable.
 */
enum GmStatus gm_bound(enum GmTheorem theorem,
                       const struct GmBoundParams *params,
                       enum GmValidityMode mode,
                       struct GmBoundResult *out);

/**
 * Threshold above which the chi-square moment bound is tighter than the
 * power-information bound of order `t > 2`.
 *
 * # Safety
 * `out` must be writable.
 */
enum GmStatus gm_power_vs_chi2_threshold(uint32_t m, double t, double *out);

/**
 * Chi-square information above which the chi-square second-moment bound
 * is tighter than the mutual-information one (located by bisection).
 */
double gm_chi2_vs_mi_crossover(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GENMOMENTS_H */
