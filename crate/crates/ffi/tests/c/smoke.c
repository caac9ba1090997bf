#include <math.h>
#include <stdio.h>
#include "genmoments.h"

#define CHECK(cond)                                              \
    do {                                                         \
        if (!(cond)) {                                           \
            fprintf(stderr, "failed: %s (line %d)\n", #cond, __LINE__); \
            return 1;                                            \
        }                                                        \
    } while (0)

int main(void) {
    const double atoms[] = {0.0, 1.0};
    const double p_w[] = {0.5, 0.5};
    const double q_w[] = {0.25, 0.75};
    GmDistribution *p = NULL, *q = NULL;
    CHECK(gm_distribution_new(atoms, p_w, 2, &p) == GM_STATUS_OK);
    CHECK(gm_distribution_new(atoms, q_w, 2, &q) == GM_STATUS_OK);

    double chi2 = 0.0;
    CHECK(gm_divergence(p, q, GM_DIVERGENCE_KIND_CHI_SQUARE, 0.0, &chi2) == GM_STATUS_OK);
    CHECK(fabs(chi2 - 1.0 / 3.0) < 1e-12);

    const double one[] = {0.0};
    const double unit[] = {1.0};
    GmDistribution *point = NULL;
    CHECK(gm_distribution_new(one, unit, 1, &point) == GM_STATUS_OK);
    double kl = 0.0;
    CHECK(gm_divergence(p, point, GM_DIVERGENCE_KIND_KL, 0.0, &kl) ==
          GM_STATUS_NOT_ABSOLUTELY_CONTINUOUS);
    CHECK(gm_last_error_message() != NULL);

    GmJoint *joint = NULL;
    const char *model =
        "{\"data\":{\"discrete\":{\"atoms\":[0,1],\"probs\":[0.5,0.5]}},\"n\":2,"
        "\"kernel\":{\"type\":\"sample_mean\"},\"loss\":{\"type\":\"truncated_square\",\"c\":1}}";
    CHECK(gm_joint_from_model_json(model, &joint) == GM_STATUS_OK);
    double info = 0.0;
    CHECK(gm_information(joint, GM_INFORMATION_KIND_CHI_SQUARE, 0.0, &info) == GM_STATUS_OK);
    CHECK(fabs(info - 2.0) < 1e-12);

    GmBoundParams params = {0};
    params.sigma = 1.0;
    params.n = 9;
    params.info = 0.0;
    GmBoundResult r;
    CHECK(gm_bound(GM_THEOREM_THM3, &params, GM_VALIDITY_MODE_RELAXED, &r) == GM_STATUS_OK);
    CHECK(fabs(r.value - 1.0) < 1e-12);
    CHECK(r.valid);

    gm_joint_free(joint);
    gm_distribution_free(point);
    gm_distribution_free(q);
    gm_distribution_free(p);
    printf("ok %s\n", gm_version());
    return 0;
}
