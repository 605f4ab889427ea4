#include <stdio.h>
#include "melodic.h"

/* Two predictors, two responses; response 1 follows x1, response 2 follows x2. */
int main(void) {
    enum { N = 40 };
    double x[N * 2];
    uint8_t y[N * 2];
    for (int i = 0; i < N; i++) {
        x[2 * i] = (double)(i % 10) - 4.5;
        x[2 * i + 1] = (double)((i * 7) % 11) - 5.0;
        y[2 * i] = (uint8_t)(x[2 * i] + ((i % 3) - 1) * 2.0 > 0.0);
        y[2 * i + 1] = (uint8_t)(x[2 * i + 1] + ((i % 4) - 1.5) * 2.0 > 0.0);
    }
    size_t k = 0;
    if (melodic_count_parameters(9, 11, 2, NULL, &k) != MELODIC_STATUS_OK) return 1;
    printf("parameters %zu\n", k);

    MelodicDataset *ds = NULL;
    if (melodic_dataset_new(x, N, 2, y, 2, true, &ds) != MELODIC_STATUS_OK) {
        printf("dataset: %s\n", melodic_last_error());
        return 1;
    }
    MelodicFit *fit = NULL;
    if (melodic_fit(ds, 1, NULL, 0.0, 0, 0, &fit) != MELODIC_STATUS_OK) {
        printf("fit: %s\n", melodic_last_error());
        return 1;
    }
    double dev = 0.0, probs[2];
    bool converged = false;
    melodic_fit_summary(fit, &dev, NULL, &converged);
    double subject[2] = {3.0, 0.0};
    if (melodic_fit_predict(fit, subject, 2, probs, 2) != MELODIC_STATUS_OK) return 1;
    if (!(dev > 0.0) || probs[0] < 0.0 || probs[0] > 1.0) return 1;

    char *json = NULL;
    if (melodic_fit_to_json(fit, &json) != MELODIC_STATUS_OK) return 1;
    melodic_string_free(json);
    if (melodic_fit(ds, 5, NULL, 0.0, 0, 0, &fit) == MELODIC_STATUS_OK) return 1;
    printf("expected error: %s\n", melodic_last_error());

    melodic_fit_free(fit);
    melodic_dataset_free(ds);
    printf("fit ok deviance %.4f converged %d\n", dev, converged);
    return 0;
}
