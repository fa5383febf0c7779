/* Minimal C client: embed, extract, compare. Exits non-zero on failure. */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>

#include "svmark.h"

#define N 32

static int check(SvmStatus s, const char *what) {
    if (s != SVM_OK) {
        const char *msg = svm_last_error_message();
        fprintf(stderr, "%s: %s (%s)\n", what, svm_status_string(s), msg ? msg : "");
        return 1;
    }
    return 0;
}

int main(void) {
    double host[N * N], mark[N * N], back[N * N];
    unsigned state = 12345u;
    for (int k = 0; k < N * N; k++) {
        state = state * 1103515245u + 12345u;
        host[k] = (double)((state >> 8) & 0xffff) / 65535.0;
        mark[k] = ((k / N + k % N) % 7) / 6.0;
    }

    SvmImage *h = NULL, *m = NULL, *marked = NULL, *w = NULL;
    SvmKey *key = NULL;
    if (check(svm_image_new(1, N, N, host, &h), "host")) return 1;
    if (check(svm_image_new(1, N, N, mark, &m), "mark")) return 1;
    if (check(svm_embed(h, m, 0.2, &marked, &key), "embed")) return 1;
    if (check(svm_extract(marked, key, &w), "extract")) return 1;
    if (check(svm_image_copy_data(w, back, N * N), "copy")) return 1;

    double worst = 0.0;
    for (int k = 0; k < N * N; k++) {
        double d = fabs(back[k] - mark[k]);
        if (d > worst) worst = d;
    }

    SvmImage *bad = NULL;
    SvmStatus s = svm_embed(h, m, 0.0, &bad, &key);
    int ok = worst < 1e-6 && s == SVM_INVALID_ARGUMENT && bad == NULL;
    printf("max error %.3e, zero lambda -> %s\n", worst, svm_status_string(s));

    svm_image_free(w);
    svm_image_free(marked);
    svm_key_free(key);
    svm_image_free(m);
    svm_image_free(h);
    return ok ? 0 : 1;
}
