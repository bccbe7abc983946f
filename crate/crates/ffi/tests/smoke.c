#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include "legnet.h"

#define CHECK(call)                                                        \
    do {                                                                   \
        LegnetStatus s_ = (call);                                          \
        if (s_ != LEGNET_STATUS_OK) {                                      \
            fprintf(stderr, "%s -> %d: %s\n", #call, s_, legnet_last_error()); \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(void) {
    const char *csv =
        "source,target,weight\n"
        "a,b,1\nb,a,0.5\nb,c,0.5\nc,a,1\nd,a,1\n";
    LegnetGraph *g = NULL;
    CHECK(legnet_graph_from_csv_text(csv, &g));
    size_t n = 0;
    CHECK(legnet_graph_node_count(g, &n));
    if (n != 4) return 2;

    double closeness[4];
    CHECK(legnet_graph_centrality(g, LEGNET_METRIC_CLOSENESS, closeness, 4));
    double density = 0;
    CHECK(legnet_graph_density(g, &density));
    if (fabs(density - 5.0 / 12.0) > 1e-12) return 3;

    LegnetErgmFit *fit = NULL;
    CHECK(legnet_ergm_fit_named(g, NULL, "model2", LEGNET_ERGM_METHOD_EXACT_DYAD, &fit));
    size_t k = 0;
    CHECK(legnet_ergm_fit_term_count(fit, &k));
    if (k != 2) return 4;
    printf("%s %s\n", legnet_ergm_fit_label(fit, 0), legnet_ergm_fit_label(fit, 1));
    legnet_ergm_fit_free(fit);

    size_t a[4] = {7, 7, 9, 9}, b[4] = {1, 1, 2, 2};
    LegnetPartitionScores sc;
    CHECK(legnet_partition_scores(a, b, 4, LEGNET_NMI_ARITHMETIC, &sc));
    if (sc.adjusted_rand != 1.0) return 5;

    if (legnet_graph_node_count(NULL, &n) != LEGNET_STATUS_NULL_POINTER) return 6;
    legnet_graph_free(g);
    printf("ok %s\n", legnet_version());
    return 0;
}
