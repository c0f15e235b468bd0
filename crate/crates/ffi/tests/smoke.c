#include <stdio.h>
#include "cotree.h"

int main(void) {
    const uint32_t edges[] = {0, 1, 1, 2, 2, 0, 2, 3};
    CotreeGraph *g = NULL;
    CotreeTree *t = NULL;
    double h = 0.0;
    if (cotree_graph_new(4, edges, 4, &g) != COTREE_STATUS_OK) return 1;
    if (cotree_build_tree(g, 2, 0, &t) != COTREE_STATUS_OK) return 2;
    if (cotree_entropy(g, t, &h) != COTREE_STATUS_OK) return 3;
    if (cotree_build_tree(g, 0, 0, &t) == COTREE_STATUS_OK) return 4;
    if (cotree_last_error() == NULL) return 5;
    printf("%zu %.6f\n", cotree_tree_node_count(t), h);
    cotree_tree_free(t);
    cotree_graph_free(g);
    return 0;
}
