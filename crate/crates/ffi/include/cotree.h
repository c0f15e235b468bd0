#ifndef COTREE_H
#define COTREE_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum CotreeStatus {
  COTREE_STATUS_OK = 0,
  COTREE_STATUS_NULL_POINTER = 1,
  COTREE_STATUS_INVALID_ARGUMENT = 2,
  COTREE_STATUS_INVALID_GRAPH = 3,
  COTREE_STATUS_INVALID_TREE = 4,
  COTREE_STATUS_IO = 5,
  COTREE_STATUS_PARSE = 6,
  COTREE_STATUS_PANIC = 7,
} CotreeStatus;

/**
 * An undirected simple graph.
 */
typedef struct CotreeGraph CotreeGraph;

/**
 * A coding tree over the vertices of a graph.
 */
typedef struct CotreeTree CotreeTree;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null if none. The
 * pointer stays valid until the next failing call on this thread.
 */
const char *cotree_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *cotree_version(void);

/**
 * Builds a graph on `node_count` vertices from `edge_count` pairs stored
 * flat in `edges` (`u0, v0, u1, v1, ...`). Self-loops and repeated edges
 * are rejected.
 *
 * # Safety
 * `edges` must point to `2 * edge_count` readable `u32` values (it may be
 * null when `edge_count` is 0) and `out` must be writable.
 */
enum CotreeStatus cotree_graph_new(size_t node_count,
                                   const uint32_t *edges,
                                   size_t edge_count,
                                   struct CotreeGraph **out);

/**
 * Reads a graph from an edge-list file of 0-based `u v` lines.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` must be writable.
 */
enum CotreeStatus cotree_graph_from_edge_list(const char *path, struct CotreeGraph **out);

/**
 * # Safety
 * `graph` must be null or a handle from this library not yet freed.
 */
void cotree_graph_free(struct CotreeGraph *graph);

/**
 * Vertex count, or 0 for a null handle.
 *
 * # Safety
 * `graph` must be null or a live handle.
 */
size_t cotree_graph_node_count(const struct CotreeGraph *graph);

/**
 * Edge count, or 0 for a null handle.
 *
 * # Safety
 * `graph` must be null or a live handle.
 */
size_t cotree_graph_edge_count(const struct CotreeGraph *graph);

/**
 * Greedy coding tree of height at most `k` (at least 2). `seed` only
 * breaks ties between equally good merges.
 *
 * # Safety
 * `graph` must be a live handle and `out` writable.
 */
enum CotreeStatus cotree_build_tree(const struct CotreeGraph *graph,
                                    uint32_t k,
                                    uint64_t seed,
                                    struct CotreeTree **out);

/**
 * Random balanced binary tree compressed at random to height `k`.
 *
 * # Safety
 * `graph` must be a live handle and `out` writable.
 */
enum CotreeStatus cotree_build_rbbt(const struct CotreeGraph *graph,
                                    uint32_t k,
                                    uint64_t seed,
                                    struct CotreeTree **out);

/**
 * Copy of `tree` padded so that every leaf sits at depth `k`.
 *
 * # Safety
 * `tree` must be a live handle and `out` writable.
 */
enum CotreeStatus cotree_tree_canonicalize(const struct CotreeTree *tree,
                                           uint32_t k,
                                           struct CotreeTree **out);

/**
 * # Safety
 * `tree` must be null or a handle from this library not yet freed.
 */
void cotree_tree_free(struct CotreeTree *tree);

/**
 * Node count including leaves and root, or 0 for a null handle.
 *
 * # Safety
 * `tree` must be null or a live handle.
 */
size_t cotree_tree_node_count(const struct CotreeTree *tree);

/**
 * Height (root depth 0), or 0 for a null handle.
 *
 * # Safety
 * `tree` must be null or a live handle.
 */
uint32_t cotree_tree_height(const struct CotreeTree *tree);

/**
 * Writes the parent of every node into `parents` (`-1` for the root).
 * Nodes `0..n` are the leaves of vertices `0..n`.
 *
 * # Safety
 * `tree` must be a live handle and `parents` must hold `len` writable
 * values; `len` must equal the node count.
 */
enum CotreeStatus cotree_tree_parents(const struct CotreeTree *tree, int64_t *parents, size_t len);

/**
 * Structural entropy of `graph` under `tree`, or under the star tree when
 * `tree` is null.
 *
 * # Safety
 * `graph` must be a live handle, `tree` null or live, `out` writable.
 */
enum CotreeStatus cotree_entropy(const struct CotreeGraph *graph,
                                 const struct CotreeTree *tree,
                                 double *out);

/**
 * Tree text export (header `n k entropy`, one line per node). Release the
 * string with [`cotree_string_free`].
 *
 * # Safety
 * `tree` must be a live handle and `out` writable.
 */
enum CotreeStatus cotree_tree_to_text(const struct CotreeTree *tree, double entropy, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library not yet freed.
 */
void cotree_string_free(char *s);

/**
 * WL-CT Gram matrix of `count` graphs, each paired with a depth-canonical
 * tree of common height. Leaves are labelled by vertex degree. Writes
 * `count * count` values row-major into `out`.
 *
 * # Safety
 * `graphs` and `trees` must each point to `count` live handles and `out`
 * to `count * count` writable doubles.
 */
enum CotreeStatus cotree_gram(const struct CotreeGraph *const *graphs,
                              const struct CotreeTree *const *trees,
                              size_t count,
                              bool normalize,
                              double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COTREE_H */
