#ifndef CUTLOCUS_H
#define CUTLOCUS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum CutlocusStatus {
  CUTLOCUS_STATUS_OK = 0,
  // Null pointer, bad index or short buffer.
  CUTLOCUS_STATUS_INVALID_ARGUMENT = 1,
  CUTLOCUS_STATUS_INVALID_PARAMS = 2,
  CUTLOCUS_STATUS_DIVERGENT_SERIES = 3,
  CUTLOCUS_STATUS_DEGENERATE_ALPHA = 4,
  CUTLOCUS_STATUS_BUDGET_EXCEEDED = 5,
  // Tangency, overlapping holes, seam or collision failures.
  CUTLOCUS_STATUS_GEOMETRY = 6,
  CUTLOCUS_STATUS_UNSUPPORTED_DIMENSION = 7,
  CUTLOCUS_STATUS_OUTSIDE_DOMAIN = 8,
  CUTLOCUS_STATUS_NUMERICAL = 9,
  CUTLOCUS_STATUS_IO = 10,
  CUTLOCUS_STATUS_PANIC = 99,
} CutlocusStatus;

// Assembled boundary hypersurface.
typedef struct CutlocusHull CutlocusHull;

// Construction parameters.
typedef struct CutlocusParams CutlocusParams;

// Finite tree approximation.
typedef struct CutlocusTree CutlocusTree;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the
// next failing call on the same thread.
const char *cutlocus_last_error_message(void);

// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum CutlocusStatus cutlocus_params_new(uint32_t k,
                                        size_t n,
                                        double phi,
                                        double epsilon,
                                        struct CutlocusParams **out);

// Parameters with the canonical dimension for `k`.
//
// # Safety
// As [`cutlocus_params_new`].
enum CutlocusStatus cutlocus_params_canonical(uint32_t k,
                                              double phi,
                                              double epsilon,
                                              struct CutlocusParams **out);

// # Safety
// `p` must be null or a handle from `cutlocus_params_*` not yet freed.
void cutlocus_params_free(struct CutlocusParams *p);

// Ambient dimension, or 0 for a null handle.
//
// # Safety
// `p` must be null or a live params handle.
size_t cutlocus_params_n(const struct CutlocusParams *p);

// `r_i` for `i >= -1` with its truncation bound.
//
// # Safety
// `p` a live params handle; `value` and `bound` writable (`bound` may be null).
enum CutlocusStatus cutlocus_r_seq(const struct CutlocusParams *p,
                                   int32_t i,
                                   double *value,
                                   double *bound);

// # Safety
// `p` a live params handle; `out` writable.
enum CutlocusStatus cutlocus_alpha(const struct CutlocusParams *p, uint32_t i, double *out);

// Dimension `log(2n-1) / ((k-1) log 3)` of the endpoint set; NaN for `k < 2`
// or `n < 1`.
double cutlocus_analytic_dimension(uint32_t k, size_t n);

// # Safety
// `p` a live params handle; `out` writable.
enum CutlocusStatus cutlocus_tree_build(const struct CutlocusParams *p,
                                        size_t depth,
                                        struct CutlocusTree **out);

// # Safety
// `t` must be null or a live tree handle.
void cutlocus_tree_free(struct CutlocusTree *t);

// Node count including the origin; 0 for a null handle.
//
// # Safety
// `t` must be null or a live tree handle.
size_t cutlocus_tree_node_count(const struct CutlocusTree *t);

// Copies the coordinates of node `index` into `buf` (length `len >= n`).
// Index 0 is `q`; the origin is not indexed.
//
// # Safety
// `t` a live tree handle; `buf` valid for `len` writes.
enum CutlocusStatus cutlocus_tree_node_position(const struct CutlocusTree *t,
                                                size_t index,
                                                double *buf,
                                                size_t len);

// Largest `| |child - parent| - l_m |` over the tree; NaN for a null handle.
//
// # Safety
// `t` must be null or a live tree handle.
double cutlocus_tree_sphere_residual(const struct CutlocusTree *t);

// Two-sphere demo hull in dimension `dim`.
//
// # Safety
// `out` writable.
enum CutlocusStatus cutlocus_hull_demo(size_t dim, struct CutlocusHull **out);

// # Safety
// `p` a live params handle; `out` writable.
enum CutlocusStatus cutlocus_hull_assemble(const struct CutlocusParams *p,
                                           size_t depth,
                                           struct CutlocusHull **out);

// # Safety
// `h` must be null or a live hull handle.
void cutlocus_hull_free(struct CutlocusHull *h);

// # Safety
// `h` must be null or a live hull handle.
size_t cutlocus_hull_patch_count(const struct CutlocusHull *h);

// # Safety
// `h` must be null or a live hull handle.
double cutlocus_hull_max_tangency_residual(const struct CutlocusHull *h);

// Signed distance to the boundary, negative inside.
//
// # Safety
// `h` a live hull handle; `x` valid for `len` reads; `out` writable.
enum CutlocusStatus cutlocus_hull_signed_distance(const struct CutlocusHull *h,
                                                  const double *x,
                                                  size_t len,
                                                  double *out);

// Checks the inward cut locus against the hull's own tree. `pass` receives
// the verdict; `hausdorff_cells` (may be null) the medial-axis distance in
// grid cells, NaN above dimension 3.
//
// # Safety
// `h` a live hull handle; `pass` writable.
enum CutlocusStatus cutlocus_hull_verify_cut_locus(const struct CutlocusHull *h,
                                                   size_t resolution,
                                                   bool *pass,
                                                   double *hausdorff_cells);

// Runs the acceptance battery; `passed` receives the number of passing
// criteria out of 12.
//
// # Safety
// `passed` writable.
enum CutlocusStatus cutlocus_verify_all(size_t resolution, uint32_t *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CUTLOCUS_H */
