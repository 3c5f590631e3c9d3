#ifndef GL2EXT_H
#define GL2EXT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum Gl2extStatus {
  GL2EXT_STATUS_OK = 0,
  GL2EXT_STATUS_NULL_POINTER = 1,
  GL2EXT_STATUS_INVALID_ARGUMENT = 2,
  GL2EXT_STATUS_CAP_EXCEEDED = 3,
  GL2EXT_STATUS_OUT_OF_RANGE = 4,
  GL2EXT_STATUS_CALIBRATION = 5,
  GL2EXT_STATUS_FIELD_MISMATCH = 6,
  GL2EXT_STATUS_INTERNAL = 7,
  GL2EXT_STATUS_PANIC = 8,
} Gl2extStatus;

/**
 * Opaque block algebra μ_q.
 */
typedef struct Gl2extBlock Gl2extBlock;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *gl2ext_version(void);

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next call into the library from the same thread.
 */
const char *gl2ext_last_error(void);

/**
 * Total dimension of the dg-homology of the i-th tensor power (i ≤ 1),
 * computed over ℚ and 𝔽_p, which must agree.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum Gl2extStatus gl2ext_oracle_total(uint32_t p, int64_t i, size_t *out);

/**
 * Build μ_q at p. A negative `k_max` means no truncation.
 *
 * # Safety
 * `out` must be a valid pointer; the handle written there is owned by the
 * caller.
 */
enum Gl2extStatus gl2ext_block_new(uint32_t p, size_t q, int64_t k_max, struct Gl2extBlock **out);

/**
 * Release a block. NULL is ignored.
 *
 * # Safety
 * `b` must come from `gl2ext_block_new` and not be used afterwards.
 */
void gl2ext_block_free(struct Gl2extBlock *b);

/**
 * Basis size, or 0 for NULL.
 *
 * # Safety
 * `b` must be NULL or a live handle.
 */
size_t gl2ext_block_dim(const struct Gl2extBlock *b);

/**
 * Number of vertices (primitive idempotents), or 0 for NULL.
 *
 * # Safety
 * `b` must be NULL or a live handle.
 */
size_t gl2ext_block_vertex_count(const struct Gl2extBlock *b);

/**
 * Copy vertex `n` (in sorted order) into `out`, which holds q entries.
 *
 * # Safety
 * `b` must be a live handle and `out` must have room for q values.
 */
enum Gl2extStatus gl2ext_block_vertex(const struct Gl2extBlock *b, size_t n, uint32_t *out);

/**
 * dim Ext^k between two vertices, each given as q labels in 1..=p. With
 * `has_j` zero the internal degree j is summed over.
 *
 * # Safety
 * `b` must be a live handle, `from` and `to` must point to q values.
 */
enum Gl2extStatus gl2ext_block_ext_dim(const struct Gl2extBlock *b,
                                       const uint32_t *from,
                                       const uint32_t *to,
                                       int64_t k,
                                       int64_t j,
                                       int32_t has_j,
                                       size_t *out);

/**
 * Product of basis elements `a` and `c`. A zero product sets `*sign` to 0.
 *
 * # Safety
 * `b` must be a live handle, `sign` and `index` valid pointers.
 */
enum Gl2extStatus gl2ext_block_multiply(const struct Gl2extBlock *b,
                                        size_t a,
                                        size_t c,
                                        int8_t *sign,
                                        size_t *index);

/**
 * Serialize the block (vertices, basis and optionally the product table) as
 * JSON. Release the string with `gl2ext_string_free`.
 *
 * # Safety
 * `b` must be a live handle and `out` a valid pointer.
 */
enum Gl2extStatus gl2ext_block_to_json(const struct Gl2extBlock *b,
                                       int32_t with_products,
                                       char **out);

/**
 * Release a string returned by the library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void gl2ext_string_free(char *s);

/**
 * Copy of the last error message as an owned string, for callers that keep
 * it past the next call. NULL if there is none.
 */
char *gl2ext_last_error_copy(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GL2EXT_H */
