#ifndef FCONV_H
#define FCONV_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Which domain of the function table a tensor lives on.
typedef enum FconvDomain {
  FCONV_DOMAIN_LEFT = 0,
  FCONV_DOMAIN_RIGHT = 1,
  FCONV_DOMAIN_TARGET = 2,
} FconvDomain;

typedef enum FconvStatus {
  FCONV_STATUS_OK = 0,
  FCONV_STATUS_NULL_POINTER = 1,
  FCONV_STATUS_ARGUMENT = 2,
  FCONV_STATUS_INDEX = 3,
  FCONV_STATUS_CAPACITY = 4,
  FCONV_STATUS_PARSE = 5,
  FCONV_STATUS_INTERNAL = 6,
  // The value does not fit the requested integer type.
  FCONV_STATUS_OVERFLOW = 7,
  FCONV_STATUS_INVALID_UTF8 = 8,
  FCONV_STATUS_PANIC = 9,
} FconvStatus;

typedef enum FconvSwap {
  FCONV_SWAP_AUTO = 0,
  FCONV_SWAP_ON = 1,
  FCONV_SWAP_OFF = 2,
} FconvSwap;

// A cyclic partition of a function table.
typedef struct FconvPartition FconvPartition;

// A function table `f : L x R -> T`.
typedef struct FconvTable FconvTable;

// An integer tensor over `L^n`, `R^n` or `T^n`.
typedef struct FconvTensor FconvTensor;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// The message of the last failed call on this thread, or NULL. The pointer
// stays valid until the next failing call on the same thread.
const char *fconv_last_error(void);

// Releases a string returned by this library.
//
// # Safety
// `s` must be NULL or a string returned through a `char **` parameter of
// this library that has not been freed.
void fconv_string_free(char *s);

// Parses a function table document.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum FconvStatus fconv_table_from_json(const char *json, struct FconvTable **out);

// Builds a table over the numeric domains `{0..left-1}` etc. from a
// row-major array of `left * right` indices into `T`.
//
// # Safety
// `entries` must point to `left * right` readable values; `out` must be
// writable.
enum FconvStatus fconv_table_from_indices(uintptr_t left,
                                          uintptr_t right,
                                          uintptr_t target,
                                          const uintptr_t *entries,
                                          struct FconvTable **out);

// Writes `|L|`, `|R|` and `|T|`.
//
// # Safety
// `table` must be a live handle; the size pointers must be writable or NULL.
enum FconvStatus fconv_table_dims(const struct FconvTable *table,
                                  uintptr_t *left,
                                  uintptr_t *right,
                                  uintptr_t *target);

// # Safety
// `table` must be NULL or a handle from this library that has not been freed.
void fconv_table_free(struct FconvTable *table);

// Parses a tensor document against `table`.
//
// # Safety
// `table` must be a live handle, `json` NUL-terminated, `out` writable.
enum FconvStatus fconv_tensor_from_json(const struct FconvTable *table,
                                        const char *json,
                                        struct FconvTensor **out);

// A dense tensor of arity `n` over one domain of `table`; `len` must equal
// `|domain|^n`.
//
// # Safety
// `table` must be a live handle, `values` must point to `len` readable
// values, `out` must be writable.
enum FconvStatus fconv_tensor_from_i64(const struct FconvTable *table,
                                       enum FconvDomain domain,
                                       uintptr_t n,
                                       const int64_t *values,
                                       uintptr_t len,
                                       struct FconvTensor **out);

// Number of cells, `|domain|^n`.
//
// # Safety
// `tensor` must be a live handle or NULL (returns 0).
uintptr_t fconv_tensor_len(const struct FconvTensor *tensor);

// The arity `n`, or 0 for NULL.
//
// # Safety
// `tensor` must be a live handle or NULL.
uintptr_t fconv_tensor_arity(const struct FconvTensor *tensor);

// Reads cell `index` (row-major). Returns `FCONV_STATUS_OVERFLOW` if the
// exact value does not fit in 64 bits.
//
// # Safety
// `tensor` must be a live handle and `out` writable.
enum FconvStatus fconv_tensor_get_i64(const struct FconvTensor *tensor,
                                      uintptr_t index,
                                      int64_t *out);

// Serializes a tensor as a dense JSON document with exact values.
//
// # Safety
// `tensor` must be a live handle and `out` writable.
enum FconvStatus fconv_tensor_to_json(const struct FconvTensor *tensor, char **out);

// # Safety
// `tensor` must be NULL or a handle from this library that has not been freed.
void fconv_tensor_free(struct FconvTensor *tensor);

// Builds a cyclic partition of `table`.
//
// # Safety
// `table` must be a live handle and `out` writable.
enum FconvStatus fconv_partition_build(const struct FconvTable *table,
                                       enum FconvSwap swap,
                                       struct FconvPartition **out);

// Parses a partition document and validates it against `table`.
//
// # Safety
// `table` must be a live handle, `json` NUL-terminated, `out` writable.
enum FconvStatus fconv_partition_from_json(const struct FconvTable *table,
                                           const char *json,
                                           struct FconvPartition **out);

// Sum of the minors' `k`, or 0 for NULL.
//
// # Safety
// `partition` must be a live handle or NULL.
uintptr_t fconv_partition_cost(const struct FconvPartition *partition);

// # Safety
// Both handles must be live; `out` must be writable.
enum FconvStatus fconv_partition_to_json(const struct FconvTable *table,
                                         const struct FconvPartition *partition,
                                         char **out);

// # Safety
// `partition` must be NULL or a handle from this library that has not been
// freed.
void fconv_partition_free(struct FconvPartition *partition);

// `g ⊛_f h` over `T^n`.
//
// # Safety
// All handles must be live; `out` must be writable.
enum FconvStatus fconv_convolve(const struct FconvTable *table,
                                const struct FconvPartition *partition,
                                const struct FconvTensor *g,
                                const struct FconvTensor *h,
                                struct FconvTensor **out);

// `(g ⊛_f h)(v)` for `v` given as `len` indices into `T`. Returns
// `FCONV_STATUS_OVERFLOW` if the value does not fit in 64 bits.
//
// # Safety
// Handles must be live, `v` must point to `len` readable indices and `out`
// must be writable.
enum FconvStatus fconv_query(const struct FconvTable *table,
                             const struct FconvTensor *g,
                             const struct FconvTensor *h,
                             const uintptr_t *v,
                             uintptr_t len,
                             int64_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FCONV_H */
