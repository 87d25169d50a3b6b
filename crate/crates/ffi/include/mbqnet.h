#ifndef MBQNET_H
#define MBQNET_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MbqStatus {
  MBQ_STATUS_OK = 0,
  MBQ_STATUS_NULL_POINTER = 1,
  MBQ_STATUS_INVALID_UTF8 = 2,
  MBQ_STATUS_PARSE = 3,
  MBQ_STATUS_UNKNOWN_PROTOCOL = 4,
  MBQ_STATUS_INPUTS = 5,
  MBQ_STATUS_SEMANTICS = 6,
  MBQ_STATUS_PANIC = 7,
} MbqStatus;

/**
 * A parsed, validated network.
 */
typedef struct MbqNetwork MbqNetwork;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *mbq_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void mbq_string_free(char *s);

/**
 * Parse DSL source; the last network in the source is returned.
 *
 * # Safety
 * `source` must be a NUL-terminated string and `out` a writable pointer.
 */
enum MbqStatus mbq_network_parse(const char *source, struct MbqNetwork **out);

/**
 * A library protocol such as `teleport` or `bitflip(pi/4)`.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a writable pointer.
 */
enum MbqStatus mbq_network_library(const char *name, struct MbqNetwork **out);

/**
 * # Safety
 * `net` must be null or a handle from this library, not yet freed.
 */
void mbq_network_free(struct MbqNetwork *net);

/**
 * Canonical DSL text of the network.
 *
 * # Safety
 * `net` must be a live handle and `out` a writable pointer.
 */
enum MbqStatus mbq_network_render(const struct MbqNetwork *net, char **out);

/**
 * Run under the round-robin schedule. `inputs` is an optional TOML inputs
 * document; with `merge` false every path is reported.
 *
 * # Safety
 * `net` must be a live handle, `inputs` null or NUL-terminated, `out` writable.
 */
enum MbqStatus mbq_run(const struct MbqNetwork *net, const char *inputs, bool merge, char **out);

/**
 * Kraus table report for every classical input.
 *
 * # Safety
 * `net` must be a live handle and `out` writable.
 */
enum MbqStatus mbq_denote(const struct MbqNetwork *net, char **out);

/**
 * Equivalence verdict; `equivalent_out` receives the answer and `out` the report.
 *
 * # Safety
 * `first` and `second` must be live handles; `equivalent_out` and `out` writable.
 */
enum MbqStatus mbq_equiv(const struct MbqNetwork *first,
                         const struct MbqNetwork *second,
                         double tol,
                         bool *equivalent_out,
                         char **out);

/**
 * Compare every interleaving; `passed` receives the verdict.
 *
 * # Safety
 * `net` must be a live handle, `inputs` null or NUL-terminated, `passed` and
 * `out` writable.
 */
enum MbqStatus mbq_check_schedules(const struct MbqNetwork *net,
                                   const char *inputs,
                                   bool *passed,
                                   char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MBQNET_H */
