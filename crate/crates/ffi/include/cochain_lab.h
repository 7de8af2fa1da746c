#ifndef COCHAIN_LAB_H
#define COCHAIN_LAB_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes; task failures are not errors and come back through `out_exit`.
 */
typedef enum CLStatus {
  CL_STATUS_OK = 0,
  CL_STATUS_NULL_POINTER = 1,
  CL_STATUS_INVALID_UTF8 = 2,
  CL_STATUS_PARSE = 3,
  CL_STATUS_SPEC = 4,
  CL_STATUS_CAP = 5,
  CL_STATUS_SEED = 6,
  CL_STATUS_TASK = 7,
  CL_STATUS_COMPUTATION = 8,
  CL_STATUS_PANIC = 9,
} CLStatus;

/**
 * A finite group parsed from a group spec.
 */
typedef struct CLGroup CLGroup;

/**
 * A representation of a `CLGroup`.
 */
typedef struct CLModule CLModule;

typedef struct CLCohomology {
  size_t degree;
  size_t dim_c;
  size_t dim_z;
  size_t dim_b;
  size_t dim_h;
} CLCohomology;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a group spec into `*out`.
 *
 * # Safety
 * `json` must be a valid C string and `out` a valid pointer.
 */
enum CLStatus cl_group_from_json(const char *json, struct CLGroup **out);

/**
 * Order of the group, or 0 for a null handle.
 *
 * # Safety
 * `g` must be null or a handle from `cl_group_from_json`.
 */
size_t cl_group_order(const struct CLGroup *g);

/**
 * # Safety
 * `g` must be null or a handle from `cl_group_from_json`, not freed before.
 */
void cl_group_free(struct CLGroup *g);

/**
 * Parses a rep spec over `group` into `*out`.
 *
 * # Safety
 * `group` must be a live group handle, `json` a valid C string and `out` a valid pointer.
 */
enum CLStatus cl_module_from_json(const struct CLGroup *group,
                                  const char *json,
                                  struct CLModule **out);

/**
 * Dimension of the module, or 0 for a null handle.
 *
 * # Safety
 * `m` must be null or a handle from `cl_module_from_json`.
 */
size_t cl_module_dim(const struct CLModule *m);

/**
 * Exact cohomology dimensions in degree `n`.
 *
 * # Safety
 * `m` must be a live module handle and `out` a valid pointer.
 */
enum CLStatus cl_module_cohomology(const struct CLModule *m, size_t n, struct CLCohomology *out);

/**
 * # Safety
 * `m` must be null or a handle from `cl_module_from_json`, not freed before.
 */
void cl_module_free(struct CLModule *m);

/**
 * Runs a task config (JSON or TOML) and returns the JSON report in `*out_report`
 * and the command-line exit code (0 pass, 1 fail, 3 budget exhausted) in `*out_exit`.
 *
 * # Safety
 * `config` must be a valid C string; `out_report` and `out_exit` valid pointers.
 */
enum CLStatus cl_run_task(const char *config, char **out_report, int32_t *out_exit);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not freed before.
 */
void cl_string_free(char *s);

/**
 * Message for the last non-OK status on this thread; empty if none. Valid until
 * the next call into this library on the same thread.
 */
const char *cl_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COCHAIN_LAB_H */
