#ifndef JMUTANT_H
#define JMUTANT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum JmStatus {
  JM_STATUS_OK = 0,
  JM_STATUS_NULL_ARGUMENT = 1,
  JM_STATUS_INVALID_UTF8 = 2,
  JM_STATUS_PARSE_ERROR = 3,
  JM_STATUS_UNKNOWN_OPERATOR = 4,
  JM_STATUS_OUT_OF_RANGE = 5,
  JM_STATUS_INVALID_ARGUMENT = 6,
  JM_STATUS_INTERNAL = 99,
} JmStatus;

/**
 * Outcome of one mutant, for coverage computation.
 */
typedef enum JmMutantStatus {
  JM_MUTANT_STATUS_KILLED = 0,
  JM_MUTANT_STATUS_KILLED_TIMEOUT = 1,
  JM_MUTANT_STATUS_SURVIVED = 2,
  JM_MUTANT_STATUS_INVALID = 3,
} JmMutantStatus;

/**
 * Mutants of one source file.
 */
typedef struct JmMutantSet JmMutantSet;

typedef struct JmCoverage {
  size_t killed;
  size_t total_valid;
  /**
   * Killed over valid, or a negative value when nothing is valid.
   */
  double ratio;
} JmCoverage;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until
 * the next call into the library.
 */
const char *jm_last_error_message(void);

/**
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void jm_string_free(char *s);

/**
 * Coverage of `n` outcomes.
 *
 * # Safety
 * `statuses` must point to `n` values; `out` must be writable.
 */
enum JmStatus jm_coverage(const enum JmMutantStatus *statuses, size_t n, struct JmCoverage *out);

/**
 * Parses `source` and enumerates its mutants. `operators` is a comma list
 * as on the command line; null means all.
 *
 * # Safety
 * String arguments must be NUL-terminated; `out` must be writable.
 */
enum JmStatus jm_mutants_from_source(const char *path,
                                     const char *source,
                                     const char *operators,
                                     struct JmMutantSet **out);

/**
 * Number of mutants in the set; 0 for null.
 *
 * # Safety
 * `set` must be null or a live handle.
 */
size_t jm_mutants_count(const struct JmMutantSet *set);

/**
 * Full mutant file (header and body) for the mutant at `index`.
 *
 * # Safety
 * `set` must be a live handle; `out` must be writable.
 */
enum JmStatus jm_mutant_render(const struct JmMutantSet *set, size_t index, char **out);

/**
 * All mutants of the set as a JSON array.
 *
 * # Safety
 * `set` must be a live handle; `out` must be writable.
 */
enum JmStatus jm_mutants_json(const struct JmMutantSet *set, char **out);

/**
 * # Safety
 * `set` must be null or a live handle, which is invalid afterwards.
 */
void jm_mutants_free(struct JmMutantSet *set);

/**
 * Subsumption graph of a kill matrix, in Graphviz syntax. `kills` is row
 * major, one row of `n_tests` bytes per mutant, non-zero meaning killed.
 * Mutants are named `1` to `n_mutants`.
 *
 * # Safety
 * `kills` must point to `n_mutants * n_tests` bytes; `out` must be writable.
 */
enum JmStatus jm_subsumption_dot(const uint8_t *kills,
                                 size_t n_mutants,
                                 size_t n_tests,
                                 char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* JMUTANT_H */
