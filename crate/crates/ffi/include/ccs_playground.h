#ifndef CCS_PLAYGROUND_H
#define CCS_PLAYGROUND_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result of a call.
 */
typedef enum CcsgStatus {
  CCSG_STATUS_OK = 0,
  CCSG_STATUS_NULL_POINTER = 1,
  CCSG_STATUS_INVALID_UTF8 = 2,
  CCSG_STATUS_PARSE = 3,
  CCSG_STATUS_CONTEXT_MISMATCH = 4,
  CCSG_STATUS_PANIC = 5,
} CcsgStatus;

/*
 Outcome of a check, numbered like the command-line exit codes.
 */
typedef enum CcsgVerdict {
  CCSG_VERDICT_PASS = 0,
  CCSG_VERDICT_FAIL = 1,
  CCSG_VERDICT_INCONCLUSIVE = 2,
} CcsgVerdict;

/*
 A parsed, well-formed process with its context.
 */
typedef struct CcsgProcess CcsgProcess;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Parses `[n] body` into a new handle stored in `*out_process`.

 # Safety
 `text` must be a nul-terminated string and `out_process` a valid pointer.
 */
enum CcsgStatus ccsg_process_parse(const char *text, struct CcsgProcess **out_process);

/*
 Releases a handle. Null is ignored.

 # Safety
 `p` must come from [`ccsg_process_parse`] and not be used afterwards.
 */
void ccsg_process_free(struct CcsgProcess *p);

/*
 Size of the context the process was parsed at, or 0 for null.

 # Safety
 `p` must be null or a live handle.
 */
size_t ccsg_process_context(const struct CcsgProcess *p);

/*
 The process in concrete syntax, `[n] body`.

 # Safety
 `p` must be a live handle and `out_text` a valid pointer.
 */
enum CcsgStatus ccsg_process_to_string(const struct CcsgProcess *p, char **out_text);

/*
 The translated strategy as text.

 # Safety
 `p` must be a live handle and `out_text` a valid pointer.
 */
enum CcsgStatus ccsg_translate(const struct CcsgProcess *p, char **out_text);

/*
 Whether every silent path of the process can still reach success,
 exploring at most `budget` states.

 # Safety
 `p` must be a live handle and `out_verdict` a valid pointer.
 */
enum CcsgStatus ccsg_bot_s(const struct CcsgProcess *p,
                           size_t budget,
                           enum CcsgVerdict *out_verdict);

/*
 Weak bisimilarity of two processes at the same context: exact when both
 state spaces fit in `state_cap`, else up to `depth` weak steps.

 # Safety
 `p` and `q` must be live handles and `out_verdict` a valid pointer.
 */
enum CcsgStatus ccsg_weak_bisim(const struct CcsgProcess *p,
                                const struct CcsgProcess *q,
                                size_t depth,
                                size_t state_cap,
                                enum CcsgVerdict *out_verdict);

/*
 Fair testing of two processes against the generated tree tests of the
 given depth and width. The full report is written as JSON to
 `*out_report` when that pointer is not null.

 # Safety
 `p` and `q` must be live handles, `out_verdict` a valid pointer and
 `out_report` null or valid.
 */
enum CcsgStatus ccsg_fair_equiv_standard(const struct CcsgProcess *p,
                                         const struct CcsgProcess *q,
                                         size_t gen_depth,
                                         size_t gen_width,
                                         size_t budget,
                                         enum CcsgVerdict *out_verdict,
                                         char **out_report);

/*
 The message of the last failed call on this thread, or null. Valid
 until the next call.
 */
const char *ccsg_last_error(void);

/*
 Releases a string returned by this library. Null is ignored.

 # Safety
 `s` must come from this library and not be used afterwards.
 */
void ccsg_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CCS_PLAYGROUND_H */
