#ifndef MLEX_H
#define MLEX_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes shared by every function.
 */
typedef enum MlexStatus {
  MlexStatus_Ok = 0,
  /**
   * A checked property failed; the report carries the witness.
   */
  MlexStatus_Violation = 1,
  /**
   * Bad input: unknown names, parse or validation errors, exceeded budgets.
   */
  MlexStatus_Usage = 2,
  MlexStatus_NullPointer = 3,
  MlexStatus_InvalidUtf8 = 4,
  /**
   * A Rust panic was caught at the boundary.
   */
  MlexStatus_Panic = 5,
} MlexStatus;

/**
 * A loaded, validated workspace.
 */
typedef struct MlexWorkspace MlexWorkspace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The message of the last failed call on this thread, or null. Valid until
 * the next call into the library.
 */
const char *mlex_last_error(void);

/**
 * The library version as a static string.
 */
const char *mlex_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void mlex_string_free(char *s);

/**
 * Loads and validates a workspace file.
 *
 * # Safety
 * `path` must be a nul-terminated string; `out` must be writable.
 */
enum MlexStatus mlex_workspace_load(const char *path, struct MlexWorkspace **out);

/**
 * Parses and validates workspace text.
 *
 * # Safety
 * `source` must be a nul-terminated string; `out` must be writable.
 */
enum MlexStatus mlex_workspace_parse(const char *source, struct MlexWorkspace **out);

/**
 * Releases a workspace. Null is ignored.
 *
 * # Safety
 * `ws` must come from this library and not have been freed.
 */
void mlex_workspace_free(struct MlexWorkspace *ws);

/**
 * Canonical text of a workspace; free with [`mlex_string_free`].
 *
 * # Safety
 * `ws` must be a live handle; `out` must be writable.
 */
enum MlexStatus mlex_workspace_save(const struct MlexWorkspace *ws, char **out);

/**
 * Number of objects of a kind (`module`, `algebra`, `ideal`, `variety`,
 * `datum`, `action`, `cocycle`, `extension` or `hs`).
 *
 * # Safety
 * `ws` must be a live handle, `kind` a nul-terminated string, `out` writable.
 */
enum MlexStatus mlex_workspace_count(const struct MlexWorkspace *ws,
                                     const char *kind,
                                     uintptr_t *out);

/**
 * Whether a cocycle of the workspace is compatible with a variety (`mlf`
 * names the bare multilinear theory). Writes 1 or 0 to `out`.
 *
 * # Safety
 * `ws` must be a live handle, the names nul-terminated strings, `out` writable.
 */
enum MlexStatus mlex_cocycle_is_compatible(const struct MlexWorkspace *ws,
                                           const char *cocycle,
                                           const char *variety,
                                           int32_t *out);

/**
 * Number of cohomology classes of the cocycle's datum and action.
 *
 * # Safety
 * `ws` must be a live handle, the names nul-terminated strings, `out` writable.
 */
enum MlexStatus mlex_h2_count(const struct MlexWorkspace *ws,
                              const char *cocycle,
                              const char *variety,
                              uint64_t budget,
                              uintptr_t *out);

/**
 * Runs a command line as the `mlex` binary would (`argv[0]` is the program
 * name). The report text goes to `out`, or the error text when the status
 * is [`MlexStatus::Usage`]; free it with [`mlex_string_free`].
 *
 * # Safety
 * `argv` must hold `argc` nul-terminated strings; `out` must be writable.
 */
enum MlexStatus mlex_run(uintptr_t argc, const char *const *argv, char **out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* MLEX_H */
