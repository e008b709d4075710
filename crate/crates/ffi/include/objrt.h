#ifndef OBJRT_H
#define OBJRT_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Contract checking level of a context.
 */
typedef enum ObjrtContractLevel {
  OBJRT_CONTRACT_LEVEL_NONE = 0,
  OBJRT_CONTRACT_LEVEL_PRE = 1,
  OBJRT_CONTRACT_LEVEL_POST = 2,
  OBJRT_CONTRACT_LEVEL_ALL = 3,
} ObjrtContractLevel;

/**
 * Delegating wrapper classes.
 */
typedef enum ObjrtProxyKind {
  OBJRT_PROXY_KIND_PROXY = 0,
  OBJRT_PROXY_KIND_TRACER = 1,
  OBJRT_PROXY_KIND_LOCKER = 2,
} ObjrtProxyKind;

/**
 * Result of a fallible call.
 */
typedef enum ObjrtStatus {
  OBJRT_STATUS_OK = 0,
  OBJRT_STATUS_NULL_ARGUMENT = 1,
  OBJRT_STATUS_INVALID_UTF8 = 2,
  OBJRT_STATUS_UNKNOWN_NAME = 3,
  OBJRT_STATUS_BUSY = 4,
  OBJRT_STATUS_INVALID_ARGUMENT = 5,
  OBJRT_STATUS_PANIC = 6,
  OBJRT_STATUS_EX_BAD_ALLOC = 16,
  OBJRT_STATUS_EX_BAD_ARITY = 17,
  OBJRT_STATUS_EX_BAD_ASSERT = 18,
  OBJRT_STATUS_EX_BAD_CAST = 19,
  OBJRT_STATUS_EX_BAD_DOMAIN = 20,
  OBJRT_STATUS_EX_BAD_FORMAT = 21,
  OBJRT_STATUS_EX_BAD_MESSAGE = 22,
  OBJRT_STATUS_EX_BAD_PROPERTY = 23,
  OBJRT_STATUS_EX_BAD_RANGE = 24,
  OBJRT_STATUS_EX_BAD_SIZE = 25,
  OBJRT_STATUS_EX_BAD_TYPE = 26,
  OBJRT_STATUS_EX_BAD_VALUE = 27,
  OBJRT_STATUS_EX_NOT_FOUND = 28,
  OBJRT_STATUS_EX_NOT_IMPLEMENTED = 29,
  OBJRT_STATUS_EX_NOT_SUPPORTED = 30,
  /**
   * Any other thrown object.
   */
  OBJRT_STATUS_EXCEPTION = 31,
} ObjrtStatus;

typedef enum ObjrtValueKind {
  OBJRT_VALUE_KIND_VOID = 0,
  OBJRT_VALUE_KIND_INT = 1,
  OBJRT_VALUE_KIND_FLOAT = 2,
  OBJRT_VALUE_KIND_OBJECT = 3,
  /**
   * A value with no C representation (strings, native data).
   */
  OBJRT_VALUE_KIND_OTHER = 4,
} ObjrtValueKind;

/**
 * An execution context. Use from one thread at a time.
 */
typedef struct ObjrtContext ObjrtContext;

/**
 * A reference to a runtime object.
 */
typedef struct ObjrtObject ObjrtObject;

/**
 * A sealed runtime with the core library.
 */
typedef struct ObjrtRuntime ObjrtRuntime;

typedef struct ObjrtCacheStats {
  uint64_t hits;
  uint64_t misses;
  uint64_t substitutions;
  uint64_t evictions;
} ObjrtCacheStats;

/**
 * Return value of a message. `object` is a new handle when `kind` is
 * `OBJRT_VALUE_KIND_OBJECT`, to be freed with `objrt_object_free`.
 */
typedef struct ObjrtValue {
  enum ObjrtValueKind kind;
  int64_t int_value;
  double float_value;
  struct ObjrtObject *object;
} ObjrtValue;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static string.
 */
const char *objrt_version(void);

/**
 * Static description of a status code.
 */
const char *objrt_status_str(enum ObjrtStatus status);

/**
 * Creates a runtime with the core library installed. Returns NULL on
 * failure.
 */
struct ObjrtRuntime *objrt_runtime_new(void);

/**
 * Frees a runtime. Fails with `OBJRT_STATUS_BUSY` while contexts are open.
 *
 * # Safety
 * `rt` must be NULL or a pointer from `objrt_runtime_new` not yet freed.
 */
enum ObjrtStatus objrt_runtime_free(struct ObjrtRuntime *rt);

/**
 * Instances allocated and not yet deallocated.
 *
 * # Safety
 * `rt` must be a live runtime handle.
 */
uint64_t objrt_runtime_live_objects(const struct ObjrtRuntime *rt);

/**
 * Opens a context on `rt`. Returns NULL if `rt` is NULL.
 *
 * # Safety
 * `rt` must be NULL or a live runtime handle.
 */
struct ObjrtContext *objrt_context_new(const struct ObjrtRuntime *rt);

/**
 * Closes a context, draining its autorelease pools.
 *
 * # Safety
 * `ctx` must be NULL or a live context handle.
 */
void objrt_context_free(struct ObjrtContext *ctx);

/**
 * Message of the last failed call on `ctx`, or NULL. Valid until the
 * next call on the same context.
 *
 * # Safety
 * `ctx` must be NULL or a live context handle.
 */
const char *objrt_last_error(const struct ObjrtContext *ctx);

/**
 * # Safety
 * `ctx` must be a live context handle.
 */
enum ObjrtStatus objrt_set_contract_level(struct ObjrtContext *ctx, enum ObjrtContractLevel level);

/**
 * # Safety
 * `ctx` must be a live context handle.
 */
enum ObjrtContractLevel objrt_contract_level(const struct ObjrtContext *ctx);

/**
 * Turns the message caches of `ctx` on or off.
 *
 * # Safety
 * `ctx` must be a live context handle.
 */
enum ObjrtStatus objrt_set_cache_enabled(struct ObjrtContext *ctx, bool enabled);

/**
 * # Safety
 * `ctx` must be a live context handle and `out` writable.
 */
enum ObjrtStatus objrt_cache_stats(const struct ObjrtContext *ctx, struct ObjrtCacheStats *out);

/**
 * New `Counter` with count `n`, stored in `*out`.
 *
 * # Safety
 * `ctx` must be a live context handle and `out` writable.
 */
enum ObjrtStatus objrt_counter_new(struct ObjrtContext *ctx, int64_t n, struct ObjrtObject **out);

/**
 * New `MilliCounter` with counts `n` and `milli`, stored in `*out`.
 *
 * # Safety
 * `ctx` must be a live context handle and `out` writable.
 */
enum ObjrtStatus objrt_milli_counter_new(struct ObjrtContext *ctx,
                                         int64_t n,
                                         int64_t milli,
                                         struct ObjrtObject **out);

/**
 * Wraps `delegate` in a delegating object, stored in `*out`.
 *
 * # Safety
 * `ctx` and `delegate` must be live handles and `out` writable.
 */
enum ObjrtStatus objrt_proxy_new(struct ObjrtContext *ctx,
                                 enum ObjrtProxyKind kind,
                                 const struct ObjrtObject *delegate,
                                 struct ObjrtObject **out);

/**
 * Count of a `Counter` (or subclass) instance.
 *
 * # Safety
 * `ctx` and `obj` must be live handles and `out` writable.
 */
enum ObjrtStatus objrt_counter_value(struct ObjrtContext *ctx,
                                     const struct ObjrtObject *obj,
                                     int64_t *out);

/**
 * Sends the generic named `selector` to `receivers` with integer closed
 * arguments. `out` may be NULL when the result is not wanted.
 *
 * # Safety
 * `ctx` must be a live context handle, `selector` a NUL-terminated
 * string, `receivers` an array of `n_receivers` live object handles,
 * `args` an array of `n_args` integers and `out` NULL or writable.
 */
enum ObjrtStatus objrt_send(struct ObjrtContext *ctx,
                            const char *selector,
                            const struct ObjrtObject *const *receivers,
                            size_t n_receivers,
                            const int64_t *args,
                            size_t n_args,
                            struct ObjrtValue *out);

/**
 * Whether `receivers` understand the generic named `selector` (without
 * falling back to delegation).
 *
 * # Safety
 * As for `objrt_send`; `out` must be writable.
 */
enum ObjrtStatus objrt_understands(struct ObjrtContext *ctx,
                                   const char *selector,
                                   const struct ObjrtObject *const *receivers,
                                   size_t n_receivers,
                                   bool *out);

/**
 * Retains `obj`. For automatic objects the retained value is a copy,
 * which replaces the object held by the handle.
 *
 * # Safety
 * `ctx` and `obj` must be live handles.
 */
enum ObjrtStatus objrt_retain(struct ObjrtContext *ctx, struct ObjrtObject *obj);

/**
 * Releases `obj`; the object is destroyed when its count reaches zero.
 * The handle stays valid and must still be freed.
 *
 * # Safety
 * `ctx` and `obj` must be live handles.
 */
enum ObjrtStatus objrt_release(struct ObjrtContext *ctx, const struct ObjrtObject *obj);

/**
 * Frees a handle without touching the object's reference count.
 *
 * # Safety
 * `obj` must be NULL or a handle not yet freed.
 */
void objrt_object_free(struct ObjrtObject *obj);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OBJRT_H */
