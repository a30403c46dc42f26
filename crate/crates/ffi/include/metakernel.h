#ifndef METAKERNEL_H
#define METAKERNEL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Stands for an absent entity id (no parent, no container).
 */
#define MK_NO_ENTITY UINT64_MAX

/**
 * Result of every call.
 */
typedef enum MkStatus {
  MK_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  MK_STATUS_NULL_ARGUMENT = 1,
  MK_STATUS_INVALID_UTF8 = 2,
  /**
   * Text could not be parsed, or describes an inconsistent model.
   */
  MK_STATUS_PARSE_ERROR = 3,
  /**
   * A metamodel parsed but is not well formed.
   */
  MK_STATUS_INVALID_METAMODEL = 4,
  /**
   * A model names a different metamodel than the one supplied.
   */
  MK_STATUS_METAMODEL_MISMATCH = 5,
  /**
   * An entity, link, path, class or attribute does not exist.
   */
  MK_STATUS_NOT_FOUND = 6,
  /**
   * The operation would break the metamodel or a derivation.
   */
  MK_STATUS_REJECTED = 7,
  MK_STATUS_MERGE_ERROR = 8,
  /**
   * The library panicked; the handles involved should be released.
   */
  MK_STATUS_INTERNAL = 9,
} MkStatus;

/**
 * A metamodel.
 */
typedef struct MkMetamodel MkMetamodel;

/**
 * A model together with its derivation registry.
 */
typedef struct MkModel MkModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static string.
 */
const char *mk_version(void);

/**
 * Message of the last failed call on this thread, or null after a
 * successful one. Valid until the next call on the same thread.
 */
const char *mk_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 */
void mk_string_free(char *s);

/**
 * Parses and validates a metamodel in the `.mm` format.
 */
enum MkStatus mk_metamodel_parse(const char *src, struct MkMetamodel **out);

void mk_metamodel_free(struct MkMetamodel *mm);

/**
 * Canonical `.mm` text of a metamodel.
 */
enum MkStatus mk_metamodel_serialize(const struct MkMetamodel *mm, char **out);

/**
 * Parses a `.mdl` model that must name `mm`.
 */
enum MkStatus mk_model_parse(const char *src, const struct MkMetamodel *mm, struct MkModel **out);

/**
 * An empty model named `name` conforming to `mm`.
 */
enum MkStatus mk_model_new(const char *name, const struct MkMetamodel *mm, struct MkModel **out);

void mk_model_free(struct MkModel *model);

/**
 * Canonical `.mdl` text of a model.
 */
enum MkStatus mk_model_serialize(const struct MkModel *model, char **out);

/**
 * Checks conformance. Writes the number of error diagnostics, and when
 * `report` is not null, one `severity[code] path: message` line per
 * diagnostic.
 */
enum MkStatus mk_model_check(const struct MkModel *model,
                             const struct MkMetamodel *mm,
                             bool skip_constraints,
                             size_t *error_count,
                             char **report);

/**
 * Resolves `/A/B` or `#id` to an entity id.
 */
enum MkStatus mk_model_resolve(const struct MkModel *model, const char *path, uint64_t *out_id);

/**
 * Path of an entity, e.g. `/Top/In`.
 */
enum MkStatus mk_model_path(const struct MkModel *model, uint64_t id, char **out);

/**
 * Adds an instance of `class` under `parent` (or as a root for
 * [`MK_NO_ENTITY`]) and propagates it to derivations of the parent.
 */
enum MkStatus mk_model_add_entity(struct MkModel *model,
                                  const struct MkMetamodel *mm,
                                  const char *class_name,
                                  uint64_t parent,
                                  const char *name,
                                  uint64_t *out_id);

/**
 * Creates a link binding `roles[i]` to `ends[i]` for `i < count`.
 */
enum MkStatus mk_model_connect(struct MkModel *model,
                               const struct MkMetamodel *mm,
                               const char *association,
                               const char *const *roles,
                               const uint64_t *ends,
                               size_t count,
                               uint64_t container,
                               uint64_t *out_link);

/**
 * Deletes an entity's subtree together with its correspondents.
 */
enum MkStatus mk_model_delete_entity(struct MkModel *model, uint64_t id);

enum MkStatus mk_model_delete_link(struct MkModel *model, uint64_t id);

/**
 * Sets an attribute from a literal as written in model files (`2.5`,
 * `"text"`, `true`, `Idle`) and propagates it to unmodified clones.
 */
enum MkStatus mk_model_set_attribute(struct MkModel *model,
                                     const struct MkMetamodel *mm,
                                     uint64_t id,
                                     const char *attribute,
                                     const char *literal);

/**
 * The attribute's value as a literal, falling back to the class default
 * when the entity does not set it.
 */
enum MkStatus mk_model_get_attribute(const struct MkModel *model,
                                     const struct MkMetamodel *mm,
                                     uint64_t id,
                                     const char *attribute,
                                     char **out);

/**
 * Derives a clone (or, with `subprototype`, a subprototype) of `prototype`
 * under `parent`.
 */
enum MkStatus mk_model_clone(struct MkModel *model,
                             const struct MkMetamodel *mm,
                             uint64_t prototype,
                             uint64_t parent,
                             bool subprototype,
                             uint64_t *out_id);

/**
 * Prototypes and what derives from them, one per line.
 */
enum MkStatus mk_model_derivations(const struct MkModel *model, char **out);

/**
 * Merges two metamodels along an equivalence spec in the `.eqv` format.
 * `report` may be null.
 */
enum MkStatus mk_merge(const struct MkMetamodel *left,
                       const struct MkMetamodel *right,
                       const char *spec,
                       struct MkMetamodel **out,
                       char **report);

/**
 * Classifies what stops conforming when `model` moves from `v1` to `v2`.
 * Writes the number of impacts and, when `report` is not null, one
 * `IMPACT <kind> <path>` line per impact.
 */
enum MkStatus mk_evolution_report(const struct MkModel *model,
                                  const struct MkMetamodel *v1,
                                  const struct MkMetamodel *v2,
                                  size_t *impact_count,
                                  char **report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* METAKERNEL_H */
