/* symqt C ABI. Generated by cbindgen; do not edit. */

#ifndef SYMQT_H
#define SYMQT_H

/* This file is generated from the symqt-ffi crate. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible entry point.
typedef enum SymqtStatus {
  SYMQT_STATUS_OK = 0,
  // Invalid input: schema violations, unknown names, bad arguments.
  SYMQT_STATUS_VALIDATION = 2,
  // A numerical residual exceeded its tolerance.
  SYMQT_STATUS_RESIDUAL = 3,
  // A hypothesis of the requested construction is violated by the inputs.
  SYMQT_STATUS_HYPOTHESIS = 4,
  // Null pointer argument.
  SYMQT_STATUS_NULL_ARGUMENT = 5,
  // Argument was not valid UTF-8.
  SYMQT_STATUS_UTF8 = 6,
  // Internal panic (a bug; the message carries the payload).
  SYMQT_STATUS_PANIC = 7,
} SymqtStatus;

// A loaded model document (opaque).
typedef struct SymqtModel SymqtModel;

// A running triangle experiment (opaque).
typedef struct SymqtTriangle SymqtTriangle;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the most recent failure on this thread. The pointer stays
// valid until the next failing call on the same thread.
const char *symqt_last_error(void);

// Library version as a static string.
const char *symqt_version(void);

// Frees a string allocated by this library.
//
// # Safety
// `s` must be a pointer previously returned through an out-parameter of
// this library, not yet freed. Null is a no-op.
void symqt_string_free(char *s);

// Parses a model document from JSON text.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be a valid pointer.
// On success `*out` owns the handle until [`symqt_model_free`].
enum SymqtStatus symqt_model_from_json(const char *json, struct SymqtModel **out);

// Loads a model document from a file path.
//
// # Safety
// As [`symqt_model_from_json`], with `path` a NUL-terminated file path.
enum SymqtStatus symqt_model_load(const char *path, struct SymqtModel **out);

// Releases a model handle. Null is a no-op.
//
// # Safety
// `model` must come from a model constructor of this library and must not
// be used afterwards.
void symqt_model_free(struct SymqtModel *model);

// Serializes the canonical form of the document.
//
// # Safety
// `model` must be a live handle; `out` receives an owned string.
enum SymqtStatus symqt_model_to_json(const struct SymqtModel *model, char **out);

// Permissibility analysis of every parameter; the result is the same JSON
// report the CLI prints.
//
// # Safety
// `model` must be a live handle; `out` receives an owned string.
enum SymqtStatus symqt_analyze_json(const struct SymqtModel *model, char **out);

// Spectrum report (operator route) for one parameter.
//
// # Safety
// `model` must be a live handle, `parameter` NUL-terminated; `out`
// receives an owned string.
enum SymqtStatus symqt_spectrum_json(const struct SymqtModel *model,
                                     const char *parameter,
                                     char **out);

// Operator for one parameter, in the state-space basis: matrix, spectrum
// and residuals as JSON.
//
// # Safety
// As [`symqt_spectrum_json`].
enum SymqtStatus symqt_operator_json(const struct SymqtModel *model,
                                     const char *parameter,
                                     char **out);

// Outcome table of `param_b` measured right after `param_a = value_a`.
//
// # Safety
// `model` must be a live handle; the three names NUL-terminated; `out`
// receives an owned string.
enum SymqtStatus symqt_transition_json(const struct SymqtModel *model,
                                       const char *param_a,
                                       const char *value_a,
                                       const char *param_b,
                                       char **out);

// Exact EPR correlation at angle `u` (radians): `-cos u`.
double symqt_epr_exact(double u);

// Monte Carlo EPR correlation estimate.
//
// # Safety
// `estimate` and `std_error` must be valid pointers.
enum SymqtStatus symqt_epr_mc(double u,
                              uint64_t n_samples,
                              uint64_t seed,
                              double *estimate,
                              double *std_error);

// Starts a triangle experiment.
//
// # Safety
// `out` must be a valid pointer; the handle is owned by the caller until
// [`symqt_triangle_free`].
enum SymqtStatus symqt_triangle_new(uint64_t seed, bool sealed_top, struct SymqtTriangle **out);

// Opens a window (`"a"`, `"b"`, `"c"` or `"top"`); the observation record
// is returned as JSON.
//
// # Safety
// `triangle` must be a live handle; `window` NUL-terminated; `out`
// receives an owned string.
enum SymqtStatus symqt_triangle_open(struct SymqtTriangle *triangle,
                                     const char *window,
                                     char **out);

// Current statistical state of the experiment as JSON.
//
// # Safety
// `triangle` must be a live handle; `out` receives an owned string.
enum SymqtStatus symqt_triangle_state_json(const struct SymqtTriangle *triangle, char **out);

// Releases a triangle handle. Null is a no-op.
//
// # Safety
// `triangle` must come from [`symqt_triangle_new`] and must not be used
// afterwards.
void symqt_triangle_free(struct SymqtTriangle *triangle);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SYMQT_H */
