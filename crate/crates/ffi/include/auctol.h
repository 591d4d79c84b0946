#ifndef AUCTOL_H
#define AUCTOL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes; the nonzero ones match the CLI exit codes.
typedef enum AuctolStatus {
  AUCTOL_STATUS_OK = 0,
  AUCTOL_STATUS_IO = 1,
  AUCTOL_STATUS_VALIDATION = 2,
  AUCTOL_STATUS_CAPACITY = 3,
  AUCTOL_STATUS_NOT_CHORDAL = 4,
  AUCTOL_STATUS_VIOLATION = 5,
  // A null pointer or non-UTF-8 string was passed in.
  AUCTOL_STATUS_INVALID_ARGUMENT = 64,
  // The library panicked; the handle arguments should not be reused.
  AUCTOL_STATUS_INTERNAL = 70,
} AuctolStatus;

typedef enum AuctolAlgorithm {
  AUCTOL_ALGORITHM_OPCOST = 0,
  AUCTOL_ALGORITHM_LROPCOST = 1,
  AUCTOL_ALGORITHM_GREEDY = 2,
  AUCTOL_ALGORITHM_EXACT = 3,
} AuctolAlgorithm;

// A validated auction instance.
typedef struct AuctolInstance AuctolInstance;

// A solution record for one instance.
typedef struct AuctolSolution AuctolSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parses and validates an instance from JSON text.
//
// # Safety
// `json` is a NUL-terminated string and `out` a writable pointer.
enum AuctolStatus auctol_instance_from_json(const char *json, struct AuctolInstance **out);

// Reads, parses and validates an instance file.
//
// # Safety
// `path` is a NUL-terminated string and `out` a writable pointer.
enum AuctolStatus auctol_instance_load(const char *path, struct AuctolInstance **out);

// Number of bids, or 0 for a null handle.
//
// # Safety
// `inst` is null or a live handle.
size_t auctol_instance_bid_count(const struct AuctolInstance *inst);

// # Safety
// `inst` is null or a handle not yet freed.
void auctol_instance_free(struct AuctolInstance *inst);

// Solves an instance. With `respect_constraints` zero any constraint groups
// are ignored. `exact_cap` bounds the exact solver; 0 keeps the default.
//
// # Safety
// `inst` is a live handle and `out` a writable pointer.
enum AuctolStatus auctol_solve(const struct AuctolInstance *inst,
                               enum AuctolAlgorithm algorithm,
                               int32_t respect_constraints,
                               size_t exact_cap,
                               struct AuctolSolution **out);

// Total price of the selected bids, or 0 for a null handle.
//
// # Safety
// `sol` is null or a live handle.
int64_t auctol_solution_revenue(const struct AuctolSolution *sol);

// Number of selected bids, or 0 for a null handle.
//
// # Safety
// `sol` is null or a live handle.
size_t auctol_solution_selected_count(const struct AuctolSolution *sol);

// Canonical JSON of the solution record, or null for a null handle.
// Release with [`auctol_string_free`].
//
// # Safety
// `sol` is null or a live handle.
char *auctol_solution_to_json(const struct AuctolSolution *sol);

// # Safety
// `sol` is null or a handle not yet freed.
void auctol_solution_free(struct AuctolSolution *sol);

// # Safety
// `s` is null or a string returned by this library and not yet freed.
void auctol_string_free(char *s);

// Message for the last failed call on this thread, or null. The pointer
// stays valid until the next call into the library on this thread.
const char *auctol_last_error(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AUCTOL_H */
