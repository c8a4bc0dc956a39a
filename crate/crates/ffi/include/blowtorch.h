#ifndef BLOWTORCH_H
#define BLOWTORCH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call. Values 1 to 4 match the command-line exit codes.
typedef enum BtStatus {
  BT_STATUS_OK = 0,
  // Malformed input, failed validation or an unknown state.
  BT_STATUS_VALIDATION = 1,
  // A computational cap was hit, or no positive-heat path exists.
  BT_STATUS_CAP = 2,
  // The request contradicts a hypothesis, e.g. synthesis on a heat-ordered pair.
  BT_STATUS_HYPOTHESIS = 3,
  BT_STATUS_INTERNAL = 4,
  BT_STATUS_NULL_POINTER = 5,
  // An output buffer has the wrong length.
  BT_STATUS_BUFFER_SIZE = 6,
  // A Rust panic was caught at the boundary.
  BT_STATUS_PANIC = 7,
} BtStatus;

typedef enum BtMethod {
  BT_METHOD_AUTO = 0,
  BT_METHOD_SOLVE = 1,
  BT_METHOD_TREES = 2,
  BT_METHOD_MATRIX_TREE = 3,
} BtMethod;

typedef enum BtRelation {
  BT_RELATION_STRICTLY_GREATER = 0,
  BT_RELATION_WEAKLY_GREATER = 1,
  BT_RELATION_EQUAL_BY_ZERO_HEAT = 2,
  BT_RELATION_INCOMPARABLE = 3,
  BT_RELATION_WEAKLY_LESS = 4,
  BT_RELATION_STRICTLY_LESS = 5,
} BtRelation;

typedef enum BtDirection {
  BT_DIRECTION_X_OVER_Y = 0,
  BT_DIRECTION_Y_OVER_X = 1,
} BtDirection;

// Opaque network handle.
typedef struct BtNetwork BtNetwork;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or null. Valid until the next
// failing call on the same thread.
const char *bt_last_error(void);

// Parses and validates a network document (UTF-8 JSON).
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum BtStatus bt_network_parse(const char *json, struct BtNetwork **out);

// # Safety
// `net` must come from [`bt_network_parse`] and not be freed twice. Null is ignored.
void bt_network_free(struct BtNetwork *net);

// # Safety
// Pointers must be valid.
enum BtStatus bt_network_state_count(const struct BtNetwork *net, size_t *out);

// Index of the state with the given label.
//
// # Safety
// Pointers must be valid; `label` NUL-terminated.
enum BtStatus bt_network_state_index(const struct BtNetwork *net, const char *label, size_t *out);

// Stationary occupations at `beta` into `probs[0..len]`, `len` = state count.
//
// # Safety
// `probs` must point to `len` writable doubles.
enum BtStatus bt_stationary(const struct BtNetwork *net,
                            double beta,
                            enum BtMethod method,
                            double *probs,
                            size_t len);

// Minimum and maximum heat over self-avoiding paths `y -> x`.
//
// # Safety
// Pointers must be valid.
enum BtStatus bt_heat_bounds(const struct BtNetwork *net,
                             size_t x,
                             size_t y,
                             double *min_heat,
                             double *max_heat);

// Heat-order relation of `x` against `y`.
//
// # Safety
// Pointers must be valid.
enum BtStatus bt_heat_relation(const struct BtNetwork *net,
                               size_t x,
                               size_t y,
                               enum BtRelation *out);

// Zero-temperature classification using the network's exponent table
// (or `q/2`). Writes `Psi(x)` to `psi[0..len]`, 1 or 0 per state to
// `dominant[0..len]`, and the escherian flag.
//
// # Safety
// Buffers must hold `len` elements; `escherian` must be valid.
enum BtStatus bt_lowtemp(const struct BtNetwork *net,
                         double *psi,
                         uint8_t *dominant,
                         size_t len,
                         bool *escherian);

// Synthesizes activations forcing the requested order at the network's beta.
// On success `*json_out` holds the certified assignment as JSON; release it
// with [`bt_string_free`].
//
// # Safety
// Pointers must be valid.
enum BtStatus bt_blowtorch(const struct BtNetwork *net,
                           size_t x,
                           size_t y,
                           enum BtDirection direction,
                           bool allow_one_sided,
                           char **json_out);

// Simulates from `initial` over `[0, horizon]` and reports empirical
// occupations, the entropy flux and the number of jumps.
//
// # Safety
// `occupation` must hold `len` doubles; other pointers must be valid.
enum BtStatus bt_simulate(const struct BtNetwork *net,
                          double beta,
                          size_t initial,
                          double horizon,
                          uint64_t seed,
                          double *occupation,
                          size_t len,
                          double *entropy_flux,
                          size_t *jumps);

// # Safety
// `s` must come from this library and not be freed twice. Null is ignored.
void bt_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BLOWTORCH_H */
