#ifndef MUSPIN_H
#define MUSPIN_H

/* Generated by cbindgen from the muspin-capi crate. Do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Initial-state preparation for the sampled estimator.
typedef enum {
  // Random-phase product state (one sample approximates the mixture).
  MUSPIN_PREP_RPA = 0,
  // Probe-polarised state with dephased environment phases.
  MUSPIN_PREP_DEPHASING = 1,
  // Uniformly sampled computational basis state.
  MUSPIN_PREP_BASIS_SAMPLE = 2,
} MuspinPrep;

// Status code returned by every fallible function.
typedef enum {
  // Success.
  MUSPIN_STATUS_OK = 0,
  // A malformed argument (bad range, non-finite value, …).
  MUSPIN_STATUS_INVALID_ARGUMENT = 1,
  // Invalid configuration.
  MUSPIN_STATUS_CONFIG = 2,
  // Invalid dataset.
  MUSPIN_STATUS_DATA = 3,
  // Refused: the computation exceeds a memory or dimension limit.
  MUSPIN_STATUS_RESOURCE_LIMIT = 4,
  // Dense linear-algebra failure.
  MUSPIN_STATUS_LINALG = 5,
  // A numerical post-condition failed.
  MUSPIN_STATUS_NUMERICAL = 6,
  // I/O failure.
  MUSPIN_STATUS_IO = 7,
  // A required pointer argument was null.
  MUSPIN_STATUS_NULL_POINTER = 8,
  // An internal panic was caught at the boundary.
  MUSPIN_STATUS_PANIC = 9,
} MuspinStatus;

// Opaque handle: a fluorite-lattice spin system plus its dipolar
// Hamiltonian.
typedef struct MuspinSystem MuspinSystem;

// Fault-tolerant estimate for one workload (see
// `muspin_resource_estimate`).
typedef struct {
  // Minimal surface-code distance meeting the target error.
  uint32_t distance;
  // Surface-code tiles (data + routing + distillation).
  uint32_t tiles;
  // Physical qubits: tiles × 2d².
  uint64_t physical_qubits;
  // Total surface-code cycles (magic-state limited).
  uint64_t code_cycles;
  // Wall-clock runtime in seconds at 1 µs per cycle.
  double runtime_s;
  // Achieved error bound at the chosen distance.
  double error_bound;
} MuspinResourceEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// ABI version of this library. Incremented on any breaking change to the
// exported types or functions.
uint32_t muspin_abi_version(void);

// Message describing this thread's most recent failure, or null if the
// last call on this thread succeeded.
//
// The pointer is owned by the library and stays valid until the next
// failing call on the same thread.
const char *muspin_last_error_message(void);

// Create a fluorite-lattice spin system: a muon plus `shells` fluorine
// shells, with the dipolar Hamiltonian built over all spin pairs
// (`muon_pairs_only` false) or muon–fluorine pairs only.
//
// `displacements` is either null (undisplaced lattice) or an array of six
// signed radial shell displacements in Å, ordered: nearest-neighbour,
// next-nearest, nn-nn diagonal lower, nn-nn diagonal upper, nn-nn axial,
// nnn-nn. On success `*out` owns the new system; release it with
// `muspin_system_free`.
//
// # Safety
//
// `out` must be a valid pointer. `displacements`, when non-null, must
// point to at least six readable doubles.
MuspinStatus muspin_system_new(size_t shells,
                               const double *displacements,
                               bool muon_pairs_only,
                               MuspinSystem **out);

// Release a system created by `muspin_system_new`. Null is a no-op.
//
// # Safety
//
// `system` must be null or a pointer previously returned by
// `muspin_system_new` that has not already been freed.
void muspin_system_free(MuspinSystem *system);

// Number of qubits the system occupies.
//
// # Safety
//
// `system` must be a live handle from `muspin_system_new`; `out` must be
// a valid pointer.
MuspinStatus muspin_system_qubit_count(const MuspinSystem *system, size_t *out);

// Muon polarisation by exact diagonalisation at each of the `n_times`
// times (µs, strictly increasing, starting at or after zero). Writes one
// value per time into `out_values`.
//
// # Safety
//
// `system` must be a live handle. `times` must point to `n_times`
// readable doubles and `out_values` to `n_times` writable doubles.
MuspinStatus muspin_polarisation_exact(const MuspinSystem *system,
                                       const double *times,
                                       size_t n_times,
                                       double *out_values);

// Muon polarisation by the stochastic estimator: `samples` prepared
// states per time point, each propagated by `steps` second-order product-
// formula steps. Writes the estimates into `out_values` and, when
// `out_sigmas` is non-null, the standard errors into it (NaN when
// `samples` is 1). Identical inputs give identical outputs on any
// machine: every sample derives its own random stream from
// (seed, sample index, time index).
//
// # Safety
//
// `system` must be a live handle. `times` must point to `n_times`
// readable doubles; `out_values` (and `out_sigmas`, when non-null) to
// `n_times` writable doubles.
MuspinStatus muspin_polarisation_sampled(const MuspinSystem *system,
                                         const double *times,
                                         size_t n_times,
                                         MuspinPrep prep,
                                         size_t samples,
                                         size_t steps,
                                         uint64_t seed,
                                         double *out_values,
                                         double *out_sigmas);

// Minimal surface-code distance and derived costs for a workload of
// `t_count` T gates on `logical_qubits` logical qubits, at physical error
// rate `p` and target total error `epsilon`. T gates per rotation 100,
// cycle time 1 µs.
//
// # Safety
//
// `out` must be a valid pointer.
MuspinStatus muspin_resource_estimate(uint64_t t_count,
                                      size_t logical_qubits,
                                      double p,
                                      double epsilon,
                                      MuspinResourceEstimate *out);

// Richardson-style zero-noise extrapolation of one expectation value from
// measurements at noise rates ε and λ·ε (λ > 1).
//
// # Safety
//
// `out` must be a valid pointer.
MuspinStatus muspin_extrapolate_zero_noise(double value_at_noise,
                                           double value_at_boosted_noise,
                                           double lambda,
                                           double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MUSPIN_H */
