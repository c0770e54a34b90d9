//! C ABI for the muspin toolkit.
//!
//! The surface follows the usual C conventions: opaque handles created and
//! destroyed by paired functions, integer status codes, caller-allocated
//! output buffers, and a per-thread error message for diagnostics. All
//! functions are panic-safe: a Rust panic is caught at the boundary and
//! reported as [`MuspinStatus::Panic`] instead of unwinding into C.
//!
//! The matching header is generated by cbindgen (see `build.rs`) and a
//! committed copy lives in `include/muspin.h`.
//!
//! Units follow the core library: distances in Å, times in µs, magnetic
//! fields in Tesla.

use muspin::error::Error;
use muspin::evolve::{EvolutionPlan, Method, TermOrdering};
use muspin::geometry::{caf2_system, Caf2System, Displacements};
use muspin::hamiltonian::{dipolar_hamiltonian, PairSelection};
use muspin::pauli::PauliSum;
use muspin::polarisation::{
    polarisation_exact_diag, polarisation_sampled, MethodConfig, StatePrep,
};
use muspin::resources::{solve_distance, SurfaceCodeParams};
use muspin::state::MemoryPolicy;
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MuspinStatus {
    /// Success.
    Ok = 0,
    /// A malformed argument (bad range, non-finite value, …).
    InvalidArgument = 1,
    /// Invalid configuration.
    Config = 2,
    /// Invalid dataset.
    Data = 3,
    /// Refused: the computation exceeds a memory or dimension limit.
    ResourceLimit = 4,
    /// Dense linear-algebra failure.
    Linalg = 5,
    /// A numerical post-condition failed.
    Numerical = 6,
    /// I/O failure.
    Io = 7,
    /// A required pointer argument was null.
    NullPointer = 8,
    /// An internal panic was caught at the boundary.
    Panic = 9,
}

/// Initial-state preparation for the sampled estimator.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MuspinPrep {
    /// Random-phase product state (one sample approximates the mixture).
    Rpa = 0,
    /// Probe-polarised state with dephased environment phases.
    Dephasing = 1,
    /// Uniformly sampled computational basis state.
    BasisSample = 2,
}

/// Fault-tolerant estimate for one workload (see
/// `muspin_resource_estimate`).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MuspinResourceEstimate {
    /// Minimal surface-code distance meeting the target error.
    pub distance: u32,
    /// Surface-code tiles (data + routing + distillation).
    pub tiles: u32,
    /// Physical qubits: tiles × 2d².
    pub physical_qubits: u64,
    /// Total surface-code cycles (magic-state limited).
    pub code_cycles: u64,
    /// Wall-clock runtime in seconds at 1 µs per cycle.
    pub runtime_s: f64,
    /// Achieved error bound at the chosen distance.
    pub error_bound: f64,
}

/// Opaque handle: a fluorite-lattice spin system plus its dipolar
/// Hamiltonian.
pub struct MuspinSystem {
    system: Caf2System,
    hamiltonian: PauliSum,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: &str) {
    let sanitized: Vec<u8> = message.bytes().filter(|&b| b != 0).collect();
    let c = CString::new(sanitized).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn status_of(err: &Error) -> MuspinStatus {
    match err {
        Error::Config(_) => MuspinStatus::Config,
        Error::Data(_) => MuspinStatus::Data,
        Error::ResourceLimit(_) => MuspinStatus::ResourceLimit,
        Error::InvalidArgument(_) => MuspinStatus::InvalidArgument,
        Error::Linalg(_) => MuspinStatus::Linalg,
        Error::Numerical(_) => MuspinStatus::Numerical,
        Error::Io(_) => MuspinStatus::Io,
    }
}

/// Run `f` with panic containment; map errors to statuses and record their
/// messages for `muspin_last_error_message`.
fn guarded(f: impl FnOnce() -> Result<(), Error>) -> MuspinStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            clear_error();
            MuspinStatus::Ok
        }
        Ok(Err(e)) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic caught at the C boundary");
            MuspinStatus::Panic
        }
    }
}

fn null_pointer(name: &str) -> MuspinStatus {
    set_error(&format!("argument '{name}' is null"));
    MuspinStatus::NullPointer
}

/// ABI version of this library. Incremented on any breaking change to the
/// exported types or functions.
#[no_mangle]
pub extern "C" fn muspin_abi_version() -> u32 {
    1
}

/// Message describing this thread's most recent failure, or null if the
/// last call on this thread succeeded.
///
/// The pointer is owned by the library and stays valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn muspin_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map(|c| c.as_ptr())
            .unwrap_or(std::ptr::null())
    })
}

/// Create a fluorite-lattice spin system: a muon plus `shells` fluorine
/// shells, with the dipolar Hamiltonian built over all spin pairs
/// (`muon_pairs_only` false) or muon–fluorine pairs only.
///
/// `displacements` is either null (undisplaced lattice) or an array of six
/// signed radial shell displacements in Å, ordered: nearest-neighbour,
/// next-nearest, nn-nn diagonal lower, nn-nn diagonal upper, nn-nn axial,
/// nnn-nn. On success `*out` owns the new system; release it with
/// `muspin_system_free`.
///
/// # Safety
///
/// `out` must be a valid pointer. `displacements`, when non-null, must
/// point to at least six readable doubles.
#[no_mangle]
pub unsafe extern "C" fn muspin_system_new(
    shells: usize,
    displacements: *const f64,
    muon_pairs_only: bool,
    out: *mut *mut MuspinSystem,
) -> MuspinStatus {
    if out.is_null() {
        return null_pointer("out");
    }
    guarded(|| {
        let disp = if displacements.is_null() {
            Displacements::default()
        } else {
            let d = unsafe { std::slice::from_raw_parts(displacements, 6) };
            Displacements {
                nn: d[0],
                n_nn: d[1],
                nn_nn_diag_lower: d[2],
                nn_nn_diag_upper: d[3],
                nn_nn_axial: d[4],
                nnn_nn: d[5],
            }
        };
        let system = caf2_system(shells, &disp)?;
        let pairs = if muon_pairs_only {
            PairSelection::InvolvingParticle(0)
        } else {
            PairSelection::All
        };
        let hamiltonian = dipolar_hamiltonian(system.layout(), pairs)?;
        let handle = Box::new(MuspinSystem {
            system,
            hamiltonian,
        });
        unsafe { *out = Box::into_raw(handle) };
        Ok(())
    })
}

/// Release a system created by `muspin_system_new`. Null is a no-op.
///
/// # Safety
///
/// `system` must be null or a pointer previously returned by
/// `muspin_system_new` that has not already been freed.
#[no_mangle]
pub unsafe extern "C" fn muspin_system_free(system: *mut MuspinSystem) {
    if !system.is_null() {
        drop(unsafe { Box::from_raw(system) });
    }
}

/// Number of qubits the system occupies.
///
/// # Safety
///
/// `system` must be a live handle from `muspin_system_new`; `out` must be
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn muspin_system_qubit_count(
    system: *const MuspinSystem,
    out: *mut usize,
) -> MuspinStatus {
    if system.is_null() {
        return null_pointer("system");
    }
    if out.is_null() {
        return null_pointer("out");
    }
    guarded(|| {
        unsafe { *out = (*system).system.layout().total_qubits() };
        Ok(())
    })
}

/// Muon polarisation by exact diagonalisation at each of the `n_times`
/// times (µs, strictly increasing, starting at or after zero). Writes one
/// value per time into `out_values`.
///
/// # Safety
///
/// `system` must be a live handle. `times` must point to `n_times`
/// readable doubles and `out_values` to `n_times` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn muspin_polarisation_exact(
    system: *const MuspinSystem,
    times: *const f64,
    n_times: usize,
    out_values: *mut f64,
) -> MuspinStatus {
    if system.is_null() {
        return null_pointer("system");
    }
    if times.is_null() {
        return null_pointer("times");
    }
    if out_values.is_null() {
        return null_pointer("out_values");
    }
    guarded(|| {
        let handle = unsafe { &*system };
        let grid = unsafe { std::slice::from_raw_parts(times, n_times) };
        let series = polarisation_exact_diag(
            &handle.hamiltonian,
            handle.system.layout().total_qubits(),
            grid,
            &MemoryPolicy::default(),
        )?;
        let out = unsafe { std::slice::from_raw_parts_mut(out_values, n_times) };
        out.copy_from_slice(&series.values);
        Ok(())
    })
}

/// Muon polarisation by the stochastic estimator: `samples` prepared
/// states per time point, each propagated by `steps` second-order product-
/// formula steps. Writes the estimates into `out_values` and, when
/// `out_sigmas` is non-null, the standard errors into it (NaN when
/// `samples` is 1). Identical inputs give identical outputs on any
/// machine: every sample derives its own random stream from
/// (seed, sample index, time index).
///
/// # Safety
///
/// `system` must be a live handle. `times` must point to `n_times`
/// readable doubles; `out_values` (and `out_sigmas`, when non-null) to
/// `n_times` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn muspin_polarisation_sampled(
    system: *const MuspinSystem,
    times: *const f64,
    n_times: usize,
    prep: MuspinPrep,
    samples: usize,
    steps: usize,
    seed: u64,
    out_values: *mut f64,
    out_sigmas: *mut f64,
) -> MuspinStatus {
    if system.is_null() {
        return null_pointer("system");
    }
    if times.is_null() {
        return null_pointer("times");
    }
    if out_values.is_null() {
        return null_pointer("out_values");
    }
    guarded(|| {
        let handle = unsafe { &*system };
        let grid = unsafe { std::slice::from_raw_parts(times, n_times) };
        let last = grid.last().copied().unwrap_or(0.0);
        let plan = EvolutionPlan::new(Method::Trotter2, TermOrdering::Magnitude, last, steps)?;
        let prep = match prep {
            MuspinPrep::Rpa => StatePrep::Rpa,
            MuspinPrep::Dephasing => StatePrep::Dephasing,
            MuspinPrep::BasisSample => StatePrep::BasisSample,
        };
        let mut config = MethodConfig::new(prep, samples, plan);
        config.seed = seed;
        let series = polarisation_sampled(
            &handle.hamiltonian,
            handle.system.layout(),
            grid,
            &config,
            &MemoryPolicy::default(),
        )?;
        unsafe {
            std::slice::from_raw_parts_mut(out_values, n_times).copy_from_slice(&series.values);
            if !out_sigmas.is_null() {
                std::slice::from_raw_parts_mut(out_sigmas, n_times)
                    .copy_from_slice(&series.sigmas);
            }
        }
        Ok(())
    })
}

/// Minimal surface-code distance and derived costs for a workload of
/// `t_count` T gates on `logical_qubits` logical qubits, at physical error
/// rate `p` and target total error `epsilon`. T gates per rotation 100,
/// cycle time 1 µs.
///
/// # Safety
///
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn muspin_resource_estimate(
    t_count: u64,
    logical_qubits: usize,
    p: f64,
    epsilon: f64,
    out: *mut MuspinResourceEstimate,
) -> MuspinStatus {
    if out.is_null() {
        return null_pointer("out");
    }
    guarded(|| {
        let params = SurfaceCodeParams::new(p, epsilon)?;
        let report = solve_distance(t_count, logical_qubits, &params)?;
        unsafe {
            *out = MuspinResourceEstimate {
                distance: report.distance as u32,
                tiles: report.tiles as u32,
                physical_qubits: report.physical_qubits,
                code_cycles: report.code_cycles,
                runtime_s: report.runtime_s,
                error_bound: report.error_bound,
            };
        }
        Ok(())
    })
}

/// Richardson-style zero-noise extrapolation of one expectation value from
/// measurements at noise rates ε and λ·ε (λ > 1).
///
/// # Safety
///
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn muspin_extrapolate_zero_noise(
    value_at_noise: f64,
    value_at_boosted_noise: f64,
    lambda: f64,
    out: *mut f64,
) -> MuspinStatus {
    if out.is_null() {
        return null_pointer("out");
    }
    guarded(|| {
        let p0 = muspin::fit::extrapolate_exponential(value_at_noise, value_at_boosted_noise, lambda)?;
        unsafe { *out = p0 };
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CStr;

    fn last_error() -> String {
        let ptr = muspin_last_error_message();
        assert!(!ptr.is_null(), "expected an error message");
        unsafe { CStr::from_ptr(ptr) }.to_str().unwrap().to_string()
    }

    #[test]
    fn system_lifecycle_and_exact_polarisation() {
        unsafe {
            let mut handle: *mut MuspinSystem = std::ptr::null_mut();
            let status = muspin_system_new(1, std::ptr::null(), false, &mut handle);
            assert_eq!(status, MuspinStatus::Ok);
            assert!(!handle.is_null());

            let mut qubits = 0usize;
            assert_eq!(
                muspin_system_qubit_count(handle, &mut qubits),
                MuspinStatus::Ok
            );
            assert_eq!(qubits, 3);

            let times = [0.0, 1.0, 2.0];
            let mut values = [0.0f64; 3];
            let status =
                muspin_polarisation_exact(handle, times.as_ptr(), times.len(), values.as_mut_ptr());
            assert_eq!(status, MuspinStatus::Ok);
            assert!((values[0] - 1.0).abs() < 1e-12);
            assert!(values.iter().all(|v| v.is_finite() && v.abs() <= 1.0 + 1e-12));

            muspin_system_free(handle);
        }
    }

    #[test]
    fn sampled_estimator_is_deterministic_through_the_abi() {
        unsafe {
            let mut handle: *mut MuspinSystem = std::ptr::null_mut();
            let disp = [-0.1, 0.0, 0.0, 0.0, 0.0, 0.0];
            assert_eq!(
                muspin_system_new(1, disp.as_ptr(), true, &mut handle),
                MuspinStatus::Ok
            );
            let times = [0.0, 0.5, 1.0, 1.5];
            let mut a = [0.0f64; 4];
            let mut sa = [0.0f64; 4];
            let mut b = [0.0f64; 4];
            for (values, sigmas) in [(&mut a, Some(&mut sa)), (&mut b, None)] {
                let status = muspin_polarisation_sampled(
                    handle,
                    times.as_ptr(),
                    times.len(),
                    MuspinPrep::Rpa,
                    6,
                    8,
                    42,
                    values.as_mut_ptr(),
                    sigmas.map(|s| s.as_mut_ptr()).unwrap_or(std::ptr::null_mut()),
                );
                assert_eq!(status, MuspinStatus::Ok);
            }
            assert_eq!(a, b, "same seed must give bitwise-equal estimates");
            assert!(sa.iter().all(|s| s.is_finite()));
            muspin_system_free(handle);
        }
    }

    #[test]
    fn errors_carry_codes_and_messages() {
        unsafe {
            let mut handle: *mut MuspinSystem = std::ptr::null_mut();
            // Zero shells is an invalid argument.
            let status = muspin_system_new(0, std::ptr::null(), false, &mut handle);
            assert_eq!(status, MuspinStatus::InvalidArgument);
            assert!(!last_error().is_empty());
            assert!(handle.is_null());

            // Null pointers are reported as such.
            assert_eq!(
                muspin_system_qubit_count(std::ptr::null(), &mut 0usize),
                MuspinStatus::NullPointer
            );
            assert!(last_error().contains("system"));

            // Decreasing times are invalid.
            assert_eq!(muspin_system_new(1, std::ptr::null(), false, &mut handle), MuspinStatus::Ok);
            let times = [1.0, 0.5];
            let mut values = [0.0f64; 2];
            let status =
                muspin_polarisation_exact(handle, times.as_ptr(), 2, values.as_mut_ptr());
            assert_eq!(status, MuspinStatus::InvalidArgument);

            // A success clears the message.
            let times = [0.0, 0.5];
            let status =
                muspin_polarisation_exact(handle, times.as_ptr(), 2, values.as_mut_ptr());
            assert_eq!(status, MuspinStatus::Ok);
            assert!(muspin_last_error_message().is_null());
            muspin_system_free(handle);
        }
    }

    #[test]
    fn resource_estimates_match_the_reference_rows() {
        unsafe {
            let mut est = MuspinResourceEstimate {
                distance: 0,
                tiles: 0,
                physical_qubits: 0,
                code_cycles: 0,
                runtime_s: 0.0,
                error_bound: 0.0,
            };
            let status = muspin_resource_estimate(1_960_000, 11, 1e-3, 0.01, &mut est);
            assert_eq!(status, MuspinStatus::Ok);
            assert_eq!(est.distance, 22);
            assert_eq!(est.physical_qubits, 30_008);
            assert!((est.runtime_s - 474.32).abs() < 1e-9);

            // Above threshold: no distance works.
            let status = muspin_resource_estimate(1_000, 11, 0.5, 0.01, &mut est);
            assert_eq!(status, MuspinStatus::Numerical);
        }
    }

    #[test]
    fn extrapolation_recovers_exact_exponential_decay() {
        unsafe {
            let mut out = 0.0f64;
            let p0: f64 = 0.8;
            let (eps, lambda): (f64, f64) = (0.05, 1.5);
            let low = p0 * (-eps).exp();
            let boosted = p0 * (-lambda * eps).exp();
            assert_eq!(
                muspin_extrapolate_zero_noise(low, boosted, lambda, &mut out),
                MuspinStatus::Ok
            );
            assert!((out - p0).abs() < 1e-12);
            assert_eq!(
                muspin_extrapolate_zero_noise(0.5, -0.5, 1.5, &mut out),
                MuspinStatus::Numerical
            );
        }
    }
}
