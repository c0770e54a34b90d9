//! Deterministic parallel execution over independent grid points.
//!
//! Every stochastic estimate in this crate derives its random streams
//! from (seed, sample, time index, axis) coordinates rather than from a
//! shared generator, so grid points can be computed in any order — and on
//! any number of threads — without changing a single bit of the output.
//! This module provides the bounded worker pool that exploits that:
//! tasks are claimed from an atomic counter and results are assembled in
//! task-index order.

use crate::error::{Error, Result};
use crate::polarisation::{
    angular_average, polarisation_exact_mixed_axis, sampled_point, validate_times, MethodConfig,
    PolarisationSeries, StatePrep,
};
use crate::pauli::PauliSum;
use crate::spin::{Axis, QubitLayout};
use crate::state::MemoryPolicy;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Environment variable consulted for the default worker count.
pub const WORKERS_ENV_VAR: &str = "MUSPIN_WORKERS";

/// Resolve a worker count: an explicit request wins, then the
/// [`WORKERS_ENV_VAR`] environment variable, then the machine's available
/// parallelism (falling back to one).
pub fn resolve_workers(requested: Option<usize>) -> Result<usize> {
    if let Some(n) = requested {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "worker count must be at least one".into(),
            ));
        }
        return Ok(n);
    }
    match std::env::var(WORKERS_ENV_VAR) {
        Ok(raw) => match raw.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Error::Config(format!(
                "{WORKERS_ENV_VAR} must be a positive integer, got {raw:?}"
            ))),
        },
        Err(std::env::VarError::NotPresent) => Ok(std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)),
        Err(std::env::VarError::NotUnicode(_)) => Err(Error::Config(format!(
            "{WORKERS_ENV_VAR} is not valid unicode"
        ))),
    }
}

/// Apply a fallible task to every index in `0..n_tasks` on up to
/// `workers` threads and return the results in index order.
///
/// Tasks are claimed in increasing index order from a shared counter, so
/// the thread count affects only wall-clock time, never the output. All
/// tasks run to completion even when some fail; the reported error is the
/// one with the smallest task index, which makes failures as
/// deterministic as successes.
pub fn parallel_map<T, F>(n_tasks: usize, workers: usize, task: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    if workers == 0 {
        return Err(Error::InvalidArgument(
            "worker count must be at least one".into(),
        ));
    }
    if n_tasks == 0 {
        return Ok(Vec::new());
    }
    let workers = workers.min(n_tasks);
    if workers == 1 {
        return (0..n_tasks).map(&task).collect();
    }

    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<T>>>> = (0..n_tasks).map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n_tasks {
                    break;
                }
                let result = task(i);
                *slots[i].lock().expect("result slot poisoned") = Some(result);
            });
        }
    });

    let mut out = Vec::with_capacity(n_tasks);
    for (i, slot) in slots.into_iter().enumerate() {
        match slot.into_inner().expect("result slot poisoned") {
            Some(Ok(v)) => out.push(v),
            Some(Err(e)) => return Err(e),
            None => {
                return Err(Error::Numerical(format!(
                    "task {i} produced no result; worker pool bug"
                )))
            }
        }
    }
    Ok(out)
}

/// Parallel version of [`crate::polarisation::polarisation_sampled`]:
/// bitwise-identical output for any worker count.
pub fn sampled_series_parallel(
    h: &PauliSum,
    layout: &QubitLayout,
    times: &[f64],
    config: &MethodConfig,
    policy: &MemoryPolicy,
    workers: usize,
) -> Result<PolarisationSeries> {
    validate_times(times)?;
    config.validate()?;
    if config.prep == StatePrep::ExactMixed {
        // Sampling-free reference: deterministic already, no pool needed.
        return polarisation_exact_mixed_axis(
            h,
            layout.total_qubits(),
            times,
            config.axis,
            &config.plan,
            policy,
        );
    }
    let reference_time = *times.last().expect("validated non-empty");
    let points = parallel_map(times.len(), workers, |i| {
        sampled_point(h, layout, times[i], i, reference_time, config, policy)
    })?;
    let (values, sigmas) = points.into_iter().unzip();
    PolarisationSeries::new(
        times.to_vec(),
        values,
        sigmas,
        format!("sampled-{}", config.prep.label()),
        config.plan.steps,
        config.samples,
        Some(config.seed),
    )
}

/// Parallel version of [`crate::polarisation::polarisation_series`],
/// honouring the configuration's `angular_average` flag.
pub fn series_parallel(
    h: &PauliSum,
    layout: &QubitLayout,
    times: &[f64],
    config: &MethodConfig,
    policy: &MemoryPolicy,
    workers: usize,
) -> Result<PolarisationSeries> {
    if !config.angular_average {
        return sampled_series_parallel(h, layout, times, config, policy, workers);
    }
    let mut directional = Vec::with_capacity(3);
    for axis in Axis::ALL {
        let mut cfg = config.clone();
        cfg.axis = axis;
        cfg.angular_average = false;
        directional.push(sampled_series_parallel(
            h, layout, times, &cfg, policy, workers,
        )?);
    }
    angular_average(&directional[0], &directional[1], &directional[2])
}
