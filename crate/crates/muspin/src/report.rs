//! Result serialization: CSV series, bound tables, fit and resource
//! reports, and the run manifest.
//!
//! Numeric output uses 17 significant digits (`{:.16e}`), enough to
//! round-trip any f64 exactly, so golden files are stable across runs and
//! platforms: a rerun with the same configuration and seed is
//! byte-identical. The only deliberately non-reproducible output is the
//! manifest's timestamp line, which consumers comparing manifests must
//! ignore.

use crate::bounds::BoundReport;
use crate::error::{Error, Result};
use crate::fit::FitResult;
use crate::polarisation::PolarisationSeries;
use crate::resources::{CircuitSummary, ResourceReport, ScalingEstimate};
use std::fmt::Write as _;
use std::path::Path;

/// One f64 with 17 significant digits.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Render a polarisation series as CSV: header comments carrying the
/// method metadata, a column header, then one row per grid point.
pub fn render_series_csv(series: &PolarisationSeries) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# method = {}", series.method);
    if series.steps > 0 {
        let _ = writeln!(out, "# steps = {}", series.steps);
    }
    if series.samples > 0 {
        let _ = writeln!(out, "# samples = {}", series.samples);
    }
    if let Some(seed) = series.seed {
        let _ = writeln!(out, "# seed = {seed}");
    }
    out.push_str("time_us,polarisation,sigma\n");
    for i in 0..series.len() {
        let _ = writeln!(
            out,
            "{},{},{}",
            format_f64(series.times[i]),
            format_f64(series.values[i]),
            format_f64(series.sigmas[i])
        );
    }
    out
}

/// Render a product-formula bound table as CSV, one row per
/// (order, steps, time) combination.
pub fn render_bound_table_csv(rows: &[BoundReport]) -> String {
    let mut out = String::from(
        "order,steps,time_us,terms,lambda_max,lambda_total,loose,tight,tight_is_upper_bound_only\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.order,
            r.steps,
            format_f64(r.time),
            r.terms,
            format_f64(r.lambda_max),
            format_f64(r.lambda_total),
            format_f64(r.loose),
            format_f64(r.tight),
            r.tight_is_upper_bound_only
        );
    }
    out
}

/// Render a fit result as structured text.
pub fn render_fit_report(result: &FitResult, parameter_names: &[String]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "converged = {}", result.converged);
    let _ = writeln!(out, "iterations = {}", result.iterations);
    let _ = writeln!(out, "evaluations = {}", result.evaluations);
    let _ = writeln!(
        out,
        "reduced_chi_squared = {}",
        format_f64(result.reduced_chi_squared)
    );
    let _ = writeln!(out, "seed = {}", result.seed);
    for (i, value) in result.parameters.iter().enumerate() {
        let name = parameter_names
            .get(i)
            .map(String::as_str)
            .unwrap_or("parameter");
        let _ = writeln!(out, "{name} = {}", format_f64(*value));
    }
    out
}

/// Render a fault-tolerant resource report, with quoted reference figures
/// beside the solved ones where supplied.
pub fn render_resource_report(
    report: &ResourceReport,
    quoted_distance: Option<usize>,
    quoted_runtime_s: Option<f64>,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "logical_qubits = {}", report.logical_qubits);
    let _ = writeln!(out, "t_count = {}", report.t_count);
    let _ = writeln!(out, "code_distance = {}", report.distance);
    if let Some(d) = quoted_distance {
        if d != report.distance {
            let _ = writeln!(out, "code_distance_quoted = {d}  # differs from solved value");
        }
    }
    let _ = writeln!(out, "tiles = {}", report.tiles);
    let _ = writeln!(out, "physical_qubits = {}", report.physical_qubits);
    let _ = writeln!(out, "code_cycles = {}", report.code_cycles);
    let _ = writeln!(out, "runtime_s = {}", format_f64(report.runtime_s));
    if let Some(r) = quoted_runtime_s {
        if (r - report.runtime_s).abs() > 0.5 {
            let _ = writeln!(out, "runtime_s_quoted = {}  # differs from solved value", format_f64(r));
        }
    }
    let _ = writeln!(out, "error_bound = {}", format_f64(report.error_bound));
    out
}

/// Render a near-term circuit summary with its expected-error figure.
pub fn render_nisq_summary(
    summary: &CircuitSummary,
    expected_errors: Option<f64>,
    scaling: Option<&ScalingEstimate>,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "logical_qubits = {}", summary.logical_qubits);
    let _ = writeln!(out, "single_qubit_gates = {}", summary.single_qubit);
    let _ = writeln!(out, "two_qubit_gates = {}", summary.two_qubit);
    let _ = writeln!(out, "non_clifford_rotations = {}", summary.non_clifford);
    let _ = writeln!(
        out,
        "two_qubit_equivalent = {}",
        format_f64(summary.two_qubit_equivalent())
    );
    if let Some(e) = expected_errors {
        let _ = writeln!(out, "expected_errors = {}", format_f64(e));
    }
    if let Some(s) = scaling {
        let _ = writeln!(out, "scaling_steps_upper_bound = {}", format_f64(s.steps));
        let _ = writeln!(out, "scaling_gates_upper_bound = {}", format_f64(s.gates));
    }
    out
}

/// Render the run manifest: tool version, command, seed, worker count,
/// output files, a timestamp, and the full configuration echoed verbatim.
///
/// Everything except the `timestamp_unix_s` line is reproducible.
pub fn render_manifest(
    command: &str,
    config_text: &str,
    seed: Option<u64>,
    workers: usize,
    outputs: &[String],
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "tool = muspin {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "command = {command}");
    match seed {
        Some(s) => {
            let _ = writeln!(out, "seed = {s}");
        }
        None => {
            let _ = writeln!(out, "seed = none");
        }
    }
    let _ = writeln!(out, "workers = {workers}");
    for file in outputs {
        let _ = writeln!(out, "output = {file}");
    }
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let _ = writeln!(out, "timestamp_unix_s = {timestamp}");
    let _ = writeln!(out, "\n# --- configuration echo ---");
    for line in config_text.lines() {
        let _ = writeln!(out, "# {line}");
    }
    out
}

/// Write text to `path`, creating parent directories as needed.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let context = |what: &str, e: std::io::Error| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("cannot {what} {}: {e}", path.display()),
        ))
    };
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| context("create directory for", e))?;
        }
    }
    std::fs::write(path, text).map_err(|e| context("write", e))
}
