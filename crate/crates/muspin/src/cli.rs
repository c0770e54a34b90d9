//! Command-line interface: argument parsing, command orchestration and
//! output-file layout.
//!
//! Each command loads a TOML configuration (see [`crate::config`]),
//! applies any command-line overrides, computes, and writes its results
//! plus a run manifest into the output directory. All numeric outputs are
//! reproducible byte for byte given the same configuration and seed: the
//! random streams are coordinate-derived (never shared), so the worker
//! count changes wall-clock time only.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error,
//! 4 resource-limit refusal, 1 anything else.

use crate::bounds::bound_report;
use crate::config::{AxisKind, MethodKind, RunConfig};
use crate::dataset::ingest_dataset;
use crate::error::{Error, Result};
use crate::evolve::{evolution_circuit, EvolutionPlan, TermOrdering};
use crate::fit::{fit_nelder_mead, extrapolate_series, AsymmetrySeries, FitProblem};
use crate::noise::NoiseModel;
use crate::polarisation::{
    self, exact_diag_angular_average, polarisation_exact_diag_axis, polarisation_noisy_density,
    dynamic_polarisation_single_jump, PolarisationSeries,
};
use crate::report::{
    render_bound_table_csv, render_fit_report, render_manifest, render_nisq_summary,
    render_resource_report, render_series_csv, write_text,
};
use crate::resources::{nisq_summary, solve_distance, trotter_count_scaling, CircuitSummary};
use crate::rng::{task_rng, StreamDomain, TaskId};
use crate::runner::{resolve_workers, series_parallel};
use crate::spin::{Axis, QubitLayout};
use crate::state::MemoryPolicy;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "muspin",
    version,
    about = "Spin-dynamics emulator and analysis toolkit for muon spin spectroscopy"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute polarisation series from a configuration.
    Simulate(CommonArgs),
    /// Fit shell displacements to an asymmetry dataset.
    Fit(FitArgs),
    /// Near-term and fault-tolerant resource estimates.
    Resources(CommonArgs),
    /// Product-formula error-bound tables.
    Bounds(CommonArgs),
    /// Parse and validate a configuration.
    ValidateConfig(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Configuration file (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (overrides run.out_dir; default '.').
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Base seed (overrides run.seed).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (overrides run.workers and the environment).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Lift the default memory ceiling (dimension caps still apply).
    #[arg(long)]
    pub allow_large_memory: bool,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Experimental dataset file.
    #[arg(long)]
    pub data: PathBuf,
}

/// Everything a command needs beyond its computation inputs.
struct Context {
    config: RunConfig,
    config_text: String,
    out_dir: PathBuf,
    workers: usize,
    policy: MemoryPolicy,
}

fn prepare(args: &CommonArgs) -> Result<Context> {
    let config_text = std::fs::read_to_string(&args.config).map_err(|e| {
        Error::Config(format!("cannot read config {}: {e}", args.config.display()))
    })?;
    let mut config: RunConfig = toml::from_str(&config_text)
        .map_err(|e| Error::Config(format!("configuration parse error: {e}")))?;
    if let Some(seed) = args.seed {
        config.run.seed = Some(seed);
    }
    if let Some(workers) = args.workers {
        config.run.workers = Some(workers);
    }
    if args.allow_large_memory {
        config.run.allow_large_memory = true;
    }
    config.validate()?;
    let out_dir = args
        .out
        .clone()
        .or_else(|| config.run.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let workers = resolve_workers(config.run.workers)?;
    let policy = config.memory_policy();
    Ok(Context {
        config,
        config_text,
        out_dir,
        workers,
        policy,
    })
}

/// Entry point for the binary. Returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Resources(args) => cmd_resources(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::ValidateConfig(args) => cmd_validate_config(args),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Compute the configured polarisation series on `times` for the geometry
/// in `layout`. `seed` replaces the configured seed (the fit loop feeds
/// per-evaluation seeds through here).
pub fn compute_series(
    config: &RunConfig,
    layout: &QubitLayout,
    times: &[f64],
    seed: u64,
    workers: usize,
    policy: &MemoryPolicy,
) -> Result<PolarisationSeries> {
    polarisation::validate_times(times)?;
    let h = config.hamiltonian_on(layout, None)?;
    let n = layout.total_qubits();
    let axis = config
        .method
        .axis
        .map(AxisKind::to_axis)
        .unwrap_or(Axis::Z);
    match config.method.kind {
        MethodKind::ExactDiag => {
            if config.method.angular_average {
                exact_diag_angular_average(&h, n, times, policy)
            } else {
                polarisation_exact_diag_axis(&h, n, times, axis, policy)
            }
        }
        MethodKind::ExactMixed | MethodKind::Sampled => {
            let mut mc = config.method_config()?;
            mc.seed = seed;
            mc.plan = EvolutionPlan::new(
                mc.plan.method,
                mc.plan.ordering,
                *times.last().expect("validated non-empty"),
                mc.plan.steps,
            )?;
            series_parallel(&h, layout, times, &mc, policy, workers)
        }
        MethodKind::NoisyDensity => {
            let plan = replan(config, times)?;
            let noise = config.noise_model()?;
            polarisation_noisy_density(&h, layout, times, &plan, &noise, seed, policy)
        }
        MethodKind::Dynamic => {
            let d = config.dynamic.as_ref().expect("validated: dynamic section");
            let h1 = match d.field_final {
                Some(b) => config.hamiltonian_on(layout, Some(b))?,
                None => h.clone(),
            };
            dynamic_polarisation_single_jump(&h, &h1, n, d.jump_rate, times, d.quad_step, policy)
        }
    }
}

/// The configured plan re-anchored to the last point of `times`.
fn replan(config: &RunConfig, times: &[f64]) -> Result<EvolutionPlan> {
    let plan = config.plan()?;
    EvolutionPlan::new(
        plan.method,
        plan.ordering,
        *times.last().expect("validated non-empty"),
        plan.steps,
    )
}

fn write_manifest(ctx: &Context, command: &str, outputs: &[String]) -> Result<()> {
    let manifest = render_manifest(
        command,
        &ctx.config_text,
        ctx.config.run.seed,
        ctx.workers,
        outputs,
    );
    let path = ctx.out_dir.join("manifest.txt");
    write_text(&path, &manifest)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn write_output(ctx: &Context, name: &str, text: &str, outputs: &mut Vec<String>) -> Result<()> {
    let path = ctx.out_dir.join(name);
    write_text(&path, text)?;
    println!("wrote {}", path.display());
    outputs.push(name.to_string());
    Ok(())
}

fn cmd_simulate(args: &CommonArgs) -> Result<()> {
    let ctx = prepare(args)?;
    let config = &ctx.config;
    let layout = config.layout()?;
    let times = config.times()?;
    let mut outputs = Vec::new();

    let series = compute_series(config, &layout, &times, config.seed(), ctx.workers, &ctx.policy)?;
    write_output(&ctx, "polarisation.csv", &render_series_csv(&series), &mut outputs)?;

    // Noise-boosted companion runs and the zero-noise extrapolation.
    if config.method.kind == MethodKind::NoisyDensity {
        if let Some(lambda) = config.noise.as_ref().and_then(|n| n.lambda) {
            let p = config.noise.as_ref().expect("validated: noise section").p;
            let boosted_noise = NoiseModel::from_two_qubit_rate(lambda * p)?;
            let h = config.hamiltonian_on(&layout, None)?;
            let plan = replan(config, &times)?;
            let boosted = polarisation_noisy_density(
                &h,
                &layout,
                &times,
                &plan,
                &boosted_noise,
                config.seed(),
                &ctx.policy,
            )?;
            write_output(
                &ctx,
                "polarisation-boosted.csv",
                &render_series_csv(&boosted),
                &mut outputs,
            )?;
            let extrapolated = extrapolate_series(&series, &boosted, lambda)?;
            if !extrapolated.dropped.is_empty() {
                eprintln!(
                    "warning: {} grid point(s) dropped from the extrapolation \
                     (sign change or vanishing value)",
                    extrapolated.dropped.len()
                );
            }
            write_output(
                &ctx,
                "polarisation-extrapolated.csv",
                &render_series_csv(&extrapolated.series),
                &mut outputs,
            )?;
        }
    }

    write_manifest(&ctx, "simulate", &outputs)
}

fn cmd_fit(args: &FitArgs) -> Result<()> {
    let ctx = prepare(&args.common)?;
    let config = &ctx.config;
    let fit_section = config.fit.as_ref().ok_or_else(|| {
        Error::Config("the fit command needs a [fit] section".into())
    })?;
    let groups = config.fit_groups()?;
    let options = config.fit_options()?;

    let dataset = ingest_dataset(&args.data)?;
    let (data_series, sigma_defaulted) = dataset.to_series()?;
    if sigma_defaulted {
        eprintln!(
            "warning: dataset has no uncertainty column; using sigma = 1 \
             (unweighted least squares)"
        );
    }

    let base_disp = config.displacements();
    let (a0, a_bg) = (fit_section.a0, fit_section.a_bg);
    let data_times = data_series.times.clone();
    let model = |params: &[f64], seed: u64| -> Result<AsymmetrySeries> {
        let mut disp = base_disp;
        for (group, value) in groups.iter().zip(params) {
            disp.set(*group, *value);
        }
        let system = config.system_with(&disp)?;
        let series = compute_series(
            config,
            system.layout(),
            &data_times,
            seed,
            ctx.workers,
            &ctx.policy,
        )?;
        AsymmetrySeries::from_polarisation(&series, a0, a_bg)
    };
    let problem = FitProblem {
        data: &data_series,
        model: &model,
        seed: config.seed(),
    };
    let result = fit_nelder_mead(&problem, &fit_section.simplex, &options)?;

    let report = render_fit_report(&result, &fit_section.parameters);
    print!("{report}");
    let mut outputs = Vec::new();
    write_output(&ctx, "fit.txt", &report, &mut outputs)?;
    write_manifest(&ctx, "fit", &outputs)
}

fn cmd_resources(args: &CommonArgs) -> Result<()> {
    let ctx = prepare(args)?;
    let config = &ctx.config;
    let resources = config.resources.as_ref().ok_or_else(|| {
        Error::Config("the resources command needs a [resources] section".into())
    })?;
    let params = config.surface_code_params()?;

    let (summary, scaling) = match resources.counts {
        Some(c) => (
            CircuitSummary {
                logical_qubits: c.logical_qubits,
                single_qubit: c.single_qubit,
                two_qubit: c.two_qubit,
                non_clifford: c.non_clifford,
            },
            None,
        ),
        None => {
            // Build, merge and count the configured evolution circuit.
            let layout = config.layout()?;
            let h = config.hamiltonian_on(&layout, None)?;
            let plan = config.plan().map_err(|_| {
                Error::Config(
                    "resource estimation needs either [resources].counts or a [plan] \
                     section to build the circuit from"
                        .into(),
                )
            })?;
            let mut rng = task_rng(config.seed(), TaskId::default(), StreamDomain::Evolution);
            let gates = evolution_circuit(&h, &plan, &mut rng)?;
            let summary = nisq_summary(&gates, layout.total_qubits());
            let s_max = layout
                .particles()
                .iter()
                .map(|p| p.spin.value())
                .fold(0.0, f64::max);
            let scaling = trotter_count_scaling(
                layout.n_particles(),
                s_max,
                h.max_abs_coefficient(),
                plan.time,
                resources.epsilon,
            )?;
            (summary, Some(scaling))
        }
    };

    let noise = NoiseModel::from_two_qubit_rate(resources.p)?;
    let expected_errors = summary.expected_errors(&noise);
    let t_count = summary.t_count(params.t_gates_per_rotation);
    let report = solve_distance(t_count, summary.logical_qubits, &params)?;

    let mut text = render_nisq_summary(&summary, Some(expected_errors), scaling.as_ref());
    text.push('\n');
    text.push_str(&render_resource_report(&report, None, None));
    print!("{text}");

    let csv = format!(
        "logical_qubits,t_count,distance,tiles,physical_qubits,code_cycles,runtime_s,error_bound\n\
         {},{},{},{},{},{},{},{}\n",
        report.logical_qubits,
        report.t_count,
        report.distance,
        report.tiles,
        report.physical_qubits,
        report.code_cycles,
        crate::report::format_f64(report.runtime_s),
        crate::report::format_f64(report.error_bound),
    );
    let mut outputs = Vec::new();
    write_output(&ctx, "resources.txt", &text, &mut outputs)?;
    write_output(&ctx, "resources.csv", &csv, &mut outputs)?;
    write_manifest(&ctx, "resources", &outputs)
}

fn cmd_bounds(args: &CommonArgs) -> Result<()> {
    let ctx = prepare(args)?;
    let config = &ctx.config;
    let bounds = config.bounds.as_ref().ok_or_else(|| {
        Error::Config("the bounds command needs a [bounds] section".into())
    })?;
    let layout = config.layout()?;
    let h = config.hamiltonian_on(&layout, None)?;
    let ordering = config
        .plan
        .as_ref()
        .map(|p| p.ordering.to_ordering())
        .unwrap_or(TermOrdering::Magnitude);

    let mut rows = Vec::new();
    for &order in &bounds.orders {
        for &steps in &bounds.steps {
            for &t in &bounds.times {
                rows.push(bound_report(order, &h, ordering, t, steps)?);
            }
        }
    }
    let mut outputs = Vec::new();
    write_output(&ctx, "bounds.csv", &render_bound_table_csv(&rows), &mut outputs)?;
    write_manifest(&ctx, "bounds", &outputs)
}

fn cmd_validate_config(args: &CommonArgs) -> Result<()> {
    let ctx = prepare(args)?;
    let config = &ctx.config;
    let layout = config.layout()?;
    let times = config.times()?;
    println!("configuration ok");
    println!("method = {:?}", config.method.kind);
    println!(
        "qubits = {} ({} particles)",
        layout.total_qubits(),
        layout.n_particles()
    );
    println!("grid_points = {}", times.len());
    match config.run.seed {
        Some(seed) => println!("seed = {seed}"),
        None => println!("seed = none (deterministic run)"),
    }
    Ok(())
}
