//! Probe polarisation functions P(t).
//!
//! The observable of the whole toolkit: the expectation value of the probe
//! spin's polarisation along a chosen axis as a function of time, starting
//! from a probe polarised along that axis and an unpolarised (infinite-
//! temperature) environment. Four routes compute it:
//!
//! * [`polarisation_exact_diag`] — dense eigendecomposition of the
//!   Hamiltonian; the exact reference, free of both product-formula and
//!   sampling error.
//! * [`polarisation_exact_mixed`] — evolves the exact mixed initial state
//!   through the *trotterized* step unitary, isolating product-formula
//!   error from sampling error.
//! * [`polarisation_sampled`] — Monte-Carlo estimate: stochastic initial
//!   states (random-phase, dephased-product or basis-sampled ensembles)
//!   evolved by circuits, averaged over samples.
//! * [`dynamic_polarisation_single_jump`] — a probe that hops once at a
//!   random time, switching the Hamiltonian from `H0` to `H1`; evaluated
//!   by quadrature over the jump time.
//!
//! Conventions shared by every route: the probe is particle 0 and occupies
//! qubit 0; times are in microseconds; a noiseless polarisation satisfies
//! P(0) = 1 and |P(t)| ≤ 1.

use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::evolve::{self, EvolutionPlan};
use crate::gates::Gate;
use crate::linalg::{dense_pauli_sum, CMatrix, DENSE_QUBIT_LIMIT};
use crate::noise::{self, NoiseModel};
use crate::pauli::{PauliString, PauliSum};
use crate::prep::{self, RandomPhaseOptions};
use crate::rng::{task_rng, StreamDomain, TaskId};
use crate::spin::{Axis, QubitLayout};
use crate::state::{MemoryPolicy, QuantumState, DENSITY_QUBIT_LIMIT};

/// Qubit index of the spin-1/2 probe, fixed by the layout convention.
pub const PROBE_QUBIT: usize = 0;

/// Ceiling on the imaginary residue of a polarisation value. The complex
/// sums below are real by construction (Hermitian weights); anything above
/// this signals a numerical problem and is reported as an error rather
/// than silently discarded.
pub const IMAG_RESIDUE_TOL: f64 = 1e-9;

/// Default evaluation grid: 191 points spanning [0, 9.5] µs (0.05 µs
/// spacing), matching the span of a typical positive-time asymmetry
/// histogram.
pub const DEFAULT_TIME_POINTS: usize = 191;
pub const DEFAULT_TIME_SPAN_US: f64 = 9.5;

/// The default time grid (see [`DEFAULT_TIME_POINTS`]).
pub fn default_time_grid() -> Vec<f64> {
    let n = DEFAULT_TIME_POINTS;
    (0..n)
        .map(|k| k as f64 * DEFAULT_TIME_SPAN_US / (n - 1) as f64)
        .collect()
}

/// Initial-state preparation strategy for the sampled estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatePrep {
    /// Random-phase ensemble: equal-weight superposition on every
    /// environment particle with independent random phases, plus optional
    /// entangling layers.
    Rpa,
    /// Dephased product ensemble: per-particle superpositions with one
    /// random phase each, no entanglement between particles.
    Dephasing,
    /// Uniform computational-basis sampling of the environment.
    BasisSample,
    /// No sampling: evolve the exact mixed state in density mode. Requires
    /// a register small enough for density storage.
    ExactMixed,
}

impl StatePrep {
    pub fn label(self) -> &'static str {
        match self {
            StatePrep::Rpa => "rpa",
            StatePrep::Dephasing => "dephasing",
            StatePrep::BasisSample => "basis-sample",
            StatePrep::ExactMixed => "exact-mixed",
        }
    }
}

/// Full description of one polarisation computation.
///
/// `plan.time` is a placeholder: each grid point re-instantiates the plan
/// with its own evolution time (and, when `adapt_steps` is on, its own
/// step count).
#[derive(Debug, Clone)]
pub struct MethodConfig {
    pub prep: StatePrep,
    /// Stochastic samples per grid point (ignored by `ExactMixed`).
    pub samples: usize,
    pub plan: EvolutionPlan,
    /// Probe polarisation / measurement axis.
    pub axis: Axis,
    /// Average the three directional runs instead of a single axis.
    pub angular_average: bool,
    /// Base seed; every (sample, time, axis) task derives its own stream.
    pub seed: u64,
    /// Extra randomization layers for the random-phase ensemble.
    pub extra_phase_layers: usize,
    /// Scale the step count as n(t) ∝ t^{3/2} (error-balancing choice for
    /// second-order formulas) instead of using a fixed count everywhere.
    /// `plan.steps` then applies at the last grid point.
    pub adapt_steps: bool,
}

impl MethodConfig {
    pub fn new(prep: StatePrep, samples: usize, plan: EvolutionPlan) -> MethodConfig {
        MethodConfig {
            prep,
            samples,
            plan,
            axis: Axis::Z,
            angular_average: false,
            seed: 0,
            extra_phase_layers: 0,
            adapt_steps: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.plan.validate()?;
        if self.prep != StatePrep::ExactMixed && self.samples == 0 {
            return Err(Error::InvalidArgument(
                "sampled polarisation needs at least one sample per point".into(),
            ));
        }
        Ok(())
    }
}

/// A polarisation function evaluated on a time grid, with per-point
/// uncertainty and enough metadata to reproduce it.
///
/// `sigmas` holds the sample standard error for sampled series; it is zero
/// for deterministic routes and NaN where a standard error cannot be
/// estimated (single-sample runs).
#[derive(Debug, Clone)]
pub struct PolarisationSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub sigmas: Vec<f64>,
    /// Which route produced the series (e.g. "exact-diag", "sampled-rpa").
    pub method: String,
    /// Product-formula steps at the reference (last) grid point; zero for
    /// routes without a step count.
    pub steps: usize,
    /// Samples per point; zero for deterministic routes.
    pub samples: usize,
    /// Base seed for stochastic routes.
    pub seed: Option<u64>,
}

impl PolarisationSeries {
    pub fn new(
        times: Vec<f64>,
        values: Vec<f64>,
        sigmas: Vec<f64>,
        method: impl Into<String>,
        steps: usize,
        samples: usize,
        seed: Option<u64>,
    ) -> Result<PolarisationSeries> {
        validate_times(&times)?;
        if values.len() != times.len() || sigmas.len() != times.len() {
            return Err(Error::InvalidArgument(format!(
                "series lengths disagree: {} times, {} values, {} sigmas",
                times.len(),
                values.len(),
                sigmas.len()
            )));
        }
        Ok(PolarisationSeries {
            times,
            values,
            sigmas,
            method: method.into(),
            steps,
            samples,
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Times must form a strictly increasing grid of finite, non-negative
/// instants.
pub(crate) fn validate_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidArgument(
            "at least one time point is required".into(),
        ));
    }
    for (i, &t) in times.iter().enumerate() {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "time point {i} must be finite and non-negative, got {t}"
            )));
        }
        if i > 0 && t <= times[i - 1] {
            return Err(Error::InvalidArgument(format!(
                "time points must be strictly increasing (point {i}: {t} after {})",
                times[i - 1]
            )));
        }
    }
    Ok(())
}

fn check_register(h: &PauliSum, n_qubits: usize) -> Result<()> {
    if n_qubits == 0 {
        return Err(Error::InvalidArgument(
            "polarisation needs at least the probe qubit".into(),
        ));
    }
    if h.min_qubits() > n_qubits {
        return Err(Error::InvalidArgument(format!(
            "hamiltonian touches qubit {} but the register has only {n_qubits} qubits",
            h.min_qubits() - 1
        )));
    }
    Ok(())
}

fn probe_string(axis: Axis) -> PauliString {
    PauliString::single(PROBE_QUBIT, axis.pauli()).expect("probe qubit is always addressable")
}

/// Column permutation and phase of a Pauli string, tabulated for all basis
/// states of a register: `P |c⟩ = w(c) |q(c)⟩`.
fn action_table(s: &PauliString, dim: usize) -> Vec<(usize, Complex64)> {
    (0..dim)
        .map(|c| {
            let (q, w) = s.column_action(c as u64);
            (q as usize, w)
        })
        .collect()
}

/// Left-multiply a dense matrix by a Pauli string: rows of `a` are
/// permuted and phased according to the string's action.
fn pauli_times_matrix(s: &PauliString, a: &CMatrix) -> CMatrix {
    let dim = a.n_rows();
    let tab = action_table(s, dim);
    let mut out = CMatrix::zeros(dim, a.n_cols());
    for c in 0..a.n_cols() {
        let src = a.column(c);
        let dst = out.column_mut(c);
        for (y, &(q, w)) in tab.iter().enumerate() {
            dst[q] = w * src[y];
        }
    }
    out
}

/// Polarisation of a propagated probe-polarised mixed state, from the full
/// propagator: P = Tr(U ρ₀ U† Σ) / 1 with ρ₀ = |+α⟩⟨+α| ⊗ I/Dₑ. Expanding
/// ρ₀ = (I + Σ)/dim and using Tr(UU†Σ) = 0 gives
/// P = (1/dim) Σ_{r,c} (UΣ)_{r,c} · conj((ΣU)_{r,c}).
fn probe_sandwich(u: &CMatrix, axis: Axis) -> Result<f64> {
    let dim = u.n_rows();
    let tab = action_table(&probe_string(axis), dim);
    let mut acc = Complex64::new(0.0, 0.0);
    for c in 0..dim {
        let (qc, wc) = tab[c];
        let left = u.column(qc); // (UΣ)_{·,c} = w(c) · U_{·,q(c)}
        let col = u.column(c);
        for r in 0..dim {
            let qr = tab[r].0; // (ΣU)_{r,c} = w(q(r)) · U_{q(r),c}
            let right = tab[qr].1 * col[qr];
            acc += wc * left[r] * right.conj();
        }
    }
    let p = acc / dim as f64;
    if p.im.abs() > IMAG_RESIDUE_TOL {
        return Err(Error::Numerical(format!(
            "polarisation has imaginary residue {:.3e}",
            p.im
        )));
    }
    Ok(p.re)
}

// ---------------------------------------------------------------------------
// Exact route: dense eigendecomposition
// ---------------------------------------------------------------------------

/// Exact polarisation along the z axis. See
/// [`polarisation_exact_diag_axis`].
pub fn polarisation_exact_diag(
    h: &PauliSum,
    n_qubits: usize,
    times: &[f64],
    policy: &MemoryPolicy,
) -> Result<PolarisationSeries> {
    polarisation_exact_diag_axis(h, n_qubits, times, Axis::Z, policy)
}

/// Exact polarisation along `axis` by dense eigendecomposition.
///
/// With H = V E V† and Σ the probe Pauli on qubit 0, the probe-polarised
/// mixed initial state gives
///
///   P(t) = (1/dim) Σ_{m,n} |(V† Σ V)_{m,n}|² · exp(i (E_m − E_n) t),
///
/// which is manifestly real (the weight matrix is symmetric). The
/// imaginary residue of the evaluated sum is checked against
/// [`IMAG_RESIDUE_TOL`]. Cost: one dense eigendecomposition plus one
/// matrix–vector product per time point; the register is capped at
/// [`DENSE_QUBIT_LIMIT`] qubits.
pub fn polarisation_exact_diag_axis(
    h: &PauliSum,
    n_qubits: usize,
    times: &[f64],
    axis: Axis,
    policy: &MemoryPolicy,
) -> Result<PolarisationSeries> {
    validate_times(times)?;
    check_register(h, n_qubits)?;
    if n_qubits > DENSE_QUBIT_LIMIT {
        return Err(Error::ResourceLimit(format!(
            "exact diagonalisation supports at most {DENSE_QUBIT_LIMIT} qubits, got {n_qubits}"
        )));
    }
    let dim = 1usize << n_qubits;
    // Hamiltonian/eigenvector matrix, probe-conjugated copy, weight matrix.
    policy.check_allocation(3 * (dim as u128) * (dim as u128) * 16, "dense polarisation eigendecomposition")?;

    let hd = dense_pauli_sum(n_qubits, h)?;
    let (evals, vecs) = hd.eigh()?;
    let m = vecs.dagger().matmul(&pauli_times_matrix(&probe_string(axis), &vecs))?;
    // Real non-negative weights |M_{mn}|², kept complex for the BLAS product.
    let weights = CMatrix::from_fn(dim, dim, |r, c| {
        Complex64::new(m.get(r, c).norm_sqr(), 0.0)
    });

    let mut values = Vec::with_capacity(times.len());
    for &t in times {
        let d: Vec<Complex64> = evals
            .iter()
            .map(|&e| Complex64::from_polar(1.0, -e * t))
            .collect();
        let y = weights.mul_vec(&d)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (dm, ym) in d.iter().zip(&y) {
            acc += dm.conj() * ym;
        }
        let p = acc / dim as f64;
        if p.im.abs() > IMAG_RESIDUE_TOL {
            return Err(Error::Numerical(format!(
                "polarisation at t = {t} has imaginary residue {:.3e}",
                p.im
            )));
        }
        values.push(p.re);
    }

    let n = times.len();
    PolarisationSeries::new(
        times.to_vec(),
        values,
        vec![0.0; n],
        "exact-diag",
        0,
        0,
        None,
    )
}

/// Angular average of the exact route: mean of the three directional runs.
pub fn exact_diag_angular_average(
    h: &PauliSum,
    n_qubits: usize,
    times: &[f64],
    policy: &MemoryPolicy,
) -> Result<PolarisationSeries> {
    let x = polarisation_exact_diag_axis(h, n_qubits, times, Axis::X, policy)?;
    let y = polarisation_exact_diag_axis(h, n_qubits, times, Axis::Y, policy)?;
    let z = polarisation_exact_diag_axis(h, n_qubits, times, Axis::Z, policy)?;
    angular_average(&x, &y, &z)
}

// ---------------------------------------------------------------------------
// Trotterized mixed-state reference
// ---------------------------------------------------------------------------

/// Z-axis variant of [`polarisation_exact_mixed_axis`].
pub fn polarisation_exact_mixed(
    h: &PauliSum,
    n_qubits: usize,
    times: &[f64],
    plan: &EvolutionPlan,
    policy: &MemoryPolicy,
) -> Result<PolarisationSeries> {
    polarisation_exact_mixed_axis(h, n_qubits, times, Axis::Z, plan, policy)
}

/// Polarisation of the exact mixed initial state propagated by the
/// *product-formula* step unitary rather than the exact one.
///
/// This is the sampling-free reference for the stochastic estimators: the
/// deviation from [`polarisation_exact_diag_axis`] is purely
/// product-formula error, and sampled estimates converge to this series as
/// the sample count grows. Each grid point builds the dense single-step
/// unitary for its own step size and raises it to `plan.steps`. Registers
/// are capped at [`DENSITY_QUBIT_LIMIT`] qubits, the same regime where a
/// density-matrix simulation would be feasible.
pub fn polarisation_exact_mixed_axis(
    h: &PauliSum,
    n_qubits: usize,
    times: &[f64],
    axis: Axis,
    plan: &EvolutionPlan,
    policy: &MemoryPolicy,
) -> Result<PolarisationSeries> {
    validate_times(times)?;
    check_register(h, n_qubits)?;
    plan.validate()?;
    if n_qubits > DENSITY_QUBIT_LIMIT {
        return Err(Error::ResourceLimit(format!(
            "the mixed-state reference supports at most {DENSITY_QUBIT_LIMIT} qubits, got {n_qubits}"
        )));
    }
    let dim = 1usize << n_qubits;
    // Step unitary plus powering workspace.
    policy.check_allocation(3 * (dim as u128) * (dim as u128) * 16, "trotterized reference propagator")?;

    let mut values = Vec::with_capacity(times.len());
    for &t in times {
        if t == 0.0 {
            values.push(1.0);
            continue;
        }
        let plan_t = EvolutionPlan::new(plan.method, plan.ordering, t, plan.steps)?;
        let u_step = evolve::dense_step_unitary(h, n_qubits, &plan_t, policy)?;
        let u = u_step.pow(plan.steps as u64)?;
        values.push(probe_sandwich(&u, axis)?);
    }

    let n = times.len();
    PolarisationSeries::new(
        times.to_vec(),
        values,
        vec![0.0; n],
        "exact-mixed",
        plan.steps,
        0,
        None,
    )
}

// ---------------------------------------------------------------------------
// Sampled Monte-Carlo estimator
// ---------------------------------------------------------------------------

/// Step count for one grid point: fixed, or scaled as n ∝ t^{3/2} relative
/// to the reference (last) grid point.
fn effective_steps(config: &MethodConfig, t: f64, reference_time: f64) -> usize {
    if !config.adapt_steps || reference_time <= 0.0 || t <= 0.0 {
        return if config.adapt_steps && t <= 0.0 {
            1
        } else {
            config.plan.steps
        };
    }
    let scaled = config.plan.steps as f64 * (t / reference_time).powf(1.5);
    (scaled.ceil() as usize).max(1)
}

/// Rotate the probe from |0⟩ to the +1 eigenstate of the chosen axis.
fn rotate_probe(state: &mut QuantumState, axis: Axis) -> Result<()> {
    match axis {
        Axis::Z => {}
        Axis::X => state.apply_gate(&Gate::H(PROBE_QUBIT))?,
        Axis::Y => {
            state.apply_gate(&Gate::H(PROBE_QUBIT))?;
            state.apply_gate(&Gate::Rz(PROBE_QUBIT, FRAC_PI_2))?;
        }
    }
    Ok(())
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// One grid point of the sampled estimator: `config.samples` independent
/// (preparation, evolution, measurement) runs, reduced to a mean and its
/// standard error.
///
/// Every sample derives its own random stream from
/// `(config.seed, sample, time_index, axis)`, so a parallel driver mapping
/// over grid points reproduces the sequential result bit for bit no matter
/// how the points are scheduled. `reference_time` is the last grid point,
/// used only by the adaptive step-count option.
pub fn sampled_point(
    h: &PauliSum,
    layout: &QubitLayout,
    time: f64,
    time_index: usize,
    reference_time: f64,
    config: &MethodConfig,
    policy: &MemoryPolicy,
) -> Result<(f64, f64)> {
    config.validate()?;
    check_register(h, layout.total_qubits())?;
    if config.prep == StatePrep::ExactMixed {
        return Err(Error::InvalidArgument(
            "exact-mixed preparation has no per-sample estimate; use the mixed-state reference".into(),
        ));
    }
    let steps = effective_steps(config, time, reference_time);
    let plan_t = EvolutionPlan::new(config.plan.method, config.plan.ordering, time, steps)?;
    let probe = probe_string(config.axis);

    let mut estimates = Vec::with_capacity(config.samples);
    for sample in 0..config.samples {
        let task = TaskId::new(sample as u64, time_index as u64, config.axis);
        let mut prep_rng = task_rng(config.seed, task, StreamDomain::Preparation);
        let mut state = match config.prep {
            StatePrep::Rpa => prep::prepare_rpa_state(
                layout,
                &RandomPhaseOptions {
                    extra_layers: config.extra_phase_layers,
                },
                policy,
                &mut prep_rng,
            )?,
            StatePrep::Dephasing => prep::prepare_dephasing_state(layout, policy, &mut prep_rng)?,
            StatePrep::BasisSample => {
                prep::prepare_basis_sample_state(layout, policy, &mut prep_rng)?
            }
            StatePrep::ExactMixed => unreachable!("rejected above"),
        };
        rotate_probe(&mut state, config.axis)?;
        let mut evo_rng = task_rng(config.seed, task, StreamDomain::Evolution);
        evolve::evolve(&mut state, h, &plan_t, &mut evo_rng)?;
        estimates.push(state.expectation_pauli(&probe)?);
    }
    Ok(mean_and_stderr(&estimates))
}

/// Monte-Carlo polarisation estimate over a time grid.
///
/// The estimator at each point is the sample mean of the *exact* probe
/// expectation value over `config.samples` stochastic preparations, each
/// evolved by the trotterized circuit for that point; the uncertainty is
/// the sample standard error (NaN for single-sample runs). An
/// `ExactMixed` preparation delegates to the sampling-free
/// [`polarisation_exact_mixed_axis`] reference.
pub fn polarisation_sampled(
    h: &PauliSum,
    layout: &QubitLayout,
    times: &[f64],
    config: &MethodConfig,
    policy: &MemoryPolicy,
) -> Result<PolarisationSeries> {
    validate_times(times)?;
    config.validate()?;
    if config.prep == StatePrep::ExactMixed {
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
    let mut values = Vec::with_capacity(times.len());
    let mut sigmas = Vec::with_capacity(times.len());
    for (i, &t) in times.iter().enumerate() {
        let (v, s) = sampled_point(h, layout, t, i, reference_time, config, policy)?;
        values.push(v);
        sigmas.push(s);
    }
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

/// Run one configuration, honouring its `angular_average` flag: either a
/// single directional series or the average of the three axis runs.
pub fn polarisation_series(
    h: &PauliSum,
    layout: &QubitLayout,
    times: &[f64],
    config: &MethodConfig,
    policy: &MemoryPolicy,
) -> Result<PolarisationSeries> {
    if !config.angular_average {
        return polarisation_sampled(h, layout, times, config, policy);
    }
    let mut directional = Vec::with_capacity(3);
    for axis in Axis::ALL {
        let mut cfg = config.clone();
        cfg.axis = axis;
        cfg.angular_average = false;
        directional.push(polarisation_sampled(h, layout, times, &cfg, policy)?);
    }
    angular_average(&directional[0], &directional[1], &directional[2])
}

/// Combine three directional series into their angular average.
///
/// All three must share the same grid and method; values are averaged and
/// independent uncertainties combined in quadrature (scaled by 1/3).
pub fn angular_average(
    x: &PolarisationSeries,
    y: &PolarisationSeries,
    z: &PolarisationSeries,
) -> Result<PolarisationSeries> {
    if x.times != y.times || x.times != z.times {
        return Err(Error::InvalidArgument(
            "directional series are on different time grids".into(),
        ));
    }
    if x.method != y.method || x.method != z.method {
        return Err(Error::InvalidArgument(format!(
            "directional series mix methods: {}, {}, {}",
            x.method, y.method, z.method
        )));
    }
    let n = x.len();
    let mut values = Vec::with_capacity(n);
    let mut sigmas = Vec::with_capacity(n);
    for i in 0..n {
        values.push((x.values[i] + y.values[i] + z.values[i]) / 3.0);
        sigmas.push(
            (x.sigmas[i].powi(2) + y.sigmas[i].powi(2) + z.sigmas[i].powi(2)).sqrt() / 3.0,
        );
    }
    PolarisationSeries::new(
        x.times.clone(),
        values,
        sigmas,
        format!("angular-average({})", x.method),
        x.steps,
        x.samples,
        x.seed,
    )
}

// ---------------------------------------------------------------------------
// Noisy circuit evaluation (density mode)
// ---------------------------------------------------------------------------

/// Polarisation of the exact mixed initial state evolved through the
/// gate-level circuit with a depolarizing channel after every gate.
///
/// Density mode applies the channels exactly, so the result is
/// deterministic; it is the input to exponential error extrapolation,
/// which combines two such series at different noise strengths. `seed`
/// feeds only stochastic evolution choices (randomized orderings, qDRIFT
/// draws) and is ignored by deterministic plans.
pub fn polarisation_noisy_density(
    h: &PauliSum,
    layout: &QubitLayout,
    times: &[f64],
    plan: &EvolutionPlan,
    noise: &NoiseModel,
    seed: u64,
    policy: &MemoryPolicy,
) -> Result<PolarisationSeries> {
    validate_times(times)?;
    plan.validate()?;
    noise.validate()?;
    let n_qubits = layout.total_qubits();
    check_register(h, n_qubits)?;
    if n_qubits > DENSITY_QUBIT_LIMIT {
        return Err(Error::ResourceLimit(format!(
            "noisy circuit evaluation runs in density mode, at most {DENSITY_QUBIT_LIMIT} qubits, got {n_qubits}"
        )));
    }
    let probe = probe_string(Axis::Z);

    let mut values = Vec::with_capacity(times.len());
    for (i, &t) in times.iter().enumerate() {
        let mut state = prep::prepare_exact_mixed_density(layout, policy)?;
        let plan_t = EvolutionPlan::new(plan.method, plan.ordering, t, plan.steps)?;
        let task = TaskId::new(0, i as u64, Axis::Z);
        let mut evo_rng = task_rng(seed, task, StreamDomain::Evolution);
        let gates = evolve::evolution_circuit(h, &plan_t, &mut evo_rng)?;
        let mut noise_rng = task_rng(seed, task, StreamDomain::Noise);
        noise::apply_noisy_gates(&mut state, &gates, noise, &mut noise_rng)?;
        values.push(state.expectation_pauli(&probe)?);
    }

    let n = times.len();
    PolarisationSeries::new(
        times.to_vec(),
        values,
        vec![0.0; n],
        "noisy-density",
        plan.steps,
        0,
        Some(seed),
    )
}

// ---------------------------------------------------------------------------
// Dynamic probe: single stochastic jump
// ---------------------------------------------------------------------------

/// Dense propagator factory from one eigendecomposition.
struct EigenPropagator {
    evals: Vec<f64>,
    vecs: CMatrix,
    vecs_dag: CMatrix,
}

impl EigenPropagator {
    fn new(h: &PauliSum, n_qubits: usize) -> Result<EigenPropagator> {
        let (evals, vecs) = dense_pauli_sum(n_qubits, h)?.eigh()?;
        let vecs_dag = vecs.dagger();
        Ok(EigenPropagator {
            evals,
            vecs,
            vecs_dag,
        })
    }

    /// U(t) = V · diag(e^{−i λ t}) · V†.
    fn at(&self, t: f64) -> Result<CMatrix> {
        let mut w = self.vecs.clone();
        for (k, &e) in self.evals.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, -e * t);
            for a in w.column_mut(k) {
                *a *= phase;
            }
        }
        w.matmul(&self.vecs_dag)
    }
}

/// Z polarisation of the probe-polarised mixed state propagated by an
/// arbitrary dense map M: (2/dim) Σ_{x: probe ↑} Σ_y z(y) |M_{y,x}|².
fn sandwich_z(m: &CMatrix) -> f64 {
    let dim = m.n_rows();
    let mut acc = 0.0;
    for x in (0..dim).step_by(2) {
        let col = m.column(x);
        for (y, a) in col.iter().enumerate() {
            let sign = 1.0 - 2.0 * (y & 1) as f64;
            acc += sign * a.norm_sqr();
        }
    }
    2.0 * acc / dim as f64
}

/// Default quadrature step for the jump integral: a tenth of the output
/// grid spacing.
fn default_quad_step(times: &[f64]) -> f64 {
    let mut spacing = f64::INFINITY;
    for w in times.windows(2) {
        spacing = spacing.min(w[1] - w[0]);
    }
    if spacing.is_finite() {
        spacing / 10.0
    } else if times[0] > 0.0 {
        times[0] / 100.0
    } else {
        1.0
    }
}

/// Polarisation of a probe that changes site once at a random time.
///
/// The probe starts under `h0`; at a jump time drawn from an exponential
/// distribution of rate `jump_rate` (µs⁻¹) the Hamiltonian switches to
/// `h1`. Averaging over the jump time gives
///
///   G(t) = G₀(t) e^{−νt} + ν ∫₀ᵗ dt′ e^{−νt′} F(t, t′),
///
/// where G₀ is the static polarisation under `h0` alone and F(t, t′)
/// propagates with `h0` until t′ and with `h1` afterwards. The integral is
/// evaluated by the trapezoid rule on a uniform t′ grid of step
/// `quad_step` (default: output grid spacing / 10); the t′-independent
/// integrand makes `h1 == h0` collapse to G ≡ G₀ exactly up to quadrature
/// error of the exponential weight, and `jump_rate == 0` skips the
/// integral entirely.
///
/// Both Hamiltonians are diagonalised densely, and every quadrature node
/// costs a few dense matrix products, so this route is intended for
/// few-spin systems.
pub fn dynamic_polarisation_single_jump(
    h0: &PauliSum,
    h1: &PauliSum,
    n_qubits: usize,
    jump_rate: f64,
    times: &[f64],
    quad_step: Option<f64>,
    policy: &MemoryPolicy,
) -> Result<PolarisationSeries> {
    validate_times(times)?;
    check_register(h0, n_qubits)?;
    check_register(h1, n_qubits)?;
    if n_qubits > DENSE_QUBIT_LIMIT {
        return Err(Error::ResourceLimit(format!(
            "the single-jump route supports at most {DENSE_QUBIT_LIMIT} qubits, got {n_qubits}"
        )));
    }
    if !jump_rate.is_finite() || jump_rate < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "jump rate must be finite and non-negative, got {jump_rate}"
        )));
    }
    let h_quad = match quad_step {
        Some(s) if s.is_finite() && s > 0.0 => s,
        Some(s) => {
            return Err(Error::InvalidArgument(format!(
                "quadrature step must be finite and positive, got {s}"
            )))
        }
        None => default_quad_step(times),
    };
    let dim = 1usize << n_qubits;
    // Two eigensystems, their adjoints and per-node products.
    policy.check_allocation(8 * (dim as u128) * (dim as u128) * 16, "single-jump propagators")?;

    let p0 = EigenPropagator::new(h0, n_qubits)?;
    let p1 = EigenPropagator::new(h1, n_qubits)?;

    let mut values = Vec::with_capacity(times.len());
    for &t in times {
        let g0 = sandwich_z(&p0.at(t)?);
        if jump_rate == 0.0 || t == 0.0 {
            values.push(g0);
            continue;
        }
        let n_seg = ((t / h_quad).ceil() as usize).max(1);
        let hh = t / n_seg as f64;
        let mut sum = 0.0;
        for k in 0..=n_seg {
            let tp = k as f64 * hh;
            let m = p1.at(t - tp)?.matmul(&p0.at(tp)?)?;
            let f = (-jump_rate * tp).exp() * sandwich_z(&m);
            sum += if k == 0 || k == n_seg { 0.5 * f } else { f };
        }
        values.push(g0 * (-jump_rate * t).exp() + jump_rate * hh * sum);
    }

    let n = times.len();
    PolarisationSeries::new(
        times.to_vec(),
        values,
        vec![0.0; n],
        "dynamic-single-jump",
        0,
        0,
        None,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::{Method, TermOrdering};
    use crate::geometry::{caf2_system, Displacements};
    use crate::hamiltonian::{dipolar_hamiltonian, zeeman_hamiltonian, PairSelection};
    use crate::linalg::expm_series;
    use crate::spin::{Particle, GAMMA_MU};

    fn policy() -> MemoryPolicy {
        MemoryPolicy::default()
    }

    fn plan(method: Method, steps: usize) -> EvolutionPlan {
        EvolutionPlan::new(method, TermOrdering::Magnitude, 0.0, steps).unwrap()
    }

    fn muon_only_layout() -> QubitLayout {
        QubitLayout::new(vec![Particle::muon([0.0, 0.0, 0.0])]).unwrap()
    }

    fn caf2_layout(shells: usize) -> QubitLayout {
        caf2_system(shells, &Displacements::default())
            .unwrap()
            .layout()
            .clone()
    }

    fn dipolar_caf2(shells: usize) -> (PauliSum, QubitLayout) {
        let layout = caf2_layout(shells);
        let h = dipolar_hamiltonian(&layout, PairSelection::All).unwrap();
        (h, layout)
    }

    /// Independent reference: full matrix exponential of the Hamiltonian,
    /// then the mixed-state sandwich, avoiding both the eigendecomposition
    /// and the spectral form.
    fn expm_reference(h: &PauliSum, n_qubits: usize, t: f64) -> f64 {
        let hd = dense_pauli_sum(n_qubits, h).unwrap();
        let u = expm_series(&hd.scale(Complex64::new(0.0, -t))).unwrap();
        sandwich_z(&u)
    }

    #[test]
    fn exact_polarisation_is_one_at_time_zero_and_bounded() {
        let (h, layout) = dipolar_caf2(1);
        let times = default_time_grid();
        let series =
            polarisation_exact_diag(&h, layout.total_qubits(), &times, &policy()).unwrap();
        assert_eq!(series.len(), DEFAULT_TIME_POINTS);
        assert!((series.values[0] - 1.0).abs() < 1e-10);
        for &v in &series.values {
            assert!(v.abs() <= 1.0 + 1e-6);
        }
        assert_eq!(series.method, "exact-diag");
        assert!(series.sigmas.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn lone_probe_in_transverse_field_precesses_at_larmor_frequency() {
        let layout = muon_only_layout();
        let b = 0.01; // Tesla, transverse
        let h = zeeman_hamiltonian(&layout, [b, 0.0, 0.0]).unwrap();
        let times: Vec<f64> = (0..60).map(|k| k as f64 * 0.05).collect();
        let series = polarisation_exact_diag(&h, 1, &times, &policy()).unwrap();
        for (&t, &v) in times.iter().zip(&series.values) {
            assert!(
                (v - (GAMMA_MU * b * t).cos()).abs() < 1e-10,
                "t = {t}: {v} vs {}",
                (GAMMA_MU * b * t).cos()
            );
        }
    }

    #[test]
    fn eigenbasis_route_matches_direct_matrix_exponential() {
        let (h, layout) = dipolar_caf2(1);
        let n = layout.total_qubits();
        let times = [0.0, 0.7, 1.9, 4.3, 8.9];
        let series = polarisation_exact_diag(&h, n, &times, &policy()).unwrap();
        for (&t, &v) in times.iter().zip(&series.values) {
            let reference = expm_reference(&h, n, t);
            assert!(
                (v - reference).abs() < 1e-9,
                "t = {t}: {v} vs {reference}"
            );
        }
    }

    #[test]
    fn directional_runs_in_longitudinal_field_reproduce_larmor_geometry() {
        let layout = muon_only_layout();
        let b = 0.02;
        let h = zeeman_hamiltonian(&layout, [0.0, 0.0, b]).unwrap();
        let times: Vec<f64> = (0..40).map(|k| k as f64 * 0.07).collect();
        let x = polarisation_exact_diag_axis(&h, 1, &times, Axis::X, &policy()).unwrap();
        let y = polarisation_exact_diag_axis(&h, 1, &times, Axis::Y, &policy()).unwrap();
        let z = polarisation_exact_diag_axis(&h, 1, &times, Axis::Z, &policy()).unwrap();
        let avg = exact_diag_angular_average(&h, 1, &times, &policy()).unwrap();
        for (i, &t) in times.iter().enumerate() {
            let c = (GAMMA_MU * b * t).cos();
            assert!((z.values[i] - 1.0).abs() < 1e-10);
            assert!((x.values[i] - c).abs() < 1e-10);
            assert!((y.values[i] - c).abs() < 1e-10);
            assert!((avg.values[i] - (1.0 + 2.0 * c) / 3.0).abs() < 1e-10);
        }
        assert_eq!(avg.method, "angular-average(exact-diag)");
    }

    #[test]
    fn free_probe_keeps_unit_polarisation_for_every_route() {
        let layout = caf2_layout(1);
        let n = layout.total_qubits();
        let h = PauliSum::zero();
        let times = [0.0, 1.0, 4.0];
        let exact = polarisation_exact_diag(&h, n, &times, &policy()).unwrap();
        let mixed =
            polarisation_exact_mixed(&h, n, &times, &plan(Method::Trotter2, 4), &policy())
                .unwrap();
        for i in 0..times.len() {
            assert!((exact.values[i] - 1.0).abs() < 1e-12);
            assert!((mixed.values[i] - 1.0).abs() < 1e-12);
        }
        for prep in [StatePrep::Rpa, StatePrep::Dephasing, StatePrep::BasisSample] {
            let config = MethodConfig::new(prep, 2, plan(Method::Trotter2, 4));
            let series = polarisation_sampled(&h, &layout, &times, &config, &policy()).unwrap();
            for &v in &series.values {
                assert!((v - 1.0).abs() < 1e-12, "{prep:?} gave {v}");
            }
        }
    }

    #[test]
    fn mixed_reference_is_exact_for_a_commuting_hamiltonian() {
        // Z Z + Z: every term commutes, so one second-order step is exact
        // and the reference must coincide with the eigenbasis route.
        let mut h = PauliSum::zero();
        h.add_term(PauliString::from_factors(&[(0, crate::pauli::Pauli::Z), (1, crate::pauli::Pauli::Z)]).unwrap(), 1.3);
        h.add_term(PauliString::single(0, crate::pauli::Pauli::Z).unwrap(), -0.4);
        let times = [0.0, 0.9, 2.7];
        let exact = polarisation_exact_diag(&h, 2, &times, &policy()).unwrap();
        let mixed =
            polarisation_exact_mixed(&h, 2, &times, &plan(Method::Trotter2, 1), &policy())
                .unwrap();
        for i in 0..times.len() {
            assert!((exact.values[i] - mixed.values[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn mixed_reference_error_shrinks_with_step_count() {
        let (h, layout) = dipolar_caf2(1);
        let n = layout.total_qubits();
        let times = [3.0];
        let exact = polarisation_exact_diag(&h, n, &times, &policy()).unwrap().values[0];
        let err = |steps: usize| {
            let mixed =
                polarisation_exact_mixed(&h, n, &times, &plan(Method::Trotter2, steps), &policy())
                    .unwrap();
            (mixed.values[0] - exact).abs()
        };
        let coarse = err(4);
        let fine = err(32);
        assert!(fine < coarse, "coarse {coarse}, fine {fine}");
        assert!(fine < 1e-3, "fine-step reference error {fine}");
    }

    #[test]
    fn sampled_estimates_converge_to_the_mixed_reference() {
        let (h, layout) = dipolar_caf2(1);
        let n = layout.total_qubits();
        let times = [2.0, 5.0];
        let evolution = plan(Method::Trotter2, 20);
        let reference = polarisation_exact_mixed(&h, n, &times, &evolution, &policy()).unwrap();
        for prep in [StatePrep::Rpa, StatePrep::BasisSample] {
            let mut config = MethodConfig::new(prep, 64, evolution.clone());
            config.seed = 11;
            let series = polarisation_sampled(&h, &layout, &times, &config, &policy()).unwrap();
            for i in 0..times.len() {
                let gap = (series.values[i] - reference.values[i]).abs();
                let allowed = 3.0 * series.sigmas[i] + 5e-4;
                assert!(
                    gap <= allowed,
                    "{prep:?} at t = {}: gap {gap}, allowed {allowed}",
                    times[i]
                );
            }
        }
    }

    #[test]
    fn every_preparation_starts_fully_polarised() {
        let (h, layout) = dipolar_caf2(1);
        let times = [0.0, 1.5];
        for prep in [StatePrep::Rpa, StatePrep::Dephasing, StatePrep::BasisSample] {
            let config = MethodConfig::new(prep, 3, plan(Method::Trotter2, 8));
            let series = polarisation_sampled(&h, &layout, &times, &config, &policy()).unwrap();
            assert!(
                (series.values[0] - 1.0).abs() < 1e-9,
                "{prep:?} starts at {}",
                series.values[0]
            );
            assert!(series.sigmas[0] < 1e-9); // all samples identical at t = 0
        }
    }

    #[test]
    fn reported_standard_error_scales_inversely_with_sqrt_samples() {
        let (h, layout) = dipolar_caf2(1);
        let times = [4.0];
        let mut small = MethodConfig::new(StatePrep::Rpa, 16, plan(Method::Trotter2, 10));
        small.seed = 5;
        let mut large = small.clone();
        large.samples = 64;
        let se_small = polarisation_sampled(&h, &layout, &times, &small, &policy())
            .unwrap()
            .sigmas[0];
        let se_large = polarisation_sampled(&h, &layout, &times, &large, &policy())
            .unwrap()
            .sigmas[0];
        let ratio = se_small / se_large;
        assert!(
            (1.2..=3.3).contains(&ratio),
            "quadrupling samples should roughly halve the standard error, ratio {ratio}"
        );
    }

    #[test]
    fn single_sample_runs_have_undefined_uncertainty() {
        let (h, layout) = dipolar_caf2(1);
        let mut config = MethodConfig::new(StatePrep::Rpa, 1, plan(Method::Trotter2, 6));
        config.seed = 3;
        let series = polarisation_sampled(&h, &layout, &[1.0], &config, &policy()).unwrap();
        assert!(series.values[0].is_finite());
        assert!(series.sigmas[0].is_nan());
    }

    #[test]
    fn sampled_runs_reproduce_bit_for_bit() {
        let (h, layout) = dipolar_caf2(1);
        let times = [0.5, 2.5];
        let mut config = MethodConfig::new(StatePrep::Rpa, 5, plan(Method::Trotter2, 8));
        config.seed = 77;
        let a = polarisation_sampled(&h, &layout, &times, &config, &policy()).unwrap();
        let b = polarisation_sampled(&h, &layout, &times, &config, &policy()).unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.sigmas, b.sigmas);
        // Point-level calls with matching coordinates agree with the series.
        let (v, _) = sampled_point(&h, &layout, times[1], 1, times[1], &config, &policy()).unwrap();
        assert_eq!(v, a.values[1]);
    }

    #[test]
    fn random_phase_ensemble_outperforms_dephasing_at_matched_samples() {
        // At eleven qubits and matched sample counts the random-phase
        // ensemble's mean absolute deviation from the exact curve must be
        // below half the dephased ensemble's.
        let (h, layout) = dipolar_caf2(2);
        let n = layout.total_qubits();
        assert_eq!(n, 11);
        let times = [3.0, 7.0];
        let exact = polarisation_exact_diag(&h, n, &times, &policy()).unwrap();
        let mean_abs_err = |prep: StatePrep| {
            let mut config = MethodConfig::new(prep, 32, plan(Method::Trotter2, 40));
            config.seed = 19;
            let series = polarisation_sampled(&h, &layout, &times, &config, &policy()).unwrap();
            series
                .values
                .iter()
                .zip(&exact.values)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>()
                / times.len() as f64
        };
        let rpa = mean_abs_err(StatePrep::Rpa);
        let dephasing = mean_abs_err(StatePrep::Dephasing);
        assert!(
            rpa < dephasing / 2.0,
            "rpa error {rpa}, dephasing error {dephasing}"
        );
    }

    #[test]
    fn angular_average_flag_orchestrates_three_directional_runs() {
        let layout = muon_only_layout();
        let b = 0.02;
        let h = zeeman_hamiltonian(&layout, [0.0, 0.0, b]).unwrap();
        let times: Vec<f64> = (0..12).map(|k| k as f64 * 0.2).collect();
        let mut config = MethodConfig::new(StatePrep::Rpa, 2, plan(Method::Trotter2, 30));
        config.angular_average = true;
        let avg = polarisation_series(&h, &layout, &times, &config, &policy()).unwrap();
        // A lone probe has no environment to sample, so the sampled runs
        // are deterministic and only product-formula error remains.
        for (&t, &v) in times.iter().zip(&avg.values) {
            let expected = (1.0 + 2.0 * (GAMMA_MU * b * t).cos()) / 3.0;
            assert!((v - expected).abs() < 1e-4, "t = {t}: {v} vs {expected}");
        }
        assert_eq!(avg.method, "angular-average(sampled-rpa)");
    }

    #[test]
    fn adaptive_step_counts_scale_as_t_to_the_three_halves() {
        let mut config = MethodConfig::new(StatePrep::Rpa, 1, plan(Method::Trotter2, 40));
        config.adapt_steps = true;
        assert_eq!(effective_steps(&config, 10.0, 10.0), 40);
        assert_eq!(effective_steps(&config, 2.5, 10.0), 5); // 40 · (1/4)^{3/2}
        assert_eq!(effective_steps(&config, 0.0, 10.0), 1);
        config.adapt_steps = false;
        assert_eq!(effective_steps(&config, 2.5, 10.0), 40);
    }

    #[test]
    fn noisy_route_with_zero_noise_matches_the_mixed_reference() {
        // Independent cross-check of two propagation paths: gate-level
        // circuit simulation against the dense step-unitary power.
        let (h, layout) = dipolar_caf2(1);
        let n = layout.total_qubits();
        let times = [0.0, 1.2, 3.1];
        let evolution = plan(Method::Trotter2, 6);
        let clean = polarisation_exact_mixed(&h, n, &times, &evolution, &policy()).unwrap();
        let noisy = polarisation_noisy_density(
            &h,
            &layout,
            &times,
            &evolution,
            &crate::noise::NoiseModel::none(),
            0,
            &policy(),
        )
        .unwrap();
        for i in 0..times.len() {
            assert!(
                (clean.values[i] - noisy.values[i]).abs() < 1e-10,
                "t = {}: {} vs {}",
                times[i],
                clean.values[i],
                noisy.values[i]
            );
        }
    }

    #[test]
    fn depolarizing_noise_damps_the_circuit_output() {
        let (h, layout) = dipolar_caf2(1);
        let n = layout.total_qubits();
        let times = [0.0, 1.2];
        let evolution = plan(Method::Trotter2, 6);
        let clean = polarisation_exact_mixed(&h, n, &times, &evolution, &policy()).unwrap();
        let noise = crate::noise::NoiseModel::from_two_qubit_rate(1e-3).unwrap();
        let noisy =
            polarisation_noisy_density(&h, &layout, &times, &evolution, &noise, 0, &policy())
                .unwrap();
        // Even the t = 0 circuit carries its full gate sequence, so noise
        // bites there too.
        assert!(noisy.values[0] < 1.0 - 1e-4);
        assert!(noisy.values[0] > 0.5);
        assert!(noisy.values[1].abs() < clean.values[1].abs());
    }

    #[test]
    fn zero_jump_rate_reduces_to_the_static_polarisation() {
        let (h, layout) = dipolar_caf2(1);
        let n = layout.total_qubits();
        let times = [0.0, 0.8, 2.4, 5.6];
        let static_series = polarisation_exact_diag(&h, n, &times, &policy()).unwrap();
        let dynamic =
            dynamic_polarisation_single_jump(&h, &h, n, 0.0, &times, None, &policy()).unwrap();
        for i in 0..times.len() {
            assert!((dynamic.values[i] - static_series.values[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn identical_hamiltonians_collapse_to_the_static_curve() {
        let (h, layout) = dipolar_caf2(1);
        let n = layout.total_qubits();
        let times = [0.5, 2.0, 5.0];
        let static_series = polarisation_exact_diag(&h, n, &times, &policy()).unwrap();
        for rate in [0.1, 1.0, 5.0] {
            let dynamic =
                dynamic_polarisation_single_jump(&h, &h, n, rate, &times, Some(2e-4), &policy())
                    .unwrap();
            for i in 0..times.len() {
                let gap = (dynamic.values[i] - static_series.values[i]).abs();
                assert!(gap < 1e-6, "rate {rate}, t = {}: gap {gap}", times[i]);
            }
        }
    }

    #[test]
    fn jump_quadrature_matches_an_independent_dense_oracle() {
        // Two-spin system switching to a field-shifted Hamiltonian. The
        // oracle rebuilds both propagators by series exponentials and uses
        // a five-fold finer trapezoid grid.
        let layout = caf2_layout(1);
        let mut h0 = dipolar_hamiltonian(&layout, PairSelection::All).unwrap();
        let h1_extra = zeeman_hamiltonian(&layout, [0.0, 0.0, 0.01]).unwrap();
        let mut h1 = h0.clone();
        for (s, c) in h1_extra.terms() {
            h1.add_term(s.clone(), *c);
        }
        h0.add_term(PauliString::single(0, crate::pauli::Pauli::X).unwrap(), 0.0);
        let n = layout.total_qubits();
        let nu = 0.7;
        let times = [1.0, 3.0];
        let step = 2e-3;
        let dynamic =
            dynamic_polarisation_single_jump(&h0, &h1, n, nu, &times, Some(step), &policy())
                .unwrap();

        let hd0 = dense_pauli_sum(n, &h0).unwrap();
        let hd1 = dense_pauli_sum(n, &h1).unwrap();
        let u_of = |hd: &CMatrix, t: f64| {
            expm_series(&hd.scale(Complex64::new(0.0, -t))).unwrap()
        };
        for (i, &t) in times.iter().enumerate() {
            let g0 = sandwich_z(&u_of(&hd0, t));
            let n_seg = ((t / (step / 5.0)).ceil() as usize).max(1);
            let hh = t / n_seg as f64;
            let mut sum = 0.0;
            for k in 0..=n_seg {
                let tp = k as f64 * hh;
                let m = u_of(&hd1, t - tp).matmul(&u_of(&hd0, tp)).unwrap();
                let f = (-nu * tp).exp() * sandwich_z(&m);
                sum += if k == 0 || k == n_seg { 0.5 * f } else { f };
            }
            let oracle = g0 * (-nu * t).exp() + nu * hh * sum;
            let gap = (dynamic.values[i] - oracle).abs();
            assert!(gap < 1e-4, "t = {t}: {} vs {oracle}", dynamic.values[i]);
        }
    }

    #[test]
    fn default_quadrature_step_is_a_tenth_of_the_grid_spacing() {
        let (h, layout) = dipolar_caf2(1);
        let n = layout.total_qubits();
        // Exactly representable spacing so the derived and literal steps
        // are the same floating-point number.
        let times = [0.0, 0.5, 1.0, 1.5];
        let defaulted =
            dynamic_polarisation_single_jump(&h, &h, n, 0.8, &times, None, &policy()).unwrap();
        let explicit =
            dynamic_polarisation_single_jump(&h, &h, n, 0.8, &times, Some(0.05), &policy())
                .unwrap();
        assert_eq!(defaulted.values, explicit.values);
    }

    #[test]
    fn malformed_requests_are_rejected() {
        let (h, layout) = dipolar_caf2(1);
        let n = layout.total_qubits();
        let p = policy();

        // Grids: empty, decreasing, negative, non-finite.
        assert!(polarisation_exact_diag(&h, n, &[], &p).is_err());
        assert!(polarisation_exact_diag(&h, n, &[1.0, 0.5], &p).is_err());
        assert!(polarisation_exact_diag(&h, n, &[-1.0], &p).is_err());
        assert!(polarisation_exact_diag(&h, n, &[f64::NAN], &p).is_err());

        // Register too narrow for the Hamiltonian.
        assert!(polarisation_exact_diag(&h, 1, &[0.0, 1.0], &p).is_err());

        // Width limits for each dense route.
        let mut wide = PauliSum::zero();
        wide.add_term(
            PauliString::single(DENSE_QUBIT_LIMIT, crate::pauli::Pauli::Z).unwrap(),
            1.0,
        );
        assert!(matches!(
            polarisation_exact_diag(&wide, DENSE_QUBIT_LIMIT + 1, &[0.0, 1.0], &p),
            Err(Error::ResourceLimit(_))
        ));
        let mut wide_mixed = PauliSum::zero();
        wide_mixed.add_term(
            PauliString::single(DENSITY_QUBIT_LIMIT, crate::pauli::Pauli::Z).unwrap(),
            1.0,
        );
        assert!(matches!(
            polarisation_exact_mixed(
                &wide_mixed,
                DENSITY_QUBIT_LIMIT + 1,
                &[0.0, 1.0],
                &plan(Method::Trotter2, 2),
                &p
            ),
            Err(Error::ResourceLimit(_))
        ));

        // Sampling without samples; negative jump rates; bad quadrature.
        let config = MethodConfig::new(StatePrep::Rpa, 0, plan(Method::Trotter2, 2));
        assert!(polarisation_sampled(&h, &layout, &[0.0, 1.0], &config, &p).is_err());
        assert!(
            dynamic_polarisation_single_jump(&h, &h, n, -0.1, &[0.0, 1.0], None, &p).is_err()
        );
        assert!(
            dynamic_polarisation_single_jump(&h, &h, n, 0.5, &[0.0, 1.0], Some(0.0), &p).is_err()
        );

        // Mismatched series lengths and grids in the combiner.
        let s1 = PolarisationSeries::new(
            vec![0.0, 1.0],
            vec![1.0, 0.5],
            vec![0.0, 0.0],
            "exact-diag",
            0,
            0,
            None,
        )
        .unwrap();
        let mut s2 = s1.clone();
        s2.times = vec![0.0, 2.0];
        assert!(angular_average(&s1, &s2, &s1).is_err());
        let mut s3 = s1.clone();
        s3.method = "exact-mixed".into();
        assert!(angular_average(&s1, &s1, &s3).is_err());
    }

    #[test]
    fn default_grid_has_documented_shape() {
        let grid = default_time_grid();
        assert_eq!(grid.len(), DEFAULT_TIME_POINTS);
        assert_eq!(grid[0], 0.0);
        assert_eq!(grid[grid.len() - 1], DEFAULT_TIME_SPAN_US);
        validate_times(&grid).unwrap();
    }
}
