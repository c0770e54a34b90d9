//! Hardware cost models: near-term gate counts and surface-code estimates.
//!
//! Two regimes are covered. For near-term (noisy) hardware the relevant
//! figure is the expected number of errors per circuit — gate counts after
//! peephole merging, weighted by per-gate error rates. For fault-tolerant
//! hardware the model is a surface code with lattice surgery fed by a
//! single magic-state distillation unit: given a physical error rate and a
//! target circuit error, the minimal code distance follows from requiring
//!
//!   B · T · 0.1·(100p)^{(d+1)/2} < ε,
//!
//! where B is the tile count, T the total number of code cycles and the
//! last factor the per-tile logical error rate per cycle. Distillation
//! throughput (one magic state per 11·d cycles) sets the runtime.

use crate::circuit::{compress, count_compiled, GateCounts};
use crate::error::{Error, Result};
use crate::gates::Gate;
use crate::noise::NoiseModel;

/// Tiles a single distillation unit occupies alongside the data tiles.
pub const DISTILLATION_TILES: usize = 11;

/// Largest code distance the solver will consider before declaring the
/// target unattainable.
pub const MAX_CODE_DISTANCE: usize = 1000;

/// Gate-count summary of one compiled circuit.
///
/// Counts are taken after adjacent single-qubit gates have been merged
/// (see [`crate::circuit::compress`]); the non-Clifford count is what
/// magic-state distillation must supply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CircuitSummary {
    /// Logical qubits the circuit acts on.
    pub logical_qubits: usize,
    pub single_qubit: usize,
    pub two_qubit: usize,
    pub non_clifford: usize,
}

impl CircuitSummary {
    pub fn from_counts(logical_qubits: usize, counts: &GateCounts) -> CircuitSummary {
        CircuitSummary {
            logical_qubits,
            single_qubit: counts.single_qubit,
            two_qubit: counts.two_qubit + counts.three_qubit,
            non_clifford: counts.non_clifford,
        }
    }

    /// Expected errors per shot under a depolarizing model:
    /// p₂·(two-qubit count) + p₁·(single-qubit count).
    pub fn expected_errors(&self, noise: &NoiseModel) -> f64 {
        noise.p2 * self.two_qubit as f64 + noise.p1 * self.single_qubit as f64
    }

    /// Gate count expressed in two-qubit-gate equivalents, using the
    /// standard ratio p₁ = p₂/10.
    pub fn two_qubit_equivalent(&self) -> f64 {
        self.two_qubit as f64 + self.single_qubit as f64 / 10.0
    }

    /// T gates consumed once every non-Clifford rotation is synthesized.
    pub fn t_count(&self, t_gates_per_rotation: usize) -> u64 {
        self.non_clifford as u64 * t_gates_per_rotation as u64
    }
}

/// Merge-then-count summary of a raw gate sequence.
///
/// The circuit is first compressed (adjacent single-qubit gates fused,
/// inverse pairs cancelled), then classified by arity and Cliffordness.
pub fn nisq_summary(gates: &[Gate], logical_qubits: usize) -> CircuitSummary {
    let counts = count_compiled(&compress(gates));
    CircuitSummary::from_counts(logical_qubits, &counts)
}

/// Surface-code model parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceCodeParams {
    /// Physical error rate per operation.
    pub p: f64,
    /// Target total circuit error ε.
    pub epsilon: f64,
    /// T gates synthesized per non-Clifford rotation.
    pub t_gates_per_rotation: usize,
    /// Surface-code cycle time, µs.
    pub cycle_time_us: f64,
    /// Extra tiles reserved for distillation.
    pub distillation_tiles: usize,
    /// A magic state is consumed every `magic_state_cycle_factor · d`
    /// cycles.
    pub magic_state_cycle_factor: usize,
}

impl SurfaceCodeParams {
    pub fn new(p: f64, epsilon: f64) -> Result<SurfaceCodeParams> {
        let params = SurfaceCodeParams {
            p,
            epsilon,
            t_gates_per_rotation: 100,
            cycle_time_us: 1.0,
            distillation_tiles: DISTILLATION_TILES,
            magic_state_cycle_factor: 11,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "physical error rate must lie in (0, 1), got {}",
                self.p
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "target error must be positive and finite, got {}",
                self.epsilon
            )));
        }
        if self.t_gates_per_rotation == 0 || self.magic_state_cycle_factor == 0 {
            return Err(Error::InvalidArgument(
                "T-per-rotation and magic-state cycle factors must be nonzero".into(),
            ));
        }
        if !(self.cycle_time_us > 0.0 && self.cycle_time_us.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "cycle time must be positive and finite, got {}",
                self.cycle_time_us
            )));
        }
        Ok(())
    }
}

/// Surface-code tiles for Q logical qubits with the default distillation
/// overhead: ⌈1.5·Q + 3⌉ data/routing tiles plus [`DISTILLATION_TILES`].
pub fn tile_count(logical_qubits: usize) -> usize {
    data_tiles(logical_qubits) + DISTILLATION_TILES
}

fn data_tiles(logical_qubits: usize) -> usize {
    (3 * logical_qubits).div_ceil(2) + 3
}

/// One fault-tolerant execution estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResourceReport {
    pub distance: usize,
    pub tiles: usize,
    /// 2d² physical qubits per tile.
    pub physical_qubits: u64,
    /// Total surface-code cycles: magic_state_cycle_factor · d · T_count.
    pub code_cycles: u64,
    /// Wall-clock runtime in seconds at the configured cycle time.
    pub runtime_s: f64,
    /// Left-hand side of the distance inequality at the chosen d.
    pub error_bound: f64,
    /// Echo of the inputs.
    pub t_count: u64,
    pub logical_qubits: usize,
}

/// Error bound B·T·0.1·(100p)^{(d+1)/2} at distance `d`.
fn bound_at(d: usize, tiles: usize, t_count: u64, params: &SurfaceCodeParams) -> f64 {
    let cycles = (params.magic_state_cycle_factor * d) as f64 * t_count as f64;
    tiles as f64 * cycles * 0.1 * (100.0 * params.p).powf((d as f64 + 1.0) / 2.0)
}

/// Minimal code distance d ≥ 3 meeting the target error, with the derived
/// qubit and runtime figures.
///
/// Runtime is magic-state limited: one T gate per
/// `magic_state_cycle_factor · d` cycles, so the total cycle count is that
/// factor times `t_count`. Fails if no d ≤ [`MAX_CODE_DISTANCE`]
/// satisfies the bound (e.g. physical error rate at or above the 1%
/// threshold).
pub fn solve_distance(
    t_count: u64,
    logical_qubits: usize,
    params: &SurfaceCodeParams,
) -> Result<ResourceReport> {
    params.validate()?;
    if t_count == 0 {
        return Err(Error::InvalidArgument(
            "T count must be at least one".into(),
        ));
    }
    let tiles = data_tiles(logical_qubits) + params.distillation_tiles;
    for d in 3..=MAX_CODE_DISTANCE {
        let bound = bound_at(d, tiles, t_count, params);
        if bound < params.epsilon {
            let code_cycles = (params.magic_state_cycle_factor * d) as u64 * t_count;
            return Ok(ResourceReport {
                distance: d,
                tiles,
                physical_qubits: tiles as u64 * 2 * (d as u64) * (d as u64),
                code_cycles,
                runtime_s: code_cycles as f64 * params.cycle_time_us * 1e-6,
                error_bound: bound,
                t_count,
                logical_qubits,
            });
        }
    }
    Err(Error::Numerical(format!(
        "no code distance up to {MAX_CODE_DISTANCE} meets target error {} at p = {}",
        params.epsilon, params.p
    )))
}

/// Asymptotic step- and gate-count scaling for a second-order product
/// formula on N spins of maximal spin s, coupling scale Λ, time t and
/// error budget ε:
///
///   steps ∼ N³ s³ Λ^{3/2} t^{3/2} / ε^{1/2},
///   gates ∼ N⁵ s⁵ Λ^{3/2} t^{3/2} / ε^{1/2}.
///
/// Evaluated with unit constants: these are worst-case scaling laws for
/// comparing scenarios, not gate-count predictions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingEstimate {
    pub steps: f64,
    pub gates: f64,
}

pub fn trotter_count_scaling(
    n_spins: usize,
    s_max: f64,
    coupling_scale: f64,
    time: f64,
    epsilon: f64,
) -> Result<ScalingEstimate> {
    if n_spins == 0 {
        return Err(Error::InvalidArgument("need at least one spin".into()));
    }
    for (name, v) in [
        ("maximal spin", s_max),
        ("coupling scale", coupling_scale),
        ("time", time),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "{name} must be positive and finite, got {v}"
            )));
        }
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "error budget must be positive and finite, got {epsilon}"
        )));
    }
    let shared = coupling_scale.powf(1.5) * time.powf(1.5) / epsilon.sqrt();
    let n = n_spins as f64;
    Ok(ScalingEstimate {
        steps: n.powi(3) * s_max.powi(3) * shared,
        gates: n.powi(5) * s_max.powi(5) * shared,
    })
}

/// A named fault-tolerant workload: inputs for [`solve_distance`] plus any
/// externally specified reference figures to report beside the solver's
/// result when they differ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioPreset {
    pub label: &'static str,
    pub t_count: u64,
    pub logical_qubits: usize,
    pub params: SurfaceCodeParams,
    /// Distance this scenario was originally specified with, if it
    /// differs from (or should be checked against) the solved minimum.
    pub quoted_distance: Option<usize>,
    /// Runtime originally quoted for the scenario, seconds.
    pub quoted_runtime_s: Option<f64>,
}

/// The standard workload presets: the four 11-qubit single-shot rows
/// (both error rates × both targets) and the two 29-qubit scenarios
/// (single shot, and amplitude-estimation with ~2.3×10⁹ T gates).
pub fn standard_presets() -> Vec<ScenarioPreset> {
    let mk = |p: f64, eps: f64| SurfaceCodeParams::new(p, eps).expect("valid preset parameters");
    vec![
        ScenarioPreset {
            label: "11q-single-shot-p1e-3-eps0.01",
            t_count: 1_960_000,
            logical_qubits: 11,
            params: mk(1e-3, 0.01),
            quoted_distance: Some(22),
            quoted_runtime_s: Some(474.0),
        },
        ScenarioPreset {
            label: "11q-single-shot-p1e-4-eps0.01",
            t_count: 1_960_000,
            logical_qubits: 11,
            params: mk(1e-4, 0.01),
            quoted_distance: Some(10),
            quoted_runtime_s: Some(216.0),
        },
        ScenarioPreset {
            label: "11q-single-shot-p1e-3-eps0.8",
            t_count: 1_960_000,
            logical_qubits: 11,
            params: mk(1e-3, 0.8),
            quoted_distance: Some(18),
            quoted_runtime_s: Some(388.0),
        },
        ScenarioPreset {
            label: "11q-single-shot-p1e-4-eps0.8",
            t_count: 1_960_000,
            logical_qubits: 11,
            params: mk(1e-4, 0.8),
            quoted_distance: Some(8),
            quoted_runtime_s: Some(172.0),
        },
        // 29-qubit single shot: the solver gives 5313 s (11·21·2.3e7 µs);
        // the quoted figure of 5234 s does not match that arithmetic and
        // is kept for side-by-side reporting.
        ScenarioPreset {
            label: "29q-single-shot-p1e-3-eps0.8",
            t_count: 23_000_000,
            logical_qubits: 29,
            params: mk(1e-3, 0.8),
            quoted_distance: Some(21),
            quoted_runtime_s: Some(5234.0),
        },
        ScenarioPreset {
            label: "29q-amplitude-estimation-p1e-3-eps0.01",
            t_count: 2_300_000_000,
            logical_qubits: 29,
            params: mk(1e-3, 0.01),
            quoted_distance: Some(29),
            quoted_runtime_s: None,
        },
    ]
}
