//! Run configuration: the structured text file behind the command-line
//! tools.
//!
//! Configurations are TOML with nested sections. Unknown keys are hard
//! errors everywhere — a typo in a physics parameter must fail loudly, not
//! silently fall back to a default. Beyond per-field checks, validation
//! enforces cross-field consistency: each simulation method requires
//! exactly the sections it consumes (a `[noise]` section with an
//! exact-diagonalisation method is as much an error as a missing one with
//! the noisy method), stochastic runs must pin a seed, and the geometry is
//! given either as fluorite shells or as an explicit particle list, never
//! both.

use crate::error::{Error, Result};
use crate::evolve::{EvolutionPlan, Method, TermOrdering};
use crate::fit::FitOptions;
use crate::geometry::{caf2_system, Caf2System, Displacements, FluorineGroup};
use crate::hamiltonian::{dipolar_hamiltonian, zeeman_hamiltonian, PairSelection};
use crate::noise::NoiseModel;
use crate::polarisation::{self, MethodConfig, StatePrep};
use crate::resources::SurfaceCodeParams;
use crate::spin::{Axis, Particle, QubitLayout, Spin};
use crate::state::MemoryPolicy;
use serde::Deserialize;
use std::path::Path;

/// A parsed, not-yet-validated run configuration. Call
/// [`RunConfig::validate`] (the loaders do) before building anything from
/// it.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub run: RunSection,
    pub geometry: GeometrySection,
    #[serde(default)]
    pub hamiltonian: HamiltonianSection,
    pub method: MethodSection,
    pub plan: Option<PlanSection>,
    pub grid: Option<GridSection>,
    pub noise: Option<NoiseSection>,
    pub dynamic: Option<DynamicSection>,
    pub fit: Option<FitSection>,
    pub resources: Option<ResourcesSection>,
    pub bounds: Option<BoundsSection>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// Base seed for every random stream. Mandatory whenever any part of
    /// the run is stochastic.
    pub seed: Option<u64>,
    /// Worker threads; falls back to the environment, then the machine.
    pub workers: Option<usize>,
    /// Output directory for result files.
    pub out_dir: Option<String>,
    /// Lift the default memory ceiling (the qubit caps still apply).
    #[serde(default)]
    pub allow_large_memory: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    /// Fluorine shells around the muon (1 → F–µ–F, 2 → 11 spins, …).
    pub shells: Option<usize>,
    /// Radial shell displacements, Å; only with `shells`.
    pub displacements: Option<DisplacementsSection>,
    /// Explicit particle list; mutually exclusive with `shells`.
    pub particles: Option<Vec<ParticleSection>>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisplacementsSection {
    #[serde(default)]
    pub nn: f64,
    #[serde(default)]
    pub n_nn: f64,
    #[serde(default)]
    pub nn_nn_diag_lower: f64,
    #[serde(default)]
    pub nn_nn_diag_upper: f64,
    #[serde(default)]
    pub nn_nn_axial: f64,
    #[serde(default)]
    pub nnn_nn: f64,
}

impl DisplacementsSection {
    pub fn to_displacements(self) -> Displacements {
        Displacements {
            nn: self.nn,
            n_nn: self.n_nn,
            nn_nn_diag_lower: self.nn_nn_diag_lower,
            nn_nn_diag_upper: self.nn_nn_diag_upper,
            nn_nn_axial: self.nn_nn_axial,
            nnn_nn: self.nnn_nn,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpeciesKind {
    Muon,
    Fluorine,
    Custom,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleSection {
    pub species: SpeciesKind,
    /// Site position, Å.
    pub position: [f64; 3],
    /// Custom species only.
    pub label: Option<String>,
    /// Gyromagnetic ratio, rad·µs⁻¹·T⁻¹; custom species only.
    pub gamma: Option<f64>,
    /// 2s; custom species only.
    pub two_spin: Option<u32>,
}

impl ParticleSection {
    fn build(&self, index: usize) -> Result<Particle> {
        let custom_fields =
            self.label.is_some() || self.gamma.is_some() || self.two_spin.is_some();
        match self.species {
            SpeciesKind::Muon | SpeciesKind::Fluorine if custom_fields => {
                Err(Error::Config(format!(
                    "particle {index}: label/gamma/two_spin apply only to custom species"
                )))
            }
            SpeciesKind::Muon => Ok(Particle::muon(self.position)),
            SpeciesKind::Fluorine => Ok(Particle::fluorine19(self.position)),
            SpeciesKind::Custom => {
                let (Some(label), Some(gamma), Some(two_spin)) =
                    (&self.label, self.gamma, self.two_spin)
                else {
                    return Err(Error::Config(format!(
                        "particle {index}: custom species needs label, gamma and two_spin"
                    )));
                };
                Ok(Particle::new(
                    label.clone(),
                    Spin::from_twice(two_spin)?,
                    gamma,
                    self.position,
                ))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairsKind {
    #[default]
    All,
    /// Keep only pairs involving the probe (particle 0).
    MuonOnly,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSection {
    #[serde(default)]
    pub pairs: PairsKind,
    /// Static field, Tesla; adds a Zeeman term when nonzero.
    pub field: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodKind {
    /// Dense eigendecomposition (sampling-free oracle).
    ExactDiag,
    /// Product-formula propagation of the exact mixed state.
    ExactMixed,
    /// Stochastic state-preparation estimators on statevectors.
    Sampled,
    /// Density-matrix circuit evaluation with depolarizing noise.
    NoisyDensity,
    /// Single-jump dynamic average over a fluctuating Hamiltonian.
    Dynamic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrepKind {
    Rpa,
    Dephasing,
    BasisSample,
}

impl PrepKind {
    pub fn to_prep(self) -> StatePrep {
        match self {
            PrepKind::Rpa => StatePrep::Rpa,
            PrepKind::Dephasing => StatePrep::Dephasing,
            PrepKind::BasisSample => StatePrep::BasisSample,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxisKind {
    X,
    Y,
    Z,
}

impl AxisKind {
    pub fn to_axis(self) -> Axis {
        match self {
            AxisKind::X => Axis::X,
            AxisKind::Y => Axis::Y,
            AxisKind::Z => Axis::Z,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSection {
    pub kind: MethodKind,
    /// State preparation; `sampled` only.
    pub prep: Option<PrepKind>,
    /// Samples per grid point; `sampled` only.
    pub samples: Option<usize>,
    /// Probe/measurement axis (default z).
    pub axis: Option<AxisKind>,
    #[serde(default)]
    pub angular_average: bool,
    #[serde(default)]
    pub extra_phase_layers: usize,
    #[serde(default)]
    pub adapt_steps: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    Trotter1,
    Trotter2,
    Qdrift,
}

impl SchemeKind {
    pub fn to_method(self) -> Method {
        match self {
            SchemeKind::Trotter1 => Method::Trotter1,
            SchemeKind::Trotter2 => Method::Trotter2,
            SchemeKind::Qdrift => Method::QDrift,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderingKind {
    #[default]
    Magnitude,
    Input,
    RandomPerStep,
}

impl OrderingKind {
    pub fn to_ordering(self) -> TermOrdering {
        match self {
            OrderingKind::Magnitude => TermOrdering::Magnitude,
            OrderingKind::Input => TermOrdering::Input,
            OrderingKind::RandomPerStep => TermOrdering::RandomPerStep,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSection {
    pub scheme: SchemeKind,
    #[serde(default)]
    pub ordering: OrderingKind,
    /// Steps (splitting schemes) or samples (randomized scheme) at the
    /// last grid point.
    pub steps: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// First grid time, µs (default 0).
    pub start: Option<f64>,
    /// Last grid time, µs.
    pub stop: Option<f64>,
    /// Number of grid points.
    pub points: Option<usize>,
    /// Explicit time list, µs; mutually exclusive with start/stop/points.
    pub times: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    /// Two-qubit depolarizing rate; single-qubit gates get p/10.
    pub p: f64,
    /// Noise-boost factor for zero-noise extrapolation (λ > 1). When set,
    /// the noisy run is repeated at λ·p and the extrapolated series is
    /// emitted alongside the direct ones.
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicSection {
    /// Jump rate ν, µs⁻¹.
    pub jump_rate: f64,
    /// Field after the jump, Tesla. The pre-jump Hamiltonian comes from
    /// the `[hamiltonian]` section; omitting this makes both equal.
    pub field_final: Option<[f64; 3]>,
    /// Quadrature step for the jump-time integral, µs (default: a tenth
    /// of the grid spacing).
    pub quad_step: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    /// Instrumental asymmetry scale.
    pub a0: f64,
    /// Constant background.
    pub a_bg: f64,
    /// Shell-displacement parameters to vary, by name (`nn`, `n_nn`,
    /// `nn_nn_diag_lower`, `nn_nn_diag_upper`, `nn_nn_axial`, `nnn_nn`).
    pub parameters: Vec<String>,
    /// Initial simplex: `parameters.len() + 1` vertices.
    pub simplex: Vec<Vec<f64>>,
    pub tolerance: Option<f64>,
    pub max_iterations: Option<usize>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourcesSection {
    /// Physical error rate.
    pub p: f64,
    /// Target total circuit error.
    pub epsilon: f64,
    pub t_gates_per_rotation: Option<usize>,
    pub cycle_time_us: Option<f64>,
    /// Explicit gate counts; when absent the circuit is built and merged
    /// from the geometry and plan sections.
    pub counts: Option<CountsSection>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountsSection {
    pub logical_qubits: usize,
    pub single_qubit: usize,
    pub two_qubit: usize,
    pub non_clifford: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSection {
    /// Product-formula orders to tabulate (1 and/or 2).
    pub orders: Vec<u8>,
    /// Step counts to tabulate.
    pub steps: Vec<usize>,
    /// Evolution times to tabulate, µs.
    pub times: Vec<f64>,
}

/// Parse a configuration from TOML text. Unknown keys anywhere are
/// errors; the message carries the parser's line/column context.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let config: RunConfig = toml::from_str(text)
        .map_err(|e| Error::Config(format!("configuration parse error: {e}")))?;
    config.validate()?;
    Ok(config)
}

/// Read and parse a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::Config(format!("cannot read config {}: {e}", path.display()))
    })?;
    parse_config(&text)
}

impl RunConfig {
    /// Cross-field validation; every loader calls this.
    pub fn validate(&self) -> Result<()> {
        self.validate_geometry()?;
        self.validate_method_sections()?;
        if let Some(grid) = &self.grid {
            grid.validate()?;
        }
        if let Some(noise) = &self.noise {
            noise.validate()?;
        }
        if let Some(dynamic) = &self.dynamic {
            dynamic.validate()?;
        }
        if let Some(fit) = &self.fit {
            fit.validate()?;
        }
        if let Some(resources) = &self.resources {
            resources.validate()?;
        }
        if let Some(bounds) = &self.bounds {
            bounds.validate()?;
        }
        if let Some(workers) = self.run.workers {
            if workers == 0 {
                return Err(Error::Config("workers must be at least one".into()));
            }
        }
        if self.requires_seed() && self.run.seed.is_none() {
            return Err(Error::Config(
                "this run is stochastic (sampled preparations, randomized orderings \
                 or randomized compilation); set run.seed"
                    .into(),
            ));
        }
        Ok(())
    }

    fn validate_geometry(&self) -> Result<()> {
        let g = &self.geometry;
        match (g.shells, &g.particles) {
            (Some(_), Some(_)) => Err(Error::Config(
                "geometry gives both shells and an explicit particle list; pick one".into(),
            )),
            (None, None) => Err(Error::Config(
                "geometry needs either shells or a particle list".into(),
            )),
            (None, Some(_)) if g.displacements.is_some() => Err(Error::Config(
                "displacements apply to the shell geometry, not an explicit particle list"
                    .into(),
            )),
            (Some(0), _) => Err(Error::Config("shells must be at least one".into())),
            (None, Some(particles)) => {
                // Surface bad particle entries at validation time.
                for (i, p) in particles.iter().enumerate() {
                    p.build(i)?;
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn validate_method_sections(&self) -> Result<()> {
        let m = &self.method;
        let requires = |present: bool, section: &str, reason: &str| {
            if present {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "method '{:?}' needs a [{section}] section ({reason})",
                    m.kind
                )))
            }
        };
        let forbids = |absent: bool, section: &str| {
            if absent {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "[{section}] is not used by method '{:?}'; remove it",
                    m.kind
                )))
            }
        };
        match m.kind {
            MethodKind::ExactDiag => {
                forbids(self.plan.is_none(), "plan")?;
                forbids(self.noise.is_none(), "noise")?;
                forbids(self.dynamic.is_none(), "dynamic")?;
            }
            MethodKind::ExactMixed => {
                requires(self.plan.is_some(), "plan", "step count and scheme")?;
                forbids(self.noise.is_none(), "noise")?;
                forbids(self.dynamic.is_none(), "dynamic")?;
            }
            MethodKind::Sampled => {
                requires(self.plan.is_some(), "plan", "step count and scheme")?;
                forbids(self.noise.is_none(), "noise")?;
                forbids(self.dynamic.is_none(), "dynamic")?;
                if m.prep.is_none() {
                    return Err(Error::Config(
                        "sampled method needs method.prep (rpa, dephasing or basis-sample)"
                            .into(),
                    ));
                }
                match m.samples {
                    None => {
                        return Err(Error::Config(
                            "sampled method needs method.samples".into(),
                        ))
                    }
                    Some(0) => {
                        return Err(Error::Config(
                            "method.samples must be at least one".into(),
                        ))
                    }
                    Some(_) => {}
                }
            }
            MethodKind::NoisyDensity => {
                requires(self.plan.is_some(), "plan", "the circuit to evaluate")?;
                requires(self.noise.is_some(), "noise", "the depolarizing rate")?;
                forbids(self.dynamic.is_none(), "dynamic")?;
            }
            MethodKind::Dynamic => {
                requires(self.dynamic.is_some(), "dynamic", "the jump rate")?;
                forbids(self.plan.is_none(), "plan")?;
                forbids(self.noise.is_none(), "noise")?;
            }
        }
        if m.kind != MethodKind::Sampled {
            if m.prep.is_some() {
                return Err(Error::Config(
                    "method.prep applies only to the sampled method".into(),
                ));
            }
            if m.samples.is_some() {
                return Err(Error::Config(
                    "method.samples applies only to the sampled method".into(),
                ));
            }
        }
        Ok(())
    }

    /// True when any random stream is consumed, making `run.seed`
    /// mandatory.
    pub fn requires_seed(&self) -> bool {
        if self.method.kind == MethodKind::Sampled {
            return true;
        }
        if let Some(plan) = &self.plan {
            if plan.scheme == SchemeKind::Qdrift
                || plan.ordering == OrderingKind::RandomPerStep
            {
                return true;
            }
        }
        false
    }

    pub fn seed(&self) -> u64 {
        self.run.seed.unwrap_or(0)
    }

    pub fn memory_policy(&self) -> MemoryPolicy {
        if self.run.allow_large_memory {
            MemoryPolicy::unrestricted()
        } else {
            MemoryPolicy::default()
        }
    }

    pub fn displacements(&self) -> Displacements {
        self.geometry
            .displacements
            .map(DisplacementsSection::to_displacements)
            .unwrap_or_default()
    }

    /// Shell geometry with the given displacements. Errors when the
    /// configuration uses an explicit particle list (no shell structure to
    /// re-parameterize).
    pub fn system_with(&self, disp: &Displacements) -> Result<Caf2System> {
        let Some(shells) = self.geometry.shells else {
            return Err(Error::Config(
                "this operation needs the shell geometry, not an explicit particle list"
                    .into(),
            ));
        };
        caf2_system(shells, disp)
    }

    pub fn layout(&self) -> Result<QubitLayout> {
        if let Some(particles) = &self.geometry.particles {
            let built: Result<Vec<Particle>> = particles
                .iter()
                .enumerate()
                .map(|(i, p)| p.build(i))
                .collect();
            return QubitLayout::new(built?);
        }
        Ok(self.system_with(&self.displacements())?.layout().clone())
    }

    pub fn pair_selection(&self) -> PairSelection {
        match self.hamiltonian.pairs {
            PairsKind::All => PairSelection::All,
            PairsKind::MuonOnly => PairSelection::InvolvingParticle(0),
        }
    }

    /// Dipolar Hamiltonian plus the configured Zeeman term (if any) on
    /// `layout`, with `field_override` replacing the configured field.
    pub fn hamiltonian_on(
        &self,
        layout: &QubitLayout,
        field_override: Option<[f64; 3]>,
    ) -> Result<crate::pauli::PauliSum> {
        let mut h = dipolar_hamiltonian(layout, self.pair_selection())?;
        let field = field_override.or(self.hamiltonian.field);
        if let Some(b) = field {
            if b != [0.0; 3] {
                h = h.add(&zeeman_hamiltonian(layout, b)?);
            }
        }
        Ok(h)
    }

    /// The time grid: explicit list, linspace, or the default grid when
    /// the section is absent.
    pub fn times(&self) -> Result<Vec<f64>> {
        let Some(grid) = &self.grid else {
            return Ok(polarisation::default_time_grid());
        };
        grid.build()
    }

    /// The evolution plan, with total time anchored to the last grid
    /// point.
    pub fn plan(&self) -> Result<EvolutionPlan> {
        let Some(plan) = &self.plan else {
            return Err(Error::Config("this run needs a [plan] section".into()));
        };
        let times = self.times()?;
        let time = *times.last().expect("validated grid is non-empty");
        EvolutionPlan::new(plan.scheme.to_method(), plan.ordering.to_ordering(), time, plan.steps)
    }

    /// Method configuration for the sampled and mixed-reference routes.
    pub fn method_config(&self) -> Result<MethodConfig> {
        let prep = match self.method.kind {
            MethodKind::Sampled => self
                .method
                .prep
                .expect("validated: sampled has prep")
                .to_prep(),
            MethodKind::ExactMixed => StatePrep::ExactMixed,
            other => {
                return Err(Error::Config(format!(
                    "method '{other:?}' does not use a sampling configuration"
                )))
            }
        };
        let mut config = MethodConfig::new(prep, self.method.samples.unwrap_or(0), self.plan()?);
        config.axis = self.method.axis.map(AxisKind::to_axis).unwrap_or(Axis::Z);
        config.angular_average = self.method.angular_average;
        config.seed = self.seed();
        config.extra_phase_layers = self.method.extra_phase_layers;
        config.adapt_steps = self.method.adapt_steps;
        Ok(config)
    }

    pub fn noise_model(&self) -> Result<NoiseModel> {
        let Some(noise) = &self.noise else {
            return Err(Error::Config("this run needs a [noise] section".into()));
        };
        NoiseModel::from_two_qubit_rate(noise.p)
    }

    /// Surface-code parameters from the `[resources]` section.
    pub fn surface_code_params(&self) -> Result<SurfaceCodeParams> {
        let Some(r) = &self.resources else {
            return Err(Error::Config("this run needs a [resources] section".into()));
        };
        let mut params = SurfaceCodeParams::new(r.p, r.epsilon)?;
        if let Some(t) = r.t_gates_per_rotation {
            params.t_gates_per_rotation = t;
        }
        if let Some(c) = r.cycle_time_us {
            params.cycle_time_us = c;
        }
        params.validate()?;
        Ok(params)
    }

    pub fn fit_options(&self) -> Result<FitOptions> {
        let Some(f) = &self.fit else {
            return Err(Error::Config("this run needs a [fit] section".into()));
        };
        let defaults = FitOptions::default();
        Ok(FitOptions {
            tolerance: f.tolerance.unwrap_or(defaults.tolerance),
            max_iterations: f.max_iterations.unwrap_or(defaults.max_iterations),
        })
    }

    /// The displacement groups being fitted, in parameter order.
    pub fn fit_groups(&self) -> Result<Vec<FluorineGroup>> {
        let Some(f) = &self.fit else {
            return Err(Error::Config("this run needs a [fit] section".into()));
        };
        f.parameters.iter().map(|name| parse_group(name)).collect()
    }
}

impl GridSection {
    fn validate(&self) -> Result<()> {
        self.build().map(|_| ())
    }

    fn build(&self) -> Result<Vec<f64>> {
        match (&self.times, self.start, self.stop, self.points) {
            (Some(times), None, None, None) => {
                crate::polarisation::validate_times(times)?;
                Ok(times.clone())
            }
            (Some(_), _, _, _) => Err(Error::Config(
                "grid.times is mutually exclusive with start/stop/points".into(),
            )),
            (None, start, Some(stop), Some(points)) => {
                let start = start.unwrap_or(0.0);
                if !(start.is_finite() && stop.is_finite()) || start < 0.0 || stop <= start {
                    return Err(Error::Config(format!(
                        "grid needs 0 <= start < stop, got start = {start}, stop = {stop}"
                    )));
                }
                if points < 2 {
                    return Err(Error::Config("grid.points must be at least 2".into()));
                }
                let n = points - 1;
                Ok((0..points)
                    .map(|k| start + (stop - start) * k as f64 / n as f64)
                    .collect())
            }
            _ => Err(Error::Config(
                "grid needs either times or stop and points (start optional)".into(),
            )),
        }
    }
}

impl NoiseSection {
    fn validate(&self) -> Result<()> {
        NoiseModel::from_two_qubit_rate(self.p).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(lambda) = self.lambda {
            if !(lambda > 1.0 && lambda.is_finite()) {
                return Err(Error::Config(format!(
                    "noise.lambda must be a finite boost factor > 1, got {lambda}"
                )));
            }
            if !(self.p * lambda < 1.0) {
                return Err(Error::Config(format!(
                    "boosted rate lambda*p = {} is not a probability",
                    self.p * lambda
                )));
            }
        }
        Ok(())
    }
}

impl DynamicSection {
    fn validate(&self) -> Result<()> {
        if !self.jump_rate.is_finite() || self.jump_rate < 0.0 {
            return Err(Error::Config(format!(
                "dynamic.jump_rate must be finite and non-negative, got {}",
                self.jump_rate
            )));
        }
        if let Some(h) = self.quad_step {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::Config(format!(
                    "dynamic.quad_step must be positive and finite, got {h}"
                )));
            }
        }
        Ok(())
    }
}

impl FitSection {
    fn validate(&self) -> Result<()> {
        if !self.a0.is_finite() || self.a0 == 0.0 {
            return Err(Error::Config(format!(
                "fit.a0 must be finite and nonzero, got {}",
                self.a0
            )));
        }
        if !self.a_bg.is_finite() {
            return Err(Error::Config(format!(
                "fit.a_bg must be finite, got {}",
                self.a_bg
            )));
        }
        if self.parameters.is_empty() {
            return Err(Error::Config("fit.parameters is empty".into()));
        }
        for name in &self.parameters {
            parse_group(name)?;
        }
        let n = self.parameters.len();
        if self.simplex.len() != n + 1 {
            return Err(Error::Config(format!(
                "fit.simplex needs {} vertices for {} parameter(s), got {}",
                n + 1,
                n,
                self.simplex.len()
            )));
        }
        for (i, vertex) in self.simplex.iter().enumerate() {
            if vertex.len() != n {
                return Err(Error::Config(format!(
                    "fit.simplex vertex {i} has {} coordinates, expected {n}",
                    vertex.len()
                )));
            }
            if vertex.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config(format!(
                    "fit.simplex vertex {i} has non-finite coordinates"
                )));
            }
        }
        if let Some(tol) = self.tolerance {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(Error::Config(format!(
                    "fit.tolerance must be positive and finite, got {tol}"
                )));
            }
        }
        if self.max_iterations == Some(0) {
            return Err(Error::Config(
                "fit.max_iterations must be at least one".into(),
            ));
        }
        Ok(())
    }
}

impl ResourcesSection {
    fn validate(&self) -> Result<()> {
        SurfaceCodeParams::new(self.p, self.epsilon)
            .map_err(|e| Error::Config(e.to_string()))?;
        if self.t_gates_per_rotation == Some(0) {
            return Err(Error::Config(
                "resources.t_gates_per_rotation must be at least one".into(),
            ));
        }
        if let Some(c) = self.cycle_time_us {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::Config(format!(
                    "resources.cycle_time_us must be positive and finite, got {c}"
                )));
            }
        }
        Ok(())
    }
}

impl BoundsSection {
    fn validate(&self) -> Result<()> {
        if self.orders.is_empty() || self.steps.is_empty() || self.times.is_empty() {
            return Err(Error::Config(
                "bounds needs non-empty orders, steps and times".into(),
            ));
        }
        for &order in &self.orders {
            if order != 1 && order != 2 {
                return Err(Error::Config(format!(
                    "bounds.orders entries must be 1 or 2, got {order}"
                )));
            }
        }
        if self.steps.contains(&0) {
            return Err(Error::Config("bounds.steps entries must be positive".into()));
        }
        if self.times.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::Config(
                "bounds.times entries must be positive and finite".into(),
            ));
        }
        Ok(())
    }
}

/// Map a displacement-parameter name to its shell group.
pub fn parse_group(name: &str) -> Result<FluorineGroup> {
    match name {
        "nn" => Ok(FluorineGroup::Nn),
        "n_nn" => Ok(FluorineGroup::NNn),
        "nn_nn_diag_lower" => Ok(FluorineGroup::NnNnDiagLower),
        "nn_nn_diag_upper" => Ok(FluorineGroup::NnNnDiagUpper),
        "nn_nn_axial" => Ok(FluorineGroup::NnNnAxial),
        "nnn_nn" => Ok(FluorineGroup::NnnNn),
        other => Err(Error::Config(format!(
            "unknown displacement parameter '{other}' (expected nn, n_nn, \
             nn_nn_diag_lower, nn_nn_diag_upper, nn_nn_axial or nnn_nn)"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [geometry]
        shells = 1

        [method]
        kind = "exact-diag"
    "#;

    #[test]
    fn minimal_exact_diag_config_parses() {
        let config = parse_config(MINIMAL).unwrap();
        assert_eq!(config.method.kind, MethodKind::ExactDiag);
        assert_eq!(config.layout().unwrap().total_qubits(), 3);
        // Default grid when the section is absent.
        let times = config.times().unwrap();
        assert_eq!(times.len(), 191);
        assert_eq!(*times.last().unwrap(), 9.5);
        assert_eq!(config.seed(), 0);
    }

    #[test]
    fn unknown_keys_are_hard_errors_at_any_depth() {
        let top = MINIMAL.to_string() + "\n[typo_section]\nx = 1\n";
        assert!(matches!(parse_config(&top), Err(Error::Config(_))));
        let nested = r#"
            [geometry]
            shells = 1
            shelves = 2

            [method]
            kind = "exact-diag"
        "#;
        let err = parse_config(nested).unwrap_err();
        assert!(err.to_string().contains("shelves"), "{err}");
        let field = r#"
            [geometry]
            shells = 1

            [method]
            kind = "exact-diag"
            samplez = 3
        "#;
        assert!(parse_config(field).is_err());
    }

    #[test]
    fn stochastic_runs_demand_a_seed() {
        let sampled = r#"
            [geometry]
            shells = 1

            [method]
            kind = "sampled"
            prep = "rpa"
            samples = 8

            [plan]
            scheme = "trotter2"
            steps = 20
        "#;
        let err = parse_config(sampled).unwrap_err();
        assert!(err.to_string().contains("seed"), "{err}");
        let seeded = format!("[run]\nseed = 7\n{sampled}");
        let config = parse_config(&seeded).unwrap();
        assert_eq!(config.seed(), 7);
        let mc = config.method_config().unwrap();
        assert_eq!(mc.samples, 8);
        assert_eq!(mc.seed, 7);
        assert_eq!(mc.plan.steps, 20);
        // The plan's reference time is the default grid's endpoint.
        assert!((mc.plan.time - 9.5).abs() < 1e-15);

        // Randomized orderings are stochastic even without sampling.
        let random_ordering = r#"
            [geometry]
            shells = 1

            [method]
            kind = "exact-mixed"

            [plan]
            scheme = "trotter2"
            ordering = "random-per-step"
            steps = 20
        "#;
        assert!(parse_config(random_ordering).is_err());
    }

    #[test]
    fn sections_must_match_the_method() {
        let noise_with_exact = r#"
            [geometry]
            shells = 1

            [method]
            kind = "exact-diag"

            [noise]
            p = 1e-3
        "#;
        let err = parse_config(noise_with_exact).unwrap_err();
        assert!(err.to_string().contains("[noise]"), "{err}");

        let noisy_without_noise = r#"
            [geometry]
            shells = 1

            [method]
            kind = "noisy-density"

            [plan]
            scheme = "trotter2"
            steps = 20
        "#;
        assert!(parse_config(noisy_without_noise).is_err());

        let sampled_without_prep = r#"
            [run]
            seed = 1

            [geometry]
            shells = 1

            [method]
            kind = "sampled"
            samples = 4

            [plan]
            scheme = "trotter2"
            steps = 10
        "#;
        let err = parse_config(sampled_without_prep).unwrap_err();
        assert!(err.to_string().contains("prep"), "{err}");
    }

    #[test]
    fn geometry_routes_are_mutually_exclusive() {
        let both = r#"
            [geometry]
            shells = 2
            [[geometry.particles]]
            species = "muon"
            position = [0.0, 0.0, 0.0]

            [method]
            kind = "exact-diag"
        "#;
        assert!(parse_config(both).is_err());

        let explicit = r#"
            [geometry]
            [[geometry.particles]]
            species = "muon"
            position = [0.0, 0.0, 1.36]
            [[geometry.particles]]
            species = "fluorine"
            position = [0.0, 0.0, 0.0]
            [[geometry.particles]]
            species = "custom"
            label = "V51"
            gamma = 70.45
            two_spin = 7
            position = [2.72, 0.0, 1.36]

            [method]
            kind = "exact-diag"
        "#;
        let config = parse_config(explicit).unwrap();
        let layout = config.layout().unwrap();
        assert_eq!(layout.n_particles(), 3);
        // Spin-7/2 vanadium occupies 2s = 7 qubits (symmetric encoding).
        assert_eq!(layout.total_qubits(), 1 + 1 + 7);
        assert!(config.system_with(&Displacements::default()).is_err());

        let incomplete_custom = r#"
            [geometry]
            [[geometry.particles]]
            species = "custom"
            position = [0.0, 0.0, 0.0]

            [method]
            kind = "exact-diag"
        "#;
        assert!(parse_config(incomplete_custom).is_err());
    }

    #[test]
    fn displaced_shell_geometry_feeds_the_hamiltonian() {
        let text = r#"
            [geometry]
            shells = 2
            [geometry.displacements]
            nn = -0.188
            n_nn = -0.206

            [hamiltonian]
            pairs = "muon-only"
            field = [0.0, 0.0, 0.01]

            [method]
            kind = "exact-diag"
        "#;
        let config = parse_config(text).unwrap();
        let layout = config.layout().unwrap();
        assert_eq!(layout.total_qubits(), 11);
        assert_eq!(
            config.pair_selection(),
            PairSelection::InvolvingParticle(0)
        );
        let h = config.hamiltonian_on(&layout, None).unwrap();
        // Zeeman along z adds one weight-1 term per spin on top of the
        // dipolar sum (whose exact length depends on which tensor
        // components survive for each bond direction).
        let dipolar = dipolar_hamiltonian(&layout, config.pair_selection()).unwrap();
        assert_eq!(h.len(), dipolar.len() + 11);
        // Field override replaces the configured field.
        let h0 = config.hamiltonian_on(&layout, Some([0.0; 3])).unwrap();
        assert_eq!(h0.len(), dipolar.len());
    }

    #[test]
    fn grids_are_linspace_or_explicit_and_validated() {
        let linspace = r#"
            [geometry]
            shells = 1

            [method]
            kind = "exact-diag"

            [grid]
            stop = 5.0
            points = 11
        "#;
        let times = parse_config(linspace).unwrap().times().unwrap();
        assert_eq!(times.len(), 11);
        assert_eq!(times[0], 0.0);
        assert_eq!(*times.last().unwrap(), 5.0);
        assert!((times[1] - 0.5).abs() < 1e-15);

        let explicit = r#"
            [geometry]
            shells = 1

            [method]
            kind = "exact-diag"

            [grid]
            times = [0.0, 1.0, 2.5]
        "#;
        assert_eq!(parse_config(explicit).unwrap().times().unwrap().len(), 3);

        for bad in [
            "stop = 5.0",                      // missing points
            "stop = 0.0\npoints = 5",          // empty range
            "start = -1.0\nstop = 1.0\npoints = 5", // negative start
            "points = 1\nstop = 1.0",          // single point
            "times = [1.0, 0.5]",              // non-monotone
            "times = [0.0, 1.0]\nstop = 2.0",  // both routes
        ] {
            let text = format!(
                "[geometry]\nshells = 1\n\n[method]\nkind = \"exact-diag\"\n\n[grid]\n{bad}\n"
            );
            assert!(parse_config(&text).is_err(), "accepted: {bad}");
        }
    }

    #[test]
    fn auxiliary_sections_validate_their_fields() {
        let base = "[geometry]\nshells = 1\n\n[method]\nkind = \"noisy-density\"\n\n[plan]\nscheme = \"trotter2\"\nsteps = 10\n";
        assert!(parse_config(&format!("{base}[noise]\np = 5e-4\nlambda = 1.1\n")).is_ok());
        // p = 0 is the legitimate noiseless channel.
        assert!(parse_config(&format!("{base}[noise]\np = 0.0\n")).is_ok());
        assert!(parse_config(&format!("{base}[noise]\np = -0.5\n")).is_err());
        assert!(parse_config(&format!("{base}[noise]\np = 5e-4\nlambda = 0.9\n")).is_err());

        let dyn_base = "[geometry]\nshells = 1\n\n[method]\nkind = \"dynamic\"\n\n";
        assert!(
            parse_config(&format!("{dyn_base}[dynamic]\njump_rate = 0.5\n")).is_ok()
        );
        assert!(
            parse_config(&format!("{dyn_base}[dynamic]\njump_rate = -0.5\n")).is_err()
        );
        assert!(parse_config(&format!(
            "{dyn_base}[dynamic]\njump_rate = 0.5\nquad_step = 0.0\n"
        ))
        .is_err());

        let fit_ok = format!(
            "{MINIMAL}\n[fit]\na0 = 0.21\na_bg = 0.05\nparameters = [\"nn\"]\nsimplex = [[-0.05], [-0.2]]\n"
        );
        let config = parse_config(&fit_ok).unwrap();
        assert_eq!(config.fit_groups().unwrap(), vec![FluorineGroup::Nn]);
        assert!((config.fit_options().unwrap().tolerance - 1e-4).abs() < 1e-18);

        let fit_bad_param = format!(
            "{MINIMAL}\n[fit]\na0 = 0.21\na_bg = 0.05\nparameters = [\"n-n\"]\nsimplex = [[-0.05], [-0.2]]\n"
        );
        assert!(parse_config(&fit_bad_param).is_err());
        let fit_bad_simplex = format!(
            "{MINIMAL}\n[fit]\na0 = 0.21\na_bg = 0.05\nparameters = [\"nn\"]\nsimplex = [[-0.05]]\n"
        );
        assert!(parse_config(&fit_bad_simplex).is_err());

        let resources = format!(
            "{MINIMAL}\n[resources]\np = 1e-3\nepsilon = 0.01\ncycle_time_us = 1.0\n"
        );
        let params = parse_config(&resources)
            .unwrap()
            .surface_code_params()
            .unwrap();
        assert_eq!(params.t_gates_per_rotation, 100);
        assert!(parse_config(&format!(
            "{MINIMAL}\n[resources]\np = 2.0\nepsilon = 0.01\n"
        ))
        .is_err());

        let bounds = format!(
            "{MINIMAL}\n[bounds]\norders = [1, 2]\nsteps = [5, 10]\ntimes = [5.0]\n"
        );
        assert!(parse_config(&bounds).is_ok());
        assert!(parse_config(&format!(
            "{MINIMAL}\n[bounds]\norders = [3]\nsteps = [5]\ntimes = [5.0]\n"
        ))
        .is_err());
    }
}
