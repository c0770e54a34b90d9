//! Gate-noise channels: single-qubit depolarizing noise applied after
//! every gate, plus the pure-dephasing channel used for initial-state
//! averaging.
//!
//! Density states apply channels exactly; pure states realise them as
//! stochastic trajectories (a Pauli error is inserted with the channel
//! probability), whose average over trajectories reproduces the channel.

use rand::Rng;

use crate::error::{Error, Result};
use crate::gates::Gate;
use crate::state::{QuantumState, StateKind};

/// Noise strength for circuit execution. `p2` is the depolarizing
/// probability after each two-qubit gate (applied independently to both
/// qubits); single-qubit gates use `p1`. By convention `p1 = p2 / 10`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub p1: f64,
    pub p2: f64,
}

impl NoiseModel {
    /// Noiseless execution.
    pub fn none() -> Self {
        NoiseModel { p1: 0.0, p2: 0.0 }
    }

    /// The standard single/two-qubit split: `p1 = p2 / 10`.
    pub fn from_two_qubit_rate(p2: f64) -> Result<Self> {
        let m = NoiseModel { p1: p2 / 10.0, p2 };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p1", self.p1), ("p2", self.p2)] {
            if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "noise probability {name} = {p} outside [0, 1]"
                )));
            }
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.p1 == 0.0 && self.p2 == 0.0
    }

    /// The per-qubit depolarizing probability charged after `gate`.
    pub fn rate_for(&self, gate: &Gate) -> f64 {
        if gate.is_single_qubit() {
            self.p1
        } else {
            self.p2
        }
    }
}

/// Apply the single-qubit depolarizing channel
/// `ρ → (1−p)ρ + (p/3)(XρX + YρY + ZρZ)` to one qubit.
///
/// Density states get the exact map. Pure states draw one Kraus branch:
/// with probability `p` a uniformly random Pauli error (X, Y or Z) is
/// applied, so the trajectory average reproduces the channel.
pub fn apply_depolarizing<R: Rng + ?Sized>(
    state: &mut QuantumState,
    qubit: usize,
    p: f64,
    rng: &mut R,
) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "depolarizing probability {p} outside [0, 1]"
        )));
    }
    if p == 0.0 {
        return Ok(());
    }
    match state.kind() {
        StateKind::Density => {
            let base = state.clone();
            let mix = |g: Gate, out: &mut QuantumState| -> Result<()> {
                let mut branch = base.clone();
                branch.apply_gate(&g)?;
                out.mix_in_place(&branch, p / 3.0)?;
                Ok(())
            };
            let mut out = base.clone();
            out.scale_density(1.0 - p)?;
            mix(Gate::X(qubit), &mut out)?;
            mix(Gate::Y(qubit), &mut out)?;
            mix(Gate::Z(qubit), &mut out)?;
            *state = out;
            Ok(())
        }
        StateKind::Pure => {
            if rng.gen::<f64>() < p {
                let g = match rng.gen_range(0u8..3) {
                    0 => Gate::X(qubit),
                    1 => Gate::Y(qubit),
                    _ => Gate::Z(qubit),
                };
                state.apply_gate(&g)?;
            }
            Ok(())
        }
    }
}

/// Apply a gate followed by the model's depolarizing noise on each qubit
/// the gate touched.
pub fn apply_noisy_gate<R: Rng + ?Sized>(
    state: &mut QuantumState,
    gate: &Gate,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<()> {
    state.apply_gate(gate)?;
    let p = noise.rate_for(gate);
    if p > 0.0 {
        for q in gate.qubits() {
            apply_depolarizing(state, q, p, rng)?;
        }
    }
    Ok(())
}

/// Run a gate sequence under the noise model.
pub fn apply_noisy_gates<R: Rng + ?Sized>(
    state: &mut QuantumState,
    gates: &[Gate],
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<()> {
    for g in gates {
        apply_noisy_gate(state, g, noise, rng)?;
    }
    Ok(())
}

/// Exact pure-dephasing channel `ρ → ½(ρ + ZρZ)` on each listed qubit
/// (density states only). Composed over all environment qubits this
/// averages uniformly over every Z-sign pattern, erasing coherences
/// between their basis states.
pub fn apply_full_dephasing(state: &mut QuantumState, qubits: &[usize]) -> Result<()> {
    if state.kind() != StateKind::Density {
        return Err(Error::InvalidArgument(
            "exact dephasing needs a density state; pure states use sampled ±1 phases".into(),
        ));
    }
    for &q in qubits {
        let mut flipped = state.clone();
        flipped.apply_gate(&Gate::Z(q))?;
        state.scale_density(0.5)?;
        state.mix_in_place(&flipped, 0.5)?;
    }
    Ok(())
}

impl QuantumState {
    /// `ρ → w·ρ` (density states only; internal building block for
    /// channel mixtures).
    pub(crate) fn scale_density(&mut self, w: f64) -> Result<()> {
        match self.kind() {
            StateKind::Density => {
                self.scale_data(w);
                Ok(())
            }
            StateKind::Pure => Err(Error::InvalidArgument(
                "scale_density on a pure state".into(),
            )),
        }
    }

    /// `ρ → ρ + w·σ` (density states only).
    pub(crate) fn mix_in_place(&mut self, other: &QuantumState, w: f64) -> Result<()> {
        if self.kind() != StateKind::Density || other.kind() != StateKind::Density {
            return Err(Error::InvalidArgument("mix_in_place needs density states".into()));
        }
        if self.n_qubits() != other.n_qubits() {
            return Err(Error::InvalidArgument(
                "mix_in_place dimension mismatch".into(),
            ));
        }
        self.axpy_data(other, w);
        Ok(())
    }
}

/// Number of measurement shots needed for a target standard error `alpha`
/// at worst-case variance (⟨Z⟩ = 0): `M = ⌈1/α²⌉`.
pub fn shots_for_error(alpha: f64) -> Result<usize> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "target shot error must be positive, got {alpha}"
        )));
    }
    Ok((1.0 / (alpha * alpha)).ceil() as usize)
}
