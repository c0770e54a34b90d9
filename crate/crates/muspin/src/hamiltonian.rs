//! Spin-interaction Hamiltonians as Pauli sums.
//!
//! All Hamiltonians are stored divided by ħ, i.e. as angular frequencies in
//! rad·µs⁻¹, with lengths in Å and fields in Tesla. Three couplings are
//! built here:
//!
//! - **Dipolar**: for every unordered particle pair,
//!   `ω_ij [S_i·S_j − 3(S_i·r̂)(S_j·r̂)]` with
//!   `ω_ij = µ₀ħγ_iγ_j/(4π r_ij³)` — in these units
//!   `ω_ij = `[`DIPOLAR_COEFF`]`·γ_i γ_j / r³`.
//! - **Quadrupole**: for each nucleus with s > 1/2 and a supplied electric
//!   field gradient, `c_i (S⃗ᵀ·G·S⃗)` with
//!   `c_i = `[`QUADRUPOLE_COEFF`]`·Q_i(1+γ∞)/(2s(2s−1))`, Q in barn and G
//!   in V·Å⁻².
//! - **Zeeman**: `Σ_i γ_i S⃗_i·B⃗` for a static field in Tesla.
//!
//! Spin operators expand as ½-weighted Pauli sums over each particle's
//! qubits (see [`crate::spin`]), so every coupling term becomes a sum of
//! one- and two-qubit Pauli strings with real coefficients.

use crate::error::{Error, Result};
use crate::pauli::{PauliString, PauliSum};
use crate::spin::{Axis, QubitLayout, Spin};

/// Dipolar prefactor: `µ₀ħ/(4π)` expressed so that
/// `ω = DIPOLAR_COEFF · γ_i γ_j / r³` is in rad·µs⁻¹ when γ is in
/// rad·µs⁻¹·T⁻¹ and r in Å (numerically `1e-7 · ħ · 1e29`).
pub const DIPOLAR_COEFF: f64 = 1.054571817e-5;

/// Quadrupole prefactor: `e/ħ` expressed so that
/// `c = QUADRUPOLE_COEFF · Q·(1+γ∞)/(2s(2s−1))` together with an EFG in
/// V·Å⁻² gives rad·µs⁻¹ when Q is in barn
/// (numerically `e · 1e-28 · 1e20 / ħ · 1e-6`).
pub const QUADRUPOLE_COEFF: f64 = 1.602176634e-19 * 1e-8 / 1.054571817e-34 * 1e-6;

/// Which particle pairs enter the dipolar sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairSelection {
    /// Every unordered pair.
    All,
    /// Only pairs involving the given particle index — used to keep
    /// muon–nucleus couplings while dropping the much weaker
    /// nucleus–nucleus terms.
    InvolvingParticle(usize),
}

impl PairSelection {
    fn keeps(self, i: usize, j: usize) -> bool {
        match self {
            PairSelection::All => true,
            PairSelection::InvolvingParticle(p) => i == p || j == p,
        }
    }
}

/// Expand `scale · Σ_{αβ} A[α][β] · S_i^α S_j^β` for two distinct particles
/// into two-qubit Pauli terms: each spin operator contributes ½ per qubit,
/// so every non-vanishing (α, β) block yields `(2s_i)(2s_j)` strings of
/// coefficient `scale·A[α][β]/4`.
fn pair_coupling_terms(
    layout: &QubitLayout,
    i: usize,
    j: usize,
    a: &[[f64; 3]; 3],
    scale: f64,
    out: &mut Vec<(PauliString, f64)>,
) -> Result<()> {
    for alpha in Axis::ALL {
        for beta in Axis::ALL {
            let coeff = scale * a[alpha.index()][beta.index()] / 4.0;
            if coeff == 0.0 {
                continue;
            }
            for qi in layout.qubit_range(i) {
                for qj in layout.qubit_range(j) {
                    let s = PauliString::from_factors(&[
                        (qi, alpha.pauli()),
                        (qj, beta.pauli()),
                    ])?;
                    out.push((s, coeff));
                }
            }
        }
    }
    Ok(())
}

/// Dipolar Hamiltonian over the selected particle pairs, rad·µs⁻¹.
///
/// One term per unordered pair (the conventional ½ Σ_{i,j} double sum
/// resolved). Rejects coincident particle positions.
pub fn dipolar_hamiltonian(layout: &QubitLayout, pairs: PairSelection) -> Result<PauliSum> {
    let n = layout.n_particles();
    let mut terms: Vec<(PauliString, f64)> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if !pairs.keeps(i, j) {
                continue;
            }
            let pi = layout.particle(i);
            let pj = layout.particle(j);
            let r = [
                pj.position[0] - pi.position[0],
                pj.position[1] - pi.position[1],
                pj.position[2] - pi.position[2],
            ];
            let dist = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
            if dist < 1e-9 {
                return Err(Error::InvalidArgument(format!(
                    "particles '{}' and '{}' are coincident",
                    pi.label, pj.label
                )));
            }
            let rhat = [r[0] / dist, r[1] / dist, r[2] / dist];
            let omega = DIPOLAR_COEFF * pi.gamma * pj.gamma / dist.powi(3);
            // A = 1 − 3 r̂r̂ᵀ
            let mut a = [[0.0f64; 3]; 3];
            for (al, row) in a.iter_mut().enumerate() {
                for (be, entry) in row.iter_mut().enumerate() {
                    let delta = if al == be { 1.0 } else { 0.0 };
                    *entry = delta - 3.0 * rhat[al] * rhat[be];
                }
            }
            pair_coupling_terms(layout, i, j, &a, omega, &mut terms)?;
        }
    }
    Ok(PauliSum::from_terms(terms))
}

/// Quadrupole Hamiltonian, rad·µs⁻¹. `efg[i]` is the electric field
/// gradient tensor at particle `i` in V·Å⁻² (`None` where there is none).
///
/// Each supplied tensor must be symmetric and attached to a particle that
/// carries quadrupole parameters (s > 1/2); the s = 1/2 denominator
/// `2s(2s−1) = 0` makes such an assignment meaningless and it is rejected.
pub fn quadrupole_hamiltonian(
    layout: &QubitLayout,
    efg: &[Option<[[f64; 3]; 3]>],
) -> Result<PauliSum> {
    if efg.len() != layout.n_particles() {
        return Err(Error::InvalidArgument(format!(
            "EFG list has {} entries for {} particles",
            efg.len(),
            layout.n_particles()
        )));
    }
    let mut terms: Vec<(PauliString, f64)> = Vec::new();
    for (i, tensor) in efg.iter().enumerate() {
        let Some(g) = tensor else { continue };
        let p = layout.particle(i);
        let Some(q) = p.quadrupole else {
            return Err(Error::InvalidArgument(format!(
                "EFG supplied for particle '{}' which has no quadrupole parameters",
                p.label
            )));
        };
        if p.spin == Spin::HALF {
            return Err(Error::InvalidArgument(format!(
                "EFG supplied for spin-1/2 particle '{}'",
                p.label
            )));
        }
        for al in 0..3 {
            for be in 0..3 {
                if (g[al][be] - g[be][al]).abs() > 1e-12 {
                    return Err(Error::InvalidArgument(format!(
                        "EFG tensor for particle '{}' is not symmetric",
                        p.label
                    )));
                }
            }
        }
        let s = p.spin.value();
        let c = QUADRUPOLE_COEFF * q.moment_barn * (1.0 + q.anti_shielding)
            / (2.0 * s * (2.0 * s - 1.0));

        // S_i^α S_i^β = ¼ Σ_{k,l} P^α_k P^β_l over the particle's qubits.
        // Same-qubit products (k = l) give δ_{αβ}·I plus an antisymmetric
        // iε_{αβγ}P^γ piece that cancels against the (β, α) term of the
        // symmetric G contraction, leaving only real identity shifts.
        let range: Vec<usize> = layout.qubit_range(i).collect();
        for alpha in Axis::ALL {
            for beta in Axis::ALL {
                let coeff = c * g[alpha.index()][beta.index()] / 4.0;
                if coeff == 0.0 {
                    continue;
                }
                for &qk in &range {
                    for &ql in &range {
                        if qk == ql {
                            if alpha == beta {
                                terms.push((PauliString::identity(), coeff));
                            }
                            // α ≠ β same-qubit products cancel pairwise for
                            // symmetric G; skip them rather than track the
                            // imaginary intermediates.
                            continue;
                        }
                        let s = PauliString::from_factors(&[
                            (qk, alpha.pauli()),
                            (ql, beta.pauli()),
                        ])?;
                        terms.push((s, coeff));
                    }
                }
            }
        }
    }
    Ok(PauliSum::from_terms(terms))
}

/// Zeeman Hamiltonian `Σ_i γ_i S⃗_i·B⃗` for a static field in Tesla,
/// rad·µs⁻¹.
pub fn zeeman_hamiltonian(layout: &QubitLayout, field: [f64; 3]) -> Result<PauliSum> {
    let mut terms: Vec<(PauliString, f64)> = Vec::new();
    for i in 0..layout.n_particles() {
        let gamma = layout.particle(i).gamma;
        for axis in Axis::ALL {
            let coeff = gamma * field[axis.index()] / 2.0;
            if coeff == 0.0 {
                continue;
            }
            for q in layout.qubit_range(i) {
                terms.push((PauliString::single(q, axis.pauli())?, coeff));
            }
        }
    }
    Ok(PauliSum::from_terms(terms))
}
