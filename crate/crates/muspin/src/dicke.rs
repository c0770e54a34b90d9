//! Circuits preparing symmetric (Dicke) states and their superpositions.
//!
//! The builder produces `U_{n,k}`, a unitary on `n` qubits that maps every
//! seed `|0⟩^{n−h}|1⟩^h` with `h ≤ k` (ones on the low qubits) to the Dicke
//! state `|D^n_h⟩`, the equal-amplitude superposition of all weight-`h`
//! strings. It is assembled from split-and-shift blocks `V_{l,k}`, each of
//! which moves one unit of excitation weight with a CNOT-conjugated
//! controlled rotation; the full circuit uses O(kn) gates and no ancillas.
//!
//! Feeding `U_{n,n}` the staircase superposition
//! `√(1/(n+1)) Σ_h |0⟩^{n−h}|1⟩^h` (built by a ladder of controlled-Ry
//! gates) yields the equal superposition of all Dicke levels, the initial
//! state of the random-phase sampling method.

use crate::error::{Error, Result};
use crate::gates::Gate;

/// The two-qubit splitter: on qubits `(q1, q0)` it maps, in the
/// `|q1 q0⟩` basis, `|01⟩ → √(1/l)|01⟩ + √((l−1)/l)|10⟩` (and the
/// orthogonal image on `|10⟩`), leaving `|00⟩` and `|11⟩` alone.
fn two_qubit_split(q1: usize, q0: usize, l: usize, gates: &mut Vec<Gate>) {
    let theta = 2.0 * (1.0 / l as f64).sqrt().acos();
    gates.push(Gate::Cnot {
        control: q1,
        target: q0,
    });
    gates.push(Gate::CRy {
        control: q0,
        target: q1,
        theta,
    });
    gates.push(Gate::Cnot {
        control: q1,
        target: q0,
    });
}

/// The three-qubit splitter `W_l^α` on qubits `(qα, qα−1, q0)`: maps
/// `|011⟩ → √(α/l)|011⟩ + √((l−α)/l)|110⟩` in the `|qα q_{α−1} q0⟩`
/// basis and acts trivially on every other basis state.
fn three_qubit_split(qa: usize, qam1: usize, q0: usize, alpha: usize, l: usize, gates: &mut Vec<Gate>) {
    let theta = 2.0 * (alpha as f64 / l as f64).sqrt().acos();
    gates.push(Gate::Cnot {
        control: qa,
        target: q0,
    });
    gates.push(Gate::CCRy {
        control1: qam1,
        control2: q0,
        target: qa,
        theta,
    });
    gates.push(Gate::Cnot {
        control: qa,
        target: q0,
    });
}

/// One `V_{l,k}` block acting on the `k+1` qubits starting at `offset`
/// (internal qubit j = `offset + j`). Splits weight between internal
/// qubit 0 and internal qubit h for every seed weight `h ≤ k`.
fn v_block(offset: usize, l: usize, k: usize, gates: &mut Vec<Gate>) {
    if k == 0 {
        return; // weight 0 needs no motion
    }
    two_qubit_split(offset + 1, offset, l, gates);
    for alpha in 2..=k {
        three_qubit_split(offset + alpha, offset + alpha - 1, offset, alpha, l, gates);
    }
}

/// Gate sequence for `U_{n,k}`: applied to `|0⟩^{n−h}|1⟩^h` (ones on
/// qubits `0..h`) it produces `|D^n_h⟩`, for every `h ≤ k`.
pub fn dicke_prep_circuit(n: usize, k: usize) -> Result<Vec<Gate>> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "Dicke circuits need at least one qubit".into(),
        ));
    }
    if k > n {
        return Err(Error::InvalidArgument(format!(
            "Dicke weight {k} exceeds register size {n}"
        )));
    }
    let mut gates = Vec::new();
    if k == 0 {
        return Ok(gates); // |D^n_0⟩ = |0…0⟩ already
    }
    // Descending blocks V_{l,k} for l = n..k+1 at offset n−l, then the
    // shrinking tail V_{l,l−1} for l = k..2.
    for l in (k + 1..=n).rev() {
        v_block(n - l, l, k, &mut gates);
    }
    for l in (2..=k).rev() {
        v_block(n - l, l, l - 1, &mut gates);
    }
    Ok(gates)
}

/// X gates making the weight-`h` seed `|0⟩^{n−h}|1⟩^h` (ones on the low
/// qubits), followed by `U_{n,h}`: applied to `|0…0⟩` this prepares
/// `|D^n_h⟩` outright.
pub fn dicke_state_circuit(n: usize, h: usize) -> Result<Vec<Gate>> {
    let mut gates: Vec<Gate> = (0..h).map(Gate::X).collect();
    gates.extend(dicke_prep_circuit(n, h)?);
    Ok(gates)
}

/// Ladder of controlled-Ry gates preparing the staircase superposition
/// `√(1/(n+1)) Σ_h |0⟩^{n−h}|1⟩^h` from `|0…0⟩`, followed by `U_{n,n}`:
/// the result is the equal superposition `√(1/(n+1)) Σ_h |D^n_h⟩`.
pub fn dicke_superposition_circuit(n: usize) -> Result<Vec<Gate>> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "Dicke circuits need at least one qubit".into(),
        ));
    }
    let mut gates = Vec::new();
    for j in 0..n {
        // After this gate the not-yet-stopped branch has ones on qubits
        // 0..=j; cos(θ/2) = √(1/(n+1−j)) leaves amplitude 1/√(n+1) on the
        // branch that stops here.
        let theta = 2.0 * (1.0 / (n + 1 - j) as f64).sqrt().acos();
        if j == 0 {
            gates.push(Gate::Ry(0, theta));
        } else {
            gates.push(Gate::CRy {
                control: j - 1,
                target: j,
                theta,
            });
        }
    }
    gates.extend(dicke_prep_circuit(n, n)?);
    Ok(gates)
}

/// Shift every qubit index in a gate sequence upward by `offset`,
/// relocating a circuit built on qubits `0..n` onto `offset..offset+n`.
pub fn offset_gates(gates: &[Gate], offset: usize) -> Vec<Gate> {
    gates
        .iter()
        .map(|g| match *g {
            Gate::X(q) => Gate::X(q + offset),
            Gate::Y(q) => Gate::Y(q + offset),
            Gate::Z(q) => Gate::Z(q + offset),
            Gate::H(q) => Gate::H(q + offset),
            Gate::T(q) => Gate::T(q + offset),
            Gate::Rx(q, th) => Gate::Rx(q + offset, th),
            Gate::Ry(q, th) => Gate::Ry(q + offset, th),
            Gate::Rz(q, th) => Gate::Rz(q + offset, th),
            Gate::Cnot { control, target } => Gate::Cnot {
                control: control + offset,
                target: target + offset,
            },
            Gate::CRy {
                control,
                target,
                theta,
            } => Gate::CRy {
                control: control + offset,
                target: target + offset,
                theta,
            },
            Gate::CRz {
                control,
                target,
                theta,
            } => Gate::CRz {
                control: control + offset,
                target: target + offset,
                theta,
            },
            Gate::CCRy {
                control1,
                control2,
                target,
                theta,
            } => Gate::CCRy {
                control1: control1 + offset,
                control2: control2 + offset,
                target: target + offset,
                theta,
            },
        })
        .collect()
}
