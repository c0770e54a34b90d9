//! Gate-stream compression and gate-count summaries.
//!
//! Product-formula circuits are dominated by single-qubit basis changes
//! that meet their own inverses between consecutive exponentials, and by
//! CNOT pairs that cancel where one exponential's unwind meets the next
//! exponential's wind-up. [`compress`] removes both: adjacent single-qubit
//! gates on the same qubit are fused into one 2×2 unitary (dropped when the
//! product is the identity up to phase), and identical CNOTs separated only
//! by gates on other qubits annihilate. "Adjacent" is circuit-DAG
//! adjacency: gates on disjoint qubits commute, so they never block a
//! fusion or cancellation.
//!
//! [`GateCounts`] summarises a sequence by arity and by fault-tolerant
//! cost: every gate outside the Clifford group needs magic-state synthesis,
//! so the non-Clifford count is the quantity the resource estimates are
//! built on.

use num_complex::Complex64;

use crate::error::Result;
use crate::gates::{mat2_is_identity_up_to_phase, mat2_mul, Gate, Matrix2};

/// Tolerance used when classifying rotation angles and fused matrices as
/// Clifford, and when dropping fused products that are the identity.
pub const CLIFFORD_TOL: f64 = 1e-9;

/// A gate in a compressed sequence: either an original gate or a fused run
/// of single-qubit gates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CompiledGate {
    Basic(Gate),
    /// Product of two or more adjacent single-qubit gates on one qubit.
    Fused { qubit: usize, matrix: Matrix2 },
}

impl CompiledGate {
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            CompiledGate::Basic(g) => g.qubits(),
            CompiledGate::Fused { qubit, .. } => vec![*qubit],
        }
    }

    pub fn touches(&self, q: usize) -> bool {
        match self {
            CompiledGate::Basic(g) => g.qubits().contains(&q),
            CompiledGate::Fused { qubit, .. } => *qubit == q,
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            CompiledGate::Basic(g) => g.arity(),
            CompiledGate::Fused { .. } => 1,
        }
    }

    /// True when the gate is in the Clifford group (within [`CLIFFORD_TOL`]).
    pub fn is_clifford(&self) -> bool {
        match self {
            CompiledGate::Basic(g) => g.is_clifford(CLIFFORD_TOL),
            CompiledGate::Fused { matrix, .. } => matrix_is_clifford(matrix, CLIFFORD_TOL),
        }
    }
}

/// Gate totals by arity plus the count of gates outside the Clifford
/// group — the gates that cost magic states on a fault-tolerant machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GateCounts {
    pub single_qubit: usize,
    pub two_qubit: usize,
    pub three_qubit: usize,
    pub non_clifford: usize,
}

impl GateCounts {
    pub fn total(&self) -> usize {
        self.single_qubit + self.two_qubit + self.three_qubit
    }

    fn add(&mut self, arity: usize, clifford: bool) {
        match arity {
            1 => self.single_qubit += 1,
            2 => self.two_qubit += 1,
            _ => self.three_qubit += 1,
        }
        if !clifford {
            self.non_clifford += 1;
        }
    }
}

/// Counts for a raw gate sequence.
pub fn count_gates(gates: &[Gate]) -> GateCounts {
    let mut counts = GateCounts::default();
    for g in gates {
        counts.add(g.arity(), g.is_clifford(CLIFFORD_TOL));
    }
    counts
}

/// Counts for a compressed sequence.
pub fn count_compiled(gates: &[CompiledGate]) -> GateCounts {
    let mut counts = GateCounts::default();
    for g in gates {
        counts.add(g.arity(), g.is_clifford());
    }
    counts
}

/// True when conjugation by `m` maps every Pauli axis onto a Pauli axis,
/// i.e. `m` is a single-qubit Clifford. `m P m†` is a unit Bloch vector
/// `v·σ` for P ∈ {X, Z}; the gate is Clifford exactly when both images lie
/// on coordinate axes.
pub fn matrix_is_clifford(m: &Matrix2, tol: f64) -> bool {
    let dagger: Matrix2 = [
        [m[0][0].conj(), m[1][0].conj()],
        [m[0][1].conj(), m[1][1].conj()],
    ];
    let x: Matrix2 = [
        [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
    ];
    let z: Matrix2 = [
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        [Complex64::new(0.0, 0.0), Complex64::new(-1.0, 0.0)],
    ];
    for p in [x, z] {
        let c = mat2_mul(&mat2_mul(m, &p), &dagger);
        // c = vx·X + vy·Y + vz·Z for a traceless Hermitian image.
        let vx = c[1][0].re;
        let vy = c[1][0].im;
        let vz = c[0][0].re;
        let on_axis = [vx, vy, vz]
            .iter()
            .all(|v| v.abs() < tol || (v.abs() - 1.0).abs() < tol);
        if !on_axis {
            return false;
        }
    }
    true
}

/// Worklist item during compression: single-qubit gates carry their matrix
/// so they can fuse; the original gate is kept while the run has length 1.
#[derive(Debug, Clone, Copy)]
enum Item {
    One {
        qubit: usize,
        matrix: Matrix2,
        original: Option<Gate>,
    },
    Multi(Gate),
}

impl Item {
    fn touches(&self, q: usize) -> bool {
        match self {
            Item::One { qubit, .. } => *qubit == q,
            Item::Multi(g) => g.qubits().contains(&q),
        }
    }
}

/// Compress a gate sequence: fuse adjacent single-qubit gates (dropping
/// identity products) and cancel identical adjacent CNOT pairs, repeating
/// until nothing changes. The compressed sequence implements the same
/// unitary up to a global phase.
pub fn compress(gates: &[Gate]) -> Vec<CompiledGate> {
    let mut items: Vec<Item> = gates
        .iter()
        .map(|&g| match g.matrix2() {
            Some(matrix) => Item::One {
                qubit: g.qubits()[0],
                matrix,
                original: Some(g),
            },
            None => Item::Multi(g),
        })
        .collect();
    loop {
        let (next, changed) = compress_pass(items);
        items = next;
        if !changed {
            break;
        }
    }
    items
        .into_iter()
        .map(|item| match item {
            Item::One {
                original: Some(g), ..
            } => CompiledGate::Basic(g),
            Item::One { qubit, matrix, .. } => CompiledGate::Fused { qubit, matrix },
            Item::Multi(g) => CompiledGate::Basic(g),
        })
        .collect()
}

fn compress_pass(items: Vec<Item>) -> (Vec<Item>, bool) {
    let mut out: Vec<Item> = Vec::with_capacity(items.len());
    let mut changed = false;
    'stream: for item in items {
        match item {
            Item::One { qubit, matrix, .. } => {
                // Slide left past gates on other qubits; fuse with the
                // nearest gate touching this qubit if it is single-qubit.
                for k in (0..out.len()).rev() {
                    if !out[k].touches(qubit) {
                        continue;
                    }
                    if let Item::One {
                        matrix: earlier, ..
                    } = out[k]
                    {
                        let product = mat2_mul(&matrix, &earlier);
                        changed = true;
                        if mat2_is_identity_up_to_phase(&product, CLIFFORD_TOL) {
                            out.remove(k);
                        } else {
                            out[k] = Item::One {
                                qubit,
                                matrix: product,
                                original: None,
                            };
                        }
                        continue 'stream;
                    }
                    break;
                }
                out.push(item);
            }
            Item::Multi(g) => {
                if let Gate::Cnot { control, target } = g {
                    for k in (0..out.len()).rev() {
                        if !out[k].touches(control) && !out[k].touches(target) {
                            continue;
                        }
                        if let Item::Multi(Gate::Cnot {
                            control: c2,
                            target: t2,
                        }) = out[k]
                        {
                            if c2 == control && t2 == target {
                                out.remove(k);
                                changed = true;
                                continue 'stream;
                            }
                        }
                        break;
                    }
                }
                out.push(item);
            }
        }
    }
    (out, changed)
}

/// Execute a compiled gate stream on a state, fused unitaries included.
pub fn apply_compiled(state: &mut crate::state::QuantumState, gates: &[CompiledGate]) -> Result<()> {
    for g in gates {
        match g {
            CompiledGate::Basic(g) => state.apply_gate(g)?,
            CompiledGate::Fused { qubit, matrix } => state.apply_matrix2(*qubit, matrix)?,
        }
    }
    Ok(())
}
