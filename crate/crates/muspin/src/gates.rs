//! The gate set: Pauli gates, Hadamard, T, axis rotations, and the
//! controlled gates used by the symmetric-state preparation circuits.
//!
//! Rotation conventions: `Rα(θ) = exp(−i(θ/2)·α)` for α ∈ {X, Y, Z}, so
//! `Rz(θ) = diag(e^{−iθ/2}, e^{+iθ/2})` and `T = diag(1, e^{iπ/4})`.
//! Controlled gates apply their rotation when every control qubit is |1⟩.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// 2×2 complex matrix in row-major `[[row0], [row1]]` layout.
pub type Matrix2 = [[Complex64; 2]; 2];

/// A quantum logic gate with its qubit indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    X(usize),
    Y(usize),
    Z(usize),
    H(usize),
    T(usize),
    Rx(usize, f64),
    Ry(usize, f64),
    Rz(usize, f64),
    Cnot {
        control: usize,
        target: usize,
    },
    CRy {
        control: usize,
        target: usize,
        theta: f64,
    },
    CRz {
        control: usize,
        target: usize,
        theta: f64,
    },
    /// Doubly-controlled Ry, the three-qubit block of the symmetric-state
    /// preparation circuits.
    CCRy {
        control1: usize,
        control2: usize,
        target: usize,
        theta: f64,
    },
}

impl Gate {
    /// Qubits the gate touches (controls first, target last).
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::X(q)
            | Gate::Y(q)
            | Gate::Z(q)
            | Gate::H(q)
            | Gate::T(q)
            | Gate::Rx(q, _)
            | Gate::Ry(q, _)
            | Gate::Rz(q, _) => vec![q],
            Gate::Cnot { control, target } => vec![control, target],
            Gate::CRy {
                control, target, ..
            }
            | Gate::CRz {
                control, target, ..
            } => vec![control, target],
            Gate::CCRy {
                control1,
                control2,
                target,
                ..
            } => vec![control1, control2, target],
        }
    }

    /// Number of qubits touched (1, 2 or 3).
    pub fn arity(&self) -> usize {
        self.qubits().len()
    }

    pub fn is_single_qubit(&self) -> bool {
        self.arity() == 1
    }

    /// Target qubit (the non-control qubit).
    pub fn target(&self) -> usize {
        *self.qubits().last().unwrap()
    }

    /// Validity check against a register size; controls must be distinct
    /// from targets.
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let qs = self.qubits();
        for &q in &qs {
            if q >= n_qubits {
                return Err(Error::InvalidArgument(format!(
                    "gate {self:?} touches qubit {q} on a {n_qubits}-qubit register"
                )));
            }
        }
        for a in 0..qs.len() {
            for b in (a + 1)..qs.len() {
                if qs[a] == qs[b] {
                    return Err(Error::InvalidArgument(format!(
                        "gate {self:?} repeats qubit {}",
                        qs[a]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Exact inverse as a gate sequence. Rotations negate their angle;
    /// T⁻¹ = T⁷ keeps the inverse inside the gate set with no stray
    /// global phase.
    pub fn inverse_sequence(&self) -> Vec<Gate> {
        match *self {
            Gate::X(_) | Gate::Y(_) | Gate::Z(_) | Gate::H(_) | Gate::Cnot { .. } => {
                vec![*self]
            }
            Gate::T(q) => vec![Gate::T(q); 7],
            Gate::Rx(q, th) => vec![Gate::Rx(q, -th)],
            Gate::Ry(q, th) => vec![Gate::Ry(q, -th)],
            Gate::Rz(q, th) => vec![Gate::Rz(q, -th)],
            Gate::CRy {
                control,
                target,
                theta,
            } => vec![Gate::CRy {
                control,
                target,
                theta: -theta,
            }],
            Gate::CRz {
                control,
                target,
                theta,
            } => vec![Gate::CRz {
                control,
                target,
                theta: -theta,
            }],
            Gate::CCRy {
                control1,
                control2,
                target,
                theta,
            } => vec![Gate::CCRy {
                control1,
                control2,
                target,
                theta: -theta,
            }],
        }
    }

    /// The 2×2 unitary of a single-qubit gate (`None` for multi-qubit
    /// gates). Controlled gates expose the matrix applied to the target
    /// when the controls fire via [`Gate::controlled_matrix2`].
    pub fn matrix2(&self) -> Option<Matrix2> {
        let z = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::i();
        match *self {
            Gate::X(_) => Some([[z, one], [one, z]]),
            Gate::Y(_) => Some([[z, -i], [i, z]]),
            Gate::Z(_) => Some([[one, z], [z, -one]]),
            Gate::H(_) => {
                let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                Some([[h, h], [h, -h]])
            }
            Gate::T(_) => Some([
                [one, z],
                [z, Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)],
            ]),
            Gate::Rx(_, th) => {
                let (c, s) = ((th / 2.0).cos(), (th / 2.0).sin());
                Some([
                    [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
                    [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
                ])
            }
            Gate::Ry(_, th) => {
                let (c, s) = ((th / 2.0).cos(), (th / 2.0).sin());
                Some([
                    [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
                    [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
                ])
            }
            Gate::Rz(_, th) => Some([
                [Complex64::from_polar(1.0, -th / 2.0), z],
                [z, Complex64::from_polar(1.0, th / 2.0)],
            ]),
            _ => None,
        }
    }

    /// For controlled gates: the 2×2 matrix applied to the target when all
    /// controls are |1⟩.
    pub fn controlled_matrix2(&self) -> Option<Matrix2> {
        match *self {
            Gate::Cnot { target, .. } => Gate::X(target).matrix2(),
            Gate::CRy { target, theta, .. } => Gate::Ry(target, theta).matrix2(),
            Gate::CRz { target, theta, .. } => Gate::Rz(target, theta).matrix2(),
            Gate::CCRy { target, theta, .. } => Gate::Ry(target, theta).matrix2(),
            _ => None,
        }
    }

    /// True for gates in the Clifford group: Pauli gates, H, CNOT, and
    /// axis rotations whose angle is a multiple of π/2 (within `tol`).
    /// Non-Clifford single-qubit rotations are the gates that dominate
    /// fault-tolerant cost, each requiring magic-state synthesis.
    pub fn is_clifford(&self, tol: f64) -> bool {
        let angle_cliff = |th: f64| {
            let r = th.rem_euclid(std::f64::consts::FRAC_PI_2);
            r < tol || (std::f64::consts::FRAC_PI_2 - r) < tol
        };
        match *self {
            Gate::X(_) | Gate::Y(_) | Gate::Z(_) | Gate::H(_) | Gate::Cnot { .. } => true,
            Gate::T(_) => false,
            Gate::Rx(_, th) | Gate::Ry(_, th) | Gate::Rz(_, th) => angle_cliff(th),
            Gate::CRy { theta, .. } | Gate::CRz { theta, .. } | Gate::CCRy { theta, .. } => {
                // Controlled rotations are Clifford only at angle 0 (mod 4π
                // trivialities aside); treat nonzero angles as non-Clifford.
                theta.abs() < tol
            }
        }
    }
}

/// Product `a · b` of 2×2 matrices.
pub fn mat2_mul(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, entry) in row.iter_mut().enumerate() {
            *entry = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

/// True when `m` is the identity up to a global phase, within `tol` on the
/// largest deviation.
pub fn mat2_is_identity_up_to_phase(m: &Matrix2, tol: f64) -> bool {
    if m[0][1].norm() > tol || m[1][0].norm() > tol {
        return false;
    }
    let d0 = m[0][0];
    let d1 = m[1][1];
    if (d0.norm() - 1.0).abs() > tol || (d1.norm() - 1.0).abs() > tol {
        return false;
    }
    (d0 - d1).norm() < tol
}
