//! Quantum state storage and gate application.
//!
//! Two representations are supported:
//!
//! * **Pure** — a statevector of `2^Q` amplitudes, capped at
//!   [`STATEVECTOR_QUBIT_LIMIT`] qubits. Allocations above the memory
//!   policy's limit (default 1 GiB) are refused unless the caller opts in.
//! * **Density** — a `2^Q × 2^Q` column-major density matrix, capped at
//!   [`DENSITY_QUBIT_LIMIT`] qubits, for exact noise-channel evolution.
//!
//! Qubit 0 is the least significant bit of a basis index. Gates preserve
//! the norm (pure) or trace (density) to near machine precision; both are
//! checked by [`QuantumState::check_consistency`].

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::gates::{Gate, Matrix2};
use crate::pauli::PauliString;

/// Largest register a pure statevector may hold (8 GiB of amplitudes).
pub const STATEVECTOR_QUBIT_LIMIT: usize = 29;
/// Largest register a density matrix may hold (64 MiB of entries).
pub const DENSITY_QUBIT_LIMIT: usize = 11;
/// Allocations above this require [`MemoryPolicy::unrestricted`] (1 GiB).
pub const DEFAULT_MEMORY_LIMIT_BYTES: u128 = 1 << 30;

/// Controls how large a state allocation may be before it is refused.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryPolicy {
    limit_bytes: u128,
}

impl Default for MemoryPolicy {
    fn default() -> Self {
        MemoryPolicy {
            limit_bytes: DEFAULT_MEMORY_LIMIT_BYTES,
        }
    }
}

impl MemoryPolicy {
    /// Allow any allocation the qubit caps themselves permit. This is the
    /// programmatic face of the `--allow-large-memory` switch.
    pub fn unrestricted() -> Self {
        MemoryPolicy {
            limit_bytes: u128::MAX,
        }
    }

    pub fn with_limit_bytes(limit_bytes: u128) -> Self {
        MemoryPolicy { limit_bytes }
    }

    /// Error if an allocation of `bytes` exceeds the policy limit.
    pub fn check_allocation(&self, bytes: u128, what: &str) -> Result<()> {
        self.check(bytes, what)
    }

    fn check(&self, bytes: u128, what: &str) -> Result<()> {
        if bytes > self.limit_bytes {
            return Err(Error::ResourceLimit(format!(
                "{what} needs {bytes} bytes, above the {} byte limit; \
                 opt in to large allocations to proceed",
                self.limit_bytes
            )));
        }
        Ok(())
    }
}

/// Whether a state is stored as a statevector or a density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    Pure,
    Density,
}

/// A quantum register in either pure or density representation.
#[derive(Debug, Clone)]
pub struct QuantumState {
    n_qubits: usize,
    kind: StateKind,
    /// Pure: `2^n` amplitudes. Density: `2^n × 2^n` column-major entries.
    data: Vec<Complex64>,
}

/// Bytes needed to store a state of the given kind and size.
pub fn memory_required(kind: StateKind, n_qubits: usize) -> u128 {
    let dim = 1u128 << n_qubits;
    let entries = match kind {
        StateKind::Pure => dim,
        StateKind::Density => dim * dim,
    };
    entries * std::mem::size_of::<Complex64>() as u128
}

impl QuantumState {
    /// |0…0⟩ as a statevector.
    pub fn zero_pure(n_qubits: usize, policy: &MemoryPolicy) -> Result<Self> {
        if n_qubits == 0 || n_qubits > STATEVECTOR_QUBIT_LIMIT {
            return Err(Error::ResourceLimit(format!(
                "pure states support 1..={STATEVECTOR_QUBIT_LIMIT} qubits, got {n_qubits}"
            )));
        }
        policy.check(
            memory_required(StateKind::Pure, n_qubits),
            &format!("{n_qubits}-qubit statevector"),
        )?;
        let mut data = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        data[0] = Complex64::new(1.0, 0.0);
        Ok(QuantumState {
            n_qubits,
            kind: StateKind::Pure,
            data,
        })
    }

    /// |0…0⟩⟨0…0| as a density matrix.
    pub fn zero_density(n_qubits: usize, policy: &MemoryPolicy) -> Result<Self> {
        if n_qubits == 0 || n_qubits > DENSITY_QUBIT_LIMIT {
            return Err(Error::ResourceLimit(format!(
                "density matrices support 1..={DENSITY_QUBIT_LIMIT} qubits, got {n_qubits}"
            )));
        }
        policy.check(
            memory_required(StateKind::Density, n_qubits),
            &format!("{n_qubits}-qubit density matrix"),
        )?;
        let dim = 1usize << n_qubits;
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        data[0] = Complex64::new(1.0, 0.0);
        Ok(QuantumState {
            n_qubits,
            kind: StateKind::Density,
            data,
        })
    }

    /// Build a pure state from explicit amplitudes (must be normalised to
    /// within 1e-8).
    pub fn from_amplitudes(n_qubits: usize, data: Vec<Complex64>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > STATEVECTOR_QUBIT_LIMIT {
            return Err(Error::ResourceLimit(format!(
                "pure states support 1..={STATEVECTOR_QUBIT_LIMIT} qubits, got {n_qubits}"
            )));
        }
        if data.len() != 1 << n_qubits {
            return Err(Error::InvalidArgument(format!(
                "expected {} amplitudes for {n_qubits} qubits, got {}",
                1usize << n_qubits,
                data.len()
            )));
        }
        let norm: f64 = data.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidArgument(format!(
                "amplitudes have squared norm {norm}, expected 1"
            )));
        }
        Ok(QuantumState {
            n_qubits,
            kind: StateKind::Pure,
            data,
        })
    }

    /// Build a density state from explicit column-major entries. The trace
    /// must be 1 to within 1e-8; Hermiticity is the caller's concern.
    pub fn from_density(n_qubits: usize, data: Vec<Complex64>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > DENSITY_QUBIT_LIMIT {
            return Err(Error::ResourceLimit(format!(
                "density matrices support 1..={DENSITY_QUBIT_LIMIT} qubits, got {n_qubits}"
            )));
        }
        let dim = 1usize << n_qubits;
        if data.len() != dim * dim {
            return Err(Error::InvalidArgument(format!(
                "expected {} entries for a {n_qubits}-qubit density matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        let trace: Complex64 = (0..dim).map(|k| data[k + k * dim]).sum();
        if (trace - Complex64::new(1.0, 0.0)).norm() > 1e-8 {
            return Err(Error::InvalidArgument(format!(
                "density matrix has trace {trace}, expected 1"
            )));
        }
        Ok(QuantumState {
            n_qubits,
            kind: StateKind::Density,
            data,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn kind(&self) -> StateKind {
        self.kind
    }

    fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    /// Raw amplitudes (pure states only).
    pub fn amplitudes(&self) -> Result<&[Complex64]> {
        match self.kind {
            StateKind::Pure => Ok(&self.data),
            StateKind::Density => Err(Error::InvalidArgument(
                "amplitudes requested from a density state".into(),
            )),
        }
    }

    /// Raw column-major density entries (density states only).
    pub fn density_entries(&self) -> Result<&[Complex64]> {
        match self.kind {
            StateKind::Density => Ok(&self.data),
            StateKind::Pure => Err(Error::InvalidArgument(
                "density entries requested from a pure state".into(),
            )),
        }
    }

    /// |ψ⟩⟨ψ| of a pure state, as a new density state.
    pub fn to_density(&self, policy: &MemoryPolicy) -> Result<QuantumState> {
        let amps = self.amplitudes()?;
        if self.n_qubits > DENSITY_QUBIT_LIMIT {
            return Err(Error::ResourceLimit(format!(
                "density matrices support 1..={DENSITY_QUBIT_LIMIT} qubits, got {}",
                self.n_qubits
            )));
        }
        policy.check(
            memory_required(StateKind::Density, self.n_qubits),
            &format!("{}-qubit density matrix", self.n_qubits),
        )?;
        let dim = self.dim();
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for c in 0..dim {
            let bc = amps[c].conj();
            for r in 0..dim {
                data[r + c * dim] = amps[r] * bc;
            }
        }
        Ok(QuantumState {
            n_qubits: self.n_qubits,
            kind: StateKind::Density,
            data,
        })
    }

    /// ⟨ψ|ψ⟩ for pure states, Tr ρ for density states (real part).
    pub fn norm_or_trace(&self) -> f64 {
        match self.kind {
            StateKind::Pure => self.data.iter().map(|a| a.norm_sqr()).sum(),
            StateKind::Density => {
                let dim = self.dim();
                (0..dim).map(|k| self.data[k + k * dim].re).sum()
            }
        }
    }

    /// Error unless the norm (pure) or trace (density) is 1 within `tol`.
    pub fn check_consistency(&self, tol: f64) -> Result<()> {
        let v = self.norm_or_trace();
        if (v - 1.0).abs() > tol {
            return Err(Error::Numerical(format!(
                "state norm/trace drifted to {v}"
            )));
        }
        Ok(())
    }

    /// Apply a gate in place. Pure states get U|ψ⟩; density states get
    /// UρU†.
    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        match self.kind {
            StateKind::Pure => {
                apply_gate_slice(&mut self.data, self.n_qubits, gate);
            }
            StateKind::Density => {
                let dim = self.dim();
                // UρU†: apply U to every column, then U* to every row.
                for col in 0..dim {
                    apply_gate_strided(&mut self.data, col * dim, 1, self.n_qubits, gate, false);
                }
                for row in 0..dim {
                    apply_gate_strided(&mut self.data, row, dim, self.n_qubits, gate, true);
                }
            }
        }
        Ok(())
    }

    /// Apply every gate of a sequence in order.
    pub fn apply_gates(&mut self, gates: &[Gate]) -> Result<()> {
        for g in gates {
            self.apply_gate(g)?;
        }
        Ok(())
    }

    /// Apply an arbitrary single-qubit unitary, as produced by gate fusion.
    pub(crate) fn apply_matrix2(&mut self, qubit: usize, u: &Matrix2) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(Error::InvalidArgument(format!(
                "matrix on qubit {qubit} does not fit on {} qubits",
                self.n_qubits
            )));
        }
        match self.kind {
            StateKind::Pure => apply_1q_slice(&mut self.data, qubit, u),
            StateKind::Density => {
                let dim = self.dim();
                let uc: Matrix2 = [
                    [u[0][0].conj(), u[0][1].conj()],
                    [u[1][0].conj(), u[1][1].conj()],
                ];
                for col in 0..dim {
                    apply_1q_strided(&mut self.data, col * dim, 1, dim, qubit, u);
                }
                for row in 0..dim {
                    apply_1q_strided(&mut self.data, row, dim, dim, qubit, &uc);
                }
            }
        }
        Ok(())
    }

    /// Apply exp(−iφ P) for a Pauli string P, in place. This is the
    /// workhorse of product-formula evolution; it touches the state once
    /// per call rather than once per synthesised gate.
    pub fn apply_pauli_exponential(&mut self, string: &PauliString, phi: f64) -> Result<()> {
        if string.min_qubits() > self.n_qubits {
            return Err(Error::InvalidArgument(format!(
                "Pauli string {string} does not fit on {} qubits",
                self.n_qubits
            )));
        }
        match self.kind {
            StateKind::Pure => {
                apply_pauli_exp_slice(&mut self.data, string, phi);
            }
            StateKind::Density => {
                let dim = self.dim();
                for col in 0..dim {
                    apply_pauli_exp_strided(&mut self.data, col * dim, 1, dim, string, phi, false);
                }
                for row in 0..dim {
                    apply_pauli_exp_strided(&mut self.data, row, dim, dim, string, phi, true);
                }
            }
        }
        Ok(())
    }

    /// ⟨Z_q⟩ of the state.
    pub fn expectation_z(&self, qubit: usize) -> Result<f64> {
        if qubit >= self.n_qubits {
            return Err(Error::InvalidArgument(format!(
                "qubit {qubit} out of range for {} qubits",
                self.n_qubits
            )));
        }
        let bit = 1usize << qubit;
        match self.kind {
            StateKind::Pure => Ok(self
                .data
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    let sign = if i & bit == 0 { 1.0 } else { -1.0 };
                    sign * a.norm_sqr()
                })
                .sum()),
            StateKind::Density => {
                let dim = self.dim();
                Ok((0..dim)
                    .map(|k| {
                        let sign = if k & bit == 0 { 1.0 } else { -1.0 };
                        sign * self.data[k + k * dim].re
                    })
                    .sum())
            }
        }
    }

    /// Expectation of a Hermitian Pauli string.
    pub fn expectation_pauli(&self, string: &PauliString) -> Result<f64> {
        if string.min_qubits() > self.n_qubits {
            return Err(Error::InvalidArgument(format!(
                "Pauli string {string} does not fit on {} qubits",
                self.n_qubits
            )));
        }
        let x = string.x_mask() as usize;
        let z = string.z_mask() as usize;
        let base = phase_base(string);
        match self.kind {
            StateKind::Pure => {
                // ⟨ψ|P|ψ⟩ = Σ_j conj(ψ_{j^x}) · P_{j^x, j} · ψ_j.
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, a) in self.data.iter().enumerate() {
                    let ph = base * pauli_sign(j, z);
                    acc += self.data[j ^ x].conj() * ph * a;
                }
                Ok(acc.re)
            }
            StateKind::Density => {
                // Tr(ρP) = Σ_j P_{j^x ← j} ρ_{j, j^x} … row j^x picks column
                // entry: Tr(ρP) = Σ_{j} ρ_{j, j^x} P_{j^x, j}.
                let dim = self.dim();
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..dim {
                    let ph = base * pauli_sign(j, z);
                    acc += self.data[j + (j ^ x) * dim] * ph;
                }
                Ok(acc.re)
            }
        }
    }

    /// Multiply every stored entry by a real scalar (no validity check;
    /// used by channel mixtures that restore the trace afterwards).
    pub(crate) fn scale_data(&mut self, w: f64) {
        for v in &mut self.data {
            *v *= w;
        }
    }

    /// `data += w · other.data` entrywise (dimensions already checked by
    /// the caller).
    pub(crate) fn axpy_data(&mut self, other: &QuantumState, w: f64) {
        for (v, o) in self.data.iter_mut().zip(&other.data) {
            *v += w * o;
        }
    }

    /// Sample `shots` projective Z-basis measurements of one qubit.
    /// Returns the empirical ⟨Z⟩ (each shot is ±1) and its standard error
    /// `α = √(1−Z̄²)/√M` evaluated at the sampled mean.
    pub fn sample_z<R: Rng + ?Sized>(
        &self,
        qubit: usize,
        shots: usize,
        rng: &mut R,
    ) -> Result<(f64, f64)> {
        if shots == 0 {
            return Err(Error::InvalidArgument("sample_z needs at least one shot".into()));
        }
        let mean = self.expectation_z(qubit)?;
        let p_up = ((1.0 + mean) / 2.0).clamp(0.0, 1.0);
        let mut ups = 0usize;
        for _ in 0..shots {
            if rng.gen::<f64>() < p_up {
                ups += 1;
            }
        }
        let sampled = (2.0 * ups as f64 - shots as f64) / shots as f64;
        Ok((sampled, shot_standard_error(sampled, shots)))
    }
}

/// Standard error of the mean of `shots` ±1-valued measurements whose
/// expectation is `mean_z`.
pub fn shot_standard_error(mean_z: f64, shots: usize) -> f64 {
    ((1.0 - mean_z * mean_z).max(0.0) / shots as f64).sqrt()
}

// ---------------------------------------------------------------------------
// Low-level kernels. All operate on a logical vector whose element k lives
// at `data[offset + k * stride]`; the contiguous pure-state case uses
// offset 0, stride 1 and a fast path.
// ---------------------------------------------------------------------------

/// i^{#Y}, the index-independent part of a Pauli string's matrix elements.
fn phase_base(string: &PauliString) -> Complex64 {
    match (string.x_mask() & string.z_mask()).count_ones() % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// (−1)^{popcount(index & z_mask)} as a real scalar.
#[inline]
fn pauli_sign(index: usize, z_mask: usize) -> f64 {
    if (index & z_mask).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Apply a gate to a contiguous statevector.
pub(crate) fn apply_gate_slice(data: &mut [Complex64], n_qubits: usize, gate: &Gate) {
    debug_assert_eq!(data.len(), 1 << n_qubits);
    match *gate {
        Gate::Cnot { control, target } => {
            let (cb, tb) = (1usize << control, 1usize << target);
            for i in 0..data.len() {
                if i & cb != 0 && i & tb == 0 {
                    data.swap(i, i | tb);
                }
            }
        }
        Gate::CRy {
            control, target, ..
        }
        | Gate::CRz {
            control, target, ..
        } => {
            let u = gate.controlled_matrix2().unwrap();
            let (cb, tb) = (1usize << control, 1usize << target);
            apply_controlled_2x2(data, cb, tb, &u);
        }
        Gate::CCRy {
            control1,
            control2,
            target,
            ..
        } => {
            let u = gate.controlled_matrix2().unwrap();
            let cb = (1usize << control1) | (1usize << control2);
            let tb = 1usize << target;
            apply_controlled_2x2(data, cb, tb, &u);
        }
        _ => {
            let u = gate.matrix2().expect("single-qubit gate");
            let q = gate.qubits()[0];
            apply_1q_slice(data, q, &u);
        }
    }
}

/// Single-qubit unitary on a strided state vector of `len` amplitudes.
fn apply_1q_strided(
    data: &mut [Complex64],
    offset: usize,
    stride: usize,
    len: usize,
    qubit: usize,
    u: &Matrix2,
) {
    let bit = 1usize << qubit;
    let low = bit - 1;
    for k in 0..len >> 1 {
        let i = ((k & !low) << 1) | (k & low);
        let j = i | bit;
        let (ia, ja) = (offset + i * stride, offset + j * stride);
        let (a, b) = (data[ia], data[ja]);
        data[ia] = u[0][0] * a + u[0][1] * b;
        data[ja] = u[1][0] * a + u[1][1] * b;
    }
}

/// Single-qubit unitary on a contiguous statevector.
pub(crate) fn apply_1q_slice(data: &mut [Complex64], qubit: usize, u: &Matrix2) {
    let bit = 1usize << qubit;
    let low = bit - 1;
    let half = data.len() >> 1;
    for k in 0..half {
        let i = ((k & !low) << 1) | (k & low);
        let j = i | bit;
        let (a, b) = (data[i], data[j]);
        data[i] = u[0][0] * a + u[0][1] * b;
        data[j] = u[1][0] * a + u[1][1] * b;
    }
}

/// 2×2 unitary on the target bit, restricted to indices where every bit of
/// `control_mask` is set.
fn apply_controlled_2x2(data: &mut [Complex64], control_mask: usize, target_bit: usize, u: &Matrix2) {
    for i in 0..data.len() {
        if i & control_mask == control_mask && i & target_bit == 0 {
            let j = i | target_bit;
            let (a, b) = (data[i], data[j]);
            data[i] = u[0][0] * a + u[0][1] * b;
            data[j] = u[1][0] * a + u[1][1] * b;
        }
    }
}

/// Apply a gate (or its entrywise conjugate) to the strided logical vector
/// of length 2^n starting at `offset`.
fn apply_gate_strided(
    data: &mut [Complex64],
    offset: usize,
    stride: usize,
    n_qubits: usize,
    gate: &Gate,
    conjugate: bool,
) {
    let len = 1usize << n_qubits;
    let conj2 = |u: Matrix2| -> Matrix2 {
        if conjugate {
            [
                [u[0][0].conj(), u[0][1].conj()],
                [u[1][0].conj(), u[1][1].conj()],
            ]
        } else {
            u
        }
    };
    let mut pair_update = |i: usize, j: usize, u: &Matrix2| {
        let (ia, ja) = (offset + i * stride, offset + j * stride);
        let (a, b) = (data[ia], data[ja]);
        data[ia] = u[0][0] * a + u[0][1] * b;
        data[ja] = u[1][0] * a + u[1][1] * b;
    };
    match *gate {
        Gate::Cnot { control, target } => {
            let (cb, tb) = (1usize << control, 1usize << target);
            for i in 0..len {
                if i & cb != 0 && i & tb == 0 {
                    data.swap(offset + i * stride, offset + (i | tb) * stride);
                }
            }
        }
        Gate::CRy {
            control, target, ..
        }
        | Gate::CRz {
            control, target, ..
        } => {
            let u = conj2(gate.controlled_matrix2().unwrap());
            let (cb, tb) = (1usize << control, 1usize << target);
            for i in 0..len {
                if i & cb == cb && i & tb == 0 {
                    pair_update(i, i | tb, &u);
                }
            }
        }
        Gate::CCRy {
            control1,
            control2,
            target,
            ..
        } => {
            let u = conj2(gate.controlled_matrix2().unwrap());
            let cb = (1usize << control1) | (1usize << control2);
            let tb = 1usize << target;
            for i in 0..len {
                if i & cb == cb && i & tb == 0 {
                    pair_update(i, i | tb, &u);
                }
            }
        }
        _ => {
            let u = conj2(gate.matrix2().expect("single-qubit gate"));
            let bit = 1usize << gate.qubits()[0];
            let low = bit - 1;
            for k in 0..(len >> 1) {
                let i = ((k & !low) << 1) | (k & low);
                pair_update(i, i | bit, &u);
            }
        }
    }
}

/// exp(−iφP) on a contiguous statevector.
pub(crate) fn apply_pauli_exp_slice(data: &mut [Complex64], string: &PauliString, phi: f64) {
    let x = string.x_mask() as usize;
    let z = string.z_mask() as usize;
    if x == 0 && z == 0 {
        // Global phase e^{−iφ}.
        let ph = Complex64::from_polar(1.0, -phi);
        for a in data.iter_mut() {
            *a *= ph;
        }
        return;
    }
    let (c, s) = (phi.cos(), phi.sin());
    if x == 0 {
        // Diagonal string: amplitude i picks up e^{−iφ·(±1)}.
        let plus = Complex64::new(c, -s);
        let minus = Complex64::new(c, s);
        for (i, a) in data.iter_mut().enumerate() {
            *a *= if (i & z).count_ones() % 2 == 0 {
                plus
            } else {
                minus
            };
        }
        return;
    }
    // General string: cos φ − i sin φ · P mixes index pairs (i, i^x).
    let mis = Complex64::new(0.0, -s) * phase_base(string);
    let cr = Complex64::new(c, 0.0);
    let pivot = 1usize << x.trailing_zeros();
    for i in 0..data.len() {
        if i & pivot != 0 {
            continue;
        }
        let j = i ^ x;
        let (si, sj) = (pauli_sign(i, z), pauli_sign(j, z));
        let (a, b) = (data[i], data[j]);
        data[i] = cr * a + mis * sj * b;
        data[j] = cr * b + mis * si * a;
    }
}

/// exp(−iφP) (or its conjugate) on a strided logical vector.
fn apply_pauli_exp_strided(
    data: &mut [Complex64],
    offset: usize,
    stride: usize,
    len: usize,
    string: &PauliString,
    phi: f64,
    conjugate: bool,
) {
    let x = string.x_mask() as usize;
    let z = string.z_mask() as usize;
    let conj = |v: Complex64| if conjugate { v.conj() } else { v };
    if x == 0 && z == 0 {
        let ph = conj(Complex64::from_polar(1.0, -phi));
        for k in 0..len {
            data[offset + k * stride] *= ph;
        }
        return;
    }
    let (c, s) = (phi.cos(), phi.sin());
    if x == 0 {
        let plus = conj(Complex64::new(c, -s));
        let minus = conj(Complex64::new(c, s));
        for i in 0..len {
            data[offset + i * stride] *= if (i & z).count_ones() % 2 == 0 {
                plus
            } else {
                minus
            };
        }
        return;
    }
    let mis = conj(Complex64::new(0.0, -s) * phase_base(string));
    let cr = Complex64::new(c, 0.0);
    let pivot = 1usize << x.trailing_zeros();
    for i in 0..len {
        if i & pivot != 0 {
            continue;
        }
        let j = i ^ x;
        let (ia, ja) = (offset + i * stride, offset + j * stride);
        let (a, b) = (data[ia], data[ja]);
        data[ia] = cr * a + mis * pauli_sign(j, z) * b;
        data[ja] = cr * b + mis * pauli_sign(i, z) * a;
    }
}
