//! Product-formula and randomized time evolution.
//!
//! The evolution operator `e^{−iHt}` for a Hamiltonian given as a real
//! Pauli sum `H = Σ_α h_α H_α` is approximated by one of three schemes:
//!
//! * **First-order splitting** — `(Π_j e^{−i(t/n)h_j H_j})^n`.
//! * **Second-order splitting** — each step applies all term exponentials
//!   for half the step duration and then the same exponentials in reverse
//!   order, suppressing the error by one more power of the step size.
//! * **Randomized compilation** — each of the `N` steps samples one term
//!   with probability `|h_j|/λ` (λ = Σ|h_j|) and evolves under it for the
//!   fixed angle `λt/N`, with negative coefficients folded into the
//!   operator so the sampling weights stay positive.
//!
//! The same exponential sequence drives three backends: direct state
//! evolution ([`evolve`]), gate synthesis for resource counting
//! ([`evolution_circuit`]), and a dense one-step matrix for mixed-state
//! references ([`dense_step_unitary`]). Exactness in the analytically exact
//! cases (all terms commuting, or a single sampled term) is covered by the
//! unit tests.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::gates::Gate;
use crate::linalg::{CMatrix, DENSE_QUBIT_LIMIT};
use crate::pauli::{Pauli, PauliString, PauliSum};
use crate::state::{self, MemoryPolicy, QuantumState};

/// Splitting scheme for the evolution operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// First-order product formula.
    Trotter1,
    /// Second-order (symmetrized) product formula.
    Trotter2,
    /// Randomized term-sampling compilation.
    QDrift,
}

/// Order in which the Hamiltonian terms appear inside each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermOrdering {
    /// Largest |coefficient| first; ties broken by the canonical string
    /// order, so the sequence is deterministic.
    Magnitude,
    /// The sum's stored order (canonical string order).
    Input,
    /// A fresh uniformly random permutation in every step. The second-order
    /// method reverses the same permutation within the step.
    RandomPerStep,
}

/// A complete prescription for one evolution: scheme, term ordering, total
/// time and step count (the sample count for the randomized scheme).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionPlan {
    pub method: Method,
    pub ordering: TermOrdering,
    /// Total evolution time in µs.
    pub time: f64,
    /// Number of steps (splitting) or samples (randomized).
    pub steps: usize,
}

impl EvolutionPlan {
    pub fn new(method: Method, ordering: TermOrdering, time: f64, steps: usize) -> Result<Self> {
        let plan = EvolutionPlan {
            method,
            ordering,
            time,
            steps,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidArgument(
                "evolution plan needs at least one step".into(),
            ));
        }
        if !self.time.is_finite() || self.time < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "evolution time must be finite and non-negative, got {}",
                self.time
            )));
        }
        Ok(())
    }
}

/// Hamiltonian terms in the order requested. `RandomPerStep` returns the
/// stored order here; the per-step shuffle happens while the exponential
/// sequence is generated.
pub fn ordered_terms(h: &PauliSum, ordering: TermOrdering) -> Vec<(PauliString, f64)> {
    let mut terms = h.terms().to_vec();
    if ordering == TermOrdering::Magnitude {
        // Stable sort over the canonical stored order, so equal magnitudes
        // keep their canonical relative order.
        terms.sort_by(|a, b| {
            b.1.abs()
                .partial_cmp(&a.1.abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
    }
    terms
}

fn validate_hamiltonian(h: &PauliSum) -> Result<()> {
    for &(s, c) in h.terms() {
        if !c.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "Hamiltonian coefficient for {s} is not finite: {c}"
            )));
        }
    }
    Ok(())
}

/// Exponentials of one splitting step of duration `dt`, as `(string, φ)`
/// pairs meaning `exp(−iφP)`.
fn step_exponentials(
    terms: &[(PauliString, f64)],
    method: Method,
    dt: f64,
    out: &mut Vec<(PauliString, f64)>,
) {
    match method {
        Method::Trotter1 => {
            for &(s, c) in terms {
                out.push((s, c * dt));
            }
        }
        Method::Trotter2 => {
            for &(s, c) in terms {
                out.push((s, c * dt / 2.0));
            }
            for &(s, c) in terms.iter().rev() {
                out.push((s, c * dt / 2.0));
            }
        }
        Method::QDrift => unreachable!("randomized steps are sampled, not split"),
    }
}

/// The full evolution as a flat sequence of Pauli exponentials
/// `(string, φ)`, each meaning `exp(−iφP)`, in application order.
///
/// The generator only draws from `rng` for the randomized scheme and the
/// per-step-permutation ordering; deterministic plans consume no
/// randomness.
pub fn evolution_exponentials<R: Rng + ?Sized>(
    h: &PauliSum,
    plan: &EvolutionPlan,
    rng: &mut R,
) -> Result<Vec<(PauliString, f64)>> {
    plan.validate()?;
    validate_hamiltonian(h)?;
    if h.is_empty() {
        return Ok(Vec::new());
    }
    match plan.method {
        Method::Trotter1 | Method::Trotter2 => {
            let mut terms = ordered_terms(h, plan.ordering);
            let dt = plan.time / plan.steps as f64;
            let per_step = match plan.method {
                Method::Trotter1 => terms.len(),
                Method::Trotter2 => 2 * terms.len(),
                Method::QDrift => unreachable!(),
            };
            let mut out = Vec::with_capacity(per_step * plan.steps);
            for _ in 0..plan.steps {
                if plan.ordering == TermOrdering::RandomPerStep {
                    terms.shuffle(rng);
                }
                step_exponentials(&terms, plan.method, dt, &mut out);
            }
            Ok(out)
        }
        Method::QDrift => {
            let terms = h.terms();
            let lambda = h.coefficient_one_norm();
            let weights: Vec<f64> = terms.iter().map(|&(_, c)| c.abs()).collect();
            let dist = WeightedIndex::new(&weights).map_err(|e| {
                Error::InvalidArgument(format!("randomized term sampling failed: {e}"))
            })?;
            // Signs are folded into the operators: the sampled angle carries
            // sign(h_j) so every sampling weight is positive.
            let phi = lambda * plan.time / plan.steps as f64;
            let mut out = Vec::with_capacity(plan.steps);
            for _ in 0..plan.steps {
                let j = dist.sample(rng);
                out.push((terms[j].0, phi * terms[j].1.signum()));
            }
            Ok(out)
        }
    }
}

/// Evolve a state in place under `e^{−iHt}` following `plan`.
///
/// Works on both pure states and density matrices; the state must be wide
/// enough for every Hamiltonian term. The result is exact (up to rounding)
/// whenever all terms mutually commute, and the randomized scheme is exact
/// for a single-term Hamiltonian.
pub fn evolve<R: Rng + ?Sized>(
    state: &mut QuantumState,
    h: &PauliSum,
    plan: &EvolutionPlan,
    rng: &mut R,
) -> Result<()> {
    if h.min_qubits() > state.n_qubits() {
        return Err(Error::InvalidArgument(format!(
            "Hamiltonian touches qubit {} but the state has {} qubits",
            h.min_qubits() - 1,
            state.n_qubits()
        )));
    }
    for (s, phi) in evolution_exponentials(h, plan, rng)? {
        state.apply_pauli_exponential(&s, phi)?;
    }
    Ok(())
}

/// Gate sequence implementing `exp(−iφP)` for a single Pauli string.
///
/// Pattern: a basis change on every non-identity factor (H for X,
/// `Rx(π/2)` for Y), a CNOT parity ladder up the support, `Rz(2φ)` on the
/// highest support qubit, then the mirrored unwind (`Rx(−π/2)` undoing Y
/// factors). Identity factors contribute no gates; a weight-1 Z factor is a
/// bare `Rz(2φ)`; the weight-0 string is a global phase and synthesizes to
/// an empty sequence.
pub fn synthesize_pauli_exponential(string: &PauliString, phi: f64) -> Vec<Gate> {
    let support: Vec<usize> = string.factors().iter().map(|&(q, _)| q).collect();
    if support.is_empty() {
        return Vec::new();
    }
    let mut gates = Vec::with_capacity(4 * support.len());
    for &(q, p) in &string.factors() {
        match p {
            Pauli::X => gates.push(Gate::H(q)),
            Pauli::Y => gates.push(Gate::Rx(q, std::f64::consts::FRAC_PI_2)),
            Pauli::Z | Pauli::I => {}
        }
    }
    for w in support.windows(2) {
        gates.push(Gate::Cnot {
            control: w[0],
            target: w[1],
        });
    }
    let top = *support.last().unwrap();
    gates.push(Gate::Rz(top, 2.0 * phi));
    for w in support.windows(2).rev() {
        gates.push(Gate::Cnot {
            control: w[0],
            target: w[1],
        });
    }
    for &(q, p) in string.factors().iter().rev() {
        match p {
            Pauli::X => gates.push(Gate::H(q)),
            Pauli::Y => gates.push(Gate::Rx(q, -std::f64::consts::FRAC_PI_2)),
            Pauli::Z | Pauli::I => {}
        }
    }
    gates
}

/// The whole evolution compiled to gates, exponential by exponential.
pub fn evolution_circuit<R: Rng + ?Sized>(
    h: &PauliSum,
    plan: &EvolutionPlan,
    rng: &mut R,
) -> Result<Vec<Gate>> {
    let mut gates = Vec::new();
    for (s, phi) in evolution_exponentials(h, plan, rng)? {
        gates.extend(synthesize_pauli_exponential(&s, phi));
    }
    Ok(gates)
}

/// Dense matrix of a single splitting step, for plans whose steps are all
/// identical (deterministic ordering, non-randomized method). The full
/// propagator is the matrix power `U_step^steps`, which callers form with
/// [`CMatrix::pow`] so the cost of building the step matrix is paid once.
pub fn dense_step_unitary(
    h: &PauliSum,
    n_qubits: usize,
    plan: &EvolutionPlan,
    policy: &MemoryPolicy,
) -> Result<CMatrix> {
    plan.validate()?;
    validate_hamiltonian(h)?;
    if plan.method == Method::QDrift || plan.ordering == TermOrdering::RandomPerStep {
        return Err(Error::InvalidArgument(
            "a fixed step matrix needs a deterministic splitting plan".into(),
        ));
    }
    if h.min_qubits() > n_qubits {
        return Err(Error::InvalidArgument(format!(
            "Hamiltonian touches qubit {} but the register has {} qubits",
            h.min_qubits() - 1,
            n_qubits
        )));
    }
    if n_qubits > DENSE_QUBIT_LIMIT {
        return Err(Error::ResourceLimit(format!(
            "dense step matrix requested for {n_qubits} qubits; \
             the dense-method limit is {DENSE_QUBIT_LIMIT} qubits"
        )));
    }
    let dim = 1usize << n_qubits;
    policy.check_allocation(
        (dim as u128) * (dim as u128) * 16,
        "dense evolution step matrix",
    )?;
    let terms = ordered_terms(h, plan.ordering);
    let dt = plan.time / plan.steps as f64;
    let mut sequence = Vec::new();
    step_exponentials(&terms, plan.method, dt, &mut sequence);
    let mut u = CMatrix::identity(dim);
    // Each exponential left-multiplies the accumulated matrix, i.e. acts on
    // every column as if it were a state vector.
    for (s, phi) in sequence {
        for col in 0..dim {
            state::apply_pauli_exp_slice(u.column_mut(col), &s, phi);
        }
    }
    Ok(u)
}
