//! Analytic error bounds for product-formula evolution.
//!
//! Two families are provided. The *loose* bounds are the textbook scaling
//! laws `(LΛt)²/n` (first order) and `(LΛt)³/n²` (second order) with the
//! big-O constants set to one. The *tight* bounds are commutator sums:
//!
//! * first order — `(t²/2n) Σ_i ‖Σ_{j>i} [h_j H_j, h_i H_i]‖`, evaluated
//!   with the spectral norm of each inner sum;
//! * second order — the nested-commutator expression
//!   `(t³/n²)·[ (1/12) Σ_i Σ_{j>i} Σ_{k>i} ‖[h_k H_k, [h_j H_j, h_i H_i]]‖
//!   + (1/24) Σ_i Σ_{j>i} ‖[h_i H_i, [h_i H_i, h_j H_j]]‖ ]` with the norms
//!   inside the sums, which loosens it slightly but reduces every summand
//!   to a commutation test: nested commutators of Pauli strings are single
//!   strings of known norm.
//!
//! Spectral norms are computed densely up to [`NORM_QUBIT_LIMIT`] qubits;
//! larger systems fall back to the coefficient 1-norm and the report is
//! flagged as upper-bound-only. The randomized-compilation error scaling
//! `λ²t²/N` is also provided.
//!
//! Both tight bounds depend on the order in which the product formula
//! applies the terms, so the callers pass the same [`TermOrdering`] used
//! for the evolution. Per-step random permutations have no fixed term
//! order and are rejected.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::evolve::{ordered_terms, TermOrdering};
use crate::linalg::dense_pauli_terms;
use crate::pauli::{commutator, PauliString, PauliSum};

/// Largest register for which spectral norms are computed exactly via
/// dense eigendecomposition; beyond this the coefficient 1-norm is used
/// and flagged.
pub const NORM_QUBIT_LIMIT: usize = 12;

/// Loose and tight bounds for one product-formula configuration, with the
/// inputs they were computed from. All bound values are in spectral-norm
/// units (operator distance between the exact and approximated
/// propagator).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    /// Product-formula order (1 or 2).
    pub order: u8,
    /// Scaling-law bound with unit constants.
    pub loose: f64,
    /// Commutator-sum bound.
    pub tight: f64,
    /// True when the tight bound used the coefficient 1-norm instead of
    /// exact spectral norms (register above [`NORM_QUBIT_LIMIT`]), so it is
    /// an upper bound on the commutator expression rather than its value.
    pub tight_is_upper_bound_only: bool,
    /// Number of Hamiltonian terms L.
    pub terms: usize,
    /// Largest coefficient magnitude Λ.
    pub lambda_max: f64,
    /// Coefficient 1-norm λ.
    pub lambda_total: f64,
    /// Total evolution time in µs.
    pub time: f64,
    /// Step count n.
    pub steps: usize,
}

/// Scaling-law bound with unit constants: `(LΛt)²/n` for order 1,
/// `(LΛt)³/n²` for order 2.
pub fn trotter_bound_loose(order: u8, terms: usize, lambda_max: f64, t: f64, n: usize) -> Result<f64> {
    check_order_and_steps(order, n)?;
    let x = terms as f64 * lambda_max * t;
    Ok(match order {
        1 => x * x / n as f64,
        _ => x * x * x / (n as f64 * n as f64),
    })
}

/// Commutator-sum bound for the splitting whose steps apply the terms in
/// `ordering`. Returns the bound and a flag that is true when the inner
/// spectral norms had to be replaced by coefficient 1-norms (register wider
/// than [`NORM_QUBIT_LIMIT`]).
pub fn trotter_bound_tight(
    order: u8,
    h: &PauliSum,
    ordering: TermOrdering,
    t: f64,
    n: usize,
) -> Result<(f64, bool)> {
    check_order_and_steps(order, n)?;
    if ordering == TermOrdering::RandomPerStep {
        return Err(Error::InvalidArgument(
            "commutator bounds need a fixed term order, not a per-step permutation".into(),
        ));
    }
    let terms = ordered_terms(h, ordering);
    match order {
        1 => first_order_tight(&terms, h.min_qubits(), t, n),
        _ => Ok((second_order_tight(&terms, t, n), false)),
    }
}

/// `(t²/2n) Σ_i ‖Σ_{j>i} [h_j H_j, h_i H_i]‖` with exact inner norms where
/// the register allows.
fn first_order_tight(
    terms: &[(PauliString, f64)],
    n_qubits: usize,
    t: f64,
    n: usize,
) -> Result<(f64, bool)> {
    let mut total = 0.0;
    let mut flagged = false;
    for i in 0..terms.len() {
        let head = PauliSum::from_terms(vec![terms[i]]);
        let mut tail = PauliSum::zero();
        for &(s, c) in &terms[i + 1..] {
            tail.add_term(s, c);
        }
        let inner = commutator(&tail, &head);
        if inner.is_empty() {
            continue;
        }
        let (norm, exact) = spectral_norm_terms(&inner, n_qubits)?;
        flagged |= !exact;
        total += norm;
    }
    Ok((t * t / (2.0 * n as f64) * total, flagged))
}

/// The nested-commutator expression with norms inside the sums. Each
/// summand is the norm of a nested commutator of Pauli strings, which is
/// `4|h_k h_j h_i|` when both commutators are non-vanishing and 0
/// otherwise, so no matrices are ever formed.
fn second_order_tight(terms: &[(PauliString, f64)], t: f64, n: usize) -> f64 {
    let l = terms.len();
    let mut triple_sum = 0.0;
    let mut repeat_sum = 0.0;
    for i in 0..l {
        let (si, ci) = terms[i];
        for j in (i + 1)..l {
            let (sj, cj) = terms[j];
            if sj.commutes(&si) {
                continue;
            }
            // ‖[h_i H_i, [h_i H_i, h_j H_j]]‖: the inner commutator is a
            // string H_i anticommutes with whenever {H_i, H_j} = 0.
            repeat_sum += 4.0 * ci * ci * cj.abs();
            let (product, _) = sj.mul(&si);
            for &(sk, ck) in &terms[i + 1..] {
                if !sk.commutes(&product) {
                    triple_sum += 4.0 * (ck * cj * ci).abs();
                }
            }
        }
    }
    t.powi(3) / (n as f64 * n as f64) * (triple_sum / 12.0 + repeat_sum / 24.0)
}

/// Randomized-compilation error scaling `λ²t²/N`.
pub fn qdrift_error_bound(lambda: f64, t: f64, samples: usize) -> Result<f64> {
    if samples == 0 {
        return Err(Error::InvalidArgument(
            "randomized evolution needs at least one sample".into(),
        ));
    }
    Ok(lambda * lambda * t * t / samples as f64)
}

/// Both bounds plus their inputs for one configuration.
pub fn bound_report(
    order: u8,
    h: &PauliSum,
    ordering: TermOrdering,
    t: f64,
    n: usize,
) -> Result<BoundReport> {
    let terms = h.len();
    let lambda_max = h.max_abs_coefficient();
    let loose = trotter_bound_loose(order, terms, lambda_max, t, n)?;
    let (tight, flagged) = trotter_bound_tight(order, h, ordering, t, n)?;
    Ok(BoundReport {
        order,
        loose,
        tight,
        tight_is_upper_bound_only: flagged,
        terms,
        lambda_max,
        lambda_total: h.coefficient_one_norm(),
        time: t,
        steps: n,
    })
}

/// Spectral norm of a complex-coefficient Pauli term list: exact (dense)
/// up to [`NORM_QUBIT_LIMIT`] qubits, otherwise the coefficient 1-norm.
/// Returns `(norm, exact)`.
pub fn spectral_norm_terms(
    terms: &[(PauliString, Complex64)],
    n_qubits: usize,
) -> Result<(f64, bool)> {
    if terms.is_empty() {
        return Ok((0.0, true));
    }
    let width = terms
        .iter()
        .map(|(s, _)| s.min_qubits())
        .max()
        .unwrap()
        .max(n_qubits.min(NORM_QUBIT_LIMIT))
        .max(1);
    if width > NORM_QUBIT_LIMIT {
        let one_norm = terms.iter().map(|(_, c)| c.norm()).sum();
        return Ok((one_norm, false));
    }
    let dense = dense_pauli_terms(width, terms)?;
    Ok((dense.spectral_norm()?, true))
}

fn check_order_and_steps(order: u8, n: usize) -> Result<()> {
    if order != 1 && order != 2 {
        return Err(Error::InvalidArgument(format!(
            "product-formula order must be 1 or 2, got {order}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument(
            "bounds need at least one step".into(),
        ));
    }
    Ok(())
}
