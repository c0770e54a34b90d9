//! Sparse Pauli-string algebra on up to 64 qubits.
//!
//! A [`PauliString`] is stored as a pair of bit masks in the symplectic
//! representation: bit `q` of `x` marks an X factor on qubit `q`, bit `q` of
//! `z` a Z factor, and both bits together a Y factor. Products, commutation
//! tests and commutators are evaluated symbolically from the masks, so the
//! algebra never touches a matrix. The phase bookkeeping uses the canonical
//! Hermitian convention `P(x, z) = ⊗_q i^{x_q z_q} X^{x_q} Z^{z_q}`, i.e.
//! each factor is the usual Hermitian X, Y or Z.
//!
//! [`PauliSum`] is a real-coefficient linear combination kept in canonical
//! form: strings sorted, duplicates merged, and coefficients below
//! [`COEFF_EPSILON`] dropped. Real coefficients are exactly the Hermitian
//! operators expressible in this basis, which is all the Hamiltonians built
//! by this crate.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Coefficients with magnitude below this are treated as exact zeros and
/// removed during canonicalisation.
pub const COEFF_EPSILON: f64 = 1e-12;

/// Single-qubit Pauli factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn masks(self) -> (u64, u64) {
        match self {
            Pauli::I => (0, 0),
            Pauli::X => (1, 0),
            Pauli::Y => (1, 1),
            Pauli::Z => (0, 1),
        }
    }

    /// Ordering rank used for the canonical string order: X < Y < Z < I at
    /// each position, so strings supported on lower qubits sort first.
    fn rank(self) -> u8 {
        match self {
            Pauli::X => 0,
            Pauli::Y => 1,
            Pauli::Z => 2,
            Pauli::I => 3,
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        };
        write!(f, "{c}")
    }
}

/// Tensor product of single-qubit Pauli factors, identity elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    x: u64,
    z: u64,
}

impl PauliString {
    pub const MAX_QUBITS: usize = 64;

    /// The identity string.
    pub fn identity() -> Self {
        PauliString { x: 0, z: 0 }
    }

    /// Single non-identity factor `p` on qubit `q`.
    pub fn single(q: usize, p: Pauli) -> Result<Self> {
        if q >= Self::MAX_QUBITS {
            return Err(Error::InvalidArgument(format!(
                "qubit index {q} exceeds the {}-qubit limit",
                Self::MAX_QUBITS
            )));
        }
        let (x, z) = p.masks();
        Ok(PauliString { x: x << q, z: z << q })
    }

    /// Build from `(qubit, factor)` pairs. Indices must be distinct;
    /// identity factors are ignored.
    pub fn from_factors(factors: &[(usize, Pauli)]) -> Result<Self> {
        let mut s = PauliString::identity();
        for &(q, p) in factors {
            if q >= Self::MAX_QUBITS {
                return Err(Error::InvalidArgument(format!(
                    "qubit index {q} exceeds the {}-qubit limit",
                    Self::MAX_QUBITS
                )));
            }
            if p == Pauli::I {
                continue;
            }
            let bit = 1u64 << q;
            if (s.x | s.z) & bit != 0 {
                return Err(Error::InvalidArgument(format!(
                    "duplicate factor on qubit {q}"
                )));
            }
            let (x, z) = p.masks();
            s.x |= x << q;
            s.z |= z << q;
        }
        Ok(s)
    }

    /// Factor on qubit `q`.
    pub fn letter(&self, q: usize) -> Pauli {
        let x = (self.x >> q) & 1;
        let z = (self.z >> q) & 1;
        match (x, z) {
            (0, 0) => Pauli::I,
            (1, 0) => Pauli::X,
            (1, 1) => Pauli::Y,
            (0, 1) => Pauli::Z,
            _ => unreachable!(),
        }
    }

    /// Non-identity factors as `(qubit, factor)` pairs with strictly
    /// increasing qubit indices.
    pub fn factors(&self) -> Vec<(usize, Pauli)> {
        let mut out = Vec::with_capacity(self.weight() as usize);
        let mut support = self.x | self.z;
        while support != 0 {
            let q = support.trailing_zeros() as usize;
            out.push((q, self.letter(q)));
            support &= support - 1;
        }
        out
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    /// Mask of qubits carrying a non-identity factor.
    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    /// Mask of qubits whose basis state is flipped by this string
    /// (X and Y factors).
    pub fn x_mask(&self) -> u64 {
        self.x
    }

    /// Mask of qubits contributing a sign/phase in the computational basis
    /// (Z and Y factors).
    pub fn z_mask(&self) -> u64 {
        self.z
    }

    /// Action on a computational-basis column: `P|col⟩ = value·|row⟩` with
    /// `row = col ⊕ x_mask`. Equivalently, the position and value of the
    /// single non-zero entry in column `col` of the dense matrix, so dense
    /// representations and matrix-free products can be assembled in
    /// O(dim) per string.
    pub fn column_action(&self, col: u64) -> (u64, Complex64) {
        let base = match (self.x & self.z).count_ones() % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        let sign = if (col & self.z).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        (col ^ self.x, base * sign)
    }

    /// Index of the highest qubit touched, plus one (0 for the identity).
    pub fn min_qubits(&self) -> usize {
        let support = self.x | self.z;
        if support == 0 {
            0
        } else {
            64 - support.leading_zeros() as usize
        }
    }

    /// True when the two strings commute. Pauli strings either commute or
    /// anticommute; the test is the parity of the symplectic form.
    pub fn commutes(&self, other: &PauliString) -> bool {
        let anti = (self.x & other.z).count_ones() + (self.z & other.x).count_ones();
        anti % 2 == 0
    }

    /// Symbolic product: `self · other = i^k · string`, with `k` in 0..4.
    pub fn mul(&self, other: &PauliString) -> (PauliString, u8) {
        let x3 = self.x ^ other.x;
        let z3 = self.z ^ other.z;
        let t1 = (self.x & self.z).count_ones();
        let t2 = (other.x & other.z).count_ones();
        let t3 = (x3 & z3).count_ones();
        let cross = (self.z & other.x).count_ones();
        // i^(t1 + t2 + 2·cross − t3); fold into 0..4.
        let k = (t1 + t2 + 2 * cross + 4 * 64 - t3) % 4;
        (PauliString { x: x3, z: z3 }, k as u8)
    }

    /// Canonical total order: compare factors qubit by qubit, X < Y < Z < I
    /// at each position. Used for deterministic term ordering and
    /// tie-breaking.
    pub fn canonical_cmp(&self, other: &PauliString) -> std::cmp::Ordering {
        let mut support = (self.x | self.z) | (other.x | other.z);
        while support != 0 {
            let q = support.trailing_zeros() as usize;
            let a = self.letter(q).rank();
            let b = other.letter(q).rank();
            match a.cmp(&b) {
                std::cmp::Ordering::Equal => {}
                o => return o,
            }
            support &= support - 1;
        }
        std::cmp::Ordering::Equal
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.weight() == 0 {
            return write!(f, "I");
        }
        let mut first = true;
        for (q, p) in self.factors() {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{p}{q}")?;
            first = false;
        }
        Ok(())
    }
}

/// Real-coefficient linear combination of Pauli strings in canonical form.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    terms: Vec<(PauliString, f64)>,
}

impl PauliSum {
    pub fn zero() -> Self {
        PauliSum { terms: Vec::new() }
    }

    /// Canonicalise a raw term list: merge duplicates, sort, drop
    /// coefficients below [`COEFF_EPSILON`].
    pub fn from_terms(terms: Vec<(PauliString, f64)>) -> Self {
        let mut sum = PauliSum { terms };
        sum.canonicalise();
        sum
    }

    fn canonicalise(&mut self) {
        self.terms
            .sort_by(|(a, _), (b, _)| a.canonical_cmp(b));
        let mut merged: Vec<(PauliString, f64)> = Vec::with_capacity(self.terms.len());
        for &(s, c) in &self.terms {
            match merged.last_mut() {
                Some((last, acc)) if *last == s => *acc += c,
                _ => merged.push((s, c)),
            }
        }
        merged.retain(|&(_, c)| c.abs() >= COEFF_EPSILON);
        self.terms = merged;
    }

    pub fn add_term(&mut self, s: PauliString, c: f64) {
        self.terms.push((s, c));
        self.canonicalise();
    }

    pub fn add(&self, other: &PauliSum) -> PauliSum {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        PauliSum::from_terms(terms)
    }

    pub fn scale(&self, k: f64) -> PauliSum {
        PauliSum::from_terms(self.terms.iter().map(|&(s, c)| (s, c * k)).collect())
    }

    pub fn terms(&self) -> &[(PauliString, f64)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Σ|c|: the qDRIFT λ and the crude-norm fallback.
    pub fn coefficient_one_norm(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.abs()).sum()
    }

    /// max|c|: the Λ entering the loose Trotter bounds.
    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms
            .iter()
            .map(|(_, c)| c.abs())
            .fold(0.0, f64::max)
    }

    /// Smallest register size holding every term.
    pub fn min_qubits(&self) -> usize {
        self.terms
            .iter()
            .map(|(s, _)| s.min_qubits())
            .max()
            .unwrap_or(0)
    }

    /// Operator product. The product of two Hermitian sums is in general not
    /// Hermitian; this returns the complex-coefficient expansion.
    pub fn mul_complex(&self, other: &PauliSum) -> Vec<(PauliString, Complex64)> {
        let mut out: Vec<(PauliString, Complex64)> = Vec::new();
        for &(a, ca) in &self.terms {
            for &(b, cb) in &other.terms {
                let (s, k) = a.mul(&b);
                out.push((s, Complex64::i().powu(k as u32) * ca * cb));
            }
        }
        canonicalise_complex(out)
    }

    /// Operator product that must come out Hermitian (real coefficients).
    /// Errors if any imaginary residue survives cancellation.
    pub fn mul_hermitian(&self, other: &PauliSum) -> Result<PauliSum> {
        let prod = self.mul_complex(other);
        let mut terms = Vec::with_capacity(prod.len());
        for (s, c) in prod {
            if c.im.abs() >= COEFF_EPSILON {
                return Err(Error::Numerical(format!(
                    "product has non-Hermitian component {:.3e} on {s}",
                    c.im
                )));
            }
            terms.push((s, c.re));
        }
        Ok(PauliSum::from_terms(terms))
    }
}

/// Canonicalise a complex-coefficient term list (sort, merge, drop tiny).
pub fn canonicalise_complex(
    mut terms: Vec<(PauliString, Complex64)>,
) -> Vec<(PauliString, Complex64)> {
    terms.sort_by(|(a, _), (b, _)| a.canonical_cmp(b));
    let mut merged: Vec<(PauliString, Complex64)> = Vec::with_capacity(terms.len());
    for &(s, c) in &terms {
        match merged.last_mut() {
            Some((last, acc)) if *last == s => *acc += c,
            _ => merged.push((s, c)),
        }
    }
    merged.retain(|&(_, c)| c.norm() >= COEFF_EPSILON);
    merged
}

/// Symbolic commutator `[A, B] = AB − BA` of two sums, complex coefficients.
pub fn commutator(a: &PauliSum, b: &PauliSum) -> Vec<(PauliString, Complex64)> {
    let mut out: Vec<(PauliString, Complex64)> = Vec::new();
    for &(p, cp) in a.terms() {
        for &(q, cq) in b.terms() {
            // [P, Q] = 0 when the strings commute, 2·PQ otherwise.
            if p.commutes(&q) {
                continue;
            }
            let (s, k) = p.mul(&q);
            out.push((s, Complex64::i().powu(k as u32) * (2.0 * cp * cq)));
        }
    }
    canonicalise_complex(out)
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (s, c)) in self.terms.iter().enumerate() {
            if i == 0 {
                write!(f, "{c:+.6e}·({s})")?;
            } else {
                write!(f, " {c:+.6e}·({s})")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(factors: &[(usize, Pauli)]) -> PauliString {
        PauliString::from_factors(factors).unwrap()
    }

    #[test]
    fn single_qubit_products() {
        let x = s(&[(0, Pauli::X)]);
        let y = s(&[(0, Pauli::Y)]);
        let z = s(&[(0, Pauli::Z)]);
        // XY = iZ, YX = −iZ, XZ = −iY, ZX = iY, YZ = iX, ZY = −iX
        assert_eq!(x.mul(&y), (z, 1));
        assert_eq!(y.mul(&x), (z, 3));
        assert_eq!(x.mul(&z), (y, 3));
        assert_eq!(z.mul(&x), (y, 1));
        assert_eq!(y.mul(&z), (x, 1));
        assert_eq!(z.mul(&y), (x, 3));
        // squares are the identity with no phase
        for p in [x, y, z] {
            assert_eq!(p.mul(&p), (PauliString::identity(), 0));
        }
    }

    #[test]
    fn commutation_rules() {
        let xx = s(&[(0, Pauli::X), (1, Pauli::X)]);
        let zz = s(&[(0, Pauli::Z), (1, Pauli::Z)]);
        let zi = s(&[(0, Pauli::Z)]);
        assert!(xx.commutes(&zz)); // two anticommuting sites: overall commute
        assert!(!xx.commutes(&zi));
        assert!(zz.commutes(&zi));
    }

    #[test]
    fn factor_round_trip() {
        let p = s(&[(3, Pauli::Y), (0, Pauli::X), (7, Pauli::Z)]);
        assert_eq!(
            p.factors(),
            vec![(0, Pauli::X), (3, Pauli::Y), (7, Pauli::Z)]
        );
        assert_eq!(p.weight(), 3);
        assert_eq!(p.min_qubits(), 8);
        assert_eq!(p.to_string(), "X0 Y3 Z7");
    }

    #[test]
    fn duplicate_factor_rejected() {
        assert!(PauliString::from_factors(&[(0, Pauli::X), (0, Pauli::Z)]).is_err());
    }

    #[test]
    fn sum_canonicalisation_merges_and_drops() {
        let xx = s(&[(0, Pauli::X), (1, Pauli::X)]);
        let zz = s(&[(0, Pauli::Z), (1, Pauli::Z)]);
        let sum = PauliSum::from_terms(vec![(xx, 0.25), (zz, 1.0), (xx, 0.75), (zz, -1.0)]);
        assert_eq!(sum.len(), 1);
        assert_eq!(sum.terms()[0], (xx, 1.0));
    }

    #[test]
    fn commutator_of_commuting_sums_is_empty() {
        let xx = PauliSum::from_terms(vec![(s(&[(0, Pauli::X), (1, Pauli::X)]), 0.5)]);
        let zz = PauliSum::from_terms(vec![(s(&[(0, Pauli::Z), (1, Pauli::Z)]), 0.25)]);
        assert!(commutator(&xx, &zz).is_empty());
    }

    #[test]
    fn commutator_matches_single_qubit_algebra() {
        // [Z, X] = 2iY
        let z = PauliSum::from_terms(vec![(s(&[(0, Pauli::Z)]), 1.0)]);
        let x = PauliSum::from_terms(vec![(s(&[(0, Pauli::X)]), 1.0)]);
        let c = commutator(&z, &x);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].0, s(&[(0, Pauli::Y)]));
        assert!((c[0].1 - Complex64::new(0.0, 2.0)).norm() < 1e-15);
    }
}
