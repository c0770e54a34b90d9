//! Spin particles and their qubit embedding.
//!
//! A spin-s particle is represented on 2s qubits: the (2s+1)-dimensional
//! spin multiplet is identified with the symmetric (Dicke) subspace of the
//! qubit register, with the projection eigenstate of quantum number m
//! mapped to the equal superposition of all bitstrings of Hamming weight
//! `s − m`. Under this embedding each spin operator becomes a sum of
//! single-qubit Paulis with coefficient ½ — the operators obey the su(2)
//! algebra exactly on the full qubit space and never map symmetric states
//! out of the symmetric subspace.
//!
//! [`QubitLayout`] assigns particles to contiguous, ascending qubit ranges
//! in input order, so a given particle list always produces the same
//! circuit layout.

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, PauliSum};

/// Muon gyromagnetic ratio, rad·µs⁻¹·T⁻¹ (γ_µ/2π = 135.5 MHz·T⁻¹).
pub const GAMMA_MU: f64 = 2.0 * std::f64::consts::PI * 135.5;

/// ¹⁹F gyromagnetic ratio, rad·µs⁻¹·T⁻¹ (γ_F/2π = 40.06 MHz·T⁻¹).
pub const GAMMA_F19: f64 = 2.0 * std::f64::consts::PI * 40.06;

/// Largest supported spin (covers all nuclei of practical interest here).
pub const MAX_SPIN: Spin = Spin { twice: 9 };

/// Half-integer spin quantum number, stored as 2s to stay exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Spin {
    twice: u32,
}

impl Spin {
    pub const HALF: Spin = Spin { twice: 1 };
    pub const ONE: Spin = Spin { twice: 2 };
    pub const THREE_HALVES: Spin = Spin { twice: 3 };

    /// Construct from 2s. Rejects zero and values beyond [`MAX_SPIN`].
    pub fn from_twice(twice: u32) -> Result<Spin> {
        if twice == 0 {
            return Err(Error::InvalidArgument(
                "spin must be a positive multiple of 1/2".into(),
            ));
        }
        if twice > MAX_SPIN.twice {
            return Err(Error::InvalidArgument(format!(
                "spin {}/2 exceeds the supported maximum {}/2",
                twice, MAX_SPIN.twice
            )));
        }
        Ok(Spin { twice })
    }

    /// Construct from s as a float; must be a positive multiple of 1/2.
    pub fn from_value(s: f64) -> Result<Spin> {
        let twice = 2.0 * s;
        if twice <= 0.0 || twice.fract() != 0.0 || !twice.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "spin {s} is not a positive multiple of 1/2"
            )));
        }
        Spin::from_twice(twice as u32)
    }

    /// 2s.
    pub fn twice(self) -> u32 {
        self.twice
    }

    /// s as a float.
    pub fn value(self) -> f64 {
        self.twice as f64 / 2.0
    }

    /// Qubits needed to embed the particle: 2s.
    pub fn n_qubits(self) -> usize {
        self.twice as usize
    }

    /// Multiplet dimension 2s+1.
    pub fn dimension(self) -> usize {
        self.twice as usize + 1
    }

    /// Projection quantum numbers m as 2m, descending from +2s to −2s in
    /// steps of 2 (each corresponds to one Dicke level).
    pub fn projections_twice(self) -> impl Iterator<Item = i32> {
        let t = self.twice as i32;
        (0..=self.twice).map(move |k| t - 2 * k as i32)
    }
}

/// Quadrupole coupling parameters for nuclei with s > 1/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadrupoleParams {
    /// Electric quadrupole moment Q, barn.
    pub moment_barn: f64,
    /// Sternheimer anti-shielding factor γ∞ (enters as 1+γ∞).
    pub anti_shielding: f64,
}

/// A spin-carrying particle at a fixed site.
#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub label: String,
    pub spin: Spin,
    /// Gyromagnetic ratio, rad·µs⁻¹·T⁻¹.
    pub gamma: f64,
    /// Site position, Å.
    pub position: [f64; 3],
    /// Present only for s > 1/2 nuclei in a nonzero field gradient.
    pub quadrupole: Option<QuadrupoleParams>,
}

impl Particle {
    pub fn new(label: impl Into<String>, spin: Spin, gamma: f64, position: [f64; 3]) -> Particle {
        Particle {
            label: label.into(),
            spin,
            gamma,
            position,
            quadrupole: None,
        }
    }

    /// Attach quadrupole parameters; invalid for spin-1/2 particles, whose
    /// quadrupole interaction vanishes identically.
    pub fn with_quadrupole(mut self, q: QuadrupoleParams) -> Result<Particle> {
        if self.spin == Spin::HALF {
            return Err(Error::InvalidArgument(format!(
                "particle '{}' has spin 1/2 and cannot carry quadrupole parameters",
                self.label
            )));
        }
        self.quadrupole = Some(q);
        Ok(self)
    }

    /// Positive muon at `position`.
    pub fn muon(position: [f64; 3]) -> Particle {
        Particle::new("mu+", Spin::HALF, GAMMA_MU, position)
    }

    /// ¹⁹F nucleus at `position`.
    pub fn fluorine19(position: [f64; 3]) -> Particle {
        Particle::new("19F", Spin::HALF, GAMMA_F19, position)
    }
}

/// Measurement/operator axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn pauli(self) -> Pauli {
        match self {
            Axis::X => Pauli::X,
            Axis::Y => Pauli::Y,
            Axis::Z => Pauli::Z,
        }
    }

    /// Component index into a 3-vector.
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// Assignment of particles to contiguous qubit ranges, in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitLayout {
    particles: Vec<Particle>,
    offsets: Vec<usize>,
    total_qubits: usize,
}

impl QubitLayout {
    /// Lay out `particles` on qubits in input order; particle `i` occupies
    /// `2·s_i` consecutive qubits starting where particle `i−1` ended.
    pub fn new(particles: Vec<Particle>) -> Result<QubitLayout> {
        if particles.is_empty() {
            return Err(Error::InvalidArgument(
                "a layout needs at least one particle".into(),
            ));
        }
        let mut offsets = Vec::with_capacity(particles.len());
        let mut total = 0usize;
        for p in &particles {
            offsets.push(total);
            total += p.spin.n_qubits();
        }
        if total > PauliString::MAX_QUBITS {
            return Err(Error::ResourceLimit(format!(
                "layout needs {total} qubits; the limit is {}",
                PauliString::MAX_QUBITS
            )));
        }
        Ok(QubitLayout {
            particles,
            offsets,
            total_qubits: total,
        })
    }

    pub fn total_qubits(&self) -> usize {
        self.total_qubits
    }

    pub fn n_particles(&self) -> usize {
        self.particles.len()
    }

    pub fn particle(&self, i: usize) -> &Particle {
        &self.particles[i]
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    /// Qubits assigned to particle `i`.
    pub fn qubit_range(&self, i: usize) -> std::ops::Range<usize> {
        let start = self.offsets[i];
        start..start + self.particles[i].spin.n_qubits()
    }

    /// Spin operator S^α for particle `i`: ½ Σ_j P^α on each of the
    /// particle's qubits (2s terms of coefficient ½).
    pub fn spin_operator(&self, i: usize, axis: Axis) -> Result<PauliSum> {
        if i >= self.particles.len() {
            return Err(Error::InvalidArgument(format!(
                "particle index {i} out of range ({} particles)",
                self.particles.len()
            )));
        }
        let mut terms = Vec::with_capacity(self.particles[i].spin.n_qubits());
        for q in self.qubit_range(i) {
            terms.push((PauliString::single(q, axis.pauli())?, 0.5));
        }
        Ok(PauliSum::from_terms(terms))
    }
}

/// Binomial coefficient as f64 (exact for the small arguments used here).
pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Sparse amplitudes of the Dicke level |s, m⟩ on a 2s-qubit register:
/// every bitstring of Hamming weight `h = s − m` carries amplitude
/// `1/√C(2s, h)`; all other amplitudes vanish. `m_twice` is 2m.
pub fn dicke_basis_state(spin: Spin, m_twice: i32) -> Result<Vec<(u64, f64)>> {
    let t = spin.twice() as i32;
    if m_twice.abs() > t || (m_twice - t) % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "projection 2m = {m_twice} invalid for spin {}/2",
            spin.twice()
        )));
    }
    let n = spin.n_qubits();
    let h = ((t - m_twice) / 2) as u32;
    let amp = 1.0 / binomial(n as u32, h).sqrt();
    let mut out = Vec::new();
    for bits in 0..(1u64 << n) {
        if bits.count_ones() == h {
            out.push((bits, amp));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dense_pauli_sum, dense_pauli_terms, CMatrix};
    use crate::pauli::commutator;
    use num_complex::Complex64;

    fn fmuf_layout() -> QubitLayout {
        QubitLayout::new(vec![
            Particle::muon([0.0, 0.0, 0.0]),
            Particle::fluorine19([0.0, 0.0, 1.17]),
            Particle::fluorine19([0.0, 0.0, -1.17]),
        ])
        .unwrap()
    }

    #[test]
    fn layout_sizes() {
        assert_eq!(fmuf_layout().total_qubits(), 3);

        // six spin-3/2 particles plus one spin-1/2 → 6·3 + 1 = 19 qubits
        let mut parts: Vec<Particle> = (0..6)
            .map(|i| {
                Particle::new(
                    format!("n{i}"),
                    Spin::THREE_HALVES,
                    100.0,
                    [i as f64, 0.0, 0.0],
                )
            })
            .collect();
        parts.push(Particle::muon([0.0, 0.0, 7.0]));
        let layout = QubitLayout::new(parts).unwrap();
        assert_eq!(layout.total_qubits(), 19);
        assert_eq!(layout.qubit_range(0), 0..3);
        assert_eq!(layout.qubit_range(6), 18..19);

        let single = QubitLayout::new(vec![Particle::muon([0.0; 3])]).unwrap();
        assert_eq!(single.total_qubits(), 1);
    }

    #[test]
    fn spin_validation() {
        assert!(Spin::from_twice(0).is_err());
        assert!(Spin::from_twice(10).is_err()); // s = 5 beyond cap
        assert!(Spin::from_value(0.75).is_err());
        assert_eq!(Spin::from_value(1.5).unwrap(), Spin::THREE_HALVES);
    }

    #[test]
    fn quadrupole_rejected_for_spin_half() {
        let p = Particle::muon([0.0; 3]).with_quadrupole(QuadrupoleParams {
            moment_barn: 0.1,
            anti_shielding: 0.0,
        });
        assert!(p.is_err());
    }

    #[test]
    fn spin_operator_expansions() {
        // s = 1/2, x → ½ X on the particle's qubit
        let layout = fmuf_layout();
        let sx = layout.spin_operator(1, Axis::X).unwrap();
        assert_eq!(sx.len(), 1);
        assert_eq!(
            sx.terms()[0],
            (PauliString::single(1, Pauli::X).unwrap(), 0.5)
        );

        // s = 1, z → ½(Z0 + Z1) on the particle's two qubits
        let layout1 = QubitLayout::new(vec![Particle::new(
            "d",
            Spin::ONE,
            50.0,
            [0.0; 3],
        )])
        .unwrap();
        let sz = layout1.spin_operator(0, Axis::Z).unwrap();
        assert_eq!(sz.len(), 2);
        for (i, &(s, c)) in sz.terms().iter().enumerate() {
            assert_eq!(s, PauliString::single(i, Pauli::Z).unwrap());
            assert_eq!(c, 0.5);
        }

        // s = 3/2, x → ½(X0 + X1 + X2)
        let layout32 = QubitLayout::new(vec![Particle::new(
            "q",
            Spin::THREE_HALVES,
            10.0,
            [0.0; 3],
        )])
        .unwrap();
        let sx32 = layout32.spin_operator(0, Axis::X).unwrap();
        assert_eq!(sx32.len(), 3);
        assert!(sx32.terms().iter().all(|&(_, c)| c == 0.5));
    }

    #[test]
    fn su2_commutators_hold_symbolically() {
        // [S^x, S^y] = i S^z as an operator identity on the full register.
        for twice in 1..=5u32 {
            let spin = Spin::from_twice(twice).unwrap();
            let layout =
                QubitLayout::new(vec![Particle::new("p", spin, 1.0, [0.0; 3])]).unwrap();
            let sx = layout.spin_operator(0, Axis::X).unwrap();
            let sy = layout.spin_operator(0, Axis::Y).unwrap();
            let sz = layout.spin_operator(0, Axis::Z).unwrap();

            let comm = commutator(&sx, &sy);
            // expect i·S^z: one term i/2·Z per qubit
            assert_eq!(comm.len(), sz.len());
            for (&(cs, cc), &(zs, zc)) in comm.iter().zip(sz.terms()) {
                assert_eq!(cs, zs);
                assert!((cc - Complex64::new(0.0, zc)).norm() < 1e-14);
            }

            // dense cross-check on ≤ 5 qubits
            let n = layout.total_qubits();
            let dx = dense_pauli_sum(n, &sx).unwrap();
            let dy = dense_pauli_sum(n, &sy).unwrap();
            let dz = dense_pauli_sum(n, &sz).unwrap();
            let lhs = dx
                .matmul(&dy)
                .unwrap()
                .sub(&dy.matmul(&dx).unwrap())
                .unwrap();
            let rhs = dz.scale(Complex64::new(0.0, 1.0));
            assert!(lhs.max_abs_diff(&rhs) < 1e-12);
            // and the symbolic commutator agrees with the dense one
            let sym = dense_pauli_terms(n, &comm).unwrap();
            assert!(sym.max_abs_diff(&lhs) < 1e-12);
        }
    }

    #[test]
    fn dicke_levels_match_closed_form() {
        // s=3/2, m=−1/2 → weight-2 strings with amplitude 1/√3
        let amps = dicke_basis_state(Spin::THREE_HALVES, -1).unwrap();
        assert_eq!(amps.len(), 3);
        let strings: Vec<u64> = amps.iter().map(|&(b, _)| b).collect();
        assert_eq!(strings, vec![0b011, 0b101, 0b110]);
        for &(_, a) in &amps {
            assert!((a - 1.0 / 3.0f64.sqrt()).abs() < 1e-15);
        }

        // s=1/2, m=+1/2 → |0⟩
        let up = dicke_basis_state(Spin::HALF, 1).unwrap();
        assert_eq!(up, vec![(0, 1.0)]);

        // s=2, m=+2 → |0000⟩
        let top = dicke_basis_state(Spin::from_twice(4).unwrap(), 4).unwrap();
        assert_eq!(top, vec![(0, 1.0)]);

        // out-of-range and parity-violating projections rejected
        assert!(dicke_basis_state(Spin::HALF, 3).is_err());
        assert!(dicke_basis_state(Spin::ONE, 1).is_err());
    }

    #[test]
    fn dicke_levels_are_unit_norm() {
        for twice in 1..=6u32 {
            let spin = Spin::from_twice(twice).unwrap();
            for m2 in spin.projections_twice() {
                let amps = dicke_basis_state(spin, m2).unwrap();
                let norm2: f64 = amps.iter().map(|&(_, a)| a * a).sum();
                assert!((norm2 - 1.0).abs() < 1e-12, "s=2·{twice}, 2m={m2}");
                let h = ((twice as i32 - m2) / 2) as u32;
                assert!(amps.iter().all(|&(b, _)| b.count_ones() == h));
            }
        }
    }

    #[test]
    fn spin_operators_preserve_dicke_subspace() {
        // Project out the symmetric subspace and verify S^α never leaks:
        // ‖(1 − Π) S^α Π‖_max = 0 for s ≤ 2.
        for twice in 1..=4u32 {
            let spin = Spin::from_twice(twice).unwrap();
            let layout =
                QubitLayout::new(vec![Particle::new("p", spin, 1.0, [0.0; 3])]).unwrap();
            let n = layout.total_qubits();
            let dim = 1usize << n;

            // Π = Σ_m |D_m⟩⟨D_m|
            let mut proj = CMatrix::zeros(dim, dim);
            for m2 in spin.projections_twice() {
                let amps = dicke_basis_state(spin, m2).unwrap();
                for &(bi, ai) in &amps {
                    for &(bj, aj) in &amps {
                        proj.add_at(bi as usize, bj as usize, Complex64::new(ai * aj, 0.0));
                    }
                }
            }
            let eye = CMatrix::identity(dim);
            for axis in Axis::ALL {
                let op = dense_pauli_sum(n, &layout.spin_operator(0, axis).unwrap()).unwrap();
                let leak = eye
                    .sub(&proj)
                    .unwrap()
                    .matmul(&op)
                    .unwrap()
                    .matmul(&proj)
                    .unwrap();
                assert!(leak.max_abs() < 1e-12, "s=2·{twice} axis {axis:?}");
            }
        }
    }

    #[test]
    fn sz_eigenvalue_on_dicke_level() {
        // S^z |s, m⟩ = m |s, m⟩ under the embedding.
        let spin = Spin::THREE_HALVES;
        let layout = QubitLayout::new(vec![Particle::new("p", spin, 1.0, [0.0; 3])]).unwrap();
        let n = layout.total_qubits();
        let sz = dense_pauli_sum(n, &layout.spin_operator(0, Axis::Z).unwrap()).unwrap();
        for m2 in spin.projections_twice() {
            let amps = dicke_basis_state(spin, m2).unwrap();
            let mut v = vec![Complex64::new(0.0, 0.0); 1 << n];
            for &(b, a) in &amps {
                v[b as usize] = Complex64::new(a, 0.0);
            }
            let w = sz.mul_vec(&v).unwrap();
            for (i, &wi) in w.iter().enumerate() {
                let want = v[i] * (m2 as f64 / 2.0);
                assert!((wi - want).norm() < 1e-12);
            }
        }
    }
}
