//! Spin-dynamics quantum-circuit emulator and analysis toolkit for muon
//! spin spectroscopy.
//!
//! The crate models the coherent evolution of an implanted muon coupled to
//! surrounding nuclear spins, maps the spin problem onto qubit registers,
//! simulates Trotterised circuits with optional noise, recovers polarisation
//! signals, fits them to asymmetry data, and estimates the quantum-hardware
//! resources the same calculation would need.
//!
//! Module map:
//! - [`pauli`]: symbolic Pauli-string algebra (products, commutators, sums).
//! - [`linalg`]: dense column-major complex matrices over BLAS/LAPACK.
//! - [`spin`]: spin quantum numbers, multi-qubit spin operators, registers.
//! - [`geometry`]: crystal-shell geometry for fluorite-structure hosts.
//! - [`hamiltonian`]: dipolar, quadrupolar and Zeeman couplings as Pauli sums.
//! - [`gates`] / [`state`]: gate set and pure/mixed-state simulators.
//! - [`noise`]: depolarising and dephasing channels, shot statistics.
//! - [`dicke`]: symmetric-state preparation circuits.
//! - [`prep`]: initial-state strategies for thermal-ensemble averaging.
//! - [`evolve`]: product-formula and randomised compilers for `exp(-iHt)`.
//! - [`circuit`]: gate-level circuit representation and peephole merging.
//! - [`bounds`]: rigorous product-formula error bounds.
//! - [`polarisation`]: muon polarisation functions, static and dynamic.
//! - [`fit`]: asymmetry-data fitting and error mitigation.
//! - [`resources`]: NISQ and fault-tolerant cost models.
//! - [`rng`], [`runner`]: deterministic seeding and worker-pool execution.
//! - [`config`], [`dataset`], [`report`]: TOML configs, data files, outputs.

// OpenBLAS provides the BLAS/LAPACK symbols for cblas-sys and lapack-sys;
// the crate must be referenced so its link directives are emitted.
extern crate openblas_src;

pub mod dicke;
pub mod bounds;
pub mod circuit;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod evolve;
pub mod fit;
pub mod gates;
pub mod geometry;
pub mod hamiltonian;
pub mod linalg;
pub mod noise;
pub mod pauli;
pub mod polarisation;
pub mod prep;
pub mod resources;
pub mod report;
pub mod rng;
pub mod runner;
pub mod spin;
pub mod state;

pub use error::{Error, Result};
