//! Fluorite-host geometry: the fluorine sublattice around an interstitial
//! muon, organised into distance shells.
//!
//! The fluorine ions of CaF₂ form a simple-cubic sublattice of edge
//! [`CAF2_LATTICE_A`]; the calcium ions are spin-0 at natural abundance and
//! never enter the spin problem. The muon stops midway between two adjacent
//! fluorines, forming the linear F–µ⁺–F complex, and further fluorines are
//! added in shells of increasing muon–fluorine distance:
//!
//! | shell | population | distance² / a² | register size (cumulative) |
//! |-------|-----------:|---------------:|---------------------------:|
//! | nn    | 2          | 0.25           | 3 qubits                   |
//! | n-nn  | 8          | 1.25           | 11 qubits                  |
//! | nn-nn | 10         | 2.25           | 21 qubits                  |
//! | nnn-nn| 8          | 3.25           | 29 qubits                  |
//!
//! Every fluorine belongs to a displacement group whose members stay at a
//! common muon–fluorine distance when displaced. The nn-nn shell, although
//! a single distance shell, is subdivided into three groups — the eight
//! diagonal sites split by lattice plane (four below the muon's plane, four
//! above) plus the two axial sites on the F–µ–F axis — because fits treat
//! those distances as independent parameters. Radial displacements are
//! signed: negative moves a group toward the muon.

use crate::error::{Error, Result};
use crate::spin::{Particle, QubitLayout};

/// CaF₂ fluorine-sublattice constant, Å.
pub const CAF2_LATTICE_A: f64 = 2.72;

/// Distance-shell index around the muon (0 = nearest).
pub const N_SHELLS: usize = 4;

/// Displacement group of a fluorine site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FluorineGroup {
    /// The two nearest-neighbour fluorines forming the F–µ–F axis.
    Nn,
    /// The eight next-nearest-neighbour fluorines.
    NNn,
    /// nn-nn shell: four diagonal sites in the lattice plane below the muon.
    NnNnDiagLower,
    /// nn-nn shell: four diagonal sites in the lattice plane above the muon.
    NnNnDiagUpper,
    /// nn-nn shell: two sites on the F–µ–F axis beyond the nn fluorines.
    NnNnAxial,
    /// The eight fluorines of the fourth shell.
    NnnNn,
}

impl FluorineGroup {
    pub const ALL: [FluorineGroup; 6] = [
        FluorineGroup::Nn,
        FluorineGroup::NNn,
        FluorineGroup::NnNnDiagLower,
        FluorineGroup::NnNnDiagUpper,
        FluorineGroup::NnNnAxial,
        FluorineGroup::NnnNn,
    ];

    /// Shell this group belongs to (0-based).
    pub fn shell(self) -> usize {
        match self {
            FluorineGroup::Nn => 0,
            FluorineGroup::NNn => 1,
            FluorineGroup::NnNnDiagLower
            | FluorineGroup::NnNnDiagUpper
            | FluorineGroup::NnNnAxial => 2,
            FluorineGroup::NnnNn => 3,
        }
    }

    /// Stable ordering index (groups sort by shell, then by this).
    fn order(self) -> usize {
        match self {
            FluorineGroup::Nn => 0,
            FluorineGroup::NNn => 1,
            FluorineGroup::NnNnDiagLower => 2,
            FluorineGroup::NnNnDiagUpper => 3,
            FluorineGroup::NnNnAxial => 4,
            FluorineGroup::NnnNn => 5,
        }
    }
}

/// Signed radial displacement per group, Å (negative = toward the muon).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Displacements {
    pub nn: f64,
    pub n_nn: f64,
    pub nn_nn_diag_lower: f64,
    pub nn_nn_diag_upper: f64,
    pub nn_nn_axial: f64,
    pub nnn_nn: f64,
}

impl Displacements {
    pub fn get(&self, g: FluorineGroup) -> f64 {
        match g {
            FluorineGroup::Nn => self.nn,
            FluorineGroup::NNn => self.n_nn,
            FluorineGroup::NnNnDiagLower => self.nn_nn_diag_lower,
            FluorineGroup::NnNnDiagUpper => self.nn_nn_diag_upper,
            FluorineGroup::NnNnAxial => self.nn_nn_axial,
            FluorineGroup::NnnNn => self.nnn_nn,
        }
    }

    pub fn set(&mut self, g: FluorineGroup, value: f64) {
        match g {
            FluorineGroup::Nn => self.nn = value,
            FluorineGroup::NNn => self.n_nn = value,
            FluorineGroup::NnNnDiagLower => self.nn_nn_diag_lower = value,
            FluorineGroup::NnNnDiagUpper => self.nn_nn_diag_upper = value,
            FluorineGroup::NnNnAxial => self.nn_nn_axial = value,
            FluorineGroup::NnnNn => self.nnn_nn = value,
        }
    }
}

/// The muon plus its fluorine shells, laid out on qubits (muon first).
#[derive(Debug, Clone)]
pub struct Caf2System {
    layout: QubitLayout,
    /// Group of each fluorine, parallel to particles 1.. of the layout.
    groups: Vec<FluorineGroup>,
}

impl Caf2System {
    pub fn layout(&self) -> &QubitLayout {
        &self.layout
    }

    /// Group of fluorine `i` (particle index `i + 1` in the layout).
    pub fn fluorine_group(&self, i: usize) -> FluorineGroup {
        self.groups[i]
    }

    pub fn n_fluorines(&self) -> usize {
        self.groups.len()
    }

    /// Particle indices (into the layout) of one group's members.
    pub fn group_members(&self, g: FluorineGroup) -> Vec<usize> {
        self.groups
            .iter()
            .enumerate()
            .filter(|&(_, &gi)| gi == g)
            .map(|(i, _)| i + 1)
            .collect()
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Build the muon + fluorine system with `shell_count` shells (1..=4) and
/// the given group displacements.
///
/// Shell membership is derived by brute force: all fluorine sites within a
/// generous cutoff are enumerated and bucketed by distinct muon-site
/// distance, so the shell populations are a computed property of the
/// lattice rather than a table. Displacements move every member of a group
/// radially by the same signed amount; a displacement that would collapse a
/// radius to zero or through the muon is rejected.
pub fn caf2_system(shell_count: usize, disp: &Displacements) -> Result<Caf2System> {
    if !(1..=N_SHELLS).contains(&shell_count) {
        return Err(Error::InvalidArgument(format!(
            "shell count must be between 1 and {N_SHELLS}, got {shell_count}"
        )));
    }
    let a = CAF2_LATTICE_A;
    let muon = [0.0, 0.0, a / 2.0];

    // Enumerate fluorine sites near the muon and bucket by distance.
    // A ±3-cell window comfortably covers the four shells used here.
    let mut sites: Vec<([f64; 3], f64)> = Vec::new();
    for ix in -3i32..=3 {
        for iy in -3i32..=3 {
            for iz in -3i32..=4 {
                let pos = [ix as f64 * a, iy as f64 * a, iz as f64 * a];
                let d = norm(sub(pos, muon));
                sites.push((pos, d));
            }
        }
    }
    sites.sort_by(|x, y| x.1.total_cmp(&y.1));

    // Distinct distances, in order, define the shells.
    let mut shell_radii: Vec<f64> = Vec::new();
    for &(_, d) in &sites {
        if shell_radii.last().is_none_or(|&r| d > r + 1e-9) {
            shell_radii.push(d);
            if shell_radii.len() == shell_count {
                break;
            }
        }
    }

    // Collect members of each requested shell and classify their groups.
    let mut fluorines: Vec<([f64; 3], FluorineGroup)> = Vec::new();
    for &(pos, d) in &sites {
        let Some(shell) = shell_radii
            .iter()
            .position(|&r| (d - r).abs() < 1e-9)
        else {
            continue;
        };
        let group = match shell {
            0 => FluorineGroup::Nn,
            1 => FluorineGroup::NNn,
            2 => {
                if pos[0] == 0.0 && pos[1] == 0.0 {
                    FluorineGroup::NnNnAxial
                } else if pos[2] < muon[2] {
                    FluorineGroup::NnNnDiagLower
                } else {
                    FluorineGroup::NnNnDiagUpper
                }
            }
            3 => FluorineGroup::NnnNn,
            _ => unreachable!(),
        };
        fluorines.push((pos, group));
    }

    // Deterministic order: by group, then lexicographic site coordinates.
    fluorines.sort_by(|(pa, ga), (pb, gb)| {
        ga.order()
            .cmp(&gb.order())
            .then(pa[0].total_cmp(&pb[0]))
            .then(pa[1].total_cmp(&pb[1]))
            .then(pa[2].total_cmp(&pb[2]))
    });

    // Apply radial displacements.
    let mut particles = vec![Particle::muon(muon)];
    let mut groups = Vec::with_capacity(fluorines.len());
    for (pos, group) in fluorines {
        let rel = sub(pos, muon);
        let d = norm(rel);
        let delta = disp.get(group);
        let new_d = d + delta;
        if new_d <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "displacement {delta} Å collapses a {group:?} fluorine radius \
                 ({d:.4} Å) through the muon"
            )));
        }
        let scale = new_d / d;
        let new_pos = [
            muon[0] + rel[0] * scale,
            muon[1] + rel[1] * scale,
            muon[2] + rel[2] * scale,
        ];
        particles.push(Particle::fluorine19(new_pos));
        groups.push(group);
    }

    Ok(Caf2System {
        layout: QubitLayout::new(particles)?,
        groups,
    })
}
