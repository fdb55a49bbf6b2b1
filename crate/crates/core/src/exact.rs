//! Exact diagonalization inside `(n_up, n_down)` symmetry sectors.
//!
//! This is the reference oracle for every variational result: sector
//! matrices are at most a few hundred states wide, so they are diagonalized
//! densely and the full sector spectrum is always available.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fermion::FermionOperator;
use crate::linalg::{fix_phase, symmetric_eigen};
use crate::space::Space;
use crate::sparse::SparseMatrix;
use crate::state::StateVector;

/// Ground states closer than this to the first excited level are degenerate.
pub const DEGENERACY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sector {
    pub n_up: usize,
    pub n_down: usize,
}

impl Sector {
    pub const fn new(n_up: usize, n_down: usize) -> Self {
        Sector { n_up, n_down }
    }

    pub fn electrons(&self) -> usize {
        self.n_up + self.n_down
    }

    pub fn validate(&self, n_modes: usize) -> Result<()> {
        let per_spin = n_modes / 2;
        if !n_modes.is_multiple_of(2) || self.n_up > per_spin || self.n_down > per_spin {
            return Err(Error::validation(alloc::format!(
                "sector ({}, {}) does not fit in {} modes",
                self.n_up,
                self.n_down,
                n_modes
            )));
        }
        Ok(())
    }

    pub fn contains(&self, bits: usize) -> bool {
        (bits & EVEN_MASK).count_ones() as usize == self.n_up
            && (bits & ODD_MASK).count_ones() as usize == self.n_down
    }

    pub fn space(&self, n_modes: usize) -> Result<Space> {
        Space::from_basis(n_modes, sector_basis(n_modes, *self)?)
    }

    /// Sector reached by adding (`+1`) or removing (`-1`) one electron of
    /// the given spin; `None` if it falls outside the mode range.
    pub fn shifted(&self, down: bool, delta: i32, n_modes: usize) -> Option<Sector> {
        let bump = |n: usize| -> Option<usize> {
            let v = n as i64 + delta as i64;
            (v >= 0 && v as usize <= n_modes / 2).then_some(v as usize)
        };
        let s = if down {
            Sector::new(self.n_up, bump(self.n_down)?)
        } else {
            Sector::new(bump(self.n_up)?, self.n_down)
        };
        Some(s)
    }
}

const EVEN_MASK: usize = 0x5555_5555;
const ODD_MASK: usize = 0xAAAA_AAAA;

/// Basis indices with `n_up` set even bits and `n_down` set odd bits,
/// ascending.
pub fn sector_basis(n_modes: usize, sector: Sector) -> Result<Vec<usize>> {
    crate::error::check_modes(n_modes)?;
    sector.validate(n_modes)?;
    Ok((0..1usize << n_modes).filter(|&b| sector.contains(b)).collect())
}

#[derive(Clone, Debug)]
pub struct EigenResult {
    pub energies: Vec<f64>,
    pub states: Vec<StateVector>,
    /// `E_1 - E_0` within the sector; infinite for one-state sectors.
    pub ground_gap: f64,
}

/// Full spectrum of a Hamiltonian restricted to one sector, in sector
/// coordinates.
#[derive(Clone, Debug)]
pub struct SectorSpectrum {
    pub space: Space,
    pub matrix: SparseMatrix,
    pub energies: Vec<f64>,
    /// Eigenvectors in `space` coordinates, orthonormal, phase-fixed.
    pub vectors: Vec<Vec<Complex64>>,
}

impl SectorSpectrum {
    pub fn ground_gap(&self) -> f64 {
        if self.energies.len() < 2 {
            f64::INFINITY
        } else {
            self.energies[1] - self.energies[0]
        }
    }

    pub fn state(&self, i: usize) -> StateVector {
        self.space.embed(&self.vectors[i])
    }
}

/// Diagonalizes `h` inside `sector`.
///
/// Within every cluster of levels closer than [`DEGENERACY_TOL`], the
/// eigenvectors are replaced by the Gram-Schmidt orthonormalization of the
/// cluster projections of basis vectors taken in index order, so the result
/// does not depend on how the eigensolver happened to rotate the cluster.
pub fn sector_spectrum(h: &FermionOperator, sector: Sector) -> Result<SectorSpectrum> {
    let space = sector.space(h.n_modes())?;
    let matrix = space.operator_matrix(h)?;
    let n = space.dim();
    let mut dense = vec![0.0; n * n];
    for (r, c, v) in matrix.entries() {
        if v.im.abs() > 1e-12 {
            return Err(Error::validation("sector Hamiltonian has complex entries"));
        }
        dense[r * n + c] = v.re;
    }
    if matrix.hermiticity_error() > 1e-12 {
        return Err(Error::validation("Hamiltonian is not Hermitian"));
    }
    let eig = symmetric_eigen(&dense, n);
    let mut vectors = eig.vectors;

    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && eig.values[end] - eig.values[end - 1] < DEGENERACY_TOL {
            end += 1;
        }
        if end - start > 1 {
            let canon = canonical_cluster_basis(&vectors[start..end], n);
            for (k, v) in canon.into_iter().enumerate() {
                vectors[start + k] = v;
            }
        }
        start = end;
    }

    let vectors = vectors
        .into_iter()
        .map(|v| {
            let mut c: Vec<Complex64> = v.into_iter().map(|x| Complex64::new(x, 0.0)).collect();
            fix_phase(&mut c);
            c
        })
        .collect();
    Ok(SectorSpectrum {
        space,
        matrix,
        energies: eig.values,
        vectors,
    })
}

fn canonical_cluster_basis(cluster: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    let m = cluster.len();
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(m);
    for i in 0..n {
        if out.len() == m {
            break;
        }
        let mut v = vec![0.0; n];
        for c in cluster {
            let w = c[i];
            for (vk, ck) in v.iter_mut().zip(c) {
                *vk += w * ck;
            }
        }
        for _ in 0..2 {
            for u in &out {
                let d: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (vk, uk) in v.iter_mut().zip(u) {
                    *vk -= d * uk;
                }
            }
        }
        let norm = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
        if norm > 1e-6 {
            for x in v.iter_mut() {
                *x /= norm;
            }
            out.push(v);
        }
    }
    out
}

/// The `k` lowest eigenpairs of `h` in `sector`, states embedded in the full
/// `2^n` space.
pub fn lowest_k(h: &FermionOperator, sector: Sector, k: usize) -> Result<EigenResult> {
    let spec = sector_spectrum(h, sector)?;
    if k > spec.energies.len() {
        return Err(Error::validation(alloc::format!(
            "requested {k} states from a sector of dimension {}",
            spec.energies.len()
        )));
    }
    Ok(EigenResult {
        energies: spec.energies[..k].to_vec(),
        states: (0..k).map(|i| spec.state(i)).collect(),
        ground_gap: spec.ground_gap(),
    })
}

#[derive(Clone, Debug)]
pub struct GroundState {
    pub energy: f64,
    pub state: StateVector,
    pub degenerate: bool,
    pub gap: f64,
}

pub fn ground_state(h: &FermionOperator, sector: Sector) -> Result<GroundState> {
    let spec = sector_spectrum(h, sector)?;
    let gap = spec.ground_gap();
    Ok(GroundState {
        energy: spec.energies[0],
        state: spec.state(0),
        degenerate: gap < DEGENERACY_TOL,
        gap,
    })
}
