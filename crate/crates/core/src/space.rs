//! Subspaces of the occupation basis and direct fermionic action on them.
//!
//! A [`Space`] is an ordered list of basis bitstrings. The full Fock space
//! and every `(n_up, n_down)` sector are spaces; operators that preserve a
//! space can be realized as sparse matrices on it without ever building the
//! `2^n` representation.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{check_modes, Error, Result};
use crate::fermion::{apply_product, FermionOperator};
use crate::sparse::SparseMatrix;
use crate::state::StateVector;

const ABSENT: u32 = u32::MAX;

#[derive(Clone, Debug, PartialEq)]
pub struct Space {
    n_modes: usize,
    basis: Vec<usize>,
    lookup: Vec<u32>,
}

impl Space {
    pub fn full(n_modes: usize) -> Result<Self> {
        check_modes(n_modes)?;
        Self::from_basis(n_modes, (0..1usize << n_modes).collect())
    }

    /// `basis` must be strictly increasing and fit in `n_modes` bits.
    pub fn from_basis(n_modes: usize, basis: Vec<usize>) -> Result<Self> {
        check_modes(n_modes)?;
        let dim = 1usize << n_modes;
        if basis.windows(2).any(|w| w[0] >= w[1]) || basis.last().is_some_and(|&b| b >= dim) {
            return Err(Error::validation("subspace basis must be strictly increasing and in range"));
        }
        let mut lookup = vec![ABSENT; dim];
        for (i, &b) in basis.iter().enumerate() {
            lookup[b] = i as u32;
        }
        Ok(Space {
            n_modes,
            basis,
            lookup,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[usize] {
        &self.basis
    }

    #[inline]
    pub fn index_of(&self, bits: usize) -> Option<usize> {
        match self.lookup.get(bits) {
            Some(&i) if i != ABSENT => Some(i as usize),
            _ => None,
        }
    }

    pub fn is_full(&self) -> bool {
        self.basis.len() == 1usize << self.n_modes
    }

    /// Matrix of `op` restricted to this space. Fails if `op` maps any basis
    /// state outside the space.
    pub fn operator_matrix(&self, op: &FermionOperator) -> Result<SparseMatrix> {
        if op.n_modes() != self.n_modes {
            return Err(Error::validation("operator and space have different mode counts"));
        }
        let mut triplets = Vec::new();
        for (col, &bits) in self.basis.iter().enumerate() {
            for (ops, coeff) in op.iter() {
                if let Some((out, sign)) = apply_product(ops, bits) {
                    let row = self.index_of(out).ok_or_else(|| {
                        Error::validation("operator does not preserve the subspace")
                    })?;
                    triplets.push((row, col, coeff * sign));
                }
            }
        }
        Ok(SparseMatrix::from_triplets(self.dim(), triplets))
    }

    /// Applies `op` to amplitudes on `self`, returning amplitudes on `target`.
    /// Components landing outside `target` are an error.
    pub fn apply_into(
        &self,
        op: &FermionOperator,
        amplitudes: &[Complex64],
        target: &Space,
    ) -> Result<Vec<Complex64>> {
        if op.n_modes() != self.n_modes || target.n_modes != self.n_modes {
            return Err(Error::validation("operator and spaces have different mode counts"));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); target.dim()];
        for (col, &bits) in self.basis.iter().enumerate() {
            let a = amplitudes[col];
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (ops, coeff) in op.iter() {
                if let Some((dest, sign)) = apply_product(ops, bits) {
                    let row = target
                        .index_of(dest)
                        .ok_or_else(|| Error::validation("operator image leaves the target space"))?;
                    out[row] += coeff * sign * a;
                }
            }
        }
        Ok(out)
    }

    /// Embeds subspace amplitudes into the full `2^n` statevector.
    pub fn embed(&self, amplitudes: &[Complex64]) -> StateVector {
        let mut full = vec![Complex64::new(0.0, 0.0); 1usize << self.n_modes];
        for (&b, &a) in self.basis.iter().zip(amplitudes) {
            full[b] = a;
        }
        StateVector::from_amplitudes_unchecked(self.n_modes, full)
    }

    /// Restricts a full statevector to this space. Weight outside the space
    /// above `1e-12` (in amplitude) is an error.
    pub fn restrict(&self, state: &StateVector) -> Result<Vec<Complex64>> {
        if state.n_qubits() != self.n_modes {
            return Err(Error::validation("state and space have different sizes"));
        }
        let amps = state.amplitudes();
        for (b, a) in amps.iter().enumerate() {
            if self.index_of(b).is_none() && a.norm() > 1e-12 {
                return Err(Error::validation("state has support outside the subspace"));
            }
        }
        Ok(self.basis.iter().map(|&b| amps[b]).collect())
    }
}
