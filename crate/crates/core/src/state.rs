//! Dense statevectors over the occupation basis.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{check_modes, Error, Result};
use crate::fermion::Ladder;
use crate::hubbard::{mode, Spin};
use crate::linalg::{self, symmetric_eigen};
use crate::sparse::SparseMatrix;

/// Normalized amplitudes of length `2^n_qubits`; qubit 0 is the
/// least-significant bit of the basis index.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn from_amplitudes(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_modes(n_qubits)?;
        if amplitudes.len() != 1usize << n_qubits {
            return Err(Error::validation("amplitude count must be 2^n_qubits"));
        }
        let norm = linalg::norm(&amplitudes);
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::validation(alloc::format!("state norm {norm} is not 1")));
        }
        Ok(StateVector {
            n_qubits,
            amplitudes,
        })
    }

    pub(crate) fn from_amplitudes_unchecked(n_qubits: usize, amplitudes: Vec<Complex64>) -> Self {
        StateVector {
            n_qubits,
            amplitudes,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.amplitudes)
    }

    /// `<self|other>`.
    pub fn overlap(&self, other: &StateVector) -> Complex64 {
        assert_eq!(self.dim(), other.dim(), "state dimensions differ");
        linalg::dot(&self.amplitudes, &other.amplitudes)
    }

    pub fn with_fixed_phase(mut self) -> Self {
        linalg::fix_phase(&mut self.amplitudes);
        self
    }
}

/// Computational basis state with exactly `occupied` set.
pub fn basis_state(occupied: &[usize], n_qubits: usize) -> Result<StateVector> {
    check_modes(n_qubits)?;
    let mut bits = 0usize;
    for &q in occupied {
        if q >= n_qubits {
            return Err(Error::validation(alloc::format!("mode {q} out of range for {n_qubits} qubits")));
        }
        if bits & (1 << q) != 0 {
            return Err(Error::validation(alloc::format!("mode {q} listed twice")));
        }
        bits |= 1 << q;
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
    amps[bits] = Complex64::new(1.0, 0.0);
    Ok(StateVector::from_amplitudes_unchecked(n_qubits, amps))
}

/// Ground state of the quadratic Hamiltonian `sum_ij h_ij c+_is c_js` with
/// `n_up` and `n_down` electrons: each spin fills its lowest orbitals.
///
/// Fails with [`Error::Degenerate`] when the highest filled and lowest empty
/// orbital of either spin are within 1e-8 of each other.
pub fn slater_state(hopping: &[f64], n_sites: usize, n_up: usize, n_down: usize) -> Result<StateVector> {
    if hopping.len() != n_sites * n_sites {
        return Err(Error::validation("hopping matrix must be n_sites x n_sites"));
    }
    if n_up > n_sites || n_down > n_sites {
        return Err(Error::validation("more electrons of one spin than sites"));
    }
    let n_modes = 2 * n_sites;
    check_modes(n_modes)?;
    let eig = symmetric_eigen(hopping, n_sites);
    for (label, filled) in [("up", n_up), ("down", n_down)] {
        if filled > 0 && filled < n_sites && eig.values[filled] - eig.values[filled - 1] < 1e-8 {
            return Err(Error::Degenerate(alloc::format!(
                "{label} spin: orbitals {} and {} at {:.6}",
                filled - 1,
                filled,
                eig.values[filled]
            )));
        }
    }

    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_modes];
    amps[0] = Complex64::new(1.0, 0.0);
    for (spin, filled) in [(Spin::Up, n_up), (Spin::Down, n_down)] {
        for orbital in eig.vectors.iter().take(filled) {
            let mut next = vec![Complex64::new(0.0, 0.0); amps.len()];
            for (bits, &a) in amps.iter().enumerate() {
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (site, &phi) in orbital.iter().enumerate() {
                    if let Some((dest, sign)) = Ladder::create(mode(site, spin)).act(bits) {
                        next[dest] += a * (phi * sign);
                    }
                }
            }
            amps = next;
        }
    }
    let norm = linalg::norm(&amps);
    for a in amps.iter_mut() {
        *a /= norm;
    }
    linalg::fix_phase(&mut amps);
    Ok(StateVector::from_amplitudes_unchecked(n_modes, amps))
}

/// `exp(i theta A) |state>` for Hermitian sparse `A`, by a scaled Taylor
/// series. Each substep has `|theta| ||A||_inf / substeps <= 1/2` and the
/// series runs until the next term is below `1e-17` relative to the vector.
pub fn apply_exp(generator: &SparseMatrix, theta: f64, state: &StateVector) -> Result<StateVector> {
    if generator.dim() != state.dim() {
        return Err(Error::validation("generator and state dimensions differ"));
    }
    if !generator.is_hermitian(1e-12) {
        return Err(Error::validation("generator is not Hermitian"));
    }
    if !theta.is_finite() {
        return Err(Error::validation("rotation angle must be finite"));
    }
    let amps = expm_taylor(generator, theta, state.amplitudes());
    Ok(StateVector::from_amplitudes_unchecked(state.n_qubits, amps))
}

pub(crate) fn expm_taylor(generator: &SparseMatrix, theta: f64, v: &[Complex64]) -> Vec<Complex64> {
    let scale = theta.abs() * generator.norm_inf();
    let substeps = libm::ceil(scale / 0.5).max(1.0) as usize;
    let h = Complex64::new(0.0, theta / substeps as f64);
    let mut out = v.to_vec();
    let mut term = vec![Complex64::new(0.0, 0.0); v.len()];
    let mut next = vec![Complex64::new(0.0, 0.0); v.len()];
    for _ in 0..substeps {
        term.copy_from_slice(&out);
        let base = linalg::norm(&out).max(f64::MIN_POSITIVE);
        for k in 1..=64 {
            generator.matvec_into(&term, &mut next);
            let factor = h / k as f64;
            for (t, n) in term.iter_mut().zip(&next) {
                *t = factor * n;
            }
            linalg::axpy(Complex64::new(1.0, 0.0), &term, &mut out);
            if linalg::norm(&term) <= 1e-17 * base {
                break;
            }
        }
    }
    out
}

/// `<state|O|state>`.
pub fn expectation(op: &SparseMatrix, state: &StateVector) -> Result<Complex64> {
    if op.dim() != state.dim() {
        return Err(Error::validation("operator and state dimensions differ"));
    }
    Ok(op.sandwich(state.amplitudes(), state.amplitudes()))
}

/// `|<a|b>|^2`, clamped to `[0, 1]`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::validation("state dimensions differ"));
    }
    Ok(a.overlap(b).norm_sqr().clamp(0.0, 1.0))
}
