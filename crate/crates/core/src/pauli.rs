//! Pauli strings, qubit operators, and the Jordan-Wigner map.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::error::{check_modes, Error, Result};
use crate::fermion::{FermionOperator, Ladder};
use crate::DROP_TOL;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    /// `self * other = phase * result` (result `None` is the identity).
    fn product(self, other: Pauli) -> (Complex64, Option<Pauli>) {
        use Pauli::*;
        let i = Complex64::new(0.0, 1.0);
        match (self, other) {
            (X, X) | (Y, Y) | (Z, Z) => (Complex64::new(1.0, 0.0), None),
            (X, Y) => (i, Some(Z)),
            (Y, X) => (-i, Some(Z)),
            (Y, Z) => (i, Some(X)),
            (Z, Y) => (-i, Some(X)),
            (Z, X) => (i, Some(Y)),
            (X, Z) => (-i, Some(Y)),
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Pauli::X => "X",
            Pauli::Y => "Y",
            Pauli::Z => "Z",
        };
        f.write_str(s)
    }
}

/// Tensor product of single-qubit Paulis; identity factors are implicit.
/// Factors are kept sorted by qubit index.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString {
    n_qubits: usize,
    factors: Vec<(usize, Pauli)>,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Self {
        PauliString {
            n_qubits,
            factors: Vec::new(),
        }
    }

    pub fn new(n_qubits: usize, factors: &[(usize, Pauli)]) -> Result<Self> {
        let mut sorted = factors.to_vec();
        sorted.sort_by_key(|&(q, _)| q);
        for w in sorted.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::validation(alloc::format!("qubit {} repeated in Pauli string", w[0].0)));
            }
        }
        if let Some(&(q, _)) = sorted.last() {
            if q >= n_qubits {
                return Err(Error::validation(alloc::format!(
                    "qubit {q} out of range for {n_qubits} qubits"
                )));
            }
        }
        Ok(PauliString {
            n_qubits,
            factors: sorted,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn factors(&self) -> &[(usize, Pauli)] {
        &self.factors
    }

    pub fn get(&self, qubit: usize) -> Option<Pauli> {
        self.factors
            .binary_search_by_key(&qubit, |&(q, _)| q)
            .ok()
            .map(|i| self.factors[i].1)
    }

    /// Bits flipped by the string (qubits carrying X or Y).
    pub fn flip_mask(&self) -> usize {
        self.factors
            .iter()
            .filter(|(_, p)| *p != Pauli::Z)
            .fold(0, |m, &(q, _)| m | (1 << q))
    }

    /// Qubits whose value contributes a sign (Y or Z).
    pub fn phase_mask(&self) -> usize {
        self.factors
            .iter()
            .filter(|(_, p)| *p != Pauli::X)
            .fold(0, |m, &(q, _)| m | (1 << q))
    }

    pub fn y_count(&self) -> usize {
        self.factors.iter().filter(|(_, p)| *p == Pauli::Y).count()
    }

    /// `self * other = phase * string`.
    pub fn multiply(&self, other: &PauliString) -> (Complex64, PauliString) {
        let mut phase = Complex64::new(1.0, 0.0);
        let mut out = Vec::with_capacity(self.factors.len() + other.factors.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.factors, &other.factors);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                out.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                out.push(b[j]);
                j += 1;
            } else {
                let (p, r) = a[i].1.product(b[j].1);
                phase *= p;
                if let Some(r) = r {
                    out.push((a[i].0, r));
                }
                i += 1;
                j += 1;
            }
        }
        (
            phase,
            PauliString {
                n_qubits: self.n_qubits.max(other.n_qubits),
                factors: out,
            },
        )
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("I");
        }
        for (k, (q, p)) in self.factors.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{p}{q}")?;
        }
        Ok(())
    }
}

/// Weighted sum of Pauli strings with merged duplicates.
#[derive(Clone, Debug, PartialEq)]
pub struct QubitOperator {
    n_qubits: usize,
    terms: BTreeMap<PauliString, Complex64>,
}

impl QubitOperator {
    pub fn zero(n_qubits: usize) -> Self {
        QubitOperator {
            n_qubits,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(n_qubits: usize) -> Self {
        let mut op = Self::zero(n_qubits);
        op.add_term(Complex64::new(1.0, 0.0), PauliString::identity(n_qubits));
        op
    }

    pub fn single(n_qubits: usize, coefficient: Complex64, string: PauliString) -> Self {
        let mut op = Self::zero(n_qubits);
        op.add_term(coefficient, string);
        op
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PauliString, Complex64)> + '_ {
        self.terms.iter().map(|(k, v)| (k, *v))
    }

    pub fn coefficient(&self, string: &PauliString) -> Complex64 {
        self.terms.get(string).copied().unwrap_or_default()
    }

    pub fn add_term(&mut self, coefficient: Complex64, string: PauliString) {
        let mut string = string;
        string.n_qubits = self.n_qubits;
        *self.terms.entry(string).or_insert(Complex64::new(0.0, 0.0)) += coefficient;
        self.terms.retain(|_, c| c.norm() >= DROP_TOL);
    }

    pub fn plus(&self, other: &QubitOperator) -> QubitOperator {
        let mut out = self.clone();
        for (s, c) in &other.terms {
            out.add_term(*c, s.clone());
        }
        out
    }

    pub fn scaled(&self, factor: Complex64) -> QubitOperator {
        let mut out = QubitOperator::zero(self.n_qubits);
        for (s, c) in &self.terms {
            out.add_term(*c * factor, s.clone());
        }
        out
    }

    pub fn times(&self, other: &QubitOperator) -> QubitOperator {
        let mut out = QubitOperator::zero(self.n_qubits.max(other.n_qubits));
        for (sa, ca) in &self.terms {
            for (sb, cb) in &other.terms {
                let (phase, s) = sa.multiply(sb);
                out.add_term(*ca * *cb * phase, s);
            }
        }
        out
    }

    /// Term-wise conjugate transpose (Pauli strings are Hermitian).
    pub fn adjoint(&self) -> QubitOperator {
        let mut out = QubitOperator::zero(self.n_qubits);
        for (s, c) in &self.terms {
            out.add_term(c.conj(), s.clone());
        }
        out
    }

    /// Largest coefficient magnitude, 0 for the zero operator.
    pub fn max_coefficient(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

impl fmt::Display for QubitOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (s, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({:.6}{:+.6}i) {}", c.re, c.im, s)?;
        }
        Ok(())
    }
}

fn ladder_image(n_qubits: usize, ladder: Ladder) -> QubitOperator {
    let k = ladder.mode;
    let z: Vec<(usize, Pauli)> = (0..k).map(|q| (q, Pauli::Z)).collect();
    let mut with_x = z.clone();
    with_x.push((k, Pauli::X));
    let mut with_y = z;
    with_y.push((k, Pauli::Y));
    // a_k -> Z..Z (X + iY)/2, a†_k -> Z..Z (X - iY)/2
    let y_sign = if ladder.creation { -0.5 } else { 0.5 };
    let mut op = QubitOperator::zero(n_qubits);
    op.add_term(Complex64::new(0.5, 0.0), PauliString { n_qubits, factors: with_x });
    op.add_term(Complex64::new(0.0, y_sign), PauliString { n_qubits, factors: with_y });
    op
}

/// Jordan-Wigner image of a fermionic operator on `op.n_modes()` qubits.
pub fn jordan_wigner(op: &FermionOperator) -> Result<QubitOperator> {
    let n = op.n_modes();
    check_modes(n)?;
    let mut out = QubitOperator::zero(n);
    let mut images: BTreeMap<Ladder, QubitOperator> = BTreeMap::new();
    for (ops, coeff) in op.iter() {
        let mut product = QubitOperator::identity(n).scaled(coeff);
        for &l in ops {
            if l.mode >= n {
                return Err(Error::validation(alloc::format!(
                    "mode index {} out of range for {} modes",
                    l.mode,
                    n
                )));
            }
            let image = images.entry(l).or_insert_with(|| ladder_image(n, l));
            product = product.times(image);
        }
        out = out.plus(&product);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fermion::FermionOperator;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn number_operator_maps_to_half_i_minus_z() {
        let n1 = FermionOperator::number(2, 1).unwrap();
        let q = jordan_wigner(&n1).unwrap();
        assert_eq!(q.len(), 2);
        assert_eq!(q.coefficient(&PauliString::identity(2)), c(0.5, 0.0));
        let z1 = PauliString::new(2, &[(1, Pauli::Z)]).unwrap();
        assert_eq!(q.coefficient(&z1), c(-0.5, 0.0));
    }

    #[test]
    fn annihilator_carries_parity_string() {
        let a2 = FermionOperator::annihilation(3, 2).unwrap();
        let q = jordan_wigner(&a2).unwrap();
        assert_eq!(q.len(), 2);
        let zzx = PauliString::new(3, &[(0, Pauli::Z), (1, Pauli::Z), (2, Pauli::X)]).unwrap();
        let zzy = PauliString::new(3, &[(0, Pauli::Z), (1, Pauli::Z), (2, Pauli::Y)]).unwrap();
        assert_eq!(q.coefficient(&zzx), c(0.5, 0.0));
        assert_eq!(q.coefficient(&zzy), c(0.0, 0.5));
    }

    #[test]
    fn hopping_maps_to_xx_plus_yy() {
        let hop = FermionOperator::term(2, c(1.0, 0.0), &[Ladder::create(0), Ladder::annihilate(1)]).unwrap();
        let q = jordan_wigner(&hop.plus(&hop.adjoint()).unwrap()).unwrap();
        let xx = PauliString::new(2, &[(0, Pauli::X), (1, Pauli::X)]).unwrap();
        let yy = PauliString::new(2, &[(0, Pauli::Y), (1, Pauli::Y)]).unwrap();
        assert_eq!(q.len(), 2);
        assert!((q.coefficient(&xx) - c(0.5, 0.0)).norm() < 1e-15);
        assert!((q.coefficient(&yy) - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn pauli_products_follow_cyclic_rule() {
        let x = PauliString::new(1, &[(0, Pauli::X)]).unwrap();
        let y = PauliString::new(1, &[(0, Pauli::Y)]).unwrap();
        let (phase, s) = x.multiply(&y);
        assert_eq!(phase, c(0.0, 1.0));
        assert_eq!(s.factors(), &[(0, Pauli::Z)]);
        let (phase, s) = x.multiply(&x);
        assert_eq!(phase, c(1.0, 0.0));
        assert!(s.factors().is_empty());
    }

    #[test]
    fn out_of_range_qubit_rejected() {
        assert!(PauliString::new(2, &[(2, Pauli::X)]).is_err());
        assert!(PauliString::new(3, &[(1, Pauli::X), (1, Pauli::Z)]).is_err());
    }
}
