//! Second-quantized operators over a fixed number of fermionic modes.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::error::{check_modes, Error, Result};
use crate::DROP_TOL;

/// A single creation (`creation == true`) or annihilation operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ladder {
    pub mode: usize,
    pub creation: bool,
}

impl Ladder {
    pub const fn create(mode: usize) -> Self {
        Ladder { mode, creation: true }
    }

    pub const fn annihilate(mode: usize) -> Self {
        Ladder { mode, creation: false }
    }

    pub const fn adjoint(self) -> Self {
        Ladder {
            mode: self.mode,
            creation: !self.creation,
        }
    }

    /// Action on an occupation bitstring. Returns the new bitstring and the
    /// Jordan-Wigner parity sign, or `None` when the state is annihilated.
    #[inline]
    pub fn act(self, bits: usize) -> Option<(usize, f64)> {
        let mask = 1usize << self.mode;
        let occupied = bits & mask != 0;
        if occupied == self.creation {
            return None;
        }
        let parity = (bits & (mask - 1)).count_ones();
        let sign = if parity.is_multiple_of(2) { 1.0 } else { -1.0 };
        Some((bits ^ mask, sign))
    }
}

impl fmt::Display for Ladder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.creation {
            write!(f, "{}^", self.mode)
        } else {
            write!(f, "{}", self.mode)
        }
    }
}

/// Applies a product of ladder operators (rightmost first) to a basis state.
pub fn apply_product(ops: &[Ladder], bits: usize) -> Option<(usize, f64)> {
    let mut state = bits;
    let mut sign = 1.0;
    for op in ops.iter().rev() {
        let (next, s) = op.act(state)?;
        state = next;
        sign *= s;
    }
    Some((state, sign))
}

/// One weighted product of ladder operators.
#[derive(Clone, Debug, PartialEq)]
pub struct FermionTerm {
    pub coefficient: Complex64,
    pub ladder_ops: Vec<Ladder>,
}

/// A linear combination of ladder-operator products.
///
/// Terms with identical ladder sequences are merged on insertion; the
/// resulting map is ordered, so iteration order is deterministic.
#[derive(Clone, Debug, PartialEq)]
pub struct FermionOperator {
    n_modes: usize,
    terms: BTreeMap<Vec<Ladder>, Complex64>,
}

impl FermionOperator {
    pub fn zero(n_modes: usize) -> Self {
        FermionOperator {
            n_modes,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(n_modes: usize) -> Self {
        let mut op = Self::zero(n_modes);
        op.terms.insert(Vec::new(), Complex64::new(1.0, 0.0));
        op
    }

    /// A single term; validates every mode index.
    pub fn term(n_modes: usize, coefficient: Complex64, ops: &[Ladder]) -> Result<Self> {
        let mut op = Self::zero(n_modes);
        op.add_term(coefficient, ops)?;
        Ok(op)
    }

    pub fn from_terms(n_modes: usize, terms: impl IntoIterator<Item = FermionTerm>) -> Result<Self> {
        let mut op = Self::zero(n_modes);
        for t in terms {
            op.add_term(t.coefficient, &t.ladder_ops)?;
        }
        Ok(op)
    }

    /// `coefficient * c_mode`.
    pub fn annihilation(n_modes: usize, mode: usize) -> Result<Self> {
        Self::term(n_modes, Complex64::new(1.0, 0.0), &[Ladder::annihilate(mode)])
    }

    /// `c†_mode`.
    pub fn creation(n_modes: usize, mode: usize) -> Result<Self> {
        Self::term(n_modes, Complex64::new(1.0, 0.0), &[Ladder::create(mode)])
    }

    /// `n_mode = c†_mode c_mode`.
    pub fn number(n_modes: usize, mode: usize) -> Result<Self> {
        Self::term(
            n_modes,
            Complex64::new(1.0, 0.0),
            &[Ladder::create(mode), Ladder::annihilate(mode)],
        )
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[Ladder], Complex64)> + '_ {
        self.terms.iter().map(|(k, v)| (k.as_slice(), *v))
    }

    pub fn terms(&self) -> Vec<FermionTerm> {
        self.terms
            .iter()
            .map(|(ops, c)| FermionTerm {
                coefficient: *c,
                ladder_ops: ops.clone(),
            })
            .collect()
    }

    pub fn add_term(&mut self, coefficient: Complex64, ops: &[Ladder]) -> Result<()> {
        check_modes(self.n_modes)?;
        if let Some(bad) = ops.iter().find(|l| l.mode >= self.n_modes) {
            return Err(Error::validation(alloc::format!(
                "mode index {} out of range for {} modes",
                bad.mode,
                self.n_modes
            )));
        }
        self.accumulate(ops.to_vec(), coefficient);
        Ok(())
    }

    fn accumulate(&mut self, key: Vec<Ladder>, coefficient: Complex64) {
        let entry = self.terms.entry(key).or_insert(Complex64::new(0.0, 0.0));
        *entry += coefficient;
        self.prune();
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| c.norm() >= DROP_TOL);
    }

    fn same_space(&self, other: &Self) -> Result<()> {
        if self.n_modes != other.n_modes {
            return Err(Error::validation(alloc::format!(
                "mode count mismatch: {} vs {}",
                self.n_modes,
                other.n_modes
            )));
        }
        Ok(())
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        self.same_space(other)?;
        let mut out = self.clone();
        for (k, v) in &other.terms {
            *out.terms.entry(k.clone()).or_insert(Complex64::new(0.0, 0.0)) += *v;
        }
        out.prune();
        Ok(out)
    }

    pub fn minus(&self, other: &Self) -> Result<Self> {
        self.plus(&other.scaled(Complex64::new(-1.0, 0.0)))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v *= factor;
        }
        out.prune();
        out
    }

    /// Operator product `self * other` (ladder sequences concatenated).
    pub fn times(&self, other: &Self) -> Result<Self> {
        self.same_space(other)?;
        let mut out = Self::zero(self.n_modes);
        for (ka, va) in &self.terms {
            for (kb, vb) in &other.terms {
                let mut key = ka.clone();
                key.extend_from_slice(kb);
                *out.terms.entry(key).or_insert(Complex64::new(0.0, 0.0)) += *va * *vb;
            }
        }
        out.prune();
        Ok(out)
    }

    /// Hermitian adjoint: reverse each product, flip every ladder, conjugate.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero(self.n_modes);
        for (k, v) in &self.terms {
            let key: Vec<Ladder> = k.iter().rev().map(|l| l.adjoint()).collect();
            *out.terms.entry(key).or_insert(Complex64::new(0.0, 0.0)) += v.conj();
        }
        out.prune();
        out
    }

    /// Normal-ordered form: creators left of annihilators, each group sorted
    /// by descending mode, using the canonical anticommutation relations.
    pub fn normal_ordered(&self) -> Self {
        let mut out = Self::zero(self.n_modes);
        for (k, v) in &self.terms {
            normal_order_into(k.clone(), *v, &mut out.terms);
        }
        out.prune();
        out
    }

    /// `self - self†` vanishes after normal ordering, to within 1e-12.
    pub fn is_hermitian(&self) -> bool {
        let diff = self
            .minus(&self.adjoint())
            .expect("same mode count")
            .normal_ordered();
        diff.terms.values().all(|c| c.norm() < 1e-12)
    }

    /// True when every term has as many creators as annihilators.
    pub fn conserves_number(&self) -> bool {
        self.terms.keys().all(|ops| {
            let created = ops.iter().filter(|l| l.creation).count();
            2 * created == ops.len()
        })
    }
}

// Each swap of adjacent ladders either flips the sign (distinct operators)
// or, for `c_p c†_p`, spawns the contracted term `1 - c†_p c_p`.
fn normal_order_into(
    mut ops: Vec<Ladder>,
    mut coeff: Complex64,
    out: &mut BTreeMap<Vec<Ladder>, Complex64>,
) {
    let n = ops.len();
    for i in 1..n {
        let mut j = i;
        while j > 0 {
            let (left, right) = (ops[j - 1], ops[j]);
            let should_swap = match (left.creation, right.creation) {
                (false, true) => true,
                (a, b) if a == b => right.mode > left.mode,
                _ => false,
            };
            if left == right {
                // c_p c_p = 0 and c†_p c†_p = 0.
                return;
            }
            if !should_swap {
                break;
            }
            if !left.creation && right.creation && left.mode == right.mode {
                let mut contracted = ops.clone();
                contracted.drain(j - 1..=j);
                normal_order_into(contracted, coeff, out);
            }
            ops.swap(j - 1, j);
            coeff = -coeff;
            j -= 1;
        }
    }
    for w in ops.windows(2) {
        if w[0] == w[1] {
            return;
        }
    }
    *out.entry(ops).or_insert(Complex64::new(0.0, 0.0)) += coeff;
}

impl fmt::Display for FermionOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (ops, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({:.6}{:+.6}i) [", c.re, c.im)?;
            for (j, l) in ops.iter().enumerate() {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{l}")?;
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}
