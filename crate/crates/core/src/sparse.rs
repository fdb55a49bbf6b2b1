//! Compressed sparse row matrices over complex amplitudes.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::QubitOperator;
use crate::MAX_MODES;

/// Square CSR matrix. Within a row, columns are strictly increasing.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl SparseMatrix {
    pub fn zeros(dim: usize) -> Self {
        SparseMatrix {
            dim,
            row_ptr: vec![0; dim + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        SparseMatrix {
            dim,
            row_ptr: (0..=dim).collect(),
            cols: (0..dim).collect(),
            vals: vec![Complex64::new(1.0, 0.0); dim],
        }
    }

    /// Builds from `(row, col, value)` triplets. Duplicates are summed in
    /// input order, so identical inputs give bitwise-identical matrices.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, Complex64)>) -> Self {
        triplets.sort_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<Complex64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            debug_assert!(r < dim && c < dim);
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut m = SparseMatrix {
            dim,
            row_ptr,
            cols,
            vals,
        };
        m.drop_zeros(1e-14);
        m
    }

    fn drop_zeros(&mut self, tol: f64) {
        let mut row_ptr = vec![0usize; self.dim + 1];
        let mut cols = Vec::with_capacity(self.cols.len());
        let mut vals = Vec::with_capacity(self.vals.len());
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.vals[k].norm() >= tol {
                    cols.push(self.cols[k]);
                    vals.push(self.vals[k]);
                }
            }
            row_ptr[r + 1] = cols.len();
        }
        self.row_ptr = row_ptr;
        self.cols = cols;
        self.vals = vals;
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.cols[k], self.vals[k]))
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[range.clone()].binary_search(&c) {
            Ok(k) => self.vals[range.start + k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// Iterates `(row, col, value)` over stored entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn matvec_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *out = acc;
        }
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn adjoint(&self) -> SparseMatrix {
        let triplets = self.entries().map(|(r, c, v)| (c, r, v.conj())).collect();
        SparseMatrix::from_triplets(self.dim, triplets)
    }

    pub fn scaled(&self, factor: Complex64) -> SparseMatrix {
        let mut out = self.clone();
        for v in &mut out.vals {
            *v *= factor;
        }
        out
    }

    pub fn plus(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.dim, other.dim);
        let triplets = self.entries().chain(other.entries()).collect();
        SparseMatrix::from_triplets(self.dim, triplets)
    }

    pub fn minus(&self, other: &SparseMatrix) -> SparseMatrix {
        self.plus(&other.scaled(Complex64::new(-1.0, 0.0)))
    }

    /// Product `self * other`.
    pub fn times(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.dim, other.dim);
        let mut triplets = Vec::new();
        for r in 0..self.dim {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    triplets.push((r, c, a * b));
                }
            }
        }
        SparseMatrix::from_triplets(self.dim, triplets)
    }

    /// Largest entry magnitude of `self - self†`.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (r, c, v) in self.entries() {
            worst = worst.max((v - self.get(c, r).conj()).norm());
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// Largest absolute entry; zero for the empty matrix.
    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim)
            .map(|r| self.row(r).map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `<x|A|y>`.
    pub fn sandwich(&self, x: &[Complex64], y: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..self.dim {
            let mut row = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                row += self.vals[k] * y[self.cols[k]];
            }
            acc += x[r].conj() * row;
        }
        acc
    }

    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let mut d = vec![vec![Complex64::new(0.0, 0.0); self.dim]; self.dim];
        for (r, c, v) in self.entries() {
            d[r][c] = v;
        }
        d
    }
}

/// Matrix of a qubit operator in the computational basis, qubit 0 being the
/// least-significant bit. Refuses dimensions above `2^MAX_MODES`.
pub fn operator_matrix(op: &QubitOperator, n_qubits: usize) -> Result<SparseMatrix> {
    if n_qubits > MAX_MODES {
        return Err(Error::Resource {
            what: "matrix dimension (qubits)",
            requested: n_qubits,
            limit: MAX_MODES,
        });
    }
    let dim = 1usize << n_qubits;
    let mut triplets = Vec::new();
    for (string, coeff) in op.iter() {
        if let Some(&(q, _)) = string.factors().last() {
            if q >= n_qubits {
                return Err(Error::validation(alloc::format!(
                    "qubit {q} out of range for {n_qubits} qubits"
                )));
            }
        }
        let flip = string.flip_mask();
        let phase_mask = string.phase_mask();
        // Y|b> = i (-1)^b |1-b>, Z|b> = (-1)^b |b>
        let base = match string.y_count() % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        } * coeff;
        for col in 0..dim {
            let sign = if (col & phase_mask).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            triplets.push((col ^ flip, col, base * sign));
        }
    }
    Ok(SparseMatrix::from_triplets(dim, triplets))
}
