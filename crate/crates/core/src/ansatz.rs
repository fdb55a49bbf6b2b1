//! Adaptive ansatz `prod_k exp(i theta_k A_k) |init>`: representation,
//! fast evaluation with adjoint gradients, and the versioned text format.
//!
//! Every pool generator is `A = i (T† - T)` for a single ladder product `T`.
//! On the occupation basis `T` sends each basis state to at most one other
//! basis state with a sign, and no state is both a source and an image, so
//! `exp(i theta A) = exp(theta (T - T†))` is a set of disjoint real Givens
//! rotations. [`Rotation`] stores exactly those pairs.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exact::Sector;
use crate::fermion::apply_product;
use crate::hubbard::{is_down, HubbardModel, OperatorDescriptor};
use crate::space::Space;
use crate::sparse::SparseMatrix;
use crate::state::{basis_state, slater_state, StateVector};

const FORMAT_HEADER: &str = "hubbard-adapt ansatz v1";

/// How the reference state underneath the ansatz is prepared.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InitSpec {
    /// Computational basis state with these modes occupied.
    Product(Vec<usize>),
    /// Non-interacting ground state of the model's hopping term.
    Slater { n_up: usize, n_down: usize },
}

impl InitSpec {
    pub fn sector(&self) -> Sector {
        match self {
            InitSpec::Product(modes) => {
                let down = modes.iter().filter(|&&m| is_down(m)).count();
                Sector::new(modes.len() - down, down)
            }
            InitSpec::Slater { n_up, n_down } => Sector::new(*n_up, *n_down),
        }
    }

    pub fn prepare(&self, model: &HubbardModel) -> Result<StateVector> {
        match self {
            InitSpec::Product(modes) => basis_state(modes, model.n_modes()),
            InitSpec::Slater { n_up, n_down } => {
                slater_state(&model.hopping_matrix(), model.n_sites(), *n_up, *n_down)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ansatz {
    n_modes: usize,
    init: InitSpec,
    steps: Vec<(OperatorDescriptor, f64)>,
}

impl Ansatz {
    pub fn new(n_modes: usize, init: InitSpec) -> Result<Self> {
        crate::error::check_modes(n_modes)?;
        if let InitSpec::Product(modes) = &init {
            if modes.iter().any(|&m| m >= n_modes) {
                return Err(Error::validation("initial occupation references a mode out of range"));
            }
        }
        Ok(Ansatz {
            n_modes,
            init,
            steps: Vec::new(),
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn init(&self) -> &InitSpec {
        &self.init
    }

    pub fn depth(&self) -> usize {
        self.steps.len()
    }

    pub fn steps(&self) -> &[(OperatorDescriptor, f64)] {
        &self.steps
    }

    pub fn descriptors(&self) -> impl Iterator<Item = OperatorDescriptor> + '_ {
        self.steps.iter().map(|(d, _)| *d)
    }

    pub fn thetas(&self) -> Vec<f64> {
        self.steps.iter().map(|(_, t)| *t).collect()
    }

    pub fn push(&mut self, descriptor: OperatorDescriptor, theta: f64) -> Result<()> {
        descriptor.validate(self.n_modes)?;
        self.steps.push((descriptor, theta));
        Ok(())
    }

    pub fn set_thetas(&mut self, thetas: &[f64]) -> Result<()> {
        if thetas.len() != self.steps.len() {
            return Err(Error::validation("parameter count does not match ansatz depth"));
        }
        for (step, &t) in self.steps.iter_mut().zip(thetas) {
            step.1 = t;
        }
        Ok(())
    }

    /// Versioned text form; angles carry 17 significant digits so a reload
    /// reproduces them bit for bit.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{FORMAT_HEADER}");
        let _ = writeln!(out, "modes {}", self.n_modes);
        match &self.init {
            InitSpec::Product(modes) => {
                let _ = write!(out, "init product");
                for m in modes {
                    let _ = write!(out, " {m}");
                }
                let _ = writeln!(out);
            }
            InitSpec::Slater { n_up, n_down } => {
                let _ = writeln!(out, "init slater {n_up} {n_down}");
            }
        }
        let _ = writeln!(out, "depth {}", self.steps.len());
        for (d, theta) in &self.steps {
            match *d {
                OperatorDescriptor::OneBody { p, q } => {
                    let _ = writeln!(out, "one {p} {q} {theta:.16e}");
                }
                OperatorDescriptor::TwoBody { p, q, r, s } => {
                    let _ = writeln!(out, "two {p} {q} {r} {s} {theta:.16e}");
                }
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let perr = |line: usize, msg: &str| Error::Parse {
            line,
            msg: msg.into(),
        };
        let (ln, header) = lines.next().ok_or_else(|| perr(0, "empty ansatz file"))?;
        if header != FORMAT_HEADER {
            return Err(perr(ln, "unrecognized header"));
        }
        let mut field = |key: &str| -> Result<(usize, Vec<&str>)> {
            let (ln, line) = lines.next().ok_or_else(|| perr(0, "unexpected end of file"))?;
            let mut parts = line.split_whitespace();
            if parts.next() != Some(key) {
                return Err(Error::Parse {
                    line: ln,
                    msg: alloc::format!("expected `{key}`"),
                });
            }
            Ok((ln, parts.collect()))
        };
        let parse_usize = |ln: usize, s: &str| s.parse::<usize>().map_err(|_| perr(ln, "expected an integer"));

        let (ln, modes) = field("modes")?;
        if modes.len() != 1 {
            return Err(perr(ln, "expected one integer"));
        }
        let n_modes = parse_usize(ln, modes[0])?;

        let (ln, init) = field("init")?;
        let init = match init.split_first() {
            Some((&"product", rest)) => InitSpec::Product(
                rest.iter()
                    .map(|s| parse_usize(ln, s))
                    .collect::<Result<Vec<_>>>()?,
            ),
            Some((&"slater", [a, b])) => InitSpec::Slater {
                n_up: parse_usize(ln, a)?,
                n_down: parse_usize(ln, b)?,
            },
            _ => return Err(perr(ln, "init must be `product <modes..>` or `slater <n_up> <n_down>`")),
        };

        let (ln, depth) = field("depth")?;
        if depth.len() != 1 {
            return Err(perr(ln, "expected one integer"));
        }
        let depth = parse_usize(ln, depth[0])?;

        let mut ansatz = Ansatz::new(n_modes, init).map_err(|e| perr(ln, &alloc::format!("{e}")))?;
        for _ in 0..depth {
            let (ln, line) = lines.next().ok_or_else(|| perr(0, "fewer steps than declared depth"))?;
            let parts: Vec<&str> = line.split_whitespace().collect();
            let (descriptor, theta) = match parts.as_slice() {
                ["one", p, q, t] => (
                    OperatorDescriptor::OneBody {
                        p: parse_usize(ln, p)?,
                        q: parse_usize(ln, q)?,
                    },
                    *t,
                ),
                ["two", p, q, r, s, t] => (
                    OperatorDescriptor::TwoBody {
                        p: parse_usize(ln, p)?,
                        q: parse_usize(ln, q)?,
                        r: parse_usize(ln, r)?,
                        s: parse_usize(ln, s)?,
                    },
                    *t,
                ),
                _ => return Err(perr(ln, "malformed step")),
            };
            let theta: f64 = theta.parse().map_err(|_| perr(ln, "malformed angle"))?;
            if !theta.is_finite() {
                return Err(perr(ln, "angle must be finite"));
            }
            ansatz
                .push(descriptor, theta)
                .map_err(|e| perr(ln, &alloc::format!("{e}")))?;
        }
        if let Some((ln, _)) = lines.next() {
            return Err(perr(ln, "trailing content after the declared steps"));
        }
        Ok(ansatz)
    }
}

/// A pool generator realized as disjoint Givens rotations on a [`Space`].
///
/// Each entry `(a, b, s)` records `T|b> = s|a>`; the rotation acts as
/// `psi_a <- cos psi_a + s sin psi_b`, `psi_b <- cos psi_b - s sin psi_a`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rotation {
    pairs: Vec<(u32, u32, f64)>,
}

impl Rotation {
    pub fn compile(descriptor: &OperatorDescriptor, space: &Space) -> Result<Self> {
        descriptor.validate(space.n_modes())?;
        let excitation = descriptor.excitation();
        let mut used = vec![false; space.dim()];
        let mut pairs = Vec::new();
        for (col, &bits) in space.basis().iter().enumerate() {
            if let Some((dest, sign)) = apply_product(&excitation, bits) {
                let row = space
                    .index_of(dest)
                    .ok_or_else(|| Error::validation("generator leaves the subspace"))?;
                if used[row] || used[col] {
                    return Err(Error::validation("generator does not split into disjoint rotations"));
                }
                used[row] = true;
                used[col] = true;
                pairs.push((row as u32, col as u32, sign));
            }
        }
        Ok(Rotation { pairs })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// In place `v <- exp(theta (T - T†)) v`.
    #[inline]
    pub fn apply(&self, theta: f64, v: &mut [Complex64]) {
        let (s, c) = libm::sincos(theta);
        for &(a, b, sign) in &self.pairs {
            let (a, b) = (a as usize, b as usize);
            let (va, vb) = (v[a], v[b]);
            v[a] = va * c + vb * (sign * s);
            v[b] = vb * c - va * (sign * s);
        }
    }

    /// `2 Re <left| (T - T†) |right>`, the derivative of
    /// `<left|exp(theta (T - T†))|right>`-type energies at the current angle.
    #[inline]
    pub fn derivative(&self, left: &[Complex64], right: &[Complex64]) -> f64 {
        let mut acc = 0.0;
        for &(a, b, sign) in &self.pairs {
            let (a, b) = (a as usize, b as usize);
            acc += sign * ((left[a].conj() * right[b]).re - (left[b].conj() * right[a]).re);
        }
        2.0 * acc
    }
}

/// Compiled ansatz problem on one subspace: Hamiltonian, generators, and
/// weighted input states. A single input with weight 1 is plain VQE.
#[derive(Clone, Debug)]
pub struct Objective<'a> {
    pub hamiltonian: &'a SparseMatrix,
    pub rotations: &'a [&'a Rotation],
    pub inputs: &'a [Vec<Complex64>],
    pub weights: &'a [f64],
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub cost: f64,
    pub gradient: Vec<f64>,
    pub energies: Vec<f64>,
    pub outputs: Vec<Vec<Complex64>>,
}

impl Objective<'_> {
    pub fn prepare(&self, thetas: &[f64], input: &[Complex64]) -> Vec<Complex64> {
        let mut psi = input.to_vec();
        for (rot, &t) in self.rotations.iter().zip(thetas) {
            rot.apply(t, &mut psi);
        }
        psi
    }

    /// Cost, gradient (one forward and one reverse sweep per input), the
    /// per-input energies, and the prepared output states.
    pub fn evaluate(&self, thetas: &[f64]) -> Evaluation {
        assert_eq!(thetas.len(), self.rotations.len());
        let n = thetas.len();
        let mut cost = 0.0;
        let mut gradient = vec![0.0; n];
        let mut energies = Vec::with_capacity(self.inputs.len());
        let mut outputs = Vec::with_capacity(self.inputs.len());
        for (input, &w) in self.inputs.iter().zip(self.weights) {
            let psi = self.prepare(thetas, input);
            let mut lambda = self.hamiltonian.matvec(&psi);
            let energy = crate::linalg::dot(&psi, &lambda).re;
            energies.push(energy);
            cost += w * energy;
            let mut back = psi.clone();
            for k in (0..n).rev() {
                gradient[k] += w * self.rotations[k].derivative(&lambda, &back);
                self.rotations[k].apply(-thetas[k], &mut back);
                self.rotations[k].apply(-thetas[k], &mut lambda);
            }
            outputs.push(psi);
        }
        Evaluation {
            cost,
            gradient,
            energies,
            outputs,
        }
    }
}

/// Energy and adjoint gradient of `ansatz` on the full `2^n` space.
pub fn energy_and_gradient(
    ansatz: &Ansatz,
    hamiltonian: &SparseMatrix,
    init: &StateVector,
) -> Result<(f64, Vec<f64>)> {
    if init.n_qubits() != ansatz.n_modes() || hamiltonian.dim() != init.dim() {
        return Err(Error::validation("ansatz, Hamiltonian and initial state sizes differ"));
    }
    let space = Space::full(ansatz.n_modes())?;
    let rotations = ansatz
        .descriptors()
        .map(|d| Rotation::compile(&d, &space))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&Rotation> = rotations.iter().collect();
    let inputs = [init.amplitudes().to_vec()];
    let objective = Objective {
        hamiltonian,
        rotations: &refs,
        inputs: &inputs,
        weights: &[1.0],
    };
    let eval = objective.evaluate(&ansatz.thetas());
    Ok((eval.cost, eval.gradient))
}

/// Prepares `ansatz` on top of its initial state for `model`.
pub fn prepare_state(ansatz: &Ansatz, model: &HubbardModel) -> Result<StateVector> {
    let init = ansatz.init.prepare(model)?;
    let space = Space::full(ansatz.n_modes())?;
    let mut psi = init.into_amplitudes();
    for (d, theta) in ansatz.steps() {
        Rotation::compile(d, &space)?.apply(*theta, &mut psi);
    }
    Ok(space.embed(&psi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hubbard::{GridSpec, HubbardParams};
    use crate::state::apply_exp;

    #[test]
    fn rotation_matches_generic_exponential() {
        let n = 6;
        let space = Space::full(n).unwrap();
        let start = basis_state(&[0, 3, 5], n).unwrap();
        for d in [
            OperatorDescriptor::OneBody { p: 0, q: 4 },
            OperatorDescriptor::TwoBody { p: 0, q: 3, r: 1, s: 4 },
            OperatorDescriptor::TwoBody { p: 0, q: 3, r: 3, s: 4 },
        ] {
            let rot = Rotation::compile(&d, &space).unwrap();
            let a = space.operator_matrix(&d.generator(n).unwrap()).unwrap();
            // Spread the state first so every pair is exercised.
            let mut psi = start.amplitudes().to_vec();
            Rotation::compile(&OperatorDescriptor::OneBody { p: 0, q: 2 }, &space)
                .unwrap()
                .apply(0.4, &mut psi);
            Rotation::compile(&OperatorDescriptor::OneBody { p: 1, q: 3 }, &space)
                .unwrap()
                .apply(-0.9, &mut psi);
            let sv = StateVector::from_amplitudes(n, psi.clone()).unwrap();
            let theta = 0.83;
            let generic = apply_exp(&a, theta, &sv).unwrap();
            rot.apply(theta, &mut psi);
            let diff: f64 = psi
                .iter()
                .zip(generic.amplitudes())
                .map(|(x, y)| (x - y).norm_sqr())
                .sum();
            assert!(diff.sqrt() < 1e-12, "{d}: {diff}");
        }
    }

    #[test]
    fn text_round_trip_is_bit_exact() {
        let mut a = Ansatz::new(6, InitSpec::Product(alloc::vec![0, 5])).unwrap();
        a.push(OperatorDescriptor::OneBody { p: 0, q: 2 }, 0.1 + 0.2).unwrap();
        a.push(OperatorDescriptor::TwoBody { p: 0, q: 3, r: 1, s: 2 }, -1.0 / 3.0).unwrap();
        a.push(OperatorDescriptor::OneBody { p: 1, q: 5 }, 1e-300).unwrap();
        let text = a.to_text();
        let b = Ansatz::from_text(&text).unwrap();
        assert_eq!(a, b);
        for (x, y) in a.thetas().iter().zip(b.thetas()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        let s = Ansatz::new(4, InitSpec::Slater { n_up: 1, n_down: 1 }).unwrap();
        assert_eq!(Ansatz::from_text(&s.to_text()).unwrap(), s);
    }

    #[test]
    fn malformed_text_is_rejected() {
        assert!(Ansatz::from_text("").is_err());
        assert!(Ansatz::from_text("hubbard-adapt ansatz v2\n").is_err());
        let bad_depth = "hubbard-adapt ansatz v1\nmodes 4\ninit product 0\ndepth 1\n";
        assert!(Ansatz::from_text(bad_depth).is_err());
        let bad_op = "hubbard-adapt ansatz v1\nmodes 4\ninit product 0\ndepth 1\none 0 1 0.5\n";
        assert!(Ansatz::from_text(bad_op).is_err());
    }

    #[test]
    fn depth_zero_energy_is_reference_expectation() {
        let model = HubbardModel::new(GridSpec::new(2, 1).unwrap(), HubbardParams::new(1.0, 3.0));
        let h = Space::full(4).unwrap().operator_matrix(&model.hamiltonian().unwrap()).unwrap();
        let ansatz = Ansatz::new(4, InitSpec::Product(alloc::vec![0, 1])).unwrap();
        let init = ansatz.init().prepare(&model).unwrap();
        let (e, g) = energy_and_gradient(&ansatz, &h, &init).unwrap();
        assert!((e - 3.0).abs() < 1e-14);
        assert!(g.is_empty());
    }
}
