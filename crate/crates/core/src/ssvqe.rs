//! Adaptive subspace search: one unitary, grown by the adaptive loop, that
//! maps `K` orthonormal inputs onto the `K` lowest eigenstates of a sector by
//! minimizing `sum_j w_j <psi_j|U† H U|psi_j>`.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::adapt::{AdaptConfig, AdaptSession, StepRecord, StopReason};
use crate::ansatz::{Ansatz, InitSpec, Objective, Rotation};
use crate::error::{Error, Result};
use crate::exact::{sector_spectrum, Sector, DEGENERACY_TOL};
use crate::hubbard::HubbardModel;
use crate::space::Space;
use crate::sparse::SparseMatrix;
use crate::state::StateVector;

/// Largest sector for which the default `K` is the full sector dimension.
pub const FULL_SECTOR_K: usize = 16;
/// Default `K` for sectors larger than [`FULL_SECTOR_K`].
pub const DEFAULT_K: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceSpec {
    pub sector: Sector,
    pub weights: Vec<f64>,
    pub inputs: Vec<StateVector>,
}

impl SubspaceSpec {
    pub fn k(&self) -> usize {
        self.inputs.len()
    }

    /// `K` lowest computational basis states of the sector, ranked by
    /// diagonal energy with ties broken by basis index, and weights
    /// `2^(K-1-j)`.
    pub fn lowest_basis(model: &HubbardModel, sector: Sector, k: usize) -> Result<Self> {
        let weights = (0..k).map(|j| libm::ldexp(1.0, (k - 1 - j) as i32)).collect();
        Self::lowest_basis_weighted(model, sector, weights)
    }

    pub fn lowest_basis_weighted(model: &HubbardModel, sector: Sector, weights: Vec<f64>) -> Result<Self> {
        let k = weights.len();
        let n_modes = model.n_modes();
        let space = sector.space(n_modes)?;
        if k == 0 || k > space.dim() {
            return Err(Error::validation(alloc::format!(
                "K = {k} must lie in 1..={} for sector ({}, {})",
                space.dim(),
                sector.n_up,
                sector.n_down
            )));
        }
        let h = space.operator_matrix(&model.hamiltonian()?)?;
        let mut ranked: Vec<(f64, usize)> = (0..space.dim()).map(|i| (h.get(i, i).re, i)).collect();
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let inputs = ranked[..k]
            .iter()
            .map(|&(_, i)| {
                let mut amps = alloc::vec![Complex64::new(0.0, 0.0); 1 << n_modes];
                amps[space.basis()[i]] = Complex64::new(1.0, 0.0);
                StateVector::from_amplitudes(n_modes, amps)
            })
            .collect::<Result<Vec<_>>>()?;
        let spec = SubspaceSpec {
            sector,
            weights,
            inputs,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Default `K` for a sector: its dimension up to [`FULL_SECTOR_K`],
    /// otherwise [`DEFAULT_K`].
    pub fn default_k(sector: Sector, n_modes: usize) -> Result<usize> {
        let dim = crate::exact::sector_basis(n_modes, sector)?.len();
        Ok(if dim <= FULL_SECTOR_K { dim } else { DEFAULT_K })
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.inputs.len();
        if k == 0 || self.weights.len() != k {
            return Err(Error::validation("need K >= 1 inputs and one weight per input"));
        }
        if self.weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::validation("weights must be positive and finite"));
        }
        if self.weights.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::validation("weights must be strictly descending"));
        }
        for (i, a) in self.inputs.iter().enumerate() {
            for (j, b) in self.inputs.iter().enumerate().skip(i) {
                let expect = if i == j { 1.0 } else { 0.0 };
                if (a.overlap(b) - Complex64::new(expect, 0.0)).norm() > 1e-12 {
                    return Err(Error::validation(alloc::format!("inputs {i} and {j} are not orthonormal")));
                }
            }
        }
        Ok(())
    }

    /// Occupation of the largest amplitude of the leading input; recorded
    /// as the ansatz's initial state.
    fn leading_occupation(&self) -> Vec<usize> {
        let amps = self.inputs[0].amplitudes();
        let mut best = 0;
        for (i, a) in amps.iter().enumerate() {
            if a.norm() > amps[best].norm() + 1e-12 {
                best = i;
            }
        }
        (0..self.inputs[0].n_qubits()).filter(|q| best >> q & 1 == 1).collect()
    }
}

/// `sum_j w_j <psi_j|U† H U|psi_j>` on the full space, with the per-input
/// energies.
pub fn weighted_cost(ansatz: &Ansatz, hamiltonian: &SparseMatrix, spec: &SubspaceSpec) -> Result<(f64, Vec<f64>)> {
    spec.validate()?;
    let n = ansatz.n_modes();
    if hamiltonian.dim() != 1usize << n || spec.inputs.iter().any(|s| s.n_qubits() != n) {
        return Err(Error::validation("ansatz, Hamiltonian and inputs sizes differ"));
    }
    let space = Space::full(n)?;
    let rotations = ansatz
        .descriptors()
        .map(|d| Rotation::compile(&d, &space))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&Rotation> = rotations.iter().collect();
    let inputs: Vec<Vec<Complex64>> = spec.inputs.iter().map(|s| s.amplitudes().to_vec()).collect();
    let eval = Objective {
        hamiltonian,
        rotations: &refs,
        inputs: &inputs,
        weights: &spec.weights,
    }
    .evaluate(&ansatz.thetas());
    Ok((eval.cost, eval.energies))
}

#[derive(Clone, Debug)]
pub struct Eigenpair {
    pub energy: f64,
    pub state: StateVector,
    /// Index of the input this state was prepared from.
    pub input: usize,
    /// An exact level within the degeneracy tolerance of this one's target.
    pub degenerate: bool,
}

#[derive(Clone, Debug)]
pub struct SsvqeOutcome {
    pub ansatz: Ansatz,
    /// Prepared states sorted by energy, ascending.
    pub states: Vec<Eigenpair>,
    pub records: Vec<StepRecord>,
    pub stop: StopReason,
    pub cost: f64,
    /// Exact lowest `K` sector energies.
    pub exact_energies: Vec<f64>,
    /// Prepared energies, in input order, fail to ascend.
    pub ordering_violation: bool,
    /// Largest deviation of `<out_i|out_j>` from the identity.
    pub orthonormality_error: f64,
}

/// Grows one unitary for the `K` lowest states of `spec.sector`.
pub fn run_adapt_ssvqe(model: &HubbardModel, spec: &SubspaceSpec, config: &AdaptConfig) -> Result<SsvqeOutcome> {
    spec.validate()?;
    let k = spec.k();
    let spectrum = sector_spectrum(&model.hamiltonian()?, spec.sector)?;
    if k > spectrum.energies.len() {
        return Err(Error::validation("K exceeds the sector dimension"));
    }
    let exact_energies = spectrum.energies[..k].to_vec();
    let degenerate: Vec<bool> = (0..k)
        .map(|j| {
            let below = j > 0 && spectrum.energies[j] - spectrum.energies[j - 1] < DEGENERACY_TOL;
            let above = j + 1 < spectrum.energies.len() && spectrum.energies[j + 1] - spectrum.energies[j] < DEGENERACY_TOL;
            below || above
        })
        .collect();
    let references = if config.target_fidelity.is_some() {
        if degenerate.iter().any(|&d| d) {
            return Err(Error::Config(
                "target levels are degenerate; per-state fidelity is ill-defined".into(),
            ));
        }
        Some((0..k).map(|j| spectrum.state(j)).collect::<Vec<_>>())
    } else {
        None
    };

    let ansatz = Ansatz::new(model.n_modes(), InitSpec::Product(spec.leading_occupation()))?;
    let mut session = AdaptSession::new(
        model,
        spec.sector,
        ansatz,
        &spec.inputs,
        &spec.weights,
        references.as_deref(),
        *config,
    )?;
    let (records, stop) = session.run()?;

    let outputs = session.outputs();
    let energies = session.state_energies().to_vec();
    let mut orthonormality_error: f64 = 0.0;
    for (i, a) in outputs.iter().enumerate() {
        for (j, b) in outputs.iter().enumerate() {
            let expect = if i == j { 1.0 } else { 0.0 };
            orthonormality_error = orthonormality_error.max((a.overlap(b) - Complex64::new(expect, 0.0)).norm());
        }
    }
    let ordering_violation = energies.windows(2).any(|w| w[0] > w[1]);
    let mut states: Vec<Eigenpair> = outputs
        .into_iter()
        .zip(&energies)
        .enumerate()
        .map(|(j, (state, &energy))| Eigenpair {
            energy,
            state,
            input: j,
            degenerate: false,
        })
        .collect();
    states.sort_by(|a, b| a.energy.total_cmp(&b.energy).then(a.input.cmp(&b.input)));
    for (rank, s) in states.iter_mut().enumerate() {
        s.degenerate = degenerate[rank];
    }
    Ok(SsvqeOutcome {
        ansatz: session.ansatz().clone(),
        cost: session.cost(),
        states,
        records,
        stop,
        exact_energies,
        ordering_violation,
        orthonormality_error,
    })
}
