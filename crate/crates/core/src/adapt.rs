//! The adaptive loop: screen the pool by energy gradient, append the
//! steepest generator, re-optimize every angle, repeat until a stopping rule
//! fires.
//!
//! The same [`AdaptSession`] drives ground-state runs (one input state with
//! weight 1) and subspace-search runs (several orthonormal inputs with
//! descending weights, see [`crate::ssvqe`]).

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::ansatz::{Ansatz, InitSpec, Objective, Rotation};
use crate::error::{Error, Result};
use crate::exact::{sector_spectrum, Sector, DEGENERACY_TOL};
use crate::hubbard::{build_pool, pool_descriptors, HubbardModel, OperatorDescriptor, PoolOperator};
use crate::optimize::{minimize, OptimizeConfig};
use crate::space::Space;
use crate::sparse::SparseMatrix;
use crate::state::StateVector;

/// Relative slack under which two pool gradients count as tied.
const TIE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptConfig {
    /// Energy part of the convergence test: the last step lowered the cost
    /// by less than this. Zero drops this part.
    pub epsilon: f64,
    /// Gradient part of the convergence test: every pool gradient magnitude
    /// is below this. Zero drops this part; with both parts dropped the run
    /// never stops on convergence.
    pub delta: f64,
    /// Stop when the Euclidean norm of the pool gradient falls below this.
    pub grad_stop: f64,
    pub max_depth: usize,
    /// Stop once the tracked fidelity reaches this value.
    pub target_fidelity: Option<f64>,
    pub optimizer: OptimizeConfig,
}

impl Default for AdaptConfig {
    fn default() -> Self {
        AdaptConfig {
            epsilon: 1e-3,
            delta: 1e-4,
            grad_stop: 1e-6,
            max_depth: 200,
            target_fidelity: None,
            optimizer: OptimizeConfig::default(),
        }
    }
}

impl AdaptConfig {
    /// No convergence test; only `grad_stop`, `max_depth` and an optional
    /// fidelity target end the run.
    pub fn exhaustive(max_depth: usize) -> Self {
        AdaptConfig {
            epsilon: 0.0,
            delta: 0.0,
            max_depth,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.epsilon, self.delta, self.grad_stop]
            .iter()
            .all(|v| v.is_finite() && *v >= 0.0);
        if !finite || self.grad_stop <= 0.0 {
            return Err(Error::Config(
                "epsilon and delta must be >= 0 and grad_stop > 0".into(),
            ));
        }
        if let Some(f) = self.target_fidelity {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::Config("target fidelity must lie in (0, 1]".into()));
            }
        }
        self.optimizer.validate()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub depth: usize,
    pub selected: OperatorDescriptor,
    /// Gradient of the selected generator at zero angle, before appending.
    pub pool_gradient: f64,
    pub pool_gradient_norm: f64,
    /// Cost after re-optimization (the energy for ground-state runs).
    pub energy: f64,
    pub state_energies: Vec<f64>,
    pub fidelity: Option<f64>,
    pub params: Vec<f64>,
    pub optimizer_iterations: usize,
    pub optimizer_converged: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    /// The last step lowered the cost by less than epsilon and every pool
    /// gradient is below delta.
    Converged,
    /// The pool gradient norm fell below grad_stop.
    PoolExhausted,
    MaxDepth,
    TargetFidelity,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::Converged => "converged",
            StopReason::PoolExhausted => "pool_exhausted",
            StopReason::MaxDepth => "max_depth",
            StopReason::TargetFidelity => "target_fidelity",
        }
    }
}

/// Result of one adaptive step.
#[derive(Clone, Debug, PartialEq)]
pub enum StepOutcome {
    Appended(StepRecord),
    /// All pool gradients are below `grad_stop`: nothing left to add.
    Exhausted { gradient_norm: f64 },
}

struct PoolEntry {
    descriptor: OperatorDescriptor,
    rotation: Rotation,
}

/// Adaptive state on one symmetry sector.
pub struct AdaptSession {
    space: Space,
    hamiltonian: SparseMatrix,
    pool: Vec<PoolEntry>,
    inputs: Vec<Vec<Complex64>>,
    weights: Vec<f64>,
    references: Option<Vec<Vec<Complex64>>>,
    ansatz: Ansatz,
    steps: Vec<usize>,
    config: AdaptConfig,
    current: Evaluated,
}

#[derive(Clone, Debug)]
struct Evaluated {
    cost: f64,
    energies: Vec<f64>,
    outputs: Vec<Vec<Complex64>>,
}

impl AdaptSession {
    /// Builds a session. `inputs` are full statevectors that must lie in
    /// `sector`; `references`, when given, are the target states used for
    /// fidelity tracking (one per input).
    pub fn new(
        model: &HubbardModel,
        sector: Sector,
        ansatz: Ansatz,
        inputs: &[StateVector],
        weights: &[f64],
        references: Option<&[StateVector]>,
        config: AdaptConfig,
    ) -> Result<Self> {
        config.validate()?;
        let n_modes = model.n_modes();
        if ansatz.n_modes() != n_modes {
            return Err(Error::validation("ansatz and model have different mode counts"));
        }
        if inputs.is_empty() || inputs.len() != weights.len() {
            return Err(Error::validation("need one weight per input state"));
        }
        let space = sector.space(n_modes)?;
        let hamiltonian = space.operator_matrix(&model.hamiltonian()?)?;
        let pool = pool_descriptors(n_modes)
            .into_iter()
            .map(|d| {
                Ok(PoolEntry {
                    descriptor: d,
                    rotation: Rotation::compile(&d, &space)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let inputs = inputs
            .iter()
            .map(|s| space.restrict(s))
            .collect::<Result<Vec<_>>>()
            .map_err(|_| Error::validation("initial state does not lie in the requested sector"))?;
        let references = references
            .map(|refs| refs.iter().map(|s| space.restrict(s)).collect::<Result<Vec<_>>>())
            .transpose()?;
        let steps = ansatz
            .descriptors()
            .map(|d| {
                pool.iter()
                    .position(|e| e.descriptor == d)
                    .ok_or_else(|| Error::validation("ansatz uses a generator outside the pool"))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut session = AdaptSession {
            space,
            hamiltonian,
            pool,
            inputs,
            weights: weights.to_vec(),
            references,
            ansatz,
            steps,
            config,
            current: Evaluated {
                cost: 0.0,
                energies: Vec::new(),
                outputs: Vec::new(),
            },
        };
        session.refresh();
        Ok(session)
    }

    fn objective(&self) -> (Vec<&Rotation>, Vec<f64>) {
        let rots = self.steps.iter().map(|&i| &self.pool[i].rotation).collect();
        (rots, self.ansatz.thetas())
    }

    fn refresh(&mut self) {
        let (rots, thetas) = self.objective();
        let eval = Objective {
            hamiltonian: &self.hamiltonian,
            rotations: &rots,
            inputs: &self.inputs,
            weights: &self.weights,
        }
        .evaluate(&thetas);
        self.current = Evaluated {
            cost: eval.cost,
            energies: eval.energies,
            outputs: eval.outputs,
        };
    }

    pub fn ansatz(&self) -> &Ansatz {
        &self.ansatz
    }

    pub fn cost(&self) -> f64 {
        self.current.cost
    }

    pub fn state_energies(&self) -> &[f64] {
        &self.current.energies
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn sector_hamiltonian(&self) -> &SparseMatrix {
        &self.hamiltonian
    }

    pub fn pool_descriptors(&self) -> Vec<OperatorDescriptor> {
        self.pool.iter().map(|e| e.descriptor).collect()
    }

    /// Prepared output states, embedded in the full space.
    pub fn outputs(&self) -> Vec<StateVector> {
        self.current.outputs.iter().map(|o| self.space.embed(o)).collect()
    }

    /// Smallest fidelity between each output and its reference.
    pub fn fidelity(&self) -> Option<f64> {
        self.references.as_ref().map(|refs| {
            refs.iter()
                .zip(&self.current.outputs)
                .map(|(r, o)| crate::linalg::dot(r, o).norm_sqr().min(1.0))
                .fold(1.0, f64::min)
        })
    }

    /// Derivative of the weighted cost with respect to a new angle on each
    /// pool generator, appended last and evaluated at zero:
    /// `sum_j w_j 2 Re <H psi_j| (T - T†) |psi_j>`.
    pub fn pool_gradients(&self) -> Vec<f64> {
        let h_out: Vec<Vec<Complex64>> = self
            .current
            .outputs
            .iter()
            .map(|o| self.hamiltonian.matvec(o))
            .collect();
        self.pool
            .iter()
            .map(|e| {
                self.current
                    .outputs
                    .iter()
                    .zip(&h_out)
                    .zip(&self.weights)
                    .map(|((psi, hpsi), w)| w * e.rotation.derivative(hpsi, psi))
                    .sum()
            })
            .collect()
    }

    /// Appends the steepest generator and re-optimizes all angles from the
    /// previous optimum with the new angle at zero.
    pub fn step(&mut self) -> Result<StepOutcome> {
        let grads = self.pool_gradients();
        self.step_with_gradients(&grads)
    }

    fn step_with_gradients(&mut self, grads: &[f64]) -> Result<StepOutcome> {
        let gradient_norm = libm::sqrt(grads.iter().map(|g| g * g).sum::<f64>());
        if gradient_norm < self.config.grad_stop {
            return Ok(StepOutcome::Exhausted { gradient_norm });
        }
        let chosen = select(grads);
        let descriptor = self.pool[chosen].descriptor;
        self.ansatz.push(descriptor, 0.0)?;
        self.steps.push(chosen);

        let (rots, thetas) = self.objective();
        let objective = Objective {
            hamiltonian: &self.hamiltonian,
            rotations: &rots,
            inputs: &self.inputs,
            weights: &self.weights,
        };
        let result = minimize(
            |x| {
                let e = objective.evaluate(x);
                (e.cost, e.gradient)
            },
            &thetas,
            &self.config.optimizer,
        )?;
        self.ansatz.set_thetas(&result.x_star)?;
        self.refresh();
        Ok(StepOutcome::Appended(StepRecord {
            depth: self.ansatz.depth(),
            selected: descriptor,
            pool_gradient: grads[chosen],
            pool_gradient_norm: gradient_norm,
            energy: self.current.cost,
            state_energies: self.current.energies.clone(),
            fidelity: self.fidelity(),
            params: self.ansatz.thetas(),
            optimizer_iterations: result.iterations,
            optimizer_converged: result.converged,
        }))
    }

    /// Runs steps until a stopping rule fires.
    pub fn run(&mut self) -> Result<(Vec<StepRecord>, StopReason)> {
        let mut records: Vec<StepRecord> = Vec::new();
        let mut last_gain: Option<f64> = None;
        loop {
            if let (Some(target), Some(f)) = (self.config.target_fidelity, self.fidelity()) {
                if f >= target {
                    return Ok((records, StopReason::TargetFidelity));
                }
            }
            if self.ansatz.depth() >= self.config.max_depth {
                return Ok((records, StopReason::MaxDepth));
            }
            let grads = self.pool_gradients();
            if self.converged(&grads, last_gain) {
                return Ok((records, StopReason::Converged));
            }
            let before = self.current.cost;
            match self.step_with_gradients(&grads)? {
                StepOutcome::Exhausted { .. } => return Ok((records, StopReason::PoolExhausted)),
                StepOutcome::Appended(rec) => {
                    last_gain = Some(before - rec.energy);
                    records.push(rec);
                }
            }
        }
    }

    // Both enabled criteria must hold: the last step gained less than
    // epsilon and no pool gradient reaches delta.
    fn converged(&self, grads: &[f64], last_gain: Option<f64>) -> bool {
        let (eps, delta) = (self.config.epsilon, self.config.delta);
        if eps == 0.0 && delta == 0.0 {
            return false;
        }
        let energy_ok = eps == 0.0 || last_gain.is_some_and(|g| g < eps);
        let largest = grads.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        let gradient_ok = delta == 0.0 || largest < delta;
        energy_ok && gradient_ok
    }
}

// Largest |g|; among near-ties the lowest pool index, which is the lowest
// canonical descriptor.
fn select(grads: &[f64]) -> usize {
    let largest = grads.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    let cut = largest - TIE_TOL * largest.max(1.0);
    grads.iter().position(|g| g.abs() >= cut).unwrap_or(0)
}

/// `dE/dtheta_m` at `theta_m = 0` for a generator appended after `state`:
/// `i <psi|[H, A_m]|psi> = -2 Im <H psi|A_m psi>`. Works for any Hermitian
/// generator, on the full space.
pub fn pool_gradients(state: &StateVector, hamiltonian: &SparseMatrix, pool: &[PoolOperator]) -> Result<Vec<f64>> {
    if hamiltonian.dim() != state.dim() {
        return Err(Error::validation("Hamiltonian and state dimensions differ"));
    }
    let space = Space::full(state.n_qubits())?;
    let psi = state.amplitudes();
    let hpsi = hamiltonian.matvec(psi);
    pool.iter()
        .map(|op| {
            let a = space.operator_matrix(&op.generator)?;
            let apsi = a.matvec(psi);
            Ok(-2.0 * crate::linalg::dot(&hpsi, &apsi).im)
        })
        .collect()
}

/// Everything a ground-state run produces.
#[derive(Clone, Debug)]
pub struct AdaptOutcome {
    pub ansatz: Ansatz,
    pub records: Vec<StepRecord>,
    pub final_state: StateVector,
    pub initial_energy: f64,
    pub initial_fidelity: Option<f64>,
    pub energy: f64,
    pub fidelity: Option<f64>,
    /// Exact sector ground energy, when fidelity tracking was on.
    pub exact_energy: Option<f64>,
    pub stop: StopReason,
}

/// Grows an ansatz for the ground state of `model` in `sector`.
///
/// With `track_fidelity`, the exact ground state of the sector is computed
/// first and must be non-degenerate.
pub fn run_adapt(
    model: &HubbardModel,
    sector: Sector,
    init: &InitSpec,
    config: &AdaptConfig,
    track_fidelity: bool,
) -> Result<AdaptOutcome> {
    if init.sector() != sector {
        return Err(Error::validation("initial state does not lie in the requested sector"));
    }
    let (reference, exact_energy) = if track_fidelity || config.target_fidelity.is_some() {
        let spec = sector_spectrum(&model.hamiltonian()?, sector)?;
        if spec.ground_gap() < DEGENERACY_TOL {
            return Err(Error::Config(alloc::format!(
                "ground state of sector ({}, {}) is degenerate (gap {:.3e}); fidelity is ill-defined, choose a filling with a unique ground state",
                sector.n_up,
                sector.n_down,
                spec.ground_gap()
            )));
        }
        (Some(spec.state(0)), Some(spec.energies[0]))
    } else {
        (None, None)
    };
    let start = init.prepare(model)?;
    let ansatz = Ansatz::new(model.n_modes(), init.clone())?;
    let refs = reference.map(|r| vec![r]);
    let mut session = AdaptSession::new(
        model,
        sector,
        ansatz,
        core::slice::from_ref(&start),
        &[1.0],
        refs.as_deref(),
        *config,
    )?;
    let initial_energy = session.cost();
    let initial_fidelity = session.fidelity();
    let (records, stop) = session.run()?;
    Ok(AdaptOutcome {
        final_state: session.outputs().remove(0),
        energy: session.cost(),
        fidelity: session.fidelity(),
        ansatz: session.ansatz().clone(),
        records,
        initial_energy,
        initial_fidelity,
        exact_energy,
        stop,
    })
}

/// One adaptive step from an existing (already optimized) ansatz.
/// Returns `None` when every pool gradient is below `grad_stop`.
pub fn adapt_step(
    current: &Ansatz,
    model: &HubbardModel,
    config: &AdaptConfig,
) -> Result<Option<(Ansatz, StepRecord)>> {
    let sector = current.init().sector();
    let start = current.init().prepare(model)?;
    let mut session = AdaptSession::new(
        model,
        sector,
        current.clone(),
        core::slice::from_ref(&start),
        &[1.0],
        None,
        *config,
    )?;
    match session.step()? {
        StepOutcome::Appended(rec) => Ok(Some((session.ansatz().clone(), rec))),
        StepOutcome::Exhausted { .. } => Ok(None),
    }
}

/// Full pool for a model, in canonical order.
pub fn model_pool(model: &HubbardModel) -> Result<Vec<PoolOperator>> {
    build_pool(model.n_sites())
}
