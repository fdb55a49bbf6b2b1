//! Executes one task of a [`RunConfig`] and renders its artifacts.

use std::time::Instant;

use hubbard_adapt_core::exact::{sector_spectrum, DEGENERACY_TOL};
use hubbard_adapt_core::greens::{omega_grid, spectral_pipeline, ModeSpectrum, SpectralSource};
use hubbard_adapt_core::ssvqe::{run_adapt_ssvqe, SsvqeOutcome, SubspaceSpec};
use hubbard_adapt_core::{build_pool, run_adapt, AdaptOutcome, OperatorDescriptor, Spin, StepRecord};
use serde::Serialize;

use crate::config::{GreensSection, ModeSection, RunConfig, SourceName, SpinName, Task};
use crate::error::RunError;
use crate::output::{csv_number, f17s, to_json, Artifacts, F17};

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Files of a finished run plus the in-memory outcome, for callers that
/// aggregate several runs.
#[derive(Debug)]
pub struct RunOutput {
    pub task: Task,
    pub artifacts: Artifacts,
    pub ground: Option<AdaptOutcome>,
}

#[derive(Serialize)]
struct TraceLine {
    depth: usize,
    energy: F17,
    fidelity: Option<F17>,
    selected: String,
    gradient: F17,
    gradient_norm: F17,
    #[serde(skip_serializing_if = "Option::is_none")]
    state_energies: Option<Vec<F17>>,
    params: Vec<F17>,
    optimizer_iterations: usize,
    optimizer_converged: bool,
}

fn trace(records: &[StepRecord], with_states: bool) -> String {
    let mut out = String::new();
    for r in records {
        let line = TraceLine {
            depth: r.depth,
            energy: F17(r.energy),
            fidelity: r.fidelity.map(F17),
            selected: r.selected.to_string(),
            gradient: F17(r.pool_gradient),
            gradient_norm: F17(r.pool_gradient_norm),
            state_energies: with_states.then(|| f17s(&r.state_energies)),
            params: f17s(&r.params),
            optimizer_iterations: r.optimizer_iterations,
            optimizer_converged: r.optimizer_converged,
        };
        out.push_str(&serde_json::to_string(&line).expect("trace serializes"));
        out.push('\n');
    }
    out
}

/// First depth at which the fidelity reaches `target`, counting the
/// reference state as depth 0.
pub fn depth_to_fidelity(outcome: &AdaptOutcome, target: f64) -> Option<usize> {
    if outcome.initial_fidelity.is_some_and(|f| f >= target) {
        return Some(0);
    }
    outcome.records.iter().find(|r| r.fidelity.is_some_and(|f| f >= target)).map(|r| r.depth)
}

#[derive(Serialize)]
struct Header<'a> {
    task: &'a str,
    code_version: &'a str,
    grid: String,
    t: F17,
    u: F17,
    mu: F17,
    sector: Option<[usize; 2]>,
}

fn header<'a>(config: &RunConfig, task: Task) -> Result<Header<'a>, RunError> {
    let p = config.hubbard_params();
    Ok(Header {
        task: task.as_str(),
        code_version: CODE_VERSION,
        grid: config.grid_spec()?.to_string(),
        t: F17(p.t),
        u: F17(p.u),
        mu: F17(p.mu),
        sector: config.sector.map(|s| [s.n_up, s.n_down]),
    })
}

#[derive(Serialize)]
struct RunResult<'a, B: Serialize> {
    #[serde(flatten)]
    header: Header<'a>,
    #[serde(flatten)]
    body: B,
    wall_time_s: F17,
    config: String,
}

fn result_json<B: Serialize>(config: &RunConfig, task: Task, body: B, started: Instant) -> Result<String, RunError> {
    Ok(to_json(&RunResult {
        header: header(config, task)?,
        body,
        wall_time_s: F17(started.elapsed().as_secs_f64()),
        config: config.to_toml(),
    }))
}

/// Runs `task` and returns its artifacts without touching the filesystem.
pub fn run_task(config: &RunConfig, task: Task) -> Result<RunOutput, RunError> {
    config.validate()?;
    config.validate_for(task)?;
    let started = Instant::now();
    let mut artifacts = Artifacts::default();
    let mut ground = None;
    match task {
        Task::Ground => {
            let out = ground_task(config)?;
            artifacts.push("trace.jsonl", trace(&out.records, false));
            artifacts.push("ansatz.txt", out.ansatz.to_text());
            artifacts.push("result.json", result_json(config, task, ground_body(&out), started)?);
            ground = Some(out);
        }
        Task::Excited => {
            let out = excited_task(config)?;
            artifacts.push("trace.jsonl", trace(&out.records, true));
            artifacts.push("ansatz.txt", out.ansatz.to_text());
            artifacts.push("result.json", result_json(config, task, excited_body(&out), started)?);
        }
        Task::Greens => {
            let (spectra, source) = greens_task(config)?;
            for s in &spectra {
                artifacts.push(mode_file(s), spectrum_csv(s));
            }
            artifacts.push("result.json", result_json(config, task, greens_body(&spectra, source), started)?);
        }
        Task::Ed => {
            let body = ed_body(config)?;
            artifacts.push("result.json", result_json(config, task, body, started)?);
        }
        Task::Pool => {
            let body = pool_body(config)?;
            artifacts.push("result.json", result_json(config, task, body, started)?);
        }
    }
    artifacts.push("config.toml", config.to_toml());
    Ok(RunOutput {
        task,
        artifacts,
        ground,
    })
}

fn ground_task(config: &RunConfig) -> Result<AdaptOutcome, RunError> {
    let model = config.model()?;
    Ok(run_adapt(
        &model,
        config.sector()?,
        &config.init_spec()?,
        &config.adapt.to_core(),
        config.adapt.track_fidelity,
    )?)
}

#[derive(Serialize)]
struct GroundBody {
    energy: F17,
    exact_energy: Option<F17>,
    delta_e: Option<F17>,
    initial_energy: F17,
    fidelity: Option<F17>,
    initial_fidelity: Option<F17>,
    depth: usize,
    parameters: usize,
    depth_to_099: Option<usize>,
    stop: &'static str,
}

fn ground_body(out: &AdaptOutcome) -> GroundBody {
    GroundBody {
        energy: F17(out.energy),
        exact_energy: out.exact_energy.map(F17),
        delta_e: out.exact_energy.map(|e| F17(out.energy - e)),
        initial_energy: F17(out.initial_energy),
        fidelity: out.fidelity.map(F17),
        initial_fidelity: out.initial_fidelity.map(F17),
        depth: out.ansatz.depth(),
        parameters: out.ansatz.depth(),
        depth_to_099: depth_to_fidelity(out, 0.99),
        stop: out.stop.as_str(),
    }
}

fn subspace_spec(config: &RunConfig) -> Result<SubspaceSpec, RunError> {
    let model = config.model()?;
    let sector = config.sector()?;
    let section = config.ssvqe.clone().unwrap_or_default();
    let spec = match (section.weights, section.k) {
        (Some(w), _) => SubspaceSpec::lowest_basis_weighted(&model, sector, w)?,
        (None, Some(k)) => SubspaceSpec::lowest_basis(&model, sector, k)?,
        (None, None) => SubspaceSpec::lowest_basis(&model, sector, SubspaceSpec::default_k(sector, model.n_modes())?)?,
    };
    Ok(spec)
}

fn excited_task(config: &RunConfig) -> Result<SsvqeOutcome, RunError> {
    let model = config.model()?;
    let spec = subspace_spec(config)?;
    Ok(run_adapt_ssvqe(&model, &spec, &config.adapt.to_core())?)
}

#[derive(Serialize)]
struct StateRow {
    energy: F17,
    exact_energy: F17,
    error: F17,
    input: usize,
    degenerate: bool,
}

#[derive(Serialize)]
struct ExcitedBody {
    k: usize,
    cost: F17,
    states: Vec<StateRow>,
    orthonormality_error: F17,
    ordering_violation: bool,
    depth: usize,
    parameters: usize,
    stop: &'static str,
}

fn excited_body(out: &SsvqeOutcome) -> ExcitedBody {
    ExcitedBody {
        k: out.states.len(),
        cost: F17(out.cost),
        states: out
            .states
            .iter()
            .zip(&out.exact_energies)
            .map(|(s, &e)| StateRow {
                energy: F17(s.energy),
                exact_energy: F17(e),
                error: F17(s.energy - e),
                input: s.input,
                degenerate: s.degenerate,
            })
            .collect(),
        orthonormality_error: F17(out.orthonormality_error),
        ordering_violation: out.ordering_violation,
        depth: out.ansatz.depth(),
        parameters: out.ansatz.depth(),
        stop: out.stop.as_str(),
    }
}

fn greens_task(config: &RunConfig) -> Result<(Vec<ModeSpectrum>, SourceName), RunError> {
    let model = config.model()?;
    let g = config.greens.clone().unwrap_or_default();
    let omega = omega_grid(g.omega_min, g.omega_max, g.omega_step)?;
    let source = match g.source {
        SourceName::Exact => SpectralSource::Exact,
        SourceName::Adaptive => SpectralSource::Adaptive {
            config: config.adapt.to_core(),
            k: config.ssvqe.as_ref().and_then(|s| s.k),
        },
    };
    let labels: Vec<_> = modes_or_default(config, &g)?.iter().map(ModeSection::label).collect();
    Ok((spectral_pipeline(&model, config.sector()?, &source, &labels, &omega, g.nu)?, g.source))
}

fn modes_or_default(config: &RunConfig, g: &GreensSection) -> Result<Vec<ModeSection>, RunError> {
    if !g.modes.is_empty() {
        return Ok(g.modes.clone());
    }
    let (len, _) = config.grid_spec()?.chain().expect("checked by validate_for");
    Ok((0..len).map(|k| ModeSection { k, spin: SpinName::Up }).collect())
}

fn spin_name(s: Spin) -> &'static str {
    match s {
        Spin::Up => "up",
        Spin::Down => "down",
    }
}

fn mode_file(s: &ModeSpectrum) -> String {
    format!("spectral_k{}_{}.csv", s.label.k_index, spin_name(s.label.spin))
}

fn spectrum_csv(s: &ModeSpectrum) -> String {
    let mut out = String::from("omega,re_G,im_G,A\n");
    let d = &s.spectral;
    for i in 0..d.omega.len() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            csv_number(d.omega[i]),
            csv_number(d.g[i].re),
            csv_number(d.g[i].im),
            csv_number(d.a[i])
        ));
    }
    out
}

#[derive(Serialize)]
struct Pole {
    energy: F17,
    excitation: F17,
    weight: F17,
}

#[derive(Serialize)]
struct ModeRow {
    k: usize,
    spin: &'static str,
    file: String,
    coverage: F17,
    particle: Vec<Pole>,
    hole: Vec<Pole>,
}

#[derive(Serialize)]
struct GreensBody {
    source: &'static str,
    ground_energy: Option<F17>,
    nu: F17,
    omega_convention: &'static str,
    modes: Vec<ModeRow>,
}

fn greens_body(spectra: &[ModeSpectrum], source: SourceName) -> GreensBody {
    let poles = |terms: &[(f64, f64)], e0: f64, sign: f64| {
        terms
            .iter()
            .map(|&(e, w)| Pole {
                energy: F17(e),
                excitation: F17(sign * (e - e0)),
                weight: F17(w),
            })
            .collect()
    };
    GreensBody {
        source: match source {
            SourceName::Exact => "exact",
            SourceName::Adaptive => "adaptive",
        },
        ground_energy: spectra.first().map(|s| F17(s.lehmann.ground_energy)),
        nu: F17(spectra.first().map_or(f64::NAN, |s| s.spectral.nu)),
        omega_convention: "absolute frequency of the Hamiltonian including -mu N",
        modes: spectra
            .iter()
            .map(|s| ModeRow {
                k: s.label.k_index,
                spin: spin_name(s.label.spin),
                file: mode_file(s),
                coverage: F17(s.coverage),
                particle: poles(&s.lehmann.particle_terms, s.lehmann.ground_energy, 1.0),
                hole: poles(&s.lehmann.hole_terms, s.lehmann.ground_energy, -1.0),
            })
            .collect(),
    }
}

/// Levels reported by the `ed` task.
pub const ED_LEVELS: usize = 16;

#[derive(Serialize)]
struct EdBody {
    ground_energy: F17,
    gap: F17,
    degenerate: bool,
    dimension: usize,
    energies: Vec<F17>,
}

fn ed_body(config: &RunConfig) -> Result<EdBody, RunError> {
    let model = config.model()?;
    let spec = sector_spectrum(&model.hamiltonian()?, config.sector()?)?;
    let gap = spec.ground_gap();
    Ok(EdBody {
        ground_energy: F17(spec.energies[0]),
        gap: F17(gap),
        degenerate: gap < DEGENERACY_TOL,
        dimension: spec.energies.len(),
        energies: f17s(&spec.energies[..spec.energies.len().min(ED_LEVELS)]),
    })
}

#[derive(Serialize)]
struct PoolBody {
    n_sites: usize,
    n_modes: usize,
    one_body: usize,
    two_body: usize,
    total: usize,
    operators: Vec<String>,
}

fn pool_body(config: &RunConfig) -> Result<PoolBody, RunError> {
    let grid = config.grid_spec()?;
    let pool = build_pool(grid.n_sites())?;
    let one_body = pool
        .iter()
        .filter(|p| matches!(p.descriptor, OperatorDescriptor::OneBody { .. }))
        .count();
    Ok(PoolBody {
        n_sites: grid.n_sites(),
        n_modes: grid.n_modes(),
        one_body,
        two_body: pool.len() - one_body,
        total: pool.len(),
        operators: pool.iter().map(|p| p.descriptor.to_string()).collect(),
    })
}
