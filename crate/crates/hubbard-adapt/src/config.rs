//! Run configuration: a sectioned TOML document, validated before any
//! computation starts.

use std::path::PathBuf;

use hubbard_adapt_core::adapt::AdaptConfig;
use hubbard_adapt_core::greens::ModeLabel;
use hubbard_adapt_core::hubbard::spread_occupation;
use hubbard_adapt_core::{Boundary, GridSpec, HubbardModel, HubbardParams, InitSpec, Sector, Spin};
use serde::{Deserialize, Serialize};

use crate::error::RunError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Ground,
    Excited,
    Greens,
    Ed,
    Pool,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::Ground => "ground",
            Task::Excited => "excited",
            Task::Greens => "greens",
            Task::Ed => "ed",
            Task::Pool => "pool",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<Task>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Only feeds randomized tests; every algorithm here is deterministic.
    #[serde(default)]
    pub seed: u64,
    pub grid: GridSection,
    #[serde(default)]
    pub params: ParamsSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sector: Option<SectorSection>,
    #[serde(default)]
    pub init: InitSection,
    #[serde(default)]
    pub adapt: AdaptSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ssvqe: Option<SsvqeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub greens: Option<GreensSection>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryName {
    #[default]
    Open,
    PeriodicX,
    PeriodicXy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub width: usize,
    pub height: usize,
    #[serde(default)]
    pub boundary: BoundaryName,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuMode {
    #[default]
    None,
    HalfFillingShift,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    #[serde(default = "one")]
    pub t: f64,
    #[serde(default, alias = "U")]
    pub u: f64,
    /// Explicit chemical potential; exclusive with `mu_mode`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_mode: Option<MuMode>,
}

impl Default for ParamsSection {
    fn default() -> Self {
        ParamsSection {
            t: 1.0,
            u: 0.0,
            mu: None,
            mu_mode: None,
        }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectorSection {
    pub n_up: usize,
    pub n_down: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitSection {
    #[default]
    AutoSpread,
    Product {
        occupied: Vec<usize>,
    },
    Slater,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptSection {
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_grad_stop")]
    pub grad_stop: f64,
    #[serde(default = "default_max_depth")]
    pub max_depth: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_fidelity: Option<f64>,
    /// Compare each step against the exact ground state.
    #[serde(default = "yes")]
    pub track_fidelity: bool,
}

fn default_epsilon() -> f64 {
    1e-3
}
fn default_delta() -> f64 {
    1e-4
}
fn default_grad_stop() -> f64 {
    1e-6
}
fn default_max_depth() -> usize {
    200
}
fn yes() -> bool {
    true
}

impl Default for AdaptSection {
    fn default() -> Self {
        AdaptSection {
            epsilon: default_epsilon(),
            delta: default_delta(),
            grad_stop: default_grad_stop(),
            max_depth: default_max_depth(),
            target_fidelity: None,
            track_fidelity: true,
        }
    }
}

impl AdaptSection {
    pub fn to_core(&self) -> AdaptConfig {
        AdaptConfig {
            epsilon: self.epsilon,
            delta: self.delta,
            grad_stop: self.grad_stop,
            max_depth: self.max_depth,
            target_fidelity: self.target_fidelity,
            ..AdaptConfig::default()
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SsvqeSection {
    /// Number of target states; defaults to the sector dimension up to 16,
    /// else 8.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Strictly descending; defaults to `2^(K-1-j)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceName {
    #[default]
    Adaptive,
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpinName {
    Up,
    Down,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSection {
    pub k: usize,
    pub spin: SpinName,
}

impl ModeSection {
    pub fn label(&self) -> ModeLabel {
        ModeLabel {
            k_index: self.k,
            spin: match self.spin {
                SpinName::Up => Spin::Up,
                SpinName::Down => Spin::Down,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreensSection {
    #[serde(default)]
    pub source: SourceName,
    #[serde(default = "default_nu")]
    pub nu: f64,
    #[serde(default = "default_omega_min")]
    pub omega_min: f64,
    #[serde(default = "default_omega_max")]
    pub omega_max: f64,
    #[serde(default = "default_omega_step")]
    pub omega_step: f64,
    /// Defaults to every up-spin momentum of the chain.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub modes: Vec<ModeSection>,
}

fn default_nu() -> f64 {
    0.1
}
fn default_omega_min() -> f64 {
    -10.0
}
fn default_omega_max() -> f64 {
    10.0
}
fn default_omega_step() -> f64 {
    0.01
}

impl Default for GreensSection {
    fn default() -> Self {
        GreensSection {
            source: SourceName::default(),
            nu: default_nu(),
            omega_min: default_omega_min(),
            omega_max: default_omega_max(),
            omega_step: default_omega_step(),
            modes: Vec::new(),
        }
    }
}

/// Parses and validates a config document.
pub fn parse_config(text: &str) -> Result<RunConfig, RunError> {
    let de = toml::Deserializer::new(text);
    let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let key = if path == "." { String::new() } else { format!("`{path}`: ") };
        RunError::Config(format!("{key}{}{}", inner.message(), location(text, inner.span())))
    })?;
    config.validate()?;
    Ok(config)
}

fn location(text: &str, span: Option<std::ops::Range<usize>>) -> String {
    match span {
        Some(r) => {
            let line = text[..r.start.min(text.len())].matches('\n').count() + 1;
            format!(" (line {line})")
        }
        None => String::new(),
    }
}

fn bad(key: &str, msg: impl std::fmt::Display) -> RunError {
    RunError::Config(format!("`{key}`: {msg}"))
}

impl RunConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn grid_spec(&self) -> Result<GridSpec, RunError> {
        let boundary = match self.grid.boundary {
            BoundaryName::Open => Boundary::Open,
            BoundaryName::PeriodicX => Boundary::PeriodicX,
            BoundaryName::PeriodicXy => Boundary::PeriodicXY,
        };
        GridSpec::with_boundary(self.grid.width, self.grid.height, boundary).map_err(|e| bad("grid", e))
    }

    pub fn hubbard_params(&self) -> HubbardParams {
        let p = &self.params;
        let mu = match (p.mu, p.mu_mode) {
            (Some(mu), _) => mu,
            (None, Some(MuMode::HalfFillingShift)) => p.u / 2.0,
            (None, _) => 0.0,
        };
        HubbardParams { t: p.t, u: p.u, mu }
    }

    pub fn model(&self) -> Result<HubbardModel, RunError> {
        Ok(HubbardModel::new(self.grid_spec()?, self.hubbard_params()))
    }

    pub fn sector(&self) -> Result<Sector, RunError> {
        let s = self.sector.ok_or_else(|| bad("sector", "required for this task"))?;
        Ok(Sector::new(s.n_up, s.n_down))
    }

    pub fn init_spec(&self) -> Result<InitSpec, RunError> {
        let sector = self.sector()?;
        Ok(match &self.init {
            InitSection::AutoSpread => {
                InitSpec::Product(spread_occupation(&self.grid_spec()?, sector.n_up, sector.n_down).map_err(|e| bad("init", e))?)
            }
            InitSection::Product { occupied } => InitSpec::Product(occupied.clone()),
            InitSection::Slater => InitSpec::Slater {
                n_up: sector.n_up,
                n_down: sector.n_down,
            },
        })
    }

    /// Task from the command line, reconciled with the `task` key.
    pub fn resolve_task(&self, cli: Option<Task>) -> Result<Task, RunError> {
        match (cli, self.task) {
            (Some(a), Some(b)) if a != b => Err(bad(
                "task",
                format!("config says `{}` but `{}` was requested", b.as_str(), a.as_str()),
            )),
            (Some(a), _) | (None, Some(a)) => Ok(a),
            (None, None) => Err(bad("task", "missing")),
        }
    }

    pub fn validate(&self) -> Result<(), RunError> {
        let grid = self.grid_spec()?;
        let p = &self.params;
        if !(p.t.is_finite() && p.u.is_finite()) {
            return Err(bad("params", "t and u must be finite"));
        }
        match (p.mu, p.mu_mode) {
            (Some(_), Some(_)) => return Err(bad("params.mu", "give either `mu` or `mu_mode`, not both")),
            (Some(mu), None) if !mu.is_finite() => return Err(bad("params.mu", "must be finite")),
            _ => {}
        }
        if let Some(s) = self.sector {
            if s.n_up > grid.n_sites() || s.n_down > grid.n_sites() {
                return Err(bad(
                    "sector",
                    format!("({}, {}) does not fit on {} sites", s.n_up, s.n_down, grid.n_sites()),
                ));
            }
        }
        if let InitSection::Product { occupied } = &self.init {
            let n = grid.n_modes();
            if let Some(&m) = occupied.iter().find(|&&m| m >= n) {
                return Err(bad("init.occupied", format!("mode {m} is beyond {n} modes")));
            }
            let mut sorted = occupied.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != occupied.len() {
                return Err(bad("init.occupied", "modes repeat"));
            }
            if let Some(s) = self.sector {
                let up = occupied.iter().filter(|&&m| m % 2 == 0).count();
                if up != s.n_up || occupied.len() - up != s.n_down {
                    return Err(bad("init.occupied", format!("does not lie in sector ({}, {})", s.n_up, s.n_down)));
                }
            }
        }
        self.adapt.to_core().validate().map_err(|e| bad("adapt", e))?;
        if let Some(ss) = &self.ssvqe {
            if ss.k == Some(0) {
                return Err(bad("ssvqe.k", "must be at least 1"));
            }
            if let Some(w) = &ss.weights {
                if w.is_empty() || w.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                    return Err(bad("ssvqe.weights", "must be positive and finite"));
                }
                if w.windows(2).any(|p| p[0] <= p[1]) {
                    return Err(bad("ssvqe.weights", "must be strictly descending"));
                }
                if ss.k.is_some_and(|k| k != w.len()) {
                    return Err(bad("ssvqe.weights", "length differs from `k`"));
                }
            }
        }
        if let Some(g) = &self.greens {
            if !(g.nu.is_finite() && g.nu > 0.0) {
                return Err(bad("greens.nu", "must be positive"));
            }
            if !(g.omega_step > 0.0 && g.omega_max > g.omega_min) {
                return Err(bad("greens", "need omega_min < omega_max and omega_step > 0"));
            }
            if (g.omega_max - g.omega_min) / g.omega_step > 1e7 {
                return Err(bad("greens.omega_step", "grid has more than 1e7 points"));
            }
        }
        Ok(())
    }

    /// Checks the keys a particular task needs.
    pub fn validate_for(&self, task: Task) -> Result<(), RunError> {
        if task != Task::Pool {
            self.sector()?;
        }
        if task == Task::Greens && self.grid_spec()?.chain().is_none() {
            return Err(bad("grid", "spectral functions need a chain (height 1)"));
        }
        Ok(())
    }
}
