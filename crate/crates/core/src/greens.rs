//! Zero-temperature retarded Green's function in the Lehmann form and the
//! spectral function `A = -Im G / pi`, from exact or variational eigenstates.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::adapt::{run_adapt, AdaptConfig};
use crate::ansatz::InitSpec;
use crate::error::{Error, Result};
use crate::exact::{sector_spectrum, Sector, DEGENERACY_TOL};
use crate::fermion::FermionOperator;
use crate::hubbard::{is_down, momentum_mode, spread_occupation, HubbardModel, Spin};
use crate::space::Space;
use crate::ssvqe::{run_adapt_ssvqe, SubspaceSpec};
use crate::state::StateVector;

/// Poles and residues for one mode.
#[derive(Clone, Debug, PartialEq)]
pub struct LehmannData {
    pub ground_energy: f64,
    /// `(E_n, |<E_n|c†|G>|^2)` over the one-more-electron states.
    pub particle_terms: Vec<(f64, f64)>,
    /// `(E_n, |<E_n|c|G>|^2)` over the one-fewer-electron states.
    pub hole_terms: Vec<(f64, f64)>,
}

impl LehmannData {
    /// Total residue; 1 when both excitation sectors are complete.
    pub fn total_weight(&self) -> f64 {
        self.particle_terms.iter().chain(&self.hole_terms).map(|t| t.1).sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralData {
    pub omega: Vec<f64>,
    pub g: Vec<Complex64>,
    pub a: Vec<f64>,
    pub nu: f64,
}

/// Sector of a state supported on a single `(n_up, n_down)` block.
fn sector_of(state: &StateVector) -> Result<Sector> {
    let mut found: Option<Sector> = None;
    for (bits, a) in state.amplitudes().iter().enumerate() {
        if a.norm() <= 1e-12 {
            continue;
        }
        let up = (0..state.n_qubits()).filter(|&q| !is_down(q) && bits >> q & 1 == 1).count();
        let down = (bits.count_ones() as usize) - up;
        let s = Sector::new(up, down);
        match found {
            None => found = Some(s),
            Some(f) if f != s => return Err(Error::validation("state mixes particle-number sectors")),
            _ => {}
        }
    }
    found.ok_or_else(|| Error::validation("zero state"))
}

/// Spin of a mode operator that is a combination of annihilators of one spin.
fn annihilator_spin(op: &FermionOperator) -> Result<bool> {
    let mut spin: Option<bool> = None;
    for (ops, _) in op.iter() {
        let [l] = ops else {
            return Err(Error::validation("mode operator must be a sum of single annihilators"));
        };
        if l.creation {
            return Err(Error::validation("mode operator must be a sum of single annihilators"));
        }
        let d = is_down(l.mode);
        if spin.is_some_and(|s| s != d) {
            return Err(Error::validation("mode operator mixes spins"));
        }
        spin = Some(d);
    }
    spin.ok_or_else(|| Error::validation("mode operator is zero"))
}

/// Residues `|<E_n|c†|G>|^2` and `|<E_n|c|G>|^2` by direct inner products.
/// Each excited state is sorted into the particle or hole list by its
/// sector; a state in neither is rejected.
pub fn transition_amplitudes(
    ground_energy: f64,
    ground: &StateVector,
    excited: &[(f64, StateVector)],
    mode_op: &FermionOperator,
) -> Result<LehmannData> {
    let n = ground.n_qubits();
    if mode_op.n_modes() != n {
        return Err(Error::validation("mode operator and state sizes differ"));
    }
    let down = annihilator_spin(mode_op)?;
    let g_sector = sector_of(ground)?;
    let full = Space::full(n)?;
    let removed = full.apply_into(mode_op, ground.amplitudes(), &full)?;
    let added = full.apply_into(&mode_op.adjoint(), ground.amplitudes(), &full)?;
    let particle_sector = g_sector.shifted(down, 1, n);
    let hole_sector = g_sector.shifted(down, -1, n);

    let mut data = LehmannData {
        ground_energy,
        particle_terms: Vec::new(),
        hole_terms: Vec::new(),
    };
    for (energy, state) in excited {
        if state.n_qubits() != n {
            return Err(Error::validation("excited state size differs from the ground state"));
        }
        let s = sector_of(state)?;
        let overlap = |v: &[Complex64]| crate::linalg::dot(state.amplitudes(), v).norm_sqr();
        if Some(s) == particle_sector {
            data.particle_terms.push((*energy, overlap(&added)));
        } else if Some(s) == hole_sector {
            data.hole_terms.push((*energy, overlap(&removed)));
        } else {
            return Err(Error::validation(alloc::format!(
                "excited state in sector ({}, {}) is neither a particle nor a hole state of ({}, {})",
                s.n_up,
                s.n_down,
                g_sector.n_up,
                g_sector.n_down
            )));
        }
    }
    Ok(data)
}

/// `G(w) = sum w+ / (w + E_G - E_n + i nu) + sum w- / (w - E_G + E_n + i nu)`.
pub fn propagator(data: &LehmannData, omega: &[f64], nu: f64) -> Result<SpectralData> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::validation("broadening must be positive"));
    }
    if omega.windows(2).any(|w| w[0] >= w[1]) || omega.iter().any(|w| !w.is_finite()) {
        return Err(Error::validation("frequency grid must be finite and strictly ascending"));
    }
    let eg = data.ground_energy;
    let g: Vec<Complex64> = omega
        .iter()
        .map(|&w| {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(e, wt) in &data.particle_terms {
                acc += wt / Complex64::new(w + eg - e, nu);
            }
            for &(e, wt) in &data.hole_terms {
                acc += wt / Complex64::new(w - eg + e, nu);
            }
            acc
        })
        .collect();
    let a = g.iter().map(|z| -z.im / core::f64::consts::PI).collect();
    Ok(SpectralData {
        omega: omega.to_vec(),
        g,
        a,
        nu,
    })
}

/// `[min, max]` in steps of `step`, endpoints included when they fall on
/// the lattice.
pub fn omega_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && min.is_finite() && max.is_finite() && max > min) {
        return Err(Error::validation("frequency grid needs min < max and step > 0"));
    }
    let count = libm::floor((max - min) / step + 1e-9) as usize;
    Ok((0..=count).map(|i| min + i as f64 * step).collect())
}

/// Where the ground and excitation-sector states come from.
#[derive(Clone, Debug, PartialEq)]
pub enum SpectralSource {
    Exact,
    /// Adaptive ground state and adaptive subspace states. `k` overrides the
    /// number of states per excitation sector.
    Adaptive { config: AdaptConfig, k: Option<usize> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModeLabel {
    pub k_index: usize,
    pub spin: Spin,
}

#[derive(Clone, Debug)]
pub struct ModeSpectrum {
    pub label: ModeLabel,
    pub lehmann: LehmannData,
    pub spectral: SpectralData,
    /// Captured Lehmann weight; 1 for complete excitation bases.
    pub coverage: f64,
}

struct Excitations {
    states: Vec<(f64, StateVector)>,
}

fn sector_states(model: &HubbardModel, sector: Sector, source: &SpectralSource) -> Result<Excitations> {
    let states = match source {
        SpectralSource::Exact => {
            let spec = sector_spectrum(&model.hamiltonian()?, sector)?;
            (0..spec.energies.len()).map(|i| (spec.energies[i], spec.state(i))).collect()
        }
        SpectralSource::Adaptive { config, k } => {
            let k = match k {
                Some(k) => (*k).min(crate::exact::sector_basis(model.n_modes(), sector)?.len()),
                None => SubspaceSpec::default_k(sector, model.n_modes())?,
            };
            let spec = SubspaceSpec::lowest_basis(model, sector, k)?;
            let out = run_adapt_ssvqe(model, &spec, config)?;
            out.states.into_iter().map(|p| (p.energy, p.state)).collect()
        }
    };
    Ok(Excitations { states })
}

/// Ground state, excitation-sector states, residues and propagator for
/// each requested momentum mode.
pub fn spectral_pipeline(
    model: &HubbardModel,
    sector: Sector,
    source: &SpectralSource,
    modes: &[ModeLabel],
    omega: &[f64],
    nu: f64,
) -> Result<Vec<ModeSpectrum>> {
    let n = model.n_modes();
    sector.validate(n)?;
    let h = model.hamiltonian()?;
    let (ground_energy, ground) = match source {
        SpectralSource::Exact => {
            let spec = sector_spectrum(&h, sector)?;
            if spec.ground_gap() < DEGENERACY_TOL {
                return Err(Error::Config(alloc::format!(
                    "ground state of sector ({}, {}) is degenerate",
                    sector.n_up,
                    sector.n_down
                )));
            }
            (spec.energies[0], spec.state(0))
        }
        SpectralSource::Adaptive { config, .. } => {
            let occ = spread_occupation(&model.grid, sector.n_up, sector.n_down)?;
            let out = run_adapt(model, sector, &InitSpec::Product(occ), config, false)?;
            (out.energy, out.final_state)
        }
    };

    let mut cache: Vec<(Sector, Excitations)> = Vec::new();
    let mut results = Vec::with_capacity(modes.len());
    for label in modes {
        let op = momentum_mode(label.k_index, label.spin, &model.grid)?;
        let down = label.spin == Spin::Down;
        let mut excited: Vec<(f64, StateVector)> = Vec::new();
        for delta in [1, -1] {
            let Some(target) = sector.shifted(down, delta, n) else {
                continue;
            };
            if !cache.iter().any(|(s, _)| *s == target) {
                cache.push((target, sector_states(model, target, source)?));
            }
            let (_, ex) = cache.iter().find(|(s, _)| *s == target).expect("cached above");
            excited.extend(ex.states.iter().cloned());
        }
        let lehmann = transition_amplitudes(ground_energy, &ground, &excited, &op)?;
        let spectral = propagator(&lehmann, omega, nu)?;
        results.push(ModeSpectrum {
            label: *label,
            coverage: lehmann.total_weight(),
            lehmann,
            spectral,
        });
    }
    Ok(results)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hubbard::{GridSpec, HubbardParams};
    use crate::state::basis_state;

    #[test]
    fn single_pole_is_a_lorentzian() {
        let data = LehmannData {
            ground_energy: 0.0,
            particle_terms: alloc::vec![(2.0, 1.0)],
            hole_terms: alloc::vec![],
        };
        let nu = 0.1;
        let s = propagator(&data, &[1.9, 2.0, 2.1], nu).unwrap();
        let peak = 1.0 / (core::f64::consts::PI * nu);
        assert!((s.a[1] - peak).abs() < 1e-12);
        assert!((s.a[0] - peak / 2.0).abs() < 1e-9);
        assert!((s.a[2] - peak / 2.0).abs() < 1e-9);
        assert!(propagator(&data, &[0.0], 0.0).is_err());
        assert!(propagator(&data, &[1.0, 0.0], 0.1).is_err());
    }

    #[test]
    fn vacuum_has_no_hole_weight() {
        let grid = GridSpec::new(2, 1).unwrap();
        let model = HubbardModel::new(grid, HubbardParams::new(1.0, 0.0));
        let vac = basis_state(&[], 4).unwrap();
        let op = momentum_mode(0, Spin::Up, &grid).unwrap();
        let spec = sector_spectrum(&model.hamiltonian().unwrap(), Sector::new(1, 0)).unwrap();
        let excited: Vec<_> = (0..2).map(|i| (spec.energies[i], spec.state(i))).collect();
        let d = transition_amplitudes(0.0, &vac, &excited, &op).unwrap();
        assert!(d.hole_terms.is_empty());
        assert!((d.total_weight() - 1.0).abs() < 1e-12);
        // A state two electrons away is rejected.
        let far = basis_state(&[0, 1], 4).unwrap();
        assert!(transition_amplitudes(0.0, &vac, &[(0.0, far)], &op).is_err());
    }

    #[test]
    fn grid_endpoints() {
        let g = omega_grid(-1.0, 1.0, 0.5).unwrap();
        assert_eq!(g, alloc::vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(omega_grid(-10.0, 10.0, 0.01).unwrap().len(), 2001);
    }
}
