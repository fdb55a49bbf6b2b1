use hubbard_adapt_core::exact::sector_spectrum;
use hubbard_adapt_core::greens::*;
use hubbard_adapt_core::linalg::symmetric_eigen;
use hubbard_adapt_core::*;

fn model(u: f64) -> HubbardModel {
    HubbardModel::new(GridSpec::new(2, 1).unwrap(), HubbardParams::half_filling_shift(1.0, u))
}

fn modes() -> [ModeLabel; 2] {
    [
        ModeLabel { k_index: 0, spin: Spin::Up },
        ModeLabel { k_index: 1, spin: Spin::Up },
    ]
}

fn jw(op: &FermionOperator) -> SparseMatrix {
    operator_matrix(&jordan_wigner(op).unwrap(), op.n_modes()).unwrap()
}

fn matvec(m: &SparseMatrix, v: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
    for (r, c, x) in m.entries() {
        out[r] += x * v[c];
    }
    out
}

// Sums over every eigenstate of the full Fock-space Hamiltonian, with no
// sector bookkeeping.
fn brute_force_g(m: &HubbardModel, k: usize, omega: &[f64], nu: f64) -> Vec<Complex64> {
    let n = m.n_modes();
    let dim = 1 << n;
    let h_op = m.hamiltonian().unwrap();
    let h = jw(&h_op);
    let mut dense = vec![0.0; dim * dim];
    for (r, c, v) in h.entries() {
        dense[r * dim + c] = v.re;
    }
    let eig = symmetric_eigen(&dense, dim);
    let gs = ground_state(&h_op, Sector::new(1, 1)).unwrap();
    let c = jw(&momentum_mode(k, Spin::Up, &m.grid).unwrap());
    let removed = matvec(&c, gs.state.amplitudes());
    let added = matvec(&c.adjoint(), gs.state.amplitudes());
    let proj = |vec: &[f64], w: &[Complex64]| vec.iter().zip(w).map(|(a, b)| b * *a).sum::<Complex64>().norm_sqr();
    omega
        .iter()
        .map(|&w| {
            let mut g = Complex64::new(0.0, 0.0);
            for (e, v) in eig.values.iter().zip(&eig.vectors) {
                g += proj(v, &added) / Complex64::new(w + gs.energy - e, nu);
                g += proj(v, &removed) / Complex64::new(w - gs.energy + e, nu);
            }
            g
        })
        .collect()
}

#[test]
fn exact_spectra_match_brute_force_lehmann_sum() {
    let m = model(3.0);
    let omega = omega_grid(-6.0, 6.0, 0.05).unwrap();
    let out = spectral_pipeline(&m, Sector::new(1, 1), &SpectralSource::Exact, &modes(), &omega, 0.1).unwrap();
    for spec in &out {
        let oracle = brute_force_g(&m, spec.label.k_index, &omega, 0.1);
        for (a, b) in spec.spectral.g.iter().zip(&oracle) {
            assert!((a - b).norm() < 1e-10, "k={}", spec.label.k_index);
        }
    }
}

#[test]
fn sum_rule_and_positivity() {
    for u in [0.0, 1.0, 3.0, 6.0] {
        let omega = omega_grid(-10.0, 10.0, 0.01).unwrap();
        let out = spectral_pipeline(&model(u), Sector::new(1, 1), &SpectralSource::Exact, &modes(), &omega, 0.1).unwrap();
        for spec in &out {
            assert!((spec.coverage - 1.0).abs() < 1e-8, "U={u}");
            assert!(spec.lehmann.particle_terms.iter().chain(&spec.lehmann.hole_terms).all(|t| t.1 >= 0.0));
            assert!(spec.spectral.a.iter().all(|&a| a >= -1e-12));
            for (g, a) in spec.spectral.g.iter().zip(&spec.spectral.a) {
                assert!((a + g.im / std::f64::consts::PI).abs() < 1e-14);
            }
        }
    }
}

#[test]
fn free_dimer_bonding_mode_has_one_pole() {
    // U = 0, mu = 0: the (1,1) ground state fills the bonding orbital, so
    // removing a bonding electron reaches exactly one state.
    let m = HubbardModel::new(GridSpec::new(2, 1).unwrap(), HubbardParams::new(1.0, 0.0));
    let out = spectral_pipeline(&m, Sector::new(1, 1), &SpectralSource::Exact, &modes()[..1], &[0.0], 0.1).unwrap();
    let weights: Vec<f64> = out[0]
        .lehmann
        .particle_terms
        .iter()
        .chain(&out[0].lehmann.hole_terms)
        .map(|t| t.1)
        .filter(|w| *w > 1e-12)
        .collect();
    assert_eq!(weights.len(), 1);
    assert!((weights[0] - 1.0).abs() < 1e-12);
}

#[test]
fn peaks_sit_at_excitation_energies() {
    let m = model(3.0);
    let h = m.hamiltonian().unwrap();
    let e0 = ground_state(&h, Sector::new(1, 1)).unwrap().energy;
    let omega = omega_grid(-10.0, 10.0, 0.01).unwrap();
    let out = spectral_pipeline(&m, Sector::new(1, 1), &SpectralSource::Exact, &modes(), &omega, 0.1).unwrap();
    let mut poles: Vec<f64> = Vec::new();
    for e in sector_spectrum(&h, Sector::new(2, 1)).unwrap().energies {
        poles.push(e - e0);
    }
    for e in sector_spectrum(&h, Sector::new(0, 1)).unwrap().energies {
        poles.push(e0 - e);
    }
    for spec in &out {
        let a = &spec.spectral.a;
        for i in 1..a.len() - 1 {
            if a[i] > a[i - 1] && a[i] > a[i + 1] && a[i] > 0.5 {
                let w = omega[i];
                assert!(poles.iter().any(|p| (p - w).abs() <= 0.01), "peak at {w} not in {poles:?}");
            }
        }
    }
}

#[test]
fn integral_of_a_matches_total_weight() {
    let omega = omega_grid(-10.0, 10.0, 0.01).unwrap();
    for u in [3.0, 6.0] {
        let out = spectral_pipeline(&model(u), Sector::new(1, 1), &SpectralSource::Exact, &modes(), &omega, 0.1).unwrap();
        for spec in &out {
            let integral: f64 = spec.spectral.a.windows(2).map(|p| 0.5 * (p[0] + p[1]) * 0.01).sum();
            assert!((integral - spec.coverage).abs() < 0.01 * spec.coverage, "U={u}: {integral}");
        }
    }
}

#[test]
fn half_filled_dimer_is_particle_hole_symmetric() {
    let omega = omega_grid(-10.0, 10.0, 0.01).unwrap();
    let n = omega.len();
    for u in [1.0, 3.0, 6.0] {
        let out = spectral_pipeline(&model(u), Sector::new(1, 1), &SpectralSource::Exact, &modes(), &omega, 0.1).unwrap();
        for i in 0..n {
            assert!((out[0].spectral.a[i] - out[1].spectral.a[n - 1 - i]).abs() < 1e-8, "U={u}");
        }
    }
}

#[test]
fn adaptive_source_agrees_with_exact_source() {
    let omega = omega_grid(-10.0, 10.0, 0.01).unwrap();
    let adaptive = SpectralSource::Adaptive {
        config: AdaptConfig::default(),
        k: None,
    };
    for u in [3.0, 6.0] {
        let m = model(u);
        let ed = spectral_pipeline(&m, Sector::new(1, 1), &SpectralSource::Exact, &modes(), &omega, 0.1).unwrap();
        let ad = spectral_pipeline(&m, Sector::new(1, 1), &adaptive, &modes(), &omega, 0.1).unwrap();
        for (e, a) in ed.iter().zip(&ad) {
            let worst = e.spectral.a.iter().zip(&a.spectral.a).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            assert!(worst < 1e-3, "U={u} k={}: {worst:e}", e.label.k_index);
            assert!(a.coverage > 1.0 - 1e-6);
        }
    }
}

#[test]
fn truncated_subspace_reports_partial_coverage() {
    let omega = omega_grid(-4.0, 4.0, 0.1).unwrap();
    let source = SpectralSource::Adaptive {
        config: AdaptConfig::default(),
        k: Some(1),
    };
    let out = spectral_pipeline(&model(3.0), Sector::new(1, 1), &source, &modes(), &omega, 0.1).unwrap();
    for spec in &out {
        assert!(spec.coverage <= 1.0 + 1e-9);
        assert_eq!(spec.lehmann.particle_terms.len() + spec.lehmann.hole_terms.len(), 2);
    }
}

#[test]
fn degenerate_ground_state_is_rejected() {
    let m = HubbardModel::new(GridSpec::new(2, 2).unwrap(), HubbardParams::new(1.0, 0.0));
    let grid = omega_grid(-1.0, 1.0, 0.5).unwrap();
    let err = spectral_pipeline(&m, Sector::new(2, 1), &SpectralSource::Exact, &[], &grid, 0.1).unwrap_err();
    assert!(matches!(err, Error::Config(_)));
}
