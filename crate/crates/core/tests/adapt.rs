use hubbard_adapt_core::adapt::{adapt_step, pool_gradients};
use hubbard_adapt_core::ansatz::prepare_state;
use hubbard_adapt_core::exact::Sector;
use hubbard_adapt_core::hubbard::spread_occupation;
use hubbard_adapt_core::state::{apply_exp, expectation};
use hubbard_adapt_core::*;

fn model(w: usize, h: usize, u: f64) -> HubbardModel {
    HubbardModel::new(GridSpec::new(w, h).unwrap(), HubbardParams::half_filling_shift(1.0, u))
}

fn spread(m: &HubbardModel, n: usize) -> InitSpec {
    InitSpec::Product(spread_occupation(&m.grid, n, n).unwrap())
}

fn jw(op: &FermionOperator) -> SparseMatrix {
    operator_matrix(&jordan_wigner(op).unwrap(), op.n_modes()).unwrap()
}

#[test]
fn dimer_converges_within_four_steps() {
    for u in [1.0, 3.0, 6.0] {
        let m = model(2, 1, u);
        let out = run_adapt(&m, Sector::new(1, 1), &spread(&m, 1), &AdaptConfig::default(), true).unwrap();
        assert!(out.ansatz.depth() <= 4, "U={u}: depth {}", out.ansatz.depth());
        assert!(out.fidelity.unwrap() >= 1.0 - 1e-6, "U={u}");
    }
}

#[test]
fn three_site_chain_strong_coupling() {
    let m = model(3, 1, 6.0);
    let out = run_adapt(&m, Sector::new(1, 1), &spread(&m, 1), &AdaptConfig::default(), true).unwrap();
    let depth = out.ansatz.depth();
    assert!((6..=14).contains(&depth), "depth {depth}");
    assert!(out.energy - out.exact_energy.unwrap() <= 1e-6);
    assert!(out.fidelity.unwrap() >= 0.9999);
}

#[test]
fn traces_are_monotone_and_variational() {
    for (w, h, n, u) in [(2, 1, 1, 3.0), (3, 1, 1, 1.0), (4, 1, 2, 3.0), (2, 2, 2, 6.0)] {
        let m = model(w, h, u);
        let out = run_adapt(&m, Sector::new(n, n), &spread(&m, n), &AdaptConfig::default(), true).unwrap();
        let exact = out.exact_energy.unwrap();
        let mut prev = out.initial_energy;
        for r in &out.records {
            assert!(r.energy <= prev + 1e-9, "{w}x{h} U={u} depth {}", r.depth);
            assert!(r.energy >= exact - 1e-9);
            assert_eq!(r.params.len(), r.depth);
            prev = r.energy;
        }
    }
}

#[test]
fn selected_operator_has_the_largest_finite_difference_gradient() {
    for (w, u) in [(2, 3.0), (3, 1.0), (3, 6.0)] {
        let m = model(w, 1, u);
        let n_modes = m.n_modes();
        let h = jw(&m.hamiltonian().unwrap());
        let pool = build_pool(w).unwrap();
        let gens: Vec<SparseMatrix> = pool.iter().map(|p| jw(&p.generator)).collect();
        let out = run_adapt(&m, Sector::new(1, 1), &spread(&m, 1), &AdaptConfig::default(), false).unwrap();
        let mut prefix = Ansatz::new(n_modes, out.ansatz.init().clone()).unwrap();
        for r in &out.records {
            let state = prepare_state(&prefix, &m).unwrap();
            let step = 1e-5;
            let fd: Vec<f64> = gens
                .iter()
                .map(|a| {
                    let e = |t: f64| expectation(&h, &apply_exp(a, t, &state).unwrap()).unwrap().re;
                    (e(step) - e(-step)) / (2.0 * step)
                })
                .collect();
            let best = fd.iter().fold(0.0f64, |acc, g| acc.max(g.abs()));
            let chosen = pool.iter().position(|p| p.descriptor == r.selected).unwrap();
            assert!(fd[chosen].abs() >= best - 1e-7, "{w}x1 U={u} depth {}", r.depth);
            prefix.push(r.selected, 0.0).unwrap();
            prefix.set_thetas(&r.params).unwrap();
        }
    }
}

#[test]
fn first_pick_is_the_largest_screened_gradient() {
    let m = model(3, 1, 3.0);
    let init = spread(&m, 1);
    let ansatz = Ansatz::new(m.n_modes(), init.clone()).unwrap();
    let state = init.prepare(&m).unwrap();
    let pool = build_pool(3).unwrap();
    let grads = pool_gradients(&state, &jw(&m.hamiltonian().unwrap()), &pool).unwrap();
    let best = grads.iter().fold(0.0f64, |acc, g| acc.max(g.abs()));
    let first = pool.iter().zip(&grads).find(|(_, g)| g.abs() >= best * (1.0 - 1e-10)).unwrap().0;
    let (_, rec) = adapt_step(&ansatz, &m, &AdaptConfig::default()).unwrap().unwrap();
    assert_eq!(rec.selected, first.descriptor);
    assert_eq!(rec.pool_gradient.abs(), best);
}

#[test]
fn step_from_reloaded_ansatz_is_reproducible() {
    let m = model(3, 1, 3.0);
    let init = spread(&m, 1);
    let cfg = AdaptConfig::exhaustive(4);
    let full = run_adapt(&m, Sector::new(1, 1), &init, &cfg, false).unwrap();
    let short = run_adapt(&m, Sector::new(1, 1), &init, &AdaptConfig::exhaustive(3), false).unwrap();
    let reloaded = Ansatz::from_text(&short.ansatz.to_text()).unwrap();
    assert_eq!(reloaded, short.ansatz);
    let (next, rec) = adapt_step(&reloaded, &m, &cfg).unwrap().unwrap();
    assert_eq!(rec.selected, full.records[3].selected);
    assert!((rec.energy - full.records[3].energy).abs() < 1e-12);
    assert_eq!(next.depth(), 4);
}

#[test]
fn reruns_are_bit_identical() {
    let m = model(2, 2, 3.0);
    let run = || run_adapt(&m, Sector::new(2, 2), &spread(&m, 2), &AdaptConfig::default(), true).unwrap();
    let (a, b) = (run(), run());
    assert_eq!(a.ansatz.to_text(), b.ansatz.to_text());
    assert_eq!(a.records, b.records);
}

#[test]
fn exact_reference_needs_no_gates() {
    let m = HubbardModel::new(GridSpec::new(3, 1).unwrap(), HubbardParams::new(1.0, 0.0));
    let init = InitSpec::Slater { n_up: 1, n_down: 1 };
    let out = run_adapt(&m, Sector::new(1, 1), &init, &AdaptConfig::default(), true).unwrap();
    assert_eq!(out.ansatz.depth(), 0);
    assert_eq!(out.stop, StopReason::PoolExhausted);
    assert!(out.fidelity.unwrap() > 1.0 - 1e-12);
}

#[test]
fn degenerate_reference_is_a_configuration_error() {
    let m = HubbardModel::new(GridSpec::new(2, 2).unwrap(), HubbardParams::new(1.0, 0.0));
    let init = InitSpec::Product(vec![0, 1, 2]);
    let err = run_adapt(&m, Sector::new(2, 1), &init, &AdaptConfig::default(), true).unwrap_err();
    assert!(matches!(err, Error::Config(_)), "{err}");
    // Energy-only runs do not need a unique reference.
    assert!(run_adapt(&m, Sector::new(2, 1), &init, &AdaptConfig::default(), false).is_ok());
}

#[test]
fn initial_state_outside_sector_is_rejected() {
    let m = model(2, 1, 3.0);
    let err = run_adapt(&m, Sector::new(1, 1), &InitSpec::Product(vec![0, 2]), &AdaptConfig::default(), false);
    assert!(matches!(err, Err(Error::Validation(_))));
}

#[test]
fn invalid_thresholds_are_rejected() {
    let m = model(2, 1, 3.0);
    let cfg = AdaptConfig {
        epsilon: -1.0,
        ..Default::default()
    };
    assert!(run_adapt(&m, Sector::new(1, 1), &spread(&m, 1), &cfg, false).is_err());
}

#[test]
fn disabled_stopping_drives_small_grids_to_exactness() {
    for (w, h, n) in [(2, 1, 1), (2, 2, 2)] {
        let m = model(w, h, 3.0);
        let out = run_adapt(&m, Sector::new(n, n), &spread(&m, n), &AdaptConfig::exhaustive(120), true).unwrap();
        assert!(1.0 - out.fidelity.unwrap() < 1e-6, "{w}x{h}");
    }
}
