//! Strict forms of two acceptance criteria that this implementation does not
//! meet. Run with `cargo test -- --ignored` to see the current margins.

use hubbard_adapt::suite::{run_suite, SuiteName};
use hubbard_adapt_core::hubbard::spread_occupation;
use hubbard_adapt_core::*;

#[test]
#[ignore = "infidelity rises once near step 32; only the energy trace is variational"]
fn infidelity_decreases_every_step_on_2x2() {
    let m = HubbardModel::new(GridSpec::new(2, 2).unwrap(), HubbardParams::half_filling_shift(1.0, 3.0));
    let init = InitSpec::Product(spread_occupation(&m.grid, 2, 2).unwrap());
    let out = run_adapt(&m, Sector::new(2, 2), &init, &AdaptConfig::exhaustive(150), true).unwrap();
    let mut prev = out.initial_fidelity.unwrap();
    for r in &out.records {
        let f = r.fidelity.unwrap();
        assert!(f >= prev - 1e-9, "fidelity fell from {prev} to {f} at step {}", r.depth);
        prev = f;
    }
}

#[test]
#[ignore = "both occupation classes reach 0.99 at the same depth on 2x2 U=3"]
fn singly_occupied_starts_converge_strictly_faster() {
    let report = run_suite(SuiteName::InitialState).unwrap().report;
    let check = report.checks.iter().find(|c| c.name == "singly before doubly").unwrap();
    assert!(check.pass, "{}", check.measured);
}
