use hubbard_adapt_core::space::Space;
use hubbard_adapt_core::*;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn jw_matrix(op: &FermionOperator) -> SparseMatrix {
    operator_matrix(&jordan_wigner(op).unwrap(), op.n_modes()).unwrap()
}

fn close(a: &SparseMatrix, b: &SparseMatrix, tol: f64) -> bool {
    a.minus(b).max_abs() <= tol
}

// Dense oracle for a single ladder operator, built from the bit rule
// directly: a_k |..n_k..> = (-1)^{sum_{j<k} n_j} |..0_k..>.
fn ladder_dense(n: usize, k: usize, creation: bool) -> Vec<Vec<Complex64>> {
    let dim = 1 << n;
    let mut m = vec![vec![c(0.0, 0.0); dim]; dim];
    for col in 0..dim {
        let occupied = col >> k & 1 == 1;
        if occupied == creation {
            continue;
        }
        let sign = if (col & ((1 << k) - 1)).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
        m[col ^ (1 << k)][col] = c(sign, 0.0);
    }
    m
}

#[test]
fn ladder_operators_match_bit_rule() {
    let n = 4;
    for k in 0..n {
        for creation in [false, true] {
            let ladder = if creation { Ladder::create(k) } else { Ladder::annihilate(k) };
            let op = FermionOperator::term(n, c(1.0, 0.0), &[ladder]).unwrap();
            assert_eq!(jw_matrix(&op).to_dense(), ladder_dense(n, k, creation), "k={k} creation={creation}");
        }
    }
}

#[test]
fn canonical_anticommutation() {
    let n = 5;
    let id = SparseMatrix::identity(1 << n);
    let zero = SparseMatrix::zeros(1 << n);
    let a: Vec<SparseMatrix> = (0..n)
        .map(|k| jw_matrix(&FermionOperator::annihilation(n, k).unwrap()))
        .collect();
    for i in 0..n {
        for j in 0..n {
            let ad = a[j].adjoint();
            let mixed = a[i].times(&ad).plus(&ad.times(&a[i]));
            let expect = if i == j { &id } else { &zero };
            assert!(close(&mixed, expect, 1e-14), "{{a_{i}, a+_{j}}}");
            let same = a[i].times(&a[j]).plus(&a[j].times(&a[i]));
            assert!(close(&same, &zero, 1e-14), "{{a_{i}, a_{j}}}");
        }
    }
}

#[test]
fn two_routes_to_the_hamiltonian_matrix_agree() {
    for (w, h) in [(2, 1), (3, 1), (2, 2)] {
        let grid = GridSpec::new(w, h).unwrap();
        let ham = build_hamiltonian(&grid, &HubbardParams::half_filling_shift(1.0, 2.5)).unwrap();
        let via_pauli = jw_matrix(&ham);
        let direct = Space::full(ham.n_modes()).unwrap().operator_matrix(&ham).unwrap();
        assert!(close(&via_pauli, &direct, 1e-13), "{grid}");
        assert!(via_pauli.is_hermitian(1e-14));
    }
}

#[test]
fn hamiltonian_is_block_diagonal_in_sectors() {
    let grid = GridSpec::new(3, 1).unwrap();
    let ham = build_hamiltonian(&grid, &HubbardParams::new(1.0, 4.0)).unwrap();
    let m = jw_matrix(&ham);
    let counts = |b: usize| ((b & 0b010101).count_ones(), (b & 0b101010).count_ones());
    for (r, col, _) in m.entries() {
        assert_eq!(counts(r), counts(col));
    }
}

#[test]
fn pool_generators_are_hermitian_and_number_conserving() {
    for d in pool_descriptors_for(3) {
        let g = d.generator(6).unwrap();
        assert!(g.is_hermitian(), "{d}");
        assert!(g.conserves_number(), "{d}");
        assert!(jw_matrix(&g).is_hermitian(1e-14), "{d}");
    }
}

fn pool_descriptors_for(n_sites: usize) -> Vec<OperatorDescriptor> {
    build_pool(n_sites).unwrap().into_iter().map(|p| p.descriptor).collect()
}

#[test]
fn mode_index_out_of_range_is_rejected() {
    assert!(FermionOperator::term(3, c(1.0, 0.0), &[Ladder::create(3)]).is_err());
    assert!(FermionOperator::annihilation(2, 5).is_err());
}

#[test]
fn operator_matrix_refuses_oversized_registers() {
    let op = QubitOperator::identity(15);
    assert!(matches!(operator_matrix(&op, 15), Err(Error::Resource { .. })));
}

fn ladder_strategy(n: usize) -> impl Strategy<Value = Ladder> {
    (0..n, any::<bool>()).prop_map(|(mode, creation)| Ladder { mode, creation })
}

fn operator_strategy(n: usize) -> impl Strategy<Value = FermionOperator> {
    prop::collection::vec(
        (prop::collection::vec(ladder_strategy(n), 0..4), -2.0..2.0f64, -2.0..2.0f64),
        1..5,
    )
    .prop_map(move |terms| {
        let mut op = FermionOperator::zero(n);
        for (ops, re, im) in terms {
            op.add_term(c(re, im), &ops).unwrap();
        }
        op
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jordan_wigner_is_linear(a in operator_strategy(4), b in operator_strategy(4), s in -3.0..3.0f64) {
        let lhs = jw_matrix(&a.scaled(c(s, 0.0)).plus(&b).unwrap());
        let rhs = jw_matrix(&a).scaled(c(s, 0.0)).plus(&jw_matrix(&b));
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn jordan_wigner_commutes_with_adjoint(a in operator_strategy(4)) {
        prop_assert!(close(&jw_matrix(&a.adjoint()), &jw_matrix(&a).adjoint(), 1e-12));
    }

    #[test]
    fn jordan_wigner_is_multiplicative(a in operator_strategy(3), b in operator_strategy(3)) {
        let lhs = jw_matrix(&a.times(&b).unwrap());
        let rhs = jw_matrix(&a).times(&jw_matrix(&b));
        prop_assert!(close(&lhs, &rhs, 1e-11));
    }

    #[test]
    fn normal_ordering_preserves_the_matrix(a in operator_strategy(4)) {
        prop_assert!(close(&jw_matrix(&a.normal_ordered()), &jw_matrix(&a), 1e-12));
    }

    #[test]
    fn hermitian_part_maps_to_hermitian_matrix(a in operator_strategy(4)) {
        let h = a.plus(&a.adjoint()).unwrap();
        prop_assert!(h.is_hermitian());
        prop_assert!(jw_matrix(&h).is_hermitian(1e-12));
    }
}
