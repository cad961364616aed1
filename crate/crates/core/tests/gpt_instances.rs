use fitcheck_core::fermion::{build_modes, ModeSet};
use fitcheck_core::gpt::{
    build_instance, holistic_subspace, is_locally_tomographic, local_effect_rank, product_span,
    prop2_witness, witness_exists_for_sample, InstanceKind, RANK_REL_TOL,
};
use fitcheck_core::independence::{independence_verdict, rho_ab};
use fitcheck_core::linops::{Matrix, QuantumState, DEFAULT_TOL};

#[test]
fn decomposition_is_complete() {
    for kind in InstanceKind::ALL {
        let cm = build_instance(kind);
        let span = product_span(&cm).unwrap();
        let hol = holistic_subspace(&cm).unwrap();
        assert_eq!(span.dim() + hol.dim(), cm.composite_dim(), "{kind}");
        assert!(span.orthonormality_defect() < 1e-10);
        assert!(hol.orthonormality_defect() < 1e-10);
        // Cross-basis orthogonality.
        for a in &span.vectors {
            for b in &hol.vectors {
                let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                assert!(d.abs() < 1e-10);
            }
        }
    }
}

#[test]
fn effect_rank_route_matches_state_span_route() {
    for kind in InstanceKind::ALL {
        let cm = build_instance(kind);
        let by_effects = is_locally_tomographic(&cm, RANK_REL_TOL);
        let by_states = holistic_subspace(&cm).unwrap().is_empty();
        assert_eq!(by_effects, by_states, "{kind}");
        assert_eq!(
            local_effect_rank(&cm, RANK_REL_TOL),
            product_span(&cm).unwrap().dim()
        );
    }
}

#[test]
fn composite_generators_span_the_space() {
    for kind in InstanceKind::ALL {
        let cm = build_instance(kind);
        for g in cm.composite_state_generators() {
            assert!(cm.is_valid_state(g, 1e-12));
        }
    }
}

#[test]
fn tomography_iff_no_witness_on_sampled_products() {
    for kind in InstanceKind::ALL {
        let cm = build_instance(kind);
        let tomographic = is_locally_tomographic(&cm, RANK_REL_TOL);
        let witness = witness_exists_for_sample(&cm, 20, 0, DEFAULT_TOL).unwrap();
        assert_eq!(tomographic, !witness, "{kind}");
    }
}

#[test]
fn fermi_witness_reproduces_the_verdict_triple() {
    let cm = build_instance(InstanceKind::FermiTwoModes);
    let base = cm.embed(&Matrix::identity(4).scale(0.25), 1e-12).unwrap();
    let (tilde, report) = prop2_witness(&cm, &base, DEFAULT_TOL).unwrap();
    assert!(report.passed());
    let op = cm.operator(&tilde).unwrap();
    assert!(op.max_abs_diff(rho_ab().op()) < 1e-12);

    let ms = build_modes(2).unwrap();
    let s = QuantumState::new(op, vec![2, 2]).unwrap();
    let split = (&ModeSet::single(0), &ModeSet::single(1));
    let from_witness = independence_verdict(&ms, &s, split, DEFAULT_TOL).unwrap();
    let direct = independence_verdict(&ms, &rho_ab(), split, DEFAULT_TOL).unwrap();
    assert!(from_witness.operationally_independent);
    assert!(!from_witness.product_state);
    assert!(!from_witness.independently_preparable);
    assert_eq!(
        from_witness.operationally_independent,
        direct.operationally_independent
    );
    assert_eq!(from_witness.product_state, direct.product_state);
    assert_eq!(
        from_witness.independently_preparable,
        direct.independently_preparable
    );
    assert!((from_witness.max_residual - direct.max_residual).abs() < 1e-12);
}

#[test]
fn holistic_basis_exports_as_matrix_json() {
    let cm = build_instance(InstanceKind::RealQubitPair);
    let hol = holistic_subspace(&cm).unwrap();
    let ops: Vec<Matrix> = hol
        .vectors
        .iter()
        .map(|v| cm.operator(v).unwrap())
        .collect();
    let json = serde_json::to_string(&ops).unwrap();
    let back: Vec<Matrix> = serde_json::from_str(&json).unwrap();
    assert_eq!(back, ops);
    assert_eq!(back[0].field(), fitcheck_core::Field::Real);
}
