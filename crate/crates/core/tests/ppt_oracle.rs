//! Cross-checks the partial-transpose test against an inner approximation
//! of the two-qubit separable set: the convex hull of 10^4 random product
//! pure states, with membership decided by linear programming.
//!
//! Hull membership proves separability, so the test is conclusive only in
//! that direction. Whenever the LP finds a decomposition, PPT must agree.

use fitcheck_core::independence::{min_partial_transpose_eigenvalue, ppt_separable_2x2};
use fitcheck_core::linops::{hs_inner, kron_all, pauli, Matrix, QuantumState};
use fitcheck_core::random::{random_density, random_pure, rng};
use fitcheck_core::Field;
use minilp::{ComparisonOp, OptimizationDirection, Problem};
use rand::Rng;

const HULL_POINTS: usize = 10_000;
const STATES: usize = 200;

/// Real coordinates `Tr[(P_i (x) P_j) rho]`.
fn pauli_coords(m: &Matrix, frame: &[Matrix]) -> Vec<f64> {
    frame.iter().map(|p| hs_inner(p, m).re).collect()
}

fn in_hull(target: &[f64], points: &[Vec<f64>]) -> bool {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = points
        .iter()
        .map(|_| lp.add_var(0.0, (0.0, f64::INFINITY)))
        .collect();
    for (k, &rhs) in target.iter().enumerate() {
        let expr: Vec<_> = vars.iter().zip(points).map(|(&v, p)| (v, p[k])).collect();
        lp.add_constraint(expr.as_slice(), ComparisonOp::Eq, rhs);
    }
    lp.solve().is_ok()
}

#[test]
fn ppt_agrees_with_lp_hull_membership() {
    let frame: Vec<Matrix> = (0..16)
        .map(|k| kron_all(&[pauli(k / 4), pauli(k % 4)]))
        .collect();
    let mut r = rng(2024);
    let hull: Vec<Vec<f64>> = (0..HULL_POINTS)
        .map(|_| {
            let a = random_pure(2, &mut r);
            let b = random_pure(2, &mut r);
            let prod = kron_all(&[Matrix::outer(&a, &a), Matrix::outer(&b, &b)]);
            pauli_coords(&prod, &frame)
        })
        .collect();

    let (mut conclusive, mut entangled) = (0, 0);
    for i in 0..STATES {
        let mut sr = rng(10_000 + i as u64);
        let rho = random_density(4, 4, Field::Complex, &mut sr);
        // Mix toward I/4 so that a good share of samples are separable.
        let p: f64 = sr.random();
        let mixed = &rho.scale(p) + &Matrix::identity(4).scale((1.0 - p) / 4.0);
        let s = QuantumState::new(mixed.clone(), vec![2, 2]).unwrap();
        let ppt = ppt_separable_2x2(&s, 1e-7).unwrap();
        let lp = in_hull(&pauli_coords(&mixed, &frame), &hull);
        if lp {
            conclusive += 1;
            assert!(
                ppt,
                "state {i}: hull member with PT eigenvalue {}",
                min_partial_transpose_eigenvalue(&s).unwrap()
            );
        }
        if !ppt {
            entangled += 1;
            assert!(!lp, "state {i}: entangled state found in separable hull");
        }
    }
    assert!(conclusive >= 40, "only {conclusive} conclusive samples");
    assert!(entangled >= 10, "only {entangled} entangled samples");
    eprintln!("ppt oracle: {conclusive} hull members, {entangled} PPT-entangled, of {STATES}");
}
