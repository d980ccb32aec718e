//! Property tests for the algebraic invariants the constructions rely on.

use std::f64::consts::SQRT_2;

use nalgebra::Vector3;
use proptest::prelude::*;
use quasistate::bloch::{
    from_operator, outcome_probability, pc_check, projector_for_direction, to_operator, BlochVector, Direction, Outcome,
};
use quasistate::discrimination::{
    clonability_check, discriminate, discrimination_povm, hyperplane_pair, hyperplane_pair_in_frame, Frame,
};
use quasistate::highdim::{build_nu_state, build_violating_state, discriminate_highdim, NuFamily};
use quasistate::nonlocal::{bell_operator, build_xpsi, ChshSettings};
use quasistate::operator::{c, expectation, hermitian_eigensystem, kron, trace_product, ComplexMatrix, StateVector};

fn vec3(bound: f64) -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-bound..bound)
}

fn direction() -> impl Strategy<Value = Direction> {
    vec3(1.0)
        .prop_filter("away from the origin", |v| Vector3::from(*v).norm() > 1e-3)
        .prop_map(|v| Direction::normalize(Vector3::from(v)).unwrap())
}

fn matrix(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec(-1.0..1.0f64, 2 * n * n)
        .prop_map(move |xs| ComplexMatrix::from_fn(n, n, |i, j| c(xs[2 * (i * n + j)], xs[2 * (i * n + j) + 1])))
}

fn hermitian(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    matrix(n).prop_map(|a| (&a + &a.adjoint()).scale(0.5))
}

fn unit_qubit() -> impl Strategy<Value = StateVector> {
    prop::array::uniform4(-1.0..1.0f64)
        .prop_filter("non-zero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-4)
        .prop_map(|v| {
            let s = StateVector::from_vec(vec![c(v[0], v[1]), c(v[2], v[3])]);
            let n = s.norm();
            s.unscale(n)
        })
}

/// A violating resource together with admissible transverse coordinates.
fn resource() -> impl Strategy<Value = (BlochVector, f64, f64)> {
    (direction(), 1.01..4.0f64, 0.0..1.0f64, 0.0..std::f64::consts::TAU).prop_map(|(d, norm, s, angle)| {
        let radius = (1.0 - 1.0 / (norm * norm)).sqrt() * s.sqrt() * (1.0 - 1e-9);
        (BlochVector(d.vector() * norm), radius * angle.cos(), radius * angle.sin())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn kron_is_associative(a in matrix(2), b in matrix(3), c in matrix(2)) {
        let left = kron(&kron(&a, &b), &c);
        let right = kron(&a, &kron(&b, &c));
        prop_assert!(left.max_abs_diff(&right) < 1e-14);
    }

    #[test]
    fn kron_trace_factorizes(a in matrix(3), b in matrix(2)) {
        let lhs = kron(&a, &b).trace();
        let rhs = a.trace() * b.trace();
        prop_assert!((lhs - rhs).norm() < 1e-13);
    }

    #[test]
    fn eigensystem_reconstructs(h in (1usize..=16).prop_flat_map(hermitian)) {
        let eig = hermitian_eigensystem(&h).unwrap();
        prop_assert!(eig.reconstruct().max_abs_diff(&h) < 1e-10);
        prop_assert!(eig.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        for (i, u) in eig.eigenvectors.iter().enumerate() {
            for (j, v) in eig.eigenvectors.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                prop_assert!((u.dotc(v).norm() - expected).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn expectation_is_linear(a in hermitian(2), b in hermitian(2), s in -2.0..2.0f64, t in -2.0..2.0f64, r in vec3(3.0)) {
        let state = to_operator(&BlochVector::from_array(r));
        let combo = &a.scale(s) + &b.scale(t);
        let lhs = expectation(&combo, &state).unwrap();
        let rhs = s * expectation(&a, &state).unwrap() + t * expectation(&b, &state).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn bloch_round_trip(r in vec3(3.0)) {
        let back = from_operator(&to_operator(&BlochVector::from_array(r))).unwrap();
        prop_assert!((back.0 - Vector3::from(r)).norm() < 1e-14);
    }

    #[test]
    fn positivity_matches_complementarity(r in vec3(2.0)) {
        let bloch = BlochVector::from_array(r);
        prop_assume!((bloch.norm() - 1.0).abs() > 1e-6);
        let state = to_operator(&bloch);
        prop_assert_eq!(state.min_eigenvalue() >= -1e-9, pc_check(&bloch).satisfies);
        prop_assert!((state.min_eigenvalue() - 0.5 * (1.0 - bloch.norm())).abs() < 1e-12);
    }

    #[test]
    fn probability_rule_matches_trace_rule(r in vec3(3.0), n in direction()) {
        let bloch = BlochVector::from_array(r);
        match outcome_probability(&bloch, &n, Outcome::Plus) {
            Ok(p) => {
                let by_trace = expectation(&projector_for_direction(&n), &to_operator(&bloch)).unwrap();
                prop_assert!((p - by_trace).abs() < 1e-12);
                let q = outcome_probability(&bloch, &n, Outcome::Minus).unwrap();
                prop_assert!((p + q - 1.0).abs() < 1e-12);
            }
            Err(_) => prop_assert!(bloch.0.dot(&n.vector()).abs() > 1.0),
        }
    }

    #[test]
    fn controlled_flip_is_an_involution(xi in unit_qubit()) {
        let x = build_xpsi(&xi).unwrap();
        prop_assert!((&x * &x).max_abs_diff(&ComplexMatrix::identity(2)) < 1e-12);
        prop_assert!(x.is_hermitian(1e-12));
    }

    #[test]
    fn bell_operator_respects_tsirelson(a1 in direction(), a2 in direction(), b1 in direction(), b2 in direction()) {
        let s = ChshSettings::new(a1.to_array(), a2.to_array(), b1.to_array(), b2.to_array()).unwrap();
        let eig = hermitian_eigensystem(&bell_operator(&s)).unwrap();
        let spectral = eig.max_eigenvalue().abs().max(eig.min_eigenvalue().abs());
        prop_assert!(spectral <= 2.0 * SQRT_2 + 1e-10);
    }

    #[test]
    fn discrimination_povm_is_complete((r, _, _) in resource()) {
        let povm = discrimination_povm(&r).unwrap();
        let sum = povm.p_plus.as_inner() + povm.p_minus.as_inner();
        prop_assert!(ComplexMatrix::from(sum).max_abs_diff(&ComplexMatrix::identity(4)) < 1e-12);
        prop_assert!((&povm.p_plus * &povm.p_plus).max_abs_diff(&povm.p_plus) < 1e-12);
        prop_assert!(trace_product(&povm.p_plus, &povm.p_minus).unwrap().norm() < 1e-12);
        prop_assert!(povm.to_povm().dim() == 4);
    }

    #[test]
    fn hyperplane_states_are_certain_and_unclonable_elsewhere((r, y, z) in resource(), other in vec3(1.0)) {
        let pair = hyperplane_pair(&r, y, z).unwrap();
        prop_assert!(clonability_check(&r, &pair.r_plus));
        prop_assert!(clonability_check(&r, &pair.r_minus));
        prop_assert!(pair.overlap() > 0.0);
        let other = BlochVector::from_array(other);
        prop_assume!((r.dot(&other).abs() - 1.0).abs() > 1e-9);
        prop_assert!(!clonability_check(&r, &other));
    }

    #[test]
    fn discrimination_is_frame_independent((r, y, z) in resource(), angle in 0.0..std::f64::consts::TAU) {
        let frame = Frame::for_axis(r.direction().unwrap()).rotated(angle);
        prop_assert!(frame.is_right_handed(1e-12));
        let pair = hyperplane_pair_in_frame(&r, y, z, frame).unwrap();
        for which in Outcome::BOTH {
            let d = discriminate(&r, &pair, which).unwrap();
            prop_assert_eq!(d.label, which);
            prop_assert!(d.q_plus * d.q_minus < 1e-10);
        }
    }

    #[test]
    fn highdim_outcome_ignores_phases(d in 2usize..=5, eps in 0.05..3.0f64, phases in prop::collection::vec(0.0..std::f64::consts::TAU, 5)) {
        let vs = build_violating_state(d, eps, None).unwrap();
        for family in [NuFamily::One, NuFamily::Zero] {
            let flat = build_nu_state(&vs, family, None).unwrap();
            let twisted = build_nu_state(&vs, family, Some(&phases[..d])).unwrap();
            let q_flat = discriminate_highdim(&vs, &flat).unwrap().q1;
            let q_twisted = discriminate_highdim(&vs, &twisted).unwrap().q1;
            prop_assert!((q_flat - q_twisted).abs() < 1e-10);
            prop_assert!((q_flat - family.target()).abs() < 1e-10);
        }
    }
}
