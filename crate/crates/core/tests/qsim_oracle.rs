mod common;

use std::f64::consts::PI;

use heartq::qsim::{gate_unitary, run_circuit, Circuit, Gate, StateVector, C64};
use heartq::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_circuit(rng: &mut ChaCha8Rng, len: usize) -> (usize, Vec<Gate>) {
    let n = rng.gen_range(1..=4);
    (n, (0..len).map(|_| common::random_gate(rng, n)).collect())
}

#[test]
fn random_circuits_match_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let (n, gates) = random_circuit(&mut rng, 30);
        let mut state = StateVector::zero(n).unwrap();
        for g in &gates {
            state.apply(g).unwrap();
        }
        let expected = common::dense_run(&gates, n);
        for (a, b) in state.amplitudes().iter().zip(&expected) {
            assert!((a - b).norm() < 1e-12, "{gates:?}");
        }
    }
}

#[test]
fn single_gate_unitaries_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..200 {
        let n = rng.gen_range(1..=3);
        let g = common::random_gate(&mut rng, n);
        let ours = gate_unitary(&g, n).unwrap();
        let reference = common::dense_gate(&g, n);
        for (r, row) in reference.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                assert!((ours.get(r, c) - v).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn norm_is_preserved_after_every_gate() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let (n, gates) = random_circuit(&mut rng, 30);
        let mut state = StateVector::zero(n).unwrap();
        for g in &gates {
            state.apply(g).unwrap();
            assert!((state.norm_sqr() - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn ry_expectation_is_cosine() {
    for k in 0..64 {
        let t = 2.0 * PI * k as f64 / 64.0;
        let mut s = StateVector::zero(1).unwrap();
        s.apply(&Gate::Ry(0, t)).unwrap();
        assert!((s.expectation_z(0).unwrap() - t.cos()).abs() < 1e-12);
    }
}

#[test]
fn inverse_sequence_restores_state() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..50 {
        let (n, gates) = random_circuit(&mut rng, 20);
        let mut state = StateVector::basis(n, rng.gen_range(0..1 << n)).unwrap();
        let start = state.clone();
        for g in &gates {
            state.apply(g).unwrap();
        }
        for g in gates.iter().rev() {
            state.apply(&g.inverse()).unwrap();
        }
        for (a, b) in state.amplitudes().iter().zip(start.amplitudes()) {
            assert!((a - b).norm() < 1e-10);
        }
    }
}

#[test]
fn expectation_is_continuous_in_angle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (n, gates) = (3, (0..15).map(|_| common::random_gate(&mut rng, 3)).collect::<Vec<_>>());
    let eval = |t: f64| {
        let mut s = StateVector::zero(n).unwrap();
        for g in &gates {
            s.apply(g).unwrap();
        }
        s.apply(&Gate::Ry(1, t)).unwrap();
        s.expectation_z(1).unwrap()
    };
    for k in 0..20 {
        let t = k as f64 * 0.3;
        assert!((eval(t + 1e-7) - eval(t)).abs() < 1e-6);
    }
}

#[test]
fn parameterized_circuit_binds_slots_in_order() {
    let mut c = Circuit::new(2);
    c.push(Gate::H(0));
    c.push_param(Gate::Ry(1, 0.0), 0).unwrap();
    c.push(Gate::Cx { control: 0, target: 1 });
    c.push_param(Gate::Rz(0, 0.0), 1).unwrap();
    let params = [0.4, -1.3];
    let state = run_circuit(&c, &params).unwrap();
    let gates = [
        Gate::H(0),
        Gate::Ry(1, 0.4),
        Gate::Cx { control: 0, target: 1 },
        Gate::Rz(0, -1.3),
    ];
    let expected = common::dense_run(&gates, 2);
    for (a, b) in state.amplitudes().iter().zip(&expected) {
        assert!((a - b).norm() < 1e-12);
    }
    assert!(matches!(run_circuit(&c, &[0.1]), Err(Error::InvalidInput(_))));
}

#[test]
fn invalid_gates_are_rejected() {
    let mut s = StateVector::zero(2).unwrap();
    assert!(matches!(s.apply(&Gate::H(2)), Err(Error::InvalidGate(_))));
    assert!(matches!(
        s.apply(&Gate::Cx { control: 1, target: 1 }),
        Err(Error::InvalidGate(_))
    ));
    assert!(StateVector::from_amplitudes(vec![C64::new(1.0, 0.0); 3]).is_err());
}
