mod common;

use common::{max_diff, oracle_gate, oracle_state, random_circuit, GateSet};
use num_complex::Complex64;
use qcsim::program::{Gate, GateOp};
use qcsim::statevector::{run_full, FullOptions, StateVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_state(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..1 << n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

#[test]
fn every_gate_matches_the_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 1..=6 {
        for _ in 0..500 {
            let gates = random_circuit(&mut rng, n, 1, GateSet::Full);
            let gate = gates.gates().next().unwrap().clone();
            let psi = random_state(&mut rng, n);
            let mut sv = StateVector::from_amplitudes(psi.clone());
            sv.apply_gate(&gate);
            let want = oracle_gate(&psi, &gate);
            assert!(max_diff(sv.amplitudes(), &want) < 1e-12, "{gate}");
        }
    }
}

#[test]
fn projectors_match_the_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for k in 0..4 {
        for bit in 0..2u8 {
            let psi = random_state(&mut rng, 4);
            let gate = Gate::single(GateOp::Projector(bit), k);
            let mut sv = StateVector::from_amplitudes(psi.clone());
            sv.apply_gate(&gate);
            assert!(max_diff(sv.amplitudes(), &oracle_gate(&psi, &gate)) < 1e-15);
        }
    }
}

#[test]
fn whole_circuits_match_the_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for n in 2..=8 {
        let program = random_circuit(&mut rng, n, 12, GateSet::Full);
        let result = run_full(&program, &FullOptions::default(), None).unwrap();
        assert!(max_diff(result.state.amplitudes(), &oracle_state(&program, 0)) < 1e-10);
    }
}

#[test]
fn chunking_and_workers_do_not_change_results() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let program = random_circuit(&mut rng, 12, 10, GateSet::Full);
    let reference = run_full(&program, &FullOptions::default(), None).unwrap().state;
    for chunk_log2 in [0, 3, 7] {
        for workers in [1, 2, 4] {
            let options = FullOptions { workers, chunk_log2, ..FullOptions::default() };
            let state = run_full(&program, &options, None).unwrap().state;
            assert_eq!(state.amplitudes(), reference.amplitudes(), "chunk {chunk_log2} workers {workers}");
        }
    }
}

#[test]
fn pmeasure_is_invariant_under_chunking() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let psi = random_state(&mut rng, 11);
    let a = StateVector::from_amplitudes(psi.clone()).with_chunk_log2(2);
    let b = StateVector::from_amplitudes(psi);
    let q = [10, 3, 0, 7];
    let pa = qcsim::parallel::with_workers(3, || a.pmeasure(&q));
    let pb = b.pmeasure(&q);
    assert_eq!(pa.len(), 16);
    for (x, y) in pa.iter().zip(&pb) {
        assert!((x - y).abs() < 1e-14);
    }
    assert!((pa.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}
