//! Dense reference simulator and random circuit builders shared by the
//! integration tests. Matrices here are written out independently of the
//! library's gate tables.
#![allow(dead_code)]

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64 as C;
use qcsim::program::{Gate, GateOp, Instruction, Program};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const O: C = C::new(0.0, 0.0);
const L: C = C::new(1.0, 0.0);
const J: C = C::new(0.0, 1.0);

fn re(x: f64) -> C {
    C::new(x, 0.0)
}

/// Row-major matrix of `op` over its own qubits, first qubit most significant.
pub fn oracle_matrix(op: &GateOp) -> Vec<C> {
    let h = FRAC_1_SQRT_2;
    match *op {
        GateOp::H => vec![re(h), re(h), re(h), re(-h)],
        GateOp::X => vec![O, L, L, O],
        GateOp::Y => vec![O, -J, J, O],
        GateOp::Z => vec![L, O, O, -L],
        GateOp::S => vec![L, O, O, J],
        GateOp::T => vec![L, O, O, C::from_polar(1.0, PI / 4.0)],
        GateOp::Rx(t) => vec![re((t / 2.0).cos()), -J * (t / 2.0).sin(), -J * (t / 2.0).sin(), re((t / 2.0).cos())],
        GateOp::Ry(t) => vec![re((t / 2.0).cos()), re(-(t / 2.0).sin()), re((t / 2.0).sin()), re((t / 2.0).cos())],
        GateOp::Rz(t) => vec![C::from_polar(1.0, -t / 2.0), O, O, C::from_polar(1.0, t / 2.0)],
        GateOp::U4Matrix(m) => m.to_vec(),
        GateOp::U4Angles([a, b, g, d]) => {
            // e^{ia} Rz(b) Ry(g) Rz(d)
            let rz = |t: f64| [C::from_polar(1.0, -t / 2.0), O, O, C::from_polar(1.0, t / 2.0)];
            let ry = [re((g / 2.0).cos()), re(-(g / 2.0).sin()), re((g / 2.0).sin()), re((g / 2.0).cos())];
            let m = matmul(&matmul(&rz(b), &ry, 2), &rz(d), 2);
            m.iter().map(|z| z * C::from_polar(1.0, a)).collect()
        }
        GateOp::Cnot => perm(&[0, 1, 3, 2]),
        GateOp::Cz => diag(&[L, L, L, -L]),
        GateOp::Cr(t) => diag(&[L, L, L, C::from_polar(1.0, t)]),
        GateOp::Swap => perm(&[0, 2, 1, 3]),
        GateOp::ISwap => {
            let mut m = vec![O; 16];
            m[0] = L;
            m[6] = -J;
            m[9] = -J;
            m[15] = L;
            m
        }
        GateOp::Toffoli => perm(&[0, 1, 2, 3, 4, 5, 7, 6]),
        GateOp::Projector(b) => {
            if b == 0 {
                vec![L, O, O, O]
            } else {
                vec![O, O, O, L]
            }
        }
    }
}

fn matmul(a: &[C], b: &[C], n: usize) -> Vec<C> {
    let mut out = vec![O; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = (0..n).map(|k| a[i * n + k] * b[k * n + j]).sum();
        }
    }
    out
}

fn diag(d: &[C]) -> Vec<C> {
    let n = d.len();
    let mut m = vec![O; n * n];
    for i in 0..n {
        m[i * n + i] = d[i];
    }
    m
}

fn perm(p: &[usize]) -> Vec<C> {
    let n = p.len();
    let mut m = vec![O; n * n];
    for (c, &r) in p.iter().enumerate() {
        m[r * n + c] = L;
    }
    m
}

/// Apply `m` (over `qubits`, first most significant) to `psi`, acting only
/// on basis states where every control bit is 1.
pub fn oracle_apply(psi: &[C], m: &[C], qubits: &[usize], controls: &[usize]) -> Vec<C> {
    let k = qubits.len();
    let dim = 1 << k;
    let mut out = vec![O; psi.len()];
    for (i, &amp) in psi.iter().enumerate() {
        if amp == O {
            continue;
        }
        if !controls.iter().all(|&c| (i >> c) & 1 == 1) {
            out[i] += amp;
            continue;
        }
        let col = qubits.iter().fold(0, |acc, &q| (acc << 1) | ((i >> q) & 1));
        let cleared = qubits.iter().fold(i, |acc, &q| acc & !(1 << q));
        for row in 0..dim {
            let coef = m[row * dim + col];
            if coef == O {
                continue;
            }
            let j = qubits
                .iter()
                .enumerate()
                .fold(cleared, |acc, (p, &q)| acc | (((row >> (k - 1 - p)) & 1) << q));
            out[j] += coef * amp;
        }
    }
    out
}

pub fn oracle_gate(psi: &[C], gate: &Gate) -> Vec<C> {
    oracle_apply(psi, &oracle_matrix(&gate.op), &gate.qubits, &gate.controls)
}

/// Final state of the gates of `program` applied to basis state `input`.
pub fn oracle_state(program: &Program, input: usize) -> Vec<C> {
    let mut psi = vec![O; 1 << program.qubit_count];
    psi[input] = L;
    for inst in &program.instructions {
        if let Instruction::Gate(g) = inst {
            psi = oracle_gate(&psi, g);
        }
    }
    psi
}

pub fn max_diff(a: &[C], b: &[C]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Which gates a random circuit may contain.
#[derive(Clone, Copy, Debug)]
pub enum GateSet {
    /// Everything the instruction set offers, including CONTROL-wrapped gates.
    Full,
    /// One- and two-qubit gates, with CONTROL-wrapped single-qubit gates.
    Single,
    /// One-qubit gates anywhere; two-qubit gates may cross `cut` only if they
    /// are controlled, and at most `max_crossing` of them do.
    Partial { cut: usize, max_crossing: usize },
}

pub fn random_angle(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(-PI..PI)
}

pub fn random_single_op(rng: &mut ChaCha8Rng) -> GateOp {
    match rng.random_range(0..11) {
        0 => GateOp::H,
        1 => GateOp::X,
        2 => GateOp::Y,
        3 => GateOp::Z,
        4 => GateOp::S,
        5 => GateOp::T,
        6 => GateOp::Rx(random_angle(rng)),
        7 => GateOp::Ry(random_angle(rng)),
        8 => GateOp::Rz(random_angle(rng)),
        9 => GateOp::U4Angles([random_angle(rng), random_angle(rng), random_angle(rng), random_angle(rng)]),
        _ => {
            let m = oracle_matrix(&GateOp::U4Angles([
                random_angle(rng),
                random_angle(rng),
                random_angle(rng),
                random_angle(rng),
            ]));
            GateOp::U4Matrix([m[0], m[1], m[2], m[3]])
        }
    }
}

fn distinct(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    rand::seq::index::sample(rng, n, k).into_vec()
}

fn pair_in(rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> Vec<usize> {
    distinct(rng, hi - lo, 2).into_iter().map(|q| q + lo).collect()
}

/// A random circuit of `depth` layers, each with about n/2 gates.
pub fn random_circuit(rng: &mut ChaCha8Rng, n: usize, depth: usize, set: GateSet) -> Program {
    let mut p = Program::new(n, 0);
    let mut crossing = 0;
    for _ in 0..depth * n.div_ceil(2) {
        let roll = rng.random_range(0..10);
        let gate = if roll < 5 || n < 2 {
            Gate::single(random_single_op(rng), rng.random_range(0..n))
        } else {
            match set {
                GateSet::Full => random_full_multi(rng, n),
                GateSet::Single => random_pair(rng, n),
                GateSet::Partial { cut, max_crossing } => {
                    let q = distinct(rng, n, 2);
                    let crosses = (q[0] < cut) != (q[1] < cut);
                    if crosses && crossing < max_crossing {
                        crossing += 1;
                        random_controlled(rng, q)
                    } else if cut >= 2 && rng.random_bool(0.5) {
                        {
                        let q = pair_in(rng, 0, cut);
                        random_pair_on(rng, q)
                    }
                    } else if n - cut >= 2 {
                        {
                        let q = pair_in(rng, cut, n);
                        random_pair_on(rng, q)
                    }
                    } else {
                        Gate::single(random_single_op(rng), q[0])
                    }
                }
            }
        };
        p.push_gate(gate);
    }
    p
}

fn random_controlled(rng: &mut ChaCha8Rng, q: Vec<usize>) -> Gate {
    match rng.random_range(0..4) {
        0 => Gate::new(GateOp::Cnot, q),
        1 => Gate::new(GateOp::Cz, q),
        2 => Gate::new(GateOp::Cr(random_angle(rng)), q),
        _ => Gate { op: random_single_op(rng), controls: vec![q[0]], qubits: vec![q[1]] },
    }
}

fn random_pair_on(rng: &mut ChaCha8Rng, q: Vec<usize>) -> Gate {
    match rng.random_range(0..3) {
        0 => Gate::new(GateOp::Swap, q),
        1 => Gate::new(GateOp::ISwap, q),
        _ => random_controlled(rng, q),
    }
}

fn random_pair(rng: &mut ChaCha8Rng, n: usize) -> Gate {
    let q = distinct(rng, n, 2);
    random_pair_on(rng, q)
}

fn random_full_multi(rng: &mut ChaCha8Rng, n: usize) -> Gate {
    if n >= 3 && rng.random_bool(0.3) {
        let q = distinct(rng, n, 3);
        return match rng.random_range(0..3) {
            0 => Gate::new(GateOp::Toffoli, q),
            1 => Gate { op: GateOp::Swap, controls: vec![q[0]], qubits: vec![q[1], q[2]] },
            _ => Gate { op: random_single_op(rng), controls: vec![q[0], q[1]], qubits: vec![q[2]] },
        };
    }
    random_pair(rng, n)
}
