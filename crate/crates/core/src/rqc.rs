//! Seeded layered random circuits on a rectangular grid.
//!
//! Qubit `(r, c)` is `r * cols + c`. After an initial layer of `H` on every
//! qubit, layer `l` applies `CZ` on the edges of pattern `l mod 4`
//! (horizontal-even, horizontal-odd, vertical-even, vertical-odd) and a gate
//! drawn from the single-qubit pool on every qubit the pattern leaves idle.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::program::{Gate, GateOp, Program};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CouplerPattern {
    HorizontalEven,
    HorizontalOdd,
    VerticalEven,
    VerticalOdd,
}

impl CouplerPattern {
    pub const CYCLE: [CouplerPattern; 4] = [
        CouplerPattern::HorizontalEven,
        CouplerPattern::HorizontalOdd,
        CouplerPattern::VerticalEven,
        CouplerPattern::VerticalOdd,
    ];

    /// Qubit pairs coupled by this pattern, in row-major order.
    pub fn edges(self, rows: usize, cols: usize) -> Vec<(usize, usize)> {
        let at = |r: usize, c: usize| r * cols + c;
        let mut out = Vec::new();
        match self {
            CouplerPattern::HorizontalEven | CouplerPattern::HorizontalOdd => {
                let start = (self == CouplerPattern::HorizontalOdd) as usize;
                for r in 0..rows {
                    for c in (start..cols.saturating_sub(1)).step_by(2) {
                        out.push((at(r, c), at(r, c + 1)));
                    }
                }
            }
            CouplerPattern::VerticalEven | CouplerPattern::VerticalOdd => {
                let start = (self == CouplerPattern::VerticalOdd) as usize;
                for r in (start..rows.saturating_sub(1)).step_by(2) {
                    for c in 0..cols {
                        out.push((at(r, c), at(r + 1, c)));
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RqcConfig {
    pub rows: usize,
    pub cols: usize,
    pub depth: usize,
    pub seed: u64,
    pub single_qubit_pool: Vec<GateOp>,
    pub patterns: Vec<CouplerPattern>,
}

impl RqcConfig {
    pub fn new(rows: usize, cols: usize, depth: usize, seed: u64) -> Self {
        Self {
            rows,
            cols,
            depth,
            seed,
            single_qubit_pool: vec![GateOp::T, GateOp::Rx(FRAC_PI_2), GateOp::Ry(FRAC_PI_2)],
            patterns: CouplerPattern::CYCLE.to_vec(),
        }
    }

    pub fn qubit_count(&self) -> usize {
        self.rows * self.cols
    }
}

pub fn generate_rqc(config: &RqcConfig) -> Program {
    assert!(config.depth >= 1 && config.qubit_count() >= 2, "need depth >= 1 and at least two qubits");
    assert!(!config.single_qubit_pool.is_empty() && !config.patterns.is_empty());
    let n = config.qubit_count();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut program = Program::new(n, 0);
    for q in 0..n {
        program.push_gate(Gate::single(GateOp::H, q));
    }
    for layer in 0..config.depth {
        let pattern = config.patterns[layer % config.patterns.len()];
        let mut busy = vec![false; n];
        for (a, b) in pattern.edges(config.rows, config.cols) {
            busy[a] = true;
            busy[b] = true;
            program.push_gate(Gate::new(GateOp::Cz, vec![a, b]));
        }
        for q in (0..n).filter(|&q| !busy[q]) {
            let op = config.single_qubit_pool[rng.random_range(0..config.single_qubit_pool.len())];
            program.push_gate(Gate::single(op, q));
        }
    }
    program
}
