//! Partial-amplitude backend.
//!
//! The qubits are cut into a lower block `[0, cut)` and an upper block
//! `[cut, n)`. A controlled gate `C-U` whose control and target sit on
//! opposite sides is rewritten as `P0 (x) I + P1 (x) U`, so each choice of
//! terms (a branch) is a product of two independent sub-circuits. With `c`
//! crossing gates there are `2^c` branches and `2^(c+1)` sub-circuits; an
//! amplitude is the sum over branches of the product of the two blocks'
//! (sub-normalized) amplitudes.

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::parallel::with_workers;
use crate::program::{Gate, GateOp, Instruction, Program};
use crate::statevector::{SimError, StateVector, DEFAULT_CHUNK_LOG2, DEFAULT_MAX_QUBITS};

pub const DEFAULT_BRANCH_BUDGET: u64 = 1 << 16;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum PartitionError {
    #[error("line {line}: {mnemonic} crosses the cut and is not a controlled two-qubit gate")]
    UncuttableGate { line: usize, mnemonic: String },
    #[error("{crossings} crossing gates give more than {budget} branches")]
    BranchExplosion { crossings: usize, budget: u64 },
    #[error("line {line}: MEASURE is not available in partial mode")]
    MeasureInPartialMode { line: usize },
    #[error("cut {cut} must lie strictly between 0 and {qubits}")]
    InvalidCut { cut: usize, qubits: usize },
    #[error("target {target} is out of range for {qubits} qubits")]
    TargetOutOfRange { target: usize, qubits: usize },
    #[error(transparent)]
    Sim(#[from] SimError),
}

impl PartitionError {
    pub fn class(&self) -> &'static str {
        match self {
            PartitionError::UncuttableGate { .. } => "UncuttableGate",
            PartitionError::BranchExplosion { .. } => "BranchExplosion",
            PartitionError::MeasureInPartialMode { .. } => "MeasureInPartialMode",
            PartitionError::InvalidCut { .. } => "InvalidCut",
            PartitionError::TargetOutOfRange { .. } => "TargetOutOfRange",
            PartitionError::Sim(e) => e.class(),
        }
    }
}

/// A controlled gate with its control on one side of the cut and target on the other.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossingGate {
    /// Position in the program's instruction list.
    pub index: usize,
    pub control: usize,
    pub target: usize,
    /// Action on the target when the control is 1.
    pub local: GateOp,
}

#[derive(Clone, Debug)]
pub struct PartitionPlan {
    pub cut: usize,
    pub qubit_count: usize,
    pub crossing: Vec<CrossingGate>,
    program: Program,
}

impl PartitionPlan {
    /// Number of crossing gates `c`.
    pub fn c(&self) -> usize {
        self.crossing.len()
    }

    pub fn branch_count(&self) -> u64 {
        1 << self.c()
    }

    pub fn subcircuit_count(&self) -> u64 {
        2 * self.branch_count()
    }

    pub fn lower_qubits(&self) -> usize {
        self.cut
    }

    pub fn upper_qubits(&self) -> usize {
        self.qubit_count - self.cut
    }

    /// Amplitudes held while simulating one branch: one vector per block.
    pub fn resident_amplitudes(&self) -> usize {
        (1 << self.upper_qubits()) + (1 << self.lower_qubits())
    }
}

/// One term of the crossing-gate expansion, as two independent programs.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchCircuit {
    /// Bit `j` selects the `P0` (0) or `P1` (1) term of crossing gate `j`.
    pub branch_id: u64,
    pub upper: Program,
    pub lower: Program,
}

/// Splits a crossing gate into (control, target, local op), if it has that form.
fn controlled_pair(gate: &Gate) -> Option<(usize, usize, GateOp)> {
    if gate.qubit_count() != 2 {
        return None;
    }
    if gate.controls.len() == 1 && gate.op.arity() == 1 {
        return Some((gate.controls[0], gate.qubits[0], gate.op));
    }
    match gate.op.controlled_form() {
        Some((1, local)) if gate.controls.is_empty() => Some((gate.qubits[0], gate.qubits[1], local)),
        _ => None,
    }
}

pub fn plan_partition(program: &Program, cut: usize, branch_budget: u64) -> Result<PartitionPlan, PartitionError> {
    let n = program.qubit_count;
    if cut == 0 || cut >= n {
        return Err(PartitionError::InvalidCut { cut, qubits: n });
    }
    let mut crossing = Vec::new();
    for (index, inst) in program.instructions.iter().enumerate() {
        match inst {
            Instruction::Measure { .. } => {
                return Err(PartitionError::MeasureInPartialMode { line: program.line_of(index) })
            }
            Instruction::PMeasure { .. } => {}
            Instruction::Gate(g) => {
                let qubits = g.all_qubits();
                let lower = qubits.iter().filter(|&&q| q < cut).count();
                if lower == 0 || lower == qubits.len() {
                    continue;
                }
                let Some((control, target, local)) = controlled_pair(g) else {
                    return Err(PartitionError::UncuttableGate {
                        line: program.line_of(index),
                        mnemonic: g.op.mnemonic().to_string(),
                    });
                };
                crossing.push(CrossingGate { index, control, target, local });
            }
        }
    }
    let c = crossing.len();
    if c >= 63 || (1u64 << c) > branch_budget {
        return Err(PartitionError::BranchExplosion { crossings: c, budget: branch_budget });
    }
    Ok(PartitionPlan { cut, qubit_count: n, crossing, program: program.clone() })
}

fn relocate(gate: &Gate, offset: usize) -> Gate {
    Gate {
        op: gate.op,
        controls: gate.controls.iter().map(|q| q - offset).collect(),
        qubits: gate.qubits.iter().map(|q| q - offset).collect(),
    }
}

/// Builds the two sub-programs of one branch.
pub fn branch_circuit(plan: &PartitionPlan, branch_id: u64) -> BranchCircuit {
    let cut = plan.cut;
    let mut upper = Program::new(plan.upper_qubits(), 0);
    let mut lower = Program::new(plan.lower_qubits(), 0);
    let mut next = plan.crossing.iter().enumerate().peekable();
    for (index, inst) in plan.program.instructions.iter().enumerate() {
        let Instruction::Gate(g) = inst else { continue };
        if let Some((j, cg)) = next.next_if(|(_, cg)| cg.index == index) {
            let bit = (branch_id >> j & 1) as u8;
            let mut place = |q: usize, op: GateOp| {
                if q >= cut {
                    upper.push_gate(Gate::single(op, q - cut));
                } else {
                    lower.push_gate(Gate::single(op, q));
                }
            };
            place(cg.control, GateOp::Projector(bit));
            if bit == 1 {
                place(cg.target, cg.local);
            }
        } else if g.all_qubits()[0] >= cut {
            upper.push_gate(relocate(g, cut));
        } else {
            lower.push_gate(g.clone());
        }
    }
    BranchCircuit { branch_id, upper, lower }
}

/// All `2^c` branches in ascending id order.
pub fn decompose_crossing(plan: &PartitionPlan) -> Vec<BranchCircuit> {
    (0..plan.branch_count()).map(|id| branch_circuit(plan, id)).collect()
}

#[derive(Clone, Debug)]
pub struct PartialOptions {
    /// Cut position; `None` means `floor(n/2)`.
    pub cut: Option<usize>,
    pub workers: usize,
    pub branch_budget: u64,
    pub max_qubits: usize,
    pub chunk_log2: u32,
}

impl Default for PartialOptions {
    fn default() -> Self {
        Self {
            cut: None,
            workers: 1,
            branch_budget: DEFAULT_BRANCH_BUDGET,
            max_qubits: DEFAULT_MAX_QUBITS,
            chunk_log2: DEFAULT_CHUNK_LOG2,
        }
    }
}

fn simulate(program: &Program, options: &PartialOptions) -> Result<StateVector, SimError> {
    let mut state = StateVector::new(program.qubit_count, options.max_qubits)?;
    state.set_chunk_log2(options.chunk_log2);
    for g in program.gates() {
        state.apply_gate(g);
    }
    Ok(state)
}

/// Amplitudes `<t|C|0...0>` for each target index `t` (qubit `k` is bit `k`).
pub fn run_partial(program: &Program, options: &PartialOptions, targets: &[usize]) -> Result<Vec<Complex64>, PartitionError> {
    let n = program.qubit_count;
    if let Some(&t) = targets.iter().find(|&&t| n < usize::BITS as usize && t >> n != 0) {
        return Err(PartitionError::TargetOutOfRange { target: t, qubits: n });
    }
    let cut = options.cut.unwrap_or(n / 2);
    let plan = plan_partition(program, cut, options.branch_budget)?;
    let mask = (1usize << cut) - 1;
    with_workers(options.workers, || {
        let per_branch: Vec<Result<Vec<Complex64>, SimError>> = (0..plan.branch_count())
            .into_par_iter()
            .map(|id| {
                let branch = branch_circuit(&plan, id);
                let up = simulate(&branch.upper, options)?;
                let lo = simulate(&branch.lower, options)?;
                Ok(targets.iter().map(|&t| up.amplitude(t >> cut) * lo.amplitude(t & mask)).collect())
            })
            .collect();
        let mut sums = vec![Complex64::new(0.0, 0.0); targets.len()];
        for contribution in per_branch {
            for (acc, v) in sums.iter_mut().zip(contribution?) {
                *acc += v;
            }
        }
        Ok(sums)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::parse_program;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn two_crossing_topology() -> Program {
        let mut src = String::from("QINIT 8\n");
        for q in 0..8 {
            src += &format!("H {q}\n");
        }
        src += "CZ 0,1\nCZ 2,3\nCZ 4,5\nCZ 6,7\nCZ 1,5\nCZ 3,6\nCZ 1,2\nCZ 5,6\n";
        parse_program(&src).unwrap()
    }

    #[test]
    fn two_crossing_structure() {
        let plan = plan_partition(&two_crossing_topology(), 4, DEFAULT_BRANCH_BUDGET).unwrap();
        assert_eq!(plan.c(), 2);
        assert_eq!(plan.branch_count(), 4);
        assert_eq!(plan.subcircuit_count(), 8);
        assert_eq!(plan.resident_amplitudes(), 2 * 16);
        let ids: Vec<u64> = decompose_crossing(&plan).iter().map(|b| b.branch_id).collect();
        assert_eq!(ids, vec![0, 1, 2, 3]);
    }

    #[test]
    fn swap_is_uncuttable() {
        let p = parse_program("QINIT 2\nSWAP 0,1").unwrap();
        assert!(matches!(plan_partition(&p, 1, 16), Err(PartitionError::UncuttableGate { line: 2, .. })));
    }

    #[test]
    fn no_crossings() {
        let p = parse_program("QINIT 4\nH 0\nCNOT 0,1\nH 3").unwrap();
        let plan = plan_partition(&p, 2, 16).unwrap();
        assert_eq!((plan.branch_count(), plan.subcircuit_count()), (1, 2));
    }

    #[test]
    fn budget_and_measure() {
        let p = parse_program("QINIT 2\nCZ 0,1\nCZ 0,1\nCZ 0,1").unwrap();
        assert!(matches!(plan_partition(&p, 1, 4), Err(PartitionError::BranchExplosion { crossings: 3, budget: 4 })));
        let p = parse_program("QINIT 2\nCREG 1\nMEASURE 0,$0").unwrap();
        assert!(matches!(plan_partition(&p, 1, 4), Err(PartitionError::MeasureInPartialMode { .. })));
    }

    #[test]
    fn branch_contents() {
        let p = parse_program("QINIT 2\nH 0\nCZ 0,1").unwrap();
        let plan = plan_partition(&p, 1, 16).unwrap();
        let b = decompose_crossing(&plan);
        assert_eq!(b[0].lower.instructions.len(), 2);
        assert_eq!(b[0].upper.instructions.len(), 0);
        assert_eq!(b[1].upper.gates().next().unwrap(), &Gate::single(GateOp::Z, 0));
        assert_eq!(b[1].lower.gates().nth(1).unwrap(), &Gate::single(GateOp::Projector(1), 0));
    }

    #[test]
    fn hadamard_cz_amplitude() {
        let p = parse_program("QINIT 2\nH 0\nCZ 0,1").unwrap();
        let amps = run_partial(&p, &PartialOptions::default(), &[0, 1, 2, 3]).unwrap();
        assert!((amps[0] - Complex64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((amps[1] - Complex64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!(amps[2].norm() < 1e-15 && amps[3].norm() < 1e-15);
    }

    #[test]
    fn control_on_upper_side() {
        let p = parse_program("QINIT 2\nH 1\nCNOT 1,0").unwrap();
        let amps = run_partial(&p, &PartialOptions::default(), &[0, 3]).unwrap();
        for a in amps {
            assert!((a - Complex64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        }
    }
}
