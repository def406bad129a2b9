use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{SimError, StateVector, DEFAULT_CHUNK_LOG2, DEFAULT_MAX_QUBITS};
use crate::noise::NoiseModel;
use crate::parallel::with_workers;
use crate::program::{Instruction, Program};

#[derive(Clone, Debug)]
pub struct FullOptions {
    pub workers: usize,
    pub chunk_log2: u32,
    pub max_qubits: usize,
    /// Seed of the measurement stream.
    pub seed: u64,
}

impl Default for FullOptions {
    fn default() -> Self {
        Self { workers: 1, chunk_log2: DEFAULT_CHUNK_LOG2, max_qubits: DEFAULT_MAX_QUBITS, seed: 0 }
    }
}

/// Result of one `PMEASURE`: entry `b` is the probability of bitstring `b`
/// over `qubits`, first listed qubit most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityTable {
    pub qubits: Vec<usize>,
    pub probabilities: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub cregs: Vec<u8>,
    pub tables: Vec<ProbabilityTable>,
    pub state: StateVector,
}

/// Executes `program` on the full state vector inside a pool of `options.workers` threads.
pub fn run_full(program: &Program, options: &FullOptions, noise: Option<&NoiseModel>) -> Result<RunResult, SimError> {
    let mut state = StateVector::new(program.qubit_count, options.max_qubits)?;
    state.set_chunk_log2(options.chunk_log2);
    with_workers(options.workers, || execute(program, state, options.seed, noise))
}

/// Runs the instruction list on `state` in the current pool.
pub(crate) fn execute(
    program: &Program,
    mut state: StateVector,
    seed: u64,
    noise: Option<&NoiseModel>,
) -> Result<RunResult, SimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noise_rng = noise.map(NoiseModel::rng);
    let mut cregs = vec![0u8; program.creg_count];
    let mut tables = Vec::new();
    for inst in &program.instructions {
        match inst {
            Instruction::Gate(g) => match (noise, noise_rng.as_mut()) {
                (Some(model), Some(nrng)) => model.apply_gate(&mut state, g, nrng)?,
                _ => state.apply_gate(g),
            },
            Instruction::Measure { qubit, creg } => cregs[*creg] = state.measure(*qubit, &mut rng)?,
            Instruction::PMeasure { qubits } => tables.push(ProbabilityTable {
                qubits: qubits.clone(),
                probabilities: state.pmeasure(qubits),
            }),
        }
    }
    Ok(RunResult { cregs, tables, state })
}
