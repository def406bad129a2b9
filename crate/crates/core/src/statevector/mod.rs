//! Full-amplitude backend.
//!
//! All `2^n` amplitudes are kept in one array, with qubit `k` mapped to bit
//! weight `2^k` of the index. A gate never builds a `2^n x 2^n` matrix:
//! it visits each group of amplitudes that differ only in the gate's
//! target bits (`i` and `i + 2^k` for a one-qubit gate) and mixes them with
//! the small gate matrix. Controlled gates only visit groups whose control
//! bits are all one; every other amplitude is left untouched.
//!
//! Groups are enumerated by their lowest index and handed out to the
//! current rayon pool in runs of `2^chunk_log2` groups. Each group is
//! owned by exactly one task, so the result does not depend on the chunk
//! size or the number of workers. Reductions (norms, probabilities) sum
//! fixed-size chunks sequentially and then add the partial sums in chunk
//! order, which keeps them reproducible for any worker count.

mod dump;
mod run;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::program::{Gate, Kernel};

pub use dump::{read_dump, write_dump, DUMP_MAGIC, DUMP_VERSION};
pub use run::{run_full, FullOptions, ProbabilityTable, RunResult};

pub const DEFAULT_MAX_QUBITS: usize = 30;
pub const DEFAULT_CHUNK_LOG2: u32 = 14;

/// Below this total probability an outcome or Kraus branch is treated as impossible.
pub const DEGENERATE_PROBABILITY: f64 = 1e-12;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum SimError {
    #[error("{requested} qubits exceed the configured ceiling of {limit}")]
    TooManyQubits { requested: usize, limit: usize },
    #[error("a state needs at least one qubit")]
    NoQubits,
    #[error("both outcomes of qubit {qubit} have vanishing probability")]
    DegenerateState { qubit: usize },
    #[error("every Kraus branch has vanishing probability")]
    DegenerateBranch,
    #[error("state dump is malformed: {0}")]
    BadDump(String),
}

impl SimError {
    pub fn class(&self) -> &'static str {
        match self {
            SimError::TooManyQubits { .. } => "TooManyQubits",
            SimError::NoQubits => "NoQubits",
            SimError::DegenerateState { .. } => "DegenerateState",
            SimError::DegenerateBranch => "DegenerateBranch",
            SimError::BadDump(_) => "BadDump",
        }
    }
}

#[derive(Clone, Copy)]
struct AmpPtr(*mut Complex64);

// SAFETY: tasks only dereference disjoint index groups (see `for_each_group`).
unsafe impl Send for AmpPtr {}
unsafe impl Sync for AmpPtr {}

impl AmpPtr {
    #[inline(always)]
    unsafe fn get(self, i: usize) -> Complex64 {
        *self.0.add(i)
    }

    #[inline(always)]
    unsafe fn set(self, i: usize, v: Complex64) {
        *self.0.add(i) = v;
    }
}

/// Inserts a zero bit at every position in `positions` (ascending).
#[inline(always)]
fn deposit(mut g: usize, positions: &[usize]) -> usize {
    for &p in positions {
        g = (g & ((1 << p) - 1)) | ((g >> p) << (p + 1));
    }
    g
}

fn mask_of(qubits: &[usize]) -> usize {
    qubits.iter().fold(0, |m, q| m | (1 << q))
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    qubit_count: usize,
    amplitudes: Vec<Complex64>,
    chunk_log2: u32,
}

impl StateVector {
    /// `|0...0>` on `qubit_count` qubits, refusing anything above `max_qubits`.
    pub fn new(qubit_count: usize, max_qubits: usize) -> Result<Self, SimError> {
        if qubit_count == 0 {
            return Err(SimError::NoQubits);
        }
        if qubit_count > max_qubits || qubit_count >= usize::BITS as usize - 5 {
            return Err(SimError::TooManyQubits { requested: qubit_count, limit: max_qubits });
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << qubit_count];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self { qubit_count, amplitudes, chunk_log2: DEFAULT_CHUNK_LOG2 })
    }

    /// Wraps raw amplitudes; the length must be a power of two.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Self {
        assert!(amplitudes.len() >= 2 && amplitudes.len().is_power_of_two());
        let qubit_count = amplitudes.len().trailing_zeros() as usize;
        Self { qubit_count, amplitudes, chunk_log2: DEFAULT_CHUNK_LOG2 }
    }

    pub fn with_chunk_log2(mut self, chunk_log2: u32) -> Self {
        self.chunk_log2 = chunk_log2;
        self
    }

    pub fn set_chunk_log2(&mut self, chunk_log2: u32) {
        self.chunk_log2 = chunk_log2;
    }

    #[inline]
    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    #[inline]
    pub fn chunk_log2(&self) -> u32 {
        self.chunk_log2
    }

    #[inline]
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    #[inline]
    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    fn chunk_len(&self) -> usize {
        1usize << self.chunk_log2.min(usize::BITS - 1)
    }

    /// Runs `f(ptr, base)` for the lowest index `base` of every group whose
    /// `fixed_mask` bits are `set_mask`.
    fn for_each_group<F>(&mut self, fixed_mask: usize, set_mask: usize, f: F)
    where
        F: Fn(AmpPtr, usize) + Sync + Send,
    {
        let positions: Vec<usize> = (0..self.qubit_count).filter(|b| fixed_mask >> b & 1 == 1).collect();
        let groups = 1usize << (self.qubit_count - positions.len());
        let ptr = AmpPtr(self.amplitudes.as_mut_ptr());
        let chunk = self.chunk_len();
        // SAFETY (both branches): distinct `g` deposit to distinct bases, and
        // a group only touches `base | s` for `s` a subset of the unset fixed
        // bits, so no two calls of `f` alias an amplitude.
        if groups <= chunk || rayon::current_num_threads() == 1 {
            for g in 0..groups {
                f(ptr, deposit(g, &positions) | set_mask);
            }
        } else {
            (0..groups.div_ceil(chunk)).into_par_iter().for_each(|task| {
                let end = ((task + 1) * chunk).min(groups);
                for g in task * chunk..end {
                    f(ptr, deposit(g, &positions) | set_mask);
                }
            });
        }
    }

    /// Deterministic read-only sum over groups (see module docs).
    fn group_sum<F>(&self, fixed_mask: usize, set_mask: usize, f: F) -> f64
    where
        F: Fn(&[Complex64], usize) -> f64 + Sync + Send,
    {
        let positions: Vec<usize> = (0..self.qubit_count).filter(|b| fixed_mask >> b & 1 == 1).collect();
        let groups = 1usize << (self.qubit_count - positions.len());
        let chunk = self.chunk_len();
        let amps = &self.amplitudes[..];
        let run = |task: usize| -> f64 {
            let end = ((task + 1) * chunk).min(groups);
            (task * chunk..end).map(|g| f(amps, deposit(g, &positions) | set_mask)).sum()
        };
        let tasks = groups.div_ceil(chunk);
        if tasks == 1 {
            return run(0);
        }
        let partials: Vec<f64> = (0..tasks).into_par_iter().map(run).collect();
        partials.iter().sum()
    }

    /// `(alpha_i, alpha_{i+2^k}) <- U (alpha_i, alpha_{i+2^k})` for every `i` with bit `k` clear.
    pub fn apply_single_qubit(&mut self, m: &[Complex64; 4], k: usize) {
        self.apply_controlled(m, &[], k);
    }

    /// As [`apply_single_qubit`](Self::apply_single_qubit), restricted to indices with all `controls` set.
    pub fn apply_controlled(&mut self, m: &[Complex64; 4], controls: &[usize], k: usize) {
        debug_assert!(!controls.contains(&k));
        let t = 1usize << k;
        let cmask = mask_of(controls);
        let m = *m;
        self.for_each_group(cmask | t, cmask, move |p, base| unsafe {
            let a = p.get(base);
            let b = p.get(base | t);
            p.set(base, m[0] * a + m[1] * b);
            p.set(base | t, m[2] * a + m[3] * b);
        });
    }

    /// Multiplies `(alpha_i, alpha_{i+2^lo}, alpha_{i+2^hi}, alpha_{i+2^hi+2^lo})` by `U`.
    pub fn apply_two_qubit(&mut self, m: &[Complex64; 16], hi: usize, lo: usize) {
        self.apply_two_qubit_controlled(m, &[], hi, lo);
    }

    pub fn apply_two_qubit_controlled(&mut self, m: &[Complex64; 16], controls: &[usize], hi: usize, lo: usize) {
        assert_ne!(hi, lo);
        let (h, l) = (1usize << hi, 1usize << lo);
        let cmask = mask_of(controls);
        let m = *m;
        self.for_each_group(cmask | h | l, cmask, move |p, base| unsafe {
            let idx = [base, base | l, base | h, base | h | l];
            let v = [p.get(idx[0]), p.get(idx[1]), p.get(idx[2]), p.get(idx[3])];
            for (r, &i) in idx.iter().enumerate() {
                let row = &m[4 * r..4 * r + 4];
                p.set(i, row[0] * v[0] + row[1] * v[1] + row[2] * v[2] + row[3] * v[3]);
            }
        });
    }

    /// Applies `|bit><bit|` on qubit `k` without renormalizing.
    pub fn apply_projector(&mut self, bit: u8, k: usize) {
        let t = 1usize << k;
        let zero = Complex64::new(0.0, 0.0);
        let drop = if bit == 0 { t } else { 0 };
        self.for_each_group(t, 0, move |p, base| unsafe {
            p.set(base | drop, zero);
        });
    }

    pub fn apply_kernel(&mut self, kernel: &Kernel) {
        match kernel {
            Kernel::Single { controls, target, matrix } => self.apply_controlled(matrix, controls, *target),
            Kernel::Pair { controls, hi, lo, matrix } => self.apply_two_qubit_controlled(matrix, controls, *hi, *lo),
        }
    }

    pub fn apply_gate(&mut self, gate: &Gate) {
        if let crate::program::GateOp::Projector(bit) = gate.op {
            if gate.controls.is_empty() {
                self.apply_projector(bit, gate.qubits[0]);
                return;
            }
        }
        self.apply_kernel(&gate.kernel());
    }

    pub fn norm_sqr(&self) -> f64 {
        self.group_sum(0, 0, |a, i| a[i].norm_sqr())
    }

    /// `||K psi||^2` for a 2x2 operator `K` on qubit `k`.
    pub fn operator_norm_sqr(&self, m: &[Complex64; 4], k: usize) -> f64 {
        let t = 1usize << k;
        let m = *m;
        self.group_sum(t, 0, move |amps, base| {
            let (a, b) = (amps[base], amps[base | t]);
            (m[0] * a + m[1] * b).norm_sqr() + (m[2] * a + m[3] * b).norm_sqr()
        })
    }

    /// `||K psi||^2` for a 4x4 operator on qubits `(hi, lo)`.
    pub fn operator_norm_sqr_pair(&self, m: &[Complex64; 16], hi: usize, lo: usize) -> f64 {
        let (h, l) = (1usize << hi, 1usize << lo);
        let m = *m;
        self.group_sum(h | l, 0, move |amps, base| {
            let v = [amps[base], amps[base | l], amps[base | h], amps[base | h | l]];
            (0..4)
                .map(|r| {
                    let row = &m[4 * r..4 * r + 4];
                    (row[0] * v[0] + row[1] * v[1] + row[2] * v[2] + row[3] * v[3]).norm_sqr()
                })
                .sum()
        })
    }

    /// Probability that qubit `k` reads 1.
    pub fn probability_one(&self, k: usize) -> f64 {
        let t = 1usize << k;
        self.group_sum(t, t, |a, i| a[i].norm_sqr())
    }

    pub fn scale(&mut self, factor: f64) {
        let chunk = self.chunk_len();
        self.amplitudes.par_chunks_mut(chunk).for_each(|c| {
            for a in c {
                *a *= factor;
            }
        });
    }

    /// Rescales to unit norm and returns the norm squared found beforehand.
    pub fn normalize(&mut self) -> f64 {
        let n = self.norm_sqr();
        if n > 0.0 {
            self.scale(1.0 / n.sqrt());
        }
        n
    }

    /// Projects qubit `k` onto `outcome` and rescales by `1/sqrt(probability)`.
    pub fn collapse(&mut self, k: usize, outcome: u8, probability: f64) {
        let t = 1usize << k;
        let keep = if outcome == 0 { 0 } else { t };
        let factor = 1.0 / probability.sqrt();
        let zero = Complex64::new(0.0, 0.0);
        self.for_each_group(t, 0, move |p, base| unsafe {
            let other = base | (t ^ keep);
            p.set(other, zero);
            let i = base | keep;
            p.set(i, p.get(i) * factor);
        });
    }

    /// Samples qubit `k` with one uniform draw, collapses and renormalizes.
    pub fn measure<R: Rng + ?Sized>(&mut self, k: usize, rng: &mut R) -> Result<u8, SimError> {
        let t = 1usize << k;
        let p0 = self.group_sum(t, 0, |a, i| a[i].norm_sqr());
        let p1 = self.group_sum(t, t, |a, i| a[i].norm_sqr());
        if p0 < DEGENERATE_PROBABILITY && p1 < DEGENERATE_PROBABILITY {
            return Err(SimError::DegenerateState { qubit: k });
        }
        let r: f64 = rng.random();
        let (outcome, p) = if r * (p0 + p1) < p0 { (0, p0) } else { (1, p1) };
        self.collapse(k, outcome, p);
        Ok(outcome)
    }

    /// Marginal distribution over `qubits`; entry `b` has the first listed
    /// qubit as its most significant bit.
    pub fn pmeasure(&self, qubits: &[usize]) -> Vec<f64> {
        let m = qubits.len();
        let size = 1usize << m;
        let key = |i: usize| -> usize {
            qubits.iter().fold(0, |acc, &q| (acc << 1) | (i >> q & 1))
        };
        let accumulate = |offset: usize, slice: &[Complex64], table: &mut [f64]| {
            for (j, a) in slice.iter().enumerate() {
                table[key(offset + j)] += a.norm_sqr();
            }
        };
        let chunk = self.chunk_len();
        let tasks = self.amplitudes.len().div_ceil(chunk);
        if tasks == 1 || size.saturating_mul(tasks) > self.amplitudes.len() {
            let mut table = vec![0.0; size];
            accumulate(0, &self.amplitudes, &mut table);
            return table;
        }
        let partials: Vec<Vec<f64>> = self
            .amplitudes
            .par_chunks(chunk)
            .enumerate()
            .map(|(c, slice)| {
                let mut t = vec![0.0; size];
                accumulate(c * chunk, slice, &mut t);
                t
            })
            .collect();
        let mut table = vec![0.0; size];
        for t in partials {
            for (acc, v) in table.iter_mut().zip(t) {
                *acc += v;
            }
        }
        table
    }
}
