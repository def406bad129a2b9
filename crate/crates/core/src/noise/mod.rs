//! Stochastic Kraus noise for the full-amplitude backend.
//!
//! A noisy gate is simulated as one quantum trajectory step: every Kraus
//! operator `K_i` of the gate's channel is applied to the pre-gate state to
//! get the branch weights `||K_i psi||^2`, one uniform draw picks a branch,
//! and the state becomes `U K_i psi` renormalized. Two-qubit gates use the
//! Kronecker products of one channel per qubit.
//!
//! Intensity follows the channel table: the flip channels are noiseless at
//! `p = 1`, the damping and depolarizing channels at `p = 0`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::program::{Gate, GateMatrix, GateOp};
use crate::statevector::{SimError, StateVector, DEGENERATE_PROBABILITY};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum NoiseError {
    #[error("noise probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("gate class `{0}` has more than one noise assignment")]
    DuplicateGateClass(String),
    #[error("unknown noise kind `{0}`")]
    UnknownKind(String),
    #[error("malformed noise option `{0}`; expected kind:p[:GATE,GATE...]")]
    MalformedSpec(String),
}

impl NoiseError {
    pub fn class(&self) -> &'static str {
        match self {
            NoiseError::InvalidProbability(_) => "InvalidProbability",
            NoiseError::DuplicateGateClass(_) => "DuplicateGateClass",
            NoiseError::UnknownKind(_) => "UnknownNoiseKind",
            NoiseError::MalformedSpec(_) => "MalformedNoiseSpec",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NoiseKind {
    BitFlip,
    PhaseFlip,
    BitPhaseFlip,
    AmplitudeDamping,
    PhaseDamping,
    Depolarizing,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 6] = [
        NoiseKind::BitFlip,
        NoiseKind::PhaseFlip,
        NoiseKind::BitPhaseFlip,
        NoiseKind::AmplitudeDamping,
        NoiseKind::PhaseDamping,
        NoiseKind::Depolarizing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::BitFlip => "bitflip",
            NoiseKind::PhaseFlip => "phaseflip",
            NoiseKind::BitPhaseFlip => "bitphaseflip",
            NoiseKind::AmplitudeDamping => "ampdamp",
            NoiseKind::PhaseDamping => "phasedamp",
            NoiseKind::Depolarizing => "depolarizing",
        }
    }

    /// The intensity at which the channel reduces to the identity.
    pub fn noiseless_p(self) -> f64 {
        match self {
            NoiseKind::BitFlip | NoiseKind::PhaseFlip | NoiseKind::BitPhaseFlip => 1.0,
            _ => 0.0,
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NoiseKind {
    type Err = NoiseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NoiseKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| NoiseError::UnknownKind(s.to_string()))
    }
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// The Kraus operators of `kind` at intensity `p`, as 2x2 row-major arrays.
pub fn kraus_ops(kind: NoiseKind, p: f64) -> Result<Vec<[Complex64; 4]>, NoiseError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(NoiseError::InvalidProbability(p));
    }
    let i = Complex64::new(0.0, 1.0);
    let scaled = |s: f64, m: [Complex64; 4]| m.map(|z| z * s);
    let id = [real(1.0), ZERO, ZERO, real(1.0)];
    let x = [ZERO, real(1.0), real(1.0), ZERO];
    let y = [ZERO, -i, i, ZERO];
    let z = [real(1.0), ZERO, ZERO, real(-1.0)];
    let (sp, sq) = (p.sqrt(), (1.0 - p).sqrt());
    Ok(match kind {
        NoiseKind::BitFlip => vec![scaled(sp, id), scaled(sq, x)],
        NoiseKind::PhaseFlip => vec![scaled(sp, id), scaled(sq, z)],
        NoiseKind::BitPhaseFlip => vec![scaled(sp, id), scaled(sq, y)],
        NoiseKind::AmplitudeDamping => vec![[real(1.0), ZERO, ZERO, real(sq)], [ZERO, real(sp), ZERO, ZERO]],
        NoiseKind::PhaseDamping => vec![[real(1.0), ZERO, ZERO, real(sq)], [ZERO, ZERO, ZERO, real(sp)]],
        NoiseKind::Depolarizing => {
            let s = sp / 2.0;
            vec![scaled((1.0 - 0.75 * p).sqrt(), id), scaled(s, x), scaled(s, y), scaled(s, z)]
        }
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseChannel {
    pub kind: NoiseKind,
    pub p: f64,
    pub kraus: Vec<[Complex64; 4]>,
}

impl NoiseChannel {
    pub fn new(kind: NoiseKind, p: f64) -> Result<Self, NoiseError> {
        Ok(Self { kind, p, kraus: kraus_ops(kind, p)? })
    }

    pub fn matrices(&self, qubit: usize) -> Vec<GateMatrix> {
        self.kraus.iter().map(|k| GateMatrix::new(2, k.to_vec(), vec![qubit], false)).collect()
    }
}

/// `{K_i (x) M_j}` in `i`-major order; `a` acts on the high qubit.
pub fn two_qubit_kraus(a: &NoiseChannel, b: &NoiseChannel) -> Vec<[Complex64; 16]> {
    let mut out = Vec::with_capacity(a.kraus.len() * b.kraus.len());
    for k in &a.kraus {
        for m in &b.kraus {
            let mut prod = [ZERO; 16];
            for r in 0..4 {
                for c in 0..4 {
                    prod[4 * r + c] = k[2 * (r >> 1) + (c >> 1)] * m[2 * (r & 1) + (c & 1)];
                }
            }
            out.push(prod);
        }
    }
    out
}

fn is_identity(m: &[Complex64]) -> bool {
    let d = (m.len() as f64).sqrt() as usize;
    m.iter().enumerate().all(|(k, z)| *z == if k / d == k % d { real(1.0) } else { ZERO })
}

/// Samples one Kraus branch from `weights` with a single uniform draw.
fn pick_branch<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Result<usize, SimError> {
    if weights.iter().all(|w| *w < DEGENERATE_PROBABILITY) {
        return Err(SimError::DegenerateBranch);
    }
    let total: f64 = weights.iter().sum();
    let r: f64 = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, w) in weights.iter().enumerate() {
        if *w > 0.0 {
            acc += w;
            last = i;
            if r < acc {
                return Ok(i);
            }
        }
    }
    Ok(last)
}

/// One trajectory step of a noisy one-qubit gate; returns the chosen branch.
///
/// When the chosen operator is exactly the identity the clean gate is
/// applied without renormalizing, so noiseless channels are bit-exact.
pub fn sample_noisy_gate<R: Rng + ?Sized>(
    state: &mut StateVector,
    gate: &Gate,
    kraus: &[[Complex64; 4]],
    rng: &mut R,
) -> Result<usize, SimError> {
    let target = gate.all_qubits()[0];
    let weights: Vec<f64> = kraus.iter().map(|k| state.operator_norm_sqr(k, target)).collect();
    let i = pick_branch(&weights, rng)?;
    if !is_identity(&kraus[i]) {
        state.apply_single_qubit(&kraus[i], target);
        state.apply_gate(gate);
        state.normalize();
    } else {
        state.apply_gate(gate);
    }
    Ok(i)
}

/// Two-qubit counterpart of [`sample_noisy_gate`]; `kraus` acts on
/// `(all_qubits[0], all_qubits[1])` with the first qubit high.
pub fn sample_noisy_pair_gate<R: Rng + ?Sized>(
    state: &mut StateVector,
    gate: &Gate,
    kraus: &[[Complex64; 16]],
    rng: &mut R,
) -> Result<usize, SimError> {
    let q = gate.all_qubits();
    let (hi, lo) = (q[0], q[1]);
    let weights: Vec<f64> = kraus.iter().map(|k| state.operator_norm_sqr_pair(k, hi, lo)).collect();
    let i = pick_branch(&weights, rng)?;
    if !is_identity(&kraus[i]) {
        state.apply_two_qubit(&kraus[i], hi, lo);
        state.apply_gate(gate);
        state.normalize();
    } else {
        state.apply_gate(gate);
    }
    Ok(i)
}

/// Noise for one gate class (or every gate when `gates` is `None`).
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseAssignment {
    pub gates: Option<Vec<String>>,
    pub single: NoiseChannel,
    /// Channels for the high and low qubit of a two-qubit gate.
    pub pair: (NoiseChannel, NoiseChannel),
    pair_kraus: Vec<[Complex64; 16]>,
}

impl NoiseAssignment {
    pub fn new(gates: Option<Vec<String>>, single: NoiseChannel, pair: (NoiseChannel, NoiseChannel)) -> Self {
        let pair_kraus = two_qubit_kraus(&pair.0, &pair.1);
        Self { gates, single, pair, pair_kraus }
    }

    /// Same channel on every qubit of every covered gate.
    pub fn uniform(gates: Option<Vec<String>>, channel: NoiseChannel) -> Self {
        Self::new(gates, channel.clone(), (channel.clone(), channel))
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct NoiseModel {
    assignments: Vec<NoiseAssignment>,
    pub rng_seed: u64,
}

impl NoiseModel {
    pub fn new(rng_seed: u64) -> Self {
        Self { assignments: Vec::new(), rng_seed }
    }

    pub fn assignments(&self) -> &[NoiseAssignment] {
        &self.assignments
    }

    pub fn add(&mut self, assignment: NoiseAssignment) -> Result<(), NoiseError> {
        match &assignment.gates {
            None => {
                if self.assignments.iter().any(|a| a.gates.is_none()) {
                    return Err(NoiseError::DuplicateGateClass("*".into()));
                }
            }
            Some(names) => {
                for (k, name) in names.iter().enumerate() {
                    let taken = self.assignments.iter().any(|a| a.gates.as_ref().is_some_and(|g| g.contains(name)));
                    if taken || names[..k].contains(name) {
                        return Err(NoiseError::DuplicateGateClass(name.clone()));
                    }
                }
            }
        }
        self.assignments.push(assignment);
        Ok(())
    }

    /// Parses one `kind:p[:GATE,GATE...]` option and adds it.
    pub fn add_spec(&mut self, spec: &str) -> Result<(), NoiseError> {
        let malformed = || NoiseError::MalformedSpec(spec.to_string());
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() < 2 || parts.len() > 3 {
            return Err(malformed());
        }
        let kind: NoiseKind = parts[0].trim().parse()?;
        let p: f64 = parts[1].trim().parse().map_err(|_| malformed())?;
        let gates = match parts.get(2) {
            None => None,
            Some(list) => {
                let names: Vec<String> = list.split(',').map(|s| s.trim().to_string()).collect();
                if names.iter().any(|n| n.is_empty()) {
                    return Err(malformed());
                }
                Some(names)
            }
        };
        self.add(NoiseAssignment::uniform(gates, NoiseChannel::new(kind, p)?))
    }

    pub fn assignment_for(&self, mnemonic: &str) -> Option<&NoiseAssignment> {
        self.assignments
            .iter()
            .find(|a| a.gates.as_ref().is_some_and(|g| g.iter().any(|n| n == mnemonic)))
            .or_else(|| self.assignments.iter().find(|a| a.gates.is_none()))
    }

    /// The noise random stream, kept apart from the measurement stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        rng.set_stream(1);
        rng
    }

    /// Applies `gate`, noisily if its class is covered. Gates on three or
    /// more qubits and partition projectors always run clean.
    pub fn apply_gate<R: Rng + ?Sized>(&self, state: &mut StateVector, gate: &Gate, rng: &mut R) -> Result<(), SimError> {
        let assignment = match gate.op {
            GateOp::Projector(_) => None,
            _ => self.assignment_for(gate.op.mnemonic()),
        };
        match (assignment, gate.qubit_count()) {
            (Some(a), 1) => sample_noisy_gate(state, gate, &a.single.kraus, rng).map(|_| ()),
            (Some(a), 2) => sample_noisy_pair_gate(state, gate, &a.pair_kraus, rng).map(|_| ()),
            _ => {
                state.apply_gate(gate);
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn completeness_error(ops: &[Vec<Complex64>], d: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for c in 0..d {
                let s: Complex64 = ops
                    .iter()
                    .map(|k| (0..d).map(|j| k[j * d + r].conj() * k[j * d + c]).sum::<Complex64>())
                    .sum();
                let want = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((s - want).norm());
            }
        }
        worst
    }

    #[test]
    fn completeness_all_kinds() {
        for kind in NoiseKind::ALL {
            for step in 0..=10 {
                let p = step as f64 / 10.0;
                let ops: Vec<Vec<Complex64>> = kraus_ops(kind, p).unwrap().iter().map(|k| k.to_vec()).collect();
                assert!(completeness_error(&ops, 2) < 1e-12, "{kind} {p}");
            }
        }
    }

    #[test]
    fn operator_counts_and_limits() {
        for kind in NoiseKind::ALL {
            let n = kraus_ops(kind, 0.3).unwrap().len();
            assert_eq!(n, if kind == NoiseKind::Depolarizing { 4 } else { 2 });
            let ops = kraus_ops(kind, kind.noiseless_p()).unwrap();
            assert!(is_identity(&ops[0]), "{kind}");
            assert!(ops[1..].iter().all(|k| k.iter().all(|z| *z == ZERO)), "{kind}");
        }
        assert_eq!(kraus_ops(NoiseKind::BitFlip, 1.5), Err(NoiseError::InvalidProbability(1.5)));
    }

    #[test]
    fn pairwise_products() {
        let dep = NoiseChannel::new(NoiseKind::Depolarizing, 0.3).unwrap();
        let bf = NoiseChannel::new(NoiseKind::BitFlip, 0.6).unwrap();
        let ops = two_qubit_kraus(&dep, &bf);
        assert_eq!(ops.len(), 8);
        let ops: Vec<Vec<Complex64>> = ops.iter().map(|k| k.to_vec()).collect();
        assert!(completeness_error(&ops, 4) < 1e-12);

        let clean = NoiseChannel::new(NoiseKind::BitFlip, 1.0).unwrap();
        let ops = two_qubit_kraus(&clean, &clean);
        assert!(is_identity(&ops[0]));
        assert!(ops[1..].iter().all(|k| k.iter().all(|z| *z == ZERO)));
    }

    #[test]
    fn kron_layout_matches_gate_matrix() {
        let a = NoiseChannel::new(NoiseKind::AmplitudeDamping, 0.3).unwrap();
        let b = NoiseChannel::new(NoiseKind::BitPhaseFlip, 0.4).unwrap();
        let ops = two_qubit_kraus(&a, &b);
        let want = a.matrices(0)[1].kron(&b.matrices(1)[0]);
        assert_eq!(ops[2].to_vec(), want.entries());
    }

    #[test]
    fn phase_flip_half_keeps_marginals() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let channel = NoiseChannel::new(NoiseKind::PhaseFlip, 0.5).unwrap();
        let h = Gate::single(GateOp::H, 0);
        let mut seen = [0usize; 2];
        for _ in 0..200 {
            let mut s = StateVector::new(1, 30).unwrap();
            seen[sample_noisy_gate(&mut s, &h, &channel.kraus, &mut rng).unwrap()] += 1;
            let t = s.pmeasure(&[0]);
            assert!((t[0] - 0.5).abs() < 1e-12 && (t[1] - 0.5).abs() < 1e-12);
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }
        assert!(seen[0] > 0 && seen[1] > 0);
    }

    #[test]
    fn spec_parsing() {
        let mut m = NoiseModel::new(1);
        m.add_spec("bitflip:0.9:H,CNOT").unwrap();
        m.add_spec("depolarizing:0.1").unwrap();
        assert_eq!(m.assignment_for("H").unwrap().single.kind, NoiseKind::BitFlip);
        assert_eq!(m.assignment_for("T").unwrap().single.kind, NoiseKind::Depolarizing);
        assert_eq!(m.add_spec("ampdamp:0.1:T,H"), Err(NoiseError::DuplicateGateClass("H".into())));
        assert_eq!(m.add_spec("phasedamp:0.2"), Err(NoiseError::DuplicateGateClass("*".into())));
        assert!(matches!(m.add_spec("foo:0.1"), Err(NoiseError::UnknownKind(_))));
        assert!(matches!(m.add_spec("bitflip"), Err(NoiseError::MalformedSpec(_))));
        assert!(matches!(m.add_spec("bitflip:2:X"), Err(NoiseError::InvalidProbability(_))));
    }

    #[test]
    fn degenerate_branch() {
        let mut s = StateVector::from_amplitudes(vec![ZERO, ZERO]);
        let ops = kraus_ops(NoiseKind::BitFlip, 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            sample_noisy_gate(&mut s, &Gate::single(GateOp::X, 0), &ops, &mut rng),
            Err(SimError::DegenerateBranch)
        );
    }
}
