//! Circuit IR for the text instruction set.
//!
//! A script is a newline-separated list of instructions (`QINIT`, `CREG`,
//! gates, `DAGGER`/`CONTROL` blocks, `MEASURE`, `PMEASURE`), with `%`
//! starting a comment line. [`parse_program`] produces a [`Program`] whose
//! blocks are already expanded, so engines only ever see primitive gates
//! and measurement directives.
//!
//! ```
//! use qcsim::program::parse_program;
//!
//! let p = parse_program("QINIT 2\nCREG 1\nH 0\nPMEASURE 0").unwrap();
//! assert_eq!(p.qubit_count, 2);
//! assert_eq!(p.instructions.len(), 2);
//! ```

mod angle;
mod expand;
mod gate;
mod parse;

use std::fmt;

use thiserror::Error;

pub use angle::{eval_angle, parse_complex};
pub use expand::{expand_control, expand_dagger};
pub use gate::{Gate, GateMatrix, GateOp, Kernel};
pub use parse::parse_program;

#[derive(Clone, Debug, PartialEq)]
pub enum Instruction {
    Gate(Gate),
    Measure { qubit: usize, creg: usize },
    PMeasure { qubits: Vec<usize> },
}

impl Instruction {
    pub fn as_gate(&self) -> Option<&Gate> {
        match self {
            Instruction::Gate(g) => Some(g),
            _ => None,
        }
    }
}

/// A parsed, block-expanded circuit.
#[derive(Clone, Debug, Default)]
pub struct Program {
    pub qubit_count: usize,
    pub creg_count: usize,
    pub instructions: Vec<Instruction>,
    /// Source line of each instruction (1-based); 0 for synthesized ones.
    pub source_lines: Vec<usize>,
}

/// Programs compare by circuit content; the source line map is ignored.
impl PartialEq for Program {
    fn eq(&self, other: &Self) -> bool {
        self.qubit_count == other.qubit_count
            && self.creg_count == other.creg_count
            && self.instructions == other.instructions
    }
}

impl Program {
    pub fn new(qubit_count: usize, creg_count: usize) -> Self {
        Self { qubit_count, creg_count, ..Default::default() }
    }

    pub fn push(&mut self, inst: Instruction) {
        self.instructions.push(inst);
        self.source_lines.push(0);
    }

    pub fn push_gate(&mut self, gate: Gate) {
        self.push(Instruction::Gate(gate));
    }

    pub fn gates(&self) -> impl Iterator<Item = &Gate> {
        self.instructions.iter().filter_map(Instruction::as_gate)
    }

    pub fn line_of(&self, index: usize) -> usize {
        self.source_lines.get(index).copied().unwrap_or(0)
    }

    pub fn has_measure(&self) -> bool {
        self.instructions.iter().any(|i| matches!(i, Instruction::Measure { .. }))
    }
}

/// Serializes back to script text; reparsing yields an equal program.
impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "QINIT {}", self.qubit_count)?;
        writeln!(f, "CREG {}", self.creg_count)?;
        for inst in &self.instructions {
            match inst {
                Instruction::Gate(g) => {
                    for c in &g.controls {
                        writeln!(f, "CONTROL {c}")?;
                    }
                    writeln!(f, "{g}")?;
                    for c in g.controls.iter().rev() {
                        writeln!(f, "ENDCONTROL {c}")?;
                    }
                }
                Instruction::Measure { qubit, creg } => writeln!(f, "MEASURE {qubit},${creg}")?,
                Instruction::PMeasure { qubits } => {
                    let q: Vec<String> = qubits.iter().map(|q| q.to_string()).collect();
                    writeln!(f, "PMEASURE {}", q.join(","))?
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("line {line}: QINIT must precede every other instruction")]
    MissingQinit { line: usize },
    #[error("line {line}: unknown mnemonic `{mnemonic}`")]
    UnknownMnemonic { line: usize, mnemonic: String },
    #[error("line {line}: qubit {qubit} is out of range for {count} qubits")]
    QubitOutOfRange { line: usize, qubit: usize, count: usize },
    #[error("line {line}: classical register {creg} is out of range for {count} registers")]
    CregOutOfRange { line: usize, creg: usize, count: usize },
    #[error("line {line}: qubit {qubit} appears more than once")]
    DuplicateQubitArg { line: usize, qubit: usize },
    #[error("line {line}: {reason}")]
    UnbalancedBlock { line: usize, reason: String },
    #[error("line {line}: malformed angle `{text}`")]
    MalformedAngle { line: usize, text: String },
    #[error("line {line}: {reason}")]
    MalformedInstruction { line: usize, reason: String },
    #[error("line {line}: measurement inside a DAGGER block")]
    MeasureInsideDagger { line: usize },
    #[error("line {line}: measurement inside a CONTROL block")]
    MeasureInsideControl { line: usize },
    #[error("line {line}: control qubit {qubit} is used inside its own CONTROL block")]
    ControlQubitCollision { line: usize, qubit: usize },
    #[error("line {line}: U4 matrix is not unitary (max deviation {deviation:.3e})")]
    NonUnitaryU4 { line: usize, deviation: f64 },
}

impl ParseError {
    pub fn class(&self) -> &'static str {
        match self {
            ParseError::MissingQinit { .. } => "MissingQinit",
            ParseError::UnknownMnemonic { .. } => "UnknownMnemonic",
            ParseError::QubitOutOfRange { .. } => "QubitOutOfRange",
            ParseError::CregOutOfRange { .. } => "CregOutOfRange",
            ParseError::DuplicateQubitArg { .. } => "DuplicateQubitArg",
            ParseError::UnbalancedBlock { .. } => "UnbalancedBlock",
            ParseError::MalformedAngle { .. } => "MalformedAngle",
            ParseError::MalformedInstruction { .. } => "MalformedInstruction",
            ParseError::MeasureInsideDagger { .. } => "MeasureInsideDagger",
            ParseError::MeasureInsideControl { .. } => "MeasureInsideControl",
            ParseError::ControlQubitCollision { .. } => "ControlQubitCollision",
            ParseError::NonUnitaryU4 { .. } => "NonUnitaryU4",
        }
    }

    pub fn line(&self) -> usize {
        match self {
            ParseError::MissingQinit { line }
            | ParseError::UnknownMnemonic { line, .. }
            | ParseError::QubitOutOfRange { line, .. }
            | ParseError::CregOutOfRange { line, .. }
            | ParseError::DuplicateQubitArg { line, .. }
            | ParseError::UnbalancedBlock { line, .. }
            | ParseError::MalformedAngle { line, .. }
            | ParseError::MalformedInstruction { line, .. }
            | ParseError::MeasureInsideDagger { line }
            | ParseError::MeasureInsideControl { line }
            | ParseError::ControlQubitCollision { line, .. }
            | ParseError::NonUnitaryU4 { line, .. } => *line,
        }
    }

    pub(crate) fn with_line(mut self, at: usize) -> Self {
        match &mut self {
            ParseError::MissingQinit { line }
            | ParseError::UnknownMnemonic { line, .. }
            | ParseError::QubitOutOfRange { line, .. }
            | ParseError::CregOutOfRange { line, .. }
            | ParseError::DuplicateQubitArg { line, .. }
            | ParseError::UnbalancedBlock { line, .. }
            | ParseError::MalformedAngle { line, .. }
            | ParseError::MalformedInstruction { line, .. }
            | ParseError::MeasureInsideDagger { line }
            | ParseError::MeasureInsideControl { line }
            | ParseError::ControlQubitCollision { line, .. }
            | ParseError::NonUnitaryU4 { line, .. } => *line = at,
        }
        self
    }
}
