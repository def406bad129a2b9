//! Multi-backend quantum circuit simulator.
//!
//! Circuits are written in a small text instruction set ([`program`]) and
//! can be run by three engines:
//!
//! * [`statevector`]: every amplitude, gate by gate, with optional Kraus
//!   noise ([`noise`]);
//! * [`partition`]: selected amplitudes from two half-size sub-circuits per
//!   branch of the crossing controlled gates;
//! * [`graph`]: one transition amplitude by contracting an undirected
//!   graphical model of the circuit.
//!
//! [`qfbe`] holds the digit-recurrence function expansion and its
//! fixed-point reference oracle, and [`rqc`] a seeded random circuit
//! generator for benchmarks and cross-checks.

pub mod error;
pub mod graph;
pub mod noise;
pub mod parallel;
pub mod partition;
pub mod program;
pub mod qfbe;
pub mod report;
pub mod rqc;
pub mod statevector;

pub use error::Error;
