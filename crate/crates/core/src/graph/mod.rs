//! Single-amplitude backend on an undirected graphical model.
//!
//! Every qubit carries a chain of Boolean worldline variables; a new
//! variable starts after each non-diagonal gate on that qubit. Gates become
//! edges (tensors) over the variables they touch: a diagonal gate is a
//! tensor of its diagonal over the current variables, a non-diagonal gate a
//! tensor over its input and output variables with `T[in, out] = <out|U|in>`.
//!
//! Computing `<out|C|in>` fixes the first and last variable of every
//! worldline, optionally splits on the `N` busiest vertices (each split
//! doubles the number of graphs), and contracts every graph by repeatedly
//! picking the vertex with fewest neighbours, merging its edges and summing
//! it out.

mod tensor;

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::parallel::with_workers;
use crate::program::{GateMatrix, Instruction, Program};

pub use tensor::{eliminate_vertex_integral, merge_edges, EdgeTensor, VariableId};

pub const DEFAULT_RANK_CAP: usize = 26;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("line {line}: {mnemonic} acts on {qubits} qubits; single-amplitude mode supports one and two")]
    UnsupportedGate { line: usize, mnemonic: String, qubits: usize },
    #[error("line {line}: MEASURE is not available in single-amplitude mode")]
    MeasureInSingleMode { line: usize },
    #[error("contraction needs a rank-{rank} tensor, above the cap of {cap}")]
    TensorTooLarge { rank: usize, cap: usize },
    #[error("vertex {0} still has several edges; merge them before summing it out")]
    SharedVertexNotMerged(VariableId),
    #[error("vertex {0} is not live in this graph")]
    UnknownVertex(VariableId),
}

impl GraphError {
    pub fn class(&self) -> &'static str {
        match self {
            GraphError::UnsupportedGate { .. } => "UnsupportedGate",
            GraphError::MeasureInSingleMode { .. } => "MeasureInSingleMode",
            GraphError::TensorTooLarge { .. } => "TensorTooLarge",
            GraphError::SharedVertexNotMerged(_) => "SharedVertexNotMerged",
            GraphError::UnknownVertex(_) => "UnknownVertex",
        }
    }
}

/// Tensor of one gate over its variables.
///
/// A diagonal matrix with `out_vars == in_vars` becomes its diagonal over
/// `in_vars`; otherwise legs are `(in_vars.., out_vars..)` and
/// `T[in, out] = U[out][in]`.
pub fn tensor_for_gate(u: &GateMatrix, in_vars: &[VariableId], out_vars: &[VariableId]) -> EdgeTensor {
    let d = u.dim();
    if in_vars == out_vars {
        assert!(u.is_diagonal(), "only diagonal gates keep their variables");
        return EdgeTensor::new(in_vars.to_vec(), (0..d).map(|k| u.get(k, k)).collect());
    }
    let mut values = Vec::with_capacity(d * d);
    for input in 0..d {
        for output in 0..d {
            values.push(u.get(output, input));
        }
    }
    let mut legs = in_vars.to_vec();
    legs.extend_from_slice(out_vars);
    EdgeTensor::new(legs, values)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ContractStats {
    pub peak_rank: usize,
    pub peak_entries: usize,
    pub eliminated: usize,
}

impl ContractStats {
    fn record(&mut self, rank: usize) {
        self.peak_rank = self.peak_rank.max(rank);
        self.peak_entries = self.peak_entries.max(1 << rank);
    }

    fn absorb(&mut self, other: &ContractStats) {
        self.peak_rank = self.peak_rank.max(other.peak_rank);
        self.peak_entries = self.peak_entries.max(other.peak_entries);
        self.eliminated += other.eliminated;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContractionGraph {
    /// Variables of each qubit's worldline, in time order.
    pub worldlines: Vec<Vec<VariableId>>,
    /// Variables neither fixed nor eliminated.
    pub live: Vec<VariableId>,
    pub edges: Vec<EdgeTensor>,
    pub fixed: BTreeMap<VariableId, u8>,
    pub prefactor: Complex64,
}

impl ContractionGraph {
    fn with_qubits(n: usize) -> Self {
        let mut g = Self {
            worldlines: vec![Vec::new(); n],
            live: Vec::new(),
            edges: Vec::new(),
            fixed: BTreeMap::new(),
            prefactor: Complex64::new(1.0, 0.0),
        };
        for q in 0..n {
            g.new_variable(q);
        }
        g
    }

    fn new_variable(&mut self, qubit: usize) -> VariableId {
        let id = VariableId(self.worldlines.iter().map(Vec::len).sum::<usize>() as u32);
        self.worldlines[qubit].push(id);
        self.live.push(id);
        id
    }

    fn current(&self, qubit: usize) -> VariableId {
        *self.worldlines[qubit].last().unwrap()
    }

    pub fn vertex_count(&self) -> usize {
        self.worldlines.iter().map(Vec::len).sum()
    }

    pub fn is_live(&self, v: VariableId) -> bool {
        self.live.contains(&v)
    }

    /// Number of edges incident to `v`.
    pub fn edge_degree(&self, v: VariableId) -> usize {
        self.edges.iter().filter(|e| e.has_leg(v)).count()
    }

    /// Distinct live vertices sharing an edge with `v`.
    pub fn neighbours(&self, v: VariableId) -> Vec<VariableId> {
        let mut out: Vec<VariableId> = self
            .edges
            .iter()
            .filter(|e| e.has_leg(v))
            .flat_map(|e| e.legs.iter().copied())
            .filter(|&l| l != v)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn fold_scalars(&mut self) {
        let mut k = 0;
        while k < self.edges.len() {
            if self.edges[k].rank() == 0 {
                let e = self.edges.swap_remove(k);
                self.prefactor *= e.values[0];
            } else {
                k += 1;
            }
        }
    }

    /// Fixes live variable `v` to `bit`, slicing every incident tensor.
    pub fn fix_variable(&mut self, v: VariableId, bit: u8) -> Result<(), GraphError> {
        let pos = self.live.iter().position(|&l| l == v).ok_or(GraphError::UnknownVertex(v))?;
        self.live.remove(pos);
        self.fixed.insert(v, bit);
        for e in self.edges.iter_mut().filter(|e| e.has_leg(v)) {
            *e = e.slice(v, bit);
        }
        self.fold_scalars();
        Ok(())
    }

    /// Sums out `v`, which must have at most one incident edge. An isolated
    /// variable contributes a factor 2 (both of its values count).
    pub fn eliminate_integral(&mut self, v: VariableId) -> Result<(), GraphError> {
        let pos = self.live.iter().position(|&l| l == v).ok_or(GraphError::UnknownVertex(v))?;
        let incident: Vec<usize> = (0..self.edges.len()).filter(|&k| self.edges[k].has_leg(v)).collect();
        match incident.as_slice() {
            [] => self.prefactor *= 2.0,
            [k] => {
                let k = *k;
                self.edges[k] = eliminate_vertex_integral(&self.edges[k], v);
                self.fold_scalars();
            }
            _ => return Err(GraphError::SharedVertexNotMerged(v)),
        }
        self.live.remove(pos);
        Ok(())
    }

    /// Merges all edges incident to `v` into one, smallest rank first.
    pub fn merge_incident(&mut self, v: VariableId, rank_cap: usize, stats: &mut ContractStats) -> Result<(), GraphError> {
        let mut incident: Vec<EdgeTensor> = Vec::new();
        let mut k = 0;
        while k < self.edges.len() {
            if self.edges[k].has_leg(v) {
                incident.push(self.edges.remove(k));
            } else {
                k += 1;
            }
        }
        if incident.is_empty() {
            return Ok(());
        }
        incident.sort_by_key(EdgeTensor::rank);
        let mut iter = incident.into_iter();
        let mut acc = iter.next().unwrap();
        for e in iter {
            let rank = acc.merged_legs(&e).len();
            if rank > rank_cap {
                return Err(GraphError::TensorTooLarge { rank, cap: rank_cap });
            }
            acc = merge_edges(&acc, &e);
            stats.record(rank);
        }
        stats.record(acc.rank());
        self.edges.push(acc);
        Ok(())
    }
}

/// Builds the graph of `program`'s gates (`PMEASURE` is ignored).
pub fn circuit_to_graph(program: &Program) -> Result<ContractionGraph, GraphError> {
    let mut graph = ContractionGraph::with_qubits(program.qubit_count);
    for (index, inst) in program.instructions.iter().enumerate() {
        let gate = match inst {
            Instruction::Gate(g) => g,
            Instruction::Measure { .. } => return Err(GraphError::MeasureInSingleMode { line: program.line_of(index) }),
            Instruction::PMeasure { .. } => continue,
        };
        let qubits = gate.all_qubits();
        if qubits.len() > 2 {
            return Err(GraphError::UnsupportedGate {
                line: program.line_of(index),
                mnemonic: gate.op.mnemonic().to_string(),
                qubits: qubits.len(),
            });
        }
        let u = gate.dense_matrix();
        let in_vars: Vec<VariableId> = qubits.iter().map(|&q| graph.current(q)).collect();
        let out_vars = if u.is_diagonal() {
            in_vars.clone()
        } else {
            qubits.iter().map(|&q| graph.new_variable(q)).collect()
        };
        graph.edges.push(tensor_for_gate(&u, &in_vars, &out_vars));
    }
    Ok(graph)
}

/// Fixes each worldline's first variable to the matching bit of `input`
/// and its last to the bit of `output` (bit `q` belongs to qubit `q`).
pub fn fix_boundary(graph: &mut ContractionGraph, input: usize, output: usize) -> Result<(), GraphError> {
    for q in 0..graph.worldlines.len() {
        let (bin, bout) = ((input >> q & 1) as u8, (output >> q & 1) as u8);
        let first = graph.worldlines[q][0];
        let last = *graph.worldlines[q].last().unwrap();
        graph.fix_variable(first, bin)?;
        if first == last {
            if bin != bout {
                graph.prefactor = Complex64::new(0.0, 0.0);
            }
        } else {
            graph.fix_variable(last, bout)?;
        }
    }
    Ok(())
}

/// The two graphs with `v` fixed to 0 and to 1.
pub fn eliminate_vertex_differential(
    graph: &ContractionGraph,
    v: VariableId,
) -> Result<(ContractionGraph, ContractionGraph), GraphError> {
    let mut zero = graph.clone();
    let mut one = graph.clone();
    zero.fix_variable(v, 0)?;
    one.fix_variable(v, 1)?;
    Ok((zero, one))
}

/// The `n` live vertices with most incident edges, ties to the smaller id.
pub fn select_split_vertices(graph: &ContractionGraph, n: usize) -> Vec<VariableId> {
    let mut ranked: Vec<(usize, VariableId)> = graph.live.iter().map(|&v| (graph.edge_degree(v), v)).collect();
    ranked.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    ranked.into_iter().take(n).map(|(_, v)| v).collect()
}

/// Contracts the whole graph to a scalar by greedy min-neighbour elimination.
pub fn contract_graph(graph: ContractionGraph, rank_cap: usize) -> Result<(Complex64, ContractStats), GraphError> {
    let mut g = graph;
    let mut stats = ContractStats::default();
    for e in &g.edges {
        stats.record(e.rank());
    }
    while !g.live.is_empty() {
        if g.prefactor == Complex64::new(0.0, 0.0) {
            break;
        }
        let v = g
            .live
            .iter()
            .map(|&v| (g.neighbours(v).len(), v))
            .min()
            .map(|(_, v)| v)
            .unwrap();
        g.merge_incident(v, rank_cap, &mut stats)?;
        g.eliminate_integral(v)?;
        stats.eliminated += 1;
    }
    let value = g.edges.iter().fold(g.prefactor, |acc, e| acc * e.values[0]);
    Ok((value, stats))
}

#[derive(Clone, Debug)]
pub struct SingleOptions {
    /// Number of split vertices; `None` means `ceil(log2(workers))`.
    pub split_n: Option<usize>,
    pub workers: usize,
    pub rank_cap: usize,
}

impl Default for SingleOptions {
    fn default() -> Self {
        Self { split_n: None, workers: 1, rank_cap: DEFAULT_RANK_CAP }
    }
}

pub fn default_split(workers: usize) -> usize {
    workers.max(1).next_power_of_two().trailing_zeros() as usize
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingleResult {
    pub amplitude: Complex64,
    pub subgraphs: usize,
    pub stats: ContractStats,
}

/// `<output|C|input>` with bit `q` of each index belonging to qubit `q`.
pub fn run_single(program: &Program, input: usize, output: usize, options: &SingleOptions) -> Result<SingleResult, GraphError> {
    let mut graph = circuit_to_graph(program)?;
    fix_boundary(&mut graph, input, output)?;
    let n = options.split_n.unwrap_or_else(|| default_split(options.workers)).min(graph.live.len());
    let split = select_split_vertices(&graph, n);
    with_workers(options.workers, || {
        let parts: Vec<Result<(Complex64, ContractStats), GraphError>> = (0..1usize << n)
            .into_par_iter()
            .map(|id| {
                let mut g = graph.clone();
                for (j, &v) in split.iter().enumerate() {
                    g.fix_variable(v, (id >> j & 1) as u8)?;
                }
                contract_graph(g, options.rank_cap)
            })
            .collect();
        let mut amplitude = Complex64::new(0.0, 0.0);
        let mut stats = ContractStats::default();
        for part in parts {
            let (value, s) = part?;
            amplitude += value;
            stats.absorb(&s);
        }
        Ok(SingleResult { amplitude, subgraphs: 1 << n, stats })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::{parse_program, Gate, GateOp};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn amp(src: &str, input: usize, output: usize, n: usize) -> Complex64 {
        let p = parse_program(src).unwrap();
        let opts = SingleOptions { split_n: Some(n), ..Default::default() };
        run_single(&p, input, output, &opts).unwrap().amplitude
    }

    #[test]
    fn hadamard_graph_shape() {
        let g = circuit_to_graph(&parse_program("QINIT 1\nH 0").unwrap()).unwrap();
        assert_eq!(g.worldlines, vec![vec![VariableId(0), VariableId(1)]]);
        assert_eq!(g.edges.len(), 1);
        let s = FRAC_1_SQRT_2;
        assert_eq!(g.edges[0].values, vec![c(s), c(s), c(s), c(-s)]);
    }

    #[test]
    fn cz_graph_shape() {
        let g = circuit_to_graph(&parse_program("QINIT 2\nCZ 0,1").unwrap()).unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edges[0].legs, vec![VariableId(0), VariableId(1)]);
        assert_eq!(g.edges[0].values, vec![c(1.0), c(1.0), c(1.0), c(-1.0)]);
    }

    #[test]
    fn cr_tensor_is_diagonal() {
        let theta = 0.7;
        let u = GateOp::Cr(theta).matrix(vec![0, 1]);
        let t = tensor_for_gate(&u, &[VariableId(0), VariableId(1)], &[VariableId(0), VariableId(1)]);
        assert_eq!(t.values[3], Complex64::from_polar(1.0, theta));
    }

    #[test]
    fn boundary_matrix_elements() {
        let s = FRAC_1_SQRT_2;
        assert!((amp("QINIT 1\nH 0", 0, 1, 0) - c(s)).norm() < 1e-15);
        assert!((amp("QINIT 1\nH 0", 1, 1, 0) - c(-s)).norm() < 1e-15);
        assert!((amp("QINIT 1\nH 0", 0, 0, 0) - c(s)).norm() < 1e-15);
        assert_eq!(amp("QINIT 2\nH 0", 0, 2, 0), c(0.0));
        assert_eq!(amp("QINIT 1\nT 0", 1, 1, 0), Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4));
    }

    #[test]
    fn ghz_like_and_split_invariance() {
        let src = "QINIT 3\nH 0\nCZ 0,1\nH 1\nCZ 1,2\nH 2";
        let p = parse_program(src).unwrap();
        let full = crate::statevector::run_full(&p, &Default::default(), None).unwrap();
        for out in 0..8 {
            let base = amp(src, 0, out, 0);
            assert!((base - full.state.amplitude(out)).norm() < 1e-12);
            for n in 1..=3 {
                assert!((amp(src, 0, out, n) - base).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn differential_split_sums() {
        let p = parse_program("QINIT 2\nH 0\nCNOT 0,1\nRX 1,\"0.3\"\nH 0").unwrap();
        let mut g = circuit_to_graph(&p).unwrap();
        fix_boundary(&mut g, 0, 3).unwrap();
        let v = g.live[0];
        let (g0, g1) = eliminate_vertex_differential(&g, v).unwrap();
        let whole = contract_graph(g, 26).unwrap().0;
        let parts = contract_graph(g0, 26).unwrap().0 + contract_graph(g1, 26).unwrap().0;
        assert!((whole - parts).norm() < 1e-12);
    }

    #[test]
    fn isolated_vertex_split() {
        let mut g = ContractionGraph::with_qubits(1);
        let (a, b) = eliminate_vertex_differential(&g, VariableId(0)).unwrap();
        assert_eq!(a.prefactor, g.prefactor);
        assert_eq!(a.edges, b.edges);
        g.eliminate_integral(VariableId(0)).unwrap();
        assert_eq!(g.prefactor, c(2.0));
    }

    #[test]
    fn shared_vertex_must_be_merged() {
        let mut g = circuit_to_graph(&parse_program("QINIT 1\nH 0\nH 0").unwrap()).unwrap();
        assert_eq!(g.eliminate_integral(VariableId(1)), Err(GraphError::SharedVertexNotMerged(VariableId(1))));
    }

    #[test]
    fn split_selection() {
        // Star: qubit 0's initial variable touches five CZ edges.
        let mut src = String::from("QINIT 6\n");
        for q in 1..6 {
            src += &format!("H {q}\nCZ 0,{q}\n");
        }
        let g = circuit_to_graph(&parse_program(&src).unwrap()).unwrap();
        assert_eq!(select_split_vertices(&g, 1), vec![VariableId(0)]);
        assert!(select_split_vertices(&g, 0).is_empty());

        let g = circuit_to_graph(&parse_program("QINIT 3\nH 0\nH 1\nH 2").unwrap()).unwrap();
        assert_eq!(select_split_vertices(&g, 2), vec![VariableId(0), VariableId(1)]);
    }

    #[test]
    fn toffoli_rejected_and_worldline_counts() {
        let p = parse_program("QINIT 3\nTOFFOLI 0,1,2").unwrap();
        assert!(matches!(circuit_to_graph(&p), Err(GraphError::UnsupportedGate { line: 2, .. })));

        let mut p = Program::new(2, 0);
        for op in [GateOp::H, GateOp::T, GateOp::X, GateOp::Z, GateOp::Ry(0.2)] {
            p.push_gate(Gate::single(op, 0));
        }
        p.push_gate(Gate::new(GateOp::Cz, vec![0, 1]));
        p.push_gate(Gate::new(GateOp::Cnot, vec![1, 0]));
        let g = circuit_to_graph(&p).unwrap();
        assert_eq!(g.worldlines[0].len(), 5);
        assert_eq!(g.worldlines[1].len(), 2);
    }

    #[test]
    fn rank_cap_is_enforced() {
        let mut src = String::from("QINIT 6\n");
        for q in 0..6 {
            src += &format!("H {q}\n");
        }
        for a in 0..6 {
            for b in a + 1..6 {
                src += &format!("CNOT {a},{b}\n");
            }
        }
        let p = parse_program(&src).unwrap();
        let opts = SingleOptions { split_n: Some(0), workers: 1, rank_cap: 2 };
        assert!(matches!(run_single(&p, 0, 0, &opts), Err(GraphError::TensorTooLarge { cap: 2, .. })));
    }
}
