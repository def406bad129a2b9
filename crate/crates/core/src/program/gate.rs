use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};
use std::fmt;

use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Dense row-major gate matrix bound to qubits.
///
/// For a matrix over several qubits the first bound qubit is the most
/// significant bit of the row/column index, so `CNOT 0,1` has qubit 0 as
/// the high bit, matching the printed instruction-set matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct GateMatrix {
    dim: usize,
    entries: Vec<Complex64>,
    qubits: Vec<usize>,
    unitary: bool,
}

impl GateMatrix {
    pub fn new(dim: usize, entries: Vec<Complex64>, qubits: Vec<usize>, unitary: bool) -> Self {
        assert_eq!(entries.len(), dim * dim, "matrix entries must be dim*dim");
        assert_eq!(1 << qubits.len(), dim, "dimension must be 2^(bound qubits)");
        Self { dim, entries, qubits, unitary }
    }

    pub fn identity(qubits: Vec<usize>) -> Self {
        let dim = 1 << qubits.len();
        let mut entries = vec![ZERO; dim * dim];
        for k in 0..dim {
            entries[k * dim + k] = ONE;
        }
        Self { dim, entries, qubits, unitary: true }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    #[inline]
    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    #[inline]
    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn with_qubits(mut self, qubits: Vec<usize>) -> Self {
        assert_eq!(qubits.len(), self.qubits.len());
        self.qubits = qubits;
        self
    }

    /// Matrix product `self * rhs`; both must be bound to the same qubits.
    pub fn mul(&self, rhs: &GateMatrix) -> GateMatrix {
        assert_eq!(self.dim, rhs.dim);
        let d = self.dim;
        let mut entries = vec![ZERO; d * d];
        for r in 0..d {
            for k in 0..d {
                let a = self.entries[r * d + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..d {
                    entries[r * d + c] += a * rhs.entries[k * d + c];
                }
            }
        }
        GateMatrix {
            dim: d,
            entries,
            qubits: self.qubits.clone(),
            unitary: self.unitary && rhs.unitary,
        }
    }

    pub fn adjoint(&self) -> GateMatrix {
        let d = self.dim;
        let mut entries = vec![ZERO; d * d];
        for r in 0..d {
            for c in 0..d {
                entries[c * d + r] = self.entries[r * d + c].conj();
            }
        }
        GateMatrix { dim: d, entries, qubits: self.qubits.clone(), unitary: self.unitary }
    }

    /// Kronecker product with `self` on the high bits.
    pub fn kron(&self, rhs: &GateMatrix) -> GateMatrix {
        let (da, db) = (self.dim, rhs.dim);
        let d = da * db;
        let mut entries = vec![ZERO; d * d];
        for ar in 0..da {
            for ac in 0..da {
                let a = self.entries[ar * da + ac];
                for br in 0..db {
                    for bc in 0..db {
                        entries[(ar * db + br) * d + ac * db + bc] = a * rhs.entries[br * db + bc];
                    }
                }
            }
        }
        let mut qubits = self.qubits.clone();
        qubits.extend_from_slice(&rhs.qubits);
        GateMatrix { dim: d, entries, qubits, unitary: self.unitary && rhs.unitary }
    }

    /// Largest elementwise deviation of `U U†` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let prod = self.mul(&self.adjoint());
        let d = self.dim;
        let mut worst = 0.0f64;
        for r in 0..d {
            for c in 0..d {
                let target = if r == c { ONE } else { ZERO };
                worst = worst.max((prod.entries[r * d + c] - target).norm());
            }
        }
        worst
    }

    /// True when every off-diagonal entry is exactly zero.
    pub fn is_diagonal(&self) -> bool {
        let d = self.dim;
        (0..d).all(|r| (0..d).all(|c| r == c || self.entries[r * d + c] == ZERO))
    }

    pub fn max_abs_diff(&self, other: &GateMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub(crate) fn to_array4(&self) -> [Complex64; 4] {
        assert_eq!(self.dim, 2);
        [self.entries[0], self.entries[1], self.entries[2], self.entries[3]]
    }

    pub(crate) fn to_array16(&self) -> [Complex64; 16] {
        assert_eq!(self.dim, 4);
        let mut out = [ZERO; 16];
        out.copy_from_slice(&self.entries);
        out
    }
}

/// A primitive operation of the instruction set, without qubit bindings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GateOp {
    H,
    X,
    Y,
    Z,
    S,
    T,
    Rx(f64),
    Ry(f64),
    Rz(f64),
    /// `U4` element form, row-major `(u0, u1, u2, u3)`.
    U4Matrix([Complex64; 4]),
    /// `U4` angle form `(alpha, beta, gamma, delta)`.
    U4Angles([f64; 4]),
    Cnot,
    Cz,
    Cr(f64),
    Swap,
    ISwap,
    Toffoli,
    /// Non-unitary projector `|b><b|`; only produced by circuit partitioning.
    Projector(u8),
}

impl GateOp {
    pub fn mnemonic(&self) -> &'static str {
        match self {
            GateOp::H => "H",
            GateOp::X => "X",
            GateOp::Y => "Y",
            GateOp::Z => "Z",
            GateOp::S => "S",
            GateOp::T => "T",
            GateOp::Rx(_) => "RX",
            GateOp::Ry(_) => "RY",
            GateOp::Rz(_) => "RZ",
            GateOp::U4Matrix(_) | GateOp::U4Angles(_) => "U4",
            GateOp::Cnot => "CNOT",
            GateOp::Cz => "CZ",
            GateOp::Cr(_) => "CR",
            GateOp::Swap => "SWAP",
            GateOp::ISwap => "iSWAP",
            GateOp::Toffoli => "TOFFOLI",
            GateOp::Projector(0) => "P0",
            GateOp::Projector(_) => "P1",
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            GateOp::Cnot | GateOp::Cz | GateOp::Cr(_) | GateOp::Swap | GateOp::ISwap => 2,
            GateOp::Toffoli => 3,
            _ => 1,
        }
    }

    pub fn is_unitary(&self) -> bool {
        !matches!(self, GateOp::Projector(_))
    }

    /// Row-major matrix of the operation as printed in the instruction set.
    pub fn matrix_entries(&self) -> Vec<Complex64> {
        let r = |x: f64| Complex64::new(x, 0.0);
        match *self {
            GateOp::H => vec![r(FRAC_1_SQRT_2), r(FRAC_1_SQRT_2), r(FRAC_1_SQRT_2), r(-FRAC_1_SQRT_2)],
            GateOp::X => vec![ZERO, ONE, ONE, ZERO],
            GateOp::Y => vec![ZERO, -I, I, ZERO],
            GateOp::Z => vec![ONE, ZERO, ZERO, -ONE],
            GateOp::S => vec![ONE, ZERO, ZERO, I],
            GateOp::T => vec![ONE, ZERO, ZERO, Complex64::from_polar(1.0, FRAC_PI_4)],
            GateOp::Rx(theta) => {
                let (s, c) = (theta / 2.0).sin_cos();
                vec![r(c), Complex64::new(0.0, -s), Complex64::new(0.0, -s), r(c)]
            }
            GateOp::Ry(theta) => {
                let (s, c) = (theta / 2.0).sin_cos();
                vec![r(c), r(-s), r(s), r(c)]
            }
            GateOp::Rz(theta) => vec![
                Complex64::from_polar(1.0, -theta / 2.0),
                ZERO,
                ZERO,
                Complex64::from_polar(1.0, theta / 2.0),
            ],
            GateOp::U4Matrix(m) => m.to_vec(),
            GateOp::U4Angles([alpha, beta, gamma, delta]) => {
                let (s, c) = (gamma / 2.0).sin_cos();
                vec![
                    Complex64::from_polar(c, alpha - beta / 2.0 - delta / 2.0),
                    -Complex64::from_polar(s, alpha - beta / 2.0 + delta / 2.0),
                    Complex64::from_polar(s, alpha + beta / 2.0 - delta / 2.0),
                    Complex64::from_polar(c, alpha + beta / 2.0 + delta / 2.0),
                ]
            }
            GateOp::Cnot => permutation(4, &[0, 1, 3, 2]),
            GateOp::Cz => diagonal(&[ONE, ONE, ONE, -ONE]),
            GateOp::Cr(theta) => diagonal(&[ONE, ONE, ONE, Complex64::from_polar(1.0, theta)]),
            GateOp::Swap => permutation(4, &[0, 2, 1, 3]),
            GateOp::ISwap => {
                let mut m = vec![ZERO; 16];
                m[0] = ONE;
                m[4 + 2] = -I;
                m[2 * 4 + 1] = -I;
                m[15] = ONE;
                m
            }
            GateOp::Toffoli => permutation(8, &[0, 1, 2, 3, 4, 5, 7, 6]),
            GateOp::Projector(0) => vec![ONE, ZERO, ZERO, ZERO],
            GateOp::Projector(_) => vec![ZERO, ZERO, ZERO, ONE],
        }
    }

    pub fn matrix(&self, qubits: Vec<usize>) -> GateMatrix {
        let dim = 1 << self.arity();
        GateMatrix::new(dim, self.matrix_entries(), qubits, self.is_unitary())
    }

    /// The single-qubit action applied to the target when every control is
    /// set, for ops of the controlled form `C..U`.
    pub fn controlled_form(&self) -> Option<(usize, GateOp)> {
        match *self {
            GateOp::Cnot => Some((1, GateOp::X)),
            GateOp::Cz => Some((1, GateOp::Z)),
            GateOp::Cr(theta) => Some((1, GateOp::U4Matrix(phase_matrix(theta)))),
            GateOp::Toffoli => Some((2, GateOp::X)),
            _ => None,
        }
    }
}

pub(crate) fn phase_matrix(theta: f64) -> [Complex64; 4] {
    [ONE, ZERO, ZERO, Complex64::from_polar(1.0, theta)]
}

fn diagonal(d: &[Complex64]) -> Vec<Complex64> {
    let n = d.len();
    let mut m = vec![ZERO; n * n];
    for (k, v) in d.iter().enumerate() {
        m[k * n + k] = *v;
    }
    m
}

/// Matrix mapping basis column `c` to row `perm[c]`.
fn permutation(n: usize, perm: &[usize]) -> Vec<Complex64> {
    let mut m = vec![ZERO; n * n];
    for (c, &r) in perm.iter().enumerate() {
        m[r * n + c] = ONE;
    }
    m
}

/// A gate bound to qubits, possibly with extra controls from `CONTROL` blocks.
///
/// `controls` are ordered most-significant first (outermost `CONTROL`
/// first); `qubits` are the primitive op's own arguments in instruction
/// order (control(s) first, target last).
#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub op: GateOp,
    pub controls: Vec<usize>,
    pub qubits: Vec<usize>,
}

/// Kernel-level view of a gate: a (multi-)controlled 2x2 or 4x4 action.
#[derive(Clone, Debug, PartialEq)]
pub enum Kernel {
    Single {
        controls: Vec<usize>,
        target: usize,
        matrix: [Complex64; 4],
    },
    Pair {
        controls: Vec<usize>,
        hi: usize,
        lo: usize,
        matrix: [Complex64; 16],
    },
}

impl Gate {
    pub fn new(op: GateOp, qubits: Vec<usize>) -> Self {
        debug_assert_eq!(op.arity(), qubits.len());
        Self { op, controls: Vec::new(), qubits }
    }

    pub fn single(op: GateOp, qubit: usize) -> Self {
        Self::new(op, vec![qubit])
    }

    /// Every qubit the gate touches: extra controls, then the op's own qubits.
    pub fn all_qubits(&self) -> Vec<usize> {
        let mut all = self.controls.clone();
        all.extend_from_slice(&self.qubits);
        all
    }

    pub fn qubit_count(&self) -> usize {
        self.controls.len() + self.qubits.len()
    }

    /// Matrix of the primitive op over its own qubits (dimension 2, 4 or 8).
    pub fn matrix(&self) -> GateMatrix {
        self.op.matrix(self.qubits.clone())
    }

    /// Full matrix over `all_qubits()`, including extra controls.
    pub fn dense_matrix(&self) -> GateMatrix {
        let base = self.matrix();
        if self.controls.is_empty() {
            return base;
        }
        let dim = base.dim() << self.controls.len();
        let offset = dim - base.dim();
        let mut entries = GateMatrix::identity(self.all_qubits()).entries().to_vec();
        for r in 0..base.dim() {
            for c in 0..base.dim() {
                entries[(offset + r) * dim + offset + c] = base.get(r, c);
            }
        }
        GateMatrix::new(dim, entries, self.all_qubits(), base.is_unitary())
    }

    pub fn kernel(&self) -> Kernel {
        if let Some((n_ctrl, local)) = self.op.controlled_form() {
            let mut controls = self.controls.clone();
            controls.extend_from_slice(&self.qubits[..n_ctrl]);
            let m = local.matrix_entries();
            return Kernel::Single {
                controls,
                target: self.qubits[n_ctrl],
                matrix: [m[0], m[1], m[2], m[3]],
            };
        }
        match self.op.arity() {
            1 => Kernel::Single {
                controls: self.controls.clone(),
                target: self.qubits[0],
                matrix: self.matrix().to_array4(),
            },
            2 => Kernel::Pair {
                controls: self.controls.clone(),
                hi: self.qubits[0],
                lo: self.qubits[1],
                matrix: self.matrix().to_array16(),
            },
            _ => unreachable!("every three-qubit op has a controlled form"),
        }
    }

    /// Gates realizing the conjugate transpose, in application order.
    pub fn adjoint(&self) -> Vec<Gate> {
        let with = |op: GateOp, qubits: Vec<usize>| Gate { op, controls: self.controls.clone(), qubits };
        let q = self.qubits.clone();
        let op = match self.op {
            GateOp::H
            | GateOp::X
            | GateOp::Y
            | GateOp::Z
            | GateOp::Cnot
            | GateOp::Cz
            | GateOp::Swap
            | GateOp::Toffoli
            | GateOp::Projector(_) => self.op,
            GateOp::S => GateOp::U4Matrix([ONE, ZERO, ZERO, -I]),
            GateOp::T => GateOp::U4Matrix([ONE, ZERO, ZERO, Complex64::from_polar(1.0, -FRAC_PI_4)]),
            GateOp::Rx(t) => GateOp::Rx(-t),
            GateOp::Ry(t) => GateOp::Ry(-t),
            GateOp::Rz(t) => GateOp::Rz(-t),
            GateOp::Cr(t) => GateOp::Cr(-t),
            GateOp::U4Matrix(m) => GateOp::U4Matrix([m[0].conj(), m[2].conj(), m[1].conj(), m[3].conj()]),
            GateOp::U4Angles([a, b, g, d]) => GateOp::U4Angles([-a, -d, -g, -b]),
            // iSWAP^4 = I and iSWAP^2 = Z(x)Z, so iSWAP^-1 = iSWAP (Z(x)Z).
            GateOp::ISwap => {
                return vec![
                    with(GateOp::ISwap, q.clone()),
                    with(GateOp::Z, vec![q[0]]),
                    with(GateOp::Z, vec![q[1]]),
                ]
            }
        };
        vec![with(op, q)]
    }
}

fn fmt_angle(f: &mut fmt::Formatter<'_>, theta: f64) -> fmt::Result {
    write!(f, "\"{theta}\"")
}

fn fmt_complex(f: &mut fmt::Formatter<'_>, z: Complex64) -> fmt::Result {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    write!(f, "{}{}{}i", z.re, sign, z.im.abs())
}

/// Prints the primitive instruction line (without `CONTROL` wrappers).
impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ", self.op.mnemonic())?;
        let q = &self.qubits;
        match self.op {
            GateOp::Rx(t) | GateOp::Ry(t) | GateOp::Rz(t) => {
                write!(f, "{},", q[0])?;
                fmt_angle(f, t)
            }
            GateOp::Cr(t) => {
                write!(f, "{},{},", q[0], q[1])?;
                fmt_angle(f, t)
            }
            GateOp::U4Matrix(m) => {
                write!(f, "{},\"", q[0])?;
                for (k, z) in m.iter().enumerate() {
                    if k > 0 {
                        f.write_str(",")?;
                    }
                    fmt_complex(f, *z)?;
                }
                f.write_str("\"")
            }
            GateOp::U4Angles([a, b, g, d]) => write!(f, "{},\"{a},{b},{g},{d}\"", q[0]),
            _ => {
                let args: Vec<String> = q.iter().map(|x| x.to_string()).collect();
                f.write_str(&args.join(","))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: &GateMatrix, b: &GateMatrix, tol: f64) -> bool {
        a.max_abs_diff(b) <= tol
    }

    #[test]
    fn t_gate_is_eighth_turn_phase() {
        let m = GateOp::T.matrix(vec![0]);
        assert_eq!(m.get(0, 0), ONE);
        assert!((m.get(1, 1) - Complex64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2)).norm() < 1e-15);
        assert_eq!(m.get(0, 1), ZERO);
    }

    #[test]
    fn u4_zero_angles_is_identity() {
        let m = GateOp::U4Angles([0.0; 4]).matrix(vec![0]);
        assert!(close(&m, &GateMatrix::identity(vec![0]), 0.0));
    }

    #[test]
    fn cr_pi_equals_cz() {
        let cr = GateOp::Cr(PI).matrix(vec![0, 1]);
        let cz = GateOp::Cz.matrix(vec![0, 1]);
        assert!(close(&cr, &cz, 1e-15));
    }

    #[test]
    fn iswap_has_minus_i_off_diagonal() {
        let m = GateOp::ISwap.matrix(vec![0, 1]);
        assert_eq!(m.get(1, 2), -I);
        assert_eq!(m.get(2, 1), -I);
    }

    #[test]
    fn every_primitive_is_unitary() {
        let ops = [
            GateOp::H,
            GateOp::X,
            GateOp::Y,
            GateOp::Z,
            GateOp::S,
            GateOp::T,
            GateOp::Rx(0.3),
            GateOp::Ry(-1.1),
            GateOp::Rz(2.5),
            GateOp::U4Angles([0.1, 0.7, -1.3, 2.9]),
            GateOp::Cnot,
            GateOp::Cz,
            GateOp::Cr(0.77),
            GateOp::Swap,
            GateOp::ISwap,
            GateOp::Toffoli,
        ];
        for op in ops {
            let m = op.matrix((0..op.arity()).collect());
            assert!(m.unitarity_error() <= 1e-12, "{op:?}");
        }
    }

    #[test]
    fn adjoint_gates_invert_the_matrix() {
        let gates = [
            Gate::single(GateOp::S, 0),
            Gate::single(GateOp::T, 0),
            Gate::single(GateOp::U4Angles([0.4, -0.2, 1.9, 0.6]), 0),
            Gate::new(GateOp::ISwap, vec![0, 1]),
            Gate::new(GateOp::Cr(1.2), vec![0, 1]),
        ];
        for g in gates {
            let mut prod = GateMatrix::identity(g.qubits.clone());
            // Embed each adjoint factor over the original gate's qubits.
            for a in g.adjoint() {
                let m = if a.qubits == g.qubits {
                    a.matrix()
                } else if a.qubits[0] == g.qubits[0] {
                    a.matrix().kron(&GateMatrix::identity(vec![g.qubits[1]]))
                } else {
                    GateMatrix::identity(vec![g.qubits[0]]).kron(&a.matrix())
                };
                prod = m.mul(&prod);
            }
            let round = prod.mul(&g.matrix());
            assert!(close(&round, &GateMatrix::identity(g.qubits.clone()), 1e-12), "{g:?}");
        }
    }

    #[test]
    fn dense_matrix_of_controlled_x_is_cnot() {
        let g = Gate { op: GateOp::X, controls: vec![2], qubits: vec![0] };
        let cnot = GateOp::Cnot.matrix(vec![2, 0]);
        assert!(close(&g.dense_matrix(), &cnot, 0.0));
    }

    #[test]
    fn kernel_of_toffoli_collects_controls() {
        let g = Gate { op: GateOp::Toffoli, controls: vec![5], qubits: vec![0, 1, 3] };
        match g.kernel() {
            Kernel::Single { controls, target, .. } => {
                assert_eq!(controls, vec![5, 0, 1]);
                assert_eq!(target, 3);
            }
            k => panic!("unexpected kernel {k:?}"),
        }
    }
}
