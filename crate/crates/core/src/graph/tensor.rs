use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

/// A Boolean worldline variable; one vertex of the graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VariableId(pub u32);

impl fmt::Display for VariableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// Tensors at least this large are filled in parallel.
const PARALLEL_ENTRIES: usize = 1 << 15;

/// A tensor over Boolean legs; `values` is indexed lexicographically with
/// the first leg as the most significant bit.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeTensor {
    pub legs: Vec<VariableId>,
    pub values: Vec<Complex64>,
}

impl EdgeTensor {
    pub fn new(legs: Vec<VariableId>, values: Vec<Complex64>) -> Self {
        assert_eq!(values.len(), 1 << legs.len());
        Self { legs, values }
    }

    pub fn scalar(value: Complex64) -> Self {
        Self { legs: Vec::new(), values: vec![value] }
    }

    #[inline]
    pub fn rank(&self) -> usize {
        self.legs.len()
    }

    pub fn has_leg(&self, v: VariableId) -> bool {
        self.legs.contains(&v)
    }

    fn position(&self, v: VariableId) -> Option<usize> {
        self.legs.iter().position(|&l| l == v)
    }

    /// Entry for the given leg bits, in leg order.
    pub fn get(&self, bits: &[u8]) -> Complex64 {
        let idx = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
        self.values[idx]
    }

    /// Restricts leg `v` to `bit`, dropping it. Returns `self` if `v` is absent.
    pub fn slice(&self, v: VariableId, bit: u8) -> EdgeTensor {
        let Some(p) = self.position(v) else { return self.clone() };
        let r = self.rank();
        let shift = r - 1 - p;
        let low = (1usize << shift) - 1;
        let set = (bit as usize) << shift;
        let values = (0..1usize << (r - 1))
            .map(|o| self.values[((o & !low) << 1) | set | (o & low)])
            .collect();
        let mut legs = self.legs.clone();
        legs.remove(p);
        EdgeTensor { legs, values }
    }

    /// Sums leg `v` out (integral elimination).
    pub fn sum_over(&self, v: VariableId) -> EdgeTensor {
        let p = self.position(v).expect("leg to eliminate is not on this tensor");
        let r = self.rank();
        let shift = r - 1 - p;
        let low = (1usize << shift) - 1;
        let step = 1usize << shift;
        let at = |o: usize| {
            let i0 = ((o & !low) << 1) | (o & low);
            self.values[i0] + self.values[i0 | step]
        };
        let size = 1usize << (r - 1);
        let values = if size >= PARALLEL_ENTRIES {
            (0..size).into_par_iter().map(at).collect()
        } else {
            (0..size).map(at).collect()
        };
        let mut legs = self.legs.clone();
        legs.remove(p);
        EdgeTensor { legs, values }
    }

    /// Legs of `merge(self, other)`: own legs, then other's new legs.
    pub fn merged_legs(&self, other: &EdgeTensor) -> Vec<VariableId> {
        let mut legs = self.legs.clone();
        legs.extend(other.legs.iter().filter(|l| !self.legs.contains(l)));
        legs
    }
}

/// Elementwise product over shared legs, without summation.
///
/// The result's legs are `a`'s legs followed by the legs of `b` that `a`
/// lacks, so its rank is `rank(a) + rank(b) - shared`.
pub fn merge_edges(a: &EdgeTensor, b: &EdgeTensor) -> EdgeTensor {
    let legs = a.merged_legs(b);
    let (ra, rc) = (a.rank(), legs.len());
    let rn = rc - ra;
    // Index of `b` split into the part fixed by `a`'s index and the part
    // fixed by the new low bits of the result.
    let rb = b.rank();
    let mut from_a = vec![0usize; 1 << ra];
    let mut from_low = vec![0usize; 1 << rn];
    for (j, leg) in b.legs.iter().enumerate() {
        let bbit = 1usize << (rb - 1 - j);
        let pc = legs.iter().position(|l| l == leg).unwrap();
        if pc < ra {
            let abit = 1usize << (ra - 1 - pc);
            for (ia, slot) in from_a.iter_mut().enumerate() {
                if ia & abit != 0 {
                    *slot |= bbit;
                }
            }
        } else {
            let lbit = 1usize << (rc - 1 - pc);
            for (il, slot) in from_low.iter_mut().enumerate() {
                if il & lbit != 0 {
                    *slot |= bbit;
                }
            }
        }
    }
    let low_mask = (1usize << rn) - 1;
    let at = |c: usize| {
        let ia = c >> rn;
        a.values[ia] * b.values[from_a[ia] | from_low[c & low_mask]]
    };
    let size = 1usize << rc;
    let values = if size >= PARALLEL_ENTRIES {
        (0..size).into_par_iter().map(at).collect()
    } else {
        (0..size).map(at).collect()
    };
    EdgeTensor { legs, values }
}

/// Sums leg `v` out of `t`; the caller is responsible for `v` appearing nowhere else.
pub fn eliminate_vertex_integral(t: &EdgeTensor, v: VariableId) -> EdgeTensor {
    t.sum_over(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn v(i: u32) -> VariableId {
        VariableId(i)
    }

    fn h(legs: [u32; 2]) -> EdgeTensor {
        let s = FRAC_1_SQRT_2;
        EdgeTensor::new(vec![v(legs[0]), v(legs[1])], vec![c(s), c(s), c(s), c(-s)])
    }

    #[test]
    fn merge_two_hadamards() {
        let m = merge_edges(&h([0, 1]), &h([1, 2]));
        assert_eq!(m.legs, vec![v(0), v(1), v(2)]);
        let hm = |i: u8, j: u8| if i == 1 && j == 1 { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 };
        for b0 in 0..2 {
            for b1 in 0..2 {
                for d1 in 0..2 {
                    let want = hm(b0, b1) * hm(b1, d1);
                    assert!((m.get(&[b0, b1, d1]) - c(want)).norm() < 1e-15);
                }
            }
        }
        let id = m.sum_over(v(1));
        assert_eq!(id.legs, vec![v(0), v(2)]);
        for (k, want) in [1.0, 0.0, 0.0, 1.0].iter().enumerate() {
            assert!((id.values[k] - c(*want)).norm() < 1e-15);
        }
    }

    #[test]
    fn merge_with_ones_is_identity() {
        let t = EdgeTensor::new(vec![v(3), v(1)], vec![c(1.0), c(2.0), c(3.0), c(4.0)]);
        let ones = EdgeTensor::new(vec![v(1)], vec![c(1.0), c(1.0)]);
        assert_eq!(merge_edges(&t, &ones), t);
    }

    #[test]
    fn merge_reordered_shared_legs() {
        let a = EdgeTensor::new(vec![v(0), v(1)], (0..4).map(|k| c(k as f64 + 1.0)).collect());
        let b = EdgeTensor::new(vec![v(2), v(1), v(0)], (0..8).map(|k| c(10.0 * k as f64 + 1.0)).collect());
        let m = merge_edges(&a, &b);
        assert_eq!(m.legs, vec![v(0), v(1), v(2)]);
        for x in 0..2u8 {
            for y in 0..2u8 {
                for z in 0..2u8 {
                    assert_eq!(m.get(&[x, y, z]), a.get(&[x, y]) * b.get(&[z, y, x]));
                }
            }
        }
    }

    #[test]
    fn sum_and_slice() {
        let t = EdgeTensor::new(vec![v(0)], vec![c(2.0), c(5.0)]);
        assert_eq!(eliminate_vertex_integral(&t, v(0)).values, vec![c(7.0)]);
        let row = h([0, 1]).slice(v(0), 0);
        assert!((row.sum_over(v(1)).values[0] - c(2.0f64.sqrt())).norm() < 1e-15);
        let b = EdgeTensor::new(vec![v(1), v(2)], vec![c(1.0), c(2.0), c(3.0), c(4.0)]);
        assert_eq!(b.slice(v(1), 1).values, vec![c(3.0), c(4.0)]);
        assert_eq!(b.slice(v(2), 0).values, vec![c(1.0), c(3.0)]);
    }
}
