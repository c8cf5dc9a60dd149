//! Sparse QUBO model: minimize `sum_i c_ii x_i + sum_{i<j} c_ij x_i x_j` over
//! `x in {0,1}^n`, plus graph statistics and the `.qubo` text format.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};

/// Binary assignment to the bits of a [`Qubo`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector(Vec<bool>);

impl BitVector {
    pub fn new(bits: Vec<bool>) -> Self {
        BitVector(bits)
    }

    pub fn zeros(len: usize) -> Self {
        BitVector(vec![false; len])
    }

    /// Bit `i` of the vector is bit `i` of `mask`.
    pub fn from_mask(mask: u64, len: usize) -> Self {
        BitVector((0..len).map(|i| mask >> i & 1 == 1).collect())
    }

    pub fn from_ones(len: usize, ones: impl IntoIterator<Item = usize>) -> Self {
        let mut v = vec![false; len];
        for i in ones {
            v[i] = true;
        }
        BitVector(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, v: bool) {
        self.0[i] = v;
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    /// Hex digits of `sum_i x_i 2^i`, most significant digit first, padded
    /// to `ceil(len / 4)` digits.
    pub fn to_hex(&self) -> String {
        let digits = self.0.len().div_ceil(4);
        let mut out = String::with_capacity(digits);
        for d in (0..digits).rev() {
            let mut nibble = 0u32;
            for b in 0..4 {
                let i = 4 * d + b;
                if i < self.0.len() && self.0[i] {
                    nibble |= 1 << b;
                }
            }
            out.push(char::from_digit(nibble, 16).unwrap());
        }
        out
    }

    pub fn from_hex(hex: &str, len: usize) -> Option<Self> {
        let mut bits = vec![false; len];
        for (pos, ch) in hex.chars().rev().enumerate() {
            let nibble = ch.to_digit(16)?;
            for b in 0..4 {
                if nibble >> b & 1 == 1 {
                    let i = 4 * pos + b;
                    if i >= len {
                        return None;
                    }
                    bits[i] = true;
                }
            }
        }
        Some(BitVector(bits))
    }
}

impl From<Vec<bool>> for BitVector {
    fn from(v: Vec<bool>) -> Self {
        BitVector(v)
    }
}

/// Sparse upper-triangular QUBO with canonical `(min, max)` pair keys.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Qubo {
    num_bits: usize,
    linear: BTreeMap<usize, f64>,
    quadratic: BTreeMap<(usize, usize), f64>,
}

fn canonical(i: usize, j: usize) -> (usize, usize) {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

impl Qubo {
    pub fn new(num_bits: usize) -> Self {
        Qubo {
            num_bits,
            ..Default::default()
        }
    }

    pub fn num_bits(&self) -> usize {
        self.num_bits
    }

    /// Adds `value` to `c_ii`. Coefficients that cancel to zero are dropped.
    pub fn add_linear(&mut self, i: usize, value: f64) {
        assert!(i < self.num_bits, "bit {i} out of range {}", self.num_bits);
        let v = self.linear.entry(i).or_insert(0.0);
        *v += value;
        if *v == 0.0 {
            self.linear.remove(&i);
        }
    }

    /// Adds `value` to `c_ij` for `i != j`; orientation does not matter.
    pub fn add_quadratic(&mut self, i: usize, j: usize, value: f64) {
        assert!(i != j, "quadratic term needs distinct bits, got ({i},{i})");
        assert!(i < self.num_bits && j < self.num_bits, "pair ({i},{j}) out of range");
        let key = canonical(i, j);
        let v = self.quadratic.entry(key).or_insert(0.0);
        *v += value;
        if *v == 0.0 {
            self.quadratic.remove(&key);
        }
    }

    pub fn linear(&self, i: usize) -> f64 {
        self.linear.get(&i).copied().unwrap_or(0.0)
    }

    pub fn quadratic(&self, i: usize, j: usize) -> f64 {
        self.quadratic.get(&canonical(i, j)).copied().unwrap_or(0.0)
    }

    pub fn linear_terms(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.linear.iter().map(|(&i, &v)| (i, v))
    }

    pub fn quadratic_terms(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.quadratic.iter().map(|(&k, &v)| (k, v))
    }

    pub fn num_linear(&self) -> usize {
        self.linear.len()
    }

    pub fn num_quadratic(&self) -> usize {
        self.quadratic.len()
    }

    /// Largest absolute coefficient, 0 for an empty model.
    pub fn max_abs_coefficient(&self) -> f64 {
        self.linear
            .values()
            .chain(self.quadratic.values())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Smallest nonzero absolute coefficient.
    pub fn min_abs_coefficient(&self) -> Option<f64> {
        self.linear
            .values()
            .chain(self.quadratic.values())
            .map(|v| v.abs())
            .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))))
    }

    /// Returns a copy with every coefficient multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Qubo {
        let mut q = Qubo::new(self.num_bits);
        for (i, v) in self.linear_terms() {
            q.add_linear(i, v * factor);
        }
        for ((i, j), v) in self.quadratic_terms() {
            q.add_quadratic(i, j, v * factor);
        }
        q
    }

    pub fn energy(&self, x: &BitVector) -> Result<f64> {
        if x.len() != self.num_bits {
            return Err(Error::LengthMismatch {
                expected: self.num_bits,
                got: x.len(),
            });
        }
        Ok(self.energy_unchecked(x.bits()))
    }

    pub(crate) fn energy_unchecked(&self, x: &[bool]) -> f64 {
        let lin: f64 = self
            .linear
            .iter()
            .filter(|(&i, _)| x[i])
            .map(|(_, &v)| v)
            .sum();
        let quad: f64 = self
            .quadratic
            .iter()
            .filter(|(&(i, j), _)| x[i] && x[j])
            .map(|(_, &v)| v)
            .sum();
        lin + quad
    }

    /// Neighbor lists (with couplings) per bit.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.num_bits];
        for (&(i, j), &v) in &self.quadratic {
            adj[i].push((j, v));
            adj[j].push((i, v));
        }
        adj
    }

    pub fn graph_stats(&self) -> GraphStats {
        let mut degree = vec![0usize; self.num_bits];
        for &(i, j) in self.quadratic.keys() {
            degree[i] += 1;
            degree[j] += 1;
        }
        let edges = self.quadratic.len();
        let n = self.num_bits;
        let pairs = n * n.saturating_sub(1) / 2;
        GraphStats {
            nodes: n,
            edges,
            density: if pairs == 0 { 0.0 } else { edges as f64 / pairs as f64 },
            max_degree: degree.into_iter().max().unwrap_or(0),
        }
    }
}

/// Size of the QUBO interaction graph.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GraphStats {
    pub nodes: usize,
    pub edges: usize,
    pub density: f64,
    pub max_degree: usize,
}

impl fmt::Display for GraphStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} qubits, {} edges", self.nodes, self.edges)
    }
}

pub fn energy(q: &Qubo, x: &BitVector) -> Result<f64> {
    q.energy(x)
}

pub fn graph_stats(q: &Qubo) -> GraphStats {
    q.graph_stats()
}

/// Reads the `.qubo` format: a `p qubo <num_bits>` header, then `i i bias` and
/// `i j coupling` lines with 0-based indices; `#` starts a comment.
pub fn read_qubo(text: &str) -> Result<Qubo> {
    let mut qubo: Option<Qubo> = None;
    let mut seen_lin = std::collections::BTreeSet::new();
    let mut seen_quad = std::collections::BTreeSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields[0] == "p" {
            if qubo.is_some() {
                return Err(Error::parse(line_no, "duplicate header"));
            }
            if fields.len() != 3 || fields[1] != "qubo" {
                return Err(Error::parse(line_no, "malformed header, expected `p qubo <num_bits>`"));
            }
            let n = fields[2]
                .parse::<usize>()
                .map_err(|_| Error::parse(line_no, format!("bad bit count `{}`", fields[2])))?;
            qubo = Some(Qubo::new(n));
            continue;
        }
        let Some(q) = qubo.as_mut() else {
            return Err(Error::parse(line_no, "term before `p qubo` header"));
        };
        if fields.len() != 3 {
            return Err(Error::parse(line_no, "expected `i j value`"));
        }
        let i: usize = fields[0]
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad index `{}`", fields[0])))?;
        let j: usize = fields[1]
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad index `{}`", fields[1])))?;
        let v: f64 = fields[2]
            .parse()
            .map_err(|_| Error::parse(line_no, format!("bad coefficient `{}`", fields[2])))?;
        if !v.is_finite() {
            return Err(Error::parse(line_no, "coefficient must be finite"));
        }
        if i >= q.num_bits || j >= q.num_bits {
            return Err(Error::parse(
                line_no,
                format!("index {} out of range for {} bits", i.max(j), q.num_bits),
            ));
        }
        if i == j {
            if !seen_lin.insert(i) {
                return Err(Error::parse(line_no, format!("duplicate term ({i},{i})")));
            }
            q.add_linear(i, v);
        } else {
            if !seen_quad.insert(canonical(i, j)) {
                return Err(Error::parse(line_no, format!("duplicate term ({i},{j})")));
            }
            q.add_quadratic(i, j, v);
        }
    }
    qubo.ok_or_else(|| Error::parse(1, "missing `p qubo` header"))
}

/// Writes the `.qubo` format. `{:?}` on f64 is the shortest representation
/// that parses back to the same value.
pub fn write_qubo(q: &Qubo) -> String {
    let mut out = format!("p qubo {}\n", q.num_bits);
    for (i, v) in q.linear_terms() {
        let _ = writeln!(out, "{i} {i} {v:?}");
    }
    for ((i, j), v) in q.quadratic_terms() {
        let _ = writeln!(out, "{i} {j} {v:?}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Dense symmetric-matrix oracle: E = sum_i Q_ii x_i + 1/2 sum_{i!=j} Q_ij x_i x_j.
    fn dense_energy(q: &Qubo, x: &[bool]) -> f64 {
        let n = q.num_bits();
        let mut m = vec![vec![0.0; n]; n];
        for (i, v) in q.linear_terms() {
            m[i][i] = v;
        }
        for ((i, j), v) in q.quadratic_terms() {
            m[i][j] = v;
            m[j][i] = v;
        }
        let mut e = 0.0;
        for i in 0..n {
            for j in 0..n {
                if x[i] && x[j] {
                    e += if i == j { m[i][i] } else { 0.5 * m[i][j] };
                }
            }
        }
        e
    }

    fn arb_qubo() -> impl Strategy<Value = Qubo> {
        (1usize..12).prop_flat_map(|n| {
            (
                Just(n),
                prop::collection::vec((0..n, -5i32..=5), 0..n),
                prop::collection::vec((0..n, 0..n, -5i32..=5), 0..3 * n),
            )
                .prop_map(|(n, lin, quad)| {
                    let mut q = Qubo::new(n);
                    for (i, v) in lin {
                        q.add_linear(i, v as f64 * 0.25);
                    }
                    for (i, j, v) in quad {
                        if i != j {
                            q.add_quadratic(i, j, v as f64 * 0.5);
                        }
                    }
                    q
                })
        })
    }

    #[test]
    fn single_linear_term() {
        let mut q = Qubo::new(1);
        q.add_linear(0, -1.0);
        assert_eq!(q.energy(&BitVector::new(vec![true])).unwrap(), -1.0);
        assert!(matches!(q.energy(&BitVector::zeros(2)), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn zero_coefficients_are_not_stored() {
        let mut q = Qubo::new(3);
        q.add_quadratic(2, 0, 1.5);
        q.add_quadratic(0, 2, -1.5);
        q.add_linear(1, 0.0);
        assert_eq!(q.num_quadratic(), 0);
        assert_eq!(q.num_linear(), 0);
    }

    #[test]
    fn orientation_does_not_matter() {
        let mut a = Qubo::new(4);
        let mut b = Qubo::new(4);
        a.add_quadratic(1, 3, 2.0);
        b.add_quadratic(3, 1, 2.0);
        assert_eq!(a, b);
        assert_eq!(a.quadratic(3, 1), 2.0);
    }

    #[test]
    fn empty_qubo_stats() {
        let s = Qubo::new(0).graph_stats();
        assert_eq!((s.nodes, s.edges, s.max_degree), (0, 0, 0));
    }

    #[test]
    fn reads_simple_file() {
        let q = read_qubo("p qubo 2\n0 0 -1.0\n0 1 2.0\n").unwrap();
        assert_eq!(q.linear(0), -1.0);
        assert_eq!(q.quadratic(0, 1), 2.0);
        assert_eq!(q.num_bits(), 2);
    }

    #[test]
    fn read_errors_carry_line_numbers() {
        let dup = read_qubo("p qubo 2\n0 1 1\n# c\n1 0 2\n").unwrap_err();
        assert!(matches!(dup, Error::Parse { line: 4, .. }), "{dup}");
        let range = read_qubo("p qubo 2\n0 2 1\n").unwrap_err();
        assert!(matches!(range, Error::Parse { line: 2, .. }));
        assert!(read_qubo("0 0 1\n").is_err());
        assert!(read_qubo("p qubo 2\n0 0\n").is_err());
    }

    #[test]
    fn hex_round_trip() {
        let v = BitVector::from_ones(9, [0, 3, 8]);
        assert_eq!(v.to_hex(), "109");
        assert_eq!(BitVector::from_hex("109", 9).unwrap(), v);
        assert!(BitVector::from_hex("ff", 5).is_none());
    }

    proptest! {
        #[test]
        fn energy_matches_dense_oracle(q in arb_qubo(), seed in any::<u64>()) {
            let n = q.num_bits();
            let x = BitVector::from_mask(seed, n);
            let e = q.energy(&x).unwrap();
            prop_assert!((e - dense_energy(&q, x.bits())).abs() < 1e-9);
            prop_assert_eq!(q.energy(&BitVector::zeros(n)).unwrap(), 0.0);
        }

        #[test]
        fn write_read_identity(q in arb_qubo()) {
            prop_assert_eq!(read_qubo(&write_qubo(&q)).unwrap(), q);
        }
    }
}
