use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Chimera lattice shape: `m` rows and `n` columns of `K_{t,t}` unit cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChimeraDims {
    pub m: usize,
    pub n: usize,
    pub t: usize,
}

impl ChimeraDims {
    /// The 16x16x4 lattice of the 2000-qubit annealer generation.
    pub const DW2000Q: ChimeraDims = ChimeraDims { m: 16, n: 16, t: 4 };

    pub fn num_qubits(&self) -> usize {
        2 * self.m * self.n * self.t
    }
}

impl Default for ChimeraDims {
    fn default() -> Self {
        Self::DW2000Q
    }
}

impl fmt::Display for ChimeraDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.m, self.n, self.t)
    }
}

impl FromStr for ChimeraDims {
    type Err = Error;

    /// Parses `MxNxT`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(['x', 'X']).collect();
        let bad = || Error::InvalidParams(format!("bad chimera shape `{s}`, expected MxNxT"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let nums: Vec<usize> = parts
            .iter()
            .map(|p| p.parse().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        if nums.iter().any(|&v| v == 0) {
            return Err(bad());
        }
        Ok(ChimeraDims {
            m: nums[0],
            n: nums[1],
            t: nums[2],
        })
    }
}

/// Chimera hardware graph.
///
/// Qubit `((row * n + col) * 2 + u) * t + k` is the `k`-th qubit of shore `u`
/// in cell `(row, col)`. Shore 0 couples vertically to the same index in the
/// cells above and below, shore 1 horizontally to the left and right.
#[derive(Clone, Debug)]
pub struct ChimeraGraph {
    dims: ChimeraDims,
    adj: Vec<Vec<usize>>,
}

impl ChimeraGraph {
    pub fn new(m: usize, n: usize, t: usize) -> Self {
        Self::from_dims(ChimeraDims { m, n, t })
    }

    pub fn from_dims(dims: ChimeraDims) -> Self {
        assert!(dims.m >= 1 && dims.n >= 1 && dims.t >= 1, "chimera dimensions must be >= 1");
        let ChimeraDims { m, n, t } = dims;
        let mut adj = vec![Vec::new(); dims.num_qubits()];
        let idx = |r: usize, c: usize, u: usize, k: usize| ((r * n + c) * 2 + u) * t + k;
        let mut link = |a: usize, b: usize| {
            adj[a].push(b);
            adj[b].push(a);
        };
        for r in 0..m {
            for c in 0..n {
                for k in 0..t {
                    for j in 0..t {
                        link(idx(r, c, 0, k), idx(r, c, 1, j));
                    }
                    if r + 1 < m {
                        link(idx(r, c, 0, k), idx(r + 1, c, 0, k));
                    }
                    if c + 1 < n {
                        link(idx(r, c, 1, k), idx(r, c + 1, 1, k));
                    }
                }
            }
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        ChimeraGraph { dims, adj }
    }

    pub fn dims(&self) -> ChimeraDims {
        self.dims
    }

    pub fn num_qubits(&self) -> usize {
        self.adj.len()
    }

    pub fn num_couplers(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, q: usize) -> &[usize] {
        &self.adj[q]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.adj.len() && self.adj[a].binary_search(&b).is_ok()
    }

    /// `(row, col, shore, index)` of a qubit.
    pub fn coordinates(&self, q: usize) -> (usize, usize, usize, usize) {
        let t = self.dims.t;
        let k = q % t;
        let u = (q / t) % 2;
        let cell = q / (2 * t);
        (cell / self.dims.n, cell % self.dims.n, u, k)
    }
}

pub fn build_chimera(m: usize, n: usize, t: usize) -> ChimeraGraph {
    ChimeraGraph::new(m, n, t)
}
