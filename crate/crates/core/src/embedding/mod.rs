//! Minor embedding of logical QUBO graphs into Chimera hardware.
//!
//! Each logical node becomes a *chain*: a connected set of physical qubits.
//! Chains are pairwise disjoint and every logical edge must be realized by at
//! least one physical coupler between the two chains.

mod chimera;
mod flatten;
mod heuristic;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use chimera::{build_chimera, ChimeraDims, ChimeraGraph};
pub use flatten::{default_chain_strength, flatten, unembed, Unembedded};
pub use heuristic::{embed, embed_with, EmbedFailure, EmbedOptions};

use crate::error::{Error, Result};
use crate::qubo::Qubo;

/// Undirected logical interaction graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogicalGraph {
    adj: Vec<Vec<usize>>,
}

impl LogicalGraph {
    pub fn new(num_nodes: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut adj = vec![Vec::new(); num_nodes];
        for (a, b) in edges {
            assert!(a != b && a < num_nodes && b < num_nodes, "bad edge ({a},{b})");
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        LogicalGraph { adj }
    }

    /// Nodes are QUBO bits, edges its nonzero couplings.
    pub fn from_qubo(q: &Qubo) -> Self {
        Self::new(q.num_bits(), q.quadratic_terms().map(|(k, _)| k))
    }

    pub fn num_nodes(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adj[u]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, l)| l.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChainStats {
    pub physical_qubits: usize,
    pub max_chain: usize,
    /// Lower median for an even number of chains.
    pub median_chain: usize,
}

impl fmt::Display for ChainStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "physical_qubits={} max_chain={} median_chain={}",
            self.physical_qubits, self.max_chain, self.median_chain
        )
    }
}

/// Chains indexed by logical node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Embedding {
    pub chains: Vec<Vec<usize>>,
    pub hw: ChimeraDims,
}

#[derive(Serialize, Deserialize)]
struct EmbeddingJson {
    chains: BTreeMap<String, Vec<usize>>,
    hw: ChimeraDims,
}

impl Embedding {
    pub fn new(chains: Vec<Vec<usize>>, hw: ChimeraDims) -> Self {
        Embedding { chains, hw }
    }

    pub fn chain(&self, node: usize) -> &[usize] {
        &self.chains[node]
    }

    pub fn stats(&self) -> ChainStats {
        chain_stats(self)
    }

    /// `{"chains": {"<node>": [qubits...]}, "hw": {"m":..,"n":..,"t":..}}`
    pub fn to_json(&self) -> String {
        let j = EmbeddingJson {
            chains: self
                .chains
                .iter()
                .enumerate()
                .map(|(i, c)| (i.to_string(), c.clone()))
                .collect(),
            hw: self.hw,
        };
        serde_json::to_string(&j).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: EmbeddingJson = serde_json::from_str(text)?;
        let mut keyed = Vec::with_capacity(j.chains.len());
        for (k, c) in j.chains {
            let node: usize = k
                .parse()
                .map_err(|_| Error::InvalidEmbedding(format!("bad logical id `{k}`")))?;
            keyed.push((node, c));
        }
        keyed.sort_by_key(|(n, _)| *n);
        if keyed.iter().enumerate().any(|(i, (n, _))| i != *n) {
            return Err(Error::InvalidEmbedding("logical ids must be 0..n without gaps".into()));
        }
        Ok(Embedding {
            chains: keyed.into_iter().map(|(_, c)| c).collect(),
            hw: j.hw,
        })
    }
}

pub fn chain_stats(emb: &Embedding) -> ChainStats {
    let mut lens: Vec<usize> = emb.chains.iter().map(Vec::len).collect();
    lens.sort_unstable();
    ChainStats {
        physical_qubits: lens.iter().sum(),
        max_chain: lens.last().copied().unwrap_or(0),
        median_chain: if lens.is_empty() { 0 } else { lens[(lens.len() - 1) / 2] },
    }
}

/// A broken embedding requirement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NodeCount { expected: usize, got: usize },
    EmptyChain { node: usize },
    QubitOutOfRange { node: usize, qubit: usize },
    Disjointness { qubit: usize, nodes: (usize, usize) },
    Connectivity { node: usize },
    EdgeCoverage { edge: (usize, usize) },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NodeCount { expected, got } => {
                write!(f, "node count: {got} chains for {expected} logical nodes")
            }
            Violation::EmptyChain { node } => write!(f, "empty chain: node {node}"),
            Violation::QubitOutOfRange { node, qubit } => {
                write!(f, "range: node {node} uses missing qubit {qubit}")
            }
            Violation::Disjointness { qubit, nodes } => {
                write!(f, "disjointness: qubit {qubit} shared by nodes {} and {}", nodes.0, nodes.1)
            }
            Violation::Connectivity { node } => write!(f, "connectivity: chain of node {node} is disconnected"),
            Violation::EdgeCoverage { edge } => {
                write!(f, "edge coverage: no coupler realizes logical edge ({}, {})", edge.0, edge.1)
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub violations: Vec<Violation>,
}

impl VerifyReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks disjointness, per-chain connectivity and logical-edge coverage
/// directly against the hardware adjacency.
pub fn verify_embedding(logical: &LogicalGraph, hw: &ChimeraGraph, emb: &Embedding) -> VerifyReport {
    let mut violations = Vec::new();
    if emb.chains.len() != logical.num_nodes() {
        violations.push(Violation::NodeCount {
            expected: logical.num_nodes(),
            got: emb.chains.len(),
        });
        return VerifyReport { violations };
    }
    let mut owner: Vec<Option<usize>> = vec![None; hw.num_qubits()];
    for (node, chain) in emb.chains.iter().enumerate() {
        if chain.is_empty() {
            violations.push(Violation::EmptyChain { node });
        }
        for &q in chain {
            if q >= hw.num_qubits() {
                violations.push(Violation::QubitOutOfRange { node, qubit: q });
                continue;
            }
            match owner[q] {
                Some(other) if other != node => violations.push(Violation::Disjointness {
                    qubit: q,
                    nodes: (other, node),
                }),
                _ => owner[q] = Some(node),
            }
        }
    }
    if !violations.is_empty() {
        return VerifyReport { violations };
    }

    for (node, chain) in emb.chains.iter().enumerate() {
        let mut seen = vec![chain[0]];
        let mut stack = vec![chain[0]];
        while let Some(q) = stack.pop() {
            for &r in hw.neighbors(q) {
                if owner[r] == Some(node) && !seen.contains(&r) {
                    seen.push(r);
                    stack.push(r);
                }
            }
        }
        let mut distinct = chain.clone();
        distinct.sort_unstable();
        distinct.dedup();
        if seen.len() != distinct.len() {
            violations.push(Violation::Connectivity { node });
        }
    }

    for (u, v) in logical.edges() {
        let covered = emb.chains[u]
            .iter()
            .any(|&a| hw.neighbors(a).iter().any(|&b| owner[b] == Some(v)));
        if !covered {
            violations.push(Violation::EdgeCoverage { edge: (u, v) });
        }
    }
    VerifyReport { violations }
}
