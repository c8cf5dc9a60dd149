use crate::error::{Error, Result};
use crate::qubo::{BitVector, Qubo};

use super::{verify_embedding, ChimeraGraph, Embedding, LogicalGraph};

/// `1 + max |c|` over the logical coefficients.
pub fn default_chain_strength(logical: &Qubo) -> f64 {
    1.0 + logical.max_abs_coefficient()
}

/// Physical QUBO over all hardware qubits.
///
/// Logical biases are split evenly over the chain; each logical coupling goes
/// on the first available coupler between the two chains. Every coupler
/// inside a chain carries `chain_strength * (a + b - 2ab)`, which is zero when
/// the chain agrees and at least `chain_strength` when it is broken.
pub fn flatten(logical: &Qubo, emb: &Embedding, chain_strength: f64) -> Result<Qubo> {
    if !(chain_strength > 0.0 && chain_strength.is_finite()) {
        return Err(Error::InvalidParams(format!("chain strength must be > 0, got {chain_strength}")));
    }
    let hw = ChimeraGraph::from_dims(emb.hw);
    let report = verify_embedding(&LogicalGraph::from_qubo(logical), &hw, emb);
    if !report.is_valid() {
        return Err(Error::InvalidEmbedding(report.to_string()));
    }

    let mut phys = Qubo::new(hw.num_qubits());
    for (i, c) in logical.linear_terms() {
        let chain = emb.chain(i);
        let share = c / chain.len() as f64;
        for &q in chain {
            phys.add_linear(q, share);
        }
    }
    for ((i, j), c) in logical.quadratic_terms() {
        let (a, b) = emb
            .chain(i)
            .iter()
            .flat_map(|&a| emb.chain(j).iter().map(move |&b| (a, b)))
            .filter(|&(a, b)| hw.has_edge(a, b))
            .min()
            .expect("verified embedding covers every edge");
        phys.add_quadratic(a, b, c);
    }
    for chain in &emb.chains {
        for (x, &a) in chain.iter().enumerate() {
            for &b in &chain[x + 1..] {
                if hw.has_edge(a, b) {
                    phys.add_quadratic(a, b, -2.0 * chain_strength);
                    phys.add_linear(a, chain_strength);
                    phys.add_linear(b, chain_strength);
                }
            }
        }
    }
    Ok(phys)
}

/// Logical sample recovered from a physical one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Unembedded {
    pub bits: BitVector,
    /// Logical nodes whose chain disagreed.
    pub broken_chains: Vec<usize>,
}

impl Unembedded {
    pub fn is_broken(&self) -> bool {
        !self.broken_chains.is_empty()
    }
}

/// Majority vote per chain; ties resolve to 0 and are flagged like any
/// other broken chain.
pub fn unembed(physical: &BitVector, emb: &Embedding) -> Result<Unembedded> {
    if physical.len() != emb.hw.num_qubits() {
        return Err(Error::LengthMismatch {
            expected: emb.hw.num_qubits(),
            got: physical.len(),
        });
    }
    let mut bits = BitVector::zeros(emb.chains.len());
    let mut broken_chains = Vec::new();
    for (node, chain) in emb.chains.iter().enumerate() {
        let ones = chain.iter().filter(|&&q| physical.get(q)).count();
        if ones != 0 && ones != chain.len() {
            broken_chains.push(node);
        }
        bits.set(node, 2 * ones > chain.len());
    }
    Ok(Unembedded { bits, broken_chains })
}
